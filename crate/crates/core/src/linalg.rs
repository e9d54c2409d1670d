//! Dense/sparse matrix plumbing, banded LU factorization and SVD helpers.
//!
//! Shifted solves `K(s, p) x = b` go through [`Factorization`], a banded LU
//! with partial pivoting. Sparse operators are first reordered with reverse
//! Cuthill-McKee when that narrows the band; dense operators are simply a
//! band of full width.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{ComplexField, DMatrix, SVD};
use num_complex::Complex64;
use num_traits::Zero;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type RMatrix = DMatrix<f64>;

const C0: Complex64 = Complex64::new(0.0, 0.0);

/// Compressed sparse row matrix with complex entries.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<Complex64>,
}

impl SparseMatrix {
    /// Builds from `(row, col, value)` triplets; duplicates are summed, explicit zeros kept.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: &[(usize, usize, Complex64)],
    ) -> Result<Self> {
        let mut counts = vec![0usize; nrows + 1];
        for &(i, j, _) in triplets {
            if i >= nrows || j >= ncols {
                return Err(Error::Dimension(alloc::format!(
                    "entry ({i}, {j}) outside a {nrows}x{ncols} matrix"
                )));
            }
            counts[i + 1] += 1;
        }
        for i in 0..nrows {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut cols = vec![0usize; triplets.len()];
        let mut vals = vec![C0; triplets.len()];
        for &(i, j, v) in triplets {
            cols[next[i]] = j;
            vals[next[i]] = v;
            next[i] += 1;
        }

        let mut row_ptr = Vec::with_capacity(nrows + 1);
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        row_ptr.push(0);
        let mut order: Vec<usize> = Vec::new();
        for i in 0..nrows {
            order.clear();
            order.extend(counts[i]..counts[i + 1]);
            order.sort_by_key(|&k| cols[k]);
            for &k in &order {
                if col_idx.len() > row_ptr[i] && *col_idx.last().unwrap() == cols[k] {
                    *values.last_mut().unwrap() += vals[k];
                } else {
                    col_idx.push(cols[k]);
                    values.push(vals[k]);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Ok(Self {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn from_real_triplets(
        nrows: usize,
        ncols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self> {
        let complex: Vec<_> = triplets
            .iter()
            .map(|&(i, j, v)| (i, j, Complex64::new(v, 0.0)))
            .collect();
        Self::from_triplets(nrows, ncols, &complex)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![Complex64::new(1.0, 0.0); n],
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Iterates stored entries in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.nrows).flat_map(move |i| {
            (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (i, self.col_idx[k], self.values[k]))
        })
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        let row = &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]];
        match row.binary_search(&j) {
            Ok(k) => self.values[self.row_ptr[i] + k],
            Err(_) => C0,
        }
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.nrows, self.ncols);
        for (i, j, v) in self.triplets() {
            out[(i, j)] += v;
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let t: Vec<_> = self.triplets().map(|(i, j, v)| (j, i, v)).collect();
        Self::from_triplets(self.ncols, self.nrows, &t).expect("transpose keeps bounds")
    }

    /// `self * x`
    pub fn mul_dense(&self, x: &CMatrix) -> CMatrix {
        assert_eq!(self.ncols, x.nrows(), "sparse product dimension");
        let mut out = CMatrix::zeros(self.nrows, x.ncols());
        for c in 0..x.ncols() {
            let xc = x.column(c);
            let mut oc = out.column_mut(c);
            for i in 0..self.nrows {
                let mut acc = C0;
                for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                    acc += self.values[k] * xc[self.col_idx[k]];
                }
                oc[i] = acc;
            }
        }
        out
    }

    /// `selfᵀ * x` (plain transpose)
    pub fn tr_mul_dense(&self, x: &CMatrix) -> CMatrix {
        assert_eq!(self.nrows, x.nrows(), "sparse product dimension");
        let mut out = CMatrix::zeros(self.ncols, x.ncols());
        for c in 0..x.ncols() {
            for i in 0..self.nrows {
                let xi = x[(i, c)];
                if xi.is_zero() {
                    continue;
                }
                for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                    out[(self.col_idx[k], c)] += self.values[k] * xi;
                }
            }
        }
        out
    }

    pub fn is_real(&self) -> bool {
        self.values.iter().all(|v| v.im == 0.0)
    }

    pub fn norm1(&self) -> f64 {
        let mut colsum = vec![0.0; self.ncols];
        for (_, j, v) in self.triplets() {
            colsum[j] += v.norm();
        }
        colsum.into_iter().fold(0.0, f64::max)
    }
}

/// A constant matrix attached to a structured term.
#[derive(Debug, Clone, PartialEq)]
pub enum TermMatrix {
    Dense(CMatrix),
    Sparse(SparseMatrix),
}

impl TermMatrix {
    pub fn from_real(m: &RMatrix) -> Self {
        TermMatrix::Dense(m.map(|v| Complex64::new(v, 0.0)))
    }

    pub fn nrows(&self) -> usize {
        match self {
            TermMatrix::Dense(m) => m.nrows(),
            TermMatrix::Sparse(m) => m.nrows(),
        }
    }

    pub fn ncols(&self) -> usize {
        match self {
            TermMatrix::Dense(m) => m.ncols(),
            TermMatrix::Sparse(m) => m.ncols(),
        }
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self, TermMatrix::Sparse(_))
    }

    pub fn is_real(&self) -> bool {
        match self {
            TermMatrix::Dense(m) => m.iter().all(|v| v.im == 0.0),
            TermMatrix::Sparse(m) => m.is_real(),
        }
    }

    pub fn to_dense(&self) -> CMatrix {
        match self {
            TermMatrix::Dense(m) => m.clone(),
            TermMatrix::Sparse(m) => m.to_dense(),
        }
    }

    pub fn mul_dense(&self, x: &CMatrix) -> CMatrix {
        match self {
            TermMatrix::Dense(m) => m * x,
            TermMatrix::Sparse(m) => m.mul_dense(x),
        }
    }

    pub fn tr_mul_dense(&self, x: &CMatrix) -> CMatrix {
        match self {
            TermMatrix::Dense(m) => m.transpose() * x,
            TermMatrix::Sparse(m) => m.tr_mul_dense(x),
        }
    }

    pub fn transpose(&self) -> Self {
        match self {
            TermMatrix::Dense(m) => TermMatrix::Dense(m.transpose()),
            TermMatrix::Sparse(m) => TermMatrix::Sparse(m.transpose()),
        }
    }

    pub fn norm1(&self) -> f64 {
        match self {
            TermMatrix::Dense(m) => m
                .column_iter()
                .map(|c| c.iter().map(|v| v.norm()).sum::<f64>())
                .fold(0.0, f64::max),
            TermMatrix::Sparse(m) => m.norm1(),
        }
    }

    /// `Σ coeffᵢ · Mᵢ`; sparse only if every summand is sparse.
    pub fn linear_combination(
        nrows: usize,
        ncols: usize,
        terms: &[(Complex64, &TermMatrix)],
    ) -> TermMatrix {
        if terms.iter().all(|(_, m)| m.is_sparse()) {
            let mut trip = Vec::new();
            for (c, m) in terms {
                if let TermMatrix::Sparse(sp) = m {
                    trip.extend(sp.triplets().map(|(i, j, v)| (i, j, *c * v)));
                }
            }
            TermMatrix::Sparse(
                SparseMatrix::from_triplets(nrows, ncols, &trip).expect("terms share dimensions"),
            )
        } else {
            let mut out = CMatrix::zeros(nrows, ncols);
            for (c, m) in terms {
                match m {
                    TermMatrix::Dense(d) => out.zip_apply(d, |o, v| *o += *c * v),
                    TermMatrix::Sparse(sp) => {
                        for (i, j, v) in sp.triplets() {
                            out[(i, j)] += *c * v;
                        }
                    }
                }
            }
            TermMatrix::Dense(out)
        }
    }

    fn pattern(&self) -> Vec<(usize, usize, Complex64)> {
        match self {
            TermMatrix::Sparse(m) => m.triplets().collect(),
            TermMatrix::Dense(m) => {
                let mut out = Vec::new();
                for j in 0..m.ncols() {
                    for i in 0..m.nrows() {
                        let v = m[(i, j)];
                        if !v.is_zero() {
                            out.push((i, j, v));
                        }
                    }
                }
                out
            }
        }
    }
}

/// Banded LU with partial pivoting (LAPACK `gbtrf` layout, row-major band).
///
/// Row `i` stores columns `i - kl ..= i + kl + ku`; the extra `kl`
/// superdiagonals hold fill from row interchanges. Multipliers stay in the
/// row where they were computed, so `L` is applied as a product of
/// elementary transforms interleaved with the recorded interchanges.
#[derive(Debug, Clone)]
pub struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<Complex64>,
    piv: Vec<usize>,
}

impl BandLu {
    /// Factorizes the `n x n` matrix given by its nonzero entries. Returns the
    /// failing column on an exactly zero pivot.
    pub fn factor(
        n: usize,
        entries: impl IntoIterator<Item = (usize, usize, Complex64)> + Clone,
    ) -> core::result::Result<Self, usize> {
        let (mut kl, mut ku) = (0usize, 0usize);
        for (i, j, _) in entries.clone() {
            if i > j {
                kl = kl.max(i - j);
            } else {
                ku = ku.max(j - i);
            }
        }
        let width = 2 * kl + ku + 1;
        let mut lu = Self {
            n,
            kl,
            ku,
            width,
            data: vec![C0; n * width],
            piv: vec![0; n],
        };
        for (i, j, v) in entries {
            let k = lu.idx(i, j);
            lu.data[k] += v;
        }
        lu.eliminate()?;
        Ok(lu)
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        i * self.width + (j + self.kl - i)
    }

    fn eliminate(&mut self) -> core::result::Result<(), usize> {
        let n = self.n;
        for k in 0..n {
            let last = (k + self.kl).min(n - 1);
            let jmax = (k + self.kl + self.ku).min(n - 1);
            let mut p = k;
            let mut best = self.data[self.idx(k, k)].norm();
            for i in k + 1..=last {
                let v = self.data[self.idx(i, k)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 {
                return Err(k);
            }
            self.piv[k] = p;
            if p != k {
                for j in k..=jmax {
                    let (a, b) = (self.idx(k, j), self.idx(p, j));
                    self.data.swap(a, b);
                }
            }
            let inv = Complex64::new(1.0, 0.0) / self.data[self.idx(k, k)];
            for i in k + 1..=last {
                let ik = self.idx(i, k);
                let l = self.data[ik] * inv;
                self.data[ik] = l;
                if l.is_zero() {
                    continue;
                }
                let row_k = self.idx(k, k + 1);
                let row_i = self.idx(i, k + 1);
                for off in 0..jmax - k {
                    let u = self.data[row_k + off];
                    self.data[row_i + off] -= l * u;
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Lower and upper bandwidth of the factored operator.
    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    pub fn solve_in_place(&self, b: &mut [Complex64]) {
        let n = self.n;
        for k in 0..n {
            b.swap(k, self.piv[k]);
            let bk = b[k];
            if bk.is_zero() {
                continue;
            }
            for i in k + 1..=(k + self.kl).min(n - 1) {
                b[i] -= self.data[self.idx(i, k)] * bk;
            }
        }
        for i in (0..n).rev() {
            let mut acc = b[i];
            for j in i + 1..=(i + self.kl + self.ku).min(n - 1) {
                acc -= self.data[self.idx(i, j)] * b[j];
            }
            b[i] = acc / self.data[self.idx(i, i)];
        }
    }

    /// Solves `Aᵀ x = b` (plain transpose).
    pub fn solve_transpose_in_place(&self, b: &mut [Complex64]) {
        let n = self.n;
        let reach = self.kl + self.ku;
        for i in 0..n {
            let mut acc = b[i];
            for j in i.saturating_sub(reach)..i {
                acc -= self.data[self.idx(j, i)] * b[j];
            }
            b[i] = acc / self.data[self.idx(i, i)];
        }
        for k in (0..n).rev() {
            let mut acc = b[k];
            for i in k + 1..=(k + self.kl).min(n - 1) {
                acc -= self.data[self.idx(i, k)] * b[i];
            }
            b[k] = acc;
            b.swap(k, self.piv[k]);
        }
    }
}

fn bandwidth(entries: &[(usize, usize, Complex64)], perm_inv: Option<&[usize]>) -> usize {
    entries
        .iter()
        .map(|&(i, j, _)| match perm_inv {
            Some(p) => p[i].abs_diff(p[j]),
            None => i.abs_diff(j),
        })
        .max()
        .unwrap_or(0)
}

/// Reverse Cuthill-McKee ordering of the symmetrized pattern.
/// Returns `perm` with `perm[new] = old`.
pub fn reverse_cuthill_mckee(n: usize, entries: &[(usize, usize, Complex64)]) -> Vec<usize> {
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(i, j, _) in entries {
        if i != j {
            adj[i].push(j);
            adj[j].push(i);
        }
    }
    for list in adj.iter_mut() {
        list.sort_unstable();
        list.dedup();
    }
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&v| (degree[v], v));
    let mut queue = VecDeque::new();
    let mut nbrs = Vec::new();
    for &start in &by_degree {
        if visited[start] {
            continue;
        }
        visited[start] = true;
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            nbrs.clear();
            nbrs.extend(adj[v].iter().copied().filter(|&u| !visited[u]));
            nbrs.sort_by_key(|&u| (degree[u], u));
            for &u in &nbrs {
                visited[u] = true;
                queue.push_back(u);
            }
        }
    }
    order.reverse();
    order
}

/// Condition number above which `K(s, p)` is treated as singular: `1 / (100 eps)`.
pub const SINGULAR_CONDITION: f64 = 1.0 / (100.0 * f64::EPSILON);

/// LU factorization of an assembled `K(s, p)` with an optional symmetric permutation.
#[derive(Debug, Clone)]
pub struct Factorization {
    lu: BandLu,
    /// `perm[new] = old`
    perm: Option<Vec<usize>>,
    norm1: f64,
    cond_estimate: f64,
}

impl Factorization {
    /// Factorizes a square operator. Returns `Err(cond)` (possibly infinite)
    /// when the operator is numerically singular.
    pub fn new(k: &TermMatrix) -> core::result::Result<Self, f64> {
        let n = k.nrows();
        assert_eq!(n, k.ncols(), "factorization requires a square operator");
        let entries = k.pattern();
        let mut perm = None;
        if k.is_sparse() && n > 2 {
            let rcm = reverse_cuthill_mckee(n, &entries);
            let mut inv = vec![0; n];
            for (new, &old) in rcm.iter().enumerate() {
                inv[old] = new;
            }
            if bandwidth(&entries, Some(&inv)) < bandwidth(&entries, None) {
                perm = Some((rcm, inv));
            }
        }
        let lu = match &perm {
            Some((_, inv)) => {
                let moved: Vec<_> = entries.iter().map(|&(i, j, v)| (inv[i], inv[j], v)).collect();
                BandLu::factor(n, moved.iter().copied())
            }
            None => BandLu::factor(n, entries.iter().copied()),
        }
        .map_err(|_| f64::INFINITY)?;
        let mut f = Self {
            lu,
            perm: perm.map(|(p, _)| p),
            norm1: k.norm1(),
            cond_estimate: 0.0,
        };
        f.cond_estimate = f.norm1 * f.inverse_norm1_estimate();
        if !f.cond_estimate.is_finite() || f.cond_estimate > SINGULAR_CONDITION {
            return Err(f.cond_estimate);
        }
        Ok(f)
    }

    pub fn dim(&self) -> usize {
        self.lu.dim()
    }

    pub fn condition_estimate(&self) -> f64 {
        self.cond_estimate
    }

    pub fn is_permuted(&self) -> bool {
        self.perm.is_some()
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        self.lu.bandwidths()
    }

    fn solve_vec(&self, b: &mut Vec<Complex64>, transpose: bool) {
        match &self.perm {
            Some(perm) => {
                let mut work: Vec<Complex64> = perm.iter().map(|&old| b[old]).collect();
                if transpose {
                    self.lu.solve_transpose_in_place(&mut work);
                } else {
                    self.lu.solve_in_place(&mut work);
                }
                for (new, &old) in perm.iter().enumerate() {
                    b[old] = work[new];
                }
            }
            None => {
                if transpose {
                    self.lu.solve_transpose_in_place(b);
                } else {
                    self.lu.solve_in_place(b);
                }
            }
        }
    }

    fn solve_columns(&self, rhs: &CMatrix, transpose: bool) -> CMatrix {
        assert_eq!(rhs.nrows(), self.dim(), "right-hand side dimension");
        let mut out = rhs.clone();
        let mut work = Vec::with_capacity(self.dim());
        for mut col in out.column_iter_mut() {
            work.clear();
            work.extend(col.iter().copied());
            self.solve_vec(&mut work, transpose);
            for (dst, src) in col.iter_mut().zip(&work) {
                *dst = *src;
            }
        }
        out
    }

    /// `K⁻¹ · rhs`, column by column.
    pub fn solve(&self, rhs: &CMatrix) -> CMatrix {
        self.solve_columns(rhs, false)
    }

    /// `K⁻ᵀ · rhs` (plain transpose).
    pub fn solve_transpose(&self, rhs: &CMatrix) -> CMatrix {
        self.solve_columns(rhs, true)
    }

    /// Hager/Higham estimate of `‖K⁻¹‖₁`.
    fn inverse_norm1_estimate(&self) -> f64 {
        let n = self.dim();
        if n == 0 {
            return 0.0;
        }
        let mut x = vec![Complex64::new(1.0 / n as f64, 0.0); n];
        let mut est = 0.0;
        let mut last_j = usize::MAX;
        for iter in 0..5 {
            let mut y = x.clone();
            self.solve_vec(&mut y, false);
            est = y.iter().map(|v| v.norm()).sum::<f64>();
            // z = K⁻ᴴ sign(y) = conj(K⁻ᵀ conj(sign(y)))
            let mut z: Vec<Complex64> = y
                .iter()
                .map(|v| {
                    let a = v.norm();
                    if a == 0.0 {
                        Complex64::new(1.0, 0.0)
                    } else {
                        (v / a).conj()
                    }
                })
                .collect();
            self.solve_vec(&mut z, true);
            for v in z.iter_mut() {
                *v = v.conj();
            }
            let (j, zmax) = z
                .iter()
                .enumerate()
                .map(|(j, v)| (j, v.norm()))
                .fold((0, -1.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
            let ztx: f64 = z.iter().zip(&x).map(|(zi, xi)| (zi.conj() * xi).re).sum();
            if iter > 0 && (zmax <= ztx || j == last_j) {
                break;
            }
            last_j = j;
            x.iter_mut().for_each(|v| *v = C0);
            x[j] = Complex64::new(1.0, 0.0);
        }
        // Alternating test vector guards against the estimator's known blind spots.
        let mut alt: Vec<Complex64> = (0..n)
            .map(|i| {
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                let t = if n > 1 { i as f64 / (n - 1) as f64 } else { 0.0 };
                Complex64::new(sign * (1.0 + t), 0.0)
            })
            .collect();
        self.solve_vec(&mut alt, false);
        let alt_est = 2.0 * alt.iter().map(|v| v.norm()).sum::<f64>() / (3.0 * n as f64);
        est.max(alt_est)
    }
}

/// True when every entry has an exactly zero imaginary part.
pub fn is_real_matrix(m: &CMatrix) -> bool {
    m.iter().all(|v| v.im == 0.0)
}

pub fn to_complex(m: &RMatrix) -> CMatrix {
    m.map(|v| Complex64::new(v, 0.0))
}

/// Thin SVD `m = U diag(σ) Vᴴ` with σ descending. Real inputs are routed
/// through the real algorithm.
pub struct ThinSvd {
    pub u: CMatrix,
    pub singular_values: Vec<f64>,
    pub v: CMatrix,
}

fn svd_generic<T: ComplexField<RealField = f64>>(m: DMatrix<T>) -> Result<SVD<T, nalgebra::Dyn, nalgebra::Dyn>> {
    let (rows, cols) = m.shape();
    SVD::try_new(m, true, true, f64::EPSILON, 0).ok_or(Error::SvdFailed { rows, cols })
}

pub fn thin_svd(m: &CMatrix) -> Result<ThinSvd> {
    let (rows, cols) = m.shape();
    let k = rows.min(cols);
    if k == 0 {
        return Ok(ThinSvd {
            u: CMatrix::zeros(rows, 0),
            singular_values: Vec::new(),
            v: CMatrix::zeros(cols, 0),
        });
    }
    if is_real_matrix(m) {
        let svd = svd_generic(m.map(|v| v.re))?;
        Ok(ThinSvd {
            u: to_complex(svd.u.as_ref().expect("u requested")),
            singular_values: svd.singular_values.iter().copied().collect(),
            v: to_complex(&svd.v_t.as_ref().expect("v requested").transpose()),
        })
    } else {
        let svd = svd_generic(m.clone())?;
        Ok(ThinSvd {
            u: svd.u.clone().expect("u requested"),
            singular_values: svd.singular_values.iter().copied().collect(),
            v: svd.v_t.as_ref().expect("v requested").adjoint(),
        })
    }
}

pub fn singular_values(m: &CMatrix) -> Result<Vec<f64>> {
    let (rows, cols) = m.shape();
    if rows.min(cols) == 0 {
        return Ok(Vec::new());
    }
    let values = if is_real_matrix(m) {
        SVD::try_new(m.map(|v| v.re), false, false, f64::EPSILON, 0)
            .ok_or(Error::SvdFailed { rows, cols })?
            .singular_values
    } else {
        SVD::try_new(m.clone(), false, false, f64::EPSILON, 0)
            .ok_or(Error::SvdFailed { rows, cols })?
            .singular_values
    };
    Ok(values.iter().copied().collect())
}

/// Spectral norm.
pub fn norm2(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    if m.ncols() == 1 || m.nrows() == 1 {
        return m.norm();
    }
    singular_values(m).map(|s| s[0]).unwrap_or(f64::NAN)
}

/// Number of singular values strictly above `rel_tol · σ_max`.
pub fn numerical_rank(sv: &[f64], rel_tol: f64) -> usize {
    match sv.first() {
        Some(&smax) if smax > 0.0 => sv.iter().filter(|&&s| s > rel_tol * smax).count(),
        _ => 0,
    }
}

/// Orthonormal basis of `range(m)`.
///
/// Columns are first scaled to unit norm (exactly zero columns are dropped)
/// so that the tolerance does not depend on how the columns were scaled;
/// directions with singular value at or below `drop_tol · σ_max` of the
/// scaled matrix are then discarded.
pub fn orthonormalize<T: ComplexField<RealField = f64>>(m: &DMatrix<T>, drop_tol: f64) -> Result<DMatrix<T>> {
    let nrows = m.nrows();
    let cols: Vec<_> = m
        .column_iter()
        .filter_map(|c| {
            let norm = c.norm();
            (norm > 0.0).then(|| c.unscale(norm))
        })
        .collect();
    if cols.is_empty() || nrows == 0 {
        return Ok(DMatrix::zeros(nrows, 0));
    }
    let scaled = DMatrix::from_columns(&cols);
    let svd = SVD::try_new(scaled, true, false, f64::EPSILON, 0).ok_or(Error::SvdFailed {
        rows: nrows,
        cols: cols.len(),
    })?;
    let sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    let keep = match sv.first() {
        Some(&smax) if smax > 0.0 => sv.iter().filter(|&&s| s > drop_tol * smax).count(),
        _ => 0,
    };
    let u = svd.u.expect("u requested");
    Ok(u.columns(0, keep).into_owned())
}

/// `U_k Σ_k` from the SVD of `m`, keeping singular values above
/// `drop_tol·σ_max`. Same range as `m` and the same Gram matrix `m mᴴ` up to
/// the dropped part, so column magnitudes survive the compression.
pub fn compress<T: ComplexField<RealField = f64>>(m: &DMatrix<T>, drop_tol: f64) -> Result<DMatrix<T>> {
    let nrows = m.nrows();
    if m.ncols() == 0 || nrows == 0 {
        return Ok(DMatrix::zeros(nrows, 0));
    }
    let svd = SVD::try_new(m.clone(), true, false, f64::EPSILON, 0).ok_or(Error::SvdFailed {
        rows: nrows,
        cols: m.ncols(),
    })?;
    let sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    let keep = match sv.first() {
        Some(&smax) if smax > 0.0 => sv.iter().filter(|&&s| s > drop_tol * smax).count(),
        _ => 0,
    };
    let mut u = svd.u.expect("u requested").columns(0, keep).into_owned();
    for (j, &s) in sv.iter().take(keep).enumerate() {
        u.column_mut(j).scale_mut(s);
    }
    Ok(u)
}

/// Principal angles (radians, ascending) between the ranges of two matrices
/// with orthonormal columns. Uses the sine formulation, which stays accurate
/// for small angles. The number of angles is the smaller column count.
pub fn principal_angles(q1: &CMatrix, q2: &CMatrix) -> Result<Vec<f64>> {
    let (big, small) = if q1.ncols() >= q2.ncols() { (q1, q2) } else { (q2, q1) };
    if small.ncols() == 0 {
        return Ok(Vec::new());
    }
    let residual = small - big * (big.adjoint() * small);
    let mut sines = singular_values(&residual)?;
    sines.truncate(small.ncols());
    sines.resize(small.ncols(), 0.0);
    let mut angles: Vec<f64> = sines.iter().map(|&s| libm::asin(s.min(1.0))).collect();
    angles.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    Ok(angles)
}
