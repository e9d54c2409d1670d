//! Verification and diagnostics: interpolation and Hermite checks, error
//! sweeps, Loewner-type rank diagnostics, Kalman subspaces and quadrature
//! Gramians for balanced-truncation comparisons.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result, Role};
use crate::linalg::{is_real_matrix, norm2, numerical_rank, thin_svd, CMatrix, RMatrix};
use crate::reduce::{project, stacked_svd, ReducedSystem, SvdReport};
use crate::sampling::{SamplePoint, SampleSet};
use crate::system::StructuredSystem;

/// Relative singular-value cutoff for [`loewner_rank`].
pub const LOEWNER_RANK_TOL: f64 = 1e-10;

/// Largest state dimension accepted by [`gramian_quadrature`] and [`bt_compare`].
pub const GRAMIAN_CAP: usize = 600;

/// Relative finite-difference step: `h = FD_STEP·max(|x|, 1)`.
pub const FD_STEP: f64 = 1e-4;

/// Relative deflation threshold for [`kalman_subspace`].
const KALMAN_DEFLATION: f64 = 1e-10;

/// Below this fraction of `‖H‖` a derivative is treated as zero when
/// normalizing Hermite mismatches.
const DERIVATIVE_FLOOR: f64 = 1e-10;

fn rel_diff(exact: &CMatrix, approx: &CMatrix) -> f64 {
    let den = norm2(exact);
    let num = norm2(&(exact - approx));
    if den > 0.0 {
        num / den
    } else {
        num
    }
}

fn pick_dirs(h: &CMatrix, point: &SamplePoint) -> Vec<CMatrix> {
    let column = |d: &[f64]| CMatrix::from_iterator(d.len(), 1, d.iter().map(|&x| Complex64::new(x, 0.0)));
    match (&point.left_dir, &point.right_dir) {
        (None, None) => vec![h.clone()],
        (left, right) => {
            let mut out = Vec::new();
            if let Some(b) = right {
                out.push(h * column(b));
            }
            if let Some(c) = left {
                out.push(column(c).transpose() * h);
            }
            out
        }
    }
}

fn bitangential(d: &CMatrix, point: &SamplePoint) -> CMatrix {
    let column = |v: &[f64]| CMatrix::from_iterator(v.len(), 1, v.iter().map(|&x| Complex64::new(x, 0.0)));
    match (&point.left_dir, &point.right_dir) {
        (Some(c), Some(b)) => column(c).transpose() * d * column(b),
        _ => d.clone(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointResidual {
    pub index: usize,
    pub sigma: Complex64,
    pub param: Vec<f64>,
    /// Infinite when the point could not be evaluated.
    pub residual: f64,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub points: Vec<PointResidual>,
    pub tol: f64,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.points.iter().all(|p| p.residual <= self.tol)
    }

    pub fn failing(&self) -> Vec<&PointResidual> {
        self.points.iter().filter(|p| !(p.residual <= self.tol)).collect()
    }

    pub fn max_residual(&self) -> f64 {
        self.points.iter().map(|p| p.residual).fold(0.0, f64::max)
    }
}

fn point_result(index: usize, point: &SamplePoint, outcome: Result<f64>) -> PointResidual {
    let (residual, failure) = match outcome {
        Ok(r) => (r, None),
        Err(e) => (f64::INFINITY, Some(e.to_string())),
    };
    PointResidual {
        index,
        sigma: point.sigma,
        param: point.param.clone(),
        residual,
        failure,
    }
}

/// Relative interpolation residual `‖H − Ĥ‖₂ / ‖H‖₂` at every sample point
/// (absolute when `H` vanishes). With tangential directions the residual
/// compares `H·b` and `cᵀH` instead of the full matrices.
pub fn verify_interpolation(
    sys: &StructuredSystem,
    red: &StructuredSystem,
    samples: &SampleSet,
    tol: f64,
) -> CheckReport {
    let points = samples
        .points()
        .iter()
        .enumerate()
        .map(|(i, pt)| {
            let outcome = (|| {
                let h = sys.transfer(pt.sigma, &pt.param)?;
                let hr = red.transfer(pt.sigma, &pt.param)?;
                let exact = pick_dirs(&h, pt);
                let approx = pick_dirs(&hr, pt);
                Ok(exact
                    .iter()
                    .zip(&approx)
                    .map(|(e, a)| rel_diff(e, a))
                    .fold(0.0, f64::max))
            })();
            point_result(i, pt, outcome)
        })
        .collect();
    CheckReport { points, tol }
}

/// Central differences of `H` at `(σ, p)`: `d/ds` along the imaginary
/// direction, then one `∂/∂p_j` per parameter.
fn fd_derivatives(sys: &StructuredSystem, sigma: Complex64, param: &[f64], step: f64) -> Result<Vec<CMatrix>> {
    let h = step * sigma.norm().max(1.0);
    let ih = Complex64::new(0.0, h);
    let mut out = Vec::with_capacity(1 + param.len());
    let plus = sys.transfer(sigma + ih, param)?;
    let minus = sys.transfer(sigma - ih, param)?;
    out.push((plus - minus) / (ih * 2.0));
    let mut p = param.to_vec();
    for j in 0..param.len() {
        let hj = step * param[j].abs().max(1.0);
        p[j] = param[j] + hj;
        let plus = sys.transfer(sigma, &p)?;
        p[j] = param[j] - hj;
        let minus = sys.transfer(sigma, &p)?;
        p[j] = param[j];
        out.push((plus - minus) / Complex64::new(2.0 * hj, 0.0));
    }
    Ok(out)
}

/// First-order derivative mismatch between `sys` and `red` at each sample,
/// by central finite differences with relative step `step`. For bitangential
/// samples the compared quantity is `cᵀ H' b`.
pub fn verify_hermite(
    sys: &StructuredSystem,
    red: &StructuredSystem,
    samples: &SampleSet,
    step: f64,
    tol: f64,
) -> CheckReport {
    let points = samples
        .points()
        .iter()
        .enumerate()
        .map(|(i, pt)| {
            let outcome = (|| {
                let scale = norm2(&bitangential(&sys.transfer(pt.sigma, &pt.param)?, pt));
                let exact = fd_derivatives(sys, pt.sigma, &pt.param, step)?;
                let approx = fd_derivatives(red, pt.sigma, &pt.param, step)?;
                let mut worst = 0.0f64;
                for (e, a) in exact.iter().zip(&approx) {
                    let (e, a) = (bitangential(e, pt), bitangential(a, pt));
                    let den = norm2(&e).max(DERIVATIVE_FLOOR * scale);
                    let num = norm2(&(&e - &a));
                    worst = worst.max(if den > 0.0 { num / den } else { num });
                }
                Ok(worst)
            })();
            point_result(i, pt, outcome)
        })
        .collect();
    CheckReport { points, tol }
}

/// Transfer-function error over a frequency × parameter grid. Entry
/// `j·freqs.len() + i` belongs to frequency `i` and parameter `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    /// Angular frequencies `ω` (evaluation at `s = iω`).
    pub freqs: Vec<f64>,
    pub params: Vec<Vec<f64>>,
    /// `None` marks points where either system could not be evaluated.
    pub abs_err: Vec<Option<f64>>,
    pub rel_err: Vec<Option<f64>>,
    pub h_norm: Vec<Option<f64>>,
    pub h_red_norm: Vec<Option<f64>>,
    pub max_abs: f64,
    pub max_rel: f64,
    /// Grid-quadrature norm `sqrt((1/π)∫‖H − Ĥ‖_F² dω)` over the frequency
    /// range, maximized over parameters.
    pub l2_err: f64,
    pub failures: Vec<(usize, String)>,
}

impl ErrorReport {
    pub fn len(&self) -> usize {
        self.abs_err.len()
    }

    pub fn is_empty(&self) -> bool {
        self.abs_err.is_empty()
    }

    /// `(frequency index, parameter index)` of entry `k`.
    pub fn location(&self, k: usize) -> (usize, usize) {
        (k % self.freqs.len(), k / self.freqs.len())
    }
}

pub fn sweep_error(
    sys: &StructuredSystem,
    red: &StructuredSystem,
    freqs: &[f64],
    params: &[Vec<f64>],
) -> Result<ErrorReport> {
    if freqs.is_empty() {
        return Err(Error::InvalidArgument("frequency grid is empty".into()));
    }
    let params: Vec<Vec<f64>> = if params.is_empty() && sys.params() == 0 {
        vec![Vec::new()]
    } else if params.is_empty() {
        return Err(Error::InvalidArgument("parameter grid is empty".into()));
    } else {
        params.to_vec()
    };
    if sys.inputs() != red.inputs() || sys.outputs() != red.outputs() {
        return Err(Error::Dimension(format!(
            "systems have {}x{} and {}x{} transfer functions",
            sys.outputs(),
            sys.inputs(),
            red.outputs(),
            red.inputs()
        )));
    }

    let total = freqs.len() * params.len();
    let mut abs_err = Vec::with_capacity(total);
    let mut h_norm = Vec::with_capacity(total);
    let mut h_red_norm = Vec::with_capacity(total);
    let mut frob = Vec::with_capacity(total);
    let mut failures = Vec::new();
    for param in &params {
        for &w in freqs {
            let s = Complex64::new(0.0, w);
            let k = abs_err.len();
            match (sys.transfer(s, param), red.transfer(s, param)) {
                (Ok(h), Ok(hr)) => {
                    let diff = &h - &hr;
                    abs_err.push(Some(norm2(&diff)));
                    h_norm.push(Some(norm2(&h)));
                    h_red_norm.push(Some(norm2(&hr)));
                    frob.push(Some(diff.norm()));
                }
                (a, b) => {
                    let msg = match (a, b) {
                        (Err(e), _) => format!("original: {e}"),
                        (_, Err(e)) => format!("reduced: {e}"),
                        _ => unreachable!(),
                    };
                    failures.push((k, msg));
                    abs_err.push(None);
                    h_norm.push(None);
                    h_red_norm.push(None);
                    frob.push(None);
                }
            }
        }
    }

    let h_max = h_norm.iter().flatten().copied().fold(0.0, f64::max);
    let eps = f64::EPSILON * h_max;
    let rel_err: Vec<Option<f64>> = abs_err
        .iter()
        .zip(&h_norm)
        .map(|(a, h)| {
            let (a, h) = ((*a)?, (*h)?);
            let den = (h + eps).max(f64::MIN_POSITIVE);
            Some(if a == 0.0 { 0.0 } else { a / den })
        })
        .collect();
    let max_abs = abs_err.iter().flatten().copied().fold(0.0, f64::max);
    let max_rel = rel_err.iter().flatten().copied().fold(0.0, f64::max);

    let nf = freqs.len();
    let mut l2_err = 0.0f64;
    for j in 0..params.len() {
        let row = &frob[j * nf..(j + 1) * nf];
        let mut acc = 0.0;
        for i in 1..nf {
            if let (Some(a), Some(b)) = (row[i - 1], row[i]) {
                acc += 0.5 * (freqs[i] - freqs[i - 1]).abs() * (a * a + b * b);
            }
        }
        l2_err = l2_err.max(libm::sqrt(acc / core::f64::consts::PI));
    }

    Ok(ErrorReport {
        freqs: freqs.to_vec(),
        params,
        abs_err,
        rel_err,
        h_norm,
        h_red_norm,
        max_abs,
        max_rel,
        l2_err,
        failures,
    })
}

/// Numerical ranks (tolerance [`LOEWNER_RANK_TOL`]) of the horizontal and
/// vertical stacks of `WᵀAᵢV`.
pub fn loewner_rank(v: &CMatrix, w: &CMatrix, k_matrices: &[&crate::linalg::TermMatrix]) -> Result<(usize, usize)> {
    if v.ncols() == 0 || w.ncols() == 0 {
        return Ok((0, 0));
    }
    let out = stacked_svd(v, w, k_matrices)?;
    Ok((
        numerical_rank(&out.report.sv_left, LOEWNER_RANK_TOL),
        numerical_rank(&out.report.sv_right, LOEWNER_RANK_TOL),
    ))
}

/// Orthonormal basis of `range[B, AB, …, A^{steps−1}B]`, built block by
/// block with twice-repeated Gram-Schmidt against the accumulated basis.
pub fn kalman_subspace(a: &CMatrix, b: &CMatrix, steps: usize) -> Result<CMatrix> {
    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n {
        return Err(Error::Dimension(format!(
            "A is {}x{}, B has {} rows",
            a.nrows(),
            a.ncols(),
            b.nrows()
        )));
    }
    let mut basis: Vec<nalgebra::DVector<Complex64>> = Vec::new();
    let add_block = |block: &CMatrix, basis: &mut Vec<nalgebra::DVector<Complex64>>| -> Vec<usize> {
        let mut added = Vec::new();
        for col in block.column_iter() {
            if basis.len() == n {
                break;
            }
            let mut x: nalgebra::DVector<Complex64> = col.into_owned();
            let before = x.norm();
            if before == 0.0 {
                continue;
            }
            for _ in 0..2 {
                for q in basis.iter() {
                    let proj = q.dotc(&x);
                    x.axpy(-proj, q, Complex64::new(1.0, 0.0));
                }
            }
            let after = x.norm();
            if after > KALMAN_DEFLATION * before {
                basis.push(x / Complex64::new(after, 0.0));
                added.push(basis.len() - 1);
            }
        }
        added
    };
    let mut fresh = add_block(b, &mut basis);
    for _ in 1..steps {
        if fresh.is_empty() || basis.len() == n {
            break;
        }
        let cols: Vec<_> = fresh.iter().map(|&k| a * &basis[k]).collect();
        let block = CMatrix::from_columns(&cols);
        fresh = add_block(&block, &mut basis);
    }
    Ok(if basis.is_empty() {
        CMatrix::zeros(n, 0)
    } else {
        CMatrix::from_columns(&basis)
    })
}

/// Trapezoid weights for the (ascending) nodes.
fn trapezoid_weights(nodes: &[f64]) -> Vec<f64> {
    let k = nodes.len();
    let mut w = vec![0.0; k];
    for i in 1..k {
        let half = 0.5 * (nodes[i] - nodes[i - 1]);
        w[i - 1] += half;
        w[i] += half;
    }
    w
}

/// Quadrature nodes accumulated per rank-k update of the Gramians.
const QUADRATURE_CHUNK: usize = 128;

fn check_quadrature_input(sys: &StructuredSystem, omegas: &[f64]) -> Result<()> {
    if sys.states() > GRAMIAN_CAP {
        return Err(Error::InvalidArgument(format!(
            "quadrature Gramians are limited to n <= {GRAMIAN_CAP}, system has n = {}",
            sys.states()
        )));
    }
    if omegas.len() < 2 {
        return Err(Error::InvalidArgument("quadrature needs at least two nodes".into()));
    }
    if omegas.windows(2).any(|w| !(w[1] > w[0])) || omegas[0] < 0.0 {
        return Err(Error::InvalidArgument(
            "quadrature nodes must be nonnegative and strictly ascending".into(),
        ));
    }
    Ok(())
}

/// Running sum `G += Σ z zᴴ`, flushed in blocks so each update is one matrix product.
struct Accumulator {
    real: bool,
    gr: RMatrix,
    gc: CMatrix,
    pending: Vec<nalgebra::DVector<Complex64>>,
}

impl Accumulator {
    fn new(n: usize, real: bool) -> Self {
        Self {
            real,
            gr: RMatrix::zeros(if real { n } else { 0 }, if real { n } else { 0 }),
            gc: CMatrix::zeros(if real { 0 } else { n }, if real { 0 } else { n }),
            pending: Vec::new(),
        }
    }

    /// Adds `scale·(X Xᴴ + conj(X) conj(X)ᴴ)` in the real case, `scale·X Xᴴ` otherwise.
    fn add(&mut self, x: &CMatrix, scale: f64) {
        let f = libm::sqrt(if self.real { 2.0 * scale } else { scale });
        for c in x.column_iter() {
            self.pending.push(c.map(|z| z * f));
        }
        if self.pending.len() >= QUADRATURE_CHUNK {
            self.flush();
        }
    }

    fn flush(&mut self) {
        if self.pending.is_empty() {
            return;
        }
        let z = CMatrix::from_columns(&self.pending);
        self.pending.clear();
        if self.real {
            let mut zr = RMatrix::zeros(z.nrows(), 2 * z.ncols());
            zr.columns_mut(0, z.ncols()).copy_from(&z.map(|v| v.re));
            zr.columns_mut(z.ncols(), z.ncols()).copy_from(&z.map(|v| v.im));
            self.gr.gemm(1.0, &zr, &zr.transpose(), 1.0);
        } else {
            let one = Complex64::new(1.0, 0.0);
            self.gc.gemm(one, &z, &z.adjoint(), one);
        }
    }

    fn finish(mut self) -> CMatrix {
        self.flush();
        let g = if self.real { crate::linalg::to_complex(&self.gr) } else { self.gc };
        (&g + g.adjoint()) * Complex64::new(0.5, 0.0)
    }
}

/// Eigenpairs of a Hermitian matrix from its SVD: `λᵢ = ±σᵢ` with the sign
/// of `uᵢᴴvᵢ`. Descending in magnitude.
fn hermitian_spectrum(g: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let svd = thin_svd(g)?;
    let vals = svd
        .singular_values
        .iter()
        .enumerate()
        .map(|(k, &sv)| {
            let align = svd.u.column(k).dotc(&svd.v.column(k)).re;
            if align < 0.0 {
                -sv
            } else {
                sv
            }
        })
        .collect();
    Ok((vals, svd.u))
}

fn check_definite(g: &CMatrix) -> Result<()> {
    let trace: f64 = g.diagonal().iter().map(|z| z.re).sum();
    if trace == 0.0 {
        return Ok(());
    }
    let (vals, _) = hermitian_spectrum(g)?;
    let min_eig = vals.iter().copied().fold(f64::INFINITY, f64::min);
    if min_eig < -1e-10 * trace {
        return Err(Error::IndefiniteGramian { min_eig, trace });
    }
    Ok(())
}

/// Dense quadrature Gramians
/// `P ≈ (1/2π)∫ K⁻¹B Bᴴ K⁻ᴴ dω` and `Q ≈ (1/2π)∫ K⁻ᴴ Cᴴ C K⁻¹ dω`
/// by the trapezoid rule on the ascending nodes, with contributions from
/// both `iω` and `−iω`. Real data uses `X(−iω) = conj(X(iω))`.
pub fn gramian_quadrature(sys: &StructuredSystem, omegas: &[f64], param: &[f64]) -> Result<(CMatrix, CMatrix)> {
    check_quadrature_input(sys, omegas)?;
    let n = sys.states();
    let real = sys.has_real_data();
    let weights = trapezoid_weights(omegas);
    let two_pi = 2.0 * core::f64::consts::PI;
    let mut p = Accumulator::new(n, real);
    let mut q = Accumulator::new(n, real);
    let signs: &[f64] = if real { &[1.0] } else { &[1.0, -1.0] };
    for (&w, &wt) in omegas.iter().zip(&weights) {
        let scale = wt / two_pi;
        for &sign in signs {
            let s = Complex64::new(0.0, sign * w);
            let k = sys.factor_k(s, param)?;
            let b = sys.assemble(Role::B, s, param)?.to_dense();
            let ct = sys.assemble(Role::C, s, param)?.to_dense().transpose();
            p.add(&k.solve(&b), scale);
            q.add(&k.solve_transpose(&ct).map(|z| z.conj()), scale);
        }
    }
    let (p, q) = (p.finish(), q.finish());
    check_definite(&p)?;
    check_definite(&q)?;
    Ok((p, q))
}

/// `L` with `G ≈ L Lᴴ` for a Hermitian semidefinite `G`; eigenvalues below
/// the rounding floor are dropped.
fn psd_factor(g: &CMatrix) -> Result<CMatrix> {
    let n = g.nrows();
    let (vals, vecs) = hermitian_spectrum(g)?;
    let top = vals.iter().copied().fold(0.0, f64::max);
    let floor = n.max(1) as f64 * f64::EPSILON * top;
    let keep: Vec<usize> = (0..vals.len()).filter(|&k| vals[k] > floor).collect();
    let mut l = CMatrix::zeros(n, keep.len());
    for (j, &k) in keep.iter().enumerate() {
        l.column_mut(j).copy_from(&(vecs.column(k) * Complex64::new(libm::sqrt(vals[k]), 0.0)));
    }
    Ok(l)
}

/// Square-root balanced truncation from the quadrature Gramians: with
/// `P = L_P L_Pᴴ`, `Q = L_Q L_Qᴴ` and `L_Qᴴ L_P = Y Σ Zᴴ`,
/// `V = L_P Z_r Σ_r^{−1/2}` and `Wᴴ = Σ_r^{−1/2} Y_rᴴ L_Qᴴ`, applied to
/// every structured term.
pub fn bt_compare(sys: &StructuredSystem, r: usize, omegas: &[f64], param: &[f64]) -> Result<ReducedSystem> {
    if r == 0 {
        return Err(Error::InvalidArgument("reduced order must be positive".into()));
    }
    let (p, q) = gramian_quadrature(sys, omegas, param)?;
    let (lp, lq) = (psd_factor(&p)?, psd_factor(&q)?);
    if lp.ncols() == 0 || lq.ncols() == 0 {
        return Err(Error::InvalidArgument("quadrature Gramians have numerical rank 0".into()));
    }
    let cross = lq.adjoint() * &lp;
    let svd = thin_svd(&cross)?;
    let floor = svd.singular_values.len().max(1) as f64 * f64::EPSILON;
    let available = numerical_rank(&svd.singular_values, floor);
    let mut warnings = Vec::new();
    if r > available {
        warnings.push(format!("requested order {r} clamped to available rank {available}"));
    }
    let r = r.min(available);
    if r == 0 {
        return Err(Error::InvalidArgument("quadrature Gramians have numerical rank 0".into()));
    }
    let scale = |k: usize| Complex64::new(1.0 / libm::sqrt(svd.singular_values[k]), 0.0);
    let mut z_r = svd.v.columns(0, r).into_owned();
    let mut y_r = svd.u.columns(0, r).into_owned();
    for k in 0..r {
        z_r.column_mut(k).scale_mut(scale(k).re);
        y_r.column_mut(k).scale_mut(scale(k).re);
    }
    let v_bt = &lp * z_r;
    let w_bt = (&lq * y_r).map(|z| z.conj());
    let system = project(sys, &v_bt, &w_bt)?;
    let complex = !(is_real_matrix(&v_bt) && is_real_matrix(&w_bt));
    Ok(ReducedSystem {
        system,
        report: SvdReport {
            sv_left: svd.singular_values.clone(),
            sv_right: svd.singular_values,
            chosen_r: r,
            policy: Some(crate::reduce::OrderPolicy::Fixed(r)),
            rank_disagreement: None,
            warnings: warnings.clone(),
        },
        v_p: v_bt,
        w_p: w_bt,
        complex,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::demo_system;
    use crate::expr::Expr;
    use crate::linalg::TermMatrix;
    use crate::system::{StructuredTerm, SystemMeta};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn first_order(a: &RMatrix, b: &RMatrix, cm: &RMatrix) -> StructuredSystem {
        let n = a.nrows();
        StructuredSystem::new(
            (n, b.ncols(), cm.nrows(), 0),
            vec![
                StructuredTerm::new(Expr::S, TermMatrix::from_real(&RMatrix::identity(n, n))),
                StructuredTerm::new(Expr::num(-1.0), TermMatrix::from_real(a)),
            ],
            vec![StructuredTerm::new(Expr::one(), TermMatrix::from_real(b))],
            vec![StructuredTerm::new(Expr::one(), TermMatrix::from_real(cm))],
            SystemMeta::default(),
        )
        .unwrap()
    }

    fn siso_lag() -> StructuredSystem {
        first_order(
            &RMatrix::from_element(1, 1, -1.0),
            &RMatrix::from_element(1, 1, 1.0),
            &RMatrix::from_element(1, 1, 1.0),
        )
    }

    fn points(sigmas: &[f64], param: f64) -> SampleSet {
        SampleSet::from_points(
            sigmas
                .iter()
                .map(|&w| SamplePoint::new(Complex64::new(0.0, w), vec![param]))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn identity_reduction_is_exact() {
        let sys = demo_system();
        let samples = points(&[0.1, 1.0, 3.0], 2.0);
        let rep = verify_interpolation(&sys, &sys, &samples, 0.0);
        assert!(rep.passed());
        assert_eq!(rep.max_residual(), 0.0);
        let herm = verify_hermite(&sys, &sys, &samples, FD_STEP, 0.0);
        assert_eq!(herm.max_residual(), 0.0);
        let freqs = [0.1, 1.0, 10.0];
        let sweep = sweep_error(&sys, &sys, &freqs, &[vec![0.0], vec![1.0]]).unwrap();
        assert_eq!(sweep.max_abs, 0.0);
        assert_eq!(sweep.len(), 6);
        assert_eq!(sweep.location(4), (1, 1));
    }

    #[test]
    fn fd_derivative_of_lag() {
        let sys = siso_lag();
        let d = fd_derivatives(&sys, c(0.0), &[], FD_STEP).unwrap();
        assert!((d[0][(0, 0)] - c(-1.0)).norm() < 1e-8);
    }

    #[test]
    fn failing_point_is_reported() {
        let sys = siso_lag();
        let samples = SampleSet::from_points(vec![SamplePoint::new(c(-1.0), vec![])]).unwrap();
        let rep = verify_interpolation(&sys, &sys, &samples, 1e-8);
        assert!(!rep.passed());
        assert!(rep.points[0].failure.is_some());
        assert_eq!(rep.failing().len(), 1);
    }

    #[test]
    fn sweep_relative_error_and_norm() {
        // H = 1/(s+1), Ĥ = 1/(s+2)
        let sys = siso_lag();
        let red = first_order(
            &RMatrix::from_element(1, 1, -2.0),
            &RMatrix::from_element(1, 1, 1.0),
            &RMatrix::from_element(1, 1, 1.0),
        );
        let freqs: Vec<f64> = (0..=2000).map(|k| k as f64 * 0.05).collect();
        let rep = sweep_error(&sys, &red, &freqs, &[]).unwrap();
        let at0 = rep.rel_err[0].unwrap();
        assert!((rep.abs_err[0].unwrap() - 0.5).abs() < 1e-15);
        assert!((at0 - 0.5).abs() < 1e-14);
        assert_eq!(rep.max_abs, 0.5);
        // |E(iω)|² = 1/((1+ω²)(4+ω²)); (1/π)∫₀^∞ = 1/12
        let exact = libm::sqrt(1.0 / 12.0);
        assert!((rep.l2_err - exact).abs() < 1e-3 * exact, "{}", rep.l2_err);
        assert!(sweep_error(&sys, &red, &[], &[]).is_err());
    }

    #[test]
    fn kalman_examples() {
        let zero = CMatrix::zeros(3, 3);
        let e1 = CMatrix::from_column_slice(3, 1, &[c(1.0), c(0.0), c(0.0)]);
        assert_eq!(kalman_subspace(&zero, &e1, 3).unwrap().ncols(), 1);
        let mut shift = CMatrix::zeros(3, 3);
        shift[(1, 0)] = c(1.0);
        shift[(2, 1)] = c(1.0);
        let q = kalman_subspace(&shift, &e1, 3).unwrap();
        assert_eq!(q.ncols(), 3);
        assert!((q.adjoint() * &q - CMatrix::identity(3, 3)).norm() < 1e-14);
        assert_eq!(kalman_subspace(&shift, &e1, 2).unwrap().ncols(), 2);
        assert_eq!(kalman_subspace(&shift, &CMatrix::zeros(3, 1), 3).unwrap().ncols(), 0);
    }

    #[test]
    fn loewner_rank_of_first_order() {
        let a = RMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-1.0, -2.0, -3.0, -4.0]));
        let b = RMatrix::from_element(4, 1, 1.0);
        let sys = first_order(&a, &b, &b.transpose());
        let samples = points(&[0.1, 0.5, 1.0, 2.0, 5.0, 10.0], 0.0);
        let samples = SampleSet::from_points(
            samples
                .points()
                .iter()
                .map(|p| SamplePoint::new(p.sigma, vec![]))
                .collect(),
        )
        .unwrap();
        let v = crate::projection::build_v(&sys, &samples).unwrap();
        let w = crate::projection::build_w(&sys, &samples).unwrap();
        let v = crate::linalg::orthonormalize(&v, 1e-12).unwrap();
        let w = crate::linalg::orthonormalize(&w, 1e-12).unwrap();
        assert_eq!(loewner_rank(&v, &w, &sys.k_matrices()).unwrap(), (4, 4));
        assert_eq!(loewner_rank(&CMatrix::zeros(4, 0), &w, &sys.k_matrices()).unwrap(), (0, 0));
    }

    #[test]
    fn lag_gramian() {
        let sys = siso_lag();
        let nodes = crate::sampling::log_freq_grid(1e-3, 1e3, 2000)
            .unwrap()
            .iter()
            .map(|s| s.im)
            .collect::<Vec<_>>();
        let (p, q) = gramian_quadrature(&sys, &nodes, &[]).unwrap();
        assert!((p[(0, 0)].re - 0.5).abs() < 0.01);
        assert!((q[(0, 0)].re - 0.5).abs() < 0.01);
    }

    #[test]
    fn zero_input_gramian() {
        let a = RMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-1.0, -2.0]));
        let sys = first_order(&a, &RMatrix::zeros(2, 1), &RMatrix::from_element(1, 2, 1.0));
        let (p, _) = gramian_quadrature(&sys, &[0.1, 1.0, 10.0], &[]).unwrap();
        assert!(p.iter().all(|z| *z == c(0.0)));
    }

    #[test]
    fn gramian_rejects_bad_grid() {
        let sys = siso_lag();
        assert!(gramian_quadrature(&sys, &[1.0], &[]).is_err());
        assert!(gramian_quadrature(&sys, &[1.0, 0.5], &[]).is_err());
    }

    #[test]
    fn bt_of_diagonal_system() {
        let a = RMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-1.0, -10.0, -100.0]));
        let b = RMatrix::from_column_slice(3, 1, &[1.0, 1.0, 1e-3]);
        let sys = first_order(&a, &b, &b.transpose());
        let nodes: Vec<f64> = crate::sampling::log_freq_grid(1e-3, 1e4, 400)
            .unwrap()
            .iter()
            .map(|s| s.im)
            .collect();
        let red = bt_compare(&sys, 2, &nodes, &[]).unwrap();
        assert_eq!(red.order(), 2);
        assert!(!red.complex);
        let sweep = sweep_error(&sys, &red.system, &nodes, &[]).unwrap();
        assert!(sweep.max_rel < 1e-3, "{}", sweep.max_rel);
    }
}
