//! Structured systems `H(s, p) = C(s, p) K(s, p)⁻¹ B(s, p)` whose matrix
//! functions are sums of scalar coefficients times constant matrices.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result, Role};
use crate::expr::Expr;
use crate::linalg::{CMatrix, Factorization, TermMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct StructuredTerm {
    pub coeff: Expr,
    pub matrix: TermMatrix,
}

impl StructuredTerm {
    pub fn new(coeff: Expr, matrix: TermMatrix) -> Self {
        Self { coeff, matrix }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SystemMeta {
    pub name: String,
    /// Declared angular-frequency range `[ω_min, ω_max]`, if any.
    pub frequency_range: Option<(f64, f64)>,
    /// Parameter box, one interval per parameter.
    pub parameter_box: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StructuredSystem {
    n: usize,
    m: usize,
    p: usize,
    d: usize,
    k_terms: Vec<StructuredTerm>,
    b_terms: Vec<StructuredTerm>,
    c_terms: Vec<StructuredTerm>,
    pub meta: SystemMeta,
}

impl StructuredSystem {
    /// Validates term dimensions against `(n, m, p)` and parameter references against `d`.
    pub fn new(
        (n, m, p, d): (usize, usize, usize, usize),
        k_terms: Vec<StructuredTerm>,
        b_terms: Vec<StructuredTerm>,
        c_terms: Vec<StructuredTerm>,
        meta: SystemMeta,
    ) -> Result<Self> {
        if n == 0 || m == 0 || p == 0 {
            return Err(Error::InvalidArgument(format!(
                "state, input and output dimensions must be positive (got n={n}, m={m}, p={p})"
            )));
        }
        if k_terms.is_empty() || b_terms.is_empty() || c_terms.is_empty() {
            return Err(Error::InvalidArgument(
                "K, B and C each need at least one term".into(),
            ));
        }
        for (role, terms, shape) in [
            (Role::K, &k_terms, (n, n)),
            (Role::B, &b_terms, (n, m)),
            (Role::C, &c_terms, (p, n)),
        ] {
            for (index, term) in terms.iter().enumerate() {
                let got = (term.matrix.nrows(), term.matrix.ncols());
                if got != shape {
                    return Err(Error::Dimension(format!(
                        "{role}-term {index} is {}x{}, expected {}x{}",
                        got.0, got.1, shape.0, shape.1
                    )));
                }
                let k = term.coeff.max_param_index();
                if k > d {
                    return Err(Error::Dimension(format!(
                        "{role}-term {index} references p{k} but the system has d = {d}"
                    )));
                }
            }
        }
        if meta.parameter_box.len() != d && !meta.parameter_box.is_empty() {
            return Err(Error::Dimension(format!(
                "parameter box has {} intervals, expected d = {d}",
                meta.parameter_box.len()
            )));
        }
        Ok(Self {
            n,
            m,
            p,
            d,
            k_terms,
            b_terms,
            c_terms,
            meta,
        })
    }

    pub fn states(&self) -> usize {
        self.n
    }

    pub fn inputs(&self) -> usize {
        self.m
    }

    pub fn outputs(&self) -> usize {
        self.p
    }

    pub fn params(&self) -> usize {
        self.d
    }

    pub fn terms(&self, role: Role) -> &[StructuredTerm] {
        match role {
            Role::K => &self.k_terms,
            Role::B => &self.b_terms,
            Role::C => &self.c_terms,
        }
    }

    pub fn k_matrices(&self) -> Vec<&TermMatrix> {
        self.k_terms.iter().map(|t| &t.matrix).collect()
    }

    /// True when all matrices and coefficient literals are real, so that
    /// `H(conj s, p) = conj H(s, p)` off branch cuts and sampled bases may be
    /// replaced by real ones.
    pub fn has_real_data(&self) -> bool {
        [&self.k_terms, &self.b_terms, &self.c_terms]
            .iter()
            .flat_map(|terms| terms.iter())
            .all(|t| t.matrix.is_real() && t.coeff.has_real_literals())
    }

    pub fn has_branch_cut(&self) -> bool {
        [&self.k_terms, &self.b_terms, &self.c_terms]
            .iter()
            .flat_map(|terms| terms.iter())
            .any(|t| t.coeff.has_branch_cut())
    }

    fn check_params(&self, param: &[f64]) -> Result<()> {
        if param.len() != self.d {
            return Err(Error::Dimension(format!(
                "parameter vector has length {}, system has d = {}",
                param.len(),
                self.d
            )));
        }
        Ok(())
    }

    /// Evaluates every coefficient of `role` at `(s, p)`.
    pub fn coefficients(&self, role: Role, s: Complex64, param: &[f64]) -> Result<Vec<Complex64>> {
        self.check_params(param)?;
        self.terms(role)
            .iter()
            .enumerate()
            .map(|(index, t)| {
                t.coeff
                    .eval(s, param)
                    .map_err(|source| Error::Term { role, index, source })
            })
            .collect()
    }

    /// `Σᵢ coeffᵢ(s, p) · Mᵢ` for the requested role.
    pub fn assemble(&self, role: Role, s: Complex64, param: &[f64]) -> Result<TermMatrix> {
        let coeffs = self.coefficients(role, s, param)?;
        let (rows, cols) = match role {
            Role::K => (self.n, self.n),
            Role::B => (self.n, self.m),
            Role::C => (self.p, self.n),
        };
        let pairs: Vec<_> = coeffs
            .into_iter()
            .zip(self.terms(role).iter().map(|t| &t.matrix))
            .collect();
        Ok(TermMatrix::linear_combination(rows, cols, &pairs))
    }

    /// Assembles and factorizes `K(s, p)`.
    pub fn factor_k(&self, s: Complex64, param: &[f64]) -> Result<Factorization> {
        let k = self.assemble(Role::K, s, param)?;
        Factorization::new(&k).map_err(|cond| Error::Singular {
            s,
            param: param.to_vec(),
            cond,
        })
    }

    /// `C(s, p) K(s, p)⁻¹ B(s, p)` via one factorization and column solves.
    pub fn transfer(&self, s: Complex64, param: &[f64]) -> Result<CMatrix> {
        let f = self.factor_k(s, param)?;
        let b = self.assemble(Role::B, s, param)?.to_dense();
        let c = self.assemble(Role::C, s, param)?;
        Ok(c.mul_dense(&f.solve(&b)))
    }

    /// Evaluates `H` on the grid `params × freqs`, parameter-major: entry
    /// `j * freqs.len() + i` holds `H(freqs[i], params[j])`. Failures are
    /// kept per point.
    pub fn transfer_sweep(&self, freqs: &[Complex64], params: &[Vec<f64>]) -> Vec<Result<CMatrix>> {
        let mut out = Vec::with_capacity(freqs.len() * params.len());
        for param in params {
            for &s in freqs {
                out.push(self.transfer(s, param));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_coeff;
    use crate::linalg::SparseMatrix;
    use alloc::vec;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn scalar(v: f64) -> TermMatrix {
        TermMatrix::Dense(CMatrix::from_element(1, 1, c(v, 0.0)))
    }

    /// K(s) = s + 1, B = C = 1.
    fn first_order_siso() -> StructuredSystem {
        StructuredSystem::new(
            (1, 1, 1, 0),
            vec![
                StructuredTerm::new(Expr::S, scalar(1.0)),
                StructuredTerm::new(Expr::num(-1.0), scalar(-1.0)),
            ],
            vec![StructuredTerm::new(Expr::one(), scalar(1.0))],
            vec![StructuredTerm::new(Expr::one(), scalar(1.0))],
            SystemMeta::default(),
        )
        .unwrap()
    }

    #[test]
    fn siso_transfer_values() {
        let sys = first_order_siso();
        let h0 = sys.transfer(c(0.0, 0.0), &[]).unwrap();
        assert!((h0[(0, 0)] - c(1.0, 0.0)).norm() < 1e-15);
        let hi = sys.transfer(c(0.0, 1.0), &[]).unwrap();
        assert!((hi[(0, 0)] - c(0.5, -0.5)).norm() < 1e-15);
        let err = sys.transfer(c(-1.0, 0.0), &[]).unwrap_err();
        assert!(matches!(err, Error::Singular { .. }));
    }

    #[test]
    fn constant_b_term_assembles_to_itself() {
        let sys = first_order_siso();
        let b = sys.assemble(Role::B, c(3.0, -7.0), &[]).unwrap();
        assert_eq!(b.to_dense(), CMatrix::from_element(1, 1, c(1.0, 0.0)));
    }

    #[test]
    fn sparse_terms_stay_sparse() {
        let eye = TermMatrix::Sparse(SparseMatrix::identity(3));
        let sys = StructuredSystem::new(
            (3, 1, 1, 0),
            vec![
                StructuredTerm::new(Expr::S, eye.clone()),
                StructuredTerm::new(Expr::one(), eye.clone()),
            ],
            vec![StructuredTerm::new(Expr::one(), TermMatrix::Dense(CMatrix::from_element(3, 1, c(1.0, 0.0))))],
            vec![StructuredTerm::new(Expr::one(), TermMatrix::Dense(CMatrix::from_element(1, 3, c(1.0, 0.0))))],
            SystemMeta::default(),
        )
        .unwrap();
        assert!(sys.assemble(Role::K, c(0.0, 1.0), &[]).unwrap().is_sparse());
        assert!(!sys.assemble(Role::B, c(0.0, 1.0), &[]).unwrap().is_sparse());
    }

    #[test]
    fn constructor_rejects_bad_shapes_and_params() {
        let err = StructuredSystem::new(
            (2, 1, 1, 0),
            vec![StructuredTerm::new(Expr::S, scalar(1.0))],
            vec![StructuredTerm::new(Expr::one(), TermMatrix::Dense(CMatrix::zeros(2, 1)))],
            vec![StructuredTerm::new(Expr::one(), TermMatrix::Dense(CMatrix::zeros(1, 2)))],
            SystemMeta::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Dimension(msg) if msg.contains("K-term 0")));

        let err = StructuredSystem::new(
            (1, 1, 1, 0),
            vec![StructuredTerm::new(parse_coeff("p1*s", 1).unwrap(), scalar(1.0))],
            vec![StructuredTerm::new(Expr::one(), scalar(1.0))],
            vec![StructuredTerm::new(Expr::one(), scalar(1.0))],
            SystemMeta::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Dimension(_)));

        let err = StructuredSystem::new((1, 1, 1, 0), vec![], vec![], vec![], SystemMeta::default()).unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(_)));
    }

    #[test]
    fn coefficient_errors_name_the_term() {
        let sys = StructuredSystem::new(
            (1, 1, 1, 0),
            vec![
                StructuredTerm::new(Expr::S, scalar(1.0)),
                StructuredTerm::new(parse_coeff("1/s", 0).unwrap(), scalar(1.0)),
            ],
            vec![StructuredTerm::new(Expr::one(), scalar(1.0))],
            vec![StructuredTerm::new(Expr::one(), scalar(1.0))],
            SystemMeta::default(),
        )
        .unwrap();
        let err = sys.assemble(Role::K, c(0.0, 0.0), &[]).unwrap_err();
        assert!(matches!(err, Error::Term { role: Role::K, index: 1, .. }));
    }

    #[test]
    fn sweep_is_pointwise_and_ordered() {
        let sys = first_order_siso();
        assert!(sys.transfer_sweep(&[], &[vec![]]).is_empty());
        let freqs = [c(0.0, 0.5), c(0.0, 2.0), c(0.0, 8.0)];
        let out = sys.transfer_sweep(&freqs, &[vec![], vec![]]);
        assert_eq!(out.len(), 6);
        for (k, h) in out.iter().enumerate() {
            let expect = sys.transfer(freqs[k % 3], &[]).unwrap();
            assert_eq!(h.as_ref().unwrap(), &expect);
        }
    }
}
