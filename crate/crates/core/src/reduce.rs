//! Dominant reachable/observable subspace projection.
//!
//! Given sampled bases `V` and `W`, the projected operators `WᵀAᵢV` are
//! stacked side by side and on top of each other:
//!
//! ```text
//! [WᵀA₁V … WᵀAₗV]   = W₁ Σ_l Ṽᴴ        (left factor W₁)
//! [WᵀA₁V; …; WᵀAₗV] = W̃ Σ_r V₁ᴴ        (right factor V₁)
//! ```
//!
//! The leading `r` columns give `V_p = V V₁[:, :r]`, `W_p = W W₁[:, :r]`, and
//! every term of the system is projected with them. Singular values of the
//! two stacks measure how strongly a direction is simultaneously reachable
//! and observable; their numerical rank is the order of a realization with
//! the same transfer function.
//!
//! For complex bases `W₁` is taken as the conjugate of the left singular
//! vectors so that `W_pᵀ (WᵀAᵢV)` reproduces `Σ_l Ṽᴴ`; for real bases this
//! is the plain left factor.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result, Role};
use crate::linalg::{is_real_matrix, numerical_rank, thin_svd, CMatrix, Factorization, TermMatrix};
use crate::sampling::{linear_param_grid, log_freq_grid};
use crate::system::{StructuredSystem, StructuredTerm, SystemMeta};

/// Relative singular-value cutoff defining the rank of an exact realization.
pub const MINIMAL_RANK_TOL: f64 = 1e-13;

/// Tolerances reported in [`SvdReport::numerical_rank_at`].
pub const REPORTED_TOLS: [f64; 6] = [1e-2, 1e-4, 1e-6, 1e-8, 1e-10, 1e-12];

const PROBE_POINTS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OrderPolicy {
    /// Keep `r` directions, clamped to the available rank.
    Fixed(usize),
    /// Keep directions with `σᵢ / σ₁ > τ`.
    RelTol(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Sidedness {
    #[default]
    TwoSided,
    /// `W := V` and `W_p := V_p`.
    OneSided,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvdReport {
    /// Singular values of the horizontal stack, descending.
    pub sv_left: Vec<f64>,
    /// Singular values of the vertical stack, descending.
    pub sv_right: Vec<f64>,
    pub chosen_r: usize,
    pub policy: Option<OrderPolicy>,
    /// Left/right counts under the policy, recorded when they disagree.
    pub rank_disagreement: Option<(usize, usize)>,
    pub warnings: Vec<String>,
}

impl SvdReport {
    pub fn rank_left(&self, rel_tol: f64) -> usize {
        numerical_rank(&self.sv_left, rel_tol)
    }

    pub fn rank_right(&self, rel_tol: f64) -> usize {
        numerical_rank(&self.sv_right, rel_tol)
    }

    /// `(tol, left rank, right rank)` for each of [`REPORTED_TOLS`].
    pub fn numerical_rank_at(&self) -> Vec<(f64, usize, usize)> {
        REPORTED_TOLS
            .iter()
            .map(|&t| (t, self.rank_left(t), self.rank_right(t)))
            .collect()
    }

    /// Directions available for truncation: singular values above the
    /// rounding floor in both stacks.
    pub fn available_rank(&self) -> usize {
        let floor = |sv: &[f64]| sv.len().max(1) as f64 * f64::EPSILON;
        self.rank_left(floor(&self.sv_left))
            .min(self.rank_right(floor(&self.sv_right)))
    }
}

#[derive(Debug, Clone)]
pub struct StackedSvd {
    pub report: SvdReport,
    /// `N_W × k` left factor.
    pub w1: CMatrix,
    /// `N_V × k` right factor.
    pub v1: CMatrix,
}

/// SVDs of the horizontal and vertical stacks of `WᵀAᵢV`.
pub fn stacked_svd(v: &CMatrix, w: &CMatrix, k_matrices: &[&TermMatrix]) -> Result<StackedSvd> {
    if k_matrices.is_empty() {
        return Err(Error::InvalidArgument("no K-term matrices to stack".into()));
    }
    let n = v.nrows();
    if w.nrows() != n {
        return Err(Error::Dimension(format!("V has {n} rows but W has {}", w.nrows())));
    }
    for (i, a) in k_matrices.iter().enumerate() {
        if a.nrows() != n || a.ncols() != n {
            return Err(Error::Dimension(format!(
                "K-term {i} is {}x{}, bases have {n} rows",
                a.nrows(),
                a.ncols()
            )));
        }
    }
    let (nv, nw, l) = (v.ncols(), w.ncols(), k_matrices.len());
    let wt = w.transpose();
    let mut horizontal = CMatrix::zeros(nw, l * nv);
    let mut vertical = CMatrix::zeros(l * nw, nv);
    for (i, a) in k_matrices.iter().enumerate() {
        let block = &wt * a.mul_dense(v);
        horizontal.columns_mut(i * nv, nv).copy_from(&block);
        vertical.rows_mut(i * nw, nw).copy_from(&block);
    }
    let left = thin_svd(&horizontal)?;
    let right = thin_svd(&vertical)?;
    Ok(StackedSvd {
        report: SvdReport {
            sv_left: left.singular_values,
            sv_right: right.singular_values,
            chosen_r: 0,
            policy: None,
            rank_disagreement: None,
            warnings: Vec::new(),
        },
        w1: left.u.map(|z| z.conj()),
        v1: right.v,
    })
}

/// Picks the reduced order and records the decision in `report`.
pub fn choose_order(report: &mut SvdReport, policy: OrderPolicy) -> Result<usize> {
    let r = match policy {
        OrderPolicy::Fixed(0) => {
            return Err(Error::InvalidArgument("reduced order must be positive".into()));
        }
        OrderPolicy::Fixed(r) => {
            let available = report.available_rank();
            if r > available {
                report
                    .warnings
                    .push(format!("requested order {r} clamped to available rank {available}"));
            }
            r.min(available)
        }
        OrderPolicy::RelTol(tol) => {
            if !(tol > 0.0 && tol < 1.0) {
                return Err(Error::InvalidArgument(format!(
                    "relative tolerance must lie in (0, 1), got {tol}"
                )));
            }
            let (left, right) = (report.rank_left(tol), report.rank_right(tol));
            if left != right {
                report.rank_disagreement = Some((left, right));
                report.warnings.push(format!(
                    "left stack rank {left} and right stack rank {right} differ at tolerance {tol:e}; using the smaller"
                ));
            }
            left.min(right)
        }
    };
    report.chosen_r = r;
    report.policy = Some(policy);
    Ok(r)
}

/// Petrov-Galerkin projection of every term: `W_pᵀAᵢV_p`, `W_pᵀBᵢ`, `CᵢV_p`.
/// Coefficient expressions are copied unchanged.
pub fn project(sys: &StructuredSystem, v_p: &CMatrix, w_p: &CMatrix) -> Result<StructuredSystem> {
    let n = sys.states();
    if v_p.nrows() != n || w_p.nrows() != n {
        return Err(Error::Dimension(format!(
            "projection bases have {} and {} rows, system has n = {n}",
            v_p.nrows(),
            w_p.nrows()
        )));
    }
    if v_p.ncols() != w_p.ncols() {
        return Err(Error::Dimension(format!(
            "projection bases have {} and {} columns",
            v_p.ncols(),
            w_p.ncols()
        )));
    }
    let r = v_p.ncols();
    if r == 0 {
        return Err(Error::InvalidArgument("cannot project onto an empty basis".into()));
    }
    let wt = w_p.transpose();
    let k_terms = sys
        .terms(Role::K)
        .iter()
        .map(|t| StructuredTerm::new(t.coeff.clone(), TermMatrix::Dense(&wt * t.matrix.mul_dense(v_p))))
        .collect();
    let b_terms = sys
        .terms(Role::B)
        .iter()
        .map(|t| StructuredTerm::new(t.coeff.clone(), TermMatrix::Dense(t.matrix.tr_mul_dense(w_p).transpose())))
        .collect();
    let c_terms = sys
        .terms(Role::C)
        .iter()
        .map(|t| StructuredTerm::new(t.coeff.clone(), TermMatrix::Dense(t.matrix.mul_dense(v_p))))
        .collect();
    let meta = SystemMeta {
        name: format!("{}-r{r}", sys.meta.name),
        ..sys.meta.clone()
    };
    StructuredSystem::new(
        (r, sys.inputs(), sys.outputs(), sys.params()),
        k_terms,
        b_terms,
        c_terms,
        meta,
    )
}

#[derive(Debug, Clone)]
pub struct ReducedSystem {
    pub system: StructuredSystem,
    pub report: SvdReport,
    pub v_p: CMatrix,
    pub w_p: CMatrix,
    /// True when the projection bases (and hence reduced matrices) are complex.
    pub complex: bool,
    pub warnings: Vec<String>,
}

impl ReducedSystem {
    pub fn order(&self) -> usize {
        self.system.states()
    }
}

fn probe_points(sys: &StructuredSystem) -> Vec<(Complex64, Vec<f64>)> {
    let (lo, hi) = sys.meta.frequency_range.unwrap_or((1e-2, 1e2));
    let freqs = log_freq_grid(lo, hi.max(lo), PROBE_POINTS).unwrap_or_default();
    let params = if sys.meta.parameter_box.len() == sys.params() {
        linear_param_grid(&sys.meta.parameter_box, PROBE_POINTS)
    } else {
        alloc::vec![alloc::vec![0.0; sys.params()]; PROBE_POINTS]
    };
    freqs.into_iter().zip(params).collect()
}

/// Truncated reduction with the order picked by `policy`.
pub fn drop_reduce(
    sys: &StructuredSystem,
    v: &CMatrix,
    w: &CMatrix,
    policy: OrderPolicy,
    mode: Sidedness,
) -> Result<ReducedSystem> {
    let w = match mode {
        Sidedness::TwoSided => w,
        Sidedness::OneSided => v,
    };
    let k_matrices = sys.k_matrices();
    let StackedSvd { mut report, w1, v1 } = stacked_svd(v, w, &k_matrices)?;
    let r = choose_order(&mut report, policy)?;
    if r == 0 {
        return Err(Error::InvalidArgument(
            "stacked projected operators have numerical rank 0".into(),
        ));
    }
    if r > v1.ncols() || r > w1.ncols() {
        return Err(Error::InvalidArgument(format!(
            "order {r} exceeds the available factors ({} right, {} left)",
            v1.ncols(),
            w1.ncols()
        )));
    }
    let v_p = v * v1.columns(0, r);
    let w_p = match mode {
        Sidedness::TwoSided => w * w1.columns(0, r),
        Sidedness::OneSided => v_p.clone(),
    };
    let system = project(sys, &v_p, &w_p)?;

    let mut warnings = report.warnings.clone();
    for (s, param) in probe_points(&system) {
        let Ok(k) = system.assemble(Role::K, s, &param) else {
            continue;
        };
        if let Err(cond) = Factorization::new(&k) {
            warnings.push(format!(
                "reduced K is numerically singular at probe s = {s}, p = {param:?} (condition {cond:e})"
            ));
        }
    }
    let complex = !(is_real_matrix(&v_p) && is_real_matrix(&w_p));
    Ok(ReducedSystem {
        system,
        report,
        v_p,
        w_p,
        complex,
        warnings,
    })
}

/// Reduction to the full numerical rank (`MINIMAL_RANK_TOL`) of the stacks.
/// When `V` and `W` span the reachable and observable subspaces, the result
/// realizes the original transfer function.
pub fn minimal_realization(sys: &StructuredSystem, v: &CMatrix, w: &CMatrix) -> Result<ReducedSystem> {
    drop_reduce(sys, v, w, OrderPolicy::RelTol(MINIMAL_RANK_TOL), Sidedness::TwoSided)
}
