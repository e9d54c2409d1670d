//! Sampled projection bases.
//!
//! `V` collects `K(σⱼ, pⱼ)⁻¹ B(σⱼ, pⱼ)` and `W` collects
//! `K(σⱼ, pⱼ)⁻ᵀ C(σⱼ, pⱼ)ᵀ` (plain transpose), optionally multiplied by the
//! tangential directions of each point. Bases may optionally be replaced by
//! real bases of `[Re M, Im M]`, which also cover the conjugate samples and
//! give real reduced matrices at the price of a larger subspace.
//!
//! The default post-processing compresses each basis to `U_k Σ_k` from its
//! SVD. Orthonormal bases span the same subspaces, but they discard how
//! strongly each sample excites a direction; the stacked singular values of
//! the reduction step then stop reflecting reachability and observability
//! and truncation below full rank picks arbitrary directions.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result, Role};
use crate::linalg::{compress, orthonormalize, to_complex, CMatrix, Factorization, RMatrix};
use crate::sampling::{SamplePoint, SampleSet};
use crate::system::StructuredSystem;

/// Relative singular-value cutoff used when orthonormalizing sampled bases.
pub const DEFAULT_DROP_TOL: f64 = 1e-12;

/// Post-processing applied to the sampled bases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BasisForm {
    /// Sampled columns as computed (split into real and imaginary parts when realified).
    Raw,
    /// Orthonormal basis of the sampled range.
    Orthonormal,
    /// `U_k Σ_k`: the sampled range with the sample magnitudes kept.
    #[default]
    Scaled,
}

#[derive(Debug, Clone)]
pub struct ProjectionPair {
    pub v: CMatrix,
    pub w: CMatrix,
    pub form: BasisForm,
    pub orthonormalized: bool,
    pub realified: bool,
    /// Points that were skipped because `K` could not be factorized there.
    pub skipped: Vec<usize>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionOptions {
    /// Replace complex bases by real ones.
    pub realify: bool,
    pub form: BasisForm,
    /// Relative singular-value cutoff for the orthonormal and scaled forms.
    pub drop_tol: f64,
    /// Build only `V` and use it on both sides.
    pub one_sided: bool,
}

impl Default for ProjectionOptions {
    fn default() -> Self {
        Self {
            realify: false,
            form: BasisForm::default(),
            drop_tol: DEFAULT_DROP_TOL,
            one_sided: false,
        }
    }
}

fn direction(dir: &[f64]) -> CMatrix {
    CMatrix::from_iterator(dir.len(), 1, dir.iter().map(|&x| Complex64::new(x, 0.0)))
}

fn right_columns(sys: &StructuredSystem, f: &Factorization, pt: &SamplePoint) -> Result<CMatrix> {
    let mut b = sys.assemble(Role::B, pt.sigma, &pt.param)?.to_dense();
    if let Some(dir) = &pt.right_dir {
        check_dir(dir, sys.inputs(), "right")?;
        b = b * direction(dir);
    }
    Ok(f.solve(&b))
}

fn left_columns(sys: &StructuredSystem, f: &Factorization, pt: &SamplePoint) -> Result<CMatrix> {
    let mut ct = sys.assemble(Role::C, pt.sigma, &pt.param)?.to_dense().transpose();
    if let Some(dir) = &pt.left_dir {
        check_dir(dir, sys.outputs(), "left")?;
        ct = ct * direction(dir);
    }
    Ok(f.solve_transpose(&ct))
}

fn check_dir(dir: &[f64], expected: usize, side: &str) -> Result<()> {
    if dir.len() != expected {
        return Err(Error::Dimension(format!(
            "{side} tangential direction has length {}, expected {expected}",
            dir.len()
        )));
    }
    Ok(())
}

fn concat(n: usize, blocks: Vec<CMatrix>) -> CMatrix {
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = CMatrix::zeros(n, cols);
    let mut at = 0;
    for b in blocks {
        out.columns_mut(at, b.ncols()).copy_from(&b);
        at += b.ncols();
    }
    out
}

/// Raw right basis `[K(σ₁,p₁)⁻¹B(σ₁,p₁)b₁, …]`; errors on the first singular sample.
pub fn build_v(sys: &StructuredSystem, samples: &SampleSet) -> Result<CMatrix> {
    let blocks = samples
        .points()
        .iter()
        .map(|pt| {
            let f = sys.factor_k(pt.sigma, &pt.param)?;
            right_columns(sys, &f, pt)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(concat(sys.states(), blocks))
}

/// Raw left basis `[K(σ₁,p₁)⁻ᵀC(σ₁,p₁)ᵀc₁, …]`; errors on the first singular sample.
pub fn build_w(sys: &StructuredSystem, samples: &SampleSet) -> Result<CMatrix> {
    let blocks = samples
        .points()
        .iter()
        .map(|pt| {
            let f = sys.factor_k(pt.sigma, &pt.param)?;
            left_columns(sys, &f, pt)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(concat(sys.states(), blocks))
}

/// `[Re M, Im M]`.
pub fn real_parts(m: &CMatrix) -> RMatrix {
    let (n, c) = m.shape();
    let mut parts = RMatrix::zeros(n, 2 * c);
    parts.columns_mut(0, c).copy_from(&m.map(|z| z.re));
    parts.columns_mut(c, c).copy_from(&m.map(|z| z.im));
    parts
}

/// Orthonormal real basis of the real span of `[Re M, Im M]`.
pub fn realify(m: &CMatrix, drop_tol: f64) -> Result<RMatrix> {
    orthonormalize(&real_parts(m), drop_tol)
}

fn post_process(m: &CMatrix, realified: bool, form: BasisForm, tol: f64) -> Result<CMatrix> {
    Ok(match (realified, form) {
        (true, BasisForm::Raw) => to_complex(&real_parts(m)),
        (true, BasisForm::Orthonormal) => to_complex(&realify(m, tol)?),
        (true, BasisForm::Scaled) => to_complex(&compress(&real_parts(m), tol)?),
        (false, BasisForm::Raw) => m.clone(),
        (false, BasisForm::Orthonormal) => orthonormalize(m, tol)?,
        (false, BasisForm::Scaled) => compress(m, tol)?,
    })
}

/// Builds `V` and `W` with one factorization per sample, skipping points
/// where `K` is singular, then post-processes per `opts`.
pub fn build_projection(
    sys: &StructuredSystem,
    samples: &SampleSet,
    opts: &ProjectionOptions,
) -> Result<ProjectionPair> {
    let n = sys.states();
    let mut v_blocks = Vec::with_capacity(samples.len());
    let mut w_blocks = Vec::with_capacity(samples.len());
    let mut skipped = Vec::new();
    let mut warnings = Vec::new();
    for (k, pt) in samples.points().iter().enumerate() {
        let f = match sys.factor_k(pt.sigma, &pt.param) {
            Ok(f) => f,
            Err(err @ (Error::Singular { .. } | Error::Term { .. })) => {
                warnings.push(format!("sample {k} skipped: {err}"));
                skipped.push(k);
                continue;
            }
            Err(err) => return Err(err),
        };
        v_blocks.push(right_columns(sys, &f, pt)?);
        if !opts.one_sided {
            w_blocks.push(left_columns(sys, &f, pt)?);
        }
    }
    let v = concat(n, v_blocks);
    let w = if opts.one_sided { v.clone() } else { concat(n, w_blocks) };

    let realified = opts.realify;
    if !(opts.drop_tol >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "drop tolerance must be nonnegative, got {}",
            opts.drop_tol
        )));
    }
    let v = post_process(&v, realified, opts.form, opts.drop_tol)?;
    let w = if opts.one_sided {
        v.clone()
    } else {
        post_process(&w, realified, opts.form, opts.drop_tol)?
    };
    Ok(ProjectionPair {
        v,
        w,
        form: opts.form,
        orthonormalized: opts.form == BasisForm::Orthonormal,
        realified,
        skipped,
        warnings,
    })
}

/// Largest relative residual of projecting the columns of `raw` onto the
/// orthonormal basis `q`.
pub fn subspace_residual(raw: &CMatrix, q: &CMatrix) -> f64 {
    raw.column_iter()
        .map(|c| {
            let c: DVector<Complex64> = c.into_owned();
            let norm = c.norm();
            if norm == 0.0 {
                return 0.0;
            }
            let r = &c - q * (q.adjoint() * &c);
            r.norm() / norm
        })
        .fold(0.0, f64::max)
}
