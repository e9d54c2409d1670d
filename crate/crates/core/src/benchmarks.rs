//! Built-in benchmark systems.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::linalg::{RMatrix, SparseMatrix, TermMatrix};
use crate::system::{StructuredSystem, StructuredTerm, SystemMeta};

pub const DELAY_N: usize = 500;
pub const DELAY_MU: f64 = 5.0;
pub const DELAY_ZETA: f64 = 0.01;
pub const DELAY_TAU: f64 = 1.0;
pub const HEAT_GRID: usize = 32;
pub const HEAT_GAMMA: f64 = 1.05;

/// Control set of the heat model, `[x₀, x₁] × [y₀, y₁]`.
pub const HEAT_CONTROL_SET: ((f64, f64), (f64, f64)) = ((0.15, 0.25), (0.2, 0.3));

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BenchmarkSpec {
    Demo,
    Delay { n: usize, mu: f64, zeta: f64, tau: f64 },
    Heat { grid_k: usize, gamma: f64 },
}

impl BenchmarkSpec {
    pub fn delay(n: usize) -> Self {
        Self::Delay {
            n,
            mu: DELAY_MU,
            zeta: DELAY_ZETA,
            tau: DELAY_TAU,
        }
    }

    pub fn heat(grid_k: usize) -> Self {
        Self::Heat {
            grid_k,
            gamma: HEAT_GAMMA,
        }
    }

    /// Looks up a benchmark by name; `size` overrides `n` (delay) or the grid
    /// resolution (heat) and is ignored for the demo system.
    pub fn by_name(name: &str, size: Option<usize>) -> Result<Self> {
        match name {
            "demo" => Ok(Self::Demo),
            "delay" => Ok(Self::delay(size.unwrap_or(DELAY_N))),
            "heat" => Ok(Self::heat(size.unwrap_or(HEAT_GRID))),
            other => Err(Error::InvalidArgument(format!(
                "unknown benchmark '{other}' (expected demo, delay or heat)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Demo => "demo",
            Self::Delay { .. } => "delay",
            Self::Heat { .. } => "heat",
        }
    }

    pub fn frequency_range(&self) -> (f64, f64) {
        match self {
            Self::Demo => (1e-4, 10.0),
            Self::Delay { .. } => (1e-2, 1e4),
            Self::Heat { .. } => (1e-2, 1e2),
        }
    }

    /// Frequency sample count that resolves the benchmark's dominant dynamics.
    pub fn sample_count(&self) -> usize {
        match self {
            Self::Demo => 10,
            Self::Delay { .. } => 1000,
            Self::Heat { .. } => 50,
        }
    }

    pub fn parameter_box(&self) -> Vec<(f64, f64)> {
        match self {
            Self::Demo => vec![(-10.0, 10.0)],
            _ => Vec::new(),
        }
    }

    pub fn build(&self) -> Result<StructuredSystem> {
        match *self {
            Self::Demo => Ok(demo_system()),
            Self::Delay { n, mu, zeta, tau } => delay_system(n, mu, zeta, tau),
            Self::Heat { grid_k, gamma } => heat_fading_memory(grid_k, gamma),
        }
    }
}

fn meta(spec: &BenchmarkSpec, name: String) -> SystemMeta {
    SystemMeta {
        name,
        frequency_range: Some(spec.frequency_range()),
        parameter_box: spec.parameter_box(),
    }
}

/// Three states, one parameter: `K(s, p) = sI − A₀ − p·A₁`, with the third
/// state neither influencing the first two nor observed.
pub fn demo_system() -> StructuredSystem {
    let a0 = RMatrix::from_row_slice(3, 3, &[-2.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, -2.0]);
    let a1 = RMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, -1.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
    let b = RMatrix::from_column_slice(3, 1, &[1.0, 0.0, 1.0]);
    let c = RMatrix::from_row_slice(1, 3, &[1.0, 1.0, 0.0]);
    StructuredSystem::new(
        (3, 1, 1, 1),
        vec![
            StructuredTerm::new(Expr::S, TermMatrix::from_real(&RMatrix::identity(3, 3))),
            StructuredTerm::new(Expr::num(-1.0), TermMatrix::from_real(&a0)),
            StructuredTerm::new(Expr::param(1).neg(), TermMatrix::from_real(&a1)),
        ],
        vec![StructuredTerm::new(Expr::one(), TermMatrix::from_real(&b))],
        vec![StructuredTerm::new(Expr::one(), TermMatrix::from_real(&c))],
        meta(&BenchmarkSpec::Demo, "demo".into()),
    )
    .expect("demo system dimensions are consistent")
}

/// `T`: ones on the sub- and super-diagonal and at the two corners `(1,1)`, `(n,n)`.
pub fn delay_t_triplets(n: usize) -> Vec<(usize, usize, f64)> {
    let mut t = Vec::with_capacity(3 * n);
    t.push((0, 0, 1.0));
    for i in 0..n - 1 {
        t.push((i, i + 1, 1.0));
        t.push((i + 1, i, 1.0));
    }
    t.push((n - 1, n - 1, 1.0));
    t
}

fn scaled_shift(t: &[(usize, usize, f64)], n: usize, scale: f64, shift: f64) -> Vec<(usize, usize, f64)> {
    // scale·(T + shift·I), combining diagonal entries before scaling
    let mut diag = vec![shift; n];
    let mut out = Vec::with_capacity(t.len() + n);
    for &(i, j, v) in t {
        if i == j {
            diag[i] += v;
        } else {
            out.push((i, j, scale * v));
        }
    }
    out.extend(diag.into_iter().enumerate().map(|(i, v)| (i, i, scale * v)));
    out
}

/// `K(s) = sE − A − e^{−τs}A_τ` with `E = μI + T`,
/// `A = (1/τ)(1/ζ + 1)(T − μI)`, `A_τ = (1/τ)(1/ζ − 1)(T − μI)`;
/// `B = e₁ + e₂`, `C = Bᵀ`.
pub fn delay_system(n: usize, mu: f64, zeta: f64, tau: f64) -> Result<StructuredSystem> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("delay system needs n >= 2, got {n}")));
    }
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::InvalidArgument(format!("delay must be positive, got tau = {tau}")));
    }
    if zeta == 0.0 || !zeta.is_finite() || !mu.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "invalid delay constants mu = {mu}, zeta = {zeta}"
        )));
    }
    let t = delay_t_triplets(n);
    let e = SparseMatrix::from_real_triplets(n, n, &scaled_shift(&t, n, 1.0, mu))?;
    let a = SparseMatrix::from_real_triplets(n, n, &scaled_shift(&t, n, (1.0 / zeta + 1.0) / tau, -mu))?;
    let a_tau = SparseMatrix::from_real_triplets(n, n, &scaled_shift(&t, n, (1.0 / zeta - 1.0) / tau, -mu))?;
    let b = SparseMatrix::from_real_triplets(n, 1, &[(0, 0, 1.0), (1, 0, 1.0)])?;
    let c = b.transpose();
    let delay = Expr::num(tau).mul(Expr::S).neg().exp().neg();
    let spec = BenchmarkSpec::Delay { n, mu, zeta, tau };
    StructuredSystem::new(
        (n, 1, 1, 0),
        vec![
            StructuredTerm::new(Expr::S, TermMatrix::Sparse(e)),
            StructuredTerm::new(Expr::num(-1.0), TermMatrix::Sparse(a)),
            StructuredTerm::new(delay, TermMatrix::Sparse(a_tau)),
        ],
        vec![StructuredTerm::new(Expr::one(), TermMatrix::Sparse(b))],
        vec![StructuredTerm::new(Expr::one(), TermMatrix::Sparse(c))],
        meta(&spec, format!("delay-n{n}")),
    )
}

/// Grid coordinate `(i + 1)·h` of interior node `i`.
fn node(i: usize, h: f64) -> f64 {
    (i + 1) as f64 * h
}

/// Five-point Dirichlet Laplacian on the unit square with `grid_k` interior
/// nodes per direction; node `(i, j)` (x index `i`, y index `j`) is state
/// `j·grid_k + i`.
pub fn laplacian_triplets(grid_k: usize) -> Vec<(usize, usize, f64)> {
    let h = 1.0 / (grid_k + 1) as f64;
    let w = 1.0 / (h * h);
    let idx = |i: usize, j: usize| j * grid_k + i;
    let mut out = Vec::with_capacity(5 * grid_k * grid_k);
    for j in 0..grid_k {
        for i in 0..grid_k {
            let k = idx(i, j);
            out.push((k, k, -4.0 * w));
            if i > 0 {
                out.push((k, idx(i - 1, j), w));
            }
            if i + 1 < grid_k {
                out.push((k, idx(i + 1, j), w));
            }
            if j > 0 {
                out.push((k, idx(i, j - 1), w));
            }
            if j + 1 < grid_k {
                out.push((k, idx(i, j + 1), w));
            }
        }
    }
    out
}

/// Indices of grid nodes inside the control set.
pub fn heat_control_nodes(grid_k: usize) -> Vec<usize> {
    let h = 1.0 / (grid_k + 1) as f64;
    let ((x0, x1), (y0, y1)) = HEAT_CONTROL_SET;
    let slack = 1e-12;
    let inside = |v: f64, lo: f64, hi: f64| v >= lo - slack && v <= hi + slack;
    let mut out = Vec::new();
    for j in 0..grid_k {
        for i in 0..grid_k {
            if inside(node(i, h), x0, x1) && inside(node(j, h), y0, y1) {
                out.push(j * grid_k + i);
            }
        }
    }
    out
}

/// `K(s) = sI − A + A/(s + γ)` with `A` the discrete Laplacian; `B` is the
/// indicator of the control set and `C` integrates the state (weights `h²`).
pub fn heat_fading_memory(grid_k: usize, gamma: f64) -> Result<StructuredSystem> {
    if grid_k < 4 {
        return Err(Error::InvalidArgument(format!("heat grid needs grid_k >= 4, got {grid_k}")));
    }
    if !gamma.is_finite() || gamma <= 0.0 {
        return Err(Error::InvalidArgument(format!("memory rate must be positive, got {gamma}")));
    }
    let n = grid_k * grid_k;
    let h = 1.0 / (grid_k + 1) as f64;
    let control = heat_control_nodes(grid_k);
    if control.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "grid_k = {grid_k} places no grid node inside the control set"
        )));
    }
    let a = SparseMatrix::from_real_triplets(n, n, &laplacian_triplets(grid_k))?;
    let b_entries: Vec<_> = control.iter().map(|&k| (k, 0, 1.0)).collect();
    let b = SparseMatrix::from_real_triplets(n, 1, &b_entries)?;
    let c_entries: Vec<_> = (0..n).map(|k| (0, k, h * h)).collect();
    let c = SparseMatrix::from_real_triplets(1, n, &c_entries)?;
    let memory = Expr::one().div(Expr::S.add(Expr::num(gamma)));
    let spec = BenchmarkSpec::Heat { grid_k, gamma };
    StructuredSystem::new(
        (n, 1, 1, 0),
        vec![
            StructuredTerm::new(Expr::S, TermMatrix::Sparse(SparseMatrix::identity(n))),
            StructuredTerm::new(Expr::num(-1.0), TermMatrix::Sparse(a.clone())),
            StructuredTerm::new(memory, TermMatrix::Sparse(a)),
        ],
        vec![StructuredTerm::new(Expr::one(), TermMatrix::Sparse(b))],
        vec![StructuredTerm::new(Expr::one(), TermMatrix::Sparse(c))],
        meta(&spec, format!("heat-k{grid_k}")),
    )
}

/// `‖H(iω)‖` at `ω_max` and `10⁶·ω_max`, for strict-properness checks.
pub fn high_frequency_decay(sys: &StructuredSystem, omega_max: f64, param: &[f64]) -> Result<(f64, f64)> {
    let at = |w: f64| -> Result<f64> {
        Ok(crate::linalg::norm2(&sys.transfer(Complex64::new(0.0, w), param)?))
    };
    Ok((at(omega_max)?, at(1e6 * omega_max)?))
}
