//! Interpolation point sets.
//!
//! Random draws come from `ChaCha8Rng::seed_from_u64(seed)` with a fixed
//! stream per purpose (parameters: 0, right directions: 1, left directions:
//! 2). A uniform variate is `(next_u64() >> 11) · 2⁻⁵³ ∈ [0, 1)`; normals
//! use the Box-Muller transform with `libm` so results do not depend on the
//! platform math library.

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};

const PARAM_STREAM: u64 = 0;
const RIGHT_STREAM: u64 = 1;
const LEFT_STREAM: u64 = 2;

/// Resampling attempts for a point that collides with an earlier one.
const MAX_RESAMPLE: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct SamplePoint {
    pub sigma: Complex64,
    pub param: Vec<f64>,
    pub right_dir: Option<Vec<f64>>,
    pub left_dir: Option<Vec<f64>>,
}

impl SamplePoint {
    pub fn new(sigma: Complex64, param: Vec<f64>) -> Self {
        Self {
            sigma,
            param,
            right_dir: None,
            left_dir: None,
        }
    }

    fn same_location(&self, other: &SamplePoint) -> bool {
        self.sigma == other.sigma && self.param == other.param
    }
}

/// How frequency points and parameter points are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Pairing {
    /// Point `j` pairs frequency `j` with parameter `j`.
    #[default]
    Zip,
    /// Every frequency with every parameter, parameter-major.
    Tensor,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleSpec {
    pub omega_min: f64,
    pub omega_max: f64,
    pub n_freq: usize,
    pub param_box: Vec<(f64, f64)>,
    /// Ignored when the parameter box is empty.
    pub n_param: usize,
    pub pairing: Pairing,
    /// Draw random tangential directions (one right and one left per point).
    pub tangential: bool,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    points: Vec<SamplePoint>,
    seed: u64,
    spec: Option<SampleSpec>,
}

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn normal_pair(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let u1 = 1.0 - uniform(rng); // (0, 1]
    let u2 = uniform(rng);
    let radius = libm::sqrt(-2.0 * libm::log(u1));
    let angle = 2.0 * core::f64::consts::PI * u2;
    (radius * libm::cos(angle), radius * libm::sin(angle))
}

fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `i·ω_j` with `ω_j` log-equispaced from `omega_min` to `omega_max` inclusive.
pub fn log_freq_grid(omega_min: f64, omega_max: f64, count: usize) -> Result<Vec<Complex64>> {
    if !(omega_min > 0.0 && omega_max.is_finite() && omega_min.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "frequency bounds must be positive and finite (got {omega_min}, {omega_max})"
        )));
    }
    if omega_max < omega_min {
        return Err(Error::InvalidArgument(format!(
            "omega_max {omega_max} below omega_min {omega_min}"
        )));
    }
    if count == 0 {
        return Err(Error::InvalidArgument("frequency count must be at least 1".into()));
    }
    if count == 1 {
        return Ok(alloc::vec![Complex64::new(0.0, omega_min)]);
    }
    let (lo, hi) = (libm::log10(omega_min), libm::log10(omega_max));
    let step = (hi - lo) / (count - 1) as f64;
    Ok((0..count)
        .map(|j| {
            let omega = if j == 0 {
                omega_min
            } else if j == count - 1 {
                omega_max
            } else {
                libm::pow(10.0, lo + step * j as f64)
            };
            Complex64::new(0.0, omega)
        })
        .collect())
}

fn validate_box(param_box: &[(f64, f64)]) -> Result<()> {
    for (k, &(lo, hi)) in param_box.iter().enumerate() {
        if !(lo.is_finite() && hi.is_finite()) || hi < lo {
            return Err(Error::InvalidArgument(format!(
                "parameter interval {k} is empty or not finite: [{lo}, {hi}]"
            )));
        }
    }
    Ok(())
}

fn draw_param(rng: &mut ChaCha8Rng, param_box: &[(f64, f64)]) -> Vec<f64> {
    param_box
        .iter()
        .map(|&(lo, hi)| {
            let u = uniform(rng);
            lo + (hi - lo) * u
        })
        .collect()
}

/// `count` vectors with each coordinate uniform in its interval.
pub fn random_param_grid(param_box: &[(f64, f64)], count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if param_box.is_empty() {
        return Err(Error::InvalidArgument("parameter box is empty".into()));
    }
    validate_box(param_box)?;
    let mut rng = stream(seed, PARAM_STREAM);
    Ok((0..count).map(|_| draw_param(&mut rng, param_box)).collect())
}

/// `count` evenly spaced vectors along the diagonal of the box (endpoints included).
pub fn linear_param_grid(param_box: &[(f64, f64)], count: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|j| {
            let t = if count > 1 { j as f64 / (count - 1) as f64 } else { 0.0 };
            param_box.iter().map(|&(lo, hi)| lo + (hi - lo) * t).collect()
        })
        .collect()
}

fn draw_direction(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let mut v = Vec::with_capacity(dim + 1);
        while v.len() < dim {
            let (a, b) = normal_pair(rng);
            v.push(a);
            v.push(b);
        }
        v.truncate(dim);
        let norm = libm::sqrt(v.iter().map(|x| x * x).sum());
        if norm > 0.0 {
            v.iter_mut().for_each(|x| *x /= norm);
            return v;
        }
    }
}

fn directions_from(rng: &mut ChaCha8Rng, dim: usize, count: usize) -> Vec<Vec<f64>> {
    (0..count).map(|_| draw_direction(rng, dim)).collect()
}

/// `count` unit vectors in `ℝ^dim`, normalized independent standard normals.
pub fn random_tangent_dirs(dim: usize, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if dim == 0 {
        return Err(Error::InvalidArgument("direction dimension must be at least 1".into()));
    }
    let mut rng = stream(seed, RIGHT_STREAM);
    Ok(directions_from(&mut rng, dim, count))
}

impl SampleSet {
    /// Generates the point set described by `spec` for a system with
    /// `inputs` inputs and `outputs` outputs. Left points coincide with the
    /// right points.
    ///
    /// A point whose `(σ, p)` repeats an earlier one has its parameter
    /// redrawn from the parameter stream; if that cannot separate it (for
    /// example a degenerate box) the point is dropped.
    pub fn generate(spec: &SampleSpec, inputs: usize, outputs: usize) -> Result<Self> {
        validate_box(&spec.param_box)?;
        let freqs = log_freq_grid(spec.omega_min, spec.omega_max, spec.n_freq)?;
        let mut rng = stream(spec.seed, PARAM_STREAM);

        let mut raw: Vec<(Complex64, Vec<f64>)> = Vec::new();
        if spec.param_box.is_empty() {
            raw.extend(freqs.iter().map(|&s| (s, Vec::new())));
        } else {
            let params: Vec<_> = (0..spec.n_param)
                .map(|_| draw_param(&mut rng, &spec.param_box))
                .collect();
            match spec.pairing {
                Pairing::Zip => {
                    if params.len() != freqs.len() {
                        return Err(Error::InvalidArgument(format!(
                            "zip pairing needs equal counts (got {} frequencies, {} parameters)",
                            freqs.len(),
                            params.len()
                        )));
                    }
                    raw.extend(freqs.iter().copied().zip(params));
                }
                Pairing::Tensor => {
                    for p in &params {
                        raw.extend(freqs.iter().map(|&s| (s, p.clone())));
                    }
                }
            }
        }

        let mut points: Vec<SamplePoint> = Vec::with_capacity(raw.len());
        for (sigma, param) in raw {
            let mut candidate = SamplePoint::new(sigma, param);
            let mut attempts = 0;
            while points.iter().any(|q| q.same_location(&candidate))
                && attempts < MAX_RESAMPLE
                && !spec.param_box.is_empty()
            {
                candidate.param = draw_param(&mut rng, &spec.param_box);
                attempts += 1;
            }
            if !points.iter().any(|q| q.same_location(&candidate)) {
                points.push(candidate);
            }
        }

        if spec.tangential {
            let mut right = stream(spec.seed, RIGHT_STREAM);
            let mut left = stream(spec.seed, LEFT_STREAM);
            let count = points.len();
            let rights = directions_from(&mut right, inputs.max(1), count);
            let lefts = directions_from(&mut left, outputs.max(1), count);
            for ((pt, r), l) in points.iter_mut().zip(rights).zip(lefts) {
                pt.right_dir = Some(r);
                pt.left_dir = Some(l);
            }
        }

        Ok(Self {
            points,
            seed: spec.seed,
            spec: Some(spec.clone()),
        })
    }

    /// Wraps explicit points, checking distinctness and unit directions.
    pub fn from_points(points: Vec<SamplePoint>) -> Result<Self> {
        for (k, pt) in points.iter().enumerate() {
            if points[..k].iter().any(|q| q.same_location(pt)) {
                return Err(Error::InvalidArgument(format!("sample point {k} repeats an earlier point")));
            }
            for dir in [&pt.right_dir, &pt.left_dir].into_iter().flatten() {
                let norm = libm::sqrt(dir.iter().map(|x| x * x).sum());
                if (norm - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidArgument(format!(
                        "tangential direction at point {k} has norm {norm}"
                    )));
                }
            }
        }
        Ok(Self {
            points,
            seed: 0,
            spec: None,
        })
    }

    pub fn empty() -> Self {
        Self {
            points: Vec::new(),
            seed: 0,
            spec: None,
        }
    }

    pub fn points(&self) -> &[SamplePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn spec(&self) -> Option<&SampleSpec> {
        self.spec.as_ref()
    }

    /// Same set without the points at `indices`.
    pub fn without(&self, indices: &[usize]) -> Self {
        Self {
            points: self
                .points
                .iter()
                .enumerate()
                .filter(|(k, _)| !indices.contains(k))
                .map(|(_, p)| p.clone())
                .collect(),
            seed: self.seed,
            spec: self.spec.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn log_grid_reference_cases() {
        let g = log_freq_grid(1.0, 100.0, 3).unwrap();
        assert_eq!(g[0], Complex64::new(0.0, 1.0));
        assert!((g[1].im - 10.0).abs() < 1e-14);
        assert_eq!(g[2], Complex64::new(0.0, 100.0));
        assert_eq!(log_freq_grid(5.0, 5.0, 1).unwrap(), vec![Complex64::new(0.0, 5.0)]);
        let g = log_freq_grid(1e-2, 1e4, 7).unwrap();
        for w in g.windows(2) {
            assert!((w[1].im / w[0].im - 10.0).abs() < 1e-12);
        }
        assert!(g.iter().all(|z| z.re == 0.0));
        assert!(log_freq_grid(0.0, 1.0, 3).is_err());
        assert!(log_freq_grid(-1.0, 1.0, 3).is_err());
        assert!(log_freq_grid(2.0, 1.0, 3).is_err());
    }

    #[test]
    fn param_grid_contract() {
        assert_eq!(random_param_grid(&[(0.0, 0.0)], 3, 7).unwrap(), vec![vec![0.0]; 3]);
        let g = random_param_grid(&[(-10.0, 10.0)], 1000, 42).unwrap();
        assert!(g.iter().all(|p| (-10.0..=10.0).contains(&p[0])));
        assert_eq!(g, random_param_grid(&[(-10.0, 10.0)], 1000, 42).unwrap());
        assert_ne!(g, random_param_grid(&[(-10.0, 10.0)], 1000, 43).unwrap());
        assert!(random_param_grid(&[], 3, 0).is_err());
        assert!(random_param_grid(&[(1.0, 0.0)], 3, 0).is_err());
    }

    #[test]
    fn tangent_dirs_contract() {
        let d = random_tangent_dirs(1, 5, 3).unwrap();
        assert!(d.iter().all(|v| v[0] == 1.0 || v[0] == -1.0));
        let d = random_tangent_dirs(3, 100, 3).unwrap();
        for v in &d {
            let n: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((n - 1.0).abs() < 1e-12);
        }
        assert_eq!(d, random_tangent_dirs(3, 100, 3).unwrap());
        assert!(random_tangent_dirs(0, 1, 0).is_err());
    }

    fn spec(n: usize, tangential: bool) -> SampleSpec {
        SampleSpec {
            omega_min: 1e-4,
            omega_max: 10.0,
            n_freq: n,
            param_box: vec![(-10.0, 10.0)],
            n_param: n,
            pairing: Pairing::Zip,
            tangential,
            seed: 0,
        }
    }

    #[test]
    fn generate_is_deterministic_and_distinct() {
        let a = SampleSet::generate(&spec(10, true), 2, 3).unwrap();
        let b = SampleSet::generate(&spec(10, true), 2, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 10);
        for (k, p) in a.points().iter().enumerate() {
            assert_eq!(p.right_dir.as_ref().unwrap().len(), 2);
            assert_eq!(p.left_dir.as_ref().unwrap().len(), 3);
            assert!(a.points()[..k].iter().all(|q| !q.same_location(p)));
        }
        assert!(SampleSet::generate(&SampleSpec { n_param: 3, ..spec(10, false) }, 1, 1).is_err());
    }

    #[test]
    fn tensor_mode_and_degenerate_box() {
        let s = SampleSpec {
            pairing: Pairing::Tensor,
            n_param: 3,
            n_freq: 4,
            ..spec(4, false)
        };
        assert_eq!(SampleSet::generate(&s, 1, 1).unwrap().len(), 12);
        // a point box cannot separate repeated parameters: duplicates are dropped
        let s = SampleSpec {
            param_box: vec![(1.0, 1.0)],
            ..s
        };
        assert_eq!(SampleSet::generate(&s, 1, 1).unwrap().len(), 4);
    }

    #[test]
    fn from_points_validates() {
        let p = SamplePoint::new(Complex64::new(0.0, 1.0), vec![]);
        assert!(SampleSet::from_points(vec![p.clone(), p.clone()]).is_err());
        let mut q = p.clone();
        q.right_dir = Some(vec![0.5, 0.5]);
        assert!(SampleSet::from_points(vec![q]).is_err());
        assert_eq!(SampleSet::from_points(vec![p]).unwrap().len(), 1);
    }
}
