use std::fs;
use std::path::{Path, PathBuf};

use dropmor_core::benchmarks::BenchmarkSpec;
use dropmor_core::projection::{BasisForm, ProjectionOptions};
use dropmor_core::reduce::{OrderPolicy, Sidedness};
use dropmor_core::sampling::{Pairing, SampleSpec};
use dropmor_core::StructuredSystem;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::manifest::{load_system, reduced_manifest_path};

/// Relative truncation tolerance used when neither `order` nor `tol` is set.
pub const DEFAULT_TOL: f64 = 1e-8;

/// Frequency sample count for manifest systems when `nfreq` is unset.
pub const DEFAULT_SAMPLES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum BasisName {
    #[default]
    Scaled,
    Orthonormal,
    Raw,
}

impl From<BasisName> for BasisForm {
    fn from(b: BasisName) -> Self {
        match b {
            BasisName::Scaled => BasisForm::Scaled,
            BasisName::Orthonormal => BasisForm::Orthonormal,
            BasisName::Raw => BasisForm::Raw,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum PairingName {
    #[default]
    Zip,
    Tensor,
}

/// Everything a run depends on. Flat so that files and flags share one schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Builtin benchmark: `demo`, `delay` or `heat`.
    pub bench: Option<String>,
    /// Benchmark size (`n` for delay, grid points per side for heat).
    pub size: Option<usize>,
    pub manifest: Option<PathBuf>,
    /// Frequency sample count; defaults to the benchmark's own count, else 100.
    pub nfreq: Option<usize>,
    pub fmin: Option<f64>,
    pub fmax: Option<f64>,
    pub nparam: Option<usize>,
    pub pbox: Option<Vec<[f64; 2]>>,
    pub pairing: PairingName,
    pub seed: u64,
    pub order: Option<usize>,
    pub tol: Option<f64>,
    pub one_sided: bool,
    pub tangential: bool,
    pub basis: BasisName,
    pub realify: bool,
    pub out: PathBuf,
    /// Reduced manifest for `sweep` and `verify`; defaults to `<out>/reduced.toml`.
    pub reduced: Option<PathBuf>,
    pub sweep_nfreq: usize,
    pub sweep_nparam: usize,
    pub interp_tol: f64,
    pub hermite_tol: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            bench: None,
            size: None,
            manifest: None,
            nfreq: None,
            fmin: None,
            fmax: None,
            nparam: None,
            pbox: None,
            pairing: PairingName::Zip,
            seed: 0,
            order: None,
            tol: None,
            one_sided: false,
            tangential: false,
            basis: BasisName::Scaled,
            realify: false,
            out: PathBuf::from("dropmor-out"),
            reduced: None,
            sweep_nfreq: 100,
            sweep_nparam: 20,
            interp_tol: 1e-8,
            hermite_tol: 1e-5,
        }
    }
}

/// Parses `lo:hi[,lo:hi...]`.
pub fn parse_pbox(text: &str) -> std::result::Result<Vec<[f64; 2]>, String> {
    text.split(',')
        .map(|part| {
            let (lo, hi) = part
                .split_once(':')
                .ok_or_else(|| format!("expected lo:hi, found {part:?}"))?;
            let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("invalid bound {t:?}"));
            Ok([num(lo)?, num(hi)?])
        })
        .collect()
}

impl RunConfig {
    /// Reads a TOML or JSON config, chosen by extension (TOML otherwise).
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
            serde_json::from_str(&text).map_err(|e| CliError::format(path, e.line(), e.to_string()))
        } else {
            toml::from_str(&text).map_err(|e| {
                let line = e
                    .span()
                    .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1)
                    .unwrap_or(1);
                CliError::format(path, line, e.message().to_string())
            })
        }
    }

    pub fn validate(&self) -> Result<()> {
        let usage = |m: &str| Err(CliError::Usage(m.to_string()));
        match (&self.bench, &self.manifest) {
            (Some(_), Some(_)) => return usage("give either --bench or --manifest, not both"),
            (None, None) => return usage("a system source is required (--bench <demo|delay|heat> or --manifest <path>)"),
            _ => {}
        }
        if self.order.is_some() && self.tol.is_some() {
            return usage("give either --order or --tol, not both");
        }
        if self.order == Some(0) {
            return usage("--order must be positive");
        }
        if let Some(t) = self.tol {
            if !(t > 0.0 && t < 1.0) {
                return usage("--tol must lie in (0, 1)");
            }
        }
        if self.nfreq == Some(0) || self.sweep_nfreq == 0 {
            return usage("frequency counts must be positive");
        }
        if !(self.interp_tol > 0.0 && self.hermite_tol > 0.0) {
            return usage("verification tolerances must be positive");
        }
        Ok(())
    }

    fn benchmark(&self) -> Result<Option<BenchmarkSpec>> {
        self.bench
            .as_deref()
            .map(|name| BenchmarkSpec::by_name(name, self.size).map_err(|e| CliError::Usage(e.to_string())))
            .transpose()
    }

    pub fn load_system(&self) -> Result<StructuredSystem> {
        self.validate()?;
        if let Some(path) = &self.manifest {
            return load_system(path);
        }
        let spec = self.benchmark()?.expect("validated source");
        spec.build()
            .map_err(|e| CliError::pipeline(format!("building benchmark {}", spec.name()), e))
    }

    pub fn sample_count(&self) -> Result<usize> {
        Ok(match (self.nfreq, self.benchmark()?) {
            (Some(n), _) => n,
            (None, Some(spec)) => spec.sample_count(),
            (None, None) => DEFAULT_SAMPLES,
        })
    }

    pub fn frequency_range(&self, sys: &StructuredSystem) -> Result<(f64, f64)> {
        let declared = sys.meta.frequency_range;
        let lo = self.fmin.or(declared.map(|r| r.0));
        let hi = self.fmax.or(declared.map(|r| r.1));
        match (lo, hi) {
            (Some(lo), Some(hi)) => Ok((lo, hi)),
            _ => Err(CliError::Usage(format!(
                "system {:?} declares no frequency range; pass --fmin and --fmax",
                sys.meta.name
            ))),
        }
    }

    pub fn parameter_box(&self, sys: &StructuredSystem) -> Result<Vec<(f64, f64)>> {
        let bx: Vec<(f64, f64)> = match &self.pbox {
            Some(b) => b.iter().map(|&[lo, hi]| (lo, hi)).collect(),
            None => sys.meta.parameter_box.clone(),
        };
        if bx.len() != sys.params() {
            return Err(CliError::Usage(format!(
                "system has {} parameters but the parameter box has {} intervals",
                sys.params(),
                bx.len()
            )));
        }
        Ok(bx)
    }

    pub fn sample_spec(&self, sys: &StructuredSystem) -> Result<SampleSpec> {
        let (omega_min, omega_max) = self.frequency_range(sys)?;
        let param_box = self.parameter_box(sys)?;
        let n_freq = self.sample_count()?;
        let n_param = if param_box.is_empty() { 0 } else { self.nparam.unwrap_or(n_freq) };
        Ok(SampleSpec {
            omega_min,
            omega_max,
            n_freq,
            param_box,
            n_param,
            pairing: match self.pairing {
                PairingName::Zip => Pairing::Zip,
                PairingName::Tensor => Pairing::Tensor,
            },
            tangential: self.tangential,
            seed: self.seed,
        })
    }

    pub fn policy(&self) -> OrderPolicy {
        match (self.order, self.tol) {
            (Some(r), _) => OrderPolicy::Fixed(r),
            (None, t) => OrderPolicy::RelTol(t.unwrap_or(DEFAULT_TOL)),
        }
    }

    pub fn sidedness(&self) -> Sidedness {
        if self.one_sided {
            Sidedness::OneSided
        } else {
            Sidedness::TwoSided
        }
    }

    pub fn projection_options(&self) -> ProjectionOptions {
        ProjectionOptions {
            realify: self.realify,
            form: self.basis.into(),
            one_sided: self.one_sided,
            ..Default::default()
        }
    }

    pub fn reduced_path(&self) -> PathBuf {
        self.reduced.clone().unwrap_or_else(|| reduced_manifest_path(&self.out))
    }
}
