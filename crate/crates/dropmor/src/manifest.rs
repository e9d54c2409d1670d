//! TOML system manifests. Matrix paths are relative to the manifest file.
//!
//! ```toml
//! name = "demo"
//! n = 3
//! m = 1
//! p = 1
//! d = 1
//! frequency_range = [1e-4, 10.0]
//! parameter_box = [[-10.0, 10.0]]
//!
//! [[k]]
//! coeff = "s"
//! matrix = "demo.k0.mtx"
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use dropmor_core::{parse_coeff, Complex64, Role, StructuredSystem, StructuredTerm, SystemMeta};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::mtx::{read_matrix, write_matrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermEntry {
    pub coeff: String,
    pub matrix: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub name: String,
    pub n: usize,
    pub m: usize,
    pub p: usize,
    #[serde(default)]
    pub d: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequency_range: Option<[f64; 2]>,
    #[serde(default)]
    pub parameter_box: Vec<[f64; 2]>,
    #[serde(default)]
    pub k: Vec<TermEntry>,
    #[serde(default)]
    pub b: Vec<TermEntry>,
    #[serde(default)]
    pub c: Vec<TermEntry>,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

pub fn read_manifest(path: &Path) -> Result<Manifest> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    toml::from_str(&text).map_err(|e| {
        let line = e.span().map(|s| line_of(&text, s.start)).unwrap_or(1);
        CliError::format(path, line, e.message().to_string())
    })
}

/// Angular frequency and parameter at which a loaded `K` is test-factorized.
fn probe_point(meta: &SystemMeta, d: usize) -> (Complex64, Vec<f64>) {
    let omega = meta.frequency_range.map(|(lo, hi)| (lo * hi).sqrt()).unwrap_or(1.0);
    let param = if meta.parameter_box.len() == d {
        meta.parameter_box.iter().map(|(lo, hi)| 0.5 * (lo + hi)).collect()
    } else {
        vec![0.0; d]
    };
    (Complex64::new(0.0, omega), param)
}

pub fn load_system(path: &Path) -> Result<StructuredSystem> {
    let manifest = read_manifest(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let Manifest { name, n, m, p, d, .. } = manifest.clone();

    let load_terms = |role: Role, entries: &[TermEntry], shape: (usize, usize)| -> Result<Vec<StructuredTerm>> {
        entries
            .iter()
            .enumerate()
            .map(|(i, entry)| {
                let coeff = parse_coeff(&entry.coeff, d).map_err(|e| {
                    CliError::Usage(format!("{}: {role}-term {i} coefficient {:?}: {e}", path.display(), entry.coeff))
                })?;
                let matrix_path = base.join(&entry.matrix);
                let matrix = read_matrix(&matrix_path)?;
                if (matrix.nrows(), matrix.ncols()) != shape {
                    return Err(CliError::Usage(format!(
                        "{}: {role}-term {i} ({}) is {}x{}, expected {}x{}",
                        path.display(),
                        entry.matrix,
                        matrix.nrows(),
                        matrix.ncols(),
                        shape.0,
                        shape.1
                    )));
                }
                Ok(StructuredTerm::new(coeff, matrix))
            })
            .collect()
    };
    let k = load_terms(Role::K, &manifest.k, (n, n))?;
    let b = load_terms(Role::B, &manifest.b, (n, m))?;
    let c = load_terms(Role::C, &manifest.c, (p, n))?;

    let meta = SystemMeta {
        name,
        frequency_range: manifest.frequency_range.map(|[lo, hi]| (lo, hi)),
        parameter_box: manifest.parameter_box.iter().map(|&[lo, hi]| (lo, hi)).collect(),
    };
    let context = || format!("{}", path.display());
    let sys = StructuredSystem::new((n, m, p, d), k, b, c, meta).map_err(|e| CliError::pipeline(context(), e))?;
    let (s, param) = probe_point(&sys.meta, d);
    sys.factor_k(s, &param)
        .map_err(|e| CliError::pipeline(format!("{}: probe evaluation of K", path.display()), e))?;
    Ok(sys)
}

/// Writes `path` plus one matrix file per term, named `<stem>.<role><index>.mtx`
/// next to it.
pub fn save_system(sys: &StructuredSystem, path: &Path) -> Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    if !dir.as_os_str().is_empty() {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .ok_or_else(|| CliError::Usage(format!("manifest path {} has no file name", path.display())))?;

    let write_terms = |role: Role| -> Result<Vec<TermEntry>> {
        sys.terms(role)
            .iter()
            .enumerate()
            .map(|(i, term)| {
                let file = format!("{stem}.{}{i}.mtx", role.to_string().to_lowercase());
                write_matrix(&dir.join(&file), &term.matrix)?;
                Ok(TermEntry {
                    coeff: term.coeff.to_string(),
                    matrix: file,
                })
            })
            .collect()
    };
    let manifest = Manifest {
        name: sys.meta.name.clone(),
        n: sys.states(),
        m: sys.inputs(),
        p: sys.outputs(),
        d: sys.params(),
        frequency_range: sys.meta.frequency_range.map(|(lo, hi)| [lo, hi]),
        parameter_box: sys.meta.parameter_box.iter().map(|&(lo, hi)| [lo, hi]).collect(),
        k: write_terms(Role::K)?,
        b: write_terms(Role::B)?,
        c: write_terms(Role::C)?,
    };
    let text = toml::to_string(&manifest).map_err(|e| CliError::Usage(format!("serializing manifest: {e}")))?;
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Manifest path used when only an output directory is known.
pub fn reduced_manifest_path(out: &Path) -> PathBuf {
    out.join("reduced.toml")
}
