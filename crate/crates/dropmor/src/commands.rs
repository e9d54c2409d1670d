use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use dropmor_core::analysis::{sweep_error, verify_hermite, verify_interpolation, CheckReport, ErrorReport, FD_STEP};
use dropmor_core::projection::build_projection;
use dropmor_core::reduce::{drop_reduce, OrderPolicy, SvdReport};
use dropmor_core::sampling::{linear_param_grid, log_freq_grid, SampleSet};
use dropmor_core::StructuredSystem;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::manifest::{load_system, save_system};

#[derive(Debug, Clone)]
pub struct ReduceOutcome {
    pub order: usize,
    pub reduced_path: PathBuf,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct VerifyOutcome {
    pub interpolation: CheckReport,
    pub hermite: CheckReport,
}

impl VerifyOutcome {
    pub fn passed(&self) -> bool {
        self.interpolation.passed() && self.hermite.passed()
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn json_text(value: &Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("JSON values always serialize");
    text.push('\n');
    text
}

/// Finite numbers as JSON numbers, everything else as null.
fn num(v: f64) -> Value {
    serde_json::Number::from_f64(v).map(Value::Number).unwrap_or(Value::Null)
}

fn opt_cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

fn generate_samples(cfg: &RunConfig, sys: &StructuredSystem) -> Result<SampleSet> {
    let spec = cfg.sample_spec(sys)?;
    SampleSet::generate(&spec, sys.inputs(), sys.outputs()).map_err(|e| CliError::pipeline("sampling", e))
}

pub fn svd_csv(report: &SvdReport) -> String {
    let mut out = String::from("index,sv_left,sv_right\n");
    let rows = report.sv_left.len().max(report.sv_right.len());
    for i in 0..rows {
        let _ = writeln!(
            out,
            "{},{},{}",
            i + 1,
            opt_cell(report.sv_left.get(i).copied()),
            opt_cell(report.sv_right.get(i).copied())
        );
    }
    out
}

pub fn reduce(cfg: &RunConfig) -> Result<ReduceOutcome> {
    let sys = cfg.load_system()?;
    let samples = generate_samples(cfg, &sys)?;
    let options = cfg.projection_options();
    let pair = build_projection(&sys, &samples, &options).map_err(|e| CliError::pipeline("building projection bases", e))?;
    let policy = cfg.policy();
    let red = drop_reduce(&sys, &pair.v, &pair.w, policy, cfg.sidedness())
        .map_err(|e| CliError::pipeline("reduction", e))?;

    create_dir(&cfg.out)?;
    let reduced_path = cfg.reduced_path();
    save_system(&red.system, &reduced_path)?;
    write_file(&cfg.out.join("svd.csv"), &svd_csv(&red.report))?;

    let mut warnings = pair.warnings.clone();
    warnings.extend(red.warnings.iter().cloned());
    let policy_json = match policy {
        OrderPolicy::Fixed(r) => json!({"fixed": r}),
        OrderPolicy::RelTol(t) => json!({"rel_tol": num(t)}),
    };
    let ranks: Vec<Value> = red
        .report
        .numerical_rank_at()
        .into_iter()
        .map(|(tol, l, r)| json!({"tol": num(tol), "left": l, "right": r}))
        .collect();
    let run = json!({
        "config": serde_json::to_value(cfg).map_err(|e| CliError::Usage(e.to_string()))?,
        "system": {
            "name": sys.meta.name,
            "n": sys.states(),
            "m": sys.inputs(),
            "p": sys.outputs(),
            "d": sys.params(),
        },
        "samples": samples.len(),
        "skipped_samples": pair.skipped,
        "basis": {
            "form": format!("{:?}", pair.form).to_lowercase(),
            "orthonormalized": pair.orthonormalized,
            "realified": pair.realified,
            "columns_v": pair.v.ncols(),
            "columns_w": pair.w.ncols(),
        },
        "policy": policy_json,
        "r": red.order(),
        "complex": red.complex,
        "rank_disagreement": red.report.rank_disagreement.map(|(l, r)| json!({"left": l, "right": r})),
        "ranks_at_tol": ranks,
        "reduced_manifest": reduced_path.file_name().map(|f| f.to_string_lossy().into_owned()),
        "warnings": warnings,
    });
    write_file(&cfg.out.join("run.json"), &json_text(&run))?;
    Ok(ReduceOutcome {
        order: red.order(),
        reduced_path,
        warnings,
    })
}

fn load_reduced(cfg: &RunConfig, sys: &StructuredSystem) -> Result<StructuredSystem> {
    let path = cfg.reduced_path();
    let red = load_system(&path)?;
    let dims = |s: &StructuredSystem| (s.inputs(), s.outputs(), s.params());
    if dims(sys) != dims(&red) {
        let (m, p, d) = dims(sys);
        let (rm, rp, rd) = dims(&red);
        return Err(CliError::Usage(format!(
            "{} has (m, p, d) = ({rm}, {rp}, {rd}) but the full system has ({m}, {p}, {d})",
            path.display()
        )));
    }
    Ok(red)
}

pub fn sweep_csv(report: &ErrorReport) -> String {
    let mut out = String::from("omega,param_index,abs_err,rel_err,h_norm,h_red_norm\n");
    for k in 0..report.len() {
        let (i, j) = report.location(k);
        let _ = writeln!(
            out,
            "{:e},{j},{},{},{},{}",
            report.freqs[i],
            opt_cell(report.abs_err[k]),
            opt_cell(report.rel_err[k]),
            opt_cell(report.h_norm[k]),
            opt_cell(report.h_red_norm[k])
        );
    }
    out
}

pub fn sweep(cfg: &RunConfig) -> Result<ErrorReport> {
    let sys = cfg.load_system()?;
    let red = load_reduced(cfg, &sys)?;
    let (lo, hi) = cfg.frequency_range(&sys)?;
    let freqs: Vec<f64> = log_freq_grid(lo, hi, cfg.sweep_nfreq)
        .map_err(|e| CliError::pipeline("sweep grid", e))?
        .iter()
        .map(|s| s.im)
        .collect();
    let bx = cfg.parameter_box(&sys)?;
    let params = if bx.is_empty() {
        vec![vec![]]
    } else {
        linear_param_grid(&bx, cfg.sweep_nparam.max(1))
    };
    let report = sweep_error(&sys, &red, &freqs, &params).map_err(|e| CliError::pipeline("error sweep", e))?;

    create_dir(&cfg.out)?;
    write_file(&cfg.out.join("sweep.csv"), &sweep_csv(&report))?;
    let summary = json!({
        "full": sys.meta.name,
        "reduced": red.meta.name,
        "order": red.states(),
        "points": report.len(),
        "max_abs": num(report.max_abs),
        "max_rel": num(report.max_rel),
        "l2_err": num(report.l2_err),
        "params": report.params,
        "failures": report.failures.iter().map(|(k, msg)| json!({"index": k, "error": msg})).collect::<Vec<_>>(),
    });
    write_file(&cfg.out.join("summary.json"), &json_text(&summary))?;
    Ok(report)
}

fn check_json(report: &CheckReport) -> Value {
    json!({
        "tol": num(report.tol),
        "passed": report.passed(),
        "max_residual": num(report.max_residual()),
        "points": report.points.iter().map(|p| json!({
            "index": p.index,
            "sigma": [num(p.sigma.re), num(p.sigma.im)],
            "param": p.param,
            "residual": num(p.residual),
            "error": p.failure,
        })).collect::<Vec<_>>(),
    })
}

pub fn verify(cfg: &RunConfig) -> Result<VerifyOutcome> {
    let sys = cfg.load_system()?;
    let red = load_reduced(cfg, &sys)?;
    let samples = generate_samples(cfg, &sys)?;
    let interpolation = verify_interpolation(&sys, &red, &samples, cfg.interp_tol);
    let hermite = verify_hermite(&sys, &red, &samples, FD_STEP, cfg.hermite_tol);
    let outcome = VerifyOutcome { interpolation, hermite };

    create_dir(&cfg.out)?;
    let report = json!({
        "passed": outcome.passed(),
        "interpolation": check_json(&outcome.interpolation),
        "hermite": check_json(&outcome.hermite),
    });
    write_file(&cfg.out.join("verify.json"), &json_text(&report))?;
    Ok(outcome)
}
