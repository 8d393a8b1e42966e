use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::cli::config::{Command, RunConfig};
use crate::error::{Error, Result};
use crate::geometry::{Grid, MeasureSpace, ScalarField};
use crate::minimizer::{
    annulus_exponent_fit, annulus_exponent_predicted, aubin_scan, blowup_scan, dirichlet_rho1, lower_bound_check,
    minimize_quotient, write_trace_csv, MinimizerConfig,
};
use crate::sharp_constants::{
    bubble, constant_row, lambda_mn, lift_check, trace_sharpness, write_constant_csv, BubbleParams, Layout,
};

/// Uncertainty attached to a reported number.
#[derive(Debug, Clone, PartialEq)]
pub enum Budget {
    /// The number is a closed-form evaluation.
    Exact,
    /// Absolute error bound or estimate.
    Bound(f64),
}

impl Serialize for Budget {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Budget::Exact => s.serialize_str("exact closed form"),
            Budget::Bound(v) => s.serialize_f64(*v),
        }
    }
}

/// Result of a successful dispatch.
#[derive(Debug)]
pub struct Outcome {
    pub report: Value,
    pub files: Vec<PathBuf>,
    /// Set when results were written but the run did not converge.
    pub warning: Option<Error>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// SHA-256 of the canonical JSON form of the validated config.
pub fn config_hash(cfg: &RunConfig) -> String {
    sha256_hex(serde_json::to_string(cfg).expect("config serializes").as_bytes())
}

fn space_hash(cfg: &RunConfig) -> Option<String> {
    cfg.space
        .as_ref()
        .map(|s| sha256_hex(serde_json::to_string(s).expect("space serializes").as_bytes()))
}

fn envelope(cfg: &RunConfig, budgets: BTreeMap<&str, Budget>, result: Value) -> Value {
    json!({
        "command": cfg.command.name(),
        "version": env!("CARGO_PKG_VERSION"),
        "config_hash": config_hash(cfg),
        "space_hash": space_hash(cfg),
        "seed": cfg.numerics.seed,
        "config": cfg,
        "error_budgets": budgets,
        "result": result,
    })
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}

/// Writes a field as CSV: node coordinates x1..x_{n−1}, t and the value.
pub fn write_field_csv<W: std::io::Write>(grid: &Grid, field: &ScalarField, out: W) -> Result<()> {
    let n = grid.dim();
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (1..n).map(|k| format!("x{k}")).collect();
    header.push("t".into());
    header.push("value".into());
    w.write_record(&header)?;
    for i in 0..grid.len() {
        let mut row: Vec<String> = grid.coords(i).iter().map(|c| format!("{c:.16e}")).collect();
        row.push(format!("{:.16e}", field.values[i]));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn write_json(path: &Path, v: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(v)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Runs one command, writes its artifacts under `output.dir` and returns
/// the JSON report.
pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    cfg.validate()?;
    let dir = cfg.output.dir.clone();
    create_dir(&dir)?;
    let mut files = Vec::new();
    let mut warning = None;
    let name = cfg.command.name();
    let (budgets, result) = match cfg.command {
        Command::Constant => run_constant(cfg, &dir, &mut files)?,
        Command::VerifyTrace => run_verify_trace(cfg)?,
        Command::LiftCheck => run_lift(cfg)?,
        Command::Minimize => {
            let (b, r, converged) = run_minimize(cfg, &dir, &mut files)?;
            if !converged {
                warning = Some(Error::NonConvergence {
                    iterations: cfg.numerics.minimizer.max_iter,
                    residual: r["grad_norm"].as_f64().unwrap_or(f64::NAN),
                });
            }
            (b, r)
        }
        Command::Eigen => run_eigen(cfg, &dir, &mut files)?,
        Command::Blowup => run_blowup(cfg, &dir, &mut files)?,
        Command::Aubin => run_aubin(cfg, &dir, &mut files)?,
        Command::Report => run_report(cfg, &dir, &mut files)?,
    };
    let report = envelope(cfg, budgets, result);
    let path = dir.join(format!("{name}.json"));
    write_json(&path, &report)?;
    files.insert(0, path);
    Ok(Outcome {
        report,
        files,
        warning,
    })
}

type Body = (BTreeMap<&'static str, Budget>, Value);

fn run_constant(cfg: &RunConfig, dir: &Path, files: &mut Vec<PathBuf>) -> Result<Body> {
    let s = cfg.space()?;
    let hs = &cfg.numerics.halfspace;
    let mut quad = hs.quad(Layout::Axisymmetric);
    let mut rows = Vec::new();
    for _ in 0..hs.levels {
        rows.push(constant_row(s.m, s.n, &quad)?);
        quad = quad.refined();
    }
    let shrinking = rows.windows(2).all(|w| w[1].rel_error < w[0].rel_error);
    let path = dir.join("constant.csv");
    write_constant_csv(&rows, fs::File::create(&path)?)?;
    files.push(path);
    let last = rows.last().expect("at least one level");
    let mut budgets = BTreeMap::new();
    budgets.insert("lambda_mn", Budget::Exact);
    budgets.insert("quadrature", Budget::Bound(last.error_budget));
    let resolutions: Vec<usize> = (0..hs.levels).map(|l| hs.n_rho << l).collect();
    Ok((
        budgets,
        json!({
            "m": s.m,
            "n": s.n,
            "lambda_mn": last.lambda,
            "quadrature": last.estimate,
            "rel_gap": last.rel_error,
            "gap_shrinks": shrinking,
            "n_rho": resolutions,
            "levels": rows,
        }),
    ))
}

fn run_verify_trace(cfg: &RunConfig) -> Result<Body> {
    let s = cfg.space()?;
    let opts = &cfg.numerics.trace;
    let mut quad = cfg.numerics.halfspace.quad(Layout::Full3);
    quad.n_rho = opts.n_rho;
    quad.n_theta = opts.n_rho / 2;
    quad.n_phi = opts.n_rho;
    let r = trace_sharpness(s.m, &quad, opts.amplitude)?;
    let mut budgets = BTreeMap::new();
    budgets.insert("lambda", Budget::Exact);
    budgets.insert("bubble", Budget::Bound(r.bubble.error_budget));
    let worst = r.perturbed.iter().map(|p| p.budget).fold(0.0, f64::max);
    budgets.insert("margins", Budget::Bound(worst));
    let all_above = r.perturbed.iter().all(|p| p.margin > 3.0 * p.budget);
    let mut v = serde_json::to_value(&r)?;
    v["all_above_three_budgets"] = json!(all_above);
    Ok((budgets, v))
}

fn run_lift(cfg: &RunConfig) -> Result<Body> {
    let s = cfg.space()?;
    let m = s.m as usize;
    let hs = &cfg.numerics.halfspace;
    let lift = &cfg.numerics.lift;
    let b = bubble(BubbleParams::epsilon(s.m, s.n, 1.0))?;
    let mut quad = hs.quad(Layout::Axisymmetric);
    let mut n_eta = lift.n_eta;
    let mut checks = Vec::new();
    for _ in 0..hs.levels.max(2) {
        let sample = quad.sample(s.n, |p| b.eval(p))?;
        checks.push(lift_check(&sample, m, lift.tau, n_eta)?);
        quad = quad.refined();
        n_eta *= 2;
    }
    let orders: Vec<Value> = checks
        .windows(2)
        .map(|w| {
            json!({
                "boundary": (w[0].boundary_residual / w[1].boundary_residual).log2(),
                "gradient": (w[0].gradient_residual / w[1].gradient_residual).log2(),
            })
        })
        .collect();
    let first = &checks[0];
    let mut budgets = BTreeMap::new();
    budgets.insert("boundary_coefficient", Budget::Exact);
    budgets.insert("boundary_lhs", Budget::Bound((first.boundary_lhs - first.boundary_rhs).abs()));
    budgets.insert("gradient_lhs", Budget::Bound((first.gradient_lhs - first.gradient_rhs).abs()));
    Ok((
        budgets,
        json!({ "m": m, "n": s.n, "tau": lift.tau, "levels": checks, "orders": orders }),
    ))
}

fn minimizer_cfg(cfg: &RunConfig) -> MinimizerConfig {
    let mut m = cfg.numerics.minimizer.clone();
    m.seed = cfg.numerics.seed;
    m
}

fn run_minimize(cfg: &RunConfig, dir: &Path, files: &mut Vec<PathBuf>) -> Result<(BTreeMap<&'static str, Budget>, Value, bool)> {
    let spec = cfg.space()?;
    let space = spec.build()?;
    let mcfg = minimizer_cfg(cfg);
    let r = minimize_quotient(&space, &mcfg)?;
    let lb = lower_bound_check(&space, std::slice::from_ref(&r.field), mcfg.energy_floor)?;
    let trace_path = dir.join("minimize_trace.csv");
    write_trace_csv(&r.trace, fs::File::create(&trace_path)?)?;
    let field_path = dir.join("minimize_field.csv");
    write_field_csv(space.grid(), &r.field, fs::File::create(&field_path)?)?;
    files.push(trace_path);
    files.push(field_path);
    let h = space.grid().max_spacing();
    let mut budgets = BTreeMap::new();
    // stationarity only; the discretization error needs a second grid
    budgets.insert("lambda_estimate", Budget::Bound(r.grad_norm * r.breakdown.energy().abs().max(1.0)));
    budgets.insert("el", Budget::Bound(mcfg.tol));
    budgets.insert("discretization_scale_h2", Budget::Bound(h * h));
    let mut v = serde_json::to_value(&r)?;
    v["lower_bound"] = serde_json::to_value(lb)?;
    v["grid_spacing"] = json!(h);
    if spec.m > 0.0 || spec.n >= 3 {
        v["lambda_mn"] = json!(lambda_mn(spec.m, spec.n)?);
    }
    Ok((budgets, v, r.converged))
}

fn run_eigen(cfg: &RunConfig, dir: &Path, files: &mut Vec<PathBuf>) -> Result<Body> {
    let space = cfg.space()?.build()?;
    let e = dirichlet_rho1(&space, cfg.numerics.eigen_tol)?;
    let path = dir.join("eigen_field.csv");
    write_field_csv(space.grid(), &e.field, fs::File::create(&path)?)?;
    files.push(path);
    let mut budgets = BTreeMap::new();
    budgets.insert("rho1", Budget::Bound(e.band));
    budgets.insert("rayleigh", Budget::Bound((e.rayleigh - e.rho1).abs()));
    let mut v = serde_json::to_value(&e)?;
    v["indeterminate"] = json!(e.is_indeterminate());
    v["sign"] = json!(if e.is_indeterminate() {
        "indeterminate"
    } else if e.rho1 > 0.0 {
        "positive"
    } else {
        "negative"
    });
    Ok((budgets, v))
}

fn run_blowup(cfg: &RunConfig, dir: &Path, files: &mut Vec<PathBuf>) -> Result<Body> {
    let space = cfg.space()?.build()?;
    let e = dirichlet_rho1(&space, cfg.numerics.eigen_tol)?;
    let scan = blowup_scan(&space, &e, &cfg.numerics.blowup.values())?;
    let path = dir.join("blowup.csv");
    let mut w = csv::Writer::from_writer(fs::File::create(&path)?);
    w.write_record(["t", "Q", "energy"])?;
    for p in &scan.points {
        w.write_record([format!("{:.16e}", p.t), format!("{:.16e}", p.q), format!("{:.16e}", p.energy)])?;
    }
    w.flush()?;
    files.push(path);
    let mut budgets = BTreeMap::new();
    budgets.insert("rho1", Budget::Bound(e.band));
    // Q(ψ_t) is evaluated, not approximated, on the grid
    budgets.insert("points", Budget::Bound(0.0));
    Ok((budgets, serde_json::to_value(&scan)?))
}

fn run_aubin(cfg: &RunConfig, dir: &Path, files: &mut Vec<PathBuf>) -> Result<Body> {
    let spec = cfg.space()?;
    let space: MeasureSpace = spec.build()?;
    let a = &cfg.numerics.aubin;
    let point = a.point.clone().unwrap_or_else(|| {
        (0..spec.n - 1).map(|k| 0.5 * space.grid().length(k)).collect()
    });
    let scan = aubin_scan(&space, &point, &a.taus(), a.eps)?;
    let slope = annulus_exponent_fit(spec.m, spec.n, a.eps, &a.fit_tau)?;
    let predicted = annulus_exponent_predicted(spec.m, spec.n);
    let path = dir.join("aubin.csv");
    let mut w = csv::Writer::from_writer(fs::File::create(&path)?);
    w.write_record(["tau", "Q", "ratio", "tau_tilde", "W", "volume_gap", "annulus_gradient"])?;
    for r in &scan.rows {
        w.write_record(
            [r.tau, r.q, r.ratio, r.tau_tilde, r.w_value, r.volume_gap, r.annulus_gradient].map(|v| format!("{v:.16e}")),
        )?;
    }
    w.flush()?;
    files.push(path);
    let h = space.grid().max_spacing();
    let mut budgets = BTreeMap::new();
    budgets.insert("lambda_mn", Budget::Exact);
    budgets.insert("v", Budget::Exact);
    budgets.insert("discretization_scale_h2", Budget::Bound(h * h));
    budgets.insert("annulus_gradient", Budget::Bound(1e-10));
    let mut v = serde_json::to_value(&scan)?;
    v["annulus_exponent"] = json!({ "fit": slope, "predicted": predicted, "fit_tau": a.fit_tau });
    Ok((budgets, v))
}

#[derive(Debug, Default, Clone, Serialize)]
struct ReportRow {
    m: f64,
    n: usize,
    lambda_mn: Option<f64>,
    lambda_space: Option<f64>,
    rho1: Option<f64>,
    space_hash: String,
}

fn run_report(cfg: &RunConfig, dir: &Path, files: &mut Vec<PathBuf>) -> Result<Body> {
    let inputs = cfg.output.inputs.clone().unwrap_or_else(|| dir.to_path_buf());
    let mut paths: Vec<PathBuf> = fs::read_dir(&inputs)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    let mut rows: BTreeMap<String, ReportRow> = BTreeMap::new();
    let mut used = Vec::new();
    for p in &paths {
        let Ok(v) = serde_json::from_str::<Value>(&fs::read_to_string(p)?) else {
            continue;
        };
        let (Some(cmd), Some(hash)) = (v["command"].as_str(), v["space_hash"].as_str()) else {
            continue;
        };
        let (Some(m), Some(n)) = (v["config"]["space"]["m"].as_f64(), v["config"]["space"]["n"].as_u64()) else {
            continue;
        };
        let value = match cmd {
            "minimize" => v["result"]["lambda_estimate"].as_f64(),
            "eigen" => v["result"]["rho1"].as_f64(),
            "constant" => v["result"]["lambda_mn"].as_f64(),
            _ => continue,
        };
        let row = rows.entry(hash.to_string()).or_insert_with(|| ReportRow {
            m,
            n: n as usize,
            space_hash: hash.to_string(),
            ..Default::default()
        });
        match cmd {
            "minimize" => row.lambda_space = value,
            "eigen" => row.rho1 = value,
            _ => {}
        }
        used.push(p.display().to_string());
    }
    let mut rows: Vec<ReportRow> = rows.into_values().collect();
    for r in &mut rows {
        r.lambda_mn = lambda_mn(r.m, r.n).ok();
    }
    rows.sort_by(|a, b| {
        a.m.total_cmp(&b.m)
            .then(a.n.cmp(&b.n))
            .then(a.space_hash.cmp(&b.space_hash))
    });
    let path = dir.join("report.csv");
    let mut w = csv::Writer::from_writer(fs::File::create(&path)?);
    w.write_record(["m", "n", "lambda_mn", "lambda_space", "rho1", "space_hash"])?;
    let fmt = |v: Option<f64>| v.map(|x| format!("{x:.16e}")).unwrap_or_default();
    for r in &rows {
        w.write_record([
            format!("{:.16e}", r.m),
            r.n.to_string(),
            fmt(r.lambda_mn),
            fmt(r.lambda_space),
            fmt(r.rho1),
            r.space_hash.clone(),
        ])?;
    }
    w.flush()?;
    files.push(path);
    let mut budgets = BTreeMap::new();
    budgets.insert("lambda_mn", Budget::Exact);
    Ok((budgets, json!({ "inputs": used, "rows": rows })))
}
