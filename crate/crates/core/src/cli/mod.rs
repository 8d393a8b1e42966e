//! Command-line front end: config files, overrides, dispatch and reports.
//!
//! A run is described by a TOML document (see `examples/configs/`). Flags
//! and `--set key=value` pairs are layered over the file, in that order,
//! before validation.

pub mod config;
pub mod expr;
mod run;

use std::path::PathBuf;

use clap::Parser;
use serde_json::json;

pub use config::{
    config_from_table, parse_config, parse_table, set_override, set_value, AubinOptions, BlowupOptions, Command,
    HalfspaceOptions, LiftOptions, Numerics, OutputSpec, RunConfig, SpaceSpec, TraceOptions,
};
pub use expr::{Expr, ExprError};
pub use run::{config_hash, run, write_field_csv, Budget, Outcome};

use crate::error::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "escobar", version, about = "Weighted Escobar quotients: constants, scans and minimization")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// TOML run description.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override any config key, e.g. `--set numerics.halfspace.n_rho=128`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    #[arg(long)]
    pub m: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Nodes per axis, comma separated, t last.
    #[arg(long, value_delimiter = ',')]
    pub nodes: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub lengths: Option<Vec<f64>>,
    /// Potential φ as an expression in x1.., t.
    #[arg(long, allow_hyphen_values = true)]
    pub phi: Option<String>,
    /// Conformal factor σ, same syntax as φ.
    #[arg(long, allow_hyphen_values = true)]
    pub sigma: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Directory of JSON results read by `report`.
    #[arg(long)]
    pub inputs: Option<PathBuf>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long)]
    pub n_rho: Option<usize>,
    #[arg(long)]
    pub levels: Option<usize>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub amplitude: Option<f64>,
}

fn int(v: usize) -> toml::Value {
    toml::Value::Integer(v as i64)
}

fn float_list(v: &[f64]) -> toml::Value {
    toml::Value::Array(v.iter().map(|x| toml::Value::Float(*x)).collect())
}

fn path_value(p: &std::path::Path) -> toml::Value {
    toml::Value::String(p.display().to_string())
}

impl Cli {
    /// File, then named flags, then `--set` pairs.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut table = match &self.config {
            Some(path) => parse_table(&std::fs::read_to_string(path)?)?,
            None => toml::Table::new(),
        };
        set_value(&mut table, "command", toml::Value::String(self.command.name().into()))?;
        let mut typed: Vec<(&str, toml::Value)> = Vec::new();
        if let Some(v) = self.m {
            typed.push(("space.m", toml::Value::Float(v)));
        }
        if let Some(v) = self.n {
            typed.push(("space.n", int(v)));
        }
        if let Some(v) = &self.nodes {
            typed.push(("space.nodes", toml::Value::Array(v.iter().map(|x| int(*x)).collect())));
        }
        if let Some(v) = &self.lengths {
            typed.push(("space.lengths", float_list(v)));
        }
        if let Some(v) = &self.phi {
            typed.push(("space.phi", toml::Value::String(v.clone())));
        }
        if let Some(v) = &self.sigma {
            typed.push(("space.sigma", toml::Value::String(v.clone())));
        }
        if let Some(v) = self.seed {
            typed.push(("numerics.seed", toml::Value::Integer(v as i64)));
        }
        if let Some(v) = &self.out {
            typed.push(("output.dir", path_value(v)));
        }
        if let Some(v) = &self.inputs {
            typed.push(("output.inputs", path_value(v)));
        }
        if let Some(v) = self.tol {
            typed.push(("numerics.minimizer.tol", toml::Value::Float(v)));
        }
        if let Some(v) = self.max_iter {
            typed.push(("numerics.minimizer.max_iter", int(v)));
        }
        if let Some(v) = self.restarts {
            typed.push(("numerics.minimizer.restarts", int(v)));
        }
        if let Some(v) = self.radius {
            typed.push(("numerics.halfspace.radius", toml::Value::Float(v)));
        }
        if let Some(v) = self.n_rho {
            typed.push(("numerics.halfspace.n_rho", int(v)));
        }
        if let Some(v) = self.levels {
            typed.push(("numerics.halfspace.levels", int(v)));
        }
        if let Some(v) = self.eps {
            typed.push(("numerics.aubin.eps", toml::Value::Float(v)));
        }
        if let Some(v) = self.amplitude {
            typed.push(("numerics.trace.amplitude", toml::Value::Float(v)));
        }
        for (path, value) in typed {
            set_value(&mut table, path, value)?;
        }
        for pair in &self.overrides {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| Error::config("--set", format!("expected KEY=VALUE, got `{pair}`")))?;
            set_override(&mut table, k.trim(), v.trim())?;
        }
        config_from_table(table)
    }
}

fn error_record(e: &Error) -> serde_json::Value {
    let mut v = json!({
        "error": e.kind(),
        "message": e.to_string(),
        "exit_code": e.exit_code(),
    });
    if let Error::Parse { line, column, .. } = e {
        v["line"] = json!(line);
        v["column"] = json!(column);
    }
    v
}

/// Parses `args`, runs the command and returns the process exit code.
/// The report goes to stdout, error records to stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let outcome = cli.resolve().and_then(|cfg| run(&cfg));
    match outcome {
        Ok(o) => {
            println!("{}", serde_json::to_string_pretty(&o.report).expect("report serializes"));
            match o.warning {
                Some(w) => {
                    eprintln!("{}", error_record(&w));
                    w.exit_code()
                }
                None => 0,
            }
        }
        Err(e) => {
            eprintln!("{}", error_record(&e));
            e.exit_code()
        }
    }
}
