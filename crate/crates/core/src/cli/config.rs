use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::cli::expr::Expr;
use crate::error::{Error, Result};
use crate::exponents::Exponents;
use crate::geometry::{build_space, Grid, MeasureSpace, ScalarField, Topology};
use crate::minimizer::{geomspace, MinimizerConfig};
use crate::sharp_constants::{HalfspaceQuad, Layout};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Constant,
    VerifyTrace,
    LiftCheck,
    Minimize,
    Eigen,
    Blowup,
    Aubin,
    Report,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Constant => "constant",
            Command::VerifyTrace => "verify-trace",
            Command::LiftCheck => "lift-check",
            Command::Minimize => "minimize",
            Command::Eigen => "eigen",
            Command::Blowup => "blowup",
            Command::Aubin => "aubin",
            Command::Report => "report",
        }
    }

    fn needs_grid(self) -> bool {
        matches!(self, Command::Minimize | Command::Eigen | Command::Blowup | Command::Aubin)
    }
}

fn default_true() -> bool {
    true
}

fn default_zero_expr() -> String {
    "0".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSpec {
    pub m: f64,
    pub n: usize,
    #[serde(default)]
    pub nodes: Option<Vec<usize>>,
    #[serde(default)]
    pub lengths: Option<Vec<f64>>,
    /// Topology of the lateral axes; periodic when omitted.
    #[serde(default)]
    pub lateral: Option<Vec<Topology>>,
    #[serde(default = "default_true")]
    pub top_face: bool,
    #[serde(default = "default_zero_expr")]
    pub phi: String,
    #[serde(default = "default_zero_expr")]
    pub sigma: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HalfspaceOptions {
    pub radius: f64,
    pub n_rho: usize,
    /// Number of resolutions, each doubling the previous one.
    pub levels: usize,
    pub tail_order: usize,
    pub tail_tolerance: f64,
}

impl Default for HalfspaceOptions {
    fn default() -> Self {
        HalfspaceOptions {
            radius: 40.0,
            n_rho: 64,
            levels: 3,
            tail_order: 3,
            tail_tolerance: 1e-3,
        }
    }
}

impl HalfspaceOptions {
    pub fn quad(&self, layout: Layout) -> HalfspaceQuad {
        let mut q = match layout {
            Layout::Axisymmetric => HalfspaceQuad::new(self.radius, self.n_rho),
            Layout::Full3 => HalfspaceQuad::full3(self.radius, self.n_rho),
        };
        q.tail_order = self.tail_order;
        q.tail_tolerance = self.tail_tolerance;
        q
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TraceOptions {
    pub amplitude: f64,
    pub n_rho: usize,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions {
            amplitude: 0.1,
            n_rho: 128,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LiftOptions {
    pub tau: f64,
    pub n_eta: usize,
}

impl Default for LiftOptions {
    fn default() -> Self {
        LiftOptions { tau: 1.0, n_eta: 64 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BlowupOptions {
    /// Explicit t values; overrides the geometric range.
    pub t: Option<Vec<f64>>,
    pub t_min: f64,
    pub t_max: f64,
    pub count: usize,
}

impl Default for BlowupOptions {
    fn default() -> Self {
        BlowupOptions {
            t: None,
            t_min: 1.0,
            t_max: 1e4,
            count: 30,
        }
    }
}

impl BlowupOptions {
    pub fn values(&self) -> Vec<f64> {
        self.t.clone().unwrap_or_else(|| geomspace(self.t_min, self.t_max, self.count))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AubinOptions {
    /// Lateral coordinates of the boundary point; the slab center when omitted.
    pub point: Option<Vec<f64>>,
    pub eps: f64,
    pub tau: Option<Vec<f64>>,
    /// Slope fit of the annulus gradient over these τ.
    pub fit_tau: Vec<f64>,
}

impl Default for AubinOptions {
    fn default() -> Self {
        AubinOptions {
            point: None,
            eps: 0.25,
            tau: None,
            fit_tau: vec![1e-4, 1e-5, 1e-6],
        }
    }
}

impl AubinOptions {
    pub fn taus(&self) -> Vec<f64> {
        self.tau.clone().unwrap_or_else(|| geomspace(1e-2, 1e-3, 9))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Numerics {
    pub seed: u64,
    pub eigen_tol: f64,
    pub halfspace: HalfspaceOptions,
    pub trace: TraceOptions,
    pub lift: LiftOptions,
    pub minimizer: MinimizerConfig,
    pub blowup: BlowupOptions,
    pub aubin: AubinOptions,
}

impl Default for Numerics {
    fn default() -> Self {
        Numerics {
            seed: 0,
            eigen_tol: 1e-10,
            halfspace: HalfspaceOptions::default(),
            trace: TraceOptions::default(),
            lift: LiftOptions::default(),
            minimizer: MinimizerConfig::default(),
            blowup: BlowupOptions::default(),
            aubin: AubinOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    /// Directory for JSON reports and CSV tables.
    pub dir: PathBuf,
    /// Directory scanned by `report`; `dir` when omitted.
    pub inputs: Option<PathBuf>,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            dir: PathBuf::from("out"),
            inputs: None,
        }
    }
}

/// A fully validated run description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default)]
    pub space: Option<SpaceSpec>,
    #[serde(default)]
    pub numerics: Numerics,
    #[serde(default)]
    pub output: OutputSpec,
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

fn toml_error(text: &str, e: toml::de::Error) -> Error {
    let (line, column) = e.span().map_or((0, 0), |s| line_col(text, s.start));
    Error::Parse {
        line,
        column,
        message: e.message().to_string(),
    }
}

/// Parses a config document into a table without interpreting it.
pub fn parse_table(text: &str) -> Result<toml::Table> {
    text.parse::<toml::Table>().map_err(|e| toml_error(text, e))
}

/// Sets `path` (dot separated) to `raw`, read as a TOML value when it
/// parses as one and as a string otherwise.
pub fn set_override(table: &mut toml::Table, path: &str, raw: &str) -> Result<()> {
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    set_value(table, path, value)
}

/// Sets `path` (dot separated) to an already typed value.
pub fn set_value(table: &mut toml::Table, path: &str, value: toml::Value) -> Result<()> {
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(Error::config(path, "empty key in override path"));
    }
    let mut cur = table;
    for k in &keys[..keys.len() - 1] {
        let entry = cur
            .entry(k.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = match entry {
            toml::Value::Table(t) => t,
            _ => return Err(Error::config(path, format!("`{k}` is not a table"))),
        };
    }
    cur.insert(keys[keys.len() - 1].to_string(), value);
    Ok(())
}

/// Parses and validates a config document.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| toml_error(text, e))?;
    cfg.validate()?;
    Ok(cfg)
}

/// Validates an already assembled table (file plus overrides).
pub fn config_from_table(table: toml::Table) -> Result<RunConfig> {
    let text = toml::to_string(&table).map_err(|e| Error::config("", e.to_string()))?;
    parse_config(&text)
}

impl SpaceSpec {
    pub fn exponents(&self) -> Exponents {
        Exponents::new(self.m, self.n)
    }

    pub fn validate_dims(&self) -> Result<()> {
        if self.n < 3 {
            return Err(Error::config("space.n", format!("n must be at least 3, got {}", self.n)));
        }
        if !(self.m >= 0.0 && self.m.is_finite()) {
            return Err(Error::config("space.m", format!("m must be a finite number ≥ 0, got {}", self.m)));
        }
        Ok(())
    }

    /// Parsed φ and σ expressions.
    pub fn expressions(&self) -> Result<(Expr, Expr)> {
        let phi = Expr::parse(&self.phi, self.n).map_err(|e| Error::config("space.phi", e.to_string()))?;
        let sigma = Expr::parse(&self.sigma, self.n).map_err(|e| Error::config("space.sigma", e.to_string()))?;
        Ok((phi, sigma))
    }

    pub fn grid(&self) -> Result<Grid> {
        let nodes = self
            .nodes
            .as_ref()
            .ok_or_else(|| Error::config("space.nodes", "this command needs a grid"))?;
        let lengths = self.lengths.clone().unwrap_or_else(|| vec![1.0; self.n]);
        if nodes.len() != self.n {
            return Err(Error::config(
                "space.nodes",
                format!("expected {} entries, got {}", self.n, nodes.len()),
            ));
        }
        let lateral = self
            .lateral
            .clone()
            .unwrap_or_else(|| vec![Topology::Periodic; self.n - 1]);
        Grid::new(nodes, &lengths, &lateral, self.top_face)
    }

    pub fn build(&self) -> Result<MeasureSpace> {
        self.validate_dims()?;
        let (phi, sigma) = self.expressions()?;
        let grid = self.grid()?;
        let phi_field = ScalarField::from_fn(&grid, |x| phi.eval(x));
        let sigma_field = if sigma.is_zero_literal() {
            None
        } else {
            Some(ScalarField::from_fn(&grid, |x| sigma.eval(x)))
        };
        build_space(grid, self.m, phi_field, sigma_field)
    }
}

impl RunConfig {
    pub fn space(&self) -> Result<&SpaceSpec> {
        self.space
            .as_ref()
            .ok_or_else(|| Error::config("space", format!("`{}` needs a [space] section", self.command.name())))
    }

    pub fn validate(&self) -> Result<()> {
        let num = &self.numerics;
        num.minimizer.validate()?;
        if !(num.eigen_tol > 0.0) {
            return Err(Error::config("numerics.eigen_tol", "must be positive"));
        }
        let hs = &num.halfspace;
        if hs.levels == 0 {
            return Err(Error::config("numerics.halfspace.levels", "need at least one level"));
        }
        hs.quad(Layout::Axisymmetric)
            .validate(3)
            .map_err(|e| Error::config("numerics.halfspace", e.to_string()))?;
        if !(num.lift.tau > 0.0) || num.lift.n_eta < 16 {
            return Err(Error::config("numerics.lift", "τ must be positive and n_eta at least 16"));
        }
        let ts = num.blowup.values();
        if ts.len() < 3 || ts.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
            return Err(Error::config("numerics.blowup", "need at least 3 finite t ≥ 0"));
        }
        if self.command == Command::Report {
            return Ok(());
        }
        let space = self.space()?;
        space.validate_dims()?;
        space.expressions()?;
        if self.command.needs_grid() {
            space.grid()?;
        }
        if self.command == Command::LiftCheck && (space.m.fract() != 0.0 || space.m < 1.0) {
            return Err(Error::config("space.m", "lift-check needs an integer m ≥ 1"));
        }
        if self.command == Command::VerifyTrace && space.n != 3 {
            return Err(Error::config("space.n", "verify-trace perturbs on ℝ³₊; n must be 3"));
        }
        if self.command == Command::Aubin {
            let a = &num.aubin;
            if space.m <= 0.0 {
                return Err(Error::config("space.m", "aubin needs m > 0"));
            }
            if !(a.eps > 0.0) {
                return Err(Error::config("numerics.aubin.eps", "must be positive"));
            }
            let limit = space.exponents().bubble_c().sqrt() * 2.0 * a.eps;
            for (k, tau) in a.taus().iter().chain(&a.fit_tau).enumerate() {
                if !(*tau > 0.0) || tau.sqrt() > limit {
                    return Err(Error::config(
                        format!("numerics.aubin.tau[{k}]"),
                        format!("τ = {tau} violates 0 < √τ ≤ √c·2ε = {limit:.4e}"),
                    ));
                }
            }
            if let Some(p) = &a.point {
                if p.len() != space.n - 1 {
                    return Err(Error::config("numerics.aubin.point", format!("expected {} coordinates", space.n - 1)));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_constant_config() {
        let c = parse_config("command = \"constant\"\n[space]\nm = 1\nn = 3\n").unwrap();
        assert_eq!(c.command, Command::Constant);
        assert_eq!(c.space.unwrap().m, 1.0);
    }

    #[test]
    fn unknown_key_is_named() {
        let e = parse_config("command = \"constant\"\n[space]\nm = 1\nn = 3\nmetrick = 2\n").unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("metrick"), "{e}");
        match e {
            Error::Parse { line, .. } => assert_eq!(line, 5),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_expression_has_key_path() {
        let e = parse_config("command = \"eigen\"\n[space]\nm = 1\nn = 3\nnodes = [4,4,5]\nphi = \"t +\"\n").unwrap_err();
        match e {
            Error::Config { path, .. } => assert_eq!(path, "space.phi"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn overrides_replace_file_values() {
        let mut t = parse_table("command = \"minimize\"\n[space]\nm = 1\nn = 3\nnodes = [4,4,5]\n").unwrap();
        set_override(&mut t, "space.m", "0.5").unwrap();
        set_override(&mut t, "space.phi", "2*t").unwrap();
        set_override(&mut t, "numerics.minimizer.tol", "1e-8").unwrap();
        let c = config_from_table(t).unwrap();
        assert_eq!(c.space.as_ref().unwrap().m, 0.5);
        assert_eq!(c.space.as_ref().unwrap().phi, "2*t");
        assert_eq!(c.numerics.minimizer.tol, 1e-8);
    }

    #[test]
    fn tau_eps_constraint_is_a_config_error() {
        let text = "command = \"aubin\"\n[space]\nm = 1\nn = 3\nnodes = [8,8,8]\n[numerics.aubin]\neps = 0.1\ntau = [1.0]\n";
        let e = parse_config(text).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }
}
