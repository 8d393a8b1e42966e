use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponents::Exponents;
use crate::functionals::{breakdown, escobar_quotient, QuotientBreakdown};
use crate::geometry::energy::{pow_abs, Form};
use crate::geometry::{MeasureSpace, ScalarField};
use crate::linalg::{dot, pcg};
use crate::minimizer::config::{MinimizerConfig, StepRule};
use crate::minimizer::eigen::dirichlet_rho1;

/// One row of a convergence trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow {
    pub iteration: usize,
    #[serde(rename = "Q")]
    pub value: f64,
    pub grad_norm: f64,
    pub step: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Objective {
    Quotient,
    W { tau: f64 },
}

/// Energy and norms of a base field and the objective value.
#[derive(Debug, Clone, Copy)]
struct Eval {
    value: f64,
    e: f64,
    i: f64,
    b: f64,
}

/// The discrete problem on the flat base: energy form, exponents and the
/// preconditioner P = K + M + M_∂.
pub(crate) struct Problem<'a> {
    form: &'a Form,
    ex: Exponents,
    objective: Objective,
    pdiag: Vec<f64>,
    pmass: Vec<f64>,
}

impl<'a> Problem<'a> {
    pub(crate) fn new(space: &'a MeasureSpace, objective: Objective) -> Self {
        let form = space.base_form();
        let len = space.grid().len();
        let pmass: Vec<f64> = form.mass.iter().zip(&form.bmass).map(|(a, b)| a + b).collect();
        let pdiag = form
            .stiffness_diag(len)
            .iter()
            .zip(&pmass)
            .map(|(k, m)| k + m)
            .collect();
        Problem {
            form,
            ex: space.exponents(),
            objective,
            pdiag,
            pmass,
        }
    }

    fn apply_p(&self, x: &[f64], out: &mut [f64]) {
        self.form.apply_stiffness(x, out);
        for ((o, m), v) in out.iter_mut().zip(&self.pmass).zip(x) {
            *o += m * v;
        }
    }

    /// P⁻¹ b.
    pub(crate) fn solve_p(&self, b: &[f64]) -> Result<Vec<f64>> {
        let mut x = vec![0.0; b.len()];
        let out = pcg(|v, o| self.apply_p(v, o), &self.pdiag, b, &mut x, 1e-11, 20 * b.len().max(100));
        if !out.converged {
            return Err(Error::LinearSolve {
                iterations: out.iterations,
                shift: 0.0,
                residual: out.residual,
            });
        }
        Ok(x)
    }

    /// √(φᵀPφ)
    pub(crate) fn p_norm(&self, x: &[f64]) -> f64 {
        let mut px = vec![0.0; x.len()];
        self.apply_p(x, &mut px);
        dot(x, &px).sqrt()
    }

    fn eval(&self, w: &[f64]) -> Eval {
        let e = self.form.energy(w).total();
        let (i, b) = self.form.norms(self.ex.p(), w);
        let value = match self.objective {
            Objective::Quotient => {
                let ia = if self.ex.m == 0.0 { 1.0 } else { i.powf(self.ex.a()) };
                e * ia / b.powf(self.ex.b())
            }
            Objective::W { tau } => tau.powf(0.5 * self.ex.a()) * e + i / tau.sqrt() - b,
        };
        Eval { value, e, i, b }
    }

    /// Gradient of the objective and of the boundary norm.
    fn gradient(&self, w: &[f64], ev: &Eval) -> (Vec<f64>, Vec<f64>) {
        let p = self.ex.p();
        let len = w.len();
        let mut aw = vec![0.0; len];
        self.form.apply(w, &mut aw);
        let dpow: Vec<f64> = w.iter().map(|&x| p * pow_abs(x, p - 1.0) * x.signum()).collect();
        let db: Vec<f64> = (0..len).map(|k| self.form.dens_b[k] * dpow[k]).collect();
        let g = match self.objective {
            Objective::Quotient => {
                let (a, b) = (self.ex.a(), self.ex.b());
                let ia = if self.ex.m == 0.0 { 1.0 } else { ev.i.powf(a) };
                let bb = ev.b.powf(-b);
                let ci = if self.ex.m == 0.0 { 0.0 } else { ev.e * a * ev.i.powf(a - 1.0) * bb };
                let cb = ev.e * b * ia * bb / ev.b;
                (0..len)
                    .map(|k| 2.0 * ia * bb * aw[k] + ci * self.form.dens_i[k] * dpow[k] - cb * db[k])
                    .collect()
            }
            Objective::W { tau } => {
                let ce = 2.0 * tau.powf(0.5 * self.ex.a());
                let ci = 1.0 / tau.sqrt();
                (0..len).map(|k| ce * aw[k] + ci * self.form.dens_i[k] * dpow[k]).collect()
            }
        };
        (g, db)
    }

    /// Scales `w` to unit boundary norm; fails on a vanishing trace.
    fn normalize(&self, w: &mut [f64]) -> bool {
        let (_, b) = self.form.norms(self.ex.p(), w);
        if !(b > 0.0 && b.is_finite()) {
            return false;
        }
        let s = b.powf(-1.0 / self.ex.p());
        w.iter_mut().for_each(|v| *v *= s);
        true
    }

    /// Descent direction, its slope gᵀd and the stationarity measure.
    fn direction(&self, g: &[f64], db: &[f64], ev: &Eval) -> Result<(Vec<f64>, f64, f64)> {
        let z = self.solve_p(g)?;
        match self.objective {
            Objective::Quotient => {
                let slope = -dot(g, &z);
                let ia = if self.ex.m == 0.0 { 1.0 } else { ev.i.powf(self.ex.a()) };
                let scale = 2.0 * ia * ev.b.powf(-self.ex.b()) * ev.e.abs().max(1.0);
                let d = z.iter().map(|v| -v).collect();
                Ok((d, slope, (-slope).max(0.0).sqrt() / scale))
            }
            Objective::W { tau } => {
                let zb = self.solve_p(db)?;
                let lambda = dot(db, &z) / dot(db, &zb);
                let d: Vec<f64> = z.iter().zip(&zb).map(|(a, b)| lambda * b - a).collect();
                let slope = dot(g, &d);
                let scale = 2.0 * tau.powf(0.5 * self.ex.a()) * ev.e.abs().max(1.0);
                Ok((d, slope, (-slope).max(0.0).sqrt() / scale))
            }
        }
    }
}

/// Outcome of one descent run from one initial field, in base coordinates.
#[derive(Debug, Clone)]
pub(crate) struct Run {
    pub field: Vec<f64>,
    pub value: f64,
    pub grad_norm: f64,
    pub converged: bool,
    pub iterations: usize,
    pub trace: Vec<TraceRow>,
}

fn guard(problem: &Problem, ev: &Eval, cfg: &MinimizerConfig) -> Result<()> {
    // energy of the boundary-normalized iterate
    let e_norm = ev.e * ev.b.powf(-2.0 / problem.ex.p());
    if e_norm < cfg.energy_floor {
        return Err(Error::UnboundedBelow(format!(
            "normalized energy {e_norm:.6e} fell below the floor {:.3e}",
            cfg.energy_floor
        )));
    }
    if problem.objective == Objective::Quotient && ev.value < -cfg.divergence_bound {
        return Err(Error::UnboundedBelow(format!(
            "quotient {:.6e} fell below −{:.3e}",
            ev.value, cfg.divergence_bound
        )));
    }
    Ok(())
}

/// Projected descent: step, clamp at 0, boundary-normalize.
pub(crate) fn descend(problem: &Problem, start: &[f64], cfg: &MinimizerConfig) -> Result<Run> {
    let mut w = start.to_vec();
    if cfg.clamp {
        w.iter_mut().for_each(|v| *v = v.max(0.0));
    }
    if !problem.normalize(&mut w) {
        return Err(Error::UndefinedQuotient("initial field has zero boundary trace".into()));
    }
    let projected = cfg.normalize || matches!(problem.objective, Objective::W { .. });
    let (armijo, mut alpha, growth) = match cfg.step {
        StepRule::Fixed { step } => (None, step, 1.0),
        StepRule::Backtracking { armijo, initial } => (Some(armijo), initial, 2.0),
    };
    let max_alpha = alpha * 1e6;
    let mut ev = problem.eval(&w);
    let mut trace = Vec::new();
    let mut last_step = 0.0;
    let mut converged = false;
    let mut grad_norm = f64::INFINITY;
    let mut iterations = 0;
    for it in 0..cfg.max_iter {
        guard(problem, &ev, cfg)?;
        let (g, db) = problem.gradient(&w, &ev);
        let (d, slope, gn) = problem.direction(&g, &db, &ev)?;
        grad_norm = gn;
        iterations = it;
        trace.push(TraceRow {
            iteration: it,
            value: ev.value,
            grad_norm: gn,
            step: last_step,
        });
        if gn <= cfg.tol {
            converged = true;
            break;
        }
        let mut trial_alpha = (alpha * growth).min(max_alpha);
        let mut accepted = None;
        for _ in 0..60 {
            let mut trial: Vec<f64> = w.iter().zip(&d).map(|(x, y)| x + trial_alpha * y).collect();
            if cfg.clamp {
                trial.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            let ok = !projected || problem.normalize(&mut trial);
            if ok {
                let tev = problem.eval(&trial);
                let good = match armijo {
                    None => tev.value.is_finite(),
                    Some(c) => tev.value.is_finite() && tev.value <= ev.value + c * trial_alpha * slope,
                };
                if good {
                    accepted = Some((trial, tev));
                    break;
                }
            }
            if armijo.is_none() {
                break;
            }
            trial_alpha *= 0.5;
        }
        match accepted {
            Some((trial, tev)) => {
                w = trial;
                ev = tev;
                alpha = trial_alpha;
                last_step = trial_alpha;
            }
            // no admissible decrease along the direction: stalled
            None => break,
        }
        iterations = it + 1;
    }
    if !converged && iterations == cfg.max_iter {
        let (g, db) = problem.gradient(&w, &ev);
        grad_norm = problem.direction(&g, &db, &ev)?.2;
        converged = grad_norm <= cfg.tol;
    }
    if !cfg.normalize {
        problem.normalize(&mut w);
        ev = problem.eval(&w);
    }
    guard(problem, &ev, cfg)?;
    Ok(Run {
        field: w,
        value: ev.value,
        grad_norm,
        converged,
        iterations,
        trace,
    })
}

/// Labelled initial fields in the coordinates of `space`: the constant 1,
/// 1 + φ₁/max φ₁ when the eigenfield is available, then seeded smooth
/// random fields.
pub fn initial_fields(space: &MeasureSpace, cfg: &MinimizerConfig) -> Vec<(String, ScalarField)> {
    let grid = space.grid();
    let mut out = vec![("constant".to_string(), ScalarField::constant(grid, 1.0))];
    if out.len() < cfg.restarts {
        if let Ok(eig) = dirichlet_rho1(space, 1e-8) {
            let top = eig.field.max_abs();
            if top > 0.0 {
                let values = eig.field.values.iter().map(|v| 1.0 + v / top).collect();
                out.push(("eigen_blend".to_string(), ScalarField::new(values)));
            }
        }
    }
    let mut k = 0u64;
    while out.len() < cfg.restarts {
        out.push((format!("random_{k}"), random_smooth_field(space, cfg.seed.wrapping_add(k))));
        k += 1;
    }
    out
}

/// 1 + ¼ Σ of four random low-frequency modes; stays in [0, 2].
pub fn random_smooth_field(space: &MeasureSpace, seed: u64) -> ScalarField {
    let grid = space.grid();
    let n = grid.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let modes: Vec<(f64, Vec<(f64, f64)>)> = (0..4)
        .map(|_| {
            let amp = rng.gen_range(-1.0..1.0);
            let axes = (0..n)
                .map(|_| (rng.gen_range(0..3) as f64, rng.gen_range(0.0..std::f64::consts::TAU)))
                .collect();
            (amp, axes)
        })
        .collect();
    let lengths: Vec<f64> = (0..n).map(|k| grid.length(k)).collect();
    ScalarField::from_fn(grid, |x| {
        let mut v = 1.0;
        for (amp, axes) in &modes {
            let mut term = *amp;
            for (k, &(freq, phase)) in axes.iter().enumerate() {
                term *= (std::f64::consts::TAU * freq * x[k] / lengths[k] + phase).cos();
            }
            v += 0.25 * term;
        }
        v
    })
}

/// Summary of one restart.
#[derive(Debug, Clone, Serialize)]
pub struct StartSummary {
    pub label: String,
    #[serde(rename = "Q")]
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Weak-form Euler–Lagrange residuals and the constants of the equations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ElReport {
    /// max over interior bump test fields of |⟨r, φ⟩| / (‖φ‖_P max(1, |E|))
    pub interior: f64,
    /// same over bumps touching the boundary
    pub boundary: f64,
    pub c1: f64,
    pub c2: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MinimizerResult {
    #[serde(skip)]
    pub field: ScalarField,
    /// Q(w*) recomputed with the quotient routine.
    pub lambda_estimate: f64,
    pub breakdown: QuotientBreakdown,
    pub el: ElReport,
    pub grad_norm: f64,
    pub converged: bool,
    pub iterations: usize,
    pub best_start: String,
    /// Q of the normalized constant field.
    pub constant_q: f64,
    pub starts: Vec<StartSummary>,
    #[serde(skip)]
    pub trace: Vec<TraceRow>,
}

fn run_all(problem: &Problem, space: &MeasureSpace, cfg: &MinimizerConfig) -> Result<Vec<(String, Run)>> {
    let starts = initial_fields(space, cfg);
    let runs: Vec<Result<Run>> = starts
        .par_iter()
        .map(|(_, f)| descend(problem, &space.to_base(&f.values), cfg))
        .collect();
    let mut ok = Vec::new();
    let mut first_err = None;
    for ((label, _), r) in starts.into_iter().zip(runs) {
        match r {
            Ok(run) => ok.push((label, run)),
            Err(e @ Error::UnboundedBelow(_)) => return Err(e),
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    if ok.is_empty() {
        return Err(first_err.unwrap_or_else(|| Error::Precondition("no initial fields".into())));
    }
    Ok(ok)
}

fn best(runs: &[(String, Run)]) -> usize {
    // ties broken by start order, so the merge does not depend on scheduling
    let mut idx = 0;
    for (k, (_, r)) in runs.iter().enumerate() {
        if r.value < runs[idx].1.value {
            idx = k;
        }
    }
    idx
}

fn from_base(space: &MeasureSpace, base: &[f64]) -> ScalarField {
    let s = space.base_scale();
    ScalarField::new(base.iter().zip(&s).map(|(v, s)| v / s).collect())
}

/// Projected descent on Q over nonnegative boundary-normalized fields,
/// from every initial field of [`initial_fields`]; returns the best run.
pub fn minimize_quotient(space: &MeasureSpace, cfg: &MinimizerConfig) -> Result<MinimizerResult> {
    cfg.validate()?;
    let problem = Problem::new(space, Objective::Quotient);
    let runs = run_all(&problem, space, cfg)?;
    let k = best(&runs);
    let (label, run) = &runs[k];
    let field = from_base(space, &run.field);
    let bd = escobar_quotient(space, &field)?;
    let el = el_residual(space, &field, bd.q)?;
    let constant_q = escobar_quotient(space, &ScalarField::constant(space.grid(), 1.0))?.q;
    let starts = runs
        .iter()
        .map(|(l, r)| StartSummary {
            label: l.clone(),
            value: r.value,
            converged: r.converged,
            iterations: r.iterations,
        })
        .collect();
    Ok(MinimizerResult {
        field,
        lambda_estimate: bd.q,
        breakdown: bd,
        el,
        grad_norm: run.grad_norm,
        converged: run.converged,
        iterations: run.iterations,
        best_start: label.clone(),
        constant_q,
        starts,
        trace: run.trace.clone(),
    })
}

/// Best W(·, τ) over nonnegative boundary-normalized fields.
#[derive(Debug, Clone, Serialize)]
pub struct WMinimum {
    pub tau: f64,
    pub value: f64,
    pub grad_norm: f64,
    pub converged: bool,
    pub iterations: usize,
    pub best_start: String,
    #[serde(skip)]
    pub field: ScalarField,
    #[serde(skip)]
    pub trace: Vec<TraceRow>,
}

pub fn minimize_w(space: &MeasureSpace, tau: f64, cfg: &MinimizerConfig) -> Result<WMinimum> {
    cfg.validate()?;
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::Precondition(format!("τ must be positive and finite, got {tau}")));
    }
    let problem = Problem::new(space, Objective::W { tau });
    let runs = run_all(&problem, space, cfg)?;
    let k = best(&runs);
    let (label, run) = &runs[k];
    Ok(WMinimum {
        tau,
        value: run.value,
        grad_norm: run.grad_norm,
        converged: run.converged,
        iterations: run.iterations,
        best_start: label.clone(),
        field: from_base(space, &run.field),
        trace: run.trace.clone(),
    })
}

/// Sparse test fields: cos² tensor bumps. Interior bumps vanish on every
/// boundary face; boundary bumps are centered on the boundary faces.
pub(crate) fn bump_fields(space: &MeasureSpace) -> (Vec<Vec<(usize, f64)>>, Vec<Vec<(usize, f64)>>) {
    let grid = space.grid();
    let n = grid.dim();
    let lt = grid.length(n - 1);
    let lateral: Vec<Vec<f64>> = (0..n - 1)
        .map(|k| {
            let l = grid.length(k);
            (0..4).map(|j| (j as f64 + 0.5) * l / 4.0).collect()
        })
        .collect();
    let mut lateral_centers: Vec<Vec<f64>> = vec![vec![]];
    for axis in &lateral {
        lateral_centers = lateral_centers
            .iter()
            .flat_map(|c| {
                axis.iter().map(move |&x| {
                    let mut v = c.clone();
                    v.push(x);
                    v
                })
            })
            .collect();
    }
    let periodic: Vec<bool> = grid
        .topology()
        .iter()
        .map(|t| *t == crate::geometry::Topology::Periodic)
        .collect();
    let build = |center: &[f64], radii: &[f64]| -> Vec<(usize, f64)> {
        let mut out = Vec::new();
        let mut x = vec![0.0; n];
        for i in 0..grid.len() {
            grid.coords_into(i, &mut x);
            let mut v = 1.0;
            for k in 0..n {
                let mut d = x[k] - center[k];
                if k < n - 1 && periodic[k] {
                    let l = grid.length(k);
                    d -= l * (d / l).round();
                }
                let s = d / radii[k];
                if s.abs() >= 1.0 {
                    v = 0.0;
                    break;
                }
                v *= (0.5 * std::f64::consts::PI * s).cos().powi(2);
            }
            if v > 0.0 {
                out.push((i, v));
            }
        }
        out
    };
    let lat_radii: Vec<f64> = (0..n - 1).map(|k| grid.length(k) / 4.0).collect();
    let mut interior = Vec::new();
    let mut boundary = Vec::new();
    for c in &lateral_centers {
        for frac in [0.25, 0.5, 0.75] {
            let mut center = c.clone();
            center.push(frac * lt);
            let mut radii = lat_radii.clone();
            radii.push(0.9 * lt / 4.0);
            interior.push(build(&center, &radii));
        }
        let mut faces = vec![0.0];
        if grid.top_face() {
            faces.push(lt);
        }
        for tc in faces {
            let mut center = c.clone();
            center.push(tc);
            let mut radii = lat_radii.clone();
            radii.push(lt / 3.0);
            boundary.push(build(&center, &radii));
        }
    }
    (interior, boundary)
}

fn weak_residual(
    problem: &Problem,
    r: &[f64],
    tests: &[Vec<(usize, f64)>],
    len: usize,
    scale: f64,
) -> f64 {
    tests
        .iter()
        .filter(|t| !t.is_empty())
        .map(|t| {
            let mut phi = vec![0.0; len];
            let mut rt = 0.0;
            for &(i, v) in t {
                phi[i] = v;
                rt += r[i] * v;
            }
            rt.abs() / (problem.p_norm(&phi) * scale)
        })
        .fold(0.0, f64::max)
}

/// Weak residuals of
///   A w + c₁ w^{(m+n)/(m+n−2)} v^{−1} = 0 in M,  boundary part = c₂ w^{(m+n)/(m+n−2)},
/// with c₁ = mΛ/(m+n−2) I^{−(2m+n−1)/(m+n−1)} and
/// c₂ = (2m+n−2)Λ/(m+n−2) I^{−m/(m+n−1)}, tested against bump fields.
pub fn el_residual(space: &MeasureSpace, w: &ScalarField, lambda: f64) -> Result<ElReport> {
    space.check_field(w)?;
    let ex = space.exponents();
    let base = space.to_base(&w.values);
    let form = space.base_form();
    let bd = breakdown(form, ex, &base)?;
    let k = ex.k();
    let (m, nf) = (ex.m, ex.n as f64);
    let c1 = if m == 0.0 {
        0.0
    } else {
        m * lambda / k * bd.interior_norm.powf(-(2.0 * m + nf - 1.0) / (m + nf - 1.0))
    };
    let ia = if m == 0.0 { 1.0 } else { bd.interior_norm.powf(-ex.a()) };
    let c2 = (2.0 * m + nf - 2.0) * lambda / k * ia;
    let p = ex.p();
    let len = base.len();
    let mut r = vec![0.0; len];
    form.apply(&base, &mut r);
    for i in 0..len {
        let nl = pow_abs(base[i], p - 1.0) * base[i].signum();
        r[i] += (c1 * form.dens_i[i] - c2 * form.dens_b[i]) * nl;
    }
    let problem = Problem::new(space, Objective::Quotient);
    let (int_tests, bd_tests) = bump_fields(space);
    let scale = bd.energy().abs().max(1.0);
    Ok(ElReport {
        interior: weak_residual(&problem, &r, &int_tests, len, scale),
        boundary: weak_residual(&problem, &r, &bd_tests, len, scale),
        c1,
        c2,
    })
}

/// Weak residuals of the equations of a normalized critical point of W(·, τ):
///   τ^{m/(2(m+n−1))} A w + (p/2) τ^{−1/2} w^{p−1} v^{−1} = 0 in M,
///   boundary part = c₃ w^{p−1},  c₃ = W + 1 + τ^{−1/2} I/(m+n−2).
/// The report's `c1` holds (p/2) τ^{−1/2} and `c2` holds c₃.
pub fn w_el_residual(space: &MeasureSpace, w: &ScalarField, tau: f64) -> Result<ElReport> {
    space.check_field(w)?;
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::Precondition(format!("τ must be positive and finite, got {tau}")));
    }
    let ex = space.exponents();
    let base = space.to_base(&w.values);
    let form = space.base_form();
    let parts = form.energy(&base);
    let p = ex.p();
    let (int, bd) = form.norms(p, &base);
    let lead = tau.powf(0.5 * ex.a());
    let wv = lead * parts.total() + int / tau.sqrt() - bd;
    let c1 = 0.5 * p / tau.sqrt();
    let c3 = wv + 1.0 + int / tau.sqrt() / ex.k();
    let len = base.len();
    let mut r = vec![0.0; len];
    form.apply(&base, &mut r);
    for i in 0..len {
        let nl = pow_abs(base[i], p - 1.0) * base[i].signum();
        r[i] = lead * r[i] + (c1 * form.dens_i[i] - c3 * form.dens_b[i]) * nl;
    }
    let problem = Problem::new(space, Objective::W { tau });
    let (int_tests, bd_tests) = bump_fields(space);
    let scale = lead * parts.total().abs().max(1.0);
    Ok(ElReport {
        interior: weak_residual(&problem, &r, &int_tests, len, scale),
        boundary: weak_residual(&problem, &r, &bd_tests, len, scale),
        c1,
        c2: c3,
    })
}

/// Smallest normalized energy over a list of fields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LowerBound {
    pub min_energy: f64,
    pub argmin: usize,
    pub floor: f64,
}

/// Minimum of E(w/Bd^{1/p}) over `fields`; errors when it is below `floor`.
pub fn lower_bound_check(space: &MeasureSpace, fields: &[ScalarField], floor: f64) -> Result<LowerBound> {
    if fields.is_empty() {
        return Err(Error::Precondition("lower bound check needs at least one field".into()));
    }
    let ex = space.exponents();
    let form = space.base_form();
    let mut out = LowerBound {
        min_energy: f64::INFINITY,
        argmin: 0,
        floor,
    };
    for (k, f) in fields.iter().enumerate() {
        space.check_field(f)?;
        let base = space.to_base(&f.values);
        let (_, bd) = form.norms(ex.p(), &base);
        if !(bd > 0.0) {
            return Err(Error::UndefinedQuotient(format!("field {k} has zero boundary trace")));
        }
        let e = form.energy(&base).total() * bd.powf(-2.0 / ex.p());
        if e < out.min_energy {
            out.min_energy = e;
            out.argmin = k;
        }
    }
    if out.min_energy < floor {
        return Err(Error::UnboundedBelow(format!(
            "normalized energy {:.6e} of field {} is below the floor {floor:.3e}",
            out.min_energy, out.argmin
        )));
    }
    Ok(out)
}
