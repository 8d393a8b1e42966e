use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::Exponents;
use crate::geometry::energy::pow_abs;
use crate::linalg::solve_dense;
use crate::special::sphere_volume;

/// Angular layout of the half-space grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layout {
    /// (ρ, θ) with θ measured from the inner normal; functions are assumed
    /// rotationally symmetric about the t-axis through the center.
    Axisymmetric,
    /// (ρ, θ, ϕ) for general functions on ℝ³₊.
    Full3,
}

/// Truncated polar quadrature on ℝ^n_+ with power-law tail corrections.
///
/// Radial nodes are ρ = R(e^{κs} − 1)/(e^κ − 1) on a uniform s-grid, which
/// concentrates resolution near the center. Integrands are continued past
/// R by fitting F(ρ)ρ^β = Σ_j a_j ρ^{−j} per ray and integrating exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfspaceQuad {
    pub radius: f64,
    pub n_rho: usize,
    pub n_theta: usize,
    /// Azimuthal nodes, only used by [`Layout::Full3`].
    pub n_phi: usize,
    pub tail_order: usize,
    pub stretch: f64,
    /// Largest admissible relative tail uncertainty.
    pub tail_tolerance: f64,
    pub layout: Layout,
}

impl HalfspaceQuad {
    pub fn new(radius: f64, n_rho: usize) -> Self {
        HalfspaceQuad {
            radius,
            n_rho,
            n_theta: n_rho / 2,
            n_phi: n_rho,
            tail_order: 3,
            stretch: 5.0,
            tail_tolerance: 1e-3,
            layout: Layout::Axisymmetric,
        }
    }

    pub fn full3(radius: f64, n_rho: usize) -> Self {
        HalfspaceQuad {
            layout: Layout::Full3,
            ..Self::new(radius, n_rho)
        }
    }

    /// Same quadrature with every resolution doubled.
    pub fn refined(&self) -> Self {
        HalfspaceQuad {
            n_rho: 2 * self.n_rho,
            n_theta: 2 * self.n_theta,
            n_phi: 2 * self.n_phi,
            ..self.clone()
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let even = |v: usize| v >= 16 && v.is_multiple_of(2);
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::Precondition(format!("truncation radius must be positive, got {}", self.radius)));
        }
        if !even(self.n_rho) || !even(self.n_theta) {
            return Err(Error::Precondition("radial and polar resolutions must be even and at least 16".into()));
        }
        if self.layout == Layout::Full3 && (!even(self.n_phi) || n != 3) {
            return Err(Error::Precondition(
                "the full layout needs n = 3 and an even azimuthal resolution of at least 16".into(),
            ));
        }
        if n < 3 {
            return Err(Error::Precondition(format!("n must be at least 3, got {n}")));
        }
        if !(self.stretch > 0.0) || !(self.tail_tolerance > 0.0) {
            return Err(Error::Precondition("stretch and tail tolerance must be positive".into()));
        }
        Ok(())
    }

    fn phi_nodes(&self) -> usize {
        match self.layout {
            Layout::Axisymmetric => 1,
            Layout::Full3 => self.n_phi,
        }
    }

    /// Samples `f` at every node; points are (x₁, …, x_{n−1}, t).
    pub fn sample<F: Fn(&[f64]) -> f64 + Sync>(&self, n: usize, f: F) -> Result<HalfspaceSample> {
        self.sample_centered(n, &vec![0.0; n.saturating_sub(1)], f)
    }

    /// Like [`HalfspaceQuad::sample`] with the polar origin at (x₀, 0).
    pub fn sample_centered<F: Fn(&[f64]) -> f64 + Sync>(&self, n: usize, center: &[f64], f: F) -> Result<HalfspaceSample> {
        self.validate(n)?;
        if center.len() != n - 1 {
            return Err(Error::Shape {
                expected: n - 1,
                found: center.len(),
            });
        }
        let rule = RadialRule::new(self.radius, self.n_rho, self.stretch);
        let nt = self.n_theta + 1;
        let np = self.phi_nodes();
        let hth = 0.5 * std::f64::consts::PI / self.n_theta as f64;
        let hph = 2.0 * std::f64::consts::PI / np as f64;
        let values: Vec<f64> = (0..rule.rho.len())
            .into_par_iter()
            .flat_map_iter(|i| {
                let rho = rule.rho[i];
                let mut out = Vec::with_capacity(nt * np);
                let mut p = center.to_vec();
                p.push(0.0);
                for j in 0..nt {
                    let th = j as f64 * hth;
                    let (r, t) = (rho * th.sin(), rho * th.cos());
                    for k in 0..np {
                        p[..n - 1].copy_from_slice(center);
                        let ph = k as f64 * hph;
                        match self.layout {
                            Layout::Axisymmetric => p[0] += r,
                            Layout::Full3 => {
                                p[0] += r * ph.cos();
                                p[1] += r * ph.sin();
                            }
                        }
                        p[n - 1] = t;
                        out.push(f(&p));
                    }
                }
                out
            })
            .collect();
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Precondition(format!("sampled field is not finite ({bad})")));
        }
        Ok(HalfspaceSample {
            quad: self.clone(),
            n,
            values,
        })
    }
}

/// Nodal values of a function on a [`HalfspaceQuad`] grid.
#[derive(Debug, Clone)]
pub struct HalfspaceSample {
    quad: HalfspaceQuad,
    n: usize,
    values: Vec<f64>,
}

impl HalfspaceSample {
    pub fn quad(&self) -> &HalfspaceQuad {
        &self.quad
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Dimensions (ρ, θ, ϕ) of the grid at the given stride.
    pub(crate) fn dims(&self, stride: usize) -> (usize, usize, usize) {
        let np = self.quad.phi_nodes();
        (
            self.quad.n_rho / stride + 1,
            self.quad.n_theta / stride + 1,
            if np == 1 { 1 } else { np / stride },
        )
    }

    /// Values restricted to every `stride`-th node along each axis.
    pub(crate) fn level(&self, stride: usize) -> Vec<f64> {
        if stride == 1 {
            return self.values.clone();
        }
        let (_, nt, np) = self.dims(1);
        let (lr, lt, lp) = self.dims(stride);
        let pstride = if np == 1 { 1 } else { stride };
        let mut out = Vec::with_capacity(lr * lt * lp);
        for i in 0..lr {
            for j in 0..lt {
                for k in 0..lp {
                    out.push(self.values[((i * stride) * nt + j * stride) * np + k * pstride]);
                }
            }
        }
        out
    }
}

/// Uniform-in-s radial rule with the exponential stretch.
#[derive(Debug, Clone)]
pub(crate) struct RadialRule {
    pub rho: Vec<f64>,
    pub drho: Vec<f64>,
    pub hs: f64,
}

impl RadialRule {
    pub fn new(radius: f64, cells: usize, stretch: f64) -> Self {
        let hs = 1.0 / cells as f64;
        let denom = stretch.exp_m1();
        let rho = (0..=cells)
            .map(|i| radius * (stretch * i as f64 * hs).exp_m1() / denom)
            .collect();
        let drho = (0..=cells)
            .map(|i| radius * stretch * (stretch * i as f64 * hs).exp() / denom)
            .collect();
        RadialRule { rho, drho, hs }
    }

    pub fn radius(&self) -> f64 {
        *self.rho.last().unwrap()
    }

    /// Trapezoid over [0, R] of F dρ plus the fitted tail over [R, ∞).
    /// `f` already contains the radial measure.
    pub fn integrate(&self, f: &[f64], beta: f64, order: usize) -> f64 {
        let last = f.len() - 1;
        let mut body = 0.0;
        for i in 0..=last {
            let w = if i == 0 || i == last { 0.5 } else { 1.0 };
            body += w * f[i] * self.drho[i];
        }
        body * self.hs + self.tail(f, beta, order)
    }

    pub fn tail(&self, f: &[f64], beta: f64, order: usize) -> f64 {
        if order == 0 {
            return 0.0;
        }
        let r = self.radius();
        let mut idx = Vec::with_capacity(order);
        for k in 0..order {
            let target = r / 2f64.powi(k as i32);
            let i = self
                .rho
                .iter()
                .enumerate()
                .min_by(|a, b| (a.1 - target).abs().total_cmp(&(b.1 - target).abs()))
                .map(|(i, _)| i)
                .unwrap();
            idx.push(i);
        }
        let a: Vec<Vec<f64>> = idx
            .iter()
            .map(|&i| (0..order).map(|j| self.rho[i].powi(-(j as i32))).collect())
            .collect();
        let b: Vec<f64> = idx.iter().map(|&i| f[i] * self.rho[i].powf(beta)).collect();
        match solve_dense(a, b) {
            Some(c) => c
                .iter()
                .enumerate()
                .map(|(j, cj)| cj * r.powf(1.0 - beta - j as f64) / (beta + j as f64 - 1.0))
                .sum(),
            None => 0.0,
        }
    }
}

/// Derivative along a uniformly spaced line; second order everywhere.
pub(crate) fn diff_line(f: &[f64], h: f64, periodic: bool) -> Vec<f64> {
    let n = f.len();
    let mut d = vec![0.0; n];
    if periodic {
        for i in 0..n {
            d[i] = (f[(i + 1) % n] - f[(i + n - 1) % n]) / (2.0 * h);
        }
        return d;
    }
    for i in 1..n - 1 {
        d[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
    }
    d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
    d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
    d
}

/// Per-ray integrands of the three quotient integrals on one grid level.
pub(crate) struct Rays {
    pub rule: RadialRule,
    /// Angular weight and the (|∇w|², |w|^p) integrands, one entry per ray.
    pub interior: Vec<(f64, Vec<f64>, Vec<f64>)>,
    pub boundary: Vec<(f64, Vec<f64>)>,
}

/// Integrals of |∇w|², |w|^p over ℝ^n_+ and |w|^p over ∂ℝ^n_+.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Parts {
    pub dirichlet: f64,
    pub interior: f64,
    pub boundary: f64,
}

pub(crate) fn rays(sample: &HalfspaceSample, p: f64, stride: usize) -> Rays {
    let q = &sample.quad;
    let n = sample.n;
    let (nr, nt, np) = sample.dims(stride);
    let v = sample.level(stride);
    let rule = RadialRule::new(q.radius, nr - 1, q.stretch);
    let hth = 0.5 * std::f64::consts::PI / (nt - 1) as f64;
    let hph = 2.0 * std::f64::consts::PI / np as f64;
    let at = |i: usize, j: usize, k: usize| v[(i * nt + j) * np + k];
    let full = q.layout == Layout::Full3;
    let sphere = sphere_volume(n as f64 - 2.0);

    // angular derivatives, computed line by line
    let mut dth = vec![0.0; v.len()];
    let mut dph = vec![0.0; v.len()];
    for i in 0..nr {
        for k in 0..np {
            let line: Vec<f64> = (0..nt).map(|j| at(i, j, k)).collect();
            for (j, d) in diff_line(&line, hth, false).into_iter().enumerate() {
                dth[(i * nt + j) * np + k] = d;
            }
        }
        if full {
            for j in 0..nt {
                let line: Vec<f64> = (0..np).map(|k| at(i, j, k)).collect();
                for (k, d) in diff_line(&line, hph, true).into_iter().enumerate() {
                    dph[(i * nt + j) * np + k] = d;
                }
            }
        }
    }

    let interior: Vec<(f64, Vec<f64>, Vec<f64>)> = (0..nt * np)
        .into_par_iter()
        .map(|jk| {
            let (j, k) = (jk / np, jk % np);
            let th = j as f64 * hth;
            let line: Vec<f64> = (0..nr).map(|i| at(i, j, k)).collect();
            let ds = diff_line(&line, rule.hs, false);
            let mut grad = Vec::with_capacity(nr);
            let mut powv = Vec::with_capacity(nr);
            let sin = th.sin();
            for i in 0..nr {
                let rho = rule.rho[i];
                let idx = (i * nt + j) * np + k;
                let wr = ds[i] / rule.drho[i];
                let mut g2 = wr * wr;
                if rho > 0.0 {
                    let wt = dth[idx] / rho;
                    g2 += wt * wt;
                    if full && sin > 1e-14 {
                        let wp = dph[idx] / (rho * sin);
                        g2 += wp * wp;
                    }
                }
                let meas = if full {
                    rho * rho * sin
                } else {
                    sphere * rho.powi(n as i32 - 1) * sin.powi(n as i32 - 2)
                };
                grad.push(g2 * meas);
                powv.push(pow_abs(line[i], p) * meas);
            }
            let wth = if j == 0 || j == nt - 1 { 0.5 * hth } else { hth };
            let weight = if full { wth * hph } else { wth };
            (weight, grad, powv)
        })
        .collect();

    let boundary = (0..np)
        .map(|k| {
            let f: Vec<f64> = (0..nr)
                .map(|i| {
                    let rho = rule.rho[i];
                    let meas = if full { rho } else { sphere * rho.powi(n as i32 - 2) };
                    pow_abs(at(i, nt - 1, k), p) * meas
                })
                .collect();
            (if full { hph } else { 1.0 }, f)
        })
        .collect();

    Rays {
        rule,
        interior,
        boundary,
    }
}

impl Rays {
    pub fn parts(&self, m: f64, n: usize, order: usize) -> Parts {
        let nf = n as f64;
        let beta_i = 2.0 * m + nf - 1.0;
        let beta_b = 2.0 * m + nf;
        let mut parts = Parts {
            dirichlet: 0.0,
            interior: 0.0,
            boundary: 0.0,
        };
        for (w, g, pw) in &self.interior {
            parts.dirichlet += w * self.rule.integrate(g, beta_i, order);
            parts.interior += w * self.rule.integrate(pw, beta_i, order);
        }
        for (w, f) in &self.boundary {
            parts.boundary += w * self.rule.integrate(f, beta_b, order);
        }
        parts
    }
}

fn quotient_of(ex: Exponents, p: Parts) -> f64 {
    let inorm = if ex.m == 0.0 { 1.0 } else { p.interior.powf(ex.a()) };
    p.dirichlet * inorm / p.boundary.powf(ex.b())
}

/// Trace quotient on the half-space with its error budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HalfspaceEstimate {
    #[serde(rename = "Q")]
    pub q: f64,
    pub dirichlet: f64,
    pub interior_norm: f64,
    pub boundary_norm: f64,
    /// |Q(order k) − Q(order k−1)|, the uncertainty of the tail model.
    pub tail_error: f64,
    /// |Q_h − Q_{2h}|/3, a Richardson estimate of the discretization error.
    pub grid_error: f64,
    pub error_budget: f64,
    pub radius: f64,
    /// Q on the stride-2 subgrid.
    pub coarse_q: f64,
    /// Q with the tail fit one order lower.
    pub lower_order_q: f64,
}

/// (∫|∇w|²)(∫|w|^p)^{m/(m+n−1)} / (∫_∂|w|^p)^{(2m+n−2)/(m+n−1)} for a
/// decaying `w`; refuses when the tail model is not trustworthy at the
/// chosen radius.
pub fn halfspace_quotient(sample: &HalfspaceSample, m: f64) -> Result<HalfspaceEstimate> {
    let n = sample.n;
    if !(m >= 0.0 && m.is_finite()) {
        return Err(Error::Precondition(format!("m must be ≥ 0, got {m}")));
    }
    let ex = Exponents::new(m, n);
    let q = &sample.quad;
    let order = q.tail_order;
    let fine = rays(sample, ex.p(), 1);
    let coarse = rays(sample, ex.p(), 2);
    let parts = fine.parts(m, n, order);
    if !(parts.boundary > 0.0) {
        return Err(Error::UndefinedQuotient("boundary norm vanishes".into()));
    }
    let value = quotient_of(ex, parts);
    let lower = quotient_of(ex, fine.parts(m, n, order.saturating_sub(1)));
    let coarse_value = quotient_of(ex, coarse.parts(m, n, order));
    let tail_error = (value - lower).abs();
    let grid_error = (value - coarse_value).abs() / 3.0;
    let rel_tail = tail_error / value.abs().max(f64::MIN_POSITIVE);
    if !(rel_tail <= q.tail_tolerance) {
        let beta = 2.0 * m + n as f64 - 1.0;
        let grow = (rel_tail / q.tail_tolerance).powf(1.0 / (beta - 1.0)).max(2.0);
        return Err(Error::TailBound {
            bound: rel_tail,
            tolerance: q.tail_tolerance,
            suggested_radius: q.radius * grow,
        });
    }
    Ok(HalfspaceEstimate {
        q: value,
        dirichlet: parts.dirichlet,
        interior_norm: parts.interior,
        boundary_norm: parts.boundary,
        tail_error,
        grid_error,
        error_budget: tail_error + grid_error,
        radius: q.radius,
        coarse_q: coarse_value,
        lower_order_q: lower,
    })
}
