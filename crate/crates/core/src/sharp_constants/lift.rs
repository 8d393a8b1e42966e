use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponents::Exponents;
use crate::sharp_constants::halfspace::{diff_line, rays, HalfspaceSample, Layout, RadialRule};
use crate::special::{gamma, sphere_volume};

/// Both sides of the two lifting identities and their relative mismatch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LiftCheck {
    pub boundary_lhs: f64,
    pub boundary_rhs: f64,
    pub boundary_residual: f64,
    pub gradient_lhs: f64,
    pub gradient_rhs: f64,
    pub gradient_residual: f64,
    /// π^m Γ(m+n−1) τ^m / Γ(2m+n−1), the factor in front of ∫_∂ w^p.
    pub boundary_coefficient: f64,
}

/// Coefficients (A, B, C) of the lifting identities:
/// ∫_∂ f^{p'} = A ∫_∂ w^p and ∫|∇f|² = B ∫|∇w|² + C ∫ w^p.
pub fn lift_coefficients(m: usize, n: usize, tau: f64) -> (f64, f64, f64) {
    let (mf, nf) = (m as f64, n as f64);
    let pi_m = std::f64::consts::PI.powf(mf);
    let a = pi_m * gamma(mf + nf - 1.0) * tau.powf(mf) / gamma(2.0 * mf + nf - 1.0);
    let ratio = gamma(mf + nf) / gamma(2.0 * mf + nf);
    let b = ((2.0 * mf + nf - 2.0) / (mf + nf - 2.0)).powi(2) * pi_m * tau.powf(mf) * ratio;
    let c = mf * (2.0 * mf + nf - 2.0).powi(2) * pi_m * tau.powf(mf - 1.0) * ratio / (mf + nf - 1.0);
    (a, b, c)
}

/// Lifts `w` to f(y, x, t) = (w^{−2/(m+n−2)} + |y|²/τ)^{−(2m+n−2)/2} on
/// ℝ^{2m+n}_+ and integrates f numerically in all variables. The right
/// sides use the quadrature of w itself on the same (ρ, θ) grid.
///
/// The |y| direction is discretized as η = ℓ(ρ) s/(1−s) with
/// ℓ(ρ) = √τ (1+ρ), so the s-grid follows the natural scale of f.
pub fn lift_check(sample: &HalfspaceSample, m: usize, tau: f64, n_eta: usize) -> Result<LiftCheck> {
    let quad = sample.quad();
    let n = sample.n();
    if m == 0 {
        return Err(Error::Precondition("lifting needs an integer m ≥ 1".into()));
    }
    if quad.layout != Layout::Axisymmetric {
        return Err(Error::Precondition("lift check uses the axisymmetric layout".into()));
    }
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::Precondition(format!("τ must be positive, got {tau}")));
    }
    if n_eta < 16 {
        return Err(Error::Precondition("at least 16 cells are needed along |y|".into()));
    }
    if let Some(v) = sample.values().iter().find(|v| !(**v > 0.0)) {
        return Err(Error::Precondition(format!("lifting needs w > 0 on the sampled region, found {v}")));
    }
    let (mf, nf) = (m as f64, n as f64);
    let ex = Exponents::new(mf, n);
    let lifted_n = 2.0 * mf + nf;
    let p_lift = 2.0 * (lifted_n - 1.0) / (lifted_n - 2.0);
    let k = ex.k();

    let rule = RadialRule::new(quad.radius, quad.n_rho, quad.stretch);
    let (nr, nt) = (quad.n_rho + 1, quad.n_theta + 1);
    let ne = n_eta + 1;
    let hth = 0.5 * std::f64::consts::PI / quad.n_theta as f64;
    let he = 1.0 / n_eta as f64;
    let values = sample.values();
    let sy = sphere_volume(2.0 * mf - 1.0);
    let sx = sphere_volume(nf - 2.0);
    let scale = |rho: f64| tau.sqrt() * (1.0 + rho);
    let dscale = tau.sqrt();

    // f on the (ρ, θ, s) grid, last node s = 1 (|y| = ∞) where f = 0
    let mut f = vec![0.0; nr * nt * ne];
    for i in 0..nr {
        let l = scale(rule.rho[i]);
        for j in 0..nt {
            let a = values[i * nt + j].powf(-2.0 / k);
            for e in 0..ne - 1 {
                let s = e as f64 * he;
                let eta = l * s / (1.0 - s);
                f[(i * nt + j) * ne + e] = (a + eta * eta / tau).powf(-0.5 * (lifted_n - 2.0));
            }
        }
    }
    let at = |i: usize, j: usize, e: usize| f[(i * nt + j) * ne + e];

    // y-integrated densities per (ρ, θ) node
    let grad_density: Vec<f64> = (0..nr * nt)
        .into_par_iter()
        .map(|ij| {
            let (i, j) = (ij / nt, ij % nt);
            let rho = rule.rho[i];
            let l = scale(rho);
            let line_e: Vec<f64> = (0..ne).map(|e| at(i, j, e)).collect();
            let fs = diff_line(&line_e, he, false);
            // at fixed |y|, ∂s/∂ρ = −ℓ' s(1−s)/ℓ
            let mut acc = 0.0;
            for e in 0..ne - 1 {
                let s = e as f64 * he;
                let jac = l / ((1.0 - s) * (1.0 - s));
                let eta = l * s / (1.0 - s);
                let f_eta = fs[e] / jac;
                let f_rho = rho_derivative(&at, &rule, i, j, e) - fs[e] * dscale / l * s * (1.0 - s);
                let f_theta = if rho > 0.0 { theta_derivative(&at, nt, hth, i, j, e) / rho } else { 0.0 };
                let g2 = f_eta * f_eta + f_rho * f_rho + f_theta * f_theta;
                let wt = if e == 0 { 0.5 } else { 1.0 };
                acc += wt * g2 * sy * eta.powf(2.0 * mf - 1.0) * jac;
            }
            acc * he
        })
        .collect();

    let boundary_density: Vec<f64> = (0..nr)
        .map(|i| {
            let l = scale(rule.rho[i]);
            let mut acc = 0.0;
            for e in 0..ne - 1 {
                let s = e as f64 * he;
                let jac = l / ((1.0 - s) * (1.0 - s));
                let eta = l * s / (1.0 - s);
                let wt = if e == 0 { 0.5 } else { 1.0 };
                acc += wt * at(i, nt - 1, e).powf(p_lift) * sy * eta.powf(2.0 * mf - 1.0) * jac;
            }
            acc * he
        })
        .collect();

    let order = quad.tail_order;
    let beta_i = 2.0 * mf + nf - 1.0;
    let mut gradient_lhs = 0.0;
    for j in 0..nt {
        let th = j as f64 * hth;
        let ray: Vec<f64> = (0..nr)
            .map(|i| grad_density[i * nt + j] * sx * rule.rho[i].powf(nf - 1.0) * th.sin().powf(nf - 2.0))
            .collect();
        let w = if j == 0 || j == nt - 1 { 0.5 * hth } else { hth };
        gradient_lhs += w * rule.integrate(&ray, beta_i, order);
    }
    let bray: Vec<f64> = (0..nr)
        .map(|i| boundary_density[i] * sx * rule.rho[i].powf(nf - 2.0))
        .collect();
    let boundary_lhs = rule.integrate(&bray, beta_i + 1.0, order);

    let parts = rays(sample, ex.p(), 1).parts(mf, n, order);
    let (a, b, c) = lift_coefficients(m, n, tau);
    let boundary_rhs = a * parts.boundary;
    let gradient_rhs = b * parts.dirichlet + c * parts.interior;
    Ok(LiftCheck {
        boundary_lhs,
        boundary_rhs,
        boundary_residual: (boundary_lhs - boundary_rhs).abs() / boundary_rhs.abs(),
        gradient_lhs,
        gradient_rhs,
        gradient_residual: (gradient_lhs - gradient_rhs).abs() / gradient_rhs.abs(),
        boundary_coefficient: a,
    })
}

fn rho_derivative<F: Fn(usize, usize, usize) -> f64>(at: &F, rule: &RadialRule, i: usize, j: usize, e: usize) -> f64 {
    let last = rule.rho.len() - 1;
    let h = rule.hs;
    let d = if i == 0 {
        (-3.0 * at(0, j, e) + 4.0 * at(1, j, e) - at(2, j, e)) / (2.0 * h)
    } else if i == last {
        (3.0 * at(last, j, e) - 4.0 * at(last - 1, j, e) + at(last - 2, j, e)) / (2.0 * h)
    } else {
        (at(i + 1, j, e) - at(i - 1, j, e)) / (2.0 * h)
    };
    d / rule.drho[i]
}

fn theta_derivative<F: Fn(usize, usize, usize) -> f64>(at: &F, nt: usize, h: f64, i: usize, j: usize, e: usize) -> f64 {
    if j == 0 {
        (-3.0 * at(i, 0, e) + 4.0 * at(i, 1, e) - at(i, 2, e)) / (2.0 * h)
    } else if j == nt - 1 {
        (3.0 * at(i, nt - 1, e) - 4.0 * at(i, nt - 2, e) + at(i, nt - 3, e)) / (2.0 * h)
    } else {
        (at(i, j + 1, e) - at(i, j - 1, e)) / (2.0 * h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sharp_constants::{bubble, BubbleParams, HalfspaceQuad};

    #[test]
    fn boundary_coefficient_scales_like_tau_to_the_m() {
        for m in [1usize, 2] {
            let (a1, _, _) = lift_coefficients(m, 3, 1.0);
            let (a2, _, _) = lift_coefficients(m, 3, 2.5);
            assert!((a2 / a1 - 2.5f64.powi(m as i32)).abs() < 1e-13);
        }
    }

    #[test]
    fn bubble_identities_hold() {
        let b = bubble(BubbleParams::epsilon(1.0, 3, 1.0)).unwrap();
        let s = HalfspaceQuad::new(40.0, 64).sample(3, |p| b.eval(p)).unwrap();
        let r = lift_check(&s, 1, 1.0, 64).unwrap();
        assert!(r.boundary_residual < 1e-3, "{r:?}");
        assert!(r.gradient_residual < 1e-3, "{r:?}");
    }

    #[test]
    fn rejects_nonpositive_fields() {
        let s = HalfspaceQuad::new(10.0, 32).sample(3, |p| p[2] - 1.0).unwrap();
        assert!(lift_check(&s, 1, 1.0, 16).is_err());
    }
}
