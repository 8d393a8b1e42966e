use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponents::Exponents;
use crate::functionals::{boundary_normalize, escobar_quotient, w_functional};
use crate::geometry::{MeasureSpace, ScalarField, Topology};
use crate::linalg::linear_fit;
use crate::minimizer::eigen::EigenResult;
use crate::quad::{integrate, integrate_to_infinity};
use crate::sharp_constants::{bubble, bubble_boundary_volume_exact, lambda_mn, BubbleParams};
use crate::special::sphere_volume;

/// `count` points from `a` to `b` evenly spaced in log scale.
pub fn geomspace(a: f64, b: f64, count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![a],
        _ => {
            let (la, lb) = (a.ln(), b.ln());
            (0..count)
                .map(|i| (la + (lb - la) * i as f64 / (count - 1) as f64).exp())
                .collect()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlowupPoint {
    pub t: f64,
    #[serde(rename = "Q")]
    pub q: f64,
    /// Numerator energy of ψ_t.
    pub energy: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BlowupScan {
    pub rho1: f64,
    pub band: f64,
    pub points: Vec<BlowupPoint>,
    /// The last third of the scan is strictly decreasing.
    pub decreasing_tail: bool,
    pub min_q: f64,
    /// 10³ max(1, |Q(ψ₀)|)
    pub bound: f64,
    /// `decreasing_tail` and `min_q < −bound`.
    pub unbounded: bool,
}

/// Q(ψ_t) for ψ_t = (t φ₁ + 1)/√D, D = (∫_∂ e^{−φ})^{(m+n−2)/(m+n−1)}, with
/// no check on the sign of ρ₁.
pub fn psi_family_quotients(space: &MeasureSpace, eig: &EigenResult, ts: &[f64]) -> Result<Vec<BlowupPoint>> {
    space.check_field(&eig.field)?;
    let ex = space.exponents();
    let sqrt_d = space.boundary_measure().powf(1.0 / ex.p());
    ts.iter()
        .map(|&t| {
            let psi = ScalarField::new(eig.field.values.iter().map(|v| (t * v + 1.0) / sqrt_d).collect());
            let b = escobar_quotient(space, &psi)?;
            Ok(BlowupPoint {
                t,
                q: b.q,
                energy: b.energy(),
            })
        })
        .collect()
}

/// Scan of Q(ψ_t) on a space with ρ₁ < 0. Refuses when ρ₁ is positive
/// beyond the band and reports an indeterminate sign inside it.
pub fn blowup_scan(space: &MeasureSpace, eig: &EigenResult, ts: &[f64]) -> Result<BlowupScan> {
    if ts.len() < 3 || ts.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
        return Err(Error::config("numerics.blowup_t", "need at least 3 finite t ≥ 0"));
    }
    if eig.rho1 > eig.band {
        return Err(Error::Precondition(format!(
            "ρ₁ = {:.6e} is positive; the constant is finite and the blow-up scan does not apply",
            eig.rho1
        )));
    }
    if eig.is_indeterminate() {
        return Err(Error::Indeterminate {
            rho1: eig.rho1,
            band: eig.band,
        });
    }
    let points = psi_family_quotients(space, eig, ts)?;
    let q0 = psi_family_quotients(space, eig, &[0.0])?[0].q;
    let tail = &points[points.len() - points.len().div_ceil(3)..];
    let decreasing_tail = tail.windows(2).all(|w| w[1].q < w[0].q);
    let min_q = points.iter().map(|p| p.q).fold(f64::INFINITY, f64::min);
    let bound = 1e3 * q0.abs().max(1.0);
    Ok(BlowupScan {
        rho1: eig.rho1,
        band: eig.band,
        decreasing_tail,
        min_q,
        bound,
        unbounded: decreasing_tail && min_q < -bound,
        points,
    })
}

/// Smoothstep cutoff: 1 on [0, ε], 0 beyond 2ε.
fn cutoff(rho: f64, eps: f64) -> (f64, f64) {
    if rho <= eps {
        (1.0, 0.0)
    } else if rho >= 2.0 * eps {
        (0.0, 0.0)
    } else {
        let s = (rho - eps) / eps;
        (1.0 - s * s * (3.0 - 2.0 * s), -6.0 * s * (1.0 - s) / eps)
    }
}

fn check_scan_params(m: f64, n: usize, eps: f64, tau: f64) -> Result<()> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::config("numerics.aubin.eps", format!("ε must be positive, got {eps}")));
    }
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::config("numerics.aubin.tau", format!("τ must be positive, got {tau}")));
    }
    let c = Exponents::new(m, n).bubble_c();
    if tau.sqrt() > c.sqrt() * 2.0 * eps {
        return Err(Error::Precondition(format!(
            "√τ = {:.4e} exceeds √c·2ε = {:.4e}",
            tau.sqrt(),
            c.sqrt() * 2.0 * eps
        )));
    }
    Ok(())
}

/// Integral with absolute tolerance `rel` times a first coarse estimate.
fn integrate_rel<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel: f64) -> f64 {
    let (coarse, _) = integrate(&f, a, b, f64::INFINITY);
    integrate(&f, a, b, rel * coarse.abs().max(1e-300)).0
}

/// ∫ |∇(η w_{0,τ})|² over the half-annulus ε ≤ |x| ≤ 2ε of ℝ^n_+, by
/// adaptive quadrature in (|x|, polar angle).
pub fn annulus_gradient(m: f64, n: usize, eps: f64, tau: f64) -> Result<f64> {
    check_scan_params(m, n, eps, tau)?;
    let b = bubble(BubbleParams::tau(m, n, tau))?;
    let nf = n as f64;
    let sphere = sphere_volume(nf - 2.0);
    let radial = |rho: f64| {
        let (eta, deta) = cutoff(rho, eps);
        let angular = |th: f64| {
            let (sn, cs) = th.sin_cos();
            let (r, t) = (rho * sn, rho * cs);
            let w = b.profile(r, t);
            let (wr, wt) = b.profile_gradient(r, t);
            let gr = deta * w * sn + eta * wr;
            let gt = deta * w * cs + eta * wt;
            (gr * gr + gt * gt) * sn.powf(nf - 2.0)
        };
        sphere * rho.powf(nf - 1.0) * integrate_rel(angular, 0.0, 0.5 * std::f64::consts::PI, 1e-11)
    };
    Ok(integrate_rel(radial, eps, 2.0 * eps, 1e-10))
}

/// V − V_τ = ∫_{∂ℝ^n_+} (1 − η^p) w_{0,τ}^p, the boundary mass cut off.
pub fn bubble_volume_gap(m: f64, n: usize, eps: f64, tau: f64) -> Result<f64> {
    check_scan_params(m, n, eps, tau)?;
    let b = bubble(BubbleParams::tau(m, n, tau))?;
    let p = Exponents::new(m, n).p();
    let sphere = sphere_volume(n as f64 - 2.0);
    let density = |r: f64| sphere * r.powi(n as i32 - 2) * b.profile(r, 0.0).powf(p);
    let ring = integrate_rel(|r| (1.0 - cutoff(r, eps).0.powf(p)) * density(r), eps, 2.0 * eps, 1e-11);
    let (coarse, _) = integrate_to_infinity(density, 2.0 * eps, f64::INFINITY);
    let (outer, _) = integrate_to_infinity(density, 2.0 * eps, 1e-11 * coarse.abs().max(1e-300));
    Ok(ring + outer)
}

/// (n−1)/(2(m+n−1)) + m + (n−3)/2, the power of τ in the annulus gradient.
pub fn annulus_exponent_predicted(m: f64, n: usize) -> f64 {
    let nf = n as f64;
    (nf - 1.0) / (2.0 * (m + nf - 1.0)) + m + (nf - 3.0) / 2.0
}

/// Log-log slope of [`annulus_gradient`] over `taus`.
pub fn annulus_exponent_fit(m: f64, n: usize, eps: f64, taus: &[f64]) -> Result<f64> {
    if taus.len() < 2 {
        return Err(Error::Precondition("a slope needs at least two τ values".into()));
    }
    let values = taus
        .iter()
        .map(|&t| annulus_gradient(m, n, eps, t).map(f64::ln))
        .collect::<Result<Vec<_>>>()?;
    let logs: Vec<f64> = taus.iter().map(|t| t.ln()).collect();
    Ok(linear_fit(&logs, &values).0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AubinRow {
    pub tau: f64,
    /// Q of the cut-off bubble on the grid.
    #[serde(rename = "Q")]
    pub q: f64,
    /// Q / Λ_{m,n}
    pub ratio: f64,
    /// τ V^{−2/(2m+n−1)}
    pub tau_tilde: f64,
    /// W of the normalized cut-off bubble at τ̃.
    pub w_value: f64,
    /// V − V_τ from continuum quadrature.
    pub volume_gap: f64,
    /// ∫ over the cutoff annulus of |∇(ηw)|², continuum quadrature.
    pub annulus_gradient: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AubinScan {
    pub m: f64,
    pub n: usize,
    pub eps: f64,
    pub lambda_mn: f64,
    /// Boundary integral V of the τ-family.
    pub v: f64,
    pub rows: Vec<AubinRow>,
    pub best_q: f64,
    pub best_tau: f64,
    /// best_q / Λ_{m,n} − 1
    pub delta: f64,
    /// Q does not increase along the τ list.
    pub monotone: bool,
}

/// Quotients of η·w_{p,τ} on a flat space, with η the smoothstep cutoff of
/// radius ε around the boundary point `point` (lateral coordinates).
pub fn aubin_scan(space: &MeasureSpace, point: &[f64], taus: &[f64], eps: f64) -> Result<AubinScan> {
    let grid = space.grid();
    let (m, n) = (space.m(), space.n());
    if m <= 0.0 {
        return Err(Error::Precondition("the concentration scan needs m > 0".into()));
    }
    if space.has_conformal_factor() {
        return Err(Error::Precondition(
            "the concentration scan uses flat boundary coordinates; σ must vanish".into(),
        ));
    }
    if point.len() != n - 1 {
        return Err(Error::Shape {
            expected: n - 1,
            found: point.len(),
        });
    }
    if taus.is_empty() {
        return Err(Error::config("numerics.aubin.tau", "τ list is empty"));
    }
    for &tau in taus {
        check_scan_params(m, n, eps, tau)?;
    }
    if 2.0 * eps > grid.length(n - 1) {
        return Err(Error::Precondition(format!("2ε = {} exceeds the height of the slab", 2.0 * eps)));
    }
    for (k, &x) in point.iter().enumerate() {
        let l = grid.length(k);
        let fits = match grid.topology()[k] {
            Topology::Periodic => 4.0 * eps <= l,
            Topology::Interval => x - 2.0 * eps >= 0.0 && x + 2.0 * eps <= l,
        };
        if !fits {
            return Err(Error::Precondition(format!("the 2ε-ball around the point does not fit along axis {k}")));
        }
    }
    let lambda = lambda_mn(m, n)?;
    let v = bubble_boundary_volume_exact(m, n)?;
    let k_tilde = -2.0 / (2.0 * m + n as f64 - 1.0);
    let topo = grid.topology().to_vec();
    let lengths: Vec<f64> = (0..n).map(|k| grid.length(k)).collect();
    let rows = taus
        .par_iter()
        .map(|&tau| {
            let b = bubble(BubbleParams::tau(m, n, tau))?;
            let f = ScalarField::from_fn(grid, |x| {
                let mut r2 = 0.0;
                for k in 0..n - 1 {
                    let mut d = x[k] - point[k];
                    if topo[k] == Topology::Periodic {
                        d -= lengths[k] * (d / lengths[k]).round();
                    }
                    r2 += d * d;
                }
                let t = x[n - 1];
                let (eta, _) = cutoff((r2 + t * t).sqrt(), eps);
                if eta == 0.0 {
                    0.0
                } else {
                    eta * b.profile(r2.sqrt(), t)
                }
            });
            let q = escobar_quotient(space, &f)?.q;
            let normalized = boundary_normalize(space, &f)?;
            let tau_tilde = tau * v.powf(k_tilde);
            Ok(AubinRow {
                tau,
                q,
                ratio: q / lambda,
                tau_tilde,
                w_value: w_functional(space, &normalized, tau_tilde)?,
                volume_gap: bubble_volume_gap(m, n, eps, tau)?,
                annulus_gradient: annulus_gradient(m, n, eps, tau)?,
            })
        })
        .collect::<Result<Vec<AubinRow>>>()?;
    let mut best = 0;
    for (i, r) in rows.iter().enumerate() {
        if r.q < rows[best].q {
            best = i;
        }
    }
    let monotone = rows.windows(2).all(|w| w[1].q <= w[0].q);
    Ok(AubinScan {
        m,
        n,
        eps,
        lambda_mn: lambda,
        v,
        best_q: rows[best].q,
        best_tau: rows[best].tau,
        delta: rows[best].q / lambda - 1.0,
        monotone,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geomspace_endpoints() {
        let g = geomspace(1.0, 1e4, 5);
        assert_eq!(g.len(), 5);
        assert!((g[0] - 1.0).abs() < 1e-15 && (g[4] / 1e4 - 1.0).abs() < 1e-12);
        assert!((g[2] / 100.0 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cutoff_is_c1() {
        let eps = 0.3;
        assert_eq!(cutoff(0.1, eps), (1.0, 0.0));
        assert_eq!(cutoff(0.7, eps), (0.0, 0.0));
        let (a, da) = cutoff(eps * 1.000001, eps);
        assert!((a - 1.0).abs() < 1e-10 && da.abs() < 1e-4);
        let (mid, _) = cutoff(1.5 * eps, eps);
        assert!((mid - 0.5).abs() < 1e-15);
    }

    #[test]
    fn annulus_slope_matches_prediction() {
        let slope = annulus_exponent_fit(1.0, 3, 0.25, &[1e-4, 1e-5, 1e-6]).unwrap();
        let want = annulus_exponent_predicted(1.0, 3);
        assert!((want - 4.0 / 3.0).abs() < 1e-15);
        assert!((slope / want - 1.0).abs() < 0.1, "{slope}");
    }

    #[test]
    fn volume_gap_positive_and_shrinking() {
        let a = bubble_volume_gap(1.0, 3, 0.25, 1e-2).unwrap();
        let b = bubble_volume_gap(1.0, 3, 0.25, 1e-3).unwrap();
        assert!(a > b && b > 0.0);
    }

    #[test]
    fn tau_eps_constraint() {
        assert!(annulus_gradient(1.0, 3, 0.1, 1.0).is_err());
    }
}
