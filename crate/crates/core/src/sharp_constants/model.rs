use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponents::Exponents;
use crate::quad::{integrate, integrate_to_infinity};
use crate::sharp_constants::bubble::{bubble, BubbleParams, Family};
use crate::sharp_constants::closed::bubble_boundary_volume_exact;
use crate::sharp_constants::halfspace::HalfspaceQuad;
use crate::special::sphere_volume;

/// Sup-norm residuals of the equations satisfied by the τ-family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ElResidual {
    pub interior: f64,
    pub boundary: f64,
    pub spacing: f64,
}

/// Residuals of
///   −τ^{m/(2(m+n−1))} Δw + ((m+n−1)/(m+n−2)) τ^{−1/2} w^{(m+n)/(m+n−2)} = 0 in ℝ^n_+,
///   τ^{m/(2(m+n−1))} ∂w/∂η = ((m+n−1)/m)^{1/2} w^{(m+n)/(m+n−2)} on the boundary,
/// on a uniform axisymmetric (r, t) grid of `quad.n_rho` cells over
/// [0, R]², relative to the sup of the nonlinear term. A collar of two
/// cells along the truncation edges is skipped.
pub fn bubble_el_residual(params: &BubbleParams, quad: &HalfspaceQuad) -> Result<ElResidual> {
    if params.family != Family::Tau {
        return Err(Error::Precondition("EL residual is defined for the τ-family".into()));
    }
    let b = bubble(params.clone())?;
    if quad.n_rho < 8 || !(quad.radius > 0.0) {
        return Err(Error::Precondition("need a positive radius and at least 8 cells".into()));
    }
    let ex = Exponents::new(params.m, params.n);
    let (m, nf) = (params.m, params.n as f64);
    let tau = params.scale;
    let cells = quad.n_rho;
    let h = quad.radius / cells as f64;
    let np = cells + 1;
    let w: Vec<f64> = (0..np * np)
        .map(|ij| b.profile((ij / np) as f64 * h, (ij % np) as f64 * h))
        .collect();
    let at = |i: usize, j: usize| w[i * np + j];
    let lead = tau.powf(m / (2.0 * (m + nf - 1.0)));
    let q = (m + nf) / ex.k();
    let c_int = (m + nf - 1.0) / ex.k() / tau.sqrt();
    let c_bd = ((m + nf - 1.0) / m).sqrt();

    let mut scale: f64 = 0.0;
    let mut interior: f64 = 0.0;
    let mut boundary: f64 = 0.0;
    for i in 0..np - 2 {
        let r = i as f64 * h;
        for j in 0..np - 2 {
            let nonlinear = at(i, j).powf(q);
            scale = scale.max(c_int * nonlinear).max(c_bd * nonlinear);
            if j == 0 {
                let dt = (-3.0 * at(i, 0) + 4.0 * at(i, 1) - at(i, 2)) / (2.0 * h);
                boundary = boundary.max((lead * (-dt) - c_bd * nonlinear).abs());
                continue;
            }
            let wtt = (at(i, j + 1) - 2.0 * at(i, j) + at(i, j - 1)) / (h * h);
            let radial = if i == 0 {
                // even continuation across the axis
                (nf - 1.0) * 2.0 * (at(1, j) - at(0, j)) / (h * h)
            } else {
                let wrr = (at(i + 1, j) - 2.0 * at(i, j) + at(i - 1, j)) / (h * h);
                let wr = (at(i + 1, j) - at(i - 1, j)) / (2.0 * h);
                wrr + (nf - 2.0) / r * wr
            };
            interior = interior.max((-lead * (radial + wtt) + c_int * nonlinear).abs());
        }
    }
    Ok(ElResidual {
        interior: interior / scale,
        boundary: boundary / scale,
        spacing: h,
    })
}

/// Boundary integral V of the τ-family and its spread across members.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryVolume {
    pub v: f64,
    pub exact: f64,
    /// Largest relative deviation between the members that were integrated.
    pub spread: f64,
}

/// V = ∫_{∂ℝ^n_+} w_{x₀,τ}^{2(m+n−1)/(m+n−2)} dσ by radial quadrature over
/// [0, R√τ] plus an adaptive tail, for τ ∈ {1, 1/4} and a shifted center.
/// Fails if the members disagree by more than 1e−6.
pub fn bubble_boundary_volume(m: f64, n: usize, quad: &HalfspaceQuad) -> Result<BoundaryVolume> {
    let exact = bubble_boundary_volume_exact(m, n)?;
    let ex = Exponents::new(m, n);
    let sphere = sphere_volume(n as f64 - 2.0);
    let mut values = Vec::new();
    for (tau, shift) in [(1.0, 0.0), (0.25, 0.0), (1.0, 3.0)] {
        let mut center = vec![0.0; n - 1];
        center[0] = shift;
        let b = bubble(BubbleParams::tau(m, n, tau).with_center(center.clone()))?;
        let p = ex.p();
        let f = |r: f64| {
            let mut x = center.clone();
            x[0] += r;
            x.push(0.0);
            sphere * r.powi(n as i32 - 2) * b.eval(&x).powf(p)
        };
        let cut = quad.radius * tau.sqrt();
        let (body, _) = integrate(f, 0.0, cut, 1e-14);
        let (tail, _) = integrate_to_infinity(f, cut, 1e-14);
        values.push(body + tail);
    }
    let v = values[0];
    let spread = values.iter().map(|x| (x / v - 1.0).abs()).fold(0.0, f64::max);
    if spread > 1e-6 {
        return Err(Error::Precondition(format!(
            "boundary integral varies across the family by {spread:.3e}"
        )));
    }
    Ok(BoundaryVolume { v, exact, spread })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_volume_matches_closed_form() {
        for (m, n) in [(1.0, 3), (2.0, 3), (0.5, 4)] {
            let bv = bubble_boundary_volume(m, n, &HalfspaceQuad::new(40.0, 64)).unwrap();
            assert!((bv.v / bv.exact - 1.0).abs() < 1e-9, "{bv:?}");
            assert!(bv.v > 0.0);
        }
    }

    #[test]
    fn el_residual_second_order() {
        let p = BubbleParams::tau(1.0, 3, 1.0);
        let coarse = bubble_el_residual(&p, &HalfspaceQuad::new(6.0, 96)).unwrap();
        let fine = bubble_el_residual(&p, &HalfspaceQuad::new(6.0, 192)).unwrap();
        let oi = (coarse.interior / fine.interior).log2();
        let ob = (coarse.boundary / fine.boundary).log2();
        assert!(oi > 1.7 && ob > 1.7, "{coarse:?} {fine:?}");
    }

    #[test]
    fn el_residual_translation_invariant() {
        let q = HalfspaceQuad::new(6.0, 32);
        let a = bubble_el_residual(&BubbleParams::tau(1.0, 3, 1.0), &q).unwrap();
        let b = bubble_el_residual(&BubbleParams::tau(1.0, 3, 1.0).with_center(vec![2.0, -1.0]), &q).unwrap();
        assert_eq!(a, b);
        assert!(bubble_el_residual(&BubbleParams::epsilon(1.0, 3, 1.0), &q).is_err());
    }
}
