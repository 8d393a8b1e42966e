use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::sharp_constants::bubble::{bubble, BubbleParams};
use crate::sharp_constants::closed::lambda_mn;
use crate::sharp_constants::halfspace::{halfspace_quotient, HalfspaceEstimate, HalfspaceQuad, Layout};

/// Multipliers g of the perturbed fields w·(1 + A g); all bounded, so the
/// perturbed fields decay like the bubble. Points are (x₁, x₂, t).
pub fn structured_perturbations() -> Vec<(&'static str, fn(&[f64]) -> f64)> {
    fn r2(p: &[f64]) -> f64 {
        p.iter().map(|x| x * x).sum()
    }
    vec![
        ("sin_x1", |p| p[0].sin()),
        ("cos_x1_cos_x2", |p| p[0].cos() * p[1].cos()),
        ("quadrupole", |p| (p[0] * p[0] - p[1] * p[1]) / (1.0 + r2(p))),
        ("height", |p| p[2] / (1.0 + p[2])),
        ("radial_wave", |p| r2(p).sqrt().cos()),
    ]
}

#[derive(Debug, Clone, Serialize)]
pub struct PerturbedRow {
    pub label: String,
    pub estimate: HalfspaceEstimate,
    /// Q(perturbed) − Q(bubble)
    pub margin: f64,
    /// Error budget of the margin: Richardson estimate of the difference
    /// plus the change of the difference under a lower tail order.
    pub budget: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceSharpness {
    pub m: f64,
    pub n: usize,
    pub amplitude: f64,
    pub lambda: f64,
    pub bubble: HalfspaceEstimate,
    pub perturbed: Vec<PerturbedRow>,
}

/// Quotients of the ε = 1 bubble and of its five structured perturbations
/// on the full three-dimensional layout.
pub fn trace_sharpness(m: f64, quad: &HalfspaceQuad, amplitude: f64) -> Result<TraceSharpness> {
    if quad.layout != Layout::Full3 {
        return Err(Error::Precondition("perturbations need the full layout (n = 3)".into()));
    }
    if !(amplitude.abs() < 1.0) {
        return Err(Error::Precondition(format!("amplitude must lie in (−1, 1), got {amplitude}")));
    }
    let n = 3;
    let lambda = lambda_mn(m, n)?;
    let b = bubble(BubbleParams::epsilon(m, n, 1.0))?;
    let base = halfspace_quotient(&quad.sample(n, |p| b.eval(p))?, m)?;
    let perturbed = structured_perturbations()
        .into_par_iter()
        .map(|(label, g)| {
            let est = halfspace_quotient(&quad.sample(n, |p| b.eval(p) * (1.0 + amplitude * g(p)))?, m)?;
            let margin = est.q - base.q;
            let coarse = est.coarse_q - base.coarse_q;
            let lower = est.lower_order_q - base.lower_order_q;
            Ok(PerturbedRow {
                label: label.to_string(),
                margin,
                budget: (margin - coarse).abs() / 3.0 + (margin - lower).abs(),
                estimate: est,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TraceSharpness {
        m,
        n,
        amplitude,
        lambda,
        bubble: base,
        perturbed,
    })
}
