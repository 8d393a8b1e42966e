//! The sharp half-space constant Λ_{m,n}, its extremal bubbles and the
//! quadrature used to check them.

mod bubble;
mod closed;
mod halfspace;
mod lift;
mod model;
mod sharpness;

use std::io::Write;

use serde::Serialize;

pub use bubble::{bubble, Bubble, BubbleParams, Family};
pub use closed::{bubble_boundary_volume_exact, case_integral, lambda_mn};
pub use halfspace::{halfspace_quotient, HalfspaceEstimate, HalfspaceQuad, HalfspaceSample, Layout};
pub use lift::{lift_check, lift_coefficients, LiftCheck};
pub use model::{bubble_boundary_volume, bubble_el_residual, BoundaryVolume, ElResidual};
pub use sharpness::{structured_perturbations, trace_sharpness, PerturbedRow, TraceSharpness};

use crate::error::Result;

/// One row of the constant table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstantRow {
    pub m: f64,
    pub n: usize,
    pub lambda: f64,
    pub estimate: f64,
    pub rel_error: f64,
    pub error_budget: f64,
}

/// Quotient of the ε = 1 bubble at the origin compared with Λ_{m,n}.
pub fn constant_row(m: f64, n: usize, quad: &HalfspaceQuad) -> Result<ConstantRow> {
    let lambda = lambda_mn(m, n)?;
    let b = bubble(BubbleParams::epsilon(m, n, 1.0))?;
    let est = halfspace_quotient(&quad.sample(n, |p| b.eval(p))?, m)?;
    Ok(ConstantRow {
        m,
        n,
        lambda,
        estimate: est.q,
        rel_error: (est.q - lambda).abs() / lambda,
        error_budget: est.error_budget,
    })
}

pub fn constant_table(pairs: &[(f64, usize)], quad: &HalfspaceQuad) -> Result<Vec<ConstantRow>> {
    pairs.iter().map(|&(m, n)| constant_row(m, n, quad)).collect()
}

/// Writes rows as CSV with round-trip precision.
pub fn write_constant_csv<W: Write>(rows: &[ConstantRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["m", "n", "lambda_mn", "quadrature", "rel_error", "error_budget"])?;
    for r in rows {
        w.write_record([
            format!("{:.16e}", r.m),
            r.n.to_string(),
            format!("{:.16e}", r.lambda),
            format!("{:.16e}", r.estimate),
            format!("{:.16e}", r.rel_error),
            format!("{:.16e}", r.error_budget),
        ])?;
    }
    w.flush()?;
    Ok(())
}
