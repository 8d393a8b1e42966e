//! Projected descent on the quotient and on W, Euler–Lagrange residuals,
//! the Dirichlet eigenvalue ρ₁ with its blow-up family, and the
//! concentration scan of cut-off bubbles.

mod config;
mod descent;
mod eigen;
mod scans;

use std::io::Write;

pub use config::{MinimizerConfig, StepRule};
pub use descent::{
    el_residual, initial_fields, lower_bound_check, minimize_quotient, minimize_w, random_smooth_field,
    w_el_residual, ElReport, LowerBound, MinimizerResult, StartSummary, TraceRow, WMinimum,
};
pub use eigen::{dirichlet_rho1, EigenResult};
pub use scans::{
    annulus_exponent_fit, annulus_exponent_predicted, annulus_gradient, aubin_scan, blowup_scan,
    bubble_volume_gap, geomspace, psi_family_quotients, AubinRow, AubinScan, BlowupPoint, BlowupScan,
};

use crate::error::Result;

/// Writes a convergence trace as CSV with columns iteration, Q, grad_norm, step.
pub fn write_trace_csv<W: Write>(trace: &[TraceRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["iteration", "Q", "grad_norm", "step"])?;
    for r in trace {
        w.write_record([
            r.iteration.to_string(),
            format!("{:.16e}", r.value),
            format!("{:.16e}", r.grad_norm),
            format!("{:.16e}", r.step),
        ])?;
    }
    w.flush()?;
    Ok(())
}
