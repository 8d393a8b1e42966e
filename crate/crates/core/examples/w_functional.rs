//! Minimizes the W-functional at several scales τ next to the quotient
//! minimum of the same space.

use escobar::functionals::w_functional;
use escobar::geometry::{Grid, MeasureSpace};
use escobar::minimizer::{minimize_quotient, minimize_w, MinimizerConfig};

fn main() -> escobar::Result<()> {
    let grid = Grid::half_torus(&[10, 10, 13], &[1.0, 1.0, 1.0])?;
    let space = MeasureSpace::flat_based(grid, 1.0, |x| 0.5 * (x[2] - 0.5).powi(2))?;
    let cfg = MinimizerConfig {
        restarts: 3,
        ..MinimizerConfig::default()
    };
    for tau in [0.25, 1.0, 4.0, 16.0] {
        let r = minimize_w(&space, tau, &cfg)?;
        let check = w_functional(&space, &r.field, tau)?;
        println!("τ = {tau:<5} min W = {:.8} (re-evaluated {check:.8}), converged {}", r.value, r.converged);
    }
    let q = minimize_quotient(&space, &cfg)?;
    println!("Λ[M] ≈ {:.8}", q.lambda_estimate);
    Ok(())
}
