//! Glues shrinking bubbles into a flat slab at a boundary point and tracks
//! the quotient as the scale τ shrinks, plus the decay exponent of the
//! cutoff error on the annulus.

use escobar::geometry::{Grid, MeasureSpace};
use escobar::minimizer::{annulus_exponent_fit, annulus_exponent_predicted, aubin_scan, geomspace};

fn main() -> escobar::Result<()> {
    let (m, n, eps) = (1.0, 3, 0.25);
    let grid = Grid::half_torus(&[32, 32, 33], &[1.0, 1.0, 0.5])?;
    let space = MeasureSpace::flat_based(grid, m, |_| 0.0)?;
    let scan = aubin_scan(&space, &[0.5, 0.5], &geomspace(1e-2, 1e-3, 7), eps)?;
    println!("Λ = {:.6}", scan.lambda_mn);
    for r in &scan.rows {
        println!("τ = {:.3e}  Q = {:.6}  Q/Λ = {:.4}", r.tau, r.q, r.ratio);
    }
    let fit = annulus_exponent_fit(m, n, eps, &[1e-4, 1e-5, 1e-6])?;
    println!("annulus exponent: fit {fit:.4}, predicted {:.4}", annulus_exponent_predicted(m, n));
    Ok(())
}
