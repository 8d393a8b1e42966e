//! Minimizes the quotient on a slab with a linear potential steep enough
//! to make the constant negative, at two grid resolutions, and checks the
//! Euler-Lagrange residual of the minimizer.

use escobar::geometry::{Grid, MeasureSpace};
use escobar::minimizer::{el_residual, minimize_quotient, MinimizerConfig};

fn main() -> escobar::Result<()> {
    let cfg = MinimizerConfig::default();
    for nodes in [16, 32] {
        let grid = Grid::half_torus(&[nodes, nodes, nodes + 1], &[1.0, 1.0, 1.0])?;
        let space = MeasureSpace::flat_based(grid, 0.5, |x| 2.0 * x[2])?;
        let r = minimize_quotient(&space, &cfg)?;
        let el = el_residual(&space, &r.field, r.lambda_estimate)?;
        println!(
            "{nodes:>2} nodes: Λ[M] ≈ {:.8} from `{}` in {} iterations; EL residual {:.1e} / {:.1e}",
            r.lambda_estimate, r.best_start, r.iterations, el.interior, el.boundary
        );
    }
    Ok(())
}
