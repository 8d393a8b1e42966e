//! Changes a space conformally by σ and compares the quotient of the
//! transformed field, with the curvature of the new metric assembled
//! directly, against the original quotient. The gap is discretization
//! error and shrinks under refinement.

use escobar::functionals::{direct_quotient, escobar_quotient};
use escobar::geometry::{conformal_change, conformal_law_residual, Grid, MeasureSpace, ScalarField};

fn main() -> escobar::Result<()> {
    let tau = std::f64::consts::TAU;
    for nodes in [12, 24, 48] {
        let grid = Grid::half_torus(&[nodes, nodes, nodes + 1], &[1.0, 1.0, 1.0])?;
        let space = MeasureSpace::flat_based(grid.clone(), 1.5, |x| 0.3 * x[2] + 0.1 * (tau * x[0]).sin())?;
        let w = ScalarField::from_fn(&grid, |x| 1.0 + 0.3 * x[2] * (tau * x[1]).cos());
        let sigma = ScalarField::from_fn(&grid, |x| 0.4 * (tau * x[0]).sin() * x[2].cos() + 0.2 * x[2] * x[2]);
        let changed = conformal_change(&space, &sigma)?;
        let moved = ScalarField::new(
            w.values.iter().zip(&sigma.values).map(|(v, s)| v * (-s / 2.0).exp()).collect(),
        );
        let q0 = escobar_quotient(&space, &w)?.q;
        let q1 = direct_quotient(&changed, &moved)?.q;
        let res = conformal_law_residual(&space, &sigma, &moved)?;
        println!("{nodes:>2} nodes: Q = {q0:.8}, after change {q1:.8}, energy law residual {res:.2e}");
    }
    Ok(())
}
