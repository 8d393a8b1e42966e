//! Sweeps the slope a of φ = a·t. While the first Dirichlet eigenvalue ρ₁
//! of the conformal Laplacian is positive the minimizer converges; once it
//! turns negative the quotient along ψ_t = t·φ₁ + 1 falls without bound.

use escobar::geometry::{Grid, MeasureSpace};
use escobar::minimizer::{blowup_scan, dirichlet_rho1, geomspace, minimize_quotient, MinimizerConfig};

fn main() -> escobar::Result<()> {
    let grid = Grid::half_torus(&[16, 16, 17], &[1.0, 1.0, 1.0])?;
    let ts = geomspace(1.0, 1e4, 20);
    for a in [2.0, 5.0, 8.0, 10.0] {
        let space = MeasureSpace::flat_based(grid.clone(), 0.5, |x| a * x[2])?;
        let eig = dirichlet_rho1(&space, 1e-10)?;
        if eig.is_indeterminate() {
            println!("a = {a:>4}: ρ₁ = {:+.4} inside the band ±{:.3}", eig.rho1, eig.band);
        } else if eig.rho1 > 0.0 {
            let r = minimize_quotient(&space, &MinimizerConfig::default())?;
            println!("a = {a:>4}: ρ₁ = {:+.4}, Λ[M] ≈ {:.6} (converged {})", eig.rho1, r.lambda_estimate, r.converged);
        } else {
            let scan = blowup_scan(&space, &eig, &ts)?;
            println!(
                "a = {a:>4}: ρ₁ = {:+.4}, min Q(ψ_t) = {:.3e}, decreasing tail {}",
                eig.rho1, scan.min_q, scan.decreasing_tail
            );
        }
    }
    Ok(())
}
