//! Lifts a half-space bubble to ℝⁿ₊ × ℝ^m with a Gaussian profile in the
//! extra variables and compares both sides of the boundary-norm and
//! gradient identities at two resolutions.

use escobar::sharp_constants::{bubble, lift_check, BubbleParams, HalfspaceQuad};

fn main() -> escobar::Result<()> {
    let (m, n, tau) = (2, 3, 1.0);
    let b = bubble(BubbleParams::epsilon(m as f64, n, 1.0))?;
    let mut quad = HalfspaceQuad::new(40.0, 64);
    let mut n_eta = 64;
    for _ in 0..2 {
        let sample = quad.sample(n, |p| b.eval(p))?;
        let c = lift_check(&sample, m, tau, n_eta)?;
        println!(
            "n_rho={:>3}: boundary {:.8} vs {:.8} (rel {:.1e}), gradient {:.8} vs {:.8} (rel {:.1e})",
            quad.n_rho,
            c.boundary_lhs,
            c.boundary_rhs,
            c.boundary_residual,
            c.gradient_lhs,
            c.gradient_rhs,
            c.gradient_residual
        );
        quad = quad.refined();
        n_eta *= 2;
    }
    Ok(())
}
