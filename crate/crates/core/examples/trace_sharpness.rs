//! Perturbs the extremal bubble on ℝ³₊ in a handful of directions and
//! checks that each quotient rises above the constant by more than the
//! quadrature uncertainty.

use escobar::sharp_constants::{trace_sharpness, HalfspaceQuad};

fn main() -> escobar::Result<()> {
    let quad = HalfspaceQuad::full3(80.0, 128);
    for m in [0.5, 1.0, 2.0] {
        let r = trace_sharpness(m, &quad, 0.1)?;
        println!("m = {m}: Λ = {:.6}, Q(bubble) = {:.6}", r.lambda, r.bubble.q);
        for p in &r.perturbed {
            println!(
                "  {:<16} Q = {:.6}  margin {:.3e}  budget {:.1e}",
                p.label, p.estimate.q, p.margin, p.budget
            );
        }
    }
    Ok(())
}
