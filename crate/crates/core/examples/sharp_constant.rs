//! Closed-form half-space constants next to the quotient of the extremal
//! bubble integrated on a truncated half-space, for a few (m, n).
//!
//!     cargo run --example sharp_constant

use escobar::sharp_constants::{constant_table, write_constant_csv, HalfspaceQuad};

fn main() -> escobar::Result<()> {
    let pairs = [(0.0, 3), (0.5, 3), (1.0, 3), (2.0, 3), (1.0, 4), (3.5, 5)];
    let quad = HalfspaceQuad::new(40.0, 128);
    let rows = constant_table(&pairs, &quad)?;
    write_constant_csv(&rows, std::io::stdout())?;
    for r in &rows {
        eprintln!("m={:<4} n={}  rel. gap {:.2e}", r.m, r.n, r.rel_error);
    }
    Ok(())
}
