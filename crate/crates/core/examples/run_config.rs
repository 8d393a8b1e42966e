//! Runs a command from a TOML file through the same path as the binary.
//!
//!     cargo run --example run_config -- examples/configs/eigen.toml

use escobar::cli::{parse_config, run};

fn main() -> escobar::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/examples/configs/eigen.toml").into());
    let cfg = parse_config(&std::fs::read_to_string(path)?)?;
    let out = run(&cfg)?;
    println!("{}", serde_json::to_string_pretty(&out.report["result"])?);
    for f in &out.files {
        eprintln!("wrote {}", f.display());
    }
    Ok(())
}
