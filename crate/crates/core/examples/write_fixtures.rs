//! Regenerates the curated fixture suite.
//!
//! Usage: `cargo run -p stepnav --example write_fixtures [DIR]` (default
//! `fixtures/` at the workspace root).

use std::path::PathBuf;

fn main() -> stepnav::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures"));
    stepnav::harness::fixtures::write_suite(&dir)?;
    for f in stepnav::harness::fixtures::all() {
        println!("{}/{}", dir.display(), f.id);
    }
    Ok(())
}
