//! Regenerates the demo bundle (media stand-ins, frames, transcripts,
//! cassettes, annotations and config) in `crates/core/demo`.
//!
//! ```bash
//! cargo run --example build_demo
//! ```

use std::path::PathBuf;

fn main() {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("demo"));
    if let Err(e) = vidbench::demo::build_demo(&dir) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
    println!("demo bundle written to {}", dir.display());
}
