//! Replays the bundled 10-question, 2-condition demo from its cassettes and
//! prints the resulting tables. No network or GPU is needed.
//!
//! ```bash
//! cargo run --example replay_demo [out-dir]
//! ```

use std::error::Error;
use std::path::{Path, PathBuf};

use vidbench::cli;

fn run() -> Result<(), Box<dyn Error>> {
    let demo = Path::new(env!("CARGO_MANIFEST_DIR")).join("demo");
    let tmp = tempfile::tempdir()?;
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| tmp.path().to_path_buf());

    let args = [
        "vidbench".into(),
        "evaluate".into(),
        "--config".into(),
        demo.join("config.json").into_os_string(),
        "--replay".into(),
        "--out-dir".into(),
        out.clone().into_os_string(),
    ];
    let code = cli::run(args);
    if code != cli::EXIT_OK {
        return Err(format!("evaluate exited with {code}").into());
    }

    for name in ["table3_completeness.md", "table1_task_type.md", "table2_model.md"] {
        println!("{name}\n{}", std::fs::read_to_string(out.join(name))?);
    }
    let manifest = std::fs::read_to_string(out.join("manifest.jsonl"))?;
    println!("manifest.jsonl: {} lines", manifest.lines().count());
    Ok(())
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
