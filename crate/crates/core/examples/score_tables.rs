//! Recomputes the published with/without tables from their rows, reports
//! where printed figures disagree with the recomputation, and finds the
//! smallest question counts consistent with the completeness percentages.
//!
//! ```bash
//! cargo run --example score_tables
//! ```

use std::error::Error;

use vidbench::report::{model_table, parse_cell, task_type_table, Table};
use vidbench::scoring::{fmt_percent_2dp, fmt_percent_trimmed, reconcile, PrintedTable, TripleTable};

const TASK_TYPES: &str = include_str!("../fixtures/task_types.json");
const MODELS: &str = include_str!("../fixtures/models.json");
const COMPLETENESS: &str = include_str!("../fixtures/completeness.md");

fn show(table: &PrintedTable, tolerance: f64) {
    let r = reconcile(table, tolerance);
    println!(
        "{}: rows {}, average {}",
        table.title,
        if r.rows_ok() { "ok" } else { "MISMATCH" },
        if r.average_ok() { "ok" } else { "MISMATCH" }
    );
    for d in &r.row_mismatches {
        println!(
            "  row {} {}: printed {} computed {:.4}",
            d.row, d.column, d.printed, d.computed
        );
    }
    for w in &r.warnings {
        println!("  warning: {w}");
    }
}

/// Smallest `(total, answered, correct)` that display as the given
/// percentages.
fn smallest_counts(answered: &str, correct: &str) -> Option<(u64, u64, u64)> {
    for total in 1..=10_000u64 {
        for a in 0..=total {
            if fmt_percent_trimmed(a as f64 / total as f64) != answered {
                continue;
            }
            for c in 0..=a {
                let shown = if a == 0 { 0.0 } else { c as f64 / a as f64 };
                if fmt_percent_2dp(shown) == correct {
                    return Some((total, a, c));
                }
            }
        }
    }
    None
}

fn run() -> Result<(), Box<dyn Error>> {
    let t1: PrintedTable = serde_json::from_str(TASK_TYPES)?;
    let t2: PrintedTable = serde_json::from_str(MODELS)?;
    show(&t1, 0.0015);
    show(&t2, 0.05);

    let computed = TripleTable::from_pairs(t1.rows.iter().map(|r| (r.name.as_str(), r.with, r.without)))?;
    println!("\n{}", task_type_table(&computed).to_markdown());
    let computed = TripleTable::from_pairs(
        t2.rows
            .iter()
            .map(|r| (r.name.as_str(), r.with / 100.0, r.without / 100.0)),
    )?;
    println!("{}", model_table(&computed).to_markdown());

    let t3 = Table::parse_markdown(COMPLETENESS)?;
    println!("Completeness rows and the smallest question counts that print the same:");
    for row in &t3.rows {
        let time = parse_cell(&row[1])
            .map(|ms| format!("{:.1} h", ms / 3.6e6))
            .unwrap_or_else(|| "-".into());
        let counts = smallest_counts(&row[2], &row[3])
            .map(|(n, a, c)| format!("{c}/{a} correct of {n} questions"))
            .unwrap_or_else(|| "none below 10000".into());
        println!("  {:<36} {:>7}  {:>6} {:>7}  {counts}", row[0], time, row[2], row[3]);
    }
    Ok(())
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
