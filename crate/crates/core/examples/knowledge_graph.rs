//! Builds the two-model comparison graph for the Snow White stage video,
//! lays it out, measures how tightly each model's keyframes cluster and
//! writes DOT and JSON exports.
//!
//! ```bash
//! cargo run --example knowledge_graph [out-dir]
//! dot -Kneato -n -Tsvg out-dir/graph_P69idA8JO98.dot > graph.svg
//! ```

use std::error::Error;
use std::path::PathBuf;

use vidbench::demo::snow_white_outputs;
use vidbench::knowledge_graph::{build_comparison_graph, fr_layout, graph_metrics, to_dot, to_json, KEYFRAMES};
use vidbench::parsing::KeyframeParser;
use vidbench::LayoutParams;

fn run() -> Result<(), Box<dyn Error>> {
    let out_dir = std::env::args().nth(1).map(PathBuf::from);
    let outputs = snow_white_outputs();
    let parsed = outputs.parsed(&KeyframeParser::default());

    for (video_id, models) in &parsed {
        let graph = build_comparison_graph(models)?;
        let params = LayoutParams {
            area: 100.0,
            seed: 7,
            ..LayoutParams::default()
        };
        let positions = fr_layout(&graph, &params);
        let metrics = graph_metrics(&graph, &positions, KEYFRAMES)?;

        println!("{video_id}: {} nodes, {} edges", graph.node_count(), graph.edge_count());
        for (model, out) in models {
            println!("  {model}: {} keyframes", out.keyframes.len());
        }
        println!("  mean pairwise distance {:.3}", metrics.mean_pairwise_distance);
        for (model, spread) in &metrics.clusters {
            println!(
                "  {model}: {} nodes, spread {:.3}, mean hops to {KEYFRAMES} {:.2}",
                spread.nodes, spread.mean_pairwise_distance, spread.mean_hops_to_center
            );
        }

        let dot = to_dot(&graph, &positions)?;
        let json = to_json(&graph, &positions)?;
        match &out_dir {
            Some(dir) => {
                std::fs::create_dir_all(dir)?;
                std::fs::write(dir.join(format!("graph_{video_id}.dot")), &dot)?;
                std::fs::write(dir.join(format!("graph_{video_id}.json")), &json)?;
                println!("  wrote {}", dir.display());
            }
            None => println!("{}", dot.lines().take(8).collect::<Vec<_>>().join("\n")),
        }
    }
    Ok(())
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
