//! Probes a media file from ffprobe JSON, then plans frame sampling and
//! segment splits at the sampling rates used in the ablation runs.
//!
//! ```bash
//! cargo run --example plan_media
//! ```

use std::error::Error;
use std::path::Path;

use vidbench::media::{asset_from_probe_json, plan_frames, plan_split};

const PROBE: &str = r#"{
  "format": {"format_name": "mov,mp4,m4a,3gp,3g2,mj2", "duration": "660.0",
             "tags": {"major_brand": "isom"}},
  "streams": [
    {"codec_type": "video", "width": 1280, "height": 720},
    {"codec_type": "audio"}
  ]
}"#;

fn run() -> Result<(), Box<dyn Error>> {
    let asset = asset_from_probe_json(Path::new("media/P69idA8JO98.mp4"), PROBE)?;
    println!(
        "{}: {:?} {:?}, {:.0}s, {}x{}, audio={}",
        asset.key(),
        asset.kind,
        asset.container,
        asset.duration_s,
        asset.width_px.unwrap_or(0),
        asset.height_px.unwrap_or(0),
        asset.has_audio()
    );

    for fps in [1.0, 0.1, 0.01, 0.001] {
        let plan = plan_frames(&asset, fps)?;
        let head: Vec<String> = plan.timestamps_s.iter().take(4).map(|t| format!("{t}")).collect();
        println!(
            "  {fps:>6} fps -> {:>3} frames [{} ...]",
            plan.timestamps_s.len(),
            head.join(", ")
        );
    }

    let split = plan_split(&asset, 240.0, 30.0)?;
    println!(
        "  split into {} segments of <= 240s with 30s overlap:",
        split.segments.len()
    );
    for (start, end) in &split.segments {
        println!("    {start:>5.0}s .. {end:>5.0}s");
    }
    Ok(())
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
