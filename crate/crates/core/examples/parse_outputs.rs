//! Parses model replies: multiple-choice answers and summary/keyframe
//! outputs in both keyframe styles (`(MM:SS, caption)` and `MM:SS - caption`).
//!
//! ```bash
//! cargo run --example parse_outputs
//! ```

use std::error::Error;

use vidbench::demo::snow_white_outputs;
use vidbench::parsing::{parse_mcq, parse_video_output};

fn run() -> Result<(), Box<dyn Error>> {
    for reply in [
        "C",
        "The answer is (B).",
        "Answer: D. The lanterns are lit at dusk.",
        "I cannot tell.",
    ] {
        match parse_mcq(reply) {
            Ok(a) => println!("{reply:?} -> {} ({:?})", a.letter.as_char(), a.confidence_source),
            Err(e) => println!("{reply:?} -> unparseable: {e}"),
        }
    }
    println!();

    for video in snow_white_outputs().videos {
        for out in video.outputs {
            let parsed = parse_video_output(&out.raw_text);
            println!(
                "{} on {}: valid={}, {} keyframes, summary {} chars",
                out.model,
                video.video_id,
                parsed.valid,
                parsed.keyframes.len(),
                parsed.summary.len()
            );
            for k in parsed.keyframes.iter().take(3) {
                println!("  {}", k.to_paren_line());
            }
        }
    }

    let broken = parse_video_output("Summary: a cooking show.\n\nKey Frames:\n(no timestamps available)\n");
    println!("\nheader without keyframes: valid={}", broken.valid);
    Ok(())
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
