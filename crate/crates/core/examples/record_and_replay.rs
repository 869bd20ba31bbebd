//! Records a scripted VLM exchange into a cassette store, then replays it
//! without any backend. Changing a frame's bytes changes the cassette key,
//! so the replay misses.
//!
//! ```bash
//! cargo run --example record_and_replay
//! ```

use std::error::Error;
use std::sync::Arc;

use vidbench::providers::{CassetteStore, ScriptedBackend};
use vidbench::{AttentionKind, ConditionTag, ModelResponse, Providers, ResponseStatus};

fn run() -> Result<(), Box<dyn Error>> {
    let dir = tempfile::tempdir()?;
    let frames: Vec<_> = (0..4)
        .map(|i| {
            let p = dir.path().join(format!("frame_{i}.jpg"));
            std::fs::write(&p, format!("pixels {i}")).map(|_| p)
        })
        .collect::<Result<_, _>>()?;
    let condition = ConditionTag {
        fps: 0.1,
        with_transcript: false,
        attention: AttentionKind::Sdpa,
        gpu: "A10G".into(),
        model_name: "qwen2-vl-7b".into(),
    };

    let backend = ScriptedBackend::new(|_, payload| {
        if payload.frames.len() > 3 {
            return ModelResponse::failed(ResponseStatus::Oom, 900, "CUDA out of memory");
        }
        let text = format!(
            "Summary: {} frames of a lakeside walk.\n\nKey Frames:\n(00:00, A path by the water)\n(00:20, Ducks near the shore)\n",
            payload.frames.len()
        );
        ModelResponse::ok(text, 1200)
    });

    let store = dir.path().join("cassettes");
    let live = Providers::live(CassetteStore::open(&store)?, 2).with_backend("qwen2-vl-7b", Arc::new(backend));
    let recorded = live.describe_video(&frames[..3], "Describe the video.", "qwen2-vl-7b", &condition)?;
    println!(
        "live:   {:?}, {} ms\n{}",
        recorded.status, recorded.latency_ms, recorded.raw_text
    );
    let oom = live.describe_video(&frames, "Describe the video.", "qwen2-vl-7b", &condition)?;
    println!(
        "live with 4 frames: {:?} ({})",
        oom.status,
        oom.detail.as_deref().unwrap_or("")
    );

    let replay = Providers::replay(CassetteStore::open(&store)?);
    let replayed = replay.describe_video(&frames[..3], "Describe the video.", "qwen2-vl-7b", &condition)?;
    println!("replay identical: {}", replayed == recorded);
    println!("cassettes on disk: {}", replay.store().len()?);

    std::fs::write(&frames[1], "different pixels")?;
    match replay.describe_video(&frames[..3], "Describe the video.", "qwen2-vl-7b", &condition) {
        Ok(_) => println!("unexpected hit after editing a frame"),
        Err(e) => println!("after editing a frame: {e}"),
    }
    Ok(())
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
