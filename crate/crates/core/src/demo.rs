//! The bundled demo: five stand-in videos, ten questions, two conditions
//! and the cassettes that let the whole pipeline replay offline.
//!
//! [`build_demo`] regenerates the bundle under `crates/core/demo/`. Media
//! files hold probe JSON instead of real streams and frames are a few bytes
//! each; model answers come from [`scripted_backend`], recorded once through
//! the live path so the cassettes look exactly like real recordings.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde_json::{json, Value};
use thiserror::Error;

use crate::benchmark::{BenchmarkError, BenchmarkRunner, RunSettings};
use crate::knowledge_graph::LayoutParams;
use crate::media::{frame_file_name, plan_frames, CommandTemplate, MediaAsset, MediaError, MediaTool};
use crate::parsing::KeyframeEntry;
use crate::providers::{
    AttentionKind, CassetteStore, ConditionTag, Modality, ModelRequest, ModelResponse, Payload, ProviderError,
    Providers, ResponseStatus, ScriptedBackend,
};
use crate::report::{ModelOutput, OutputsFile, VideoOutputs};
use crate::scoring::VideoAnnotation;

pub const VLM_PROVIDER: &str = "qwen2-vl-7b";
pub const ASR_PROVIDER: &str = "whisper-large-v3";
pub const SNOW_WHITE: &str = "P69idA8JO98";

#[derive(Debug, Error)]
pub enum DemoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Media(#[from] MediaError),
    #[error(transparent)]
    Provider(#[from] ProviderError),
    #[error(transparent)]
    Benchmark(#[from] BenchmarkError),
}

type Result<T> = std::result::Result<T, DemoError>;

struct Video {
    video_id: &'static str,
    key: &'static str,
    duration: &'static str,
    domain: &'static str,
    sub_category: &'static str,
    seconds: u32,
    audio: bool,
    transcript: &'static [(f64, f64, &'static str)],
}

const VIDEOS: [Video; 5] = [
    Video {
        video_id: "001",
        key: "fFjy93ACGo8",
        duration: "short",
        domain: "Knowledge",
        sub_category: "Humanity & History",
        seconds: 95,
        audio: true,
        transcript: &[
            (
                0.0,
                6.5,
                "Good evening. Tonight we look at where our Christmas decorations come from.",
            ),
            (
                6.5,
                14.0,
                "Tinsel was first made in Germany from strips of real silver.",
            ),
            (
                14.0,
                23.0,
                "Glass baubles followed in the 1840s, blown by hand in small workshops.",
            ),
        ],
    },
    Video {
        video_id: "002",
        key: "Lk3Vq8sTzA1",
        duration: "short",
        domain: "Film & Television",
        sub_category: "Animation",
        seconds: 70,
        audio: true,
        transcript: &[
            (0.0, 5.0, "When the clock strikes twelve, the fox has to run home."),
            (
                41.0,
                47.0,
                "Four lanterns glow along the river as the village falls asleep.",
            ),
        ],
    },
    Video {
        video_id: "003",
        key: "bR7mYc2Xw0Q",
        duration: "medium",
        domain: "Sports Competition",
        sub_category: "Basketball",
        seconds: 300,
        audio: true,
        transcript: &[
            (
                120.0,
                128.0,
                "At the half it is forty-two to thirty-eight for the home side.",
            ),
            (
                212.0,
                220.0,
                "Out of the timeout the visitors run a fast break and dunk.",
            ),
        ],
    },
    Video {
        video_id: "004",
        key: "Hc9Pn4dUe6E",
        duration: "medium",
        domain: "Life Record",
        sub_category: "Cooking",
        seconds: 240,
        audio: false,
        transcript: &[],
    },
    Video {
        video_id: "005",
        key: SNOW_WHITE,
        duration: "long",
        domain: "Artistic Performance",
        sub_category: "Stage Play",
        seconds: 660,
        audio: true,
        transcript: &[
            (5.0, 12.0, "Mirror, mirror on the wall, who is the fairest of them all?"),
            (
                170.0,
                178.0,
                "Take this apple, my dear. One bite and all your dreams come true.",
            ),
            (445.0, 452.0, "She is waking up! The spell is broken!"),
        ],
    },
];

#[derive(Clone, Copy)]
enum Reply {
    Correct,
    Wrong(char),
    Oom,
    Unparseable,
}

struct Question {
    video: usize,
    question_id: &'static str,
    task_type: &'static str,
    question: &'static str,
    options: [&'static str; 4],
    answer: char,
    without: Reply,
    with: Reply,
}

const QUESTIONS: [Question; 10] = [
    Question {
        video: 0,
        question_id: "001-1",
        task_type: "Object Recognition",
        question: "Which decoration does the presenter say was first made from real silver?",
        options: ["Glass baubles.", "Wreaths.", "Tinsel.", "Candles."],
        answer: 'C',
        without: Reply::Wrong('A'),
        with: Reply::Correct,
    },
    Question {
        video: 0,
        question_id: "001-2",
        task_type: "Information Synopsis",
        question: "What is the genre of this video?",
        options: [
            "It is a news report that introduces the history behind Christmas decorations.",
            "It is a documentary on the evolution of Christmas holiday recipes.",
            "It is a travel vlog exploring Christmas markets around the world.",
            "It is a tutorial on DIY Christmas ornament crafting.",
        ],
        answer: 'A',
        without: Reply::Correct,
        with: Reply::Correct,
    },
    Question {
        video: 1,
        question_id: "002-1",
        task_type: "Action Recognition",
        question: "What is the fox doing when the clock strikes twelve?",
        options: ["Running home.", "Sleeping.", "Digging a hole.", "Singing."],
        answer: 'A',
        without: Reply::Correct,
        with: Reply::Correct,
    },
    Question {
        video: 1,
        question_id: "002-2",
        task_type: "Counting Problem",
        question: "How many lanterns are lit along the river at the end?",
        options: ["Two.", "Three.", "Four.", "Five."],
        answer: 'C',
        without: Reply::Wrong('B'),
        with: Reply::Wrong('D'),
    },
    Question {
        video: 2,
        question_id: "003-1",
        task_type: "OCR Problems",
        question: "What score is shown on the board at halftime?",
        options: ["38-42.", "42-38.", "40-38.", "42-40."],
        answer: 'B',
        without: Reply::Wrong('A'),
        with: Reply::Correct,
    },
    Question {
        video: 2,
        question_id: "003-2",
        task_type: "Temporal Reasoning",
        question: "What happens right after the timeout?",
        options: [
            "The home side shoots a free throw.",
            "The referee stops the clock.",
            "The coach is sent off.",
            "The visitors score on a fast break.",
        ],
        answer: 'D',
        without: Reply::Correct,
        with: Reply::Unparseable,
    },
    Question {
        video: 3,
        question_id: "004-1",
        task_type: "Attribute Perception",
        question: "What colour is the mixing bowl?",
        options: ["Red.", "Blue.", "White.", "Green."],
        answer: 'B',
        without: Reply::Correct,
        with: Reply::Correct,
    },
    Question {
        video: 3,
        question_id: "004-2",
        task_type: "Spatial Perception",
        question: "Where is the kettle placed relative to the stove?",
        options: ["To its left.", "On top of it.", "To its right.", "Behind it."],
        answer: 'A',
        without: Reply::Wrong('C'),
        with: Reply::Wrong('C'),
    },
    Question {
        video: 4,
        question_id: "005-1",
        task_type: "Information Synopsis",
        question: "Which story is being performed on stage?",
        options: ["Cinderella.", "Snow White.", "Sleeping Beauty.", "Rapunzel."],
        answer: 'B',
        without: Reply::Correct,
        with: Reply::Correct,
    },
    Question {
        video: 4,
        question_id: "005-2",
        task_type: "Temporal Perception",
        question: "What happens to Snow White after she bites the apple?",
        options: [
            "She collapses and is later woken by the Prince.",
            "She runs back to the castle.",
            "She shares the apple with the dwarfs.",
            "She hides in the forest.",
        ],
        answer: 'A',
        without: Reply::Wrong('C'),
        with: Reply::Oom,
    },
];

/// Summary responses per video: `(without transcript, with transcript)`.
fn summary_texts(key: &str) -> (String, String) {
    match key {
        "fFjy93ACGo8" => (
            "Summary: A presenter talks about Christmas decorations in front of a decorated tree.\n\nKey Frames:\n(00:00, Presenter at a desk beside a tree)\n(00:40, Close-up of glass ornaments)\n(01:20, Presenter wraps up)".into(),
            "Summary: A news segment on the history of Christmas decorations, from silver tinsel in Germany to hand-blown glass baubles.\n\nKey Frames:\n(00:00, Presenter introduces the topic)\n(00:10, Archive photo of tinsel makers)\n(00:20, Glass baubles being blown)\n(01:20, Presenter signs off)".into(),
        ),
        "Lk3Vq8sTzA1" => (
            "Summary: An animated short about a fox in a village at night.\n\nKey Frames:\n00:00 - Village clock tower\n00:30 - Fox running through streets\n01:00 - Lanterns by the river".into(),
            "Summary: An animated short in which a fox races home at midnight while the village lights lanterns along the river.\n\nKey Frames:\n00:00 - Clock strikes twelve\n00:20 - Fox running home\n00:40 - Four lanterns glowing by the river".into(),
        ),
        "bR7mYc2Xw0Q" => (
            "Summary: Highlights from a basketball game.\n\nKey Frames:\n(00:30, Tip-off)\n(02:00, Scoreboard at halftime)\n(03:30, Timeout huddle)\n(04:40, Final buzzer)".into(),
            "Summary: Highlights from a basketball game that the home side leads 42-38 at the half before the visitors answer with a fast-break dunk after a timeout.\n\nKey Frames:\n(00:30, Tip-off)\n(02:00, Halftime scoreboard 42-38)\n(03:30, Timeout huddle)\n(03:32, Fast-break dunk)\n(04:40, Final buzzer)".into(),
        ),
        "Hc9Pn4dUe6E" => (
            "Summary: Someone cooks in a home kitchen.\n\nKey Frames:\nNo distinct key frames could be identified.".into(),
            "Summary: A silent cooking video: batter is mixed in a blue bowl and poured into a pan on the stove.\n\nKey Frames:\n(00:10, Ingredients laid out)\n(01:30, Mixing batter in a blue bowl)\n(03:20, Pouring batter into the pan)".into(),
        ),
        _ => (
            "A fairy tale performance, likely Snow White and the Seven Dwarfs. The video introduces characters, a forest scene, a confrontation between a queen and a prince, interactions between Snow White and the dwarfs, and ends with a song.\n\n(00:00, Introduction of characters and setting)\n(02:00, Scene with group of people in a forest)\n(04:00, Confrontation between a queen and a prince)\n(06:00, Introduction of the dwarfs as Snow White's friends)\n(08:00, Scenes of the dwarfs working and interacting with Snow White)\n(10:00, Snow White singing a song with the dwarfs)".into(),
            "Summary: A stage performance of Snow White. The Queen asks the Magic Mirror who is fairest, tricks Snow White with a poisoned apple, and the Prince breaks the spell.\n\nKey Frames:\n(00:00, Queen before the Magic Mirror)\n(01:30, Snow White sent into the forest)\n(02:50, Queen offers the apple)\n(03:10, Snow White collapses)\n(05:00, Dwarfs mourn by the coffin)\n(07:25, Prince breaks the spell)\n(10:00, Final song)".into(),
        ),
    }
}

fn ground_truth(key: &str) -> Vec<(u32, &'static str)> {
    match key {
        "fFjy93ACGo8" => vec![(0, "Presenter introduces Christmas decorations"), (21, "Glass baubles")],
        "Lk3Vq8sTzA1" => vec![(0, "Clock strikes twelve"), (41, "Four lanterns by the river")],
        "bR7mYc2Xw0Q" => vec![(120, "Halftime scoreboard"), (212, "Fast break after timeout")],
        "Hc9Pn4dUe6E" => vec![(90, "Mixing batter"), (200, "Pouring batter")],
        _ => vec![
            (8, "Magic Mirror"),
            (172, "Poisoned apple"),
            (446, "Snow White revived"),
        ],
    }
}

pub fn conditions() -> Vec<ConditionTag> {
    [false, true]
        .into_iter()
        .map(|with_transcript| ConditionTag {
            fps: 0.1,
            with_transcript,
            attention: AttentionKind::Sdpa,
            gpu: "A10G".into(),
            model_name: VLM_PROVIDER.into(),
        })
        .collect()
}

fn letter(c: char) -> usize {
    (c as u8 - b'A') as usize
}

/// The dataset in Video-MME field layout (options as `"A. text"` strings).
pub fn dataset_json() -> Value {
    QUESTIONS
        .iter()
        .map(|q| {
            let v = &VIDEOS[q.video];
            json!({
                "video_id": v.video_id,
                "duration": v.duration,
                "domain": v.domain,
                "sub_category": v.sub_category,
                "url": format!("https://www.youtube.com/watch?v={}", v.key),
                "videoID": v.key,
                "question_id": q.question_id,
                "task_type": q.task_type,
                "question": q.question,
                "options": q.options.iter().zip(['A', 'B', 'C', 'D']).map(|(t, l)| format!("{l}. {t}")).collect::<Vec<_>>(),
                "answer": q.answer.to_string(),
            })
        })
        .collect()
}

fn probe_json(v: &Video) -> Value {
    let mut streams = vec![json!({"codec_type": "video", "codec_name": "h264", "width": 640, "height": 360})];
    if v.audio {
        streams.push(json!({"codec_type": "audio", "codec_name": "aac"}));
    }
    json!({
        "streams": streams,
        "format": {
            "format_name": "mov,mp4,m4a,3gp,3g2,mj2",
            "duration": format!("{:.6}", v.seconds as f64),
            "tags": {"major_brand": "isom"}
        }
    })
}

fn asr_body(v: &Video) -> String {
    let segments: Vec<Value> = v
        .transcript
        .iter()
        .enumerate()
        .map(|(i, (s, e, t))| json!({"id": i, "start": s, "end": e, "text": format!(" {t}")}))
        .collect();
    let text: String = v.transcript.iter().map(|(_, _, t)| format!(" {t}")).collect();
    json!({"text": text, "segments": segments, "language": "en"}).to_string()
}

fn mcq_reply(q: &Question, reply: Reply, frames: usize, transcript: bool) -> ModelResponse {
    let latency = 900 + 420 * frames as u64 + if transcript { 1500 } else { 0 };
    let idx = QUESTIONS
        .iter()
        .position(|x| x.question_id == q.question_id)
        .unwrap_or(0);
    let say = |c: char| match idx % 4 {
        0 => format!("The answer is {c}."),
        1 => c.to_string(),
        2 => format!("({c}) {}", q.options[letter(c)]),
        _ => format!("Answer: {c}"),
    };
    match reply {
        Reply::Correct => ModelResponse::ok(say(q.answer), latency),
        Reply::Wrong(c) => ModelResponse::ok(say(c), latency),
        Reply::Unparseable => ModelResponse::ok("I cannot determine this from the frames provided.", latency),
        Reply::Oom => ModelResponse::failed(
            ResponseStatus::Oom,
            61_000,
            "torch.OutOfMemoryError: CUDA out of memory. Tried to allocate 2.31 GiB",
        ),
    }
}

fn video_of_frames(payload: &Payload) -> Option<&'static Video> {
    let first = String::from_utf8_lossy(payload.frames.first()?).into_owned();
    VIDEOS.iter().find(|v| first.split_whitespace().nth(1) == Some(v.key))
}

/// Deterministic stand-in for the demo's ASR and VLM endpoints.
pub fn scripted_backend() -> ScriptedBackend {
    ScriptedBackend::new(|req: &ModelRequest, payload: &Payload| {
        let with_transcript = req.condition.as_ref().is_some_and(|c| c.with_transcript);
        match req.modality {
            Modality::Asr => {
                let key = req
                    .audio_ref
                    .as_ref()
                    .and_then(|p| p.file_stem())
                    .map(|s| s.to_string_lossy().into_owned());
                match VIDEOS.iter().find(|v| Some(v.key) == key.as_deref()) {
                    Some(v) => ModelResponse::ok(asr_body(v), 3000 + 40 * v.seconds as u64),
                    None => ModelResponse::failed(ResponseStatus::Invalid, 10, "unknown audio"),
                }
            }
            Modality::Vlm => {
                let frames = payload.frames.len();
                if let Some(q) = QUESTIONS.iter().find(|q| req.prompt.contains(q.question)) {
                    let reply = if with_transcript { q.with } else { q.without };
                    return mcq_reply(q, reply, frames, with_transcript);
                }
                match video_of_frames(payload) {
                    Some(v) => {
                        let (without, with) = summary_texts(v.key);
                        let text = if with_transcript { with } else { without };
                        ModelResponse::ok(text, 2500 + 600 * frames as u64)
                    }
                    None => ModelResponse::failed(ResponseStatus::Invalid, 10, "unknown video"),
                }
            }
            Modality::Llm => ModelResponse::failed(ResponseStatus::Invalid, 10, "no refinement model in the demo"),
        }
    })
}

/// The two outputs compared in the knowledge-graph figure, in the outputs
/// file layout read by `vidbench graph`.
pub fn snow_white_outputs() -> OutputsFile {
    let gemini: [(&str, &str); 16] = [
        ("00:08", "Magic Mirror reveals an angry face"),
        ("00:42", "Snow White in rags looking at her stepmother"),
        ("00:46", "The Evil Queen on a castle balcony"),
        ("01:27", "Dopey Dwarf dancing in silk costume"),
        ("01:37", "Ethereal dancer twirling with a deer"),
        ("02:17", "Snow White with basket approaching animals"),
        ("02:57", "Snow White collapses onto a stage of rocks"),
        ("03:42", "Snow White at a wishing well"),
        ("05:09", "The Evil Queen on a balcony speaking to a soldier"),
        ("05:37", "Snow White dancing in her new dress"),
        ("06:09", "Snow White and her prince hold hands"),
        ("07:02", "Snow White falls, animals mourn her"),
        ("07:26", "The Prince awakens Snow White with a kiss"),
        ("08:00", "Snow White is held up for celebration"),
        ("08:07", "Evil Queen standing on castle balcony"),
        ("09:05", "Snow White lies in a glass coffin as prince kneels"),
    ];
    let mut gemini_text = String::from(
        "Summary: A stage performance of Snow White. The Evil Queen consults the Magic Mirror, instructs Snow White to clean the castle, and the story unfolds as Snow White meets the Seven Dwarfs, receives the poisoned apple, collapses, and is revived by the Prince.\n\nKey Frames:\n",
    );
    for (t, c) in gemini {
        gemini_text.push_str(&format!("{t} - {c}\n"));
    }
    OutputsFile {
        videos: vec![VideoOutputs {
            video_id: SNOW_WHITE.into(),
            outputs: vec![
                ModelOutput {
                    model: "Gemini-2-Flash".into(),
                    raw_text: gemini_text,
                },
                ModelOutput {
                    model: "Qwen-7B".into(),
                    raw_text: summary_texts(SNOW_WHITE).0,
                },
            ],
        }],
    }
}

fn write(path: &Path, body: impl AsRef<[u8]>) -> Result<()> {
    let io = |source| DemoError::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(io)?;
    }
    std::fs::write(path, body).map_err(io)
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    let mut body = serde_json::to_string_pretty(value).expect("demo data serializes");
    body.push('\n');
    write(path, body)
}

fn clear(path: &Path) -> Result<()> {
    let io = |source| DemoError::Io {
        path: path.to_path_buf(),
        source,
    };
    if path.is_dir() {
        std::fs::remove_dir_all(path).map_err(io)?;
    } else if path.exists() {
        std::fs::remove_file(path).map_err(io)?;
    }
    Ok(())
}

/// Regenerates the demo bundle in `dir`. Only the bundle's own files and
/// directories are replaced.
pub fn build_demo(dir: &Path) -> Result<()> {
    for sub in ["media", "frames", "transcripts", "cassettes", "out"] {
        clear(&dir.join(sub))?;
    }

    let probe = CommandTemplate::new("cat", &["{input}"]);
    let tool = MediaTool::new(probe.clone(), CommandTemplate::new("cp", &["{input}", "{output}"]));
    let mut assets: Vec<MediaAsset> = Vec::new();
    for v in &VIDEOS {
        let rel = PathBuf::from(format!("media/{}.mp4", v.key));
        let path = dir.join(&rel);
        write(&path, serde_json::to_string_pretty(&probe_json(v)).expect("probe json"))?;
        let mut asset = tool.probe(&path)?;
        let plan = plan_frames(&asset, 0.1)?;
        for t in &plan.timestamps_s {
            let ms = (t * 1000.0).round() as u64;
            write(
                &dir.join("frames").join(v.key).join(frame_file_name(*t, "jpg")),
                format!("frame {} {ms}\n", v.key),
            )?;
        }
        asset.path = path;
        assets.push(asset);
    }
    let relative: Vec<MediaAsset> = assets
        .iter()
        .map(|a| MediaAsset {
            path: a
                .path
                .strip_prefix(dir)
                .map(Path::to_path_buf)
                .unwrap_or_else(|_| a.path.clone()),
            ..a.clone()
        })
        .collect();
    write_json(&dir.join("inventory.json"), &relative)?;
    write_json(&dir.join("dataset.json"), &dataset_json())?;

    let backend = Arc::new(scripted_backend());
    let providers = Providers::live(CassetteStore::open(dir.join("cassettes"))?, 4)
        .with_backend(ASR_PROVIDER, backend.clone())
        .with_backend(VLM_PROVIDER, backend);
    for a in assets.iter().filter(|a| a.has_audio()) {
        let t = providers.transcribe(a, ASR_PROVIDER)?;
        write_json(&dir.join("transcripts").join(format!("{}.json", a.key())), &t)?;
    }

    let items = crate::benchmark::load_dataset(dir.join("dataset.json")).map_err(BenchmarkError::from)?;
    let mut settings = RunSettings::new("dataset.json", conditions(), dir.join("frames"));
    settings.transcripts_dir = Some(dir.join("transcripts"));
    settings.summaries = true;
    settings.workers = 1;
    let recording = dir.join("recording.jsonl");
    BenchmarkRunner::new(&providers, &items, assets.clone(), settings).run(&recording)?;
    for suffix in ["", ".timings", ".partial"] {
        clear(&PathBuf::from(format!("{}{suffix}", recording.display())))?;
    }

    let annotations: indexmap::IndexMap<String, VideoAnnotation> = VIDEOS
        .iter()
        .map(|v| {
            let keyframes = ground_truth(v.key)
                .into_iter()
                .map(|(t, c)| KeyframeEntry::new(t, c).expect("valid keyframe"))
                .collect();
            let verdicts = conditions()
                .into_iter()
                .map(|c| {
                    // The richer, transcript-grounded summaries are judged correct.
                    let ok = c.with_transcript || v.key == "fFjy93ACGo8";
                    (c.label(), ok)
                })
                .collect();
            (
                v.key.to_string(),
                VideoAnnotation {
                    keyframes,
                    summary_verdicts: verdicts,
                },
            )
        })
        .collect();
    write_json(&dir.join("annotations.json"), &annotations)?;
    write_json(&dir.join("snow_white_outputs.json"), &snow_white_outputs())?;

    write_json(
        &dir.join("providers.json"),
        &json!({"providers": [
            {
                "id": ASR_PROVIDER,
                "modality": "asr",
                "endpoint": "http://localhost:8000/v1/audio/transcriptions",
                "model": "whisper-large-v3",
                "api_key_env": "ASR_API_KEY"
            },
            {
                "id": VLM_PROVIDER,
                "modality": "vlm",
                "endpoint": "http://localhost:8001/v1/chat/completions",
                "model": "Qwen/Qwen2-VL-7B-Instruct",
                "api_key_env": "VLM_API_KEY",
                "timeout_s": 600
            }
        ]}),
    )?;
    write_json(
        &dir.join("config.json"),
        &json!({
            "dataset": "dataset.json",
            "inventory": "inventory.json",
            "frames_dir": "frames",
            "transcripts_dir": "transcripts",
            "cassettes": "cassettes",
            "mode": "replay",
            "providers_file": "providers.json",
            "asr_provider": ASR_PROVIDER,
            "conditions": conditions(),
            "tolerance_s": 2,
            "layout": LayoutParams::default(),
            "out_dir": "out",
            "workers": 4,
            "summaries": true,
            "annotations": "annotations.json",
            "media": {"probe": probe, "extract": ["cp", "{input}", "{output}"]}
        }),
    )?;
    Ok(())
}
