//! Report tables (Markdown, CSV, JSON) and graph artifacts.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::knowledge_graph::{self as kg, GraphError, GraphMetrics, LayoutParams};
use crate::parsing::{KeyframeParser, ParsedVideoOutput};
use crate::scoring::{
    fmt_elapsed, fmt_percent_2dp, fmt_percent_trimmed, fmt_points, fmt_proportion, fmt_signed_points,
    fmt_signed_proportion, parse_elapsed, ConditionSummary, ScoreReport, TripleTable,
};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("markdown table: {0}")]
    Markdown(String),
    #[error("outputs file: {0}")]
    Outputs(String),
    #[error("video {video_id}: {source}")]
    Graph {
        video_id: String,
        #[source]
        source: GraphError,
    },
}

pub type Result<T> = std::result::Result<T, ReportError>;

/// A rectangular table of display strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(headers: &[&str]) -> Self {
        Self {
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn to_markdown(&self) -> String {
        let mut s = String::new();
        let line = |s: &mut String, cells: &[String]| {
            let escaped: Vec<String> = cells.iter().map(|c| c.replace('|', "\\|")).collect();
            writeln!(s, "| {} |", escaped.join(" | ")).expect("write to string");
        };
        line(&mut s, &self.headers);
        let rule: Vec<String> = self
            .headers
            .iter()
            .enumerate()
            .map(|(i, _)| if i == 0 { "---".into() } else { "---:".into() })
            .collect();
        writeln!(s, "|{}|", rule.join("|")).expect("write to string");
        for r in &self.rows {
            line(&mut s, r);
        }
        s
    }

    pub fn to_csv(&self) -> String {
        let cell = |c: &String| {
            if c.contains([',', '"', '\n']) {
                format!("\"{}\"", c.replace('"', "\"\""))
            } else {
                c.clone()
            }
        };
        let mut s = String::new();
        for r in std::iter::once(&self.headers).chain(&self.rows) {
            s.push_str(&r.iter().map(cell).collect::<Vec<_>>().join(","));
            s.push('\n');
        }
        s
    }

    /// Reads back a table written by [`Table::to_markdown`].
    pub fn parse_markdown(text: &str) -> Result<Self> {
        let split = |line: &str| -> Vec<String> {
            let inner = line.trim().trim_start_matches('|').trim_end_matches('|');
            let mut cells = Vec::new();
            let mut cur = String::new();
            let mut chars = inner.chars().peekable();
            while let Some(c) = chars.next() {
                match c {
                    '\\' if chars.peek() == Some(&'|') => cur.push(chars.next().expect("peeked")),
                    '|' => cells.push(std::mem::take(&mut cur).trim().to_string()),
                    c => cur.push(c),
                }
            }
            cells.push(cur.trim().to_string());
            cells
        };
        let mut lines = text.lines().map(str::trim).filter(|l| l.starts_with('|'));
        let headers = split(
            lines
                .next()
                .ok_or_else(|| ReportError::Markdown("no header row".into()))?,
        );
        let rule = lines
            .next()
            .ok_or_else(|| ReportError::Markdown("no separator row".into()))?;
        if !rule.chars().all(|c| matches!(c, '|' | '-' | ':' | ' ')) {
            return Err(ReportError::Markdown(format!("bad separator row {rule:?}")));
        }
        let mut rows = Vec::new();
        for l in lines {
            let r = split(l);
            if r.len() != headers.len() {
                return Err(ReportError::Markdown(format!(
                    "row has {} cells, header has {}",
                    r.len(),
                    headers.len()
                )));
            }
            rows.push(r);
        }
        Ok(Self { headers, rows })
    }

    pub fn column(&self, header: &str) -> Option<Vec<&str>> {
        let i = self.headers.iter().position(|h| h == header)?;
        Some(self.rows.iter().map(|r| r[i].as_str()).collect())
    }
}

/// Numeric value of a display cell: `0.759`, `+0.213`, `72.3`, `37%`,
/// `4h 37m 2s` (milliseconds).
pub fn parse_cell(cell: &str) -> Option<f64> {
    let c = cell.trim();
    if let Some(ms) = parse_elapsed(c) {
        return Some(ms as f64);
    }
    let c = c.strip_suffix('%').unwrap_or(c);
    let c = c.strip_prefix('+').unwrap_or(c);
    c.parse().ok()
}

/// Per-task table: `Task Type | With ALM | Without ALM | Δ`, proportions.
pub fn task_type_table(t: &TripleTable) -> Table {
    proportion_table("Task Type", t)
}

/// Per-duration table, same layout as the per-task table.
pub fn duration_table(t: &TripleTable) -> Table {
    proportion_table("Duration", t)
}

fn proportion_table(first: &str, t: &TripleTable) -> Table {
    let mut table = Table::new(&[first, "With ALM", "Without ALM", "Δ"]);
    for (name, v) in t.rows.iter().chain([(&"Average".to_string(), &t.average)]) {
        table.rows.push(vec![
            name.clone(),
            fmt_proportion(v.with),
            fmt_proportion(v.without),
            fmt_signed_proportion(v.delta),
        ]);
    }
    table
}

/// Per-model table: `Model | w/o | w/ | Δ`, percentage points.
pub fn model_table(t: &TripleTable) -> Table {
    let mut table = Table::new(&["Model", "w/o", "w/", "Δ"]);
    for (name, v) in t.rows.iter().chain([(&"Average".to_string(), &t.average)]) {
        table.rows.push(vec![
            name.clone(),
            fmt_points(v.without),
            fmt_points(v.with),
            fmt_signed_points(v.delta),
        ]);
    }
    table
}

/// `Experiments | Processing Time | Total Answered (%) | Correct Answered (%)`.
pub fn completeness_table(rows: &[ConditionSummary]) -> Table {
    let mut table = Table::new(&[
        "Experiments",
        "Processing Time",
        "Total Answered (%)",
        "Correct Answered (%)",
    ]);
    for r in rows {
        table.rows.push(vec![
            r.label.clone(),
            fmt_elapsed(r.tally.processing_ms),
            fmt_percent_trimmed(r.answered_ratio),
            fmt_percent_2dp(r.correct_ratio),
        ]);
    }
    table
}

fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|source| ReportError::Io {
            path: parent.to_path_buf(),
            source,
        })?;
    }
    std::fs::write(path, contents).map_err(|source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Everything one report run produced. Paths are relative to the output
/// directory so the JSON is stable across machines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    /// Absent when the records lack with/without pairs.
    pub score_report: Option<ScoreReport>,
    pub completeness: Vec<ConditionSummary>,
    pub graphs: IndexMap<String, GraphMetrics>,
    pub manifests: Vec<String>,
    pub files: Vec<String>,
}

impl ReportBundle {
    pub fn new(score_report: Option<ScoreReport>, completeness: Vec<ConditionSummary>) -> Self {
        Self {
            score_report,
            completeness,
            graphs: IndexMap::new(),
            manifests: Vec::new(),
            files: Vec::new(),
        }
    }

    /// Writes the tables as Markdown and CSV. The with/without tables are
    /// skipped without a score report.
    pub fn write_tables(&mut self, out_dir: &Path) -> Result<()> {
        let mut tables = Vec::new();
        if let Some(r) = &self.score_report {
            tables.push(("table1_task_type", task_type_table(&r.by_task_type)));
            tables.push(("table2_model", model_table(&r.by_model)));
        }
        tables.push(("table3_completeness", completeness_table(&self.completeness)));
        if let Some(r) = &self.score_report {
            tables.push(("duration", duration_table(&r.by_duration)));
        }
        for (name, t) in tables {
            for (ext, body) in [("md", t.to_markdown()), ("csv", t.to_csv())] {
                let file = format!("{name}.{ext}");
                write(&out_dir.join(&file), &body)?;
                self.files.push(file);
            }
        }
        Ok(())
    }

    /// Writes `report.json`; it lists itself among the files.
    pub fn write_json(&mut self, out_dir: &Path) -> Result<PathBuf> {
        self.files.push("report.json".into());
        let path = out_dir.join("report.json");
        let mut body = serde_json::to_string_pretty(self).expect("report serializes");
        body.push('\n');
        write(&path, &body)?;
        Ok(path)
    }
}

/// One video's raw outputs per model, as read by `graph`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoOutputs {
    pub video_id: String,
    pub outputs: Vec<ModelOutput>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelOutput {
    pub model: String,
    pub raw_text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputsFile {
    pub videos: Vec<VideoOutputs>,
}

impl OutputsFile {
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim().is_empty() {
            return Ok(Self { videos: Vec::new() });
        }
        serde_json::from_str(text).map_err(|e| ReportError::Outputs(e.to_string()))
    }

    pub fn parsed(&self, parser: &KeyframeParser) -> IndexMap<String, Vec<(String, ParsedVideoOutput)>> {
        self.videos
            .iter()
            .map(|v| {
                let outs = v
                    .outputs
                    .iter()
                    .map(|o| (o.model.clone(), parser.parse_video_output(&o.raw_text)))
                    .collect();
                (v.video_id.clone(), outs)
            })
            .collect()
    }
}

fn file_stem(video_id: &str) -> String {
    video_id
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '-' | '_') {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// Builds, lays out and exports one comparison graph per video as
/// `graph_<id>.dot` and `graph_<id>.json`, plus `graph_metrics.json`.
/// Returned file names are relative to `out_dir`.
pub fn write_graphs(
    videos: &IndexMap<String, Vec<(String, ParsedVideoOutput)>>,
    params: &LayoutParams,
    center: &str,
    out_dir: &Path,
) -> Result<(IndexMap<String, GraphMetrics>, Vec<String>)> {
    if videos.is_empty() {
        return Err(ReportError::Graph {
            video_id: String::new(),
            source: GraphError::NoValidOutputs,
        });
    }
    let mut metrics = IndexMap::new();
    let mut files = Vec::new();
    for (video_id, outputs) in videos {
        let err = |source| ReportError::Graph {
            video_id: video_id.clone(),
            source,
        };
        let graph = kg::build_comparison_graph(outputs).map_err(err)?;
        let positions = kg::fr_layout(&graph, params);
        let stem = file_stem(video_id);
        for (ext, body) in [
            ("dot", kg::to_dot(&graph, &positions).map_err(err)?),
            ("json", kg::to_json(&graph, &positions).map_err(err)?),
        ] {
            let file = format!("graph_{stem}.{ext}");
            write(&out_dir.join(&file), &body)?;
            files.push(file);
        }
        metrics.insert(
            video_id.clone(),
            kg::graph_metrics(&graph, &positions, center).map_err(err)?,
        );
    }
    let mut body = serde_json::to_string_pretty(&metrics).expect("metrics serialize");
    body.push('\n');
    write(&out_dir.join("graph_metrics.json"), &body)?;
    files.push("graph_metrics.json".into());
    Ok((metrics, files))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::providers::{AttentionKind, ConditionTag};
    use crate::scoring::McqTally;
    use proptest::prelude::*;

    fn triple_table() -> TripleTable {
        TripleTable::from_pairs([("Action Reasoning", 0.759, 0.545), ("Counting Problem", 0.337, 0.372)]).unwrap()
    }

    #[test]
    fn task_table_layout() {
        let t = task_type_table(&triple_table());
        let md = t.to_markdown();
        assert!(md.starts_with("| Task Type | With ALM | Without ALM | Δ |\n"));
        assert!(md.contains("| Action Reasoning | 0.759 | 0.545 | +0.214 |"));
        assert!(md.contains("| Counting Problem | 0.337 | 0.372 | -0.035 |"));
        assert_eq!(Table::parse_markdown(&md).unwrap(), t);
    }

    #[test]
    fn model_table_orders_without_first() {
        let t = TripleTable::from_pairs([("GPT-4o", 0.772, 0.690)]).unwrap();
        let md = model_table(&t).to_markdown();
        assert!(md.contains("| GPT-4o | 69.0 | 77.2 | +8.2 |"), "{md}");
    }

    #[test]
    fn completeness_layout() {
        let tally = McqTally {
            total: 100,
            answered: 37,
            correct: 22,
            oom: 63,
            processing_ms: (4 * 3600 + 37 * 60 + 2) * 1000,
        };
        let row = ConditionSummary {
            label: "SDPA (0.1 FPS)".into(),
            condition: ConditionTag {
                fps: 0.1,
                with_transcript: false,
                attention: AttentionKind::Sdpa,
                gpu: "A10G".into(),
                model_name: "qwen2-vl-7b".into(),
            },
            answered_ratio: tally.answered_ratio(),
            correct_ratio: tally.correct_ratio(),
            tally,
        };
        let t = completeness_table(&[row]);
        assert_eq!(t.rows[0][1], "4h 37m 2s");
        assert_eq!(t.rows[0][2], "37%");
        assert_eq!(t.rows[0][3], "59.46%");
        assert_eq!(parse_cell(&t.rows[0][1]), Some(16_622_000.0));
        assert!(t
            .to_csv()
            .starts_with("Experiments,Processing Time,Total Answered (%),Correct Answered (%)\n"));
    }

    #[test]
    fn csv_quotes_awkward_cells() {
        let mut t = Table::new(&["a", "b"]);
        t.rows.push(vec!["x, y".into(), "say \"hi\"".into()]);
        assert_eq!(t.to_csv(), "a,b\n\"x, y\",\"say \"\"hi\"\"\"\n");
    }

    #[test]
    fn malformed_markdown() {
        assert!(Table::parse_markdown("").is_err());
        assert!(Table::parse_markdown("| a | b |\n| x | y |\n").is_err());
        assert!(Table::parse_markdown("| a | b |\n|---|---|\n| 1 |\n").is_err());
    }

    #[test]
    fn graphs_need_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let empty = OutputsFile::parse("").unwrap().parsed(&KeyframeParser::default());
        assert!(matches!(
            write_graphs(&empty, &LayoutParams::default(), kg::KEYFRAMES, dir.path()),
            Err(ReportError::Graph {
                source: GraphError::NoValidOutputs,
                ..
            })
        ));
    }

    proptest! {
        #[test]
        fn markdown_round_trips_values(rows in proptest::collection::vec((0.0f64..=1.0, 0.0f64..=1.0), 1..12)) {
            let t = TripleTable::from_pairs(rows.iter().enumerate().map(|(i, (w, wo))| (format!("task {i}"), *w, *wo))).unwrap();
            for (table, scale, tol) in [(task_type_table(&t), 1.0, 0.0005), (model_table(&t), 100.0, 0.05)] {
                let md = table.to_markdown();
                let back = Table::parse_markdown(&md).unwrap();
                prop_assert_eq!(&back, &table);
                prop_assert_eq!(back.to_markdown(), md);
                for (row, (_, v)) in back.rows.iter().zip(t.rows.iter().chain([(&String::new(), &t.average)])) {
                    let nums: Vec<f64> = row[1..].iter().map(|c| parse_cell(c).unwrap()).collect();
                    let (with, without) = if scale == 1.0 { (nums[0], nums[1]) } else { (nums[1], nums[0]) };
                    prop_assert!((with - v.with * scale).abs() <= tol + 1e-9);
                    prop_assert!((without - v.without * scale).abs() <= tol + 1e-9);
                    prop_assert!((nums[2] - v.delta * scale).abs() <= tol + 1e-9);
                }
            }
        }
    }
}
