//! Matching-node scores, MCQ accuracy/completeness and with/without
//! transcript aggregation.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::benchmark::{DurationClass, Outcome, RequestKind, RunRecord};
use crate::parsing::KeyframeEntry;
use crate::providers::ConditionTag;

#[derive(Debug, Error, PartialEq)]
pub enum ScoringError {
    #[error("match vector is empty")]
    EmptyVector,
    #[error("no records to score")]
    NoRecords,
    #[error("expected only MCQ records")]
    NotMcq,
    #[error("missing condition: {0}")]
    MissingCondition(String),
    #[error("annotations: {0}")]
    Annotations(String),
}

pub type Result<T> = std::result::Result<T, ScoringError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchScenario {
    Keyframe,
    Summary,
}

/// One indicator per valid output: did it agree with ground truth.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchVector {
    pub scenario: MatchScenario,
    pub matches: Vec<bool>,
}

impl MatchVector {
    pub fn new(scenario: MatchScenario, matches: Vec<bool>) -> Self {
        Self { scenario, matches }
    }

    pub fn matched(&self) -> usize {
        self.matches.iter().filter(|m| **m).count()
    }

    pub fn len(&self) -> usize {
        self.matches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matches.is_empty()
    }

    pub fn negated(&self) -> Self {
        Self::new(self.scenario, self.matches.iter().map(|m| !m).collect())
    }
}

/// Mean of the indicators.
pub fn matching_node_score(v: &MatchVector) -> Result<f64> {
    if v.is_empty() {
        return Err(ScoringError::EmptyVector);
    }
    Ok(v.matched() as f64 / v.len() as f64)
}

pub fn keyframe_match(pred: &KeyframeEntry, truth: &KeyframeEntry, tolerance_s: u32) -> bool {
    pred.timestamp_s.abs_diff(truth.timestamp_s) <= tolerance_s
}

/// True when every ground-truth keyframe can be paired with a distinct
/// predicted keyframe within tolerance.
pub fn keyframes_match(pred: &[KeyframeEntry], truth: &[KeyframeEntry], tolerance_s: u32) -> bool {
    if truth.is_empty() {
        return true;
    }
    let mut p: Vec<u32> = pred.iter().map(|k| k.timestamp_s).collect();
    let mut t: Vec<u32> = truth.iter().map(|k| k.timestamp_s).collect();
    p.sort_unstable();
    t.sort_unstable();
    // Equal-width windows: earliest-available greedy is optimal.
    let mut j = 0;
    for target in t {
        while j < p.len() && p[j] + tolerance_s < target {
            j += 1;
        }
        if j == p.len() || p[j] > target + tolerance_s {
            return false;
        }
        j += 1;
    }
    true
}

/// Ground truth for one video.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VideoAnnotation {
    #[serde(default)]
    pub keyframes: Vec<KeyframeEntry>,
    /// Judged correctness of each condition's summary, keyed by condition
    /// label.
    #[serde(default)]
    pub summary_verdicts: IndexMap<String, bool>,
}

pub type Annotations = IndexMap<String, VideoAnnotation>;

pub fn load_annotations(path: impl AsRef<Path>) -> Result<Annotations> {
    let path = path.as_ref();
    let text =
        std::fs::read_to_string(path).map_err(|e| ScoringError::Annotations(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| ScoringError::Annotations(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreLine {
    pub matched: usize,
    pub total: usize,
    pub score: f64,
}

impl ScoreLine {
    pub fn from_vector(v: &MatchVector) -> Result<Self> {
        Ok(Self {
            matched: v.matched(),
            total: v.len(),
            score: matching_node_score(v)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchSummary {
    pub condition: String,
    pub valid_outputs: usize,
    pub summary_outputs: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub keyframe: Option<ScoreLine>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary: Option<ScoreLine>,
}

/// Builds keyframe and summary match vectors per condition from valid
/// summary records that have ground truth.
pub fn match_summaries(records: &[RunRecord], annotations: &Annotations, tolerance_s: u32) -> Vec<MatchSummary> {
    let mut groups: BTreeMap<String, (usize, usize, Vec<bool>, Vec<bool>)> = BTreeMap::new();
    for r in records
        .iter()
        .filter(|r| r.request_kind == RequestKind::SummaryKeyframes)
    {
        let label = r.condition.label();
        let entry = groups.entry(label.clone()).or_default();
        entry.1 += 1;
        let Some(output) = r.video_output().filter(|v| v.valid) else {
            continue;
        };
        entry.0 += 1;
        if let Some(truth) = annotations.get(&r.video_id) {
            if !truth.keyframes.is_empty() {
                entry
                    .2
                    .push(keyframes_match(&output.keyframes, &truth.keyframes, tolerance_s));
            }
            if let Some(verdict) = truth.summary_verdicts.get(&label) {
                entry.3.push(*verdict);
            }
        }
    }
    groups
        .into_iter()
        .map(|(condition, (valid, total, kf, sm))| MatchSummary {
            condition,
            valid_outputs: valid,
            summary_outputs: total,
            keyframe: ScoreLine::from_vector(&MatchVector::new(MatchScenario::Keyframe, kf)).ok(),
            summary: ScoreLine::from_vector(&MatchVector::new(MatchScenario::Summary, sm)).ok(),
        })
        .collect()
}

/// Outcome counts for MCQ records.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct McqTally {
    pub total: u64,
    pub answered: u64,
    pub correct: u64,
    pub oom: u64,
    /// Sum of recorded provider latencies.
    pub processing_ms: u64,
}

impl McqTally {
    pub fn add(&mut self, outcome: Outcome, latency_ms: u64) {
        self.total += 1;
        self.processing_ms += latency_ms;
        match outcome {
            Outcome::AnsweredCorrect => {
                self.answered += 1;
                self.correct += 1;
            }
            Outcome::AnsweredWrong => self.answered += 1,
            Outcome::Oom => self.oom += 1,
            _ => {}
        }
    }

    pub fn from_outcomes(outcomes: impl IntoIterator<Item = Outcome>) -> Self {
        let mut t = Self::default();
        for o in outcomes {
            t.add(o, 0);
        }
        t
    }

    /// Answered over all records.
    pub fn answered_ratio(&self) -> f64 {
        ratio(self.answered, self.total)
    }

    /// Correct over answered records; 0 when nothing was answered.
    pub fn correct_ratio(&self) -> f64 {
        ratio(self.correct, self.answered)
    }

    /// Correct over all records.
    pub fn accuracy(&self) -> f64 {
        ratio(self.correct, self.total)
    }
}

fn ratio(n: u64, d: u64) -> f64 {
    if d == 0 {
        0.0
    } else {
        n as f64 / d as f64
    }
}

/// `(answered / all, correct / answered)` over MCQ records.
pub fn mcq_accuracy(records: &[RunRecord]) -> Result<(f64, f64)> {
    if records.is_empty() {
        return Err(ScoringError::NoRecords);
    }
    let mut tally = McqTally::default();
    for r in records {
        if r.request_kind != RequestKind::Mcq {
            return Err(ScoringError::NotMcq);
        }
        tally.add(r.outcome, r.response.latency_ms);
    }
    Ok((tally.answered_ratio(), tally.correct_ratio()))
}

/// A with/without pair. `delta` is computed from the unrounded values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Triple {
    pub with: f64,
    pub without: f64,
    pub delta: f64,
}

impl Triple {
    pub fn new(with: f64, without: f64) -> Self {
        Self {
            with,
            without,
            delta: with - without,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripleTable {
    pub rows: IndexMap<String, Triple>,
    /// Unweighted mean of the rows.
    pub average: Triple,
}

impl TripleTable {
    pub fn from_pairs<S: Into<String>>(pairs: impl IntoIterator<Item = (S, f64, f64)>) -> Result<Self> {
        let rows: IndexMap<String, Triple> = pairs
            .into_iter()
            .map(|(n, w, wo)| (n.into(), Triple::new(w, wo)))
            .collect();
        if rows.is_empty() {
            return Err(ScoringError::NoRecords);
        }
        let n = rows.len() as f64;
        let with = rows.values().map(|t| t.with).sum::<f64>() / n;
        let without = rows.values().map(|t| t.without).sum::<f64>() / n;
        Ok(Self {
            rows,
            average: Triple::new(with, without),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionSummary {
    pub label: String,
    pub condition: ConditionTag,
    pub tally: McqTally,
    pub answered_ratio: f64,
    pub correct_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    /// Correct over all MCQ records.
    pub overall_accuracy: f64,
    pub by_task_type: TripleTable,
    pub by_duration: TripleTable,
    pub by_model: TripleTable,
    pub completeness: Vec<ConditionSummary>,
    #[serde(default)]
    pub matching: Vec<MatchSummary>,
}

fn condition_order(a: &ConditionTag, b: &ConditionTag) -> Ordering {
    a.model_name
        .cmp(&b.model_name)
        .then(a.attention.cmp(&b.attention))
        .then(b.fps.total_cmp(&a.fps))
        .then(a.with_transcript.cmp(&b.with_transcript))
        .then(a.gpu.cmp(&b.gpu))
}

#[derive(Default)]
struct Sides {
    with: McqTally,
    without: McqTally,
}

fn side_table<K: Ord + ToString>(groups: BTreeMap<K, Sides>) -> Result<TripleTable> {
    let mut pairs = Vec::with_capacity(groups.len());
    for (k, s) in groups {
        let name = k.to_string();
        if s.with.total == 0 {
            return Err(ScoringError::MissingCondition(format!(
                "{name}: no records with transcript"
            )));
        }
        if s.without.total == 0 {
            return Err(ScoringError::MissingCondition(format!(
                "{name}: no records without transcript"
            )));
        }
        pairs.push((name, s.with.accuracy(), s.without.accuracy()));
    }
    TripleTable::from_pairs(pairs)
}

/// Answered and correct ratios per condition over MCQ records. Needs no
/// with/without pairing, so ablation-only matrices work too.
pub fn completeness(records: &[RunRecord]) -> Vec<ConditionSummary> {
    let mut by_condition: Vec<(ConditionTag, McqTally)> = Vec::new();
    for r in records.iter().filter(|r| r.request_kind == RequestKind::Mcq) {
        match by_condition
            .iter_mut()
            .find(|(c, _)| condition_order(c, &r.condition) == Ordering::Equal)
        {
            Some((_, t)) => t.add(r.outcome, r.response.latency_ms),
            None => {
                let mut t = McqTally::default();
                t.add(r.outcome, r.response.latency_ms);
                by_condition.push((r.condition.clone(), t));
            }
        }
    }
    by_condition.sort_by(|a, b| condition_order(&a.0, &b.0));
    by_condition
        .into_iter()
        .map(|(condition, tally)| ConditionSummary {
            label: condition.label(),
            answered_ratio: tally.answered_ratio(),
            correct_ratio: tally.correct_ratio(),
            condition,
            tally,
        })
        .collect()
}

/// Scores a run: per-task, per-duration and per-model with/without triples
/// (accuracy = correct over all records in the cell), completeness per
/// condition, and matching-node scores when annotations are given.
pub fn aggregate(records: &[RunRecord], annotations: Option<&Annotations>, tolerance_s: u32) -> Result<ScoreReport> {
    let mcq: Vec<&RunRecord> = records.iter().filter(|r| r.request_kind == RequestKind::Mcq).collect();
    if mcq.is_empty() {
        return Err(ScoringError::NoRecords);
    }
    if !mcq.iter().any(|r| r.condition.with_transcript) {
        return Err(ScoringError::MissingCondition("no records with transcript".into()));
    }
    if !mcq.iter().any(|r| !r.condition.with_transcript) {
        return Err(ScoringError::MissingCondition("no records without transcript".into()));
    }

    let mut overall = McqTally::default();
    let mut by_task: BTreeMap<String, Sides> = BTreeMap::new();
    let mut by_duration: BTreeMap<DurationClass, Sides> = BTreeMap::new();
    let mut by_model: BTreeMap<String, Sides> = BTreeMap::new();
    for r in &mcq {
        let pick = |s: &mut Sides| {
            let side = if r.condition.with_transcript {
                &mut s.with
            } else {
                &mut s.without
            };
            side.add(r.outcome, r.response.latency_ms);
        };
        overall.add(r.outcome, r.response.latency_ms);
        pick(by_task.entry(r.task_type.clone().unwrap_or_default()).or_default());
        if let Some(d) = r.duration_class {
            pick(by_duration.entry(d).or_default());
        }
        pick(by_model.entry(r.condition.model_name.clone()).or_default());
    }

    Ok(ScoreReport {
        overall_accuracy: overall.accuracy(),
        by_task_type: side_table(by_task)?,
        by_duration: side_table(by_duration)?,
        by_model: side_table(by_model)?,
        completeness: completeness(records),
        matching: annotations
            .map(|a| match_summaries(records, a, tolerance_s))
            .unwrap_or_default(),
    })
}

/// A published with/without table, as printed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrintedTable {
    pub title: String,
    pub rows: Vec<PrintedRow>,
    pub average: PrintedRow,
    /// Headline `(without, with)` figures quoted alongside the table.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub claim: Option<PrintedClaim>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrintedRow {
    pub name: String,
    pub with: f64,
    pub without: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrintedClaim {
    pub without: f64,
    pub with: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Discrepancy {
    pub row: String,
    pub column: String,
    pub printed: f64,
    pub computed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reconciliation {
    pub computed: TripleTable,
    pub row_mismatches: Vec<Discrepancy>,
    pub average_mismatches: Vec<Discrepancy>,
    pub warnings: Vec<String>,
}

impl Reconciliation {
    pub fn rows_ok(&self) -> bool {
        self.row_mismatches.is_empty()
    }

    pub fn average_ok(&self) -> bool {
        self.average_mismatches.is_empty()
    }
}

fn check(out: &mut Vec<Discrepancy>, row: &str, column: &str, printed: f64, computed: f64, tolerance: f64) {
    if (printed - computed).abs() > tolerance {
        out.push(Discrepancy {
            row: row.to_string(),
            column: column.to_string(),
            printed,
            computed,
        });
    }
}

/// Recomputes deltas and the average row from a printed table's rows and
/// compares them with the printed figures.
pub fn reconcile(table: &PrintedTable, tolerance: f64) -> Reconciliation {
    let computed = TripleTable::from_pairs(table.rows.iter().map(|r| (r.name.clone(), r.with, r.without)))
        .unwrap_or_else(|_| TripleTable {
            rows: IndexMap::new(),
            average: Triple::new(f64::NAN, f64::NAN),
        });
    let mut row_mismatches = Vec::new();
    for r in &table.rows {
        check(
            &mut row_mismatches,
            &r.name,
            "delta",
            r.delta,
            computed.rows[&r.name].delta,
            tolerance,
        );
    }
    let mut average_mismatches = Vec::new();
    let (p, c) = (&table.average, &computed.average);
    check(&mut average_mismatches, &p.name, "with", p.with, c.with, tolerance);
    check(
        &mut average_mismatches,
        &p.name,
        "without",
        p.without,
        c.without,
        tolerance,
    );
    check(&mut average_mismatches, &p.name, "delta", p.delta, c.delta, tolerance);
    let mut warnings = Vec::new();
    if let Some(claim) = &table.claim {
        if (claim.without - p.without).abs() > tolerance || (claim.with - p.with).abs() > tolerance {
            warnings.push(format!(
                "{}: quoted headline {} -> {} disagrees with the printed average row {} -> {}",
                table.title, claim.without, claim.with, p.without, p.with
            ));
        }
    }
    for d in &average_mismatches {
        warnings.push(format!(
            "{}: printed {} {} = {} but the unweighted mean of the rows is {:.4}",
            table.title, d.row, d.column, d.printed, d.computed
        ));
    }
    Reconciliation {
        computed,
        row_mismatches,
        average_mismatches,
        warnings,
    }
}

/// `0.759`
pub fn fmt_proportion(x: f64) -> String {
    format!("{x:.3}")
}

/// `+0.213` / `-0.035`
pub fn fmt_signed_proportion(x: f64) -> String {
    signed(format!("{:.3}", x.abs()), x)
}

/// `72.3` for a proportion of 0.723.
pub fn fmt_points(ratio: f64) -> String {
    format!("{:.1}", ratio * 100.0)
}

/// `+8.2`
pub fn fmt_signed_points(ratio: f64) -> String {
    signed(format!("{:.1}", (ratio * 100.0).abs()), ratio)
}

fn signed(magnitude: String, x: f64) -> String {
    if x < 0.0 && magnitude.bytes().any(|b| matches!(b, b'1'..=b'9')) {
        format!("-{magnitude}")
    } else {
        format!("+{magnitude}")
    }
}

/// `35.1%`
pub fn fmt_percent_1dp(ratio: f64) -> String {
    format!("{:.1}%", ratio * 100.0)
}

/// `58.73%`
pub fn fmt_percent_2dp(ratio: f64) -> String {
    format!("{:.2}%", ratio * 100.0)
}

/// Two decimals with trailing zeros dropped: `37%`, `26.78%`, `6.5%`.
pub fn fmt_percent_trimmed(ratio: f64) -> String {
    let s = format!("{:.2}", ratio * 100.0);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    format!("{s}%")
}

/// `4h 37m 2s`, `44m 12s`, `9s`.
pub fn fmt_elapsed(ms: u64) -> String {
    let secs = (ms + 500) / 1000;
    let (h, m, s) = (secs / 3600, (secs / 60) % 60, secs % 60);
    match (h, m) {
        (0, 0) => format!("{s}s"),
        (0, _) => format!("{m}m {s}s"),
        _ => format!("{h}h {m}m {s}s"),
    }
}

/// Inverse of [`fmt_elapsed`], in milliseconds.
pub fn parse_elapsed(s: &str) -> Option<u64> {
    let mut total = 0u64;
    let mut any = false;
    for part in s.split_whitespace() {
        let (num, unit) = part.split_at(part.len().checked_sub(1)?);
        let n: u64 = num.parse().ok()?;
        total += n * match unit {
            "h" => 3_600_000,
            "m" => 60_000,
            "s" => 1000,
            _ => return None,
        };
        any = true;
    }
    any.then_some(total)
}
