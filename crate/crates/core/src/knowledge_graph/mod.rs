//! Comparison graphs over several models' summaries and keyframes.
//!
//! Two gray hub nodes, `KeyFrames` and `VideoSummary`, anchor the graph.
//! Each model contributes a model node wired to both hubs, a summary node
//! hanging off `VideoSummary`, and one node per keyframe caption hanging off
//! `KeyFrames`. Models get distinct colour families so their clusters stay
//! visually separable after layout.

mod export;
mod layout;
mod metrics;
mod paths;

use std::collections::HashSet;

use indexmap::{IndexMap, IndexSet};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::parsing::{format_timestamp, ParsedVideoOutput};

pub use export::{from_json, to_dot, to_json, GraphDocument};
pub use layout::{fr_layout, fr_layout_from, LayoutParams, NodePosition, Positions};
pub use metrics::{graph_metrics, ClusterSpread, GraphMetrics};
pub use paths::{dijkstra, undirected, unit_weights, Weights};

pub const KEYFRAMES: &str = "KeyFrames";
pub const VIDEO_SUMMARY: &str = "VideoSummary";

const MODEL_SIZE: u32 = 700;
const SUMMARY_SIZE: u32 = 500;
const KEYFRAME_SIZE: u32 = 400;
const SUMMARY_LABEL_CHARS: usize = 80;

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("no valid model outputs")]
    NoValidOutputs,
    #[error("model name {0:?} is used twice or collides with a hub node")]
    DuplicateModelName(String),
    #[error("node {0:?} already exists")]
    DuplicateNode(String),
    #[error("unknown node {0:?}")]
    UnknownNode(String),
    #[error("edge {0} -> {1} has negative weight {2}")]
    NegativeWeight(String, String, f64),
    #[error("edge {0} -> {1} has no weight")]
    MissingWeight(String, String),
    #[error("unknown source node {0:?}")]
    UnknownSource(String),
    #[error("unknown center node {0:?}")]
    UnknownCenter(String),
    #[error("no position for node {0:?}")]
    MissingPosition(String),
    #[error("graph document: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, GraphError>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub id: String,
    pub label: String,
    pub color: String,
    pub size: u32,
}

/// Directed graph with attributed nodes. Insertion order is kept so every
/// export is byte-stable.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EvalGraph {
    nodes: IndexMap<String, Node>,
    edges: IndexSet<(String, String)>,
}

impl EvalGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, node: Node) -> Result<()> {
        if self.nodes.contains_key(&node.id) {
            return Err(GraphError::DuplicateNode(node.id));
        }
        self.nodes.insert(node.id.clone(), node);
        Ok(())
    }

    /// Adds `source -> target`; repeated edges are ignored.
    pub fn add_edge(&mut self, source: &str, target: &str) -> Result<()> {
        for id in [source, target] {
            if !self.nodes.contains_key(id) {
                return Err(GraphError::UnknownNode(id.to_string()));
            }
        }
        self.edges.insert((source.to_string(), target.to_string()));
        Ok(())
    }

    pub fn node(&self, id: &str) -> Option<&Node> {
        self.nodes.get(id)
    }

    pub fn nodes(&self) -> impl Iterator<Item = &Node> {
        self.nodes.values()
    }

    pub fn edges(&self) -> impl Iterator<Item = (&str, &str)> {
        self.edges.iter().map(|(s, t)| (s.as_str(), t.as_str()))
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.nodes.contains_key(id)
    }

    pub(crate) fn index_of(&self, id: &str) -> Option<usize> {
        self.nodes.get_index_of(id)
    }

    /// Model nodes: sources of edges into `VideoSummary`.
    pub fn models(&self) -> Vec<&str> {
        self.edges()
            .filter(|(_, t)| *t == VIDEO_SUMMARY)
            .map(|(s, _)| s)
            .collect()
    }

    /// A model's node plus every node namespaced under it.
    pub fn cluster(&self, model: &str) -> Vec<&str> {
        let prefix = format!("{model}::");
        self.nodes
            .keys()
            .filter(|id| *id == model || id.starts_with(&prefix))
            .map(String::as_str)
            .collect()
    }
}

/// `(dark, light)` colour pair for the i-th model.
pub fn palette(i: usize) -> (String, String) {
    const NAMED: [(&str, &str); 6] = [
        ("darkblue", "lightblue"),
        ("red", "lightcoral"),
        ("darkgreen", "lightgreen"),
        ("darkorange", "moccasin"),
        ("purple", "plum"),
        ("saddlebrown", "burlywood"),
    ];
    if let Some((d, l)) = NAMED.get(i) {
        return (d.to_string(), l.to_string());
    }
    // Golden-angle hue walk keeps later families distinct.
    let hue = (i as f64 * 137.507_764) % 360.0;
    (hsl_hex(hue, 0.65, 0.35), hsl_hex(hue, 0.65, 0.78))
}

fn hsl_hex(h: f64, s: f64, l: f64) -> String {
    let c = (1.0 - (2.0 * l - 1.0).abs()) * s;
    let x = c * (1.0 - ((h / 60.0) % 2.0 - 1.0).abs());
    let m = l - c / 2.0;
    let (r, g, b) = match (h / 60.0) as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let byte = |v: f64| ((v + m) * 255.0).round().clamp(0.0, 255.0) as u8;
    format!("#{:02x}{:02x}{:02x}", byte(r), byte(g), byte(b))
}

fn shorten(text: &str, max_chars: usize) -> String {
    if text.chars().count() <= max_chars {
        return text.to_string();
    }
    let mut s: String = text.chars().take(max_chars).collect();
    s.push_str("...");
    s
}

/// Builds the comparison graph. Invalid outputs are skipped; model names
/// must be unique.
pub fn build_comparison_graph(outputs: &[(String, ParsedVideoOutput)]) -> Result<EvalGraph> {
    let mut seen = HashSet::new();
    for (name, _) in outputs {
        if !seen.insert(name.as_str()) || name == KEYFRAMES || name == VIDEO_SUMMARY || name.contains("::") {
            return Err(GraphError::DuplicateModelName(name.clone()));
        }
    }
    let valid: Vec<_> = outputs.iter().filter(|(_, o)| o.valid).collect();
    if valid.is_empty() {
        return Err(GraphError::NoValidOutputs);
    }
    let mut g = EvalGraph::new();
    let hub = |id: &str, size| Node {
        id: id.into(),
        label: id.into(),
        color: "gray".into(),
        size,
    };
    g.add_node(hub(KEYFRAMES, 800))?;
    g.add_node(hub(VIDEO_SUMMARY, 600))?;
    for (i, (model, output)) in valid.into_iter().enumerate() {
        let (dark, light) = palette(i);
        g.add_node(Node {
            id: model.clone(),
            label: model.clone(),
            color: dark.clone(),
            size: MODEL_SIZE,
        })?;
        g.add_edge(model, KEYFRAMES)?;
        g.add_edge(model, VIDEO_SUMMARY)?;
        let summary_id = format!("{model}::summary");
        g.add_node(Node {
            id: summary_id.clone(),
            label: shorten(&output.summary, SUMMARY_LABEL_CHARS),
            color: dark,
            size: SUMMARY_SIZE,
        })?;
        g.add_edge(VIDEO_SUMMARY, &summary_id)?;
        for (k, kf) in output.keyframes.iter().enumerate() {
            let id = format!("{model}::kf::{k}");
            g.add_node(Node {
                id: id.clone(),
                label: format!("{} {}", format_timestamp(kf.timestamp_s), kf.caption),
                color: light.clone(),
                size: KEYFRAME_SIZE,
            })?;
            g.add_edge(KEYFRAMES, &id)?;
        }
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parsing::KeyframeEntry;
    use proptest::prelude::*;

    fn output(n: usize) -> ParsedVideoOutput {
        ParsedVideoOutput {
            summary: "A stage play.".into(),
            keyframes: (0..n)
                .map(|i| KeyframeEntry::new(i as u32 * 5, "same caption").unwrap())
                .collect(),
            valid: true,
        }
    }

    #[test]
    fn two_model_counts() {
        let g =
            build_comparison_graph(&[("Gemini-2-Flash".into(), output(16)), ("Qwen-7B".into(), output(6))]).unwrap();
        assert_eq!(g.node_count(), 28);
        assert_eq!(g.edge_count(), 3 * 2 + 22);
        assert_eq!(g.node(KEYFRAMES).unwrap().size, 800);
        assert_eq!(g.node(VIDEO_SUMMARY).unwrap().color, "gray");
        assert_eq!(g.node("Gemini-2-Flash::kf::0").unwrap().color, "lightblue");
        assert_eq!(g.node("Qwen-7B::kf::0").unwrap().color, "lightcoral");
        assert_eq!(g.node("Qwen-7B::summary").unwrap().color, "red");
        assert_eq!(g.models(), vec!["Gemini-2-Flash", "Qwen-7B"]);
        assert_eq!(g.cluster("Qwen-7B").len(), 8);
    }

    #[test]
    fn single_model_without_keyframes() {
        let g = build_comparison_graph(&[("m".into(), output(0))]).unwrap();
        assert_eq!(g.node_count(), 4);
    }

    #[test]
    fn errors() {
        assert_eq!(build_comparison_graph(&[]), Err(GraphError::NoValidOutputs));
        let mut invalid = output(2);
        invalid.valid = false;
        assert_eq!(
            build_comparison_graph(&[("m".into(), invalid)]),
            Err(GraphError::NoValidOutputs)
        );
        assert_eq!(
            build_comparison_graph(&[("m".into(), output(1)), ("m".into(), output(1))]),
            Err(GraphError::DuplicateModelName("m".into()))
        );
        assert!(build_comparison_graph(&[(KEYFRAMES.into(), output(1))]).is_err());
    }

    #[test]
    fn palette_stays_distinct() {
        let colours: HashSet<String> = (0..40)
            .flat_map(|i| {
                let (d, l) = palette(i);
                [d, l]
            })
            .collect();
        assert_eq!(colours.len(), 80);
    }

    proptest! {
        #[test]
        fn closed_form_counts(ks in proptest::collection::vec(0usize..30, 1..6)) {
            let outputs: Vec<_> = ks.iter().enumerate().map(|(i, k)| (format!("model{i}"), output(*k))).collect();
            let g = build_comparison_graph(&outputs).unwrap();
            let k: usize = ks.iter().sum();
            let m = ks.len();
            prop_assert_eq!(g.node_count(), 2 + 2 * m + k);
            prop_assert_eq!(g.edge_count(), 3 * m + k);
        }
    }
}
