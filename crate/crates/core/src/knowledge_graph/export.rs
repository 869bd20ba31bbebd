use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::{EvalGraph, GraphError, Node, NodePosition, Positions, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocNode {
    pub id: String,
    pub label: String,
    pub color: String,
    pub size: u32,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocEdge {
    pub source: String,
    pub target: String,
}

/// JSON graph document: `{nodes: [{id, label, color, size, x, y}], edges: [{source, target}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphDocument {
    pub nodes: Vec<DocNode>,
    pub edges: Vec<DocEdge>,
}

fn position(positions: &Positions, id: &str) -> Result<NodePosition> {
    positions
        .get(id)
        .copied()
        .ok_or_else(|| GraphError::MissingPosition(id.to_string()))
}

pub fn to_json(graph: &EvalGraph, positions: &Positions) -> Result<String> {
    let doc = GraphDocument {
        nodes: graph
            .nodes()
            .map(|n| {
                let p = position(positions, &n.id)?;
                Ok(DocNode {
                    id: n.id.clone(),
                    label: n.label.clone(),
                    color: n.color.clone(),
                    size: n.size,
                    x: p.x,
                    y: p.y,
                })
            })
            .collect::<Result<_>>()?,
        edges: graph
            .edges()
            .map(|(s, t)| DocEdge {
                source: s.into(),
                target: t.into(),
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc).map_err(|e| GraphError::Format(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn from_json(text: &str) -> Result<(EvalGraph, Positions)> {
    let doc: GraphDocument = serde_json::from_str(text).map_err(|e| GraphError::Format(e.to_string()))?;
    let mut g = EvalGraph::new();
    let mut positions = Positions::new();
    for n in doc.nodes {
        positions.insert(n.id.clone(), NodePosition { x: n.x, y: n.y });
        g.add_node(Node {
            id: n.id,
            label: n.label,
            color: n.color,
            size: n.size,
        })?;
    }
    for e in doc.edges {
        g.add_edge(&e.source, &e.target)?;
    }
    Ok((g, positions))
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Graphviz document with fixed positions (`neato -n` renders it as laid out).
pub fn to_dot(graph: &EvalGraph, positions: &Positions) -> Result<String> {
    let mut s = String::from("digraph knowledge_graph {\n  node [shape=circle, style=filled];\n");
    for n in graph.nodes() {
        let p = position(positions, &n.id)?;
        // Sizes are marker areas; scale to an inch-ish diameter.
        let width = (n.size as f64).sqrt() / 40.0;
        writeln!(
            s,
            "  {} [label={}, fillcolor={}, width={:.3}, pos=\"{:.6},{:.6}!\"];",
            quote(&n.id),
            quote(&n.label),
            quote(&n.color),
            width,
            p.x,
            p.y
        )
        .expect("write to string");
    }
    for (a, b) in graph.edges() {
        writeln!(s, "  {} -> {};", quote(a), quote(b)).expect("write to string");
    }
    s.push_str("}\n");
    Ok(s)
}
