use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashMap};

use indexmap::IndexMap;

use super::{EvalGraph, GraphError, Result};

/// Edge weights keyed by `(source, target)`.
pub type Weights = HashMap<(String, String), f64>;

pub fn unit_weights(graph: &EvalGraph) -> Weights {
    graph
        .edges()
        .map(|(s, t)| ((s.to_string(), t.to_string()), 1.0))
        .collect()
}

/// The graph with every edge also present in reverse.
pub fn undirected(graph: &EvalGraph) -> EvalGraph {
    let mut g = graph.clone();
    let reversed: Vec<(String, String)> = graph.edges().map(|(s, t)| (t.to_string(), s.to_string())).collect();
    for (s, t) in reversed {
        g.add_edge(&s, &t).expect("endpoints exist");
    }
    g
}

#[derive(PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

/// Shortest distances from `source` along directed edges. Unreachable nodes
/// are absent from the result.
pub fn dijkstra(graph: &EvalGraph, source: &str, weights: &Weights) -> Result<IndexMap<String, f64>> {
    let src = graph
        .index_of(source)
        .ok_or_else(|| GraphError::UnknownSource(source.to_string()))?;
    let n = graph.node_count();
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (s, t) in graph.edges() {
        let w = *weights
            .get(&(s.to_string(), t.to_string()))
            .ok_or_else(|| GraphError::MissingWeight(s.to_string(), t.to_string()))?;
        if w.is_nan() || w < 0.0 {
            return Err(GraphError::NegativeWeight(s.to_string(), t.to_string(), w));
        }
        let (a, b) = (
            graph.index_of(s).expect("edge endpoint"),
            graph.index_of(t).expect("edge endpoint"),
        );
        adj[a].push((b, w));
    }
    let mut dist = vec![f64::INFINITY; n];
    let mut heap = BinaryHeap::new();
    dist[src] = 0.0;
    heap.push(Reverse(Entry(0.0, src)));
    while let Some(Reverse(Entry(d, u))) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for &(v, w) in &adj[u] {
            let nd = d + w;
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(Reverse(Entry(nd, v)));
            }
        }
    }
    Ok(graph
        .nodes()
        .zip(dist)
        .filter(|(_, d)| d.is_finite())
        .map(|(node, d)| (node.id.clone(), d))
        .collect())
}
