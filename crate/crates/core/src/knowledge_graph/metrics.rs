use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::{dijkstra, undirected, unit_weights, EvalGraph, GraphError, Positions, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSpread {
    pub nodes: usize,
    /// Mean Euclidean distance over the cluster's node pairs.
    pub mean_pairwise_distance: f64,
    /// Mean hop distance from the centre over the cluster's nodes.
    pub mean_hops_to_center: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphMetrics {
    pub center: String,
    pub node_count: usize,
    pub edge_count: usize,
    /// Mean Euclidean distance over all unordered node pairs.
    pub mean_pairwise_distance: f64,
    /// Hop distance to the centre on the undirected view.
    pub distances_to_center: IndexMap<String, f64>,
    pub unreachable: Vec<String>,
    pub mean_distance_to_center: f64,
    pub clusters: IndexMap<String, ClusterSpread>,
}

fn mean_pairwise(ids: &[&str], positions: &Positions) -> f64 {
    let pts: Vec<(f64, f64)> = ids.iter().map(|id| (positions[*id].x, positions[*id].y)).collect();
    let mut sum = 0.0;
    let mut pairs = 0usize;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            sum += ((pts[i].0 - pts[j].0).powi(2) + (pts[i].1 - pts[j].1).powi(2)).sqrt();
            pairs += 1;
        }
    }
    if pairs == 0 {
        0.0
    } else {
        sum / pairs as f64
    }
}

pub fn graph_metrics(graph: &EvalGraph, positions: &Positions, center: &str) -> Result<GraphMetrics> {
    if !graph.contains(center) {
        return Err(GraphError::UnknownCenter(center.to_string()));
    }
    if let Some(missing) = graph.nodes().find(|n| !positions.contains_key(&n.id)) {
        return Err(GraphError::MissingPosition(missing.id.clone()));
    }
    let ids: Vec<&str> = graph.nodes().map(|n| n.id.as_str()).collect();
    let view = undirected(graph);
    let hops = dijkstra(&view, center, &unit_weights(&view))?;
    let unreachable: Vec<String> = ids
        .iter()
        .filter(|id| !hops.contains_key(**id))
        .map(|s| s.to_string())
        .collect();
    let others: Vec<f64> = hops.iter().filter(|(id, _)| *id != center).map(|(_, d)| *d).collect();
    let mean_distance_to_center = if others.is_empty() {
        0.0
    } else {
        others.iter().sum::<f64>() / others.len() as f64
    };
    let clusters = graph
        .models()
        .into_iter()
        .map(|model| {
            let members = graph.cluster(model);
            let reach: Vec<f64> = members.iter().filter_map(|id| hops.get(*id).copied()).collect();
            let spread = ClusterSpread {
                nodes: members.len(),
                mean_pairwise_distance: mean_pairwise(&members, positions),
                mean_hops_to_center: if reach.is_empty() {
                    0.0
                } else {
                    reach.iter().sum::<f64>() / reach.len() as f64
                },
            };
            (model.to_string(), spread)
        })
        .collect();
    Ok(GraphMetrics {
        center: center.to_string(),
        node_count: graph.node_count(),
        edge_count: graph.edge_count(),
        mean_pairwise_distance: mean_pairwise(&ids, positions),
        distances_to_center: hops,
        unreachable,
        mean_distance_to_center,
        clusters,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knowledge_graph::{build_comparison_graph, fr_layout, LayoutParams, Node, NodePosition, KEYFRAMES};
    use crate::parsing::{KeyframeEntry, ParsedVideoOutput};
    use proptest::prelude::*;
    use std::collections::VecDeque;

    fn bare(n: usize, edges: &[(usize, usize)]) -> EvalGraph {
        let mut g = EvalGraph::new();
        for i in 0..n {
            g.add_node(Node {
                id: i.to_string(),
                label: String::new(),
                color: "gray".into(),
                size: 1,
            })
            .unwrap();
        }
        for (a, b) in edges {
            g.add_edge(&a.to_string(), &b.to_string()).unwrap();
        }
        g
    }

    fn at(points: &[(f64, f64)]) -> Positions {
        points
            .iter()
            .enumerate()
            .map(|(i, (x, y))| (i.to_string(), NodePosition { x: *x, y: *y }))
            .collect()
    }

    #[test]
    fn three_four_five() {
        let g = bare(2, &[]);
        let m = graph_metrics(&g, &at(&[(0.0, 0.0), (3.0, 4.0)]), "0").unwrap();
        assert_eq!(m.mean_pairwise_distance, 5.0);
        assert_eq!(m.unreachable, vec!["1".to_string()]);
        assert!(matches!(
            graph_metrics(&g, &at(&[(0.0, 0.0), (3.0, 4.0)]), "x"),
            Err(GraphError::UnknownCenter(_))
        ));
        assert!(matches!(
            graph_metrics(&g, &at(&[(0.0, 0.0)]), "0"),
            Err(GraphError::MissingPosition(_))
        ));
    }

    #[test]
    fn keyframes_are_one_hop_from_hub() {
        let out = ParsedVideoOutput {
            summary: "s".into(),
            keyframes: (0..5).map(|i| KeyframeEntry::new(i, "c").unwrap()).collect(),
            valid: true,
        };
        let g = build_comparison_graph(&[("m".into(), out)]).unwrap();
        let m = graph_metrics(&g, &fr_layout(&g, &LayoutParams::default()), KEYFRAMES).unwrap();
        for i in 0..5 {
            assert_eq!(m.distances_to_center[&format!("m::kf::{i}")], 1.0);
        }
        assert_eq!(m.distances_to_center["m::summary"], 3.0);
        assert_eq!(m.clusters["m"].nodes, 7);
    }

    proptest! {
        #[test]
        fn hops_match_bfs(n in 2usize..15, raw in proptest::collection::vec((0usize..15, 0usize..15), 0..30)) {
            let edges: Vec<(usize, usize)> = raw.into_iter().map(|(a, b)| (a % n, b % n)).filter(|(a, b)| a != b).collect();
            let g = bare(n, &edges);
            let pos = at(&vec![(0.0, 0.0); n]);
            let m = graph_metrics(&g, &pos, "0").unwrap();
            let mut dist = vec![None; n];
            dist[0] = Some(0usize);
            let mut q = VecDeque::from([0usize]);
            while let Some(u) = q.pop_front() {
                for &(a, b) in &edges {
                    for (x, y) in [(a, b), (b, a)] {
                        if x == u && dist[y].is_none() {
                            dist[y] = Some(dist[u].unwrap() + 1);
                            q.push_back(y);
                        }
                    }
                }
            }
            for (i, d) in dist.into_iter().enumerate() {
                prop_assert_eq!(m.distances_to_center.get(&i.to_string()).copied(), d.map(|d| d as f64));
            }
        }

        #[test]
        fn spread_is_translation_invariant(pts in proptest::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 2..12), dx in -5.0f64..5.0, dy in -5.0f64..5.0) {
            let g = bare(pts.len(), &[]);
            let a = graph_metrics(&g, &at(&pts), "0").unwrap().mean_pairwise_distance;
            let shifted: Vec<_> = pts.iter().map(|(x, y)| (x + dx, y + dy)).collect();
            let b = graph_metrics(&g, &at(&shifted), "0").unwrap().mean_pairwise_distance;
            prop_assert!((a - b).abs() < 1e-9);
        }
    }
}
