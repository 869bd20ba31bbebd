//! Fruchterman-Reingold force-directed placement.

use indexmap::IndexMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::EvalGraph;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LayoutParams {
    pub c: f64,
    pub area: f64,
    /// Defaults to `50 * ceil(sqrt(n))`.
    pub iterations: Option<usize>,
    pub seed: u64,
    /// Defaults to `0.1 * sqrt(area)`.
    pub initial_temperature: Option<f64>,
    pub cooling: f64,
}

impl Default for LayoutParams {
    fn default() -> Self {
        Self {
            c: 1.0,
            area: 1.0,
            iterations: None,
            seed: 42,
            initial_temperature: None,
            cooling: 0.95,
        }
    }
}

impl LayoutParams {
    /// Optimal pairwise distance `C * sqrt(A / n)`.
    pub fn optimal_distance(&self, n: usize) -> f64 {
        self.c * (self.area / n.max(1) as f64).sqrt()
    }

    pub fn iterations_for(&self, n: usize) -> usize {
        self.iterations
            .unwrap_or_else(|| 50 * (n as f64).sqrt().ceil() as usize)
    }

    pub fn temperature(&self) -> f64 {
        self.initial_temperature.unwrap_or(0.1 * self.area.sqrt())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodePosition {
    pub x: f64,
    pub y: f64,
}

pub type Positions = IndexMap<String, NodePosition>;

/// Lays the graph out from seeded uniform positions over the layout square.
pub fn fr_layout(graph: &EvalGraph, params: &LayoutParams) -> Positions {
    let side = params.area.sqrt();
    if graph.node_count() == 1 {
        let id = graph.nodes().next().map(|n| n.id.clone()).unwrap_or_default();
        return [(
            id,
            NodePosition {
                x: side / 2.0,
                y: side / 2.0,
            },
        )]
        .into_iter()
        .collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let initial: Vec<(f64, f64)> = graph
        .nodes()
        .map(|_| (rng.gen::<f64>() * side, rng.gen::<f64>() * side))
        .collect();
    run(graph, params, initial)
}

/// Lays the graph out from caller-supplied starting positions (nodes
/// missing from `initial` start at the centre).
pub fn fr_layout_from(graph: &EvalGraph, params: &LayoutParams, initial: &Positions) -> Positions {
    let c = params.area.sqrt() / 2.0;
    let start = graph
        .nodes()
        .map(|n| initial.get(&n.id).map_or((c, c), |p| (p.x, p.y)))
        .collect();
    run(graph, params, start)
}

fn run(graph: &EvalGraph, params: &LayoutParams, mut pos: Vec<(f64, f64)>) -> Positions {
    let n = pos.len();
    let k = params.optimal_distance(n);
    let min_d = 1e-9 * k.max(f64::MIN_POSITIVE);
    // Forces ignore direction; a reciprocal pair counts once.
    let mut springs: Vec<(usize, usize)> = graph
        .edges()
        .filter_map(|(s, t)| {
            let (a, b) = (graph.index_of(s)?, graph.index_of(t)?);
            (a != b).then(|| (a.min(b), a.max(b)))
        })
        .collect();
    springs.sort_unstable();
    springs.dedup();

    let mut t = params.temperature();
    let mut disp = vec![(0.0, 0.0); n];
    for _ in 0..params.iterations_for(n) {
        disp.iter_mut().for_each(|d| *d = (0.0, 0.0));
        for i in 0..n {
            for j in i + 1..n {
                let (mut dx, mut dy) = (pos[i].0 - pos[j].0, pos[i].1 - pos[j].1);
                let mut d = (dx * dx + dy * dy).sqrt();
                if d < min_d {
                    (dx, dy, d) = (min_d, 0.0, min_d);
                }
                let f = k * k / d;
                let (fx, fy) = (dx / d * f, dy / d * f);
                disp[i].0 += fx;
                disp[i].1 += fy;
                disp[j].0 -= fx;
                disp[j].1 -= fy;
            }
        }
        for &(a, b) in &springs {
            let (dx, dy) = (pos[a].0 - pos[b].0, pos[a].1 - pos[b].1);
            let d = (dx * dx + dy * dy).sqrt();
            if d < min_d {
                continue;
            }
            let f = d * d / k;
            let (fx, fy) = (dx / d * f, dy / d * f);
            disp[a].0 -= fx;
            disp[a].1 -= fy;
            disp[b].0 += fx;
            disp[b].1 += fy;
        }
        for (p, d) in pos.iter_mut().zip(&disp) {
            let len = (d.0 * d.0 + d.1 * d.1).sqrt();
            if len > 0.0 {
                let step = len.min(t);
                p.0 += d.0 / len * step;
                p.1 += d.1 / len * step;
            }
        }
        t *= params.cooling;
    }
    graph
        .nodes()
        .zip(pos)
        .map(|(node, (x, y))| (node.id.clone(), NodePosition { x, y }))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knowledge_graph::Node;

    fn node(id: &str) -> Node {
        Node {
            id: id.into(),
            label: id.into(),
            color: "gray".into(),
            size: 1,
        }
    }

    fn dist(p: &Positions, a: &str, b: &str) -> f64 {
        ((p[a].x - p[b].x).powi(2) + (p[a].y - p[b].y).powi(2)).sqrt()
    }

    #[test]
    fn pair_settles_at_optimal_distance() {
        let mut g = EvalGraph::new();
        g.add_node(node("a")).unwrap();
        g.add_node(node("b")).unwrap();
        g.add_edge("a", "b").unwrap();
        let params = LayoutParams::default();
        let p = fr_layout(&g, &params);
        let k = params.optimal_distance(2);
        assert!(
            (dist(&p, "a", "b") - k).abs() / k < 0.01,
            "{} vs {k}",
            dist(&p, "a", "b")
        );
    }

    #[test]
    fn star_is_symmetric() {
        let mut g = EvalGraph::new();
        g.add_node(node("hub")).unwrap();
        let mut init = Positions::new();
        init.insert("hub".into(), NodePosition { x: 0.5, y: 0.5 });
        for i in 0..6 {
            let id = format!("leaf{i}");
            g.add_node(node(&id)).unwrap();
            g.add_edge("hub", &id).unwrap();
            let a = i as f64 * std::f64::consts::TAU / 6.0;
            init.insert(
                id,
                NodePosition {
                    x: 0.5 + 0.2 * a.cos(),
                    y: 0.5 + 0.2 * a.sin(),
                },
            );
        }
        let p = fr_layout_from(&g, &LayoutParams::default(), &init);
        let d: Vec<f64> = (0..6).map(|i| dist(&p, "hub", &format!("leaf{i}"))).collect();
        let (lo, hi) = d
            .iter()
            .fold((f64::MAX, f64::MIN), |(lo, hi), x| (lo.min(*x), hi.max(*x)));
        assert!((hi - lo) / hi < 0.05, "{d:?}");
    }

    #[test]
    fn seeded_layout_is_reproducible() {
        let mut g = EvalGraph::new();
        for i in 0..10 {
            g.add_node(node(&i.to_string())).unwrap();
        }
        for i in 1..10 {
            g.add_edge("0", &i.to_string()).unwrap();
        }
        let params = LayoutParams::default();
        let a = fr_layout(&g, &params);
        let b = fr_layout(&g, &params);
        for (pa, pb) in a.values().zip(b.values()) {
            assert_eq!(pa.x.to_bits(), pb.x.to_bits());
            assert_eq!(pa.y.to_bits(), pb.y.to_bits());
        }
        let c = fr_layout(&g, &LayoutParams { seed: 7, ..params });
        assert_ne!(a, c);
    }

    #[test]
    fn lone_node_sits_at_centre() {
        let mut g = EvalGraph::new();
        g.add_node(node("only")).unwrap();
        let p = fr_layout(
            &g,
            &LayoutParams {
                area: 4.0,
                ..Default::default()
            },
        );
        assert_eq!(p["only"], NodePosition { x: 1.0, y: 1.0 });
    }
}
