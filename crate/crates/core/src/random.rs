//! Seeded random metric graphs for property batteries.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{BoundaryCondition, GraphFile, MetricGraph, VertexRecord, EdgeRecord, validate};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomGraphParams {
    pub max_vertices: usize,
    pub max_edges: usize,
    pub min_length: f64,
    pub max_length: f64,
    pub allow_loops: bool,
}

impl Default for RandomGraphParams {
    fn default() -> Self {
        Self { max_vertices: 12, max_edges: 20, min_length: 0.1, max_length: 10.0, allow_loops: true }
    }
}

/// A connected multigraph with a random spanning tree, random extra edges
/// (parallel edges and loops allowed), log-uniform lengths and a random
/// nonempty Dirichlet set.
pub fn random_graph<R: Rng + ?Sized>(rng: &mut R, params: &RandomGraphParams) -> MetricGraph {
    assert!(params.max_vertices >= 1 && params.max_edges >= params.max_vertices.saturating_sub(1).max(1));
    let n = rng.gen_range(1..=params.max_vertices);
    let tree_edges = n - 1;
    let min_extra = usize::from(n == 1);
    let extra = rng.gen_range(min_extra..=params.max_edges - tree_edges);

    let mut pairs = Vec::with_capacity(tree_edges + extra);
    for i in 1..n {
        let j = rng.gen_range(0..i);
        pairs.push(if rng.gen_bool(0.5) { (i, j) } else { (j, i) });
    }
    while pairs.len() < tree_edges + extra {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a == b && !params.allow_loops {
            if n == 1 {
                break;
            }
            continue;
        }
        pairs.push((a, b));
    }
    pairs.shuffle(rng);

    let p_dirichlet = rng.gen_range(0.1..0.5);
    let mut dirichlet: Vec<bool> = (0..n).map(|_| rng.gen_bool(p_dirichlet)).collect();
    if !dirichlet.iter().any(|&d| d) {
        dirichlet[rng.gen_range(0..n)] = true;
    }

    let (lo, hi) = (params.min_length.ln(), params.max_length.ln());
    let raw = GraphFile {
        vertices: (0..n)
            .map(|i| VertexRecord {
                id: format!("v{i}"),
                bc: if dirichlet[i] { BoundaryCondition::Dirichlet } else { BoundaryCondition::Natural },
            })
            .collect(),
        edges: pairs
            .iter()
            .enumerate()
            .map(|(k, &(a, b))| EdgeRecord {
                id: format!("e{k}"),
                from: format!("v{a}"),
                to: format!("v{b}"),
                length: if lo == hi { params.min_length } else { rng.gen_range(lo..hi).exp() },
            })
            .collect(),
    };
    validate(&raw).expect("generator produces valid graphs")
}

/// `count` graphs from a ChaCha stream seeded with `seed`.
pub fn battery(seed: u64, count: usize, params: &RandomGraphParams) -> Vec<MetricGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_graph(&mut rng, params)).collect()
}

/// The same graph with a random subset of edges reversed.
pub fn flip_orientations<R: Rng + ?Sized>(rng: &mut R, g: &MetricGraph) -> MetricGraph {
    let mut raw = g.to_file();
    for e in &mut raw.edges {
        if rng.gen_bool(0.5) {
            std::mem::swap(&mut e.from, &mut e.to);
        }
    }
    validate(&raw).expect("reversal preserves validity")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn respects_limits_and_is_reproducible() {
        let params = RandomGraphParams::default();
        let a = battery(7, 200, &params);
        let b = battery(7, 200, &params);
        assert_eq!(a, b);
        for g in &a {
            assert!(g.num_vertices() <= 12 && g.num_edges() <= 20 && g.num_edges() >= 1);
            assert!(g.num_dirichlet() >= 1);
            for e in g.edges() {
                assert!(e.length >= 0.1 && e.length <= 10.0);
            }
        }
        assert!(a.iter().any(|g| g.edges().iter().any(|e| e.is_loop())));
        assert!(a.iter().any(MetricGraph::is_tree));
    }
}
