use std::ops::Range;

use serde::Serialize;

use crate::graph::{GraphBuilder, MetricGraph};

/// Uniform P1 subdivision of every edge. Degrees of freedom are the natural
/// vertices followed by the interior nodes of each edge, tail to head.
#[derive(Debug, Clone)]
pub struct Mesh {
    pub h_target: f64,
    /// Segment count `n_e ≥ 2` per edge.
    pub segments: Vec<usize>,
    /// Segment length `ℓ_e / n_e` per edge.
    pub step: Vec<f64>,
    /// DOF of each graph vertex, `None` on the Dirichlet set.
    pub vertex_dof: Vec<Option<usize>>,
    /// DOFs of the interior nodes of each edge.
    pub interior: Vec<Range<usize>>,
    /// Endpoint DOFs `(tail, head)` of each edge.
    pub ends: Vec<(Option<usize>, Option<usize>)>,
    pub coords: Vec<NodeCoord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "at", rename_all = "snake_case")]
pub enum NodeCoord {
    Vertex { vertex: usize },
    Interior { edge: usize, offset: f64 },
}

pub fn segment_count(length: f64, h_target: f64) -> usize {
    ((length / h_target - 1e-9).ceil() as usize).max(2)
}

pub fn build_mesh(g: &MetricGraph, h_target: f64) -> Mesh {
    assert!(h_target > 0.0 && h_target.is_finite(), "mesh size must be positive");
    let mut coords = Vec::new();
    let mut vertex_dof = vec![None; g.num_vertices()];
    for v in g.natural_vertices() {
        vertex_dof[v] = Some(coords.len());
        coords.push(NodeCoord::Vertex { vertex: v });
    }
    let mut segments = Vec::with_capacity(g.num_edges());
    let mut step = Vec::with_capacity(g.num_edges());
    let mut interior = Vec::with_capacity(g.num_edges());
    let mut ends = Vec::with_capacity(g.num_edges());
    for (ei, e) in g.edges().iter().enumerate() {
        let n = segment_count(e.length, h_target);
        let s = e.length / n as f64;
        let start = coords.len();
        coords.extend((1..n).map(|i| NodeCoord::Interior { edge: ei, offset: i as f64 * s }));
        segments.push(n);
        step.push(s);
        interior.push(start..coords.len());
        ends.push((vertex_dof[e.tail], vertex_dof[e.head]));
    }
    Mesh { h_target, segments, step, vertex_dof, interior, ends, coords }
}

impl Mesh {
    pub fn num_dofs(&self) -> usize {
        self.coords.len()
    }

    pub fn num_segments(&self) -> usize {
        self.segments.iter().sum()
    }

    /// Number of mesh nodes including Dirichlet vertices.
    pub fn num_nodes(&self) -> usize {
        self.vertex_dof.len() + self.interior.iter().map(|r| r.len()).sum::<usize>()
    }

    /// Largest segment length.
    pub fn h_max(&self) -> f64 {
        self.step.iter().copied().fold(0.0, f64::max)
    }

    /// Value of node `j ∈ [0, n_e]` along edge `e` for a DOF vector.
    pub fn node_value(&self, u: &[f64], e: usize, j: usize) -> f64 {
        let n = self.segments[e];
        let dof = if j == 0 {
            self.ends[e].0
        } else if j == n {
            self.ends[e].1
        } else {
            Some(self.interior[e].start + j - 1)
        };
        dof.map_or(0.0, |d| u[d])
    }

    /// P1 interpolant of `u` at offset `x` along edge `e`.
    pub fn evaluate(&self, u: &[f64], e: usize, x: f64) -> f64 {
        let (n, s) = (self.segments[e], self.step[e]);
        let i = ((x / s).floor() as usize).min(n - 1);
        let t = (x / s - i as f64).clamp(0.0, 1.0);
        (1.0 - t) * self.node_value(u, e, i) + t * self.node_value(u, e, i + 1)
    }

    /// `b_i = ∫ N_i`, the load vector of the constant function 1.
    pub fn load_vector(&self) -> Vec<f64> {
        let mut b = vec![0.0; self.num_dofs()];
        for (e, range) in self.interior.iter().enumerate() {
            let s = self.step[e];
            for d in range.clone() {
                b[d] = s;
            }
            for d in [self.ends[e].0, self.ends[e].1].into_iter().flatten() {
                b[d] += s / 2.0;
            }
        }
        b
    }

    /// The subdivided graph, with inserted natural vertices `edge@j`.
    pub fn refined_graph(&self, g: &MetricGraph) -> MetricGraph {
        let mut b = GraphBuilder::new();
        for v in g.vertices() {
            b = b.vertex(v.id.clone(), v.bc);
        }
        for (ei, e) in g.edges().iter().enumerate() {
            let n = self.segments[ei];
            let name = |j: usize| {
                if j == 0 {
                    g.vertex(e.tail).id.clone()
                } else if j == n {
                    g.vertex(e.head).id.clone()
                } else {
                    format!("{}@{j}", e.id)
                }
            };
            for j in 1..n {
                b = b.natural(name(j));
            }
            for j in 0..n {
                b = b.edge(format!("{}#{j}", e.id), &name(j), &name(j + 1), self.step[ei]);
            }
        }
        b.build().expect("subdivision of a valid graph is valid")
    }
}
