#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;

use quantum_torsion::graph::EdgeRecord;
use quantum_torsion::surgery::{Pendant, SurgeryOp};
use quantum_torsion::MetricGraph;

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

/// A random surgery applicable to `g`. Lengthening steps are at least `1e-3`.
pub fn random_op<R: Rng>(rng: &mut R, g: &MetricGraph) -> SurgeryOp {
    let id = |v: usize| g.vertex(v).id.clone();
    let natural: Vec<usize> = g.natural_vertices().collect();
    let dirichlet: Vec<usize> = g.dirichlet_vertices().collect();
    loop {
        match rng.gen_range(0..7) {
            0 if natural.len() >= 2 => {
                let pair: Vec<_> = natural.choose_multiple(rng, 2).collect();
                return SurgeryOp::Glue { v: id(*pair[0]), w: id(*pair[1]) };
            }
            0 if dirichlet.len() >= 2 => {
                let pair: Vec<_> = dirichlet.choose_multiple(rng, 2).collect();
                return SurgeryOp::Glue { v: id(*pair[0]), w: id(*pair[1]) };
            }
            1 if !natural.is_empty() => return SurgeryOp::AddDirichlet { v: id(*natural.choose(rng).unwrap()) },
            2 if !natural.is_empty() => {
                let at = id(*natural.choose(rng).unwrap());
                let size = rng.gen_range(1..=3);
                let vertices: Vec<String> = (0..size).map(|i| format!("pendant{i}")).collect();
                let edges = (0..size)
                    .map(|i| {
                        let from = if i == 0 { at.clone() } else { vertices[rng.gen_range(0..i)].clone() };
                        EdgeRecord { id: format!("pendant-e{i}"), from, to: vertices[i].clone(), length: log_uniform(rng, 0.1, 5.0) }
                    })
                    .collect();
                return SurgeryOp::AttachPendant { at, pendant: Pendant { vertices, edges } };
            }
            3 => {
                let v = rng.gen_range(0..g.num_vertices());
                let w = rng.gen_range(0..g.num_vertices());
                return SurgeryOp::AddEdge { v: id(v), w: id(w), length: log_uniform(rng, 0.1, 5.0) };
            }
            4 => {
                let e = g.edge(rng.gen_range(0..g.num_edges()));
                let delta = (e.length * rng.gen_range(0.0..0.5)).max(1e-3);
                return SurgeryOp::Lengthen { edge: e.id.clone(), delta };
            }
            5 => return SurgeryOp::Scale { factor: log_uniform(rng, 0.1, 10.0) },
            6 => {
                if let Some((a, b)) = parallel_pair(g) {
                    return SurgeryOp::UnfoldParallel { e1: a, e2: b };
                }
            }
            _ => {}
        }
    }
}

fn parallel_pair(g: &MetricGraph) -> Option<(String, String)> {
    let key = |i: usize| {
        let e = g.edge(i);
        (e.tail.min(e.head), e.tail.max(e.head))
    };
    for i in 0..g.num_edges() {
        for j in i + 1..g.num_edges() {
            if key(i) == key(j) {
                return Some((g.edge(i).id.clone(), g.edge(j).id.clone()));
            }
        }
    }
    None
}
