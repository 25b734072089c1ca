use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{validate, BoundaryCondition, EdgeRecord, GraphFile, MetricGraph, VertexRecord};
use crate::torsion::torsion_function;

/// A pendant graph to be attached at a single host vertex. `vertices` are
/// new natural vertices; edge endpoints are either new vertices or the host.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pendant {
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SurgeryOp {
    /// Identify `w` with `v`; both carry the same boundary condition.
    Glue { v: String, w: String },
    AddDirichlet { v: String },
    AttachPendant { at: String, pendant: Pendant },
    AddEdge { v: String, w: String, length: f64 },
    Lengthen { edge: String, delta: f64 },
    Scale { factor: f64 },
    /// Replace two parallel edges by one edge of the summed length.
    UnfoldParallel { e1: String, e2: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Direction {
    NonIncreasing,
    NonDecreasing,
    StrictIncrease,
    StrictDecrease,
    /// `T(after) = factor · T(before)`.
    Exact(f64),
    /// No claim; the hypothesis of the monotonicity rule is not met.
    Indeterminate,
}

impl Direction {
    /// Whether `after` is consistent with this direction given `before`, up to
    /// `rel_tol · max(before, after)` (for `Exact`, `rel_tol · factor · before`).
    pub fn admits(&self, before: f64, after: f64, rel_tol: f64) -> bool {
        let tol = rel_tol * before.abs().max(after.abs());
        match *self {
            Direction::NonIncreasing => after <= before + tol,
            Direction::NonDecreasing => after >= before - tol,
            Direction::StrictIncrease => after > before + tol,
            Direction::StrictDecrease => after < before - tol,
            Direction::Exact(c) => (after - c * before).abs() <= rel_tol * (c * before).abs(),
            Direction::Indeterminate => true,
        }
    }
}

impl SurgeryOp {
    pub fn description(&self) -> String {
        match self {
            SurgeryOp::Glue { v, w } => format!("glue `{w}` into `{v}`"),
            SurgeryOp::AddDirichlet { v } => format!("impose Dirichlet at `{v}`"),
            SurgeryOp::AttachPendant { at, pendant } => {
                format!("attach pendant with {} edges at `{at}`", pendant.edges.len())
            }
            SurgeryOp::AddEdge { v, w, length } => format!("add edge `{v}`-`{w}` of length {length}"),
            SurgeryOp::Lengthen { edge, delta } => format!("lengthen `{edge}` by {delta}"),
            SurgeryOp::Scale { factor } => format!("scale all lengths by {factor}"),
            SurgeryOp::UnfoldParallel { e1, e2 } => format!("unfold parallel `{e1}`, `{e2}`"),
        }
    }
}

fn violated(msg: impl Into<String>) -> Error {
    Error::PreconditionViolated(msg.into())
}

fn fresh_edge_id(raw: &GraphFile, base: &str) -> String {
    let taken = |id: &str| raw.edges.iter().any(|e| e.id == id);
    if !taken(base) {
        return base.to_string();
    }
    (1..).map(|k| format!("{base}#{k}")).find(|id| !taken(id)).expect("unbounded search")
}

pub fn apply(g: &MetricGraph, op: &SurgeryOp) -> Result<MetricGraph> {
    let mut raw = g.to_file();
    match op {
        SurgeryOp::Glue { v, w } => {
            let (vi, wi) = (g.vertex_by_id(v)?, g.vertex_by_id(w)?);
            if vi == wi {
                return Err(violated("glue needs two different vertices"));
            }
            if g.vertex(vi).bc != g.vertex(wi).bc {
                return Err(violated("glue needs vertices with the same boundary condition"));
            }
            raw.vertices.retain(|r| &r.id != w);
            for e in &mut raw.edges {
                if &e.from == w {
                    e.from = v.clone();
                }
                if &e.to == w {
                    e.to = v.clone();
                }
            }
        }
        SurgeryOp::AddDirichlet { v } => {
            let vi = g.vertex_by_id(v)?;
            if g.is_dirichlet(vi) {
                return Err(violated(format!("`{v}` is already Dirichlet")));
            }
            raw.vertices[vi].bc = BoundaryCondition::Dirichlet;
        }
        SurgeryOp::AttachPendant { at, pendant } => {
            let host = g.vertex_by_id(at)?;
            if g.is_dirichlet(host) {
                return Err(violated("pendant must be attached at a natural vertex"));
            }
            if pendant.edges.is_empty() {
                return Err(violated("pendant has no edges"));
            }
            for id in &pendant.vertices {
                if g.vertex_by_id(id).is_ok() {
                    return Err(violated(format!("pendant vertex `{id}` already exists")));
                }
            }
            for e in &pendant.edges {
                for end in [&e.from, &e.to] {
                    if end != at && !pendant.vertices.contains(end) {
                        return Err(violated(format!("pendant edge `{}` leaves the pendant at `{end}`", e.id)));
                    }
                }
            }
            raw.vertices.extend(
                pendant.vertices.iter().map(|id| VertexRecord { id: id.clone(), bc: BoundaryCondition::Natural }),
            );
            raw.edges.extend(pendant.edges.iter().cloned());
        }
        SurgeryOp::AddEdge { v, w, length } => {
            g.vertex_by_id(v)?;
            g.vertex_by_id(w)?;
            let id = fresh_edge_id(&raw, &format!("{v}~{w}"));
            raw.edges.push(EdgeRecord { id, from: v.clone(), to: w.clone(), length: *length });
        }
        SurgeryOp::Lengthen { edge, delta } => {
            let ei = g.edge_by_id(edge)?;
            if !(*delta > 0.0) {
                return Err(violated("lengthening needs delta > 0"));
            }
            raw.edges[ei].length += delta;
        }
        SurgeryOp::Scale { factor } => {
            if !(*factor > 0.0 && factor.is_finite()) {
                return Err(violated("scale factor must be positive"));
            }
            for e in &mut raw.edges {
                e.length *= factor;
            }
        }
        SurgeryOp::UnfoldParallel { e1, e2 } => {
            let (a, b) = (g.edge_by_id(e1)?, g.edge_by_id(e2)?);
            if a == b {
                return Err(violated("unfolding needs two different edges"));
            }
            let (ea, eb) = (g.edge(a), g.edge(b));
            let same = (ea.tail, ea.head) == (eb.tail, eb.head) || (ea.tail, ea.head) == (eb.head, eb.tail);
            if !same {
                return Err(violated(format!("`{e1}` and `{e2}` are not parallel")));
            }
            let id = fresh_edge_id(&raw, &format!("{e1}+{e2}"));
            let merged = EdgeRecord {
                id,
                from: g.vertex(ea.tail).id.clone(),
                to: g.vertex(ea.head).id.clone(),
                length: ea.length + eb.length,
            };
            raw.edges[a] = merged;
            raw.edges.remove(b);
        }
    }
    Ok(validate(&raw)?)
}

/// Relative tolerance for certifying equal torsion values.
pub const EQUAL_VALUE_TOL: f64 = 1e-9;

/// The monotonicity rule for `op` applied to `g`. Adding an edge carries a
/// claim only when the torsion of `g` takes equal values at its endpoints.
pub fn predicted_direction(g: &MetricGraph, op: &SurgeryOp) -> Result<Direction> {
    Ok(match op {
        SurgeryOp::Glue { .. } => Direction::NonIncreasing,
        SurgeryOp::AddDirichlet { .. } => Direction::StrictDecrease,
        SurgeryOp::AttachPendant { .. } => Direction::NonDecreasing,
        SurgeryOp::AddEdge { v, w, .. } => {
            let sol = torsion_function(g)?;
            let (a, b) = (sol.vertex_value(g.vertex_by_id(v)?), sol.vertex_value(g.vertex_by_id(w)?));
            if (a - b).abs() <= EQUAL_VALUE_TOL * sol.sup.value {
                Direction::NonDecreasing
            } else {
                Direction::Indeterminate
            }
        }
        SurgeryOp::Lengthen { .. } => Direction::StrictIncrease,
        SurgeryOp::Scale { factor } => Direction::Exact(factor.powi(3)),
        SurgeryOp::UnfoldParallel { .. } => Direction::StrictIncrease,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphBuilder;
    use crate::torsion::torsion_function;

    fn t(g: &MetricGraph) -> f64 {
        torsion_function(g).unwrap().rigidity
    }

    fn j0(a: f64) -> MetricGraph {
        GraphBuilder::new().dirichlet("d").natural("n").edge("e", "d", "n", a).build().unwrap()
    }

    #[test]
    fn glue_dirichlet_ends_of_interval() {
        let j1 = GraphBuilder::new().dirichlet("a").dirichlet("b").edge("e", "a", "b", 1.0).build().unwrap();
        let looped = apply(&j1, &SurgeryOp::Glue { v: "a".into(), w: "b".into() }).unwrap();
        assert!(looped.edge(0).is_loop());
        assert_eq!(looped.num_vertices(), 1);
        assert!((t(&looped) - t(&j1)).abs() < 1e-15);
    }

    #[test]
    fn scale_is_cubic() {
        let scaled = apply(&j0(1.0), &SurgeryOp::Scale { factor: 2.0 }).unwrap();
        assert!((t(&scaled) - 8.0 / 3.0).abs() < 1e-14);
        assert_eq!(predicted_direction(&j0(1.0), &SurgeryOp::Scale { factor: 2.0 }).unwrap(), Direction::Exact(8.0));
    }

    #[test]
    fn unfold_two_pumpkin_into_interval() {
        let pumpkin = GraphBuilder::new()
            .dirichlet("d")
            .natural("n")
            .edge("a", "d", "n", 1.0)
            .edge("b", "n", "d", 1.0)
            .build()
            .unwrap();
        let out = apply(&pumpkin, &SurgeryOp::UnfoldParallel { e1: "a".into(), e2: "b".into() }).unwrap();
        assert_eq!(out.num_edges(), 1);
        assert_eq!(out.total_length(), 2.0);
        assert!((t(&out) - 8.0 / 3.0).abs() < 1e-14);
        assert!(t(&out) > t(&pumpkin));
    }

    #[test]
    fn preconditions() {
        let g = j0(1.0);
        let bad = [
            SurgeryOp::Glue { v: "d".into(), w: "n".into() },
            SurgeryOp::AddDirichlet { v: "d".into() },
            SurgeryOp::Lengthen { edge: "e".into(), delta: 0.0 },
            SurgeryOp::Scale { factor: -1.0 },
            SurgeryOp::AttachPendant {
                at: "d".into(),
                pendant: Pendant {
                    vertices: vec!["x".into()],
                    edges: vec![EdgeRecord { id: "p".into(), from: "d".into(), to: "x".into(), length: 1.0 }],
                },
            },
        ];
        for op in &bad {
            assert!(matches!(apply(&g, op), Err(Error::PreconditionViolated(_))), "{}", op.description());
        }
    }

    #[test]
    fn add_edge_direction_needs_equal_values() {
        let star = GraphBuilder::new()
            .natural("c")
            .dirichlet("a")
            .dirichlet("b")
            .natural("x")
            .edge("e0", "a", "c", 1.0)
            .edge("e1", "b", "c", 1.0)
            .edge("e2", "c", "x", 1.0)
            .build()
            .unwrap();
        let same = SurgeryOp::AddEdge { v: "a".into(), w: "b".into(), length: 0.5 };
        assert_eq!(predicted_direction(&star, &same).unwrap(), Direction::NonDecreasing);
        let differ = SurgeryOp::AddEdge { v: "a".into(), w: "x".into(), length: 0.5 };
        assert_eq!(predicted_direction(&star, &differ).unwrap(), Direction::Indeterminate);
    }

    #[test]
    fn ops_serialize_with_kind_tag() {
        let op = SurgeryOp::Lengthen { edge: "e".into(), delta: 0.25 };
        let text = serde_json::to_string(&op).unwrap();
        assert!(text.contains("\"kind\":\"lengthen\""));
        assert_eq!(serde_json::from_str::<SurgeryOp>(&text).unwrap(), op);
    }
}
