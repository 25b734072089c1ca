use crate::error::{Error, Result};
use crate::graph::MetricGraph;

use super::TorsionSolution;

/// `u(x) = a x^2 + b x + c` on `[start, end]` of an edge, where `start` is the
/// previous piece's `end` (or 0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Piece {
    pub end: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Piece {
    fn value(&self, x: f64) -> f64 {
        (self.a * x + self.b) * x + self.c
    }

    fn integral(&self, x0: f64) -> f64 {
        let x1 = self.end;
        self.a * (x1.powi(3) - x0.powi(3)) / 3.0 + self.b * (x1 * x1 - x0 * x0) / 2.0 + self.c * (x1 - x0)
    }

    fn energy(&self, x0: f64) -> f64 {
        let (a, b, x1) = (self.a, self.b, self.end);
        4.0 * a * a * (x1.powi(3) - x0.powi(3)) / 3.0 + 2.0 * a * b * (x1 * x1 - x0 * x0) + b * b * (x1 - x0)
    }
}

/// A continuous piecewise-quadratic function on a metric graph, one list of
/// pieces per edge in the graph's edge order.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseQuadratic {
    pub edges: Vec<Vec<Piece>>,
}

impl PiecewiseQuadratic {
    pub fn from_torsion(sol: &TorsionSolution) -> Self {
        let edges = sol.edges.iter().map(|q| vec![Piece { end: q.length, a: -0.5, b: q.b, c: q.c }]).collect();
        Self { edges }
    }

    /// `x(ℓ - x)/2` on every edge: the torsion function of each edge taken
    /// as an interval with Dirichlet ends.
    pub fn edgewise_dirichlet(g: &MetricGraph) -> Self {
        let edges =
            g.edges().iter().map(|e| vec![Piece { end: e.length, a: -0.5, b: e.length / 2.0, c: 0.0 }]).collect();
        Self { edges }
    }

    /// `dist(·; V_D)`, piecewise linear with at most one kink per edge.
    pub fn distance_function(g: &MetricGraph) -> Self {
        let field = g.dirichlet_distances();
        let edges = g
            .edges()
            .iter()
            .map(|e| {
                let (du, dw, l) = (field.dist[e.tail], field.dist[e.head], e.length);
                let rising = Piece { end: l, a: 0.0, b: 1.0, c: du };
                let falling = Piece { end: l, a: 0.0, b: -1.0, c: dw + l };
                let kink = 0.5 * (dw + l - du);
                if kink <= 0.0 {
                    vec![falling]
                } else if kink >= l {
                    vec![rising]
                } else {
                    vec![Piece { end: kink, ..rising }, falling]
                }
            })
            .collect();
        Self { edges }
    }

    /// Linear interpolation of `vertex_values` plus a bubble `β_e x(ℓ - x)` per edge.
    pub fn interpolate(g: &MetricGraph, vertex_values: &[f64], bubbles: &[f64]) -> Self {
        let edges = g
            .edges()
            .iter()
            .zip(bubbles)
            .map(|(e, &beta)| {
                let (ft, fh, l) = (vertex_values[e.tail], vertex_values[e.head], e.length);
                vec![Piece { end: l, a: -beta, b: (fh - ft) / l + beta * l, c: ft }]
            })
            .collect();
        Self { edges }
    }

    pub fn value(&self, edge: usize, x: f64) -> f64 {
        let pieces = &self.edges[edge];
        let p = pieces.iter().find(|p| x <= p.end).unwrap_or_else(|| pieces.last().expect("nonempty edge"));
        p.value(x)
    }

    pub fn integral(&self) -> f64 {
        self.fold(Piece::integral)
    }

    pub fn energy(&self) -> f64 {
        self.fold(Piece::energy)
    }

    fn fold(&self, f: impl Fn(&Piece, f64) -> f64) -> f64 {
        let mut total = 0.0;
        for pieces in &self.edges {
            let mut x0 = 0.0;
            for p in pieces {
                total += f(p, x0);
                x0 = p.end;
            }
        }
        total
    }

    /// `self + eps * other` on the common refinement of breakpoints.
    pub fn add_scaled(&self, other: &Self, eps: f64) -> Self {
        let edges = self
            .edges
            .iter()
            .zip(&other.edges)
            .map(|(p, q)| {
                let mut out = Vec::with_capacity(p.len() + q.len());
                let (mut i, mut j) = (0, 0);
                while i < p.len() && j < q.len() {
                    let end = p[i].end.min(q[j].end);
                    out.push(Piece {
                        end,
                        a: p[i].a + eps * q[j].a,
                        b: p[i].b + eps * q[j].b,
                        c: p[i].c + eps * q[j].c,
                    });
                    if p[i].end <= end {
                        i += 1;
                    }
                    if q[j].end <= end {
                        j += 1;
                    }
                }
                out
            })
            .collect();
        Self { edges }
    }

    /// Checks that the pieces tile each edge, that `u` is continuous across
    /// breakpoints and vertices, and that it vanishes on the Dirichlet set.
    pub fn check_admissible(&self, g: &MetricGraph, tol: f64) -> Result<()> {
        if self.edges.len() != g.num_edges() {
            return Err(Error::Inadmissible("one piece list per edge required".into()));
        }
        let mut at_vertex: Vec<Option<f64>> = vec![None; g.num_vertices()];
        for (ei, (e, pieces)) in g.edges().iter().zip(&self.edges).enumerate() {
            let last = pieces.last().ok_or_else(|| Error::Inadmissible(format!("edge `{}` has no pieces", e.id)))?;
            if (last.end - e.length).abs() > tol * e.length {
                return Err(Error::Inadmissible(format!("pieces of edge `{}` do not end at its length", e.id)));
            }
            for w in pieces.windows(2) {
                if (w[0].value(w[0].end) - w[1].value(w[0].end)).abs() > tol {
                    return Err(Error::Inadmissible(format!("jump inside edge `{}`", e.id)));
                }
            }
            for (v, x) in [(e.tail, 0.0), (e.head, e.length)] {
                let val = self.value(ei, x);
                match at_vertex[v] {
                    None => at_vertex[v] = Some(val),
                    Some(prev) if (prev - val).abs() > tol => {
                        return Err(Error::Inadmissible(format!("jump at vertex `{}`", g.vertex(v).id)));
                    }
                    _ => {}
                }
            }
        }
        for v in g.dirichlet_vertices() {
            if let Some(val) = at_vertex[v] {
                if val.abs() > tol {
                    return Err(Error::Inadmissible(format!("nonzero at Dirichlet vertex `{}`", g.vertex(v).id)));
                }
            }
        }
        Ok(())
    }
}

/// `(∫u)^2 / ∫|u'|^2` for an admissible test function `u`.
pub fn polya_quotient(g: &MetricGraph, u: &PiecewiseQuadratic) -> Result<f64> {
    let scale = u.edges.iter().flatten().map(|p| p.c.abs() + p.b.abs() * p.end + p.a.abs() * p.end * p.end);
    let scale = scale.fold(1.0, f64::max);
    u.check_admissible(g, 1e-9 * scale)?;
    let energy = u.energy();
    if !(energy > 0.0) {
        return Err(Error::ZeroEnergy);
    }
    Ok(u.integral().powi(2) / energy)
}
