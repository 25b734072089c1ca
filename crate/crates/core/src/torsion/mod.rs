//! Torsion function and torsional rigidity.
//!
//! The torsion function `v` solves `-v'' = 1` on every edge with `v = 0` on
//! the Dirichlet set and continuity plus Kirchhoff conditions elsewhere. On
//! each edge it is a concave parabola `-x^2/2 + B x + C`, so it is determined
//! by its vertex values. Those values come from a weighted vertex system
//! `Q g = m` on the natural vertices, with `v = g / 2` there.

mod quotient;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::MetricGraph;

pub use quotient::{polya_quotient, Piece, PiecewiseQuadratic};

/// Relative tolerance of the exactness identities.
pub const EXACT_TOL: f64 = 1e-10;

/// The assembled vertex system on the natural vertices.
#[derive(Debug, Clone)]
pub struct DiscreteSystem {
    /// Natural vertex indices, in matrix order.
    pub natural: Vec<usize>,
    /// Metric degree of each natural vertex.
    pub m: Vec<f64>,
    /// `1/ℓ` for edges joining two natural vertices (loops excluded), `None` otherwise.
    pub mu: Vec<Option<f64>>,
    /// Sum of `1/ℓ` over edges joining the vertex to a Dirichlet vertex.
    pub c: Vec<f64>,
    /// Symmetric positive definite matrix `Q = diag(m) 𝓛`.
    pub q: DMatrix<f64>,
}

impl DiscreteSystem {
    /// `𝓛 = diag(m)^-1 Q`, the operator acting on the weighted space.
    pub fn operator(&self) -> DMatrix<f64> {
        let mut l = self.q.clone();
        for (i, &mi) in self.m.iter().enumerate() {
            l.row_mut(i).scale_mut(1.0 / mi);
        }
        l
    }
}

pub fn assemble_discrete_system(g: &MetricGraph) -> DiscreteSystem {
    let natural: Vec<usize> = g.natural_vertices().collect();
    let mut slot = vec![usize::MAX; g.num_vertices()];
    for (i, &v) in natural.iter().enumerate() {
        slot[v] = i;
    }
    let n = natural.len();
    let m: Vec<f64> = natural.iter().map(|&v| g.metric_degree(v)).collect();
    let mut mu = vec![None; g.num_edges()];
    let mut c = vec![0.0; n];
    let mut q = DMatrix::zeros(n, n);
    for (ei, e) in g.edges().iter().enumerate() {
        if e.is_loop() {
            continue;
        }
        let w = 1.0 / e.length;
        match (g.is_dirichlet(e.tail), g.is_dirichlet(e.head)) {
            (true, true) => {}
            (false, true) => c[slot[e.tail]] += w,
            (true, false) => c[slot[e.head]] += w,
            (false, false) => {
                let (a, b) = (slot[e.tail], slot[e.head]);
                mu[ei] = Some(w);
                q[(a, a)] += w;
                q[(b, b)] += w;
                q[(a, b)] -= w;
                q[(b, a)] -= w;
            }
        }
    }
    for i in 0..n {
        q[(i, i)] += c[i];
    }
    DiscreteSystem { natural, m, mu, c, q }
}

/// Solution of the vertex system.
#[derive(Debug, Clone)]
pub struct DiscreteTorsion {
    pub system: DiscreteSystem,
    /// `g = 𝓛^-1 1`, indexed like `system.natural`.
    pub g: Vec<f64>,
    /// `Σ m(v) g(v)`.
    pub discrete_rigidity: f64,
}

pub fn solve_discrete_torsion(graph: &MetricGraph) -> Result<DiscreteTorsion> {
    let system = assemble_discrete_system(graph);
    let n = system.natural.len();
    let g = if n == 0 {
        Vec::new()
    } else {
        let chol = system.q.clone().cholesky().ok_or(Error::SingularSystem)?;
        let x = chol.solve(&DVector::from_column_slice(&system.m));
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularSystem);
        }
        x.as_slice().to_vec()
    };
    for (i, &gi) in g.iter().enumerate() {
        if !(gi > 0.0) {
            let vertex = graph.vertex(system.natural[i]).id.clone();
            return Err(Error::PositivityViolated { vertex, value: gi });
        }
    }
    let discrete_rigidity = system.m.iter().zip(&g).map(|(m, g)| m * g).sum();
    Ok(DiscreteTorsion { system, g, discrete_rigidity })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexValue {
    pub id: String,
    pub value: f64,
}

/// `v_e(x) = -x^2/2 + b x + c` on `[0, length]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeQuadratic {
    pub id: String,
    pub b: f64,
    pub c: f64,
    pub length: f64,
}

impl EdgeQuadratic {
    /// Coefficient of `x^2`, fixed by `-v'' = 1`.
    pub const A: f64 = -0.5;

    pub fn value(&self, x: f64) -> f64 {
        (Self::A * x + self.b) * x + self.c
    }

    pub fn derivative(&self, x: f64) -> f64 {
        self.b - x
    }

    pub fn integral(&self) -> f64 {
        let l = self.length;
        -l * l * l / 6.0 + self.b * l * l / 2.0 + self.c * l
    }

    /// `∫ (b - x)^2 dx` over the edge.
    pub fn energy(&self) -> f64 {
        let (b, l) = (self.b, self.length);
        (b.powi(3) - (b - l).powi(3)) / 3.0
    }

    pub fn argmax(&self) -> f64 {
        self.b.clamp(0.0, self.length)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupNorm {
    pub value: f64,
    pub edge: String,
    pub offset: f64,
}

/// The torsion function, stored edgewise in closed form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorsionSolution {
    pub vertices: Vec<VertexValue>,
    pub edges: Vec<EdgeQuadratic>,
    pub rigidity: f64,
    pub sup: SupNorm,
}

pub fn torsion_function(g: &MetricGraph) -> Result<TorsionSolution> {
    let discrete = solve_discrete_torsion(g)?;
    let mut values = vec![0.0; g.num_vertices()];
    for (&v, &gv) in discrete.system.natural.iter().zip(&discrete.g) {
        values[v] = 0.5 * gv;
    }
    let edges = g
        .edges()
        .iter()
        .map(|e| {
            let (vt, vh) = (values[e.tail], values[e.head]);
            EdgeQuadratic { id: e.id.clone(), b: e.length / 2.0 + (vh - vt) / e.length, c: vt, length: e.length }
        })
        .collect();
    let mut sol = TorsionSolution {
        vertices: g
            .vertices()
            .iter()
            .zip(&values)
            .map(|(v, &value)| VertexValue { id: v.id.clone(), value })
            .collect(),
        edges,
        rigidity: 0.0,
        sup: SupNorm { value: 0.0, edge: String::new(), offset: 0.0 },
    };
    sol.sup = sup_norm(&sol);
    sol.rigidity = rigidity_from_discrete(g, &discrete);
    let integral = sol.l1_norm();
    if !((sol.rigidity - integral).abs() <= EXACT_TOL * sol.rigidity.abs().max(integral.abs())) {
        return Err(Error::CrossCheckMismatch { formula: sol.rigidity, integral });
    }
    Ok(sol)
}

/// `T = Σ ℓ^3/12 + T(𝔊)/4`.
pub fn rigidity_from_discrete(g: &MetricGraph, discrete: &DiscreteTorsion) -> f64 {
    let edge_part: f64 = g.edges().iter().map(|e| e.length.powi(3) / 12.0).sum();
    edge_part + discrete.discrete_rigidity / 4.0
}

/// Rigidity from the vertex values of `sol`, cross-checked against the
/// edgewise integral of the stored quadratics.
pub fn rigidity(sol: &TorsionSolution, g: &MetricGraph) -> Result<f64> {
    let discrete: f64 = g
        .natural_vertices()
        .map(|v| g.metric_degree(v) * 2.0 * sol.vertices[v].value)
        .sum();
    let edge_part: f64 = g.edges().iter().map(|e| e.length.powi(3) / 12.0).sum();
    let formula = edge_part + discrete / 4.0;
    let integral = sol.l1_norm();
    if (formula - integral).abs() <= EXACT_TOL * formula.abs().max(integral.abs()) {
        Ok(formula)
    } else {
        Err(Error::CrossCheckMismatch { formula, integral })
    }
}

pub fn sup_norm(sol: &TorsionSolution) -> SupNorm {
    let mut best = SupNorm { value: 0.0, edge: String::new(), offset: 0.0 };
    for e in &sol.edges {
        let x = e.argmax();
        let value = e.value(x);
        if value > best.value || best.edge.is_empty() {
            best = SupNorm { value, edge: e.id.clone(), offset: x };
        }
    }
    best
}

pub fn dirichlet_energy(sol: &TorsionSolution) -> f64 {
    sol.edges.iter().map(EdgeQuadratic::energy).sum()
}

impl TorsionSolution {
    /// `‖v‖_{L^1}`, the exact edgewise integral.
    pub fn l1_norm(&self) -> f64 {
        self.edges.iter().map(EdgeQuadratic::integral).sum()
    }

    pub fn value(&self, edge: usize, x: f64) -> f64 {
        self.edges[edge].value(x)
    }

    pub fn derivative(&self, edge: usize, x: f64) -> f64 {
        self.edges[edge].derivative(x)
    }

    pub fn vertex_value(&self, v: usize) -> f64 {
        self.vertices[v].value
    }

    /// Largest Kirchhoff defect `|Σ outward derivatives|` over natural vertices.
    pub fn kirchhoff_residual(&self, g: &MetricGraph) -> f64 {
        let mut flux = vec![0.0; g.num_vertices()];
        for (e, q) in g.edges().iter().zip(&self.edges) {
            flux[e.tail] += q.derivative(0.0);
            flux[e.head] -= q.derivative(q.length);
        }
        g.natural_vertices().map(|v| flux[v].abs()).fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("solution serialization is infallible")
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}
