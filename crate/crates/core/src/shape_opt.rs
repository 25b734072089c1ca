//! Derivative of the torsional rigidity with respect to edge lengths, its
//! finite-difference verification, and projected-gradient ascent or descent
//! of `T` over edge lengths at fixed topology and total length.
//!
//! On every edge `v'² + 2v` is constant (its derivative is `2v'(v'' + 1) = 0`)
//! and equals `∂T/∂ℓ_e`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::MetricGraph;
use crate::torsion::{torsion_function, TorsionSolution};

/// Relative agreement required between the tail and midpoint evaluations.
pub const POINT_INDEPENDENCE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradientVector {
    pub edges: Vec<String>,
    /// `∂T/∂ℓ_e`, all positive.
    pub components: Vec<f64>,
}

impl GradientVector {
    pub fn norm(&self) -> f64 {
        self.components.iter().map(|c| c * c).sum::<f64>().sqrt()
    }
}

/// `v'(x)² + 2v(x)` on edge `e`.
pub fn hadamard_density(sol: &TorsionSolution, e: usize, x: f64) -> f64 {
    let q = &sol.edges[e];
    q.derivative(x).powi(2) + 2.0 * q.value(x)
}

/// `∂T/∂ℓ_e` from a solved torsion function, evaluated at the tail and checked
/// at the midpoint.
pub fn dt_dlength_from(sol: &TorsionSolution, e: usize) -> Result<f64> {
    let tail = hadamard_density(sol, e, 0.0);
    let mid = hadamard_density(sol, e, sol.edges[e].length / 2.0);
    if !(tail > 0.0) || (tail - mid).abs() > POINT_INDEPENDENCE_TOL * tail.max(mid) {
        return Err(Error::InconsistentInvariant(format!(
            "v'^2 + 2v on edge `{}`: {tail} at the tail, {mid} at the midpoint",
            sol.edges[e].id
        )));
    }
    Ok(tail)
}

pub fn dt_dlength(g: &MetricGraph, e: usize) -> Result<f64> {
    dt_dlength_from(&torsion_function(g)?, e)
}

fn gradient_from(sol: &TorsionSolution) -> Result<GradientVector> {
    let components = (0..sol.edges.len()).map(|e| dt_dlength_from(sol, e)).collect::<Result<_>>()?;
    Ok(GradientVector { edges: sol.edges.iter().map(|q| q.id.clone()).collect(), components })
}

pub fn gradient(g: &MetricGraph) -> Result<GradientVector> {
    gradient_from(&torsion_function(g)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GradCheck {
    pub analytic: f64,
    pub finite_difference: f64,
    pub abs_error: f64,
}

fn rigidity_with_length(g: &MetricGraph, e: usize, length: f64) -> Result<f64> {
    let mut ls = g.lengths();
    ls[e] = length;
    Ok(torsion_function(&g.with_lengths(&ls)?)?.rigidity)
}

/// Central difference `[T(ℓ+s) - T(ℓ-s)] / 2s` against the analytic derivative.
pub fn grad_check(g: &MetricGraph, e: usize, step: f64) -> Result<GradCheck> {
    let l = g.edge(e).length;
    if !(step > 0.0 && step < l / 2.0) {
        return Err(Error::BadParameters(format!("step {step} must lie in (0, {})", l / 2.0)));
    }
    let analytic = dt_dlength(g, e)?;
    let fd = (rigidity_with_length(g, e, l + step)? - rigidity_with_length(g, e, l - step)?) / (2.0 * step);
    Ok(GradCheck { analytic, finite_difference: fd, abs_error: (fd - analytic).abs() })
}

/// Ratio of central-difference errors at `step` and `step / 2`; about 4 for
/// a second-order scheme.
pub fn grad_check_order(g: &MetricGraph, e: usize, step: f64) -> Result<f64> {
    Ok(grad_check(g, e, step)?.abs_error / grad_check(g, e, step / 2.0)?.abs_error)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    Maximize,
    Minimize,
}

impl std::str::FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max" | "maximize" => Ok(Objective::Maximize),
            "min" | "minimize" => Ok(Objective::Minimize),
            _ => Err(Error::BadParameters(format!("objective `{s}` is not max or min"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizeOptions {
    pub objective: Objective,
    /// Length floor; `None` means `1e-4 |𝒢| / |E|`.
    pub floor: Option<f64>,
    pub max_iters: usize,
    /// Relative stationarity threshold on the projected gradient.
    pub grad_tol: f64,
    pub max_halvings: usize,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        Self { objective: Objective::Maximize, floor: None, max_iters: 500, grad_tol: 1e-8, max_halvings: 40 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// Projected gradient vanished with every edge above the floor.
    Stationary,
    /// Projected gradient vanished on a face of the length simplex.
    FaceReached,
    /// No improving step within the allowed halvings.
    LineSearchExhausted,
    MaxItersExceeded,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Iterate {
    pub iteration: usize,
    pub lengths: Vec<f64>,
    #[serde(rename = "T")]
    pub rigidity: f64,
    /// Accepted step length; zero for the starting point.
    pub step: f64,
    pub projected_gradient_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizationTrajectory {
    pub objective: Objective,
    pub floor: f64,
    pub total_length: f64,
    pub iterates: Vec<Iterate>,
    pub stop: StopReason,
    pub max_iters_exceeded: bool,
}

impl OptimizationTrajectory {
    pub fn last(&self) -> &Iterate {
        self.iterates.last().expect("trajectory holds the starting point")
    }

    /// One JSON object per iterate.
    pub fn to_json_lines(&self) -> String {
        self.iterates.iter().map(|it| serde_json::to_string(it).expect("iterates serialize") + "\n").collect()
    }
}

/// Euclidean projection onto `{x ≥ floor, Σ x = total}`.
pub fn project_to_simplex(y: &[f64], floor: f64, total: f64) -> Vec<f64> {
    let mass = total - floor * y.len() as f64;
    let shifted: Vec<f64> = y.iter().map(|v| v - floor).collect();
    let mut sorted = shifted.clone();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (i, &s) in sorted.iter().enumerate() {
        cumulative += s;
        let t = (cumulative - mass) / (i + 1) as f64;
        if s - t > 0.0 {
            theta = t;
        }
    }
    shifted.iter().map(|s| (s - theta).max(0.0) + floor).collect()
}

/// Signed gradient projected onto the zero-sum directions that keep every
/// edge at the floor from shrinking further. Returns the direction and the
/// number of edges held at the floor.
fn feasible_direction(grad: &[f64], lengths: &[f64], floor: f64, sign: f64) -> (Vec<f64>, usize) {
    let at_floor: Vec<bool> = lengths.iter().map(|&l| l <= floor * (1.0 + 1e-12)).collect();
    let mut free: Vec<bool> = vec![true; grad.len()];
    loop {
        let n = free.iter().filter(|&&f| f).count();
        let mean = grad.iter().zip(&free).filter(|(_, &f)| f).map(|(g, _)| sign * g).sum::<f64>() / n.max(1) as f64;
        let d: Vec<f64> = grad.iter().zip(&free).map(|(g, &f)| if f { sign * g - mean } else { 0.0 }).collect();
        let blocked: Vec<usize> = (0..d.len()).filter(|&i| free[i] && at_floor[i] && d[i] < 0.0).collect();
        if blocked.is_empty() || n <= 1 {
            let held = free.iter().filter(|&&f| !f).count();
            return if n <= 1 { (vec![0.0; d.len()], held) } else { (d, held) };
        }
        for i in blocked {
            free[i] = false;
        }
    }
}

/// Projected-gradient ascent (or descent) of `T` over the edge lengths of `g`
/// at fixed total length, with backtracking by halving.
pub fn optimize(g: &MetricGraph, opts: &OptimizeOptions) -> Result<OptimizationTrajectory> {
    let total = g.total_length();
    let floor = opts.floor.unwrap_or(1e-4 * total / g.num_edges() as f64);
    if !(floor > 0.0) || floor * g.num_edges() as f64 >= total {
        return Err(Error::BadParameters(format!("floor {floor} is not in (0, |G|/|E|)")));
    }
    if g.min_length() < floor {
        return Err(Error::BadParameters(format!("an edge is shorter than the floor {floor}")));
    }
    let sign = match opts.objective {
        Objective::Maximize => 1.0,
        Objective::Minimize => -1.0,
    };
    let better = |new: f64, old: f64| sign * (new - old) > 0.0;

    let mut graph = g.clone();
    let mut sol = torsion_function(&graph)?;
    let mut iterates = Vec::new();
    let mut step = 0.0;
    let stop = loop {
        let grad = gradient_from(&sol)?;
        let lengths = graph.lengths();
        let (dir, held) = feasible_direction(&grad.components, &lengths, floor, sign);
        let dnorm = dir.iter().map(|d| d * d).sum::<f64>().sqrt();
        iterates.push(Iterate {
            iteration: iterates.len(),
            lengths: lengths.clone(),
            rigidity: sol.rigidity,
            step,
            projected_gradient_norm: dnorm,
        });
        if dnorm <= opts.grad_tol * grad.norm() {
            break if held == 0 { StopReason::Stationary } else { StopReason::FaceReached };
        }
        if iterates.len() > opts.max_iters {
            break StopReason::MaxItersExceeded;
        }
        let mut t = 0.1 * total / grad.norm();
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let trial: Vec<f64> = lengths.iter().zip(&dir).map(|(l, d)| l + t * d).collect();
            let trial = project_to_simplex(&trial, floor, total);
            let candidate = graph.with_lengths(&trial)?;
            let cand_sol = torsion_function(&candidate)?;
            if better(cand_sol.rigidity, sol.rigidity) {
                accepted = Some((candidate, cand_sol));
                break;
            }
            t /= 2.0;
        }
        match accepted {
            Some((next, next_sol)) => {
                graph = next;
                sol = next_sol;
                step = t;
            }
            None => break StopReason::LineSearchExhausted,
        }
    };
    Ok(OptimizationTrajectory {
        objective: opts.objective,
        floor,
        total_length: total,
        iterates,
        stop,
        max_iters_exceeded: stop == StopReason::MaxItersExceeded,
    })
}
