use serde::Serialize;

use super::solver::StiffnessSolver;
use super::{lowest_eigenpairs, SpectralOptions, SpectralResult};
use crate::error::Result;
use crate::graph::MetricGraph;
use crate::torsion::assemble_discrete_system;

/// Partial sums of `Σ_k ⟨1, φ_k⟩² / λ_k`, whose full series is `T`.
#[derive(Debug, Clone, Serialize)]
pub struct HeatContent {
    pub terms: Vec<f64>,
    pub partial_sums: Vec<f64>,
    /// `bᵀ K⁻¹ b` with `b_i = ∫ N_i`: the sum over every discrete mode, equal to
    /// the rigidity of the discrete torsion problem and never above `T`.
    pub fem_rigidity: f64,
    pub h: f64,
}

pub fn heat_content_from(g: &MetricGraph, result: &SpectralResult) -> Result<HeatContent> {
    let load = result.mesh.load_vector();
    let terms: Vec<f64> = result
        .eigenvectors
        .iter()
        .zip(&result.eigenvalues)
        .map(|(phi, lam)| {
            let c: f64 = phi.iter().zip(&load).map(|(a, b)| a * b).sum();
            c * c / lam
        })
        .collect();
    let partial_sums = terms
        .iter()
        .scan(0.0, |acc, t| {
            *acc += t;
            Some(*acc)
        })
        .collect();
    let solver = StiffnessSolver::new(&result.mesh, &assemble_discrete_system(g).q)?;
    let u = solver.solve(&load);
    let fem_rigidity = u.iter().zip(&load).map(|(a, b)| a * b).sum();
    Ok(HeatContent { terms, partial_sums, fem_rigidity, h: result.h })
}

pub fn integrated_heat_content(g: &MetricGraph, modes: usize, opts: &SpectralOptions) -> Result<HeatContent> {
    heat_content_from(g, &lowest_eigenpairs(g, modes, opts)?)
}
