//! Ground states and low eigenpairs of the Laplacian with Dirichlet
//! vertices, via continuous P1 finite elements with a consistent mass matrix.
//!
//! Conformity means every discrete eigenvalue is an upper bound for its
//! continuous counterpart, with relative error `O(h²)`.

mod heat;
mod landscape;
pub mod mesh;
pub mod solver;

use serde::Serialize;

use crate::error::Result;
use crate::graph::MetricGraph;
use crate::torsion::assemble_discrete_system;

pub use heat::{heat_content_from, integrated_heat_content, HeatContent};
pub use landscape::{landscape_check, LandscapeCheck};
pub use mesh::{build_mesh, Mesh, NodeCoord};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralOptions {
    /// Target segment length; `None` means `min ℓ_e / 16`.
    pub h: Option<f64>,
    /// Relative change of the Ritz values at which iteration stops.
    pub tol: f64,
    pub max_iter: usize,
    /// Upper bound on the number of mesh segments; coarsens `h` if needed.
    pub segment_cap: Option<usize>,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        Self { h: None, tol: 1e-10, max_iter: 10_000, segment_cap: None }
    }
}

impl SpectralOptions {
    pub fn with_h(h: f64) -> Self {
        Self { h: Some(h), ..Self::default() }
    }

    pub fn resolve_h(&self, g: &MetricGraph) -> f64 {
        let h = self.h.unwrap_or(g.min_length() / 16.0);
        match self.segment_cap {
            Some(cap) => h.max(g.total_length() / cap as f64),
            None => h,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SpectralResult {
    /// `λ_1 ≤ … ≤ λ_K`.
    pub eigenvalues: Vec<f64>,
    /// Node values, mass-orthonormal; the first is sign-fixed to `∫ φ_1 ≥ 0`.
    pub eigenvectors: Vec<Vec<f64>>,
    pub h: f64,
    /// `‖K φ - λ M φ‖ / ‖K φ‖` per mode.
    pub residuals: Vec<f64>,
    pub iterations: usize,
    pub mesh: Mesh,
}

/// Serializable summary of a [`SpectralResult`].
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    pub eigenvalues: Vec<f64>,
    pub h: f64,
    pub h_max: f64,
    pub dofs: usize,
    pub iterations: usize,
    pub residuals: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<Vec<ModeSamples>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ModeSamples {
    pub coords: Vec<NodeCoord>,
    pub values: Vec<f64>,
}

impl SpectralResult {
    pub fn lambda1(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// `φ_k` (1-based) at offset `x` along edge `e`.
    pub fn evaluate(&self, k: usize, e: usize, x: f64) -> f64 {
        self.mesh.evaluate(&self.eigenvectors[k - 1], e, x)
    }

    pub fn report(&self, with_samples: bool) -> SpectrumReport {
        SpectrumReport {
            eigenvalues: self.eigenvalues.clone(),
            h: self.h,
            h_max: self.mesh.h_max(),
            dofs: self.mesh.num_dofs(),
            iterations: self.iterations,
            residuals: self.residuals.clone(),
            samples: with_samples.then(|| {
                self.eigenvectors
                    .iter()
                    .map(|v| ModeSamples { coords: self.mesh.coords.clone(), values: v.clone() })
                    .collect()
            }),
        }
    }
}

/// The `k` lowest eigenpairs.
pub fn lowest_eigenpairs(g: &MetricGraph, k: usize, opts: &SpectralOptions) -> Result<SpectralResult> {
    let h = opts.resolve_h(g);
    let mesh = build_mesh(g, h);
    let q = assemble_discrete_system(g).q;
    let stiff = solver::StiffnessSolver::new(&mesh, &q)?;
    let pairs = solver::block_inverse_iteration(&mesh, &stiff, k, opts.tol, opts.max_iter)?;
    let mut vectors = pairs.vectors;
    let load = mesh.load_vector();
    let mean: f64 = vectors[0].iter().zip(&load).map(|(a, b)| a * b).sum();
    if mean < 0.0 {
        vectors[0].iter_mut().for_each(|v| *v = -*v);
    }
    Ok(SpectralResult {
        eigenvalues: pairs.values,
        eigenvectors: vectors,
        h,
        residuals: pairs.residuals,
        iterations: pairs.iterations,
        mesh,
    })
}

/// `λ_1` and its eigenfunction.
pub fn ground_state(g: &MetricGraph, opts: &SpectralOptions) -> Result<SpectralResult> {
    lowest_eigenpairs(g, 1, opts)
}
