use serde::Serialize;

use super::SpectralResult;
use crate::graph::MetricGraph;
use crate::torsion::TorsionSolution;

/// Largest sampled value of `|φ_k(x)| / (λ_k ‖φ_k‖_∞ v(x))`.
#[derive(Debug, Clone, Serialize)]
pub struct LandscapeCheck {
    pub mode: usize,
    pub max_ratio: f64,
    pub edge: String,
    pub offset: f64,
    /// Points closer than this to the Dirichlet set are skipped, where the
    /// ratio is a `0/0` limit.
    pub excluded_radius: f64,
    pub samples: usize,
}

/// Samples each mesh segment at `per_segment` equally spaced points. `mode`
/// is 1-based.
pub fn landscape_check(
    g: &MetricGraph,
    result: &SpectralResult,
    torsion: &TorsionSolution,
    mode: usize,
    per_segment: usize,
) -> LandscapeCheck {
    let phi = &result.eigenvectors[mode - 1];
    let lambda = result.eigenvalues[mode - 1];
    let sup = phi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let field = g.dirichlet_distances();
    let radius = result.h;
    let mut out = LandscapeCheck {
        mode,
        max_ratio: 0.0,
        edge: String::new(),
        offset: 0.0,
        excluded_radius: radius,
        samples: 0,
    };
    let per_segment = per_segment.max(1);
    for (e, edge) in g.edges().iter().enumerate() {
        let total = result.mesh.segments[e] * per_segment;
        for i in 0..=total {
            let x = edge.length * i as f64 / total as f64;
            if field.at(g, e, x) < radius {
                continue;
            }
            let ratio = result.mesh.evaluate(phi, e, x).abs() / (lambda * sup * torsion.value(e, x));
            out.samples += 1;
            if ratio > out.max_ratio {
                out.max_ratio = ratio;
                out.edge = edge.id.clone();
                out.offset = x;
            }
        }
    }
    out
}
