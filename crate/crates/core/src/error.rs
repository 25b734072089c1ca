use thiserror::Error;

use crate::graph::GraphError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("vertex system is singular")]
    SingularSystem,
    #[error("discrete torsion is not positive at vertex `{vertex}` (value {value})")]
    PositivityViolated { vertex: String, value: f64 },
    #[error("rigidity cross-check failed: formula {formula} vs edgewise integral {integral}")]
    CrossCheckMismatch { formula: f64, integral: f64 },
    #[error("test function has zero Dirichlet energy")]
    ZeroEnergy,
    #[error("test function is not admissible: {0}")]
    Inadmissible(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("bad family parameters: {0}")]
    BadParameters(String),
    #[error("eigensolver did not converge in {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("inconsistent invariant: {0}")]
    InconsistentInvariant(String),
}
