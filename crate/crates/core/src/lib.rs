//! Torsional rigidity, torsion functions and ground states of compact metric
//! graphs with Dirichlet vertices, together with an audit of the classical
//! isoperimetric and spectral inequalities relating them.

// `!(x > 0.0)` rejects NaN along with nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod graph;
pub mod random;
pub mod shape_opt;
pub mod spectral;
pub mod surgery;
pub mod torsion;

pub use error::{Error, Result};
pub use graph::{BoundaryCondition, GraphBuilder, GraphError, MetricGraph};
pub use torsion::{torsion_function, TorsionSolution};

/// `%g`-style formatting with `digits` significant digits and trailing zeros
/// removed.
pub fn format_number(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return if x.is_nan() { "-".into() } else { format!("{x}") };
    }
    if x == 0.0 {
        return "0".into();
    }
    let digits = digits.max(1);
    let exp = x.abs().log10().floor() as i32;
    let trim = |s: String| {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    };
    if exp < -5 || exp >= digits as i32 {
        let s = format!("{:.*e}", digits - 1, x);
        let (mantissa, e) = s.split_once('e').expect("exponent present");
        format!("{}e{}", trim(mantissa.to_string()), e)
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim(format!("{:.*}", decimals, x))
    }
}
