//! Graph surgery: transformations with a known effect on torsional rigidity,
//! the reduction to pumpkin chains, and named graph families.

mod families;
mod ops;
mod pumpkin;

pub use families::{family_generator, family_zoo, Family};
pub use ops::{apply, predicted_direction, Direction, Pendant, SurgeryOp, EQUAL_VALUE_TOL};
pub use pumpkin::{reduce_to_pumpkin_chain, PumpkinChain};
