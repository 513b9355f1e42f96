//! Parameters, grids, sampled fields and the closed-form coupling exponential.

mod coupling;
pub(crate) mod field;
mod grid;
mod history;
mod params;

pub use coupling::{coupling_exp, CouplingExp};
pub use field::{compatibility_check, l2_norm, CompatibilityReport, Field, DEFAULT_JUMP_FACTOR};
pub use grid::{Grid, Snapped};
pub use history::{BoundaryTrace, ConstantInput, FnInput, InputHistory, ZeroInput};
pub use params::{validate_gains, GainReport, Params};
