//! Boundary stabilization of a parallel-flow heat exchanger whose exit
//! temperatures are observed through a known constant delay.
//!
//! The plant is the pair of coupled transport equations
//!
//! ```text
//! θ1_t = -θ1_x + h1 (θ2 - θ1)
//! θ2_t = -θ2_x + h2 (θ1 - θ2),      0 < x < l
//! θ(t, 0) = u(t),   y(t) = (θ2(t-τ, l), θ1(t-τ, l))
//! ```
//!
//! Both transport speeds equal one, so with the time step locked to the grid
//! spacing the method of characteristics is exact at the nodes. On top of that
//! solver the crate builds a Luenberger observer driven by the delayed output,
//! a closed-form predictor over the delay horizon, the estimated-state
//! feedback law, and the tooling used to check exponential decay empirically.

pub mod analysis;
pub mod closed_loop;
mod error;
pub mod model;
pub mod observer;
pub mod solver;

pub use error::{Error, Result};
pub use model::{
    compatibility_check, coupling_exp, l2_norm, validate_gains, BoundaryTrace, CompatibilityReport,
    ConstantInput, CouplingExp, Field, FnInput, GainReport, Grid, InputHistory, Params, Snapped,
    ZeroInput,
};
