//! Time integration of the coupled transport system.
//!
//! [`ExactSolver`] advances along characteristics with `dt = dx` and is exact
//! at the nodes. [`UpwindSolver`] is a first-order split scheme kept as an
//! independent cross-check; at `cfl = 1` the two coincide.

mod exact;
mod trajectory;
mod upwind;

pub use exact::{characteristic_solution, solve_exact, ExactSolver};
pub use trajectory::{evaluate_output, Sample, Snapshot, Trajectory};
pub use upwind::UpwindSolver;

use crate::model::field::l2_norm_unchecked;
use crate::{BoundaryTrace, Error, Field, Result};

/// Time `t = step·dt` together with the field at that time.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub step: usize,
    pub t: f64,
    pub field: Field,
}

impl SolverState {
    pub fn initial(field: Field) -> Self {
        Self {
            step: 0,
            t: 0.0,
            field,
        }
    }
}

/// One-step evolution operator of the plant dynamics.
pub trait Propagator {
    fn dt(&self) -> f64;

    fn dx(&self) -> f64;

    /// Advance nodes `1..=n` by one step. Node 0 is left for the caller, who
    /// imposes the boundary value at the new time.
    fn advance_interior(&self, field: &mut Field);

    /// Advance in place, taking the inlet value at `t + dt` from `trace`.
    fn step_in_place(&self, state: &mut SolverState, trace: &dyn BoundaryTrace) -> Result<()> {
        let step = state.step + 1;
        let t = step as f64 * self.dt();
        let u = trace.value(t).ok_or(Error::MissingBoundary { t })?;
        self.advance_interior(&mut state.field);
        state.field.set(0, u);
        state.step = step;
        state.t = t;
        Ok(())
    }

    fn step(&self, state: &SolverState, trace: &dyn BoundaryTrace) -> Result<SolverState> {
        let mut next = state.clone();
        self.step_in_place(&mut next, trace)?;
        Ok(next)
    }
}

/// Run `steps` steps from `theta0`, recording norms and exit values every
/// step and field snapshots every `snapshot_every` steps.
///
/// The inlet node of `theta0` is replaced by `u(0)`; a mismatch between the
/// initial profile and the input at the corner travels along `x = t`.
pub fn integrate(
    propagator: &dyn Propagator,
    theta0: Field,
    inputs: &dyn BoundaryTrace,
    steps: usize,
    snapshot_every: Option<usize>,
) -> Result<Trajectory> {
    let dt = propagator.dt();
    let dx = propagator.dx();
    let mut traj = Trajectory::new(dt);
    let mut theta0 = theta0;
    theta0.set(
        0,
        inputs.value(0.0).ok_or(Error::MissingBoundary { t: 0.0 })?,
    );
    let mut state = SolverState::initial(theta0);
    let record = |traj: &mut Trajectory, state: &SolverState| -> Result<()> {
        if !state.field.is_finite() {
            return Err(Error::NonFinite {
                what: "plant field",
                t: state.t,
            });
        }
        traj.samples.push(Sample {
            t: state.t,
            plant_l2: l2_norm_unchecked(&state.field, dx),
            obs_err_l2: f64::NAN,
            pred_err_at_l: [f64::NAN; 2],
            u: inputs.value(state.t).unwrap_or([f64::NAN; 2]),
            exit: state.field.exit(),
        });
        if snapshot_every.is_some_and(|k| state.step.is_multiple_of(k)) {
            traj.snapshots.push(Snapshot {
                t: state.t,
                field: state.field.clone(),
            });
        }
        Ok(())
    };
    record(&mut traj, &state)?;
    for _ in 0..steps {
        propagator.step_in_place(&mut state, inputs)?;
        record(&mut traj, &state)?;
    }
    Ok(traj)
}

/// Which propagator drives the plant.
#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SolverChoice {
    #[default]
    Exact,
    Upwind {
        cfl: f64,
    },
}

impl SolverChoice {
    pub fn build(
        &self,
        params: &crate::Params,
        grid: &crate::Grid,
    ) -> Result<Box<dyn Propagator + Send + Sync>> {
        Ok(match *self {
            SolverChoice::Exact => Box::new(ExactSolver::new(params, grid)?),
            SolverChoice::Upwind { cfl } => Box::new(UpwindSolver::new(params, grid, cfl)?),
        })
    }
}
