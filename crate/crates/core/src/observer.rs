//! Luenberger observer driven by the delayed output, the predictor over the
//! delay horizon, and the estimated-state feedback law.
//!
//! The observer runs `τ` behind the plant: at wall-clock time `t` it has
//! consumed `y` up to `t`, which carries plant exit values up to `t - τ`, so
//! its state estimates `θ(t - τ, ·)`. The predictor pushes that estimate
//! forward over `[t - τ, t]` using the stored inputs.

use crate::solver::{ExactSolver, Propagator, SolverState};
use crate::{BoundaryTrace, CouplingExp, Error, Field, Grid, Params, Result};

/// Observer state `θ̂⁺(s, ·)`.
///
/// The boundary injection is cross-coupled to match the outputs
/// `y1 = θ2(·-τ, l)`, `y2 = θ1(·-τ, l)`:
///
/// ```text
/// θ̂⁺1(s, 0) = -k1 (θ̂⁺2(s, l) - y1(s + τ)) + u1(s)
/// θ̂⁺2(s, 0) = -k2 (θ̂⁺1(s, l) - y2(s + τ)) + u2(s)
/// ```
#[derive(Debug, Clone)]
pub struct Observer {
    solver: ExactSolver,
    k1: f64,
    k2: f64,
    state: SolverState,
}

impl Observer {
    /// Start at `s = 0` from `initial`. The inlet node is set by the
    /// injection law from `y(τ)` and `u(0)`.
    pub fn new(
        params: &Params,
        grid: &Grid,
        initial: Field,
        y_at_tau: [f64; 2],
        u0: [f64; 2],
    ) -> Result<Self> {
        initial.check_grid(grid)?;
        let mut obs = Self {
            solver: ExactSolver::new(params, grid)?,
            k1: params.k1,
            k2: params.k2,
            state: SolverState::initial(initial),
        };
        obs.inject(y_at_tau, u0);
        Ok(obs)
    }

    fn inject(&mut self, y: [f64; 2], u: [f64; 2]) {
        let f = &mut self.state.field;
        let [e1, e2] = f.exit();
        f.set(
            0,
            [-self.k1 * (e2 - y[0]) + u[0], -self.k2 * (e1 - y[1]) + u[1]],
        );
    }

    /// Observer time `s`.
    pub fn s(&self) -> f64 {
        self.state.t
    }

    pub fn step_index(&self) -> usize {
        self.state.step
    }

    pub fn field(&self) -> &Field {
        &self.state.field
    }

    /// Advance from `s` to `s + dt`, given `y(s + dt + τ)` and `u(s + dt)`.
    pub fn step(&mut self, y: [f64; 2], u: [f64; 2]) {
        self.solver.advance_interior(&mut self.state.field);
        self.inject(y, u);
        self.state.step += 1;
        self.state.t = self.state.step as f64 * self.solver.dt();
    }
}

/// Autonomous observer-error dynamics `ε⁺ = θ̂⁺ - θ`, with the homogeneous
/// boundary `ε⁺1(s, 0) = -k1 ε⁺2(s, l)`, `ε⁺2(s, 0) = -k2 ε⁺1(s, l)`.
///
/// This is also the delay-free static output feedback loop.
#[derive(Debug, Clone)]
pub struct ErrorSystem {
    solver: ExactSolver,
    k1: f64,
    k2: f64,
    state: SolverState,
}

impl ErrorSystem {
    pub fn new(params: &Params, grid: &Grid, initial_error: Field) -> Result<Self> {
        initial_error.check_grid(grid)?;
        let mut sys = Self {
            solver: ExactSolver::new(params, grid)?,
            k1: params.k1,
            k2: params.k2,
            state: SolverState::initial(initial_error),
        };
        sys.close_boundary();
        Ok(sys)
    }

    fn close_boundary(&mut self) {
        let f = &mut self.state.field;
        let [e1, e2] = f.exit();
        f.set(0, [-self.k1 * e2, -self.k2 * e1]);
    }

    pub fn s(&self) -> f64 {
        self.state.t
    }

    pub fn field(&self) -> &Field {
        &self.state.field
    }

    pub fn step(&mut self) {
        self.solver.advance_interior(&mut self.state.field);
        self.close_boundary();
        self.state.step += 1;
        self.state.t = self.state.step as f64 * self.solver.dt();
    }
}

/// Estimate of the current state `θ̂⁻(t, t, ·)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub t: f64,
    pub field_at_t: Field,
    /// `(θ̂⁻1(t, t, l), θ̂⁻2(t, t, l))`.
    pub boundary_value_at_l: [f64; 2],
}

/// Closed-form predictor along characteristics:
///
/// ```text
/// θ̂⁻(t, t, x) = exp(A1·τ)·θ̂⁺(t - τ, x - τ)   x >= τ
///              = exp(A1·x)·u(t - x)          x <  τ
/// ```
///
/// When `τ > l` the exit value depends on stored inputs only.
#[derive(Debug, Clone)]
pub struct Predictor {
    grid: Grid,
    tau_steps: usize,
    /// `exp(A1·i·dt)` for `i = 0..=max(tau_steps, n_cells)`.
    exps: Vec<CouplingExp>,
}

impl Predictor {
    /// `params.tau` must be a whole number of steps of `grid`.
    pub fn new(params: &Params, grid: &Grid) -> Result<Self> {
        let snapped = grid.snap(params.tau);
        if snapped.adjusted() || snapped.steps == 0 {
            return Err(Error::Configuration(format!(
                "tau = {} is not a positive multiple of dt = {}",
                params.tau,
                grid.dt()
            )));
        }
        let m = snapped.steps;
        let exps = (0..=m.max(grid.n_cells()))
            .map(|i| CouplingExp::new(i as f64 * grid.dt(), params.h1, params.h2))
            .collect::<Result<_>>()?;
        Ok(Self {
            grid: *grid,
            tau_steps: m,
            exps,
        })
    }

    pub fn tau_steps(&self) -> usize {
        self.tau_steps
    }

    fn node_value(
        &self,
        i: usize,
        observer_field: &Field,
        inputs: &dyn BoundaryTrace,
        t: f64,
    ) -> std::result::Result<[f64; 2], f64> {
        let m = self.tau_steps;
        if i >= m {
            Ok(self.exps[m].apply(observer_field.at(i - m)))
        } else {
            let s = t - i as f64 * self.grid.dt();
            inputs.value(s).map(|u| self.exps[i].apply(u)).ok_or(s)
        }
    }

    /// Predicted exit value `θ̂⁻(t, t, l)`; needs only `u(t - l)` when `τ > l`.
    pub fn predict_exit(
        &self,
        observer_field: &Field,
        inputs: &dyn BoundaryTrace,
        t: f64,
    ) -> Result<[f64; 2]> {
        observer_field.check_grid(&self.grid)?;
        self.node_value(self.grid.n_cells(), observer_field, inputs, t)
            .map_err(|s| Error::MissingInputs { times: vec![s] })
    }

    pub fn predict(
        &self,
        observer_field: &Field,
        inputs: &dyn BoundaryTrace,
        t: f64,
    ) -> Result<Prediction> {
        observer_field.check_grid(&self.grid)?;
        let mut field = Field::zeros(&self.grid);
        let mut missing = Vec::new();
        for i in 0..self.grid.len() {
            match self.node_value(i, observer_field, inputs, t) {
                Ok(v) => field.set(i, v),
                Err(s) => missing.push(s),
            }
        }
        if !missing.is_empty() {
            missing.reverse();
            return Err(Error::MissingInputs { times: missing });
        }
        Ok(Prediction {
            t,
            boundary_value_at_l: field.exit(),
            field_at_t: field,
        })
    }
}

/// Reference predictor: re-solve the plant over `[t - τ, t]` step by step
/// from `θ̂⁺(t - τ, ·)` with the stored inputs. Costs `O(τ/dt · n)`.
pub fn predict_naive(
    observer_field: &Field,
    inputs: &dyn BoundaryTrace,
    t: f64,
    params: &Params,
    grid: &Grid,
) -> Result<Prediction> {
    observer_field.check_grid(grid)?;
    let m = grid.snap(params.tau).steps;
    let solver = ExactSolver::new(params, grid)?;
    let mut field = observer_field.clone();
    let mut missing = Vec::new();
    for j in 1..=m {
        let s = t - (m - j) as f64 * grid.dt();
        solver.advance_interior(&mut field);
        match inputs.value(s) {
            Some(u) => field.set(0, u),
            None => missing.push(s),
        }
    }
    if !missing.is_empty() {
        return Err(Error::MissingInputs { times: missing });
    }
    Ok(Prediction {
        t,
        boundary_value_at_l: field.exit(),
        field_at_t: field,
    })
}

/// Estimated-state feedback: zero on `[0, τ]`, afterwards
/// `u1 = -k1·θ̂⁻2(t, t, l)`, `u2 = -k2·θ̂⁻1(t, t, l)`.
pub fn control_law(predicted_exit: [f64; 2], params: &Params, t: f64) -> [f64; 2] {
    if t <= params.tau {
        return [0.0, 0.0];
    }
    [
        -params.k1 * predicted_exit[1],
        -params.k2 * predicted_exit[0],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::solve_exact;
    use crate::{FnInput, InputHistory, ZeroInput};

    fn setup(tau: f64) -> (Params, Grid) {
        (
            Params::new(1.0, 2.0, 1.0, tau, 0.5, 0.5).unwrap(),
            Grid::new(1.0, 50).unwrap(),
        )
    }

    #[test]
    fn control_is_zero_before_delay() {
        let (p, _) = setup(0.5);
        assert_eq!(control_law([3.0, 4.0], &p, 0.5), [0.0, 0.0]);
        assert_eq!(control_law([3.0, 4.0], &p, 0.2), [0.0, 0.0]);
        assert_eq!(control_law([0.0, 0.0], &p, 1.0), [0.0, 0.0]);
        assert_eq!(control_law([3.0, 4.0], &p, 0.52), [-2.0, -1.5]);
    }

    #[test]
    fn zero_observer_stays_zero() {
        let (p, g) = setup(0.5);
        let mut obs = Observer::new(&p, &g, Field::zeros(&g), [0.0; 2], [0.0; 2]).unwrap();
        for _ in 0..100 {
            obs.step([0.0; 2], [0.0; 2]);
        }
        assert_eq!(obs.field(), &Field::zeros(&g));
        assert!((obs.s() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn exact_observer_tracks_plant() {
        let (p, g) = setup(0.5);
        let theta0 = Field::from_fn(&g, |x| [(4.0 * x).sin(), x * x]);
        let input = FnInput(|t: f64| [(2.0 * t).cos(), 0.5]);
        let traj = solve_exact(&theta0, &input, 3.0, &p, &g, Some(1)).unwrap();
        let e0 = theta0.exit();
        let mut obs =
            Observer::new(&p, &g, theta0, [e0[1], e0[0]], input.value(0.0).unwrap()).unwrap();
        assert!(obs.field().sup_diff(&traj.snapshots[0].field) <= 1e-15);
        for snap in &traj.snapshots[1..] {
            let e = snap.field.exit();
            obs.step([e[1], e[0]], input.value(snap.t).unwrap());
            assert!(obs.field().sup_diff(&snap.field) <= 1e-13);
        }
    }

    #[test]
    fn observer_error_is_autonomous() {
        let (p, g) = setup(0.5);
        let theta0 = Field::from_fn(&g, |x| [1.0 - x, (3.0 * x).cos()]);
        let hat0 = Field::from_fn(&g, |x| [0.3 * x, -0.2]);
        let input = FnInput(|t: f64| [t.sin(), -(t * 0.7).cos()]);
        let traj = solve_exact(&theta0, &input, 5.0, &p, &g, Some(1)).unwrap();
        let e0 = theta0.exit();
        let mut obs = Observer::new(
            &p,
            &g,
            hat0.clone(),
            [e0[1], e0[0]],
            input.value(0.0).unwrap(),
        )
        .unwrap();
        let mut err = ErrorSystem::new(&p, &g, hat0.sub(&theta0).unwrap()).unwrap();
        let diff0 = obs.field().sub(&traj.snapshots[0].field).unwrap();
        assert!(diff0.sup_diff(err.field()) <= 1e-15);
        for snap in &traj.snapshots[1..] {
            let e = snap.field.exit();
            obs.step([e[1], e[0]], input.value(snap.t).unwrap());
            err.step();
            let diff = obs.field().sub(&snap.field).unwrap();
            assert!(diff.sup_diff(err.field()) <= 1e-10);
        }
    }

    fn history_with(g: &Grid, k_end: usize, f: impl Fn(f64) -> [f64; 2]) -> InputHistory {
        let mut h = InputHistory::new(g.dt(), 2.0);
        for k in 0..=k_end {
            h.push(k, f(k as f64 * g.dt()));
        }
        h
    }

    #[test]
    fn closed_form_matches_resolve() {
        for tau in [0.2, 0.5, 1.0, 1.3] {
            let (p, g) = setup(tau);
            let pred = Predictor::new(&p, &g).unwrap();
            let hat = Field::from_fn(&g, |x| [(5.0 * x).sin(), x - 0.5]);
            let hist = history_with(&g, 200, |t| [(0.9 * t).cos(), t.sin()]);
            let t = 4.0;
            let a = pred.predict(&hat, &hist, t).unwrap();
            let b = predict_naive(&hat, &hist, t, &p, &g).unwrap();
            assert!(a.field_at_t.sup_diff(&b.field_at_t) <= 1e-12, "tau = {tau}");
            let exit = pred.predict_exit(&hat, &hist, t).unwrap();
            assert_eq!(exit, a.boundary_value_at_l);
        }
    }

    #[test]
    fn long_delay_exit_ignores_observer() {
        let (p, g) = setup(1.3);
        let pred = Predictor::new(&p, &g).unwrap();
        let hist = history_with(&g, 200, |t| [t, 1.0 - t]);
        let t = 3.0;
        let a = pred
            .predict_exit(&Field::from_fn(&g, |x| [x, 4.0]), &hist, t)
            .unwrap();
        let b = pred.predict_exit(&Field::zeros(&g), &hist, t).unwrap();
        assert_eq!(a, b);
        let want = CouplingExp::new(1.0, 1.0, 2.0).unwrap().apply([2.0, -1.0]);
        assert!((a[0] - want[0]).abs() < 1e-12 && (a[1] - want[1]).abs() < 1e-12);
    }

    #[test]
    fn missing_inputs_are_listed() {
        let (p, g) = setup(0.2);
        let pred = Predictor::new(&p, &g).unwrap();
        let mut hist = InputHistory::new(g.dt(), 2.0);
        for k in 0..=97 {
            hist.push(k, [0.0; 2]);
        }
        match pred.predict(&Field::zeros(&g), &hist, 2.0) {
            Err(Error::MissingInputs { times }) => {
                assert_eq!(times.len(), 3);
                assert!((times[0] - 1.96).abs() < 1e-12);
                assert!((times[2] - 2.0).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
        assert!(pred.predict(&Field::zeros(&g), &ZeroInput, 2.0).is_ok());
    }

    #[test]
    fn rejects_unaligned_delay() {
        let (p, g) = setup(0.333);
        assert!(Predictor::new(&p, &g).is_err());
    }
}
