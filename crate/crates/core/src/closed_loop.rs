//! Closed-loop runs: plant, delayed output, observer, predictor and
//! feedback, plus the static delayed-output baseline and open-loop runs.
//!
//! Within a step from `t - dt` to `t` the order is: advance the plant
//! interior, read `y(t)`, advance the observer to `t - τ`, predict the exit
//! value at `t`, evaluate the control law, impose `u(t)` at the inlet.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::{condition_report, fit_decay, ConditionReport, DecayReport, FitOptions};
use crate::model::field::l2_norm_unchecked;
use crate::observer::{control_law, ErrorSystem, Observer, Predictor};
use crate::solver::{Propagator, Sample, Snapshot, SolverChoice, Trajectory};
use crate::{Error, Field, Grid, InputHistory, Params, Result, Snapped};

/// Spatial profile preset for one component of an initial field.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileSpec {
    #[default]
    Zero,
    Constant {
        value: f64,
    },
    /// `a` for `x < x0`, `b` for `x >= x0`.
    Step {
        x0: f64,
        a: f64,
        b: f64,
    },
    /// `amplitude·sin(mode·π·x/l)`.
    Sine {
        amplitude: f64,
        mode: f64,
    },
    Gaussian {
        center: f64,
        width: f64,
        amplitude: f64,
    },
    /// `Σ_j c_j sin(jπx/l)` for `j = 1..=modes`, `c_j` uniform in
    /// `[-amplitude/j, amplitude/j]`, drawn from the scenario seed.
    RandomModes {
        amplitude: f64,
        modes: usize,
    },
}

impl ProfileSpec {
    fn sampler(&self, l: f64, rng: &mut ChaCha8Rng) -> Box<dyn Fn(f64) -> f64> {
        use std::f64::consts::PI;
        match *self {
            ProfileSpec::Zero => Box::new(|_| 0.0),
            ProfileSpec::Constant { value } => Box::new(move |_| value),
            ProfileSpec::Step { x0, a, b } => Box::new(move |x| if x < x0 { a } else { b }),
            ProfileSpec::Sine { amplitude, mode } => {
                Box::new(move |x| amplitude * (mode * PI * x / l).sin())
            }
            ProfileSpec::Gaussian {
                center,
                width,
                amplitude,
            } => Box::new(move |x| amplitude * (-((x - center) / width).powi(2)).exp()),
            ProfileSpec::RandomModes { amplitude, modes } => {
                let coeffs: Vec<f64> = (1..=modes)
                    .map(|j| amplitude / j as f64 * rng.gen_range(-1.0..=1.0))
                    .collect();
                Box::new(move |x| {
                    coeffs
                        .iter()
                        .enumerate()
                        .map(|(j, c)| c * ((j + 1) as f64 * PI * x / l).sin())
                        .sum()
                })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    #[serde(default)]
    pub theta1: ProfileSpec,
    #[serde(default)]
    pub theta2: ProfileSpec,
}

impl FieldSpec {
    pub fn new(theta1: ProfileSpec, theta2: ProfileSpec) -> Self {
        Self { theta1, theta2 }
    }

    /// Sample on `grid`. `slot` separates the random streams of different
    /// fields drawn from one seed.
    pub fn resolve(&self, grid: &Grid, seed: u64, slot: u64) -> Result<Field> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(slot);
        let f1 = self.theta1.sampler(grid.l(), &mut rng);
        let f2 = self.theta2.sampler(grid.l(), &mut rng);
        let field = Field::from_fn(grid, |x| [f1(x), f2(x)]);
        if !field.is_finite() {
            return Err(Error::NonFinite {
                what: "initial field",
                t: 0.0,
            });
        }
        Ok(field)
    }
}

/// Time profile for one open-loop input channel.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InputSpec {
    #[default]
    Zero,
    Constant {
        value: f64,
    },
    Sine {
        amplitude: f64,
        omega: f64,
        #[serde(default)]
        phase: f64,
    },
    /// `a` for `t < t0`, `b` afterwards.
    Step {
        t0: f64,
        a: f64,
        b: f64,
    },
}

impl InputSpec {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            InputSpec::Zero => 0.0,
            InputSpec::Constant { value } => value,
            InputSpec::Sine {
                amplitude,
                omega,
                phase,
            } => amplitude * (omega * t + phase).sin(),
            InputSpec::Step { t0, a, b } => {
                if t < t0 {
                    a
                } else {
                    b
                }
            }
        }
    }
}

/// How the observer's initial state is given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObserverInit {
    /// `θ̂0` itself.
    Absolute(FieldSpec),
    /// The initial observer error `w = θ̂0 - θ0`.
    Error(FieldSpec),
}

impl Default for ObserverInit {
    fn default() -> Self {
        ObserverInit::Absolute(FieldSpec::default())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Controller {
    ObserverPredictor,
    /// `u1 = 0`, `u2(t) = -k·y2(t)` for `t >= τ`.
    SanoStatic {
        k: f64,
    },
    OpenLoop {
        u1: InputSpec,
        u2: InputSpec,
    },
}

impl Controller {
    pub fn name(&self) -> &'static str {
        match self {
            Controller::ObserverPredictor => "observer_predictor",
            Controller::SanoStatic { .. } => "sano_static",
            Controller::OpenLoop { .. } => "open_loop",
        }
    }

    fn waits_for_delay(&self) -> bool {
        !matches!(self, Controller::OpenLoop { .. })
    }
}

/// Unresolved scenario as a user describes it.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub params: Params,
    pub n_cells: usize,
    pub controller: Controller,
    pub theta0: FieldSpec,
    pub observer0: ObserverInit,
    pub t_final: f64,
    /// Snapshot spacing in time units; `None` disables snapshots.
    pub snapshot_stride: Option<f64>,
    pub solver: SolverChoice,
    pub seed: u64,
    /// Fit window override; `None` uses `[τ + 2l, T]` (or `[2l, T]` open loop).
    pub fit_window: Option<(f64, f64)>,
    pub floor_rel: f64,
}

impl ScenarioSpec {
    pub fn new(params: Params, n_cells: usize, controller: Controller, t_final: f64) -> Self {
        Self {
            params,
            n_cells,
            controller,
            theta0: FieldSpec::default(),
            observer0: ObserverInit::default(),
            t_final,
            snapshot_stride: Some(0.1),
            solver: SolverChoice::Exact,
            seed: 0,
            fit_window: None,
            floor_rel: FitOptions::DEFAULT_FLOOR,
        }
    }
}

/// A validated scenario: delay and horizon snapped to the time step, initial
/// fields sampled.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub params: Params,
    pub grid: Grid,
    pub controller: Controller,
    pub theta0: Field,
    /// Absolute initial observer state.
    pub observer0: Field,
    pub solver: SolverChoice,
    pub dt: f64,
    pub tau: Snapped,
    pub t_final: Snapped,
    pub snapshot_every: Option<usize>,
    pub fit: FitOptions,
    pub warnings: Vec<String>,
}

impl Scenario {
    pub fn from_spec(spec: &ScenarioSpec) -> Result<Self> {
        spec.params.validate()?;
        let grid = Grid::new(spec.params.l, spec.n_cells)?;
        if matches!(spec.controller, Controller::ObserverPredictor)
            && spec.solver != SolverChoice::Exact
        {
            return Err(Error::Configuration(
                "observer_predictor runs require the exact solver".into(),
            ));
        }
        let dt = match spec.solver {
            SolverChoice::Exact => grid.dt(),
            SolverChoice::Upwind { cfl } => {
                if !(cfl > 0.0 && cfl <= 1.0) {
                    return Err(Error::InvalidCfl(cfl));
                }
                cfl * grid.dx()
            }
        };
        let mut warnings = Vec::new();
        let tau = Grid::snap_to(spec.params.tau, dt);
        if tau.steps == 0 {
            return Err(Error::Configuration(format!(
                "tau = {} rounds to zero steps at dt = {dt}",
                spec.params.tau
            )));
        }
        if tau.adjusted() {
            warnings.push(format!(
                "tau snapped from {} to {} ({} steps of dt = {dt})",
                tau.requested, tau.value, tau.steps
            ));
        }
        let t_final = Grid::snap_to(spec.t_final, dt);
        if t_final.adjusted() {
            warnings.push(format!(
                "T snapped from {} to {} ({} steps)",
                t_final.requested, t_final.value, t_final.steps
            ));
        }
        if spec.controller.waits_for_delay() && t_final.steps <= tau.steps {
            return Err(Error::Configuration(format!(
                "T = {} must exceed tau = {} for controlled runs",
                t_final.value, tau.value
            )));
        }
        if t_final.steps == 0 {
            return Err(Error::Configuration("T must be positive".into()));
        }
        let params = spec.params.with_tau(tau.value);

        let theta0 = spec.theta0.resolve(&grid, spec.seed, 0)?;
        let observer0 = match &spec.observer0 {
            ObserverInit::Absolute(f) => f.resolve(&grid, spec.seed, 1)?,
            ObserverInit::Error(w) => theta0.combine(1.0, &w.resolve(&grid, spec.seed, 1)?, 1.0)?,
        };
        let snapshot_every = spec
            .snapshot_stride
            .map(|s| ((s / dt).round() as usize).max(1));

        let (t_start, t_end) = spec.fit_window.unwrap_or_else(|| {
            let lead = if spec.controller.waits_for_delay() {
                tau.value
            } else {
                0.0
            };
            (lead + 2.0 * params.l, t_final.value)
        });

        Ok(Self {
            params,
            grid,
            controller: spec.controller.clone(),
            theta0,
            observer0,
            solver: spec.solver,
            dt,
            tau,
            t_final,
            snapshot_every,
            fit: FitOptions {
                t_start,
                t_end,
                floor_rel: spec.floor_rel,
            },
            warnings,
        })
    }

    pub fn initial_error(&self) -> Field {
        self.observer0
            .sub(&self.theta0)
            .expect("fields share the scenario grid")
    }

    pub fn k_sano(&self) -> Option<f64> {
        match self.controller {
            Controller::SanoStatic { k } => Some(k),
            _ => None,
        }
    }
}

/// Observer, predictor and the plant-field memory needed to score the
/// observer against the true delayed state.
struct Estimator {
    observer: Observer,
    predictor: Predictor,
    /// True plant fields at steps `k - m ..= k`.
    past: VecDeque<Field>,
}

/// Step-by-step closed-loop simulation.
pub struct ClosedLoop {
    scenario: Scenario,
    plant: Box<dyn Propagator + Send + Sync>,
    field: Field,
    step: usize,
    tau_steps: usize,
    inputs: InputHistory,
    exits: InputHistory,
    estimator: Option<Estimator>,
    last: Sample,
}

impl ClosedLoop {
    pub fn new(scenario: Scenario) -> Result<Self> {
        let params = scenario.params;
        let plant = scenario.solver.build(&params, &scenario.grid)?;
        let dt = scenario.dt;
        let m = scenario.tau.steps;
        let window = params.tau.max(params.l) + dt;
        let mut inputs = InputHistory::new(dt, window);
        let mut exits = InputHistory::new(dt, window);

        let u0 = match &scenario.controller {
            Controller::OpenLoop { u1, u2 } => [u1.eval(0.0), u2.eval(0.0)],
            _ => [0.0, 0.0],
        };
        let mut field = scenario.theta0.clone();
        field.set(0, u0);
        inputs.push(0, u0);
        exits.push(0, field.exit());

        let estimator = match scenario.controller {
            Controller::ObserverPredictor => {
                let e = field.exit();
                let observer = Observer::new(
                    &params,
                    &scenario.grid,
                    scenario.observer0.clone(),
                    [e[1], e[0]],
                    u0,
                )?;
                let mut past = VecDeque::with_capacity(m + 1);
                past.push_back(field.clone());
                Some(Estimator {
                    observer,
                    predictor: Predictor::new(&params, &scenario.grid)?,
                    past,
                })
            }
            _ => None,
        };
        let obs_err_l2 = estimator.as_ref().map_or(f64::NAN, |est| {
            l2_norm_unchecked(
                &est.observer.field().sub(&field).expect("same grid"),
                scenario.grid.dx(),
            )
        });
        let last = Sample {
            t: 0.0,
            plant_l2: l2_norm_unchecked(&field, scenario.grid.dx()),
            obs_err_l2,
            pred_err_at_l: [f64::NAN; 2],
            u: u0,
            exit: field.exit(),
        };
        Ok(Self {
            scenario,
            plant,
            field,
            step: 0,
            tau_steps: m,
            inputs,
            exits,
            estimator,
            last,
        })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn t(&self) -> f64 {
        self.step as f64 * self.scenario.dt
    }

    pub fn step_index(&self) -> usize {
        self.step
    }

    pub fn plant_field(&self) -> &Field {
        &self.field
    }

    pub fn observer(&self) -> Option<&Observer> {
        self.estimator.as_ref().map(|e| &e.observer)
    }

    /// `θ̂⁺(s, ·) - θ(s, ·)` at the observer's current time `s`.
    pub fn observer_error_field(&self) -> Option<Field> {
        self.estimator.as_ref().map(|e| {
            let idx = e.observer.step_index() + e.past.len() - 1 - self.step;
            e.observer.field().sub(&e.past[idx]).expect("same grid")
        })
    }

    pub fn last_sample(&self) -> &Sample {
        &self.last
    }

    pub fn step(&mut self) -> Result<&Sample> {
        let k = self.step + 1;
        let t = k as f64 * self.scenario.dt;
        let m = self.tau_steps;
        let params = self.scenario.params;

        self.plant.advance_interior(&mut self.field);
        let exit = self.field.exit();
        self.exits.push(k, exit);

        let mut pred_err = [f64::NAN; 2];
        let u = match &self.scenario.controller {
            Controller::ObserverPredictor => {
                let est = self
                    .estimator
                    .as_mut()
                    .expect("observer_predictor has an estimator");
                if k > m {
                    let s_step = k - m;
                    let y = self.exits.at_step(s_step).expect("exit history covers tau");
                    let u_s = self
                        .inputs
                        .at_step(s_step)
                        .expect("input history covers tau");
                    est.observer.step([y[1], y[0]], u_s);
                    let predicted =
                        est.predictor
                            .predict_exit(est.observer.field(), &self.inputs, t)?;
                    pred_err = [predicted[0] - exit[0], predicted[1] - exit[1]];
                    control_law(predicted, &params, t)
                } else {
                    [0.0, 0.0]
                }
            }
            Controller::SanoStatic { k: gain } => {
                if k >= m {
                    let theta1_delayed =
                        self.exits.at_step(k - m).expect("exit history covers tau")[0];
                    [0.0, -gain * theta1_delayed]
                } else {
                    [0.0, 0.0]
                }
            }
            Controller::OpenLoop { u1, u2 } => [u1.eval(t), u2.eval(t)],
        };
        self.field.set(0, u);
        self.inputs.push(k, u);
        self.step = k;

        if !self.field.is_finite() {
            return Err(Error::NonFinite {
                what: "plant field",
                t,
            });
        }
        let dx = self.scenario.grid.dx();
        if let Some(est) = self.estimator.as_mut() {
            est.past.push_back(self.field.clone());
            if est.past.len() > m + 1 {
                est.past.pop_front();
            }
        }
        let obs_err_l2 = match self.observer_error_field() {
            Some(err) if !err.is_finite() => {
                return Err(Error::NonFinite {
                    what: "observer field",
                    t,
                })
            }
            Some(err) => l2_norm_unchecked(&err, dx),
            None => f64::NAN,
        };
        self.last = Sample {
            t,
            plant_l2: l2_norm_unchecked(&self.field, dx),
            obs_err_l2,
            pred_err_at_l: pred_err,
            u,
            exit,
        };
        Ok(&self.last)
    }
}

/// Summary attached to every run.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub controller: &'static str,
    pub condition: ConditionReport,
    pub plant_decay: std::result::Result<DecayReport, Error>,
    pub observer_decay: Option<std::result::Result<DecayReport, Error>>,
    /// `max |ε⁻(t,t,l)|` over `t ∈ (τ, T]`, both components.
    pub max_pred_err_at_l: Option<f64>,
    pub tau: Snapped,
    pub t_final: Snapped,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub trajectory: Trajectory,
    pub summary: RunSummary,
}

fn drive(scenario: &Scenario) -> Result<Trajectory> {
    let mut sim = ClosedLoop::new(scenario.clone())?;
    let mut traj = Trajectory::new(scenario.dt);
    let snap = |traj: &mut Trajectory, sim: &ClosedLoop| {
        if scenario
            .snapshot_every
            .is_some_and(|e| sim.step_index().is_multiple_of(e))
        {
            traj.snapshots.push(Snapshot {
                t: sim.t(),
                field: sim.plant_field().clone(),
            });
        }
    };
    traj.samples.push(*sim.last_sample());
    snap(&mut traj, &sim);
    for _ in 0..scenario.t_final.steps {
        let sample = *sim.step()?;
        traj.samples.push(sample);
        snap(&mut traj, &sim);
    }
    Ok(traj)
}

fn summarize(scenario: &Scenario, trajectory: &Trajectory) -> RunSummary {
    let times = trajectory.times();
    let plant_decay = fit_decay(&times, &trajectory.plant_norms(), &scenario.fit);
    let has_observer = matches!(scenario.controller, Controller::ObserverPredictor);
    let observer_decay = has_observer.then(|| {
        let opts = FitOptions {
            t_start: scenario.params.tau + 2.0 * scenario.params.l,
            ..scenario.fit
        };
        fit_decay(&times, &trajectory.observer_error_norms(), &opts)
    });
    let max_pred_err_at_l = has_observer.then(|| {
        trajectory
            .samples
            .iter()
            .filter(|s| s.pred_err_at_l[0].is_finite())
            .map(|s| s.pred_err_at_l[0].abs().max(s.pred_err_at_l[1].abs()))
            .fold(0.0, f64::max)
    });
    let mut warnings = scenario.warnings.clone();
    for (what, fit) in [
        ("plant", Some(&plant_decay)),
        ("observer error", observer_decay.as_ref()),
    ] {
        match fit {
            Some(Ok(r)) if r.extinct() => warnings.push(format!(
                "{what} norm is below the numerical floor throughout the fit window (finite-time extinction)"
            )),
            Some(Ok(r)) if r.floor_hit => warnings.push(format!(
                "{what} decay fit: samples below the numerical floor were excluded"
            )),
            Some(Err(e)) => warnings.push(format!("{what} decay fit failed: {e}")),
            _ => {}
        }
    }
    RunSummary {
        controller: scenario.controller.name(),
        condition: condition_report(&scenario.params, scenario.k_sano()),
        plant_decay,
        observer_decay,
        max_pred_err_at_l,
        tau: scenario.tau,
        t_final: scenario.t_final,
        warnings,
    }
}

/// Run whatever controller the scenario names.
pub fn run(scenario: &Scenario) -> Result<RunResult> {
    let trajectory = drive(scenario)?;
    let summary = summarize(scenario, &trajectory);
    Ok(RunResult {
        trajectory,
        summary,
    })
}

pub fn run_closed_loop(scenario: &Scenario) -> Result<RunResult> {
    if !matches!(scenario.controller, Controller::ObserverPredictor) {
        return Err(Error::Configuration(format!(
            "run_closed_loop needs controller observer_predictor, got {}",
            scenario.controller.name()
        )));
    }
    run(scenario)
}

/// Static delayed output feedback `u1 = 0`, `u2 = -k·y2` on the scenario's
/// plant and initial data.
pub fn run_sano_baseline(scenario: &Scenario, k: f64) -> Result<RunResult> {
    let mut s = scenario.clone();
    s.controller = Controller::SanoStatic { k };
    run(&s)
}

/// Simulate the autonomous observer-error system from the scenario's initial
/// error `observer0 - theta0`. Norms are reported in `plant_l2` and
/// `obs_err_l2`; the time axis is observer time.
pub fn run_error_system(scenario: &Scenario) -> Result<RunResult> {
    let grid = scenario.grid;
    let mut sys = ErrorSystem::new(&scenario.params, &grid, scenario.initial_error())?;
    let mut traj = Trajectory::new(grid.dt());
    let record = |traj: &mut Trajectory, sys: &ErrorSystem, step: usize| -> Result<()> {
        let f = sys.field();
        if !f.is_finite() {
            return Err(Error::NonFinite {
                what: "error field",
                t: sys.s(),
            });
        }
        let norm = l2_norm_unchecked(f, grid.dx());
        traj.samples.push(Sample {
            t: sys.s(),
            plant_l2: norm,
            obs_err_l2: norm,
            pred_err_at_l: [f64::NAN; 2],
            u: f.inlet(),
            exit: f.exit(),
        });
        if scenario.snapshot_every.is_some_and(|e| step.is_multiple_of(e)) {
            traj.snapshots.push(Snapshot {
                t: sys.s(),
                field: f.clone(),
            });
        }
        Ok(())
    };
    let steps = Grid::snap_to(scenario.t_final.value, grid.dt()).steps;
    record(&mut traj, &sys, 0)?;
    for k in 1..=steps {
        sys.step();
        record(&mut traj, &sys, k)?;
    }
    let fit = FitOptions {
        t_start: 2.0 * scenario.params.l,
        t_end: scenario.t_final.value,
        floor_rel: scenario.fit.floor_rel,
    };
    let plant_decay = fit_decay(&traj.times(), &traj.plant_norms(), &fit);
    let mut warnings = scenario.warnings.clone();
    if let Ok(r) = &plant_decay {
        if r.extinct() {
            warnings.push(
                "error norm is below the numerical floor throughout the fit window (finite-time extinction)"
                    .into(),
            );
        } else if r.floor_hit {
            warnings
                .push("error decay fit: samples below the numerical floor were excluded".into());
        }
    }
    Ok(RunResult {
        summary: RunSummary {
            controller: "error_system",
            condition: condition_report(&scenario.params, None),
            plant_decay,
            observer_decay: None,
            max_pred_err_at_l: None,
            tau: scenario.tau,
            t_final: scenario.t_final,
            warnings,
        },
        trajectory: traj,
    })
}
