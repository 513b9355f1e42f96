//! Scenario configuration: a TOML document whose top-level keys mirror the
//! scenario, plus optional sections. See `docs/config.md` for the schema.

use std::fmt;
use std::path::PathBuf;

use indexmap::IndexMap;
use serde::Deserialize;

use hexstab_core::analysis::FitOptions;
use hexstab_core::closed_loop::{
    Controller, FieldSpec, InputSpec, ObserverInit, ProfileSpec, Scenario, ScenarioSpec,
};
use hexstab_core::solver::SolverChoice;
use hexstab_core::Params;

use crate::error::{CliError, CliResult};

pub const DEFAULT_SNAPSHOT_STRIDE: f64 = 0.1;
pub const DEFAULT_OUTPUT_DIR: &str = "out";
pub const DEFAULT_OMEGAS: [f64; 3] = [0.5, 1.0, 2.0];
pub const DEFAULT_CYCLES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
enum ControllerKind {
    ObserverPredictor,
    SanoStatic,
    OpenLoop,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
enum ObserverMode {
    #[default]
    Absolute,
    Error,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawObserver {
    #[serde(default)]
    mode: ObserverMode,
    #[serde(default)]
    theta1: ProfileSpec,
    #[serde(default)]
    theta2: ProfileSpec,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOpenLoop {
    #[serde(default)]
    u1: InputSpec,
    #[serde(default)]
    u2: InputSpec,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFit {
    t_start: Option<f64>,
    t_end: Option<f64>,
    floor_rel: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFreqresp {
    omegas: Option<Vec<f64>>,
    cycles: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    h1: f64,
    h2: f64,
    l: f64,
    tau: f64,
    k1: f64,
    k2: f64,
    #[serde(rename = "T")]
    t_final: f64,
    n_cells: usize,
    controller: ControllerKind,
    k: Option<f64>,
    #[serde(default)]
    seed: u64,
    snapshot_stride: Option<f64>,
    threads: Option<usize>,
    output_dir: Option<PathBuf>,
    #[serde(default)]
    solver: SolverChoice,
    #[serde(default)]
    initial: FieldSpec,
    #[serde(default)]
    observer: RawObserver,
    open_loop: Option<RawOpenLoop>,
    #[serde(default)]
    sweep: IndexMap<String, Vec<f64>>,
    #[serde(default)]
    fit: RawFit,
    #[serde(default)]
    freqresp: RawFreqresp,
}

/// Parameter a sweep can vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Tau,
    K1,
    K2,
    H1,
    H2,
}

impl Axis {
    pub const ALL: [Axis; 5] = [Axis::Tau, Axis::K1, Axis::K2, Axis::H1, Axis::H2];

    pub fn name(self) -> &'static str {
        match self {
            Axis::Tau => "tau",
            Axis::K1 => "k1",
            Axis::K2 => "k2",
            Axis::H1 => "h1",
            Axis::H2 => "h2",
        }
    }

    fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.name() == name)
    }

    pub fn apply(self, params: &mut Params, value: f64) {
        match self {
            Axis::Tau => params.tau = value,
            Axis::K1 => params.k1 = value,
            Axis::K2 => params.k2 = value,
            Axis::H1 => params.h1 = value,
            Axis::H2 => params.h2 = value,
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// User-supplied fit window bounds; missing ends take the scenario defaults.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FitOverride {
    pub t_start: Option<f64>,
    pub t_end: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FreqrespConfig {
    pub omegas: Vec<f64>,
    pub cycles: usize,
}

/// A fully validated configuration.
#[derive(Debug, Clone)]
pub struct Config {
    pub spec: ScenarioSpec,
    pub fit: FitOverride,
    pub output_dir: PathBuf,
    pub threads: Option<usize>,
    /// Axes in declaration order.
    pub sweep: Vec<(Axis, Vec<f64>)>,
    pub freqresp: FreqrespConfig,
    /// The base scenario, already snapped and sampled.
    pub scenario: Scenario,
}

/// One point of a sweep: the axis values and the resulting scenario.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub index: usize,
    pub values: Vec<(Axis, f64)>,
    pub scenario: Scenario,
}

impl Config {
    pub fn warnings(&self) -> &[String] {
        &self.scenario.warnings
    }

    pub fn build_scenario(&self, spec: &ScenarioSpec) -> CliResult<Scenario> {
        build_scenario(spec, self.fit)
    }

    /// Cartesian product of the sweep axes, first axis slowest.
    pub fn sweep_points(&self) -> CliResult<Vec<SweepPoint>> {
        if self.sweep.is_empty() {
            return Err(CliError::Config(
                "sweep needs at least one axis in [sweep] (tau, k1, k2, h1 or h2)".into(),
            ));
        }
        let mut combos: Vec<Vec<(Axis, f64)>> = vec![Vec::new()];
        for (axis, values) in &self.sweep {
            combos = combos
                .into_iter()
                .flat_map(|c| {
                    values.iter().map(move |v| {
                        let mut next = c.clone();
                        next.push((*axis, *v));
                        next
                    })
                })
                .collect();
        }
        combos
            .into_iter()
            .enumerate()
            .map(|(index, values)| {
                let mut spec = self.spec.clone();
                for (axis, v) in &values {
                    axis.apply(&mut spec.params, *v);
                }
                let scenario = self.build_scenario(&spec).map_err(|e| {
                    let point: Vec<String> =
                        values.iter().map(|(a, v)| format!("{a}={v}")).collect();
                    CliError::Config(format!("sweep point {} ({}): {e}", index, point.join(", ")))
                })?;
                Ok(SweepPoint {
                    index,
                    values,
                    scenario,
                })
            })
            .collect()
    }
}

fn build_scenario(spec: &ScenarioSpec, fit: FitOverride) -> CliResult<Scenario> {
    let mut scenario = Scenario::from_spec(spec)?;
    if let Some(t) = fit.t_start {
        scenario.fit.t_start = t;
    }
    if let Some(t) = fit.t_end {
        scenario.fit.t_end = t;
    }
    if !(scenario.fit.t_start < scenario.fit.t_end) {
        return Err(CliError::Config(format!(
            "fit window [{}, {}] is empty",
            scenario.fit.t_start, scenario.fit.t_end
        )));
    }
    Ok(scenario)
}

/// Command-line values that replace keys of the same name in the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides(Vec<(String, toml::Value)>);

impl Overrides {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, key: &str, value: impl Into<toml::Value>) {
        self.0.push((key.to_string(), value.into()));
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

pub fn parse_config(text: &str) -> CliResult<Config> {
    load_config(text, &Overrides::new())
}

pub fn load_config(text: &str, overrides: &Overrides) -> CliResult<Config> {
    let mut table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
    for (key, value) in &overrides.0 {
        table.insert(key.clone(), value.clone());
    }
    let raw: RawConfig = toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| CliError::Config(e.to_string().trim_end().to_string()))?;
    validate(raw)
}

fn validate(raw: RawConfig) -> CliResult<Config> {
    let params = Params {
        h1: raw.h1,
        h2: raw.h2,
        l: raw.l,
        tau: raw.tau,
        k1: raw.k1,
        k2: raw.k2,
    };
    params.validate()?;

    let controller = match raw.controller {
        ControllerKind::ObserverPredictor => Controller::ObserverPredictor,
        ControllerKind::SanoStatic => {
            let k = raw.k.ok_or_else(|| {
                CliError::Config(
                    "missing key `k` (required when controller = \"sano_static\")".into(),
                )
            })?;
            if !k.is_finite() {
                return Err(CliError::Config(format!("`k` must be finite, got {k}")));
            }
            Controller::SanoStatic { k }
        }
        ControllerKind::OpenLoop => {
            let ol = raw.open_loop.unwrap_or_default();
            Controller::OpenLoop {
                u1: ol.u1,
                u2: ol.u2,
            }
        }
    };
    if raw.k.is_some() && raw.controller != ControllerKind::SanoStatic {
        return Err(CliError::Config(
            "key `k` only applies to controller = \"sano_static\"".into(),
        ));
    }

    let snapshot_stride = match raw.snapshot_stride.unwrap_or(DEFAULT_SNAPSHOT_STRIDE) {
        0.0 => None,
        s if s > 0.0 && s.is_finite() => Some(s),
        s => {
            return Err(CliError::Config(format!(
                "`snapshot_stride` must be >= 0, got {s}"
            )))
        }
    };
    if raw.threads == Some(0) {
        return Err(CliError::Config("`threads` must be at least 1".into()));
    }

    let observer_field = FieldSpec::new(raw.observer.theta1, raw.observer.theta2);
    let observer0 = match raw.observer.mode {
        ObserverMode::Absolute => ObserverInit::Absolute(observer_field),
        ObserverMode::Error => ObserverInit::Error(observer_field),
    };

    let floor_rel = raw.fit.floor_rel.unwrap_or(FitOptions::DEFAULT_FLOOR);
    if !(0.0..1.0).contains(&floor_rel) {
        return Err(CliError::Config(format!(
            "`fit.floor_rel` must lie in [0, 1), got {floor_rel}"
        )));
    }

    let mut sweep = Vec::with_capacity(raw.sweep.len());
    for (name, values) in raw.sweep {
        let axis = Axis::parse(&name).ok_or_else(|| {
            CliError::Config(format!(
                "unknown sweep axis `sweep.{name}`, expected one of tau, k1, k2, h1, h2"
            ))
        })?;
        if values.is_empty() {
            return Err(CliError::Config(format!(
                "sweep axis `sweep.{name}` is empty"
            )));
        }
        sweep.push((axis, values));
    }

    let freqresp = FreqrespConfig {
        omegas: raw
            .freqresp
            .omegas
            .unwrap_or_else(|| DEFAULT_OMEGAS.to_vec()),
        cycles: raw.freqresp.cycles.unwrap_or(DEFAULT_CYCLES),
    };
    if freqresp.omegas.is_empty() {
        return Err(CliError::Config("`freqresp.omegas` is empty".into()));
    }
    if let Some(w) = freqresp
        .omegas
        .iter()
        .find(|w| !(**w >= 0.0 && w.is_finite()))
    {
        return Err(CliError::Config(format!(
            "`freqresp.omegas` entries must be finite and >= 0, got {w}"
        )));
    }
    if freqresp.cycles < 10 {
        return Err(CliError::Config(format!(
            "`freqresp.cycles` must be at least 10, got {}",
            freqresp.cycles
        )));
    }

    let spec = ScenarioSpec {
        params,
        n_cells: raw.n_cells,
        controller,
        theta0: raw.initial,
        observer0,
        t_final: raw.t_final,
        snapshot_stride,
        solver: raw.solver,
        seed: raw.seed,
        fit_window: None,
        floor_rel,
    };
    let fit = FitOverride {
        t_start: raw.fit.t_start,
        t_end: raw.fit.t_end,
    };
    let scenario = build_scenario(&spec, fit)?;
    let config = Config {
        spec,
        fit,
        output_dir: raw
            .output_dir
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR)),
        threads: raw.threads,
        sweep,
        freqresp,
        scenario,
    };
    if !config.sweep.is_empty() {
        config.sweep_points()?;
    }
    Ok(config)
}
