use crate::{Error, Field, Result};

/// Per-step record. Quantities a run does not produce are `NaN`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub plant_l2: f64,
    /// L² norm of the observer error at observer time `max(0, t - τ)`.
    pub obs_err_l2: f64,
    /// Predicted minus true exit value, `θ̂⁻(t,t,l) - θ(t,l)`.
    pub pred_err_at_l: [f64; 2],
    pub u: [f64; 2],
    /// `(θ1(t,l), θ2(t,l))`.
    pub exit: [f64; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub field: Field,
}

/// Time series on the step-aligned axis `t_k = k·dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub dt: f64,
    pub samples: Vec<Sample>,
    pub snapshots: Vec<Snapshot>,
}

impl Trajectory {
    pub fn new(dt: f64) -> Self {
        Self {
            dt,
            samples: Vec::new(),
            snapshots: Vec::new(),
        }
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn plant_norms(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.plant_l2).collect()
    }

    pub fn observer_error_norms(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.obs_err_l2).collect()
    }

    /// Index of the sample at step-aligned time `t`.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let pos = t / self.dt;
        let k = pos.round();
        if k < 0.0 || (pos - k).abs() > 1e-9 {
            return None;
        }
        let k = k as usize;
        (k < self.samples.len()).then_some(k)
    }

    pub fn exit_at(&self, t: f64) -> Option<[f64; 2]> {
        self.index_of(t).map(|k| self.samples[k].exit)
    }
}

/// Delayed measurement `y(t) = (θ2(t-τ, l), θ1(t-τ, l))`, defined for `t >= τ`.
pub fn evaluate_output(trajectory: &Trajectory, tau: f64, t: f64) -> Result<[f64; 2]> {
    if t < tau - 1e-9 * trajectory.dt {
        return Err(Error::OutputUndefined { t, tau });
    }
    let s = (t - tau).max(0.0);
    let [theta1, theta2] = trajectory
        .exit_at(s)
        .ok_or(Error::MissingBoundary { t: s })?;
    Ok([theta2, theta1])
}
