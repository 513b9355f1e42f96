use serde::Serialize;

use crate::{Error, Result};

/// Uniform grid `x_i = i·dx`, `i = 0..=n_cells`, over `[0, l]`.
///
/// The characteristic solver advances with `dt = dx`, so time durations are
/// represented as integer step counts (see [`Grid::snap`]).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    n_cells: usize,
    l: f64,
    dx: f64,
}

/// A duration rounded to a whole number of time steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Snapped {
    pub requested: f64,
    pub value: f64,
    pub steps: usize,
}

impl Snapped {
    /// True when rounding moved the value by more than floating noise.
    pub fn adjusted(&self) -> bool {
        (self.value - self.requested).abs() > 1e-12 * self.requested.abs().max(1.0)
    }
}

impl Grid {
    pub fn new(l: f64, n_cells: usize) -> Result<Self> {
        if !(l.is_finite() && l > 0.0) {
            return Err(Error::InvalidParameter {
                name: "l",
                value: l,
                reason: "must be finite and > 0",
            });
        }
        if n_cells == 0 {
            return Err(Error::InvalidParameter {
                name: "n_cells",
                value: 0.0,
                reason: "must be positive",
            });
        }
        Ok(Self {
            n_cells,
            l,
            dx: l / n_cells as f64,
        })
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    /// Number of nodes, `n_cells + 1`.
    pub fn len(&self) -> usize {
        self.n_cells + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Time step of the characteristic scheme.
    pub fn dt(&self) -> f64 {
        self.dx
    }

    pub fn node(&self, i: usize) -> f64 {
        if i == self.n_cells {
            self.l
        } else {
            i as f64 * self.dx
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|i| self.node(i))
    }

    /// Round a nonnegative duration to the nearest multiple of `step`.
    pub fn snap_to(duration: f64, step: f64) -> Snapped {
        let steps = (duration / step).round().max(0.0) as usize;
        Snapped {
            requested: duration,
            value: steps as f64 * step,
            steps,
        }
    }

    /// Round a duration to the nearest multiple of `dt = dx`.
    pub fn snap(&self, duration: f64) -> Snapped {
        Self::snap_to(duration, self.dt())
    }
}
