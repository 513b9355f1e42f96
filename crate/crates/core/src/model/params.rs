use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Physical and control parameters of the exchanger.
///
/// `h1`, `h2` are the heat-exchange rates, `l` the tube length, `tau` the
/// observation delay and `k1`, `k2` the feedback gains. The numerics accept
/// `h1 = h2 = 0` (pure advection); the stability theorem needs both positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub h1: f64,
    pub h2: f64,
    pub l: f64,
    pub tau: f64,
    pub k1: f64,
    pub k2: f64,
}

fn check(name: &'static str, value: f64, ok: bool, reason: &'static str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason,
        })
    }
}

impl Params {
    pub fn new(h1: f64, h2: f64, l: f64, tau: f64, k1: f64, k2: f64) -> Result<Self> {
        let p = Self {
            h1,
            h2,
            l,
            tau,
            k1,
            k2,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check(
            "h1",
            self.h1,
            self.h1.is_finite() && self.h1 >= 0.0,
            "must be finite and >= 0",
        )?;
        check(
            "h2",
            self.h2,
            self.h2.is_finite() && self.h2 >= 0.0,
            "must be finite and >= 0",
        )?;
        check(
            "l",
            self.l,
            self.l.is_finite() && self.l > 0.0,
            "must be finite and > 0",
        )?;
        check(
            "tau",
            self.tau,
            self.tau.is_finite() && self.tau > 0.0,
            "must be finite and > 0",
        )?;
        check("k1", self.k1, self.k1.is_finite(), "must be finite")?;
        check("k2", self.k2, self.k2.is_finite(), "must be finite")?;
        Ok(())
    }

    /// Total exchange rate `h1 + h2`, the decay rate of the fast coupling mode.
    pub fn total_rate(&self) -> f64 {
        self.h1 + self.h2
    }

    pub fn theorem_valid(&self) -> bool {
        validate_gains(self).theorem_valid
    }

    pub fn with_tau(self, tau: f64) -> Self {
        Self { tau, ..self }
    }
}

/// Outcome of the gain condition `0 < k1 < sqrt(h1/h2)`, `0 < k2 < sqrt(h2/h1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GainReport {
    /// False when `h1 <= 0` or `h2 <= 0`; the ratio bounds are then undefined.
    pub applicable: bool,
    pub k1_positive: bool,
    pub k2_positive: bool,
    pub k1_bound: Option<f64>,
    pub k2_bound: Option<f64>,
    /// `h1/h2 - k1²`; positive when the squared inequality holds.
    pub k1_margin: Option<f64>,
    /// `h2/h1 - k2²`.
    pub k2_margin: Option<f64>,
    pub k1_ok: bool,
    pub k2_ok: bool,
    pub theorem_valid: bool,
}

pub fn validate_gains(params: &Params) -> GainReport {
    let k1_positive = params.k1 > 0.0;
    let k2_positive = params.k2 > 0.0;
    if !(params.h1 > 0.0 && params.h2 > 0.0) {
        return GainReport {
            applicable: false,
            k1_positive,
            k2_positive,
            k1_bound: None,
            k2_bound: None,
            k1_margin: None,
            k2_margin: None,
            k1_ok: false,
            k2_ok: false,
            theorem_valid: false,
        };
    }
    let r1 = params.h1 / params.h2;
    let r2 = params.h2 / params.h1;
    let k1_ok = k1_positive && params.k1 * params.k1 < r1;
    let k2_ok = k2_positive && params.k2 * params.k2 < r2;
    GainReport {
        applicable: true,
        k1_positive,
        k2_positive,
        k1_bound: Some(r1.sqrt()),
        k2_bound: Some(r2.sqrt()),
        k1_margin: Some(r1 - params.k1 * params.k1),
        k2_margin: Some(r2 - params.k2 * params.k2),
        k1_ok,
        k2_ok,
        theorem_valid: k1_ok && k2_ok,
    }
}
