use std::fmt;

use serde::Serialize;

use crate::{validate_gains, GainReport, Params};

/// Which half of the stability theorem a delay falls into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DelayRegime {
    /// `τ > l`: the prediction error at the exit vanishes identically.
    ExactCompensation,
    /// `τ <= l`: decay needs an initial observer error in the domain of the
    /// closed-loop generator.
    CompatibilityRequired,
}

impl fmt::Display for DelayRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DelayRegime::ExactCompensation => write!(f, "tau>l"),
            DelayRegime::CompatibilityRequired => {
                write!(f, "tau<=l, requires compatible initial error")
            }
        }
    }
}

/// Delay window `h1·l < τ < h2·l/k²` (with `k² < h2/h1`) in which static
/// delayed feedback `u2 = -k·y2` is known to stabilize.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SanoWindow {
    pub k: f64,
    pub gain_ok: bool,
    pub lower: f64,
    pub upper: f64,
    pub contains_tau: bool,
}

impl SanoWindow {
    pub fn new(params: &Params, k: f64) -> Self {
        let lower = params.h1 * params.l;
        let upper = if k == 0.0 {
            f64::INFINITY
        } else {
            params.h2 * params.l / (k * k)
        };
        let gain_ok = params.h1 > 0.0 && k * k < params.h2 / params.h1;
        Self {
            k,
            gain_ok,
            lower,
            upper,
            contains_tau: lower < params.tau && params.tau < upper,
        }
    }

    pub fn inside(&self) -> bool {
        self.gain_ok && self.contains_tau
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionReport {
    pub params: Params,
    pub gains: GainReport,
    pub regime: DelayRegime,
    pub sano: Option<SanoWindow>,
}

pub fn condition_report(params: &Params, k_sano: Option<f64>) -> ConditionReport {
    ConditionReport {
        params: *params,
        gains: validate_gains(params),
        regime: if params.tau > params.l {
            DelayRegime::ExactCompensation
        } else {
            DelayRegime::CompatibilityRequired
        },
        sano: k_sano.map(|k| SanoWindow::new(params, k)),
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |x| format!("{x}"))
}

impl fmt::Display for ConditionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = &self.params;
        let g = &self.gains;
        writeln!(
            f,
            "params: h1={} h2={} l={} tau={} k1={} k2={}",
            p.h1, p.h2, p.l, p.tau, p.k1, p.k2
        )?;
        if g.applicable {
            writeln!(
                f,
                "gain k1: 0 < {} < {} -> {} (margin h1/h2 - k1^2 = {})",
                p.k1,
                opt(g.k1_bound),
                g.k1_ok,
                opt(g.k1_margin)
            )?;
            writeln!(
                f,
                "gain k2: 0 < {} < {} -> {} (margin h2/h1 - k2^2 = {})",
                p.k2,
                opt(g.k2_bound),
                g.k2_ok,
                opt(g.k2_margin)
            )?;
        } else {
            writeln!(
                f,
                "gain condition: not applicable (requires h1 > 0 and h2 > 0)"
            )?;
        }
        writeln!(f, "theorem_valid: {}", g.theorem_valid)?;
        writeln!(f, "regime: {}", self.regime)?;
        if let Some(s) = &self.sano {
            writeln!(
                f,
                "sano window (k={}): {} < tau < {}, k^2 < h2/h1: {}, contains tau: {}, inside: {}",
                s.k,
                s.lower,
                s.upper,
                s.gain_ok,
                s.contains_tau,
                s.inside()
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn long_delay_regime() {
        let p = Params::new(1.0, 2.0, 1.0, 1.5, 0.5, 0.5).unwrap();
        let r = condition_report(&p, None);
        assert!(r.gains.theorem_valid);
        assert_eq!(r.regime, DelayRegime::ExactCompensation);
        assert_eq!(r.regime.to_string(), "tau>l");
        assert!(r.sano.is_none());
    }

    #[test]
    fn short_delay_regime() {
        let p = Params::new(1.0, 2.0, 1.0, 0.5, 0.5, 0.5).unwrap();
        let r = condition_report(&p, None);
        assert_eq!(r.regime, DelayRegime::CompatibilityRequired);
        assert!(r.to_string().contains("requires compatible initial error"));
        // τ = l belongs to the compatibility regime
        let p = p.with_tau(1.0);
        assert_eq!(
            condition_report(&p, None).regime,
            DelayRegime::CompatibilityRequired
        );
    }

    #[test]
    fn sano_window_arithmetic() {
        let p = Params::new(1.0, 2.0, 1.0, 1.5, 0.5, 0.5).unwrap();
        let s = condition_report(&p, Some(1.0)).sano.unwrap();
        assert_eq!((s.lower, s.upper), (1.0, 2.0));
        assert!(s.gain_ok && s.contains_tau && s.inside());
        let s = SanoWindow::new(&p.with_tau(3.0), 1.0);
        assert!(!s.contains_tau && !s.inside());
        let s = SanoWindow::new(&p, 0.0);
        assert!(s.upper.is_infinite() && s.inside());
    }
}
