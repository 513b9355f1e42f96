use serde::Serialize;

use crate::{Error, Result};

/// Fewest samples above the floor a fit will accept.
pub const MIN_FIT_SAMPLES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub t_start: f64,
    pub t_end: f64,
    /// Samples at or below `floor_rel · max|series|` are excluded.
    pub floor_rel: f64,
}

impl FitOptions {
    pub const DEFAULT_FLOOR: f64 = 1e-13;

    pub fn window(t_start: f64, t_end: f64) -> Self {
        Self {
            t_start,
            t_end,
            floor_rel: Self::DEFAULT_FLOOR,
        }
    }
}

/// Log-linear fit `ln ‖·‖ ≈ c - γ̂ t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayReport {
    /// `None` when every sample in the window fell below the floor.
    pub gamma_hat: Option<f64>,
    pub r_squared: f64,
    pub window: [f64; 2],
    pub floor_hit: bool,
    pub samples_used: usize,
}

impl DecayReport {
    pub fn extinct(&self) -> bool {
        self.gamma_hat.is_none()
    }

    /// Positive rate, or extinction which is faster than any rate.
    pub fn decays(&self) -> bool {
        self.gamma_hat.is_none_or(|g| g > 0.0)
    }
}

pub fn fit_decay(times: &[f64], values: &[f64], opts: &FitOptions) -> Result<DecayReport> {
    if times.len() != values.len() {
        return Err(Error::LengthMismatch {
            expected: times.len(),
            found: values.len(),
        });
    }
    let reference = values
        .iter()
        .filter(|v| v.is_finite())
        .fold(0.0_f64, |m, v| m.max(v.abs()));
    let floor = opts.floor_rel * reference;
    // half-step slack so that step-aligned window ends are included
    let slack = 1e-9 * (opts.t_end - opts.t_start).abs().max(1.0);
    let in_window: Vec<(f64, f64)> = times
        .iter()
        .zip(values)
        .filter(|(t, _)| **t >= opts.t_start - slack && **t <= opts.t_end + slack)
        .map(|(t, v)| (*t, *v))
        .collect();
    let used: Vec<(f64, f64)> = in_window
        .iter()
        .filter(|(_, v)| v.is_finite() && *v > floor)
        .map(|(t, v)| (*t, v.ln()))
        .collect();
    let floor_hit = used.len() < in_window.len();
    let window = [opts.t_start, opts.t_end];

    if !in_window.is_empty() && used.is_empty() {
        return Ok(DecayReport {
            gamma_hat: None,
            r_squared: f64::NAN,
            window,
            floor_hit: true,
            samples_used: 0,
        });
    }
    if used.len() < MIN_FIT_SAMPLES {
        return Err(Error::InsufficientSamples {
            found: used.len(),
            required: MIN_FIT_SAMPLES,
        });
    }

    let n = used.len() as f64;
    let t_mean = used.iter().map(|p| p.0).sum::<f64>() / n;
    let y_mean = used.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &(t, y) in &used {
        let (dt, dy) = (t - t_mean, y - y_mean);
        sxx += dt * dt;
        sxy += dt * dy;
        syy += dy * dy;
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let ss_res = (syy - slope * sxy).max(0.0);
    let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };

    Ok(DecayReport {
        gamma_hat: Some(-slope),
        r_squared,
        window,
        floor_hit,
        samples_used: used.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid_times(t0: f64, t1: f64, n: usize) -> Vec<f64> {
        (0..=n)
            .map(|i| t0 + (t1 - t0) * i as f64 / n as f64)
            .collect()
    }

    #[test]
    fn exact_exponential() {
        let t = grid_times(0.0, 10.0, 1000);
        let v: Vec<f64> = t.iter().map(|t| (-0.5 * t).exp()).collect();
        let r = fit_decay(&t, &v, &FitOptions::window(0.0, 10.0)).unwrap();
        assert!((r.gamma_hat.unwrap() - 0.5).abs() < 1e-6);
        assert!((r.r_squared - 1.0).abs() < 1e-12);
        assert!(!r.floor_hit);
        assert_eq!(r.samples_used, 1001);
    }

    #[test]
    fn constant_series() {
        let t = grid_times(0.0, 5.0, 100);
        let v = vec![0.3; t.len()];
        let r = fit_decay(&t, &v, &FitOptions::window(0.0, 5.0)).unwrap();
        assert!(r.gamma_hat.unwrap().abs() < 1e-12);
    }

    #[test]
    fn extinct_series() {
        let t = grid_times(0.0, 5.0, 100);
        let v: Vec<f64> = t.iter().map(|&t| if t < 1.0 { 1.0 } else { 0.0 }).collect();
        let r = fit_decay(&t, &v, &FitOptions::window(2.0, 5.0)).unwrap();
        assert!(r.extinct() && r.floor_hit && r.decays());
    }

    #[test]
    fn floor_excludes_samples() {
        let t = grid_times(0.0, 10.0, 100);
        let v: Vec<f64> = t
            .iter()
            .map(|&t| if t < 8.0 { (-t).exp() } else { 0.0 })
            .collect();
        let r = fit_decay(&t, &v, &FitOptions::window(0.0, 10.0)).unwrap();
        assert!(r.floor_hit);
        assert_eq!(r.samples_used, 80);
        assert!((r.gamma_hat.unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn too_few_samples() {
        let t = grid_times(0.0, 1.0, 5);
        let v = vec![1.0; 6];
        assert!(matches!(
            fit_decay(&t, &v, &FitOptions::window(0.0, 1.0)),
            Err(Error::InsufficientSamples { found: 6, .. })
        ));
    }

    proptest! {
        #[test]
        fn scale_and_shift_equivariant(
            gamma in 0.05f64..3.0, c in 1e-3f64..1e3, shift in -5.0f64..5.0,
            wobble in 0.0f64..0.3,
        ) {
            let t = grid_times(0.0, 10.0, 400);
            let v: Vec<f64> = t
                .iter()
                .map(|&t| (-gamma * t).exp() * (1.0 + wobble * (3.0 * t).sin().powi(2)))
                .collect();
            let base = fit_decay(&t, &v, &FitOptions::window(1.0, 9.0)).unwrap();

            let scaled: Vec<f64> = v.iter().map(|x| c * x).collect();
            let r = fit_decay(&t, &scaled, &FitOptions::window(1.0, 9.0)).unwrap();
            prop_assert!((r.gamma_hat.unwrap() - base.gamma_hat.unwrap()).abs() < 1e-9);

            let shifted: Vec<f64> = t.iter().map(|t| t + shift).collect();
            let r = fit_decay(&shifted, &v, &FitOptions::window(1.0 + shift, 9.0 + shift)).unwrap();
            prop_assert!((r.gamma_hat.unwrap() - base.gamma_hat.unwrap()).abs() < 1e-9);
            prop_assert_eq!(r.samples_used, base.samples_used);
        }
    }
}
