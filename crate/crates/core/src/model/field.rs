use serde::Serialize;

use crate::{Error, Grid, Params, Result};

/// Sampled profile pair `(θ1(·), θ2(·))` at the grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    theta1: Vec<f64>,
    theta2: Vec<f64>,
}

impl Field {
    pub fn new(theta1: Vec<f64>, theta2: Vec<f64>) -> Result<Self> {
        if theta1.len() != theta2.len() {
            return Err(Error::LengthMismatch {
                expected: theta1.len(),
                found: theta2.len(),
            });
        }
        if theta1.len() < 2 {
            return Err(Error::LengthMismatch {
                expected: 2,
                found: theta1.len(),
            });
        }
        let f = Self { theta1, theta2 };
        if !f.is_finite() {
            return Err(Error::NonFinite {
                what: "field",
                t: 0.0,
            });
        }
        Ok(f)
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self {
            theta1: vec![0.0; grid.len()],
            theta2: vec![0.0; grid.len()],
        }
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(f64) -> [f64; 2]) -> Self {
        let (theta1, theta2) = grid
            .nodes()
            .map(|x| {
                let v = f(x);
                (v[0], v[1])
            })
            .unzip();
        Self { theta1, theta2 }
    }

    pub fn len(&self) -> usize {
        self.theta1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta1.is_empty()
    }

    pub fn theta1(&self) -> &[f64] {
        &self.theta1
    }

    pub fn theta2(&self) -> &[f64] {
        &self.theta2
    }

    #[inline]
    pub fn at(&self, i: usize) -> [f64; 2] {
        [self.theta1[i], self.theta2[i]]
    }

    #[inline]
    pub fn set(&mut self, i: usize, v: [f64; 2]) {
        self.theta1[i] = v[0];
        self.theta2[i] = v[1];
    }

    /// Values at the exit `x = l`.
    pub fn exit(&self) -> [f64; 2] {
        self.at(self.len() - 1)
    }

    /// Values at the inlet `x = 0`.
    pub fn inlet(&self) -> [f64; 2] {
        self.at(0)
    }

    pub fn is_finite(&self) -> bool {
        self.theta1
            .iter()
            .chain(&self.theta2)
            .all(|v| v.is_finite())
    }

    pub fn check_grid(&self, grid: &Grid) -> Result<()> {
        if self.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                found: self.len(),
            });
        }
        Ok(())
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &Field, b: f64) -> Result<Field> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                found: other.len(),
            });
        }
        let lin = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| a * p + b * q).collect();
        Ok(Field {
            theta1: lin(&self.theta1, &other.theta1),
            theta2: lin(&self.theta2, &other.theta2),
        })
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.combine(1.0, other, -1.0)
    }

    /// Largest absolute nodewise difference over both components.
    pub fn sup_diff(&self, other: &Field) -> f64 {
        self.theta1
            .iter()
            .zip(&other.theta1)
            .chain(self.theta2.iter().zip(&other.theta2))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn sup_norm(&self) -> f64 {
        self.theta1
            .iter()
            .chain(&self.theta2)
            .map(|v| v.abs())
            .fold(0.0, f64::max)
    }
}

/// Trapezoid approximation of `sqrt(∫₀^l θ1² + θ2² dx)`.
pub fn l2_norm(field: &Field, grid: &Grid) -> Result<f64> {
    field.check_grid(grid)?;
    Ok(l2_norm_unchecked(field, grid.dx()))
}

pub(crate) fn l2_norm_unchecked(field: &Field, dx: f64) -> f64 {
    let sq = |v: &[f64]| {
        let n = v.len() - 1;
        let inner: f64 = v[1..n].iter().map(|x| x * x).sum();
        inner + 0.5 * (v[0] * v[0] + v[n] * v[n])
    };
    ((sq(&field.theta1) + sq(&field.theta2)) * dx).sqrt()
}

/// Default ratio between a flagged increment and its neighbouring increments.
pub const DEFAULT_JUMP_FACTOR: f64 = 10.0;

/// Result of [`compatibility_check`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompatibilityReport {
    pub compatible: bool,
    /// `w1(0) + k1·w2(l)`.
    pub residual1: f64,
    /// `w2(0) + k2·w1(l)`.
    pub residual2: f64,
    pub max_slope: f64,
    /// Node indices `i` where the increment `w(i+1) - w(i)` is a jump.
    pub jumps: Vec<usize>,
}

/// Discrete membership test for the domain of the closed-loop generator:
/// the cross-coupled feedback boundary conditions must hold to `tol`, and the
/// profile must look like a sampled H¹ function.
///
/// An increment `Δ_i` counts as a jump when
/// `|Δ_i| > jump_factor · dx · max(|slope_{i-1}|, |slope_{i+1}|) + tol`,
/// i.e. when it is an isolated outlier against its neighbouring slopes.
/// `jump_factor` defaults to [`DEFAULT_JUMP_FACTOR`].
pub fn compatibility_check(
    w: &Field,
    params: &Params,
    grid: &Grid,
    tol: f64,
    jump_factor: Option<f64>,
) -> Result<CompatibilityReport> {
    w.check_grid(grid)?;
    let factor = jump_factor.unwrap_or(DEFAULT_JUMP_FACTOR);
    let dx = grid.dx();
    let [w1_0, w2_0] = w.inlet();
    let [w1_l, w2_l] = w.exit();
    let residual1 = w1_0 + params.k1 * w2_l;
    let residual2 = w2_0 + params.k2 * w1_l;

    let mut max_slope = 0.0_f64;
    let mut jumps = Vec::new();
    for comp in [w.theta1(), w.theta2()] {
        let inc: Vec<f64> = comp.windows(2).map(|p| p[1] - p[0]).collect();
        for (i, d) in inc.iter().enumerate() {
            max_slope = max_slope.max(d.abs() / dx);
            let left = if i > 0 { inc[i - 1].abs() } else { 0.0 };
            let right = inc.get(i + 1).map_or(0.0, |v| v.abs());
            if d.abs() > factor * left.max(right) + tol && !jumps.contains(&i) {
                jumps.push(i);
            }
        }
    }
    jumps.sort_unstable();

    let compatible = residual1.abs() <= tol
        && residual2.abs() <= tol
        && max_slope.is_finite()
        && jumps.is_empty();
    Ok(CompatibilityReport {
        compatible,
        residual1,
        residual2,
        max_slope,
        jumps,
    })
}
