use crate::{Error, Params, Result};

/// The 2×2 matrix `exp(A1·s)` for the heat-exchange coupling
/// `A1 = [[-h1, h1], [h2, -h2]]`.
///
/// With `σ = h1 + h2` and `E = exp(-σ s)`:
///
/// ```text
/// [ (h2 + h1 E)/σ    h1 (1 - E)/σ ]
/// [ h2 (1 - E)/σ    (h1 + h2 E)/σ ]
/// ```
///
/// This is the flow of `dv/ds = A1 v` along a characteristic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingExp {
    s: f64,
    m: [[f64; 2]; 2],
}

impl CouplingExp {
    pub fn new(s: f64, h1: f64, h2: f64) -> Result<Self> {
        if !(s >= 0.0) {
            return Err(Error::NegativeTime(s));
        }
        let sigma = h1 + h2;
        if sigma == 0.0 {
            return Ok(Self::identity_at(s));
        }
        let e = (-sigma * s).exp();
        // 1 - E without cancellation for small σ s
        let one_minus_e = -(-sigma * s).exp_m1();
        let m = [
            [(h2 + h1 * e) / sigma, h1 * one_minus_e / sigma],
            [h2 * one_minus_e / sigma, (h1 + h2 * e) / sigma],
        ];
        Ok(Self { s, m })
    }

    pub fn identity() -> Self {
        Self::identity_at(0.0)
    }

    fn identity_at(s: f64) -> Self {
        Self {
            s,
            m: [[1.0, 0.0], [0.0, 1.0]],
        }
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn entries(&self) -> [[f64; 2]; 2] {
        self.m
    }

    #[inline]
    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [
            self.m[0][0] * v[0] + self.m[0][1] * v[1],
            self.m[1][0] * v[0] + self.m[1][1] * v[1],
        ]
    }

    /// Matrix product `self · other`.
    pub fn compose(&self, other: &CouplingExp) -> [[f64; 2]; 2] {
        let a = &self.m;
        let b = &other.m;
        let mut out = [[0.0; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        out
    }
}

pub fn coupling_exp(s: f64, params: &Params) -> Result<CouplingExp> {
    CouplingExp::new(s, params.h1, params.h2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: [[f64; 2]; 2], b: [[f64; 2]; 2], tol: f64) -> bool {
        (0..2).all(|i| (0..2).all(|j| (a[i][j] - b[i][j]).abs() <= tol))
    }

    #[test]
    fn zero_time_is_identity() {
        let e = CouplingExp::new(0.0, 1.3, 0.4).unwrap();
        assert_eq!(e.entries(), [[1.0, 0.0], [0.0, 1.0]]);
    }

    #[test]
    fn quarter_mixing() {
        // E = exp(-2 · ln2/2) = 1/2
        let e = CouplingExp::new(std::f64::consts::LN_2 / 2.0, 1.0, 1.0).unwrap();
        assert!(close(e.entries(), [[0.75, 0.25], [0.25, 0.75]], 1e-15));
    }

    #[test]
    fn long_time_limit() {
        let e = CouplingExp::new(50.0, 1.0, 2.0).unwrap();
        let third = 1.0 / 3.0;
        assert!(close(
            e.entries(),
            [[2.0 * third, third], [2.0 * third, third]],
            1e-15
        ));
    }

    #[test]
    fn decoupled_is_identity() {
        let e = CouplingExp::new(3.0, 0.0, 0.0).unwrap();
        assert_eq!(e.entries(), [[1.0, 0.0], [0.0, 1.0]]);
    }

    #[test]
    fn negative_time_rejected() {
        assert_eq!(
            CouplingExp::new(-0.1, 1.0, 1.0),
            Err(Error::NegativeTime(-0.1))
        );
        assert!(CouplingExp::new(f64::NAN, 1.0, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn rows_are_stochastic(h1 in 0.0f64..20.0, h2 in 0.0f64..20.0, s in 0.0f64..10.0) {
            let m = CouplingExp::new(s, h1, h2).unwrap().entries();
            for row in m {
                prop_assert!((row[0] + row[1] - 1.0).abs() <= 1e-14);
                prop_assert!(row.iter().all(|&v| (0.0..=1.0).contains(&v)));
            }
        }

        #[test]
        fn semigroup(h1 in 0.0f64..5.0, h2 in 0.0f64..5.0, s in 0.0f64..10.0, t in 0.0f64..10.0) {
            let a = CouplingExp::new(s, h1, h2).unwrap();
            let b = CouplingExp::new(t, h1, h2).unwrap();
            let ab = CouplingExp::new(s + t, h1, h2).unwrap();
            prop_assert!(close(a.compose(&b), ab.entries(), 1e-12));
        }

        #[test]
        fn weighted_sum_invariant(h1 in 0.0f64..20.0, h2 in 0.0f64..20.0, s in 0.0f64..10.0) {
            let m = CouplingExp::new(s, h1, h2).unwrap().entries();
            prop_assert!((h2 * m[0][0] + h1 * m[1][0] - h2).abs() <= 1e-14 * (1.0 + h2));
            prop_assert!((h2 * m[0][1] + h1 * m[1][1] - h1).abs() <= 1e-14 * (1.0 + h1));
        }
    }
}
