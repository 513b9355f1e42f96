use num_complex::Complex64;

use crate::Params;

/// `G(s)` of the delay-free system, mapping `(u1, u2)` to `(y1, y2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferEval {
    pub s: Complex64,
    pub matrix: [[Complex64; 2]; 2],
}

impl TransferEval {
    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.matrix
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

/// Evaluate
///
/// ```text
///          1      [ h2 e^{-sl} - h2 e^{-(σ+s)l}    h2 e^{-(σ+s)l} + h1 e^{-sl} ]
/// G(s) = ----- ·  [ h2 e^{-sl} + h1 e^{-(σ+s)l}   -h1 e^{-(σ+s)l} + h1 e^{-sl} ]
///          σ
/// ```
///
/// with `σ = h1 + h2`. For `σ = 0` the limit `e^{-sl}·[[0, 1], [1, 0]]` is
/// returned.
pub fn transfer_function(s: Complex64, params: &Params) -> TransferEval {
    let (h1, h2, l) = (params.h1, params.h2, params.l);
    let sigma = h1 + h2;
    let d = (-s * l).exp();
    if sigma == 0.0 {
        let z = Complex64::new(0.0, 0.0);
        return TransferEval {
            s,
            matrix: [[z, d], [d, z]],
        };
    }
    let f = (-(s + sigma) * l).exp();
    let matrix = [
        [(h2 * d - h2 * f) / sigma, (h2 * f + h1 * d) / sigma],
        [(h2 * d + h1 * f) / sigma, (-h1 * f + h1 * d) / sigma],
    ];
    TransferEval { s, matrix }
}
