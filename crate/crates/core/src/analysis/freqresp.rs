use num_complex::Complex64;

use crate::solver::{Propagator, SolverChoice, SolverState};
use crate::{ConstantInput, Error, Field, FnInput, Grid, Params, Result};

/// Fitting starts after this many tube lengths, once the periodic steady
/// state has been reached.
pub const FREQRESP_TRANSIENT_LENGTHS: f64 = 3.0;

/// Least-squares fit `v ≈ a sin(ωt) + b cos(ωt) + c`; returns `(a, b)`.
fn fit_sinusoid(times: &[f64], values: &[f64], omega: f64) -> (f64, f64) {
    let mut ata = [[0.0; 3]; 3];
    let mut atb = [0.0; 3];
    for (&t, &v) in times.iter().zip(values) {
        let row = [(omega * t).sin(), (omega * t).cos(), 1.0];
        for i in 0..3 {
            atb[i] += row[i] * v;
            for j in 0..3 {
                ata[i][j] += row[i] * row[j];
            }
        }
    }
    let det3 = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det3(&ata);
    let solve = |col: usize| {
        let mut m = ata;
        for i in 0..3 {
            m[i][col] = atb[i];
        }
        det3(&m) / d
    };
    (solve(0), solve(1))
}

fn run_to_exit(
    propagator: &dyn Propagator,
    grid: &Grid,
    inputs: &dyn crate::BoundaryTrace,
    steps: usize,
    t_from: f64,
) -> Result<(Vec<f64>, Vec<[f64; 2]>)> {
    let mut field = Field::zeros(grid);
    field.set(
        0,
        inputs.value(0.0).ok_or(Error::MissingBoundary { t: 0.0 })?,
    );
    let mut state = SolverState::initial(field);
    let mut times = Vec::new();
    let mut ys = Vec::new();
    for _ in 0..steps {
        propagator.step_in_place(&mut state, inputs)?;
        if state.t >= t_from {
            let [e1, e2] = state.field.exit();
            times.push(state.t);
            ys.push([e2, e1]);
        }
    }
    if !state.field.is_finite() {
        return Err(Error::NonFinite {
            what: "frequency response run",
            t: state.t,
        });
    }
    Ok((times, ys))
}

/// Measured response matrix `R[i][j]` of `y_i` to `amplitude·sin(ωt)` on
/// input `j`, from the delay-free plant started at rest. `ω = 0` drives
/// with the constant `amplitude` and reads the settled exit value.
pub fn measure_response(
    omega: f64,
    amplitude: f64,
    params: &Params,
    grid: &Grid,
    cycles: usize,
    solver: SolverChoice,
) -> Result<[[Complex64; 2]; 2]> {
    if !(omega >= 0.0 && omega.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "omega",
            value: omega,
            reason: "must be finite and >= 0",
        });
    }
    if cycles < 10 {
        return Err(Error::Configuration(format!(
            "frequency response needs at least 10 cycles, got {cycles}"
        )));
    }
    let propagator = solver.build(params, grid)?;
    let dt = propagator.dt();
    let t_from = FREQRESP_TRANSIENT_LENGTHS * params.l;
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for j in 0..2 {
        let unit = |v: f64| {
            let mut u = [0.0; 2];
            u[j] = v;
            u
        };
        if omega == 0.0 {
            let steps = ((t_from + params.l) / dt).ceil() as usize;
            let (_, ys) = run_to_exit(
                &*propagator,
                grid,
                &ConstantInput(unit(amplitude)),
                steps,
                0.0,
            )?;
            let y = ys.last().copied().unwrap_or([0.0; 2]);
            for i in 0..2 {
                out[i][j] = Complex64::new(y[i], 0.0);
            }
            continue;
        }
        let t_end = t_from + cycles as f64 * std::f64::consts::TAU / omega;
        let steps = (t_end / dt).ceil() as usize;
        let input = FnInput(|t: f64| unit(amplitude * (omega * t).sin()));
        let (times, ys) = run_to_exit(&*propagator, grid, &input, steps, t_from)?;
        for i in 0..2 {
            let series: Vec<f64> = ys.iter().map(|y| y[i]).collect();
            let (a, b) = fit_sinusoid(&times, &series, omega);
            out[i][j] = Complex64::new(a, b);
        }
    }
    Ok(out)
}

/// Empirical `G(iω)`: the unit-amplitude response. For input `sin(ωt)` the
/// steady output is `Re G·sin(ωt) + Im G·cos(ωt)`.
pub fn measure_frequency_response(
    omega: f64,
    params: &Params,
    grid: &Grid,
    cycles: usize,
    solver: SolverChoice,
) -> Result<[[Complex64; 2]; 2]> {
    measure_response(omega, 1.0, params, grid, cycles, solver)
}
