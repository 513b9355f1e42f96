use super::{integrate, Propagator, Trajectory};
use crate::{BoundaryTrace, CouplingExp, Error, Field, Grid, Params, Result};

/// Characteristic solver with `dt = dx`.
///
/// The characteristic through `(t + dt, x_i)` passes through `(t, x_{i-1})`,
/// and along it the coupling ODE is solved by `exp(A1·dt)`, so
/// `θ(t + dt, x_i) = exp(A1·dt)·θ(t, x_{i-1})` holds exactly.
#[derive(Debug, Clone)]
pub struct ExactSolver {
    grid: Grid,
    params: Params,
    exp_dt: CouplingExp,
}

impl ExactSolver {
    pub fn new(params: &Params, grid: &Grid) -> Result<Self> {
        Ok(Self {
            grid: *grid,
            params: *params,
            exp_dt: CouplingExp::new(grid.dt(), params.h1, params.h2)?,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn params(&self) -> &Params {
        &self.params
    }
}

impl Propagator for ExactSolver {
    fn dt(&self) -> f64 {
        self.grid.dt()
    }

    fn dx(&self) -> f64 {
        self.grid.dx()
    }

    fn advance_interior(&self, field: &mut Field) {
        for i in (1..field.len()).rev() {
            field.set(i, self.exp_dt.apply(field.at(i - 1)));
        }
    }
}

/// Open-loop solve over `[0, t_final]` with the exact solver.
pub fn solve_exact(
    theta0: &Field,
    inputs: &dyn BoundaryTrace,
    t_final: f64,
    params: &Params,
    grid: &Grid,
    snapshot_every: Option<usize>,
) -> Result<Trajectory> {
    theta0.check_grid(grid)?;
    let snapped = grid.snap(t_final);
    if snapped.adjusted() {
        return Err(Error::Configuration(format!(
            "final time {t_final} is not a multiple of dt = {}",
            grid.dt()
        )));
    }
    let solver = ExactSolver::new(params, grid)?;
    integrate(
        &solver,
        theta0.clone(),
        inputs,
        snapped.steps,
        snapshot_every,
    )
}

/// Pointwise closed-form solution:
/// `exp(A1·t)·θ0(x - t)` for `x > t`, `exp(A1·x)·u(t - x)` for `x <= t`.
///
/// The inlet carries `u` at every time including `t = 0`, so the
/// characteristic `x = t` belongs to the boundary data.
pub fn characteristic_solution(
    theta0: impl Fn(f64) -> [f64; 2],
    inputs: &dyn BoundaryTrace,
    t: f64,
    x: f64,
    params: &Params,
) -> Result<[f64; 2]> {
    if x > t {
        Ok(CouplingExp::new(t, params.h1, params.h2)?.apply(theta0(x - t)))
    } else {
        let s = t - x;
        let u = inputs.value(s).ok_or(Error::MissingBoundary { t: s })?;
        Ok(CouplingExp::new(x, params.h1, params.h2)?.apply(u))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::SolverState;
    use crate::{ConstantInput, FnInput, ZeroInput};
    use proptest::prelude::*;

    fn setup(h1: f64, h2: f64, n: usize) -> (Params, Grid) {
        (
            Params::new(h1, h2, 1.0, 0.5, 0.5, 0.5).unwrap(),
            Grid::new(1.0, n).unwrap(),
        )
    }

    /// RK4 on the characteristic ODE dv/ds = A1 v, used as an independent check.
    fn rk4_coupling(v0: [f64; 2], s: f64, h1: f64, h2: f64) -> [f64; 2] {
        let f = |v: [f64; 2]| [h1 * (v[1] - v[0]), h2 * (v[0] - v[1])];
        let n = ((s * (h1 + h2)) / 0.002).ceil().max(1.0) as usize;
        let h = s / n as f64;
        let mut v = v0;
        for _ in 0..n {
            let k1 = f(v);
            let k2 = f([v[0] + 0.5 * h * k1[0], v[1] + 0.5 * h * k1[1]]);
            let k3 = f([v[0] + 0.5 * h * k2[0], v[1] + 0.5 * h * k2[1]]);
            let k4 = f([v[0] + h * k3[0], v[1] + h * k3[1]]);
            for c in 0..2 {
                v[c] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
            }
        }
        v
    }

    #[test]
    fn zero_stays_zero() {
        let (p, g) = setup(1.0, 2.0, 20);
        let s = ExactSolver::new(&p, &g).unwrap();
        let next = s
            .step(&SolverState::initial(Field::zeros(&g)), &ZeroInput)
            .unwrap();
        assert_eq!(next.field, Field::zeros(&g));
        assert_eq!(next.step, 1);
    }

    #[test]
    fn equal_components_are_fixed() {
        let (p, g) = setup(1.0, 2.0, 20);
        let s = ExactSolver::new(&p, &g).unwrap();
        let c = 0.7;
        let next = s
            .step(
                &SolverState::initial(Field::from_fn(&g, |_| [c, c])),
                &ZeroInput,
            )
            .unwrap();
        assert_eq!(next.field.at(0), [0.0, 0.0]);
        for i in 1..g.len() {
            let v = next.field.at(i);
            assert!((v[0] - c).abs() < 1e-15 && (v[1] - c).abs() < 1e-15);
        }
    }

    #[test]
    fn exit_value_against_rk4() {
        // h1 = h2 = 1, θ0 = (1, 0), query (t, x) = (0.5, 1.0)
        let (p, g) = setup(1.0, 1.0, 100);
        let theta0 = Field::from_fn(&g, |_| [1.0, 0.0]);
        let traj = solve_exact(&theta0, &ZeroInput, 0.5, &p, &g, Some(50)).unwrap();
        let got = traj.snapshots.last().unwrap().field.exit();
        let oracle = rk4_coupling([1.0, 0.0], 0.5, 1.0, 1.0);
        assert!((got[0] - oracle[0]).abs() < 1e-10);
        assert!((got[1] - oracle[1]).abs() < 1e-10);
        assert!((got[0] - 0.6839397205857212).abs() < 1e-12);
        assert!((got[1] - 0.3160602794142788).abs() < 1e-12);
    }

    #[test]
    fn pure_advection_without_exchange() {
        let (p, g) = setup(0.0, 0.0, 50);
        let f0 = |x: f64| [x * x, (3.0 * x).sin()];
        let theta0 = Field::from_fn(&g, f0);
        let traj = solve_exact(&theta0, &ZeroInput, 0.4, &p, &g, Some(20)).unwrap();
        let last = &traj.snapshots.last().unwrap().field;
        for (i, x) in g.nodes().enumerate().filter(|(_, x)| *x > 0.4 + 1e-12) {
            let want = f0(x - 0.4);
            assert!((last.at(i)[0] - want[0]).abs() < 1e-12, "node {i}");
            assert!((last.at(i)[1] - want[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_input_steady_state() {
        let (p, g) = setup(1.0, 1.0, 100);
        let traj = solve_exact(
            &Field::zeros(&g),
            &ConstantInput([1.0, 0.0]),
            3.0,
            &p,
            &g,
            None,
        )
        .unwrap();
        let exit = traj.samples.last().unwrap().exit;
        assert!((exit[0] - 0.5676676416183064).abs() < 1e-12);
        assert!((exit[1] - 0.4323323583816936).abs() < 1e-12);
    }

    #[test]
    fn flushes_after_one_length() {
        let (p, g) = setup(1.0, 2.0, 40);
        let theta0 = Field::from_fn(&g, |x| [(7.0 * x).cos(), 1.0 - x]);
        let traj = solve_exact(&theta0, &ZeroInput, 2.0, &p, &g, Some(1)).unwrap();
        for snap in traj.snapshots.iter().filter(|s| s.t >= 1.0 - 1e-12) {
            assert!(snap.field.sup_norm() <= 1e-14, "t = {}", snap.t);
        }
    }

    #[test]
    fn stepping_matches_closed_form() {
        let (p, g) = setup(1.0, 2.0, 50);
        let f0 = |x: f64| [(2.0 * x).sin(), x];
        let input = FnInput(|t: f64| [t.cos(), 0.3 * t]);
        let traj = solve_exact(&Field::from_fn(&g, f0), &input, 1.6, &p, &g, Some(8)).unwrap();
        for snap in &traj.snapshots {
            for (i, x) in g.nodes().enumerate() {
                let want = characteristic_solution(f0, &input, snap.t, x, &p).unwrap();
                let got = snap.field.at(i);
                assert!((got[0] - want[0]).abs() < 1e-12 && (got[1] - want[1]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn misaligned_final_time() {
        let (p, g) = setup(1.0, 2.0, 10);
        assert!(solve_exact(&Field::zeros(&g), &ZeroInput, 0.55, &p, &g, None).is_err());
    }

    struct Gap;
    impl BoundaryTrace for Gap {
        fn value(&self, t: f64) -> Option<[f64; 2]> {
            (t < 0.25).then_some([0.0; 2])
        }
    }

    #[test]
    fn missing_boundary_names_time() {
        let (p, g) = setup(1.0, 2.0, 10);
        match solve_exact(&Field::zeros(&g), &Gap, 1.0, &p, &g, None) {
            Err(Error::MissingBoundary { t }) => assert!((t - 0.3).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn linear_in_data(
            a in -2.0f64..2.0, b in -2.0f64..2.0,
            c in prop::array::uniform4(-1.0f64..1.0),
        ) {
            let (p, g) = setup(1.0, 2.0, 25);
            let th = Field::from_fn(&g, |x| [c[0] * x, c[1] * (1.0 - x)]);
            let ph = Field::from_fn(&g, |x| [(c[2] * 5.0 * x).sin(), c[3]]);
            let u = FnInput(|t: f64| [t.sin(), c[0]]);
            let v = FnInput(|t: f64| [c[1], (2.0 * t).cos()]);
            let mix = FnInput(|t: f64| {
                let (x, y) = (u.value(t).unwrap(), v.value(t).unwrap());
                [a * x[0] + b * y[0], a * x[1] + b * y[1]]
            });
            let left = solve_exact(&th.combine(a, &ph, b).unwrap(), &mix, 2.0, &p, &g, Some(5)).unwrap();
            let r1 = solve_exact(&th, &u, 2.0, &p, &g, Some(5)).unwrap();
            let r2 = solve_exact(&ph, &v, 2.0, &p, &g, Some(5)).unwrap();
            for ((l, x), y) in left.snapshots.iter().zip(&r1.snapshots).zip(&r2.snapshots) {
                let right = x.field.combine(a, &y.field, b).unwrap();
                prop_assert!(l.field.sup_diff(&right) <= 1e-12);
            }
        }
    }
}
