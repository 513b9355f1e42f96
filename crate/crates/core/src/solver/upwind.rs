use super::Propagator;
use crate::{CouplingExp, Error, Field, Grid, Params, Result};

/// First-order upwind advection followed by exact coupling over `dt`
/// (Lie splitting), with `dt = cfl·dx`.
#[derive(Debug, Clone)]
pub struct UpwindSolver {
    grid: Grid,
    cfl: f64,
    dt: f64,
    exp_dt: CouplingExp,
}

impl UpwindSolver {
    pub fn new(params: &Params, grid: &Grid, cfl: f64) -> Result<Self> {
        if !(cfl > 0.0 && cfl <= 1.0) {
            return Err(Error::InvalidCfl(cfl));
        }
        let dt = cfl * grid.dx();
        Ok(Self {
            grid: *grid,
            cfl,
            dt,
            exp_dt: CouplingExp::new(dt, params.h1, params.h2)?,
        })
    }

    pub fn cfl(&self) -> f64 {
        self.cfl
    }
}

impl Propagator for UpwindSolver {
    fn dt(&self) -> f64 {
        self.dt
    }

    fn dx(&self) -> f64 {
        self.grid.dx()
    }

    fn advance_interior(&self, field: &mut Field) {
        // descending so that node i-1 still holds the old value
        let c = self.cfl;
        for i in (1..field.len()).rev() {
            let [a0, a1] = field.at(i);
            let [b0, b1] = field.at(i - 1);
            let advected = [a0 - c * (a0 - b0), a1 - c * (a1 - b1)];
            field.set(i, self.exp_dt.apply(advected));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{characteristic_solution, integrate, ExactSolver, SolverState};
    use crate::{FnInput, ZeroInput};

    fn params() -> Params {
        Params::new(1.0, 2.0, 1.0, 0.5, 0.5, 0.5).unwrap()
    }

    #[test]
    fn rejects_bad_cfl() {
        let g = Grid::new(1.0, 10).unwrap();
        for c in [0.0, -0.5, 1.5, f64::NAN] {
            assert!(matches!(
                UpwindSolver::new(&params(), &g, c),
                Err(Error::InvalidCfl(_))
            ));
        }
    }

    #[test]
    fn zero_stays_zero() {
        let g = Grid::new(1.0, 10).unwrap();
        let s = UpwindSolver::new(&params(), &g, 0.5).unwrap();
        let next = s
            .step(&SolverState::initial(Field::zeros(&g)), &ZeroInput)
            .unwrap();
        assert_eq!(next.field, Field::zeros(&g));
    }

    #[test]
    fn unit_cfl_matches_exact_step() {
        let g = Grid::new(1.0, 64).unwrap();
        let up = UpwindSolver::new(&params(), &g, 1.0).unwrap();
        let ex = ExactSolver::new(&params(), &g).unwrap();
        let input = FnInput(|t: f64| [(3.0 * t).sin(), 1.0]);
        let mut a = SolverState::initial(Field::from_fn(&g, |x| [x, (5.0 * x).cos()]));
        let mut b = a.clone();
        for _ in 0..200 {
            up.step_in_place(&mut a, &input).unwrap();
            ex.step_in_place(&mut b, &input).unwrap();
            assert!(a.field.sup_diff(&b.field) <= 1e-12);
        }
    }

    #[test]
    fn first_order_convergence() {
        let p = params();
        let f0 = |x: f64| {
            let s = (std::f64::consts::PI * x).sin();
            [s * s, 0.5 * s * s]
        };
        let t_final = 0.5;
        let errs: Vec<f64> = [100usize, 200, 400]
            .iter()
            .map(|&n| {
                let g = Grid::new(1.0, n).unwrap();
                let s = UpwindSolver::new(&p, &g, 0.5).unwrap();
                let steps = (t_final / s.dt()).round() as usize;
                let traj =
                    integrate(&s, Field::from_fn(&g, f0), &ZeroInput, steps, Some(steps)).unwrap();
                let last = &traj.snapshots.last().unwrap().field;
                g.nodes()
                    .enumerate()
                    .map(|(i, x)| {
                        let want = characteristic_solution(f0, &ZeroInput, t_final, x, &p).unwrap();
                        let got = last.at(i);
                        (got[0] - want[0]).abs().max((got[1] - want[1]).abs())
                    })
                    .fold(0.0, f64::max)
            })
            .collect();
        for w in errs.windows(2) {
            let rate = (w[0] / w[1]).log2();
            assert!((rate - 1.0).abs() <= 0.2, "errors {errs:?}");
        }
    }
}
