use std::collections::VecDeque;

/// Source of boundary values `(u1(t), u2(t))` for the solvers.
pub trait BoundaryTrace {
    /// `None` when the trace holds no value for `t`.
    fn value(&self, t: f64) -> Option<[f64; 2]>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroInput;

impl BoundaryTrace for ZeroInput {
    fn value(&self, _t: f64) -> Option<[f64; 2]> {
        Some([0.0, 0.0])
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ConstantInput(pub [f64; 2]);

impl BoundaryTrace for ConstantInput {
    fn value(&self, _t: f64) -> Option<[f64; 2]> {
        Some(self.0)
    }
}

/// Boundary trace given by a closure of time.
pub struct FnInput<F>(pub F);

impl<F: Fn(f64) -> [f64; 2]> BoundaryTrace for FnInput<F> {
    fn value(&self, t: f64) -> Option<[f64; 2]> {
        Some((self.0)(t))
    }
}

impl<T: BoundaryTrace + ?Sized> BoundaryTrace for &T {
    fn value(&self, t: f64) -> Option<[f64; 2]> {
        (**self).value(t)
    }
}

/// Sliding window of boundary pairs sampled at `t = k·dt`.
///
/// Holds at least `ceil(window/dt) + 1` samples; older samples are dropped
/// as new ones arrive. Lookups at step-aligned times return the stored value
/// exactly, lookups between samples interpolate linearly.
#[derive(Debug, Clone)]
pub struct InputHistory {
    dt: f64,
    capacity: usize,
    first_step: usize,
    samples: VecDeque<[f64; 2]>,
}

const ALIGN_TOL: f64 = 1e-9;

impl InputHistory {
    pub fn new(dt: f64, window: f64) -> Self {
        assert!(dt > 0.0, "history step must be positive");
        let capacity = (window / dt - ALIGN_TOL).ceil().max(0.0) as usize + 1;
        Self {
            dt,
            capacity,
            first_step: 0,
            samples: VecDeque::with_capacity(capacity),
        }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Append the sample for time `step·dt`. Steps must arrive consecutively;
    /// the first push fixes the starting step.
    pub fn push(&mut self, step: usize, value: [f64; 2]) {
        if self.samples.is_empty() {
            self.first_step = step;
        } else {
            assert_eq!(
                step,
                self.first_step + self.samples.len(),
                "history steps must be consecutive"
            );
        }
        if self.samples.len() == self.capacity {
            self.samples.pop_front();
            self.first_step += 1;
        }
        self.samples.push_back(value);
    }

    pub fn oldest_step(&self) -> Option<usize> {
        (!self.samples.is_empty()).then_some(self.first_step)
    }

    pub fn newest_step(&self) -> Option<usize> {
        (!self.samples.is_empty()).then(|| self.first_step + self.samples.len() - 1)
    }

    pub fn oldest_t(&self) -> Option<f64> {
        self.oldest_step().map(|k| k as f64 * self.dt)
    }

    pub fn newest_t(&self) -> Option<f64> {
        self.newest_step().map(|k| k as f64 * self.dt)
    }

    pub fn at_step(&self, step: usize) -> Option<[f64; 2]> {
        step.checked_sub(self.first_step)
            .and_then(|i| self.samples.get(i))
            .copied()
    }

    pub fn lookup(&self, t: f64) -> Option<[f64; 2]> {
        let pos = t / self.dt;
        let nearest = pos.round();
        if nearest < 0.0 {
            return None;
        }
        if (pos - nearest).abs() <= ALIGN_TOL {
            return self.at_step(nearest as usize);
        }
        let lo = pos.floor();
        if lo < 0.0 {
            return None;
        }
        let a = self.at_step(lo as usize)?;
        let b = self.at_step(lo as usize + 1)?;
        let w = pos - lo;
        Some([a[0] + w * (b[0] - a[0]), a[1] + w * (b[1] - a[1])])
    }
}

impl BoundaryTrace for InputHistory {
    fn value(&self, t: f64) -> Option<[f64; 2]> {
        self.lookup(t)
    }
}
