use crate::error::{invalid, Result};
use crate::scalar::Scalar;

/// Relative tolerance used to snap a requested time onto a grid point.
pub const GRID_SNAP_TOL: f64 = 1e-9;

/// Strictly increasing time grid `0 = t_0 < ... < t_N = T`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid<S: Scalar> {
    times: Vec<S>,
}

impl<S: Scalar> TimeGrid<S> {
    /// Uniform grid with `n` steps on `[0, horizon]`.
    pub fn uniform(horizon: S, n: usize) -> Result<Self> {
        if n == 0 {
            return invalid("grid needs at least one step");
        }
        if !(horizon > S::zero()) || !horizon.is_finite() {
            return invalid("grid horizon must be positive and finite");
        }
        let ns = S::from_usize_lossy(n);
        let times = (0..=n)
            .map(|k| {
                if k == n {
                    horizon
                } else {
                    horizon * S::from_usize_lossy(k) / ns
                }
            })
            .collect();
        Ok(Self { times })
    }

    pub fn from_times(times: Vec<S>) -> Result<Self> {
        if times.len() < 2 {
            return invalid("grid needs at least two points");
        }
        if times[0] != S::zero() {
            return invalid("grid must start at 0");
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return invalid("grid times must be strictly increasing");
        }
        Ok(Self { times })
    }

    pub fn times(&self) -> &[S] {
        &self.times
    }

    /// Number of steps `N`.
    pub fn steps(&self) -> usize {
        self.times.len() - 1
    }

    pub fn horizon(&self) -> S {
        self.times[self.steps()]
    }

    pub fn time(&self, k: usize) -> S {
        self.times[k]
    }

    pub fn dt(&self, k: usize) -> S {
        self.times[k + 1] - self.times[k]
    }

    pub fn is_uniform(&self) -> bool {
        let h = self.dt(0);
        let tol = S::lit(GRID_SNAP_TOL) * self.horizon();
        (0..self.steps()).all(|k| (self.dt(k) - h).abs() <= tol)
    }

    /// Index of the grid point equal to `t` (within a relative snap tolerance).
    pub fn index_of(&self, t: S) -> Result<usize> {
        let tol = S::lit(GRID_SNAP_TOL) * self.horizon().max(S::one());
        match self
            .times
            .binary_search_by(|x| x.partial_cmp(&t).unwrap_or(std::cmp::Ordering::Less))
        {
            Ok(i) => Ok(i),
            Err(i) => {
                for j in [i.wrapping_sub(1), i] {
                    if j < self.times.len() && (self.times[j] - t).abs() <= tol {
                        return Ok(j);
                    }
                }
                invalid(format!("time {t} is not a grid point"))
            }
        }
    }

    pub fn contains(&self, t: S) -> bool {
        self.index_of(t).is_ok()
    }
}
