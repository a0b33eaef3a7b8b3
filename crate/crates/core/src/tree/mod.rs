//! Recombining binomial tree in dimension one.
//!
//! Node `(k, j)` sits at time `t_k` with `B = (2j - k) sqrt(dt)`; each step moves
//! by `+/- sqrt(dt)` with probability one half.
//!
//! The explicit step `Y_k = E[Y_{k+1}] + g(Z_k) dt` is monotone in the terminal
//! values while `|dg/dz| sqrt(dt) <= 1` along the solution; quadratic generators
//! with steep claims on coarse trees can leave that regime.

mod dual;
mod measure;
mod solve;

pub use dual::{tree_dual_sup, DualOptions, TreeDual};
pub use measure::{tree_pasting, tree_penalty, TreeMeasure};
pub use solve::{tree_rho, tree_solve, tree_solve_frozen, tree_solve_terminal, TreeSolution};

use crate::error::{invalid, Result};
use crate::grid::TimeGrid;
use crate::scalar::Scalar;

/// Largest supported number of tree steps.
pub const MAX_TREE_STEPS: usize = 20_000;

#[derive(Debug, Clone)]
pub struct TreeModel<S: Scalar> {
    grid: TimeGrid<S>,
    dt: S,
    sqrt_dt: S,
}

impl<S: Scalar> TreeModel<S> {
    pub fn new(grid: TimeGrid<S>) -> Result<Self> {
        if !grid.is_uniform() {
            return invalid("the binomial tree needs a uniform grid");
        }
        if grid.steps() > MAX_TREE_STEPS {
            return Err(crate::error::Error::Capacity(format!(
                "{} tree steps exceed the limit of {MAX_TREE_STEPS}",
                grid.steps()
            )));
        }
        let dt = grid.dt(0);
        Ok(Self { grid, dt, sqrt_dt: dt.sqrt() })
    }

    pub fn uniform(horizon: S, steps: usize) -> Result<Self> {
        Self::new(TimeGrid::uniform(horizon, steps)?)
    }

    pub fn grid(&self) -> &TimeGrid<S> {
        &self.grid
    }

    pub fn steps(&self) -> usize {
        self.grid.steps()
    }

    pub fn dt(&self) -> S {
        self.dt
    }

    pub fn sqrt_dt(&self) -> S {
        self.sqrt_dt
    }

    pub fn time(&self, k: usize) -> S {
        self.grid.time(k)
    }

    pub fn level(&self, t: S) -> Result<usize> {
        self.grid.index_of(t)
    }

    /// Brownian value at node `(k, j)`.
    pub fn b(&self, k: usize, j: usize) -> S {
        (S::from_usize_lossy(2 * j) - S::from_usize_lossy(k)) * self.sqrt_dt
    }

    /// Largest `|q|` a one-step kernel `1 + q dB` admits while staying positive.
    pub fn q_bound(&self) -> S {
        S::one() / self.sqrt_dt
    }

    /// Indices of the level-`a` ancestors of node `(k, j)`, `a <= k`.
    pub fn ancestors(&self, k: usize, j: usize, a: usize) -> std::ops::RangeInclusive<usize> {
        let back = k - a;
        j.saturating_sub(back)..=j.min(a)
    }

    /// Plain expectation `E[v(k+1) | (k, j)]` for every node on level `k`.
    pub fn expect_step(&self, next: &[S]) -> Vec<S> {
        next.windows(2).map(|w| (w[0] + w[1]) * S::half()).collect()
    }
}
