use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::claim::{ClaimSpec, PathRef};
use crate::error::{invalid, Error, Result};
use crate::grid::TimeGrid;
use crate::scalar::Scalar;

/// Paths per random substream.
pub const PATH_BLOCK: usize = 4096;

/// Largest number of stored path values `M * (N + 1) * d`.
pub const MAX_ENSEMBLE_CELLS: usize = 200_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleConfig {
    pub paths: usize,
    pub dim: usize,
    pub seed: u64,
    /// Pair path `2i + 1` with the negated increments of path `2i`.
    pub antithetic: bool,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self { paths: 10_000, dim: 1, seed: 0, antithetic: false }
    }
}

/// Seeded Brownian paths sampled on a grid, stored level-major.
#[derive(Debug, Clone)]
pub struct PathEnsemble<S: Scalar> {
    grid: TimeGrid<S>,
    cfg: EnsembleConfig,
    /// `pos[(k * M + i) * d + c] = B^c_{t_k}` on path `i`.
    pos: Vec<S>,
}

/// Samples `M` Brownian paths on `grid`. Block `b` of [`PATH_BLOCK`] paths draws from
/// ChaCha stream `b` of the seed, so the ensemble does not depend on scheduling.
pub fn simulate_paths<S: Scalar>(grid: &TimeGrid<S>, cfg: EnsembleConfig) -> Result<PathEnsemble<S>> {
    let (m, d, n) = (cfg.paths, cfg.dim, grid.steps());
    if m == 0 || d == 0 {
        return invalid("ensemble needs at least one path and one dimension");
    }
    if cfg.antithetic && m % 2 == 1 {
        return invalid("antithetic sampling needs an even number of paths");
    }
    let cells = m.checked_mul(n + 1).and_then(|x| x.checked_mul(d));
    match cells {
        Some(c) if c <= MAX_ENSEMBLE_CELLS => {}
        _ => return Err(Error::Capacity(format!("{m} paths x {} points x {d} exceed the ensemble limit", n + 1))),
    }
    let sd: Vec<f64> = (0..n).map(|k| grid.dt(k).as_f64().sqrt()).collect();
    let blocks = m.div_ceil(PATH_BLOCK);
    let chunks: Vec<Vec<S>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(b as u64);
            let lo = b * PATH_BLOCK;
            let hi = (lo + PATH_BLOCK).min(m);
            let mut out = vec![S::zero(); (hi - lo) * (n + 1) * d];
            let stride = (n + 1) * d;
            let mut i = lo;
            while i < hi {
                let base = (i - lo) * stride;
                for k in 0..n {
                    for c in 0..d {
                        let x: f64 = StandardNormal.sample(&mut rng);
                        out[base + (k + 1) * d + c] = out[base + k * d + c] + S::lit(x * sd[k]);
                    }
                }
                if cfg.antithetic {
                    let (a, bb) = out.split_at_mut(base + stride);
                    for (dst, src) in bb[..stride].iter_mut().zip(&a[base..]) {
                        *dst = -*src;
                    }
                    i += 2;
                } else {
                    i += 1;
                }
            }
            out
        })
        .collect();
    let mut pos = vec![S::zero(); m * (n + 1) * d];
    for (b, chunk) in chunks.iter().enumerate() {
        let stride = (n + 1) * d;
        for (r, path) in chunk.chunks(stride).enumerate() {
            let i = b * PATH_BLOCK + r;
            for k in 0..=n {
                let dst = (k * m + i) * d;
                pos[dst..dst + d].copy_from_slice(&path[k * d..(k + 1) * d]);
            }
        }
    }
    Ok(PathEnsemble { grid: grid.clone(), cfg, pos })
}

impl<S: Scalar> PathEnsemble<S> {
    pub fn grid(&self) -> &TimeGrid<S> {
        &self.grid
    }

    pub fn config(&self) -> EnsembleConfig {
        self.cfg
    }

    pub fn paths(&self) -> usize {
        self.cfg.paths
    }

    pub fn dim(&self) -> usize {
        self.cfg.dim
    }

    pub fn steps(&self) -> usize {
        self.grid.steps()
    }

    /// All states `B_{t_k}` on level `k`, path-major (`M * d` values).
    pub fn level(&self, k: usize) -> &[S] {
        let w = self.cfg.paths * self.cfg.dim;
        &self.pos[k * w..(k + 1) * w]
    }

    /// `B_{t_k}` on path `i`.
    pub fn state(&self, k: usize, i: usize) -> &[S] {
        let d = self.cfg.dim;
        let at = (k * self.cfg.paths + i) * d;
        &self.pos[at..at + d]
    }

    /// `B_{t_{k+1}} - B_{t_k}` component `c` on path `i`.
    pub fn increment(&self, k: usize, i: usize, c: usize) -> S {
        self.state(k + 1, i)[c] - self.state(k, i)[c]
    }

    /// Copy of path `i` in grid order.
    pub fn path(&self, i: usize) -> Vec<S> {
        (0..=self.steps()).flat_map(|k| self.state(k, i).iter().copied()).collect()
    }

    /// `X` on every path.
    pub fn eval_claim(&self, c: &ClaimSpec<S>) -> Result<Vec<S>> {
        let u = c.validate(&self.grid)?;
        if let Some(d) = c.dim() {
            if d != self.dim() {
                return invalid(format!("claim expects dimension {d}, ensemble has {}", self.dim()));
            }
        }
        if let crate::claim::ClaimKind::NodeValues { .. } = c.kind {
            return Err(Error::Unsupported("node claims live on the tree backend".into()));
        }
        if c.is_markov() {
            (0..self.paths())
                .map(|i| {
                    c.eval_state(self.state(u, i))
                        .ok_or_else(|| Error::Unsupported("claim is not defined on continuous states".into()))
                })
                .collect()
        } else {
            (0..self.paths())
                .map(|i| c.eval(&self.grid, PathRef::new(&self.path(i), self.dim())))
                .collect()
        }
    }
}
