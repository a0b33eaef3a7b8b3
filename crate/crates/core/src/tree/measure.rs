use super::TreeModel;
use crate::driver::DriverSpec;
use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

/// Equivalent measure on the tree through one-step kernels `1 + q(k, j) dB`.
///
/// Under the measure the up-move has probability `(1 + q sqrt(dt)) / 2`, so that
/// `E_Q[dB] = q dt`. Outside `[start, end)` the kernel is one.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeMeasure<S> {
    pub start: usize,
    pub end: usize,
    sqrt_dt: S,
    /// `q[k][j]` for every level `k < steps` (zero outside the window).
    q: Vec<Vec<S>>,
}

impl<S: Scalar> TreeMeasure<S> {
    /// Reference measure on the window `[start, end]`.
    pub fn identity(tree: &TreeModel<S>, start: usize, end: usize) -> Result<Self> {
        Self::from_fn(tree, start, end, |_, _, _| S::zero())
    }

    /// Kernel `q(k, j, B)` on `[start, end)`. Fails when positivity is lost.
    pub fn from_fn(tree: &TreeModel<S>, start: usize, end: usize, f: impl Fn(usize, usize, S) -> S) -> Result<Self> {
        if start > end || end > tree.steps() {
            return invalid("measure window must satisfy start <= end <= N");
        }
        let bound = tree.q_bound();
        let mut q = vec![Vec::new(); tree.steps()];
        for (k, row) in q.iter_mut().enumerate() {
            *row = vec![S::zero(); k + 1];
            if k < start || k >= end {
                continue;
            }
            for (j, v) in row.iter_mut().enumerate() {
                let x = f(k, j, tree.b(k, j));
                if !x.is_finite() || x.abs() >= bound {
                    return Err(Error::Positivity { level: k, node: j, q: x.as_f64() });
                }
                *v = x;
            }
        }
        Ok(Self { start, end, sqrt_dt: tree.sqrt_dt(), q })
    }

    pub fn q(&self, k: usize, j: usize) -> S {
        self.q[k][j]
    }

    pub fn up_prob(&self, k: usize, j: usize) -> S {
        (S::one() + self.q[k][j] * self.sqrt_dt) * S::half()
    }

    /// One-step density factor for a move `up` from `(k, j)`.
    pub fn kernel(&self, k: usize, j: usize, up: bool) -> S {
        let db = if up { self.sqrt_dt } else { -self.sqrt_dt };
        S::one() + self.q[k][j] * db
    }

    /// `E_Q[v(level_to) | level_from]` for values on the nodes of `level_to`.
    pub fn expect(&self, values: &[S], level_to: usize, level_from: usize) -> Vec<S> {
        let mut cur = values.to_vec();
        for k in (level_from..level_to).rev() {
            cur = (0..=k)
                .map(|j| {
                    let p = self.up_prob(k, j);
                    p * cur[j + 1] + (S::one() - p) * cur[j]
                })
                .collect();
        }
        cur
    }

    /// Density along a path given as up/down moves from the root.
    pub fn path_density(&self, moves: &[bool]) -> S {
        let mut j = 0;
        let mut dens = S::one();
        for (k, &up) in moves.iter().enumerate() {
            dens = dens * self.kernel(k, j, up);
            if up {
                j += 1;
            }
        }
        dens
    }

    /// Windowed kernel with every level outside `[start, end)` reset to one.
    pub fn restrict(&self, start: usize, end: usize) -> Self {
        let mut q = self.q.clone();
        for (k, row) in q.iter_mut().enumerate() {
            if k < start || k >= end {
                row.iter_mut().for_each(|v| *v = S::zero());
            }
        }
        Self { start, end, sqrt_dt: self.sqrt_dt, q }
    }
}

/// Pastes `q_first` on `[s, t]` with `q_second` on `[t, u]` into one measure on `[s, u]`.
///
/// The density of the result is the nodewise product of the two densities.
pub fn tree_pasting<S: Scalar>(q_first: &TreeMeasure<S>, q_second: &TreeMeasure<S>) -> Result<TreeMeasure<S>> {
    if q_first.end != q_second.start {
        return invalid("pasting windows must abut");
    }
    if q_first.q.len() != q_second.q.len() {
        return invalid("pasting measures live on different trees");
    }
    let q = q_first
        .q
        .iter()
        .zip(&q_second.q)
        .enumerate()
        .map(|(k, (a, b))| {
            if k >= q_first.start && k < q_first.end {
                a.clone()
            } else if k >= q_second.start && k < q_second.end {
                b.clone()
            } else {
                vec![S::zero(); k + 1]
            }
        })
        .collect();
    Ok(TreeMeasure { start: q_first.start, end: q_second.end, sqrt_dt: q_first.sqrt_dt, q })
}

/// Minimal penalty `alpha_{st}(Q) = E_Q[ sum_{k in [s, t)} g*(t_s, t_k, q_k) dt | F_s ]` on the level-`s` nodes.
///
/// Uses the member for horizon `t` and the first generator argument frozen at `t_s`.
/// A reachable out-of-domain kernel makes the penalty `+inf`.
pub fn tree_penalty<S: Scalar>(tree: &TreeModel<S>, d: &DriverSpec<S>, m: &TreeMeasure<S>, s: S, t: S) -> Result<Vec<S>> {
    let (si, ti) = (tree.level(s)?, tree.level(t)?);
    if si > ti {
        return invalid("penalty needs s <= t");
    }
    let g = d.member(t)?;
    let ts = tree.time(si);
    let mut acc = vec![S::zero(); ti + 1];
    for k in (si..ti).rev() {
        let tk = tree.time(k);
        let mut row = Vec::with_capacity(k + 1);
        for j in 0..=k {
            let c = g.conjugate(ts, tk, &[m.q(k, j)])?;
            let p = m.up_prob(k, j);
            let e = p * acc[j + 1] + (S::one() - p) * acc[j];
            row.push(if c == S::infinity() || e == S::infinity() { S::infinity() } else { c * tree.dt() + e });
        }
        acc = row;
    }
    Ok(acc)
}
