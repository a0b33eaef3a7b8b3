use rayon::prelude::*;

use super::TreeModel;
use crate::claim::{ClaimKind, ClaimSpec};
use crate::driver::DriverSpec;
use crate::error::{invalid, unsupported, Result};
use crate::scalar::Scalar;

/// Node values of `Y` and `Z` on levels `start..=claim_level`.
///
/// When the claim horizon precedes the solve horizon, the segment between them
/// carries no randomness (`Z = 0`) and is kept as the deterministic offsets `tail`,
/// indexed from `claim_level` to `horizon_level`.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeSolution<S> {
    pub start_level: usize,
    pub claim_level: usize,
    pub horizon_level: usize,
    /// `y[k]` holds the `k + 1` node values of level `k` (empty below `start_level`).
    pub y: Vec<Vec<S>>,
    /// `z[k]` for `k < claim_level`.
    pub z: Vec<Vec<S>>,
    pub tail: Vec<S>,
    /// Frozen first generator argument for single-pass solutions.
    pub frozen_level: Option<usize>,
}

impl<S: Scalar> TreeSolution<S> {
    pub fn y_at(&self, k: usize) -> &[S] {
        &self.y[k]
    }

    /// `Z` at level `k`, zero on the deterministic tail.
    pub fn z_at(&self, k: usize, j: usize) -> S {
        if k < self.claim_level {
            self.z[k][j]
        } else {
            S::zero()
        }
    }

    pub fn root(&self) -> S {
        self.y[self.start_level][0]
    }
}

/// Explicit backward step: `Y(k) = E[Y(k+1)] + g(t, t_k, E[Y(k+1)], Z(k)) dt`.
fn step<S: Scalar>(tree: &TreeModel<S>, g: &DriverSpec<S>, t_frozen: Option<S>, k: usize, next: &[S]) -> (Vec<S>, Vec<S>) {
    let tk = tree.time(k);
    let t = t_frozen.unwrap_or(tk);
    let dt = tree.dt();
    let inv = S::one() / (S::two() * tree.sqrt_dt());
    let mut y = Vec::with_capacity(k + 1);
    let mut z = Vec::with_capacity(k + 1);
    for w in next.windows(2) {
        let e = (w[0] + w[1]) * S::half();
        let zz = (w[1] - w[0]) * inv;
        y.push(e + g.g(t, tk, e, &[zz]) * dt);
        z.push(zz);
    }
    (y, z)
}

/// Deterministic offsets on `[from, to]`: `G(to) = 0`, `G(k) = G(k+1) + g(t, t_k, G(k+1), 0) dt`.
fn tail_offsets<S: Scalar>(tree: &TreeModel<S>, g: &DriverSpec<S>, t_frozen: Option<S>, from: usize, to: usize) -> Vec<S> {
    let mut out = vec![S::zero(); to - from + 1];
    for k in (from..to).rev() {
        let t = t_frozen.unwrap_or(tree.time(k));
        let nxt = out[k + 1 - from];
        out[k - from] = nxt + g.g(t, tree.time(k), nxt, &[S::zero()]) * tree.dt();
    }
    out
}

fn claim_layer<S: Scalar>(tree: &TreeModel<S>, c: &ClaimSpec<S>, level: usize) -> Result<Vec<S>> {
    if let ClaimKind::NodeValues { sqrt_dt, values } = &c.kind {
        if (*sqrt_dt - tree.sqrt_dt()).abs() > S::lit(1e-12) * tree.sqrt_dt() {
            return invalid("node claim was built on a different tree");
        }
        if values.len() != level + 1 {
            return invalid("node claim has the wrong number of values");
        }
        return Ok(values.to_vec());
    }
    if !c.is_markov() {
        return unsupported("path-dependent claims are not representable on a recombining tree");
    }
    if c.dim().is_some_and(|d| d != 1) {
        return invalid("the tree backend is one-dimensional");
    }
    (0..=level)
        .map(|j| {
            c.eval_state(&[tree.b(level, j)])
                .ok_or_else(|| crate::error::Error::InvalidArgument("claim undefined at a tree node".into()))
        })
        .collect()
}

struct Prepared<'a, S: Scalar> {
    g: &'a DriverSpec<S>,
    claim_level: usize,
    horizon_level: usize,
    layer: Vec<S>,
}

fn prepare<'a, S: Scalar>(tree: &TreeModel<S>, d: &'a DriverSpec<S>, c: &ClaimSpec<S>, horizon: S) -> Result<Prepared<'a, S>> {
    d.validate()?;
    if d.dim().is_some_and(|n| n != 1) {
        return invalid("the tree backend is one-dimensional");
    }
    let h = tree.level(horizon)?;
    let g = d.member(horizon)?;
    let mut cu = c.validate(tree.grid())?;
    // Constants are measurable at any time; pin them to the solve horizon.
    if matches!(c.kind, ClaimKind::Constant(_)) {
        cu = h;
    }
    if cu > h {
        return invalid("claim horizon exceeds the solve horizon");
    }
    if g.supports_y() && cu < h {
        return unsupported("y-dependent generators need the claim horizon to equal the solve horizon");
    }
    let layer = match c.kind {
        ClaimKind::Constant(v) => vec![v; cu + 1],
        _ => claim_layer(tree, c, cu)?,
    };
    Ok(Prepared { g, claim_level: cu, horizon_level: h, layer })
}

/// One backward pass with terminal layer `terminal` (the values of `Y`, not of `X`)
/// at `level`, down to `stop`.
fn pass<S: Scalar>(
    tree: &TreeModel<S>,
    g: &DriverSpec<S>,
    t_frozen: Option<S>,
    terminal: Vec<S>,
    level: usize,
    stop: usize,
) -> (Vec<Vec<S>>, Vec<Vec<S>>) {
    let mut y = vec![Vec::new(); level + 1];
    let mut z = vec![Vec::new(); level];
    y[level] = terminal;
    for k in (stop..level).rev() {
        let (yk, zk) = step(tree, g, t_frozen, k, &y[k + 1]);
        y[k] = yk;
        z[k] = zk;
    }
    (y, z)
}

/// `rho_{t_k, horizon}(X)` on every node up to the claim level.
///
/// Generators depending on the frozen first argument run one pass per evaluation level.
pub fn tree_solve<S: Scalar>(tree: &TreeModel<S>, d: &DriverSpec<S>, c: &ClaimSpec<S>, horizon: S) -> Result<TreeSolution<S>> {
    let p = prepare(tree, d, c, horizon)?;
    let (cu, h) = (p.claim_level, p.horizon_level);
    if !p.g.is_volterra() {
        let tail = tail_offsets(tree, p.g, None, cu, h);
        let terminal = p.layer.iter().map(|&x| tail[0] - x).collect();
        let (y, z) = pass(tree, p.g, None, terminal, cu, 0);
        return Ok(TreeSolution { start_level: 0, claim_level: cu, horizon_level: h, y, z, tail, frozen_level: None });
    }
    let rows: Vec<(Vec<S>, Vec<S>)> = (0..=cu)
        .into_par_iter()
        .map(|i| {
            let t = Some(tree.time(i));
            let tail = tail_offsets(tree, p.g, t, cu, h);
            let terminal = p.layer.iter().map(|&x| tail[0] - x).collect();
            let (mut y, mut z) = pass(tree, p.g, t, terminal, cu, i);
            let zi = if i < cu { std::mem::take(&mut z[i]) } else { Vec::new() };
            (std::mem::take(&mut y[i]), zi)
        })
        .collect();
    let (y, mut z): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
    z.truncate(cu);
    Ok(TreeSolution { start_level: 0, claim_level: cu, horizon_level: h, y, z, tail: Vec::new(), frozen_level: None })
}

/// Single pass with the first generator argument frozen at `t_eval`, covering
/// levels `eval..=claim_level`. For non-Volterra generators this is the usual
/// solution restricted to those levels.
pub fn tree_solve_frozen<S: Scalar>(
    tree: &TreeModel<S>,
    d: &DriverSpec<S>,
    c: &ClaimSpec<S>,
    horizon: S,
    t_eval: S,
) -> Result<TreeSolution<S>> {
    let p = prepare(tree, d, c, horizon)?;
    let (cu, h) = (p.claim_level, p.horizon_level);
    let i = tree.level(t_eval)?;
    if i > cu {
        return invalid("evaluation level is past the claim horizon");
    }
    let t = if p.g.is_volterra() { Some(tree.time(i)) } else { None };
    let tail = tail_offsets(tree, p.g, t, cu, h);
    let terminal = p.layer.iter().map(|&x| tail[0] - x).collect();
    let (y, z) = pass(tree, p.g, t, terminal, cu, i);
    Ok(TreeSolution { start_level: i, claim_level: cu, horizon_level: h, y, z, tail, frozen_level: Some(i) })
}

/// `rho_{s, horizon}(X)` on the level-`s` nodes.
pub fn tree_rho<S: Scalar>(tree: &TreeModel<S>, d: &DriverSpec<S>, c: &ClaimSpec<S>, s: S, horizon: S) -> Result<Vec<S>> {
    let sol = tree_solve_frozen(tree, d, c, horizon, s)?;
    Ok(sol.y[sol.start_level].clone())
}

/// Solves `Y = xi + int g ds - int Z dB` with terminal values `xi` given directly on
/// the nodes of level `horizon` (no sign flip). Used for comparison experiments.
pub fn tree_solve_terminal<S: Scalar>(tree: &TreeModel<S>, g: &DriverSpec<S>, xi: &[S], horizon: S) -> Result<TreeSolution<S>> {
    let h = tree.level(horizon)?;
    if xi.len() != h + 1 {
        return invalid("terminal layer has the wrong number of nodes");
    }
    if g.is_family() || g.is_volterra() {
        return unsupported("terminal solves take a single non-Volterra generator");
    }
    let (y, z) = pass(tree, g, None, xi.to_vec(), h, 0);
    Ok(TreeSolution { start_level: 0, claim_level: h, horizon_level: h, y, z, tail: vec![S::zero()], frozen_level: None })
}
