use super::{TreeMeasure, TreeModel};
use crate::claim::{ClaimKind, ClaimSpec};
use crate::driver::DriverSpec;
use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, Default)]
pub struct DualOptions {
    /// One Newton step on the grid argmax for generators with a smooth conjugate.
    pub newton_refine: bool,
}

#[derive(Debug, Clone)]
pub struct TreeDual<S> {
    /// Dual value on the level-`s` nodes.
    pub values: Vec<S>,
    /// Maximising kernel on `[s, t)`.
    pub argmax: TreeMeasure<S>,
}

/// `sup_Q { E_Q[-X | F_s] - alpha_{st}(Q) }` over kernels taking values in `q_grid`,
/// solved by dynamic programming: at every node the maximiser of
/// `E_Q[V(k+1)] - g*(q) dt` is selected (ties go to the lowest grid index).
///
/// The result never exceeds the primal value.
pub fn tree_dual_sup<S: Scalar>(
    tree: &TreeModel<S>,
    d: &DriverSpec<S>,
    c: &ClaimSpec<S>,
    s: S,
    t: S,
    q_grid: &[S],
    opts: DualOptions,
) -> Result<TreeDual<S>> {
    if q_grid.is_empty() {
        return invalid("q grid is empty");
    }
    let bound = tree.q_bound();
    if let Some(&q) = q_grid.iter().find(|q| !q.is_finite() || q.abs() >= bound) {
        return Err(Error::Positivity { level: 0, node: 0, q: q.as_f64() });
    }
    let (si, ti) = (tree.level(s)?, tree.level(t)?);
    if si > ti {
        return invalid("dual needs s <= t");
    }
    let g = d.member(t)?;
    let mut cu = c.validate(tree.grid())?;
    if matches!(c.kind, ClaimKind::Constant(_)) {
        cu = ti;
    }
    if cu > ti || cu < si {
        return invalid("claim must be measurable between s and t");
    }
    let ts = tree.time(si);
    let dt = tree.dt();
    let sq = tree.sqrt_dt();

    // Deterministic segment [cu, t]: only Z = 0 matters.
    let mut offset = S::zero();
    let mut tail_q = vec![S::zero(); ti];
    for k in (cu..ti).rev() {
        let tk = tree.time(k);
        let mut best = S::neg_infinity();
        for &q in q_grid {
            let v = -g.conjugate(ts, tk, &[q])?;
            if v > best {
                best = v;
                tail_q[k] = q;
            }
        }
        offset = offset + best * dt;
    }

    let mut choice: Vec<Vec<S>> = vec![Vec::new(); tree.steps()];
    let mut next: Vec<S> = (0..=cu)
        .map(|j| {
            let x = match &c.kind {
                ClaimKind::Constant(v) => Some(*v),
                ClaimKind::NodeValues { values, .. } => values.get(j).copied(),
                _ => c.eval_state(&[tree.b(cu, j)]),
            };
            x.map(|x| offset - x)
                .ok_or_else(|| Error::Unsupported("claim is not representable on the tree".into()))
        })
        .collect::<Result<_>>()?;

    for k in (si..cu).rev() {
        let tk = tree.time(k);
        let mut row = Vec::with_capacity(k + 1);
        let mut qrow = Vec::with_capacity(k + 1);
        for j in 0..=k {
            let (vd, vu) = (next[j], next[j + 1]);
            let obj = |q: S| -> Result<S> {
                let p = (S::one() + q * sq) * S::half();
                let c = g.conjugate(ts, tk, &[q])?;
                Ok(p * vu + (S::one() - p) * vd - c * dt)
            };
            let mut best = S::neg_infinity();
            let mut arg = q_grid[0];
            for &q in q_grid {
                let v = obj(q)?;
                if v > best {
                    best = v;
                    arg = q;
                }
            }
            if opts.newton_refine {
                if let Some((d1, d2)) = g.conjugate_derivatives(ts, tk, arg) {
                    let z = (vu - vd) / (S::two() * sq);
                    let cand = arg + (z - d1) / d2;
                    if cand.is_finite() && cand.abs() < bound * S::lit(1.0 - 1e-9) {
                        let v = obj(cand)?;
                        if v > best {
                            best = v;
                            arg = cand;
                        }
                    }
                }
            }
            row.push(best);
            qrow.push(arg);
        }
        choice[k] = qrow;
        next = row;
    }
    for k in cu.max(si)..ti {
        choice[k] = vec![tail_q[k]; k + 1];
    }
    let argmax = TreeMeasure::from_fn(tree, si, ti, |k, j, _| choice[k][j])?;
    Ok(TreeDual { values: next, argmax })
}
