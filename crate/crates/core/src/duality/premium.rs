use crate::claim::ClaimSpec;
use crate::driver::DriverSpec;
use crate::error::{invalid, Result};
use crate::scalar::Scalar;
use crate::tree::{tree_solve_frozen, TreeMeasure, TreeModel, TreeSolution};

/// Guard below which the difference quotient is replaced by zero.
pub const PREMIUM_DZ_GUARD: f64 = 1e-12;

/// Kernel `q = (g(Z_long) - g(Z_short)) / (Z_long - Z_short)` on `[s, u)`, with the
/// short profile extended by zero past its horizon.
///
/// `g` is the long-horizon generator; both solutions must start at or before `s` and
/// share its frozen first argument when `g` is a Volterra generator.
pub fn build_premium_measure<S: Scalar>(
    tree: &TreeModel<S>,
    long: &TreeSolution<S>,
    short: &TreeSolution<S>,
    g: &DriverSpec<S>,
    s: S,
) -> Result<TreeMeasure<S>> {
    let si = tree.level(s)?;
    if long.start_level > si || short.start_level > si {
        return invalid("solutions must cover the evaluation level");
    }
    if g.is_family() {
        return invalid("pass the long-horizon member, not the family");
    }
    let u = long.horizon_level;
    let tf = long.frozen_level.map(|i| tree.time(i));
    let guard = S::lit(PREMIUM_DZ_GUARD);
    TreeMeasure::from_fn(tree, si, u, |k, j, _| {
        let zl = long.z_at(k, j);
        let zs = if k < short.horizon_level { short.z_at(k, j) } else { S::zero() };
        let dz = zl - zs;
        if dz.abs() < guard {
            return S::zero();
        }
        let tk = tree.time(k);
        let t = tf.unwrap_or(tk);
        (g.g(t, tk, S::zero(), &[zl]) - g.g(t, tk, S::zero(), &[zs])) / dz
    })
}

/// Both sides of the premium decomposition on the level-`s` nodes:
/// `gamma = rho_su(X) - rho_st(X)` and
/// `E_Q[ sum_{[t,u)} g_u(v, 0) dt + sum_{[s,t)} (g_u - g_t)(v, Z^t_v) dt | F_s ]`
/// under the premium measure.
#[derive(Debug, Clone)]
pub struct PremiumIdentity<S> {
    pub gamma: Vec<S>,
    pub premium: Vec<S>,
    pub measure: TreeMeasure<S>,
}

/// Evaluates the premium decomposition for an `F_t`-measurable claim.
pub fn premium_identity<S: Scalar>(tree: &TreeModel<S>, d: &DriverSpec<S>, c: &ClaimSpec<S>, s: S, t: S, u: S) -> Result<PremiumIdentity<S>> {
    let (si, ti, ui) = (tree.level(s)?, tree.level(t)?, tree.level(u)?);
    if !(si <= ti && ti <= ui) {
        return invalid("need s <= t <= u");
    }
    let c = if let crate::claim::ClaimKind::Constant(v) = c.kind { ClaimSpec::constant(v, t) } else { c.clone() };
    if c.validate(tree.grid())? > ti {
        return invalid("claim must be measurable at t");
    }
    let (gu, gt) = (d.member(u)?, d.member(t)?);
    let long = tree_solve_frozen(tree, gu, &c, u, s)?;
    let short = tree_solve_frozen(tree, gt, &c, t, s)?;
    let measure = build_premium_measure(tree, &long, &short, gu, s)?;
    let tf = |k: usize| if gu.is_volterra() { tree.time(si) } else { tree.time(k) };
    let dt = tree.dt();
    // Running premium accumulated backward under Q.
    let mut acc = vec![S::zero(); ui + 1];
    for k in (si..ui).rev() {
        let tk = tree.time(k);
        acc = (0..=k)
            .map(|j| {
                let inc = if k >= ti {
                    gu.g(tf(k), tk, S::zero(), &[S::zero()])
                } else {
                    let z = short.z_at(k, j);
                    gu.g(tf(k), tk, S::zero(), &[z]) - gt.g(tf(k), tk, S::zero(), &[z])
                };
                let p = measure.up_prob(k, j);
                inc * dt + p * acc[j + 1] + (S::one() - p) * acc[j]
            })
            .collect();
    }
    let gamma = long.y_at(si).iter().zip(short.y_at(si)).map(|(&a, &b)| a - b).collect();
    Ok(PremiumIdentity { gamma, premium: acc, measure })
}
