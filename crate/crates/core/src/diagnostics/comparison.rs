use super::report::{ConsistencyReport, Property, ReportRow};
use crate::claim::{ClaimKind, ClaimSpec};
use crate::driver::DriverSpec;
use crate::error::{invalid, Error, Result};
use crate::query::BackendTag;
use crate::scalar::Scalar;
use crate::tree::{tree_solve_terminal, TreeModel};

/// Sampled hypotheses of the horizon comparison; each field is a worst signed
/// excess, so `<= 0` means the hypothesis held on the sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonHypotheses<S> {
    /// `max (g1 - g2)` on `[0, T1)`.
    pub driver_order: S,
    /// `max (-g2)` on `[T1, T2)`.
    pub tail_sign: S,
    /// `max (xi1 - xi2)` over every path through the tree.
    pub terminal_order: S,
}

impl<S: Scalar> ComparisonHypotheses<S> {
    pub fn hold(&self, tol: S) -> bool {
        self.driver_order <= tol && self.tail_sign <= tol && self.terminal_order <= tol
    }
}

fn layer<S: Scalar>(tree: &TreeModel<S>, c: &ClaimSpec<S>) -> Result<(usize, Vec<S>)> {
    let k = c.validate(tree.grid())?;
    let v = match &c.kind {
        ClaimKind::Constant(v) => vec![*v; k + 1],
        ClaimKind::NodeValues { values, .. } => values.to_vec(),
        _ => (0..=k)
            .map(|j| c.eval_state(&[tree.b(k, j)]).ok_or_else(|| Error::Unsupported("claim is not representable on the tree".into())))
            .collect::<Result<_>>()?,
    };
    Ok((k, v))
}

/// Checks the hypotheses on the grid times and a `(y, z)` lattice.
pub fn comparison_hypotheses<S: Scalar>(
    tree: &TreeModel<S>,
    d1: &DriverSpec<S>,
    d2: &DriverSpec<S>,
    xi1: &ClaimSpec<S>,
    xi2: &ClaimSpec<S>,
    lattice: &[S],
) -> Result<ComparisonHypotheses<S>> {
    let (k1, l1) = layer(tree, xi1)?;
    let (k2, l2) = layer(tree, xi2)?;
    let (g1, g2) = (d1.member(xi1.horizon)?, d2.member(xi2.horizon)?);
    let mut h = ComparisonHypotheses { driver_order: S::neg_infinity(), tail_sign: S::neg_infinity(), terminal_order: S::neg_infinity() };
    for k in 0..k2 {
        let tk = tree.time(k);
        for &y in lattice {
            for &z in lattice {
                let v2 = g2.g(tk, tk, y, &[z]);
                if k < k1 {
                    h.driver_order = h.driver_order.max(g1.g(tk, tk, y, &[z]) - v2);
                } else {
                    h.tail_sign = h.tail_sign.max(-v2);
                }
            }
        }
    }
    for (j, &x2) in l2.iter().enumerate() {
        for a in tree.ancestors(k2, j, k1) {
            h.terminal_order = h.terminal_order.max(l1[a] - x2);
        }
    }
    Ok(h)
}

/// Solves `Y^i = xi_i + int g^i ds - int Z dB` on `[0, T_i]` and verifies
/// `Y^2 >= Y^1` on `[0, T1]` and `Y^2_t >= xi_1` on `[T1, T2]` along every path.
///
/// The terminal values `xi_i` enter with their own sign. Row `item` is 0 for the
/// first conclusion and 1 for the second; the hypotheses are reported as notes.
pub fn check_horizon_comparison<S: Scalar>(
    tree: &TreeModel<S>,
    d1: &DriverSpec<S>,
    d2: &DriverSpec<S>,
    xi1: &ClaimSpec<S>,
    xi2: &ClaimSpec<S>,
    tol: S,
) -> Result<ConsistencyReport<S>> {
    let (k1, l1) = layer(tree, xi1)?;
    let (k2, l2) = layer(tree, xi2)?;
    if k1 > k2 {
        return invalid("horizon comparison needs T1 <= T2");
    }
    let (t1, t2) = (tree.time(k1), tree.time(k2));
    let (g1, g2) = (d1.member(t1)?, d2.member(t2)?);
    let y1 = tree_solve_terminal(tree, g1, &l1, t1)?;
    let y2 = tree_solve_terminal(tree, g2, &l2, t2)?;
    let mut rows = Vec::new();
    let mut triples = Vec::new();
    for k in 0..=k1 {
        let v = y1.y[k].iter().zip(&y2.y[k]).map(|(&a, &b)| a - b).fold(S::neg_infinity(), S::max);
        triples.push((tree.time(k), t1, t2));
        rows.push(ReportRow { s: tree.time(k), t: t1, u: t2, item: 0, violation: v, allowance: tol });
    }
    for k in k1..=k2 {
        let mut v = S::neg_infinity();
        for (j, &y) in y2.y[k].iter().enumerate() {
            for a in tree.ancestors(k, j, k1) {
                v = v.max(l1[a] - y);
            }
        }
        triples.push((tree.time(k), t1, t2));
        rows.push(ReportRow { s: tree.time(k), t: t1, u: t2, item: 1, violation: v, allowance: tol });
    }
    let lattice: Vec<S> = (-4..=4).map(|i| S::lit(i as f64 * 0.75)).collect();
    let h = comparison_hypotheses(tree, d1, d2, xi1, xi2, &lattice)?;
    let rep = ConsistencyReport::new(Property::HorizonComparison, BackendTag::Tree, tol, triples, rows);
    Ok(rep.with_note(format!(
        "hypotheses on lattice: driver_order={:e} tail_sign={:e} terminal_order={:e} hold={}",
        h.driver_order,
        h.tail_sign,
        h.terminal_order,
        h.hold(tol)
    )))
}
