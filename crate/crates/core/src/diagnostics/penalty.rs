use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::corpus::ClaimTemplate;
use super::report::{ConsistencyReport, Property, ReportRow};
use super::{triple_levels, Backend};
use crate::claim::ClaimSpec;
use crate::driver::DriverSpec;
use crate::error::{invalid, Result};
use crate::query::BackendTag;
use crate::scalar::{ext_sub, Scalar};
use crate::tree::{tree_dual_sup, tree_pasting, tree_penalty, DualOptions, TreeMeasure, TreeModel};

/// Random measures for penalty relations.
///
/// Even samples use one constant kernel per window, odd samples draw every node
/// independently; kernels are uniform in `[-q_max, q_max]`, clamped into the conjugate
/// domain of the relevant member. `q_grid` approximates
/// the essential infimum of the penalty and the dual maximisers used for the
/// weak-cocycle equality, evaluated on `claims`.
#[derive(Debug, Clone)]
pub struct PenaltySample {
    pub count: usize,
    pub seed: u64,
    pub q_max: f64,
    pub q_grid: Vec<f64>,
    pub claims: Vec<ClaimTemplate>,
}

/// Kernel on levels `[a, b)` drawn uniformly and clamped into the conjugate domain of
/// `g` frozen at level `a`.
#[allow(clippy::too_many_arguments)]
fn random_measure<S: Scalar>(
    tree: &TreeModel<S>,
    g: &DriverSpec<S>,
    rng: &mut ChaCha8Rng,
    a: usize,
    b: usize,
    q_max: f64,
    constant: bool,
) -> Result<TreeMeasure<S>> {
    let c = rng.gen_range(-q_max..=q_max);
    let nodes: Vec<Vec<f64>> = (0..tree.steps()).map(|k| (0..=k).map(|_| rng.gen_range(-q_max..=q_max)).collect()).collect();
    let ta = tree.time(a);
    TreeMeasure::from_fn(tree, a, b, |k, j, _| {
        let q = S::lit(if constant { c } else { nodes[k][j] });
        match g.conjugate_domain(ta, tree.time(k)) {
            Some((lo, hi)) => q.max(lo).min(hi),
            None => q,
        }
    })
}

fn nodes_add<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    a.iter().zip(b).map(|(&x, &y)| x + y).collect()
}

/// Residuals of the penalty relations over sampled pastings `S = Q|_[s,t] . R`:
///
/// * cocycle: `alpha_su(S) = alpha_st(S) + E_S[alpha_tu(S) | F_s]`
/// * sub_penalty: `alpha_su(S) <= alpha_st(S) + E_S[alpha_tu(S) | F_s]`
/// * weak_cocycle: `alpha_su(S) <= alpha_su(Q) + E_Q[alpha_tu(R) - essinf alpha_tu | F_s]`
///   for sampled `Q` on `[s, u]` and `R` on `[t, u]`, plus equality at the dual
///   maximisers for every claim in the sample (the essential infimum is the q-grid minimum).
///
/// `+inf - +inf` counts as zero.
pub fn check_penalty_relations<S: Scalar>(
    kind: Property,
    tree: &TreeModel<S>,
    d: &DriverSpec<S>,
    triples: &[(S, S, S)],
    sample: &PenaltySample,
    tol: S,
) -> Result<ConsistencyReport<S>> {
    if !matches!(kind, Property::Cocycle | Property::WeakCocycle | Property::SubPenalty) {
        return invalid(format!("{kind} is not a penalty relation"));
    }
    if S::lit(sample.q_max) >= tree.q_bound() {
        return invalid("q_max violates the density positivity bound");
    }
    let b = Backend::Tree(tree);
    let q_grid: Vec<S> = sample.q_grid.iter().map(|&q| S::lit(q)).collect();
    let mut rows = Vec::new();
    for (ti_, &tr) in triples.iter().enumerate() {
        let (si, ti, ui) = triple_levels(&b, tr)?;
        let (s, t, u) = tr;
        let row = |item, violation| ReportRow { s, t, u, item, violation, allowance: tol };
        let essinf = if kind == Property::WeakCocycle {
            let zero = ClaimSpec::constant(S::zero(), u);
            Some(tree_dual_sup(tree, d, &zero, t, u, &q_grid, DualOptions::default())?.values.iter().map(|&v| -v).collect::<Vec<S>>())
        } else {
            None
        };
        for m in 0..sample.count {
            let mut rng = ChaCha8Rng::seed_from_u64(sample.seed);
            rng.set_stream(((ti_ as u64) << 20) | m as u64);
            // Q follows the member for u or for t in alternate pairs of samples.
            let q_member = if m % 4 < 2 { d.member(u)? } else { d.member(t)? };
            let q = random_measure(tree, q_member, &mut rng, si, ui, sample.q_max, m % 2 == 0)?;
            let r = random_measure(tree, d.member(u)?, &mut rng, ti, ui, sample.q_max, m % 2 == 0)?;
            let pasted = tree_pasting(&q.restrict(si, ti), &r)?;
            let a_su = tree_penalty(tree, d, &pasted, s, u)?;
            let res: Vec<S> = match kind {
                Property::WeakCocycle => {
                    let a_q = tree_penalty(tree, d, &q, s, u)?;
                    let a_r = tree_penalty(tree, d, &r, t, u)?;
                    let inner: Vec<S> = a_r.iter().zip(essinf.as_ref().unwrap()).map(|(&a, &m)| a - m).collect();
                    let rhs = nodes_add(&a_q, &q.expect(&inner, ti, si));
                    a_su.iter().zip(&rhs).map(|(&x, &y)| ext_sub(x, y)).collect()
                }
                _ => {
                    let a_st = tree_penalty(tree, d, &pasted, s, t)?;
                    let a_tu = tree_penalty(tree, d, &pasted, t, u)?;
                    let rhs = nodes_add(&a_st, &pasted.expect(&a_tu, ti, si));
                    a_su.iter().zip(&rhs).map(|(&x, &y)| ext_sub(x, y)).collect()
                }
            };
            let v = if kind == Property::Cocycle {
                res.iter().fold(S::zero(), |acc, &x| acc.max(x.abs()))
            } else {
                res.iter().copied().fold(S::neg_infinity(), S::max)
            };
            rows.push(row(m, v));
        }
        if kind == Property::WeakCocycle {
            let essinf = essinf.as_ref().unwrap();
            for (ci, tpl) in sample.claims.iter().enumerate() {
                let x = tpl.at(&b, ui)?;
                let inner = tree_dual_sup(tree, d, &x, t, u, &q_grid, DualOptions::default())?;
                let zero_grid: Vec<S> = essinf.iter().map(|&m| -m).collect();
                let w: Vec<S> = zero_grid.iter().zip(&inner.values).map(|(&z, &v)| z - v).collect();
                let wc = ClaimSpec::node_values(w, tree.sqrt_dt(), t);
                let outer = tree_dual_sup(tree, d, &wc, s, u, &q_grid, DualOptions::default())?;
                let (q, r) = (outer.argmax, inner.argmax);
                let pasted = tree_pasting(&q.restrict(si, ti), &r)?;
                let a_su = tree_penalty(tree, d, &pasted, s, u)?;
                let a_q = tree_penalty(tree, d, &q, s, u)?;
                let a_r = tree_penalty(tree, d, &r, t, u)?;
                let inner_pen: Vec<S> = a_r.iter().zip(essinf).map(|(&a, &m)| a - m).collect();
                let rhs = nodes_add(&a_q, &q.expect(&inner_pen, ti, si));
                let v = a_su.iter().zip(&rhs).fold(S::zero(), |acc, (&x, &y)| acc.max(ext_sub(x, y).abs()));
                rows.push(row(sample.count + ci, v));
            }
        }
    }
    let mut rep = ConsistencyReport::new(kind, BackendTag::Tree, tol, triples.to_vec(), rows);
    if kind == Property::WeakCocycle {
        rep = rep.with_note("essential infimum approximated by the q-grid minimum; equality rows start at item index = sample count");
    }
    Ok(rep)
}
