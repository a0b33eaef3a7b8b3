use super::corpus::ClaimTemplate;
use super::report::{ConsistencyReport, Property, ReportRow};
use super::{compare, rho, triple_levels, Backend, LevelValue, Pos};
use crate::claim::ClaimSpec;
use crate::driver::DriverSpec;
use crate::error::{invalid, Result};
use crate::scalar::Scalar;

fn usable<'c, S: Scalar>(b: &Backend<'_, S>, claims: &'c [ClaimTemplate]) -> Vec<(usize, &'c ClaimTemplate)> {
    claims
        .iter()
        .enumerate()
        .filter(|(_, c)| matches!(b, Backend::Tree(_)) || !c.is_tree_only())
        .collect()
}

fn zero_claim<S: Scalar>(b: &Backend<'_, S>, level: usize) -> ClaimSpec<S> {
    ClaimSpec::constant(S::zero(), b.time(level))
}

fn diff_values<S: Scalar>(a: &LevelValue<S>, c: &LevelValue<S>) -> Vec<S> {
    a.values.iter().zip(&c.values).map(|(&x, &y)| x - y).collect()
}

/// Time-consistency family and horizon longevity over claims and triples.
///
/// * strong: `rho_st(-rho_tu(X)) = rho_su(X)`
/// * weak: `rho_su(rho_tu(0) - rho_tu(X)) = rho_su(X)`
/// * order: canonical witness `Y = rho_tu(0) - rho_tu(X)`; checks `rho_tu(Y) = rho_tu(X)` and `rho_su(Y) = rho_su(X)`
/// * sub: `rho_st(-rho_tu(X)) <= rho_su(X)`
/// * h-longevity: `rho_st(X) <= rho_su(X)` for `X` measurable at `t`
///
/// Claims are placed at `u` (at `t` for h-longevity).
pub fn check_time_consistency<S: Scalar>(
    kind: Property,
    b: &Backend<'_, S>,
    d: &DriverSpec<S>,
    claims: &[ClaimTemplate],
    triples: &[(S, S, S)],
    tol: S,
) -> Result<ConsistencyReport<S>> {
    if !matches!(kind, Property::StrongTc | Property::WeakTc | Property::OrderTc | Property::SubTc | Property::HLongevity) {
        return invalid(format!("{kind} is not a time-consistency property"));
    }
    let mut rows = Vec::new();
    for &tr in triples {
        let (si, ti, ui) = triple_levels(b, tr)?;
        for (ci, tpl) in usable(b, claims) {
            let row = |violation: S, widen: S| ReportRow { s: tr.0, t: tr.1, u: tr.2, item: ci, violation, allowance: tol + widen };
            if kind == Property::HLongevity {
                let x = tpl.at(b, ti)?;
                let short = rho(b, d, &Pos::Claim(&x), si, ti)?;
                let long = rho(b, d, &Pos::Claim(&x), si, ui)?;
                let (_, signed, w) = compare(b, &short, &long);
                rows.push(row(signed, w));
                continue;
            }
            let x = tpl.at(b, ui)?;
            let inner = rho(b, d, &Pos::Claim(&x), ti, ui)?;
            let direct = rho(b, d, &Pos::Claim(&x), si, ui)?;
            match kind {
                Property::StrongTc | Property::SubTc => {
                    let lhs = rho(b, d, &Pos::Values { level: ti, values: inner.neg() }, si, ti)?;
                    let (abs, signed, w) = compare(b, &lhs, &direct);
                    rows.push(row(if kind == Property::StrongTc { abs } else { signed }, w));
                }
                _ => {
                    let zero = rho(b, d, &Pos::Claim(&zero_claim(b, ui)), ti, ui)?;
                    let witness = diff_values(&zero, &inner);
                    let lhs = rho(b, d, &Pos::Values { level: ti, values: witness.clone() }, si, ui)?;
                    let (abs, _, w) = compare(b, &lhs, &direct);
                    if kind == Property::WeakTc {
                        rows.push(row(abs, w));
                    } else {
                        let premise = rho(b, d, &Pos::Values { level: ti, values: witness }, ti, ui)?;
                        let (abs0, _, w0) = compare(b, &premise, &inner);
                        rows.push(row(abs.max(abs0), w.max(w0)));
                    }
                }
            }
        }
    }
    let mut rep = ConsistencyReport::new(kind, b.tag(), tol, triples.to_vec(), rows);
    if kind == Property::OrderTc {
        rep = rep.with_note(Property::OrderTc.label());
    }
    Ok(rep)
}

/// Restriction `rho_st(X) = rho_su(X)` for `X` measurable at `t` (every `s <= t` on the
/// tree, `s = 0` on Monte Carlo), or normalization `rho_tu(0) = 0`, over pairs `(t, u)`.
pub fn check_structure<S: Scalar>(
    kind: Property,
    b: &Backend<'_, S>,
    d: &DriverSpec<S>,
    claims: &[ClaimTemplate],
    pairs: &[(S, S)],
    tol: S,
) -> Result<ConsistencyReport<S>> {
    let mut rows = Vec::new();
    let mut triples = Vec::new();
    for &(t, u) in pairs {
        let (ti, ui) = (b.level(t)?, b.level(u)?);
        if ti > ui {
            return invalid("pairs need t <= u");
        }
        match kind {
            Property::Normalization => {
                let z = rho(b, d, &Pos::Claim(&zero_claim(b, ui)), ti, ui)?;
                let (v, w) = match b {
                    Backend::Tree(_) => (z.values.iter().fold(S::zero(), |m, &x| m.max(x.abs())), S::zero()),
                    Backend::Mc(..) => (z.estimate().abs(), S::lit(super::MC_SE_MULT) * z.stderr),
                };
                triples.push((t, t, u));
                rows.push(ReportRow { s: t, t, u, item: 0, violation: v, allowance: tol + w });
            }
            Property::Restriction => {
                let s_levels: Vec<usize> = match b {
                    Backend::Tree(_) => (0..=ti).collect(),
                    Backend::Mc(..) => vec![0],
                };
                for si in s_levels {
                    let s = b.time(si);
                    triples.push((s, t, u));
                    for (ci, tpl) in usable(b, claims) {
                        let x = tpl.at(b, ti)?;
                        let short = rho(b, d, &Pos::Claim(&x), si, ti)?;
                        let long = rho(b, d, &Pos::Claim(&x), si, ui)?;
                        let (abs, _, w) = compare(b, &short, &long);
                        rows.push(ReportRow { s, t, u, item: ci, violation: abs, allowance: tol + w });
                    }
                }
            }
            _ => return invalid(format!("{kind} is not a structural property")),
        }
    }
    Ok(ConsistencyReport::new(kind, b.tag(), tol, triples, rows))
}

/// Sampled check of `A_su ∩ L(F_t) ⊆ A_st`: for every claim measurable at `t`, the
/// memberships `rho_su(X) <= 0` and `rho_st(X) <= 0` (nodewise, within `tol`).
///
/// A row's violation is `max rho_st(X)` when `X` lies in `A_su`, and `-inf` otherwise.
pub fn check_acceptance_inclusion<S: Scalar>(
    b: &Backend<'_, S>,
    d: &DriverSpec<S>,
    claims: &[ClaimTemplate],
    triples: &[(S, S, S)],
    tol: S,
) -> Result<ConsistencyReport<S>> {
    let mut rows = Vec::new();
    let mut flags = Vec::new();
    for &tr in triples {
        let (si, ti, ui) = triple_levels(b, tr)?;
        for (ci, tpl) in usable(b, claims) {
            let x = tpl.at(b, ti)?;
            let long = rho(b, d, &Pos::Claim(&x), si, ui)?;
            let short = rho(b, d, &Pos::Claim(&x), si, ti)?;
            let (in_su, in_st) = (long.max() <= tol, short.max() <= tol);
            flags.push((in_su, in_st));
            let violation = if in_su { short.max() } else { S::neg_infinity() };
            rows.push(ReportRow { s: tr.0, t: tr.1, u: tr.2, item: ci, violation, allowance: tol });
        }
    }
    let mut rep = ConsistencyReport::new(Property::AcceptanceInclusion, b.tag(), tol, triples.to_vec(), rows);
    let coincide = flags.iter().filter(|(a, c)| a == c).count();
    rep.notes.push(format!("memberships coincide on {coincide} of {} rows", flags.len()));
    rep.memberships = flags;
    Ok(rep)
}
