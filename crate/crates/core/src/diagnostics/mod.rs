//! Checkable forms of the structural properties of fully-dynamic risk measures:
//! time-consistency variants, restriction and normalization, horizon longevity,
//! horizon comparison, penalty relations, acceptance sets and driver recovery.
//!
//! Tree verdicts are exact up to floating point and use an absolute tolerance.
//! Monte Carlo verdicts widen the tolerance by three combined standard errors.

mod comparison;
mod consistency;
mod corpus;
mod gamma;
mod penalty;
mod recovery;
mod report;

pub use comparison::{check_horizon_comparison, comparison_hypotheses, ComparisonHypotheses};
pub use consistency::{check_acceptance_inclusion, check_structure, check_time_consistency};
pub use corpus::{all_pairs, all_triples, claim_corpus, ClaimTemplate};
pub use gamma::{gamma_surface, zero_section_integral, GammaReport, GammaRow};
pub use penalty::{check_penalty_relations, PenaltySample};
pub use recovery::{recover_driver, RecoveryReport, RecoveryRow};
pub use report::{ConsistencyReport, Property, ReportRow, Verdict};

use crate::claim::{ClaimKind, ClaimSpec};
use crate::driver::DriverSpec;
use crate::error::{invalid, Result};
use crate::grid::TimeGrid;
use crate::mc::{mc_solve_bsde, mc_solve_values, mean_stderr, PathEnsemble, SolverConfig};
use crate::query::BackendTag;
use crate::scalar::Scalar;
use crate::tree::{tree_rho, TreeModel};

/// Default absolute tolerance for tree verdicts.
pub const TREE_TOL: f64 = 1e-9;

/// Standard-error multiplier for Monte Carlo verdicts.
pub const MC_SE_MULT: f64 = 3.0;

/// Numerical backend a diagnostic runs on.
#[derive(Clone, Copy)]
pub enum Backend<'a, S: Scalar> {
    Tree(&'a TreeModel<S>),
    Mc(&'a PathEnsemble<S>, SolverConfig<S>),
}

impl<'a, S: Scalar> Backend<'a, S> {
    pub fn grid(&self) -> &'a TimeGrid<S> {
        match self {
            Backend::Tree(t) => t.grid(),
            Backend::Mc(e, _) => e.grid(),
        }
    }

    pub fn tag(&self) -> BackendTag {
        match self {
            Backend::Tree(_) => BackendTag::Tree,
            Backend::Mc(..) => BackendTag::Mc,
        }
    }

    pub fn level(&self, t: S) -> Result<usize> {
        self.grid().index_of(t)
    }

    pub fn time(&self, k: usize) -> S {
        self.grid().time(k)
    }
}

/// A position handed to the evaluator: a claim, or values on a level
/// (tree nodes or ensemble paths) produced by an inner evaluation.
#[derive(Clone)]
pub(crate) enum Pos<'c, S: Scalar> {
    Claim(&'c ClaimSpec<S>),
    Values { level: usize, values: Vec<S> },
}

/// `rho_{s, u}` on a level: node values (tree) or path values (MC).
#[derive(Clone, Debug)]
pub(crate) struct LevelValue<S> {
    pub values: Vec<S>,
    pub pathwise: Option<Vec<S>>,
    pub stderr: S,
}

impl<S: Scalar> LevelValue<S> {
    pub fn estimate(&self) -> S {
        self.values.iter().copied().sum::<S>() / S::from_usize_lossy(self.values.len())
    }

    pub fn max(&self) -> S {
        self.values.iter().copied().fold(S::neg_infinity(), S::max)
    }

    pub fn neg(&self) -> Vec<S> {
        self.values.iter().map(|&v| -v).collect()
    }
}

/// Difference `a - b` summarised as (max |a - b|, max (a - b), allowance widening).
///
/// Tree: nodewise. MC: difference of path means with the standard error of the
/// pathwise difference (common random numbers).
pub(crate) fn compare<S: Scalar>(b: &Backend<'_, S>, x: &LevelValue<S>, y: &LevelValue<S>) -> (S, S, S) {
    match b {
        Backend::Tree(_) => {
            let mut abs = S::zero();
            let mut signed = S::neg_infinity();
            for (&p, &q) in x.values.iter().zip(&y.values) {
                let d = crate::scalar::ext_sub(p, q);
                abs = abs.max(d.abs());
                signed = signed.max(d);
            }
            (abs, signed, S::zero())
        }
        Backend::Mc(e, _) => {
            let d = x.estimate() - y.estimate();
            let se = match (&x.pathwise, &y.pathwise) {
                (Some(p), Some(q)) => {
                    let diff: Vec<S> = p.iter().zip(q).map(|(&a, &b)| a - b).collect();
                    mean_stderr(&diff, e.config().antithetic).1
                }
                _ => (x.stderr * x.stderr + y.stderr * y.stderr).sqrt(),
            };
            (d.abs(), d, S::lit(MC_SE_MULT) * se)
        }
    }
}

/// Evaluates `rho_{s, horizon}(pos)` on level `s` with the generator member for `horizon`.
pub(crate) fn rho<S: Scalar>(b: &Backend<'_, S>, d: &DriverSpec<S>, pos: &Pos<'_, S>, s: usize, horizon: usize) -> Result<LevelValue<S>> {
    let (ts, th) = (b.time(s), b.time(horizon));
    match b {
        Backend::Tree(tree) => {
            let values = match pos {
                Pos::Claim(c) => tree_rho(tree, d, c, ts, th)?,
                Pos::Values { level, values } => {
                    let c = ClaimSpec::node_values(values.clone(), tree.sqrt_dt(), tree.time(*level));
                    tree_rho(tree, d, &c, ts, th)?
                }
            };
            Ok(LevelValue { values, pathwise: None, stderr: S::zero() })
        }
        Backend::Mc(e, cfg) => {
            let sol = match pos {
                Pos::Claim(c) => mc_solve_bsde(e, d, c, ts, th, *cfg)?,
                Pos::Values { level, values } => mc_solve_values(e, d, e.grid().time(*level), values, ts, th, *cfg)?,
            };
            Ok(LevelValue { values: sol.values, pathwise: Some(sol.pathwise), stderr: sol.stderr })
        }
    }
}

/// The claim pinned to `level` when it is a constant, checked for measurability otherwise.
pub(crate) fn measurable_at<S: Scalar>(b: &Backend<'_, S>, c: &ClaimSpec<S>, level: usize) -> Result<ClaimSpec<S>> {
    if let ClaimKind::Constant(v) = c.kind {
        return Ok(ClaimSpec::constant(v, b.time(level)));
    }
    let cu = c.validate(b.grid())?;
    if cu > level {
        return invalid(format!("claim at {} is not measurable at {}", c.horizon, b.time(level)));
    }
    Ok(c.clone())
}

/// Triple of grid times as level indices, checked for order.
pub(crate) fn triple_levels<S: Scalar>(b: &Backend<'_, S>, (s, t, u): (S, S, S)) -> Result<(usize, usize, usize)> {
    let (si, ti, ui) = (b.level(s)?, b.level(t)?, b.level(u)?);
    if !(si <= ti && ti <= ui) {
        return invalid("triples need s <= t <= u");
    }
    Ok((si, ti, ui))
}
