use std::fmt;
use std::sync::Arc;

use crate::driver::DriverSpec;
use crate::error::{invalid, Error, Result};
use crate::mc::PathEnsemble;
use crate::scalar::Scalar;
use crate::timefn::TimeFn;
use crate::tree::{TreeMeasure, TreeModel};

pub type StateKernel<S> = Arc<dyn Fn(S, &[S]) -> Vec<S> + Send + Sync>;

/// Girsanov kernel `q(t, B_t)`.
#[derive(Clone)]
pub enum QKernel<S: Scalar> {
    Constant(Vec<S>),
    Time(Vec<TimeFn<S>>),
    State(StateKernel<S>),
}

impl<S: Scalar> fmt::Debug for QKernel<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QKernel::Constant(q) => write!(f, "Constant({q:?})"),
            QKernel::Time(q) => write!(f, "Time({q:?})"),
            QKernel::State(_) => write!(f, "State(<fn>)"),
        }
    }
}

/// Measure equivalent to `P`, with kernel `q` active on `[start, end]`.
#[derive(Debug, Clone)]
pub struct MeasureSpec<S: Scalar> {
    pub start: S,
    pub end: S,
    pub kernel: QKernel<S>,
}

impl<S: Scalar> MeasureSpec<S> {
    pub fn constant(q: S, start: S, end: S) -> Self {
        Self { start, end, kernel: QKernel::Constant(vec![q]) }
    }

    pub fn q(&self, t: S, b: &[S]) -> Vec<S> {
        match &self.kernel {
            QKernel::Constant(q) => q.clone(),
            QKernel::Time(f) => f.iter().map(|f| f.eval(t)).collect(),
            QKernel::State(f) => f(t, b),
        }
    }
}

/// Tree kernel of a measure; fails when `|q| sqrt(dt) >= 1` at a node.
pub fn build_tree_density<S: Scalar>(tree: &TreeModel<S>, m: &MeasureSpec<S>) -> Result<TreeMeasure<S>> {
    let (a, b) = (tree.level(m.start)?, tree.level(m.end)?);
    TreeMeasure::from_fn(tree, a, b, |k, _, x| {
        let q = m.q(tree.time(k), &[x]);
        if q.len() == 1 {
            q[0]
        } else {
            S::nan()
        }
    })
}

/// `dQ/dP` on `F_end` along every path of the ensemble.
pub fn build_mc_density<S: Scalar>(e: &PathEnsemble<S>, m: &MeasureSpec<S>) -> Result<Vec<S>> {
    let grid = e.grid();
    let (a, b) = (grid.index_of(m.start)?, grid.index_of(m.end)?);
    if a > b {
        return invalid("measure window must satisfy start <= end");
    }
    let d = e.dim();
    (0..e.paths())
        .map(|i| {
            let mut log = S::zero();
            for k in a..b {
                let q = m.q(grid.time(k), e.state(k, i));
                if q.len() != d {
                    return invalid("kernel dimension does not match the ensemble");
                }
                let dt = grid.dt(k);
                for (c, &qc) in q.iter().enumerate() {
                    if !qc.is_finite() {
                        return Err(Error::Numerical { level: k, msg: "non-finite kernel".into() });
                    }
                    log = log + qc * e.increment(k, i, c) - S::half() * qc * qc * dt;
                }
            }
            Ok(log.exp())
        })
        .collect()
}

/// `E[alpha_{st}(Q)]` with its standard error: the `Q`-expectation of
/// `sum_{k in [s, t)} g*(t_s, t_k, q_k) dt`, reweighted by the density on `[s, t]`.
///
/// Returns `+inf` when a kernel value falls outside the conjugate's domain.
pub fn penalty_mc<S: Scalar>(e: &PathEnsemble<S>, d: &DriverSpec<S>, m: &MeasureSpec<S>, s: S, t: S) -> Result<(S, S)> {
    let grid = e.grid();
    let (si, ti) = (grid.index_of(s)?, grid.index_of(t)?);
    if si > ti {
        return invalid("penalty needs s <= t");
    }
    let g = d.member(t)?;
    let ts = grid.time(si);
    let restricted = MeasureSpec { start: s, end: t, kernel: m.kernel.clone() };
    let dens = build_mc_density(e, &restricted)?;
    let mut samples = Vec::with_capacity(e.paths());
    for (i, &w) in dens.iter().enumerate() {
        let mut a = S::zero();
        for k in si..ti {
            let q = m.q(grid.time(k), e.state(k, i));
            let c = g.conjugate(ts, grid.time(k), &q)?;
            if c == S::infinity() {
                return Ok((S::infinity(), S::zero()));
            }
            a = a + c * grid.dt(k);
        }
        samples.push(w * a);
    }
    Ok(crate::mc::mean_stderr(&samples, e.config().antithetic))
}
