//! Financial positions `X`, measurable at a horizon `u`.

use std::fmt;
use std::sync::Arc;

use crate::error::{invalid, Result};
use crate::grid::TimeGrid;
use crate::scalar::Scalar;

/// Read-only view on a sampled Brownian path: `dim` components at each grid point.
#[derive(Clone, Copy, Debug)]
pub struct PathRef<'a, S> {
    values: &'a [S],
    dim: usize,
}

impl<'a, S: Scalar> PathRef<'a, S> {
    pub fn new(values: &'a [S], dim: usize) -> Self {
        assert!(dim > 0 && values.len() % dim == 0, "path length must be a multiple of dim");
        Self { values, dim }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of grid points in the view.
    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `B_{t_k}`.
    pub fn at(&self, k: usize) -> &'a [S] {
        &self.values[k * self.dim..(k + 1) * self.dim]
    }

    /// Prefix up to and including grid index `k`.
    pub fn truncate(&self, k: usize) -> PathRef<'a, S> {
        PathRef { values: &self.values[..(k + 1) * self.dim], dim: self.dim }
    }
}

pub type StateFn<S> = Arc<dyn Fn(&[S]) -> S + Send + Sync>;
pub type PathFn<S> = Arc<dyn Fn(PathRef<'_, S>) -> S + Send + Sync>;

#[derive(Clone)]
pub enum ClaimKind<S: Scalar> {
    Constant(S),
    /// `z . B_u + c`
    Linear { z: Vec<S>, c: S },
    /// `(B_u^i - K)^+`
    Call { strike: S, component: usize },
    /// `(K - B_u^i)^+`
    Put { strike: S, component: usize },
    /// Values on the level-`u` nodes of a one-dimensional binomial tree with step `sqrt_dt`.
    NodeValues { sqrt_dt: S, values: Arc<Vec<S>> },
    /// Function of the state `B_u`.
    State(StateFn<S>),
    /// Functional of the path on `[0, u]`; the callback only sees the truncated prefix.
    Path(PathFn<S>),
}

/// Position `X` measurable at `horizon`.
#[derive(Clone)]
pub struct ClaimSpec<S: Scalar> {
    pub horizon: S,
    pub kind: ClaimKind<S>,
}

impl<S: Scalar> fmt::Debug for ClaimSpec<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = match &self.kind {
            ClaimKind::Constant(c) => format!("Constant({c})"),
            ClaimKind::Linear { z, c } => format!("Linear({z:?}, {c})"),
            ClaimKind::Call { strike, component } => format!("Call(K={strike}, i={component})"),
            ClaimKind::Put { strike, component } => format!("Put(K={strike}, i={component})"),
            ClaimKind::NodeValues { values, .. } => format!("NodeValues({} nodes)", values.len()),
            ClaimKind::State(_) => "State(<fn>)".into(),
            ClaimKind::Path(_) => "Path(<fn>)".into(),
        };
        write!(f, "{k} @ {}", self.horizon)
    }
}

impl<S: Scalar> ClaimSpec<S> {
    pub fn constant(c: S, horizon: S) -> Self {
        Self { horizon, kind: ClaimKind::Constant(c) }
    }

    /// `z B_u + c` in dimension one.
    pub fn linear(z: S, c: S, horizon: S) -> Self {
        Self { horizon, kind: ClaimKind::Linear { z: vec![z], c } }
    }

    pub fn call(strike: S, horizon: S) -> Self {
        Self { horizon, kind: ClaimKind::Call { strike, component: 0 } }
    }

    pub fn put(strike: S, horizon: S) -> Self {
        Self { horizon, kind: ClaimKind::Put { strike, component: 0 } }
    }

    pub fn node_values(values: Vec<S>, sqrt_dt: S, horizon: S) -> Self {
        Self { horizon, kind: ClaimKind::NodeValues { sqrt_dt, values: Arc::new(values) } }
    }

    pub fn state(f: impl Fn(&[S]) -> S + Send + Sync + 'static, horizon: S) -> Self {
        Self { horizon, kind: ClaimKind::State(Arc::new(f)) }
    }

    pub fn path(f: impl Fn(PathRef<'_, S>) -> S + Send + Sync + 'static, horizon: S) -> Self {
        Self { horizon, kind: ClaimKind::Path(Arc::new(f)) }
    }

    /// Same position shifted by a constant: `X + m`.
    pub fn shifted(&self, m: S) -> Self {
        let kind = match &self.kind {
            ClaimKind::Constant(c) => ClaimKind::Constant(*c + m),
            ClaimKind::Linear { z, c } => ClaimKind::Linear { z: z.clone(), c: *c + m },
            ClaimKind::NodeValues { sqrt_dt, values } => ClaimKind::NodeValues {
                sqrt_dt: *sqrt_dt,
                values: Arc::new(values.iter().map(|&v| v + m).collect()),
            },
            _ => {
                let inner = self.clone();
                return ClaimSpec::path(
                    move |p| inner.eval_prefix(p).unwrap_or(S::nan()) + m,
                    self.horizon,
                );
            }
        };
        Self { horizon: self.horizon, kind }
    }

    /// Whether the payoff is a function of `B_u` alone.
    pub fn is_markov(&self) -> bool {
        !matches!(self.kind, ClaimKind::Path(_))
    }

    /// Required Brownian dimension, if fixed by the claim.
    pub fn dim(&self) -> Option<usize> {
        match &self.kind {
            ClaimKind::Linear { z, .. } => Some(z.len()),
            ClaimKind::NodeValues { .. } => Some(1),
            _ => None,
        }
    }

    /// Payoff from the state `B_u`. `None` for path functionals.
    pub fn eval_state(&self, b: &[S]) -> Option<S> {
        Some(match &self.kind {
            ClaimKind::Constant(c) => *c,
            ClaimKind::Linear { z, c } => z.iter().zip(b).fold(*c, |acc, (&zi, &bi)| acc + zi * bi),
            ClaimKind::Call { strike, component } => (b[*component] - *strike).max(S::zero()),
            ClaimKind::Put { strike, component } => (*strike - b[*component]).max(S::zero()),
            ClaimKind::NodeValues { sqrt_dt, values } => {
                let level = values.len() - 1;
                let x = (b[0] / *sqrt_dt + S::from_usize_lossy(level)) * S::half();
                let j = x.round().to_usize()?;
                *values.get(j)?
            }
            ClaimKind::State(f) => f(b),
            ClaimKind::Path(_) => return None,
        })
    }

    /// Payoff from a path prefix that ends at the claim horizon.
    fn eval_prefix(&self, prefix: PathRef<'_, S>) -> Option<S> {
        match &self.kind {
            ClaimKind::Path(f) => Some(f(prefix)),
            _ => self.eval_state(prefix.at(prefix.len() - 1)),
        }
    }

    /// `X(path)`. Only the path values at times up to the horizon are read.
    pub fn eval(&self, grid: &TimeGrid<S>, path: PathRef<'_, S>) -> Result<S> {
        let u = grid.index_of(self.horizon)?;
        if path.len() <= u {
            return invalid("path is shorter than the claim horizon");
        }
        if let Some(d) = self.dim() {
            if d != path.dim() {
                return invalid(format!("claim expects dimension {d}, path has {}", path.dim()));
            }
        }
        self.eval_prefix(path.truncate(u))
            .ok_or_else(|| crate::error::Error::InvalidArgument("state outside the claim's node set".into()))
    }

    pub fn validate(&self, grid: &TimeGrid<S>) -> Result<usize> {
        let u = grid.index_of(self.horizon)?;
        if let ClaimKind::NodeValues { values, .. } = &self.kind {
            if values.len() != u + 1 {
                return invalid(format!("node claim at level {u} needs {} values, got {}", u + 1, values.len()));
            }
        }
        Ok(u)
    }
}
