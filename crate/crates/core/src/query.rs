use std::fmt;

use crate::scalar::Scalar;

/// Numerical backend that produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendTag {
    Tree,
    Mc,
}

impl fmt::Display for BackendTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BackendTag::Tree => "tree",
            BackendTag::Mc => "mc",
        })
    }
}

/// Evaluation request for `rho_{s, horizon}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskQuery<S> {
    pub s: S,
    pub horizon: S,
}

/// `rho_{s, horizon}(X)`: node values on the tree (one entry at `s = 0`), or a
/// path-mean estimate with standard error on the Monte Carlo backend.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskValue<S> {
    pub query: RiskQuery<S>,
    pub values: Vec<S>,
    pub stderr: Option<S>,
    pub backend: BackendTag,
}

impl<S: Scalar> RiskValue<S> {
    /// The value at the root, or the path mean.
    pub fn scalar(&self) -> S {
        if self.values.len() == 1 {
            self.values[0]
        } else {
            self.values.iter().copied().sum::<S>() / S::from_usize_lossy(self.values.len())
        }
    }
}

/// Collection of `(s, horizon)` evaluations of one claim under one generator.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RiskSurface<S> {
    pub entries: Vec<RiskValue<S>>,
}

impl<S: Scalar> RiskSurface<S> {
    pub fn get(&self, s: S, horizon: S) -> Option<&RiskValue<S>> {
        let tol = S::lit(1e-9);
        self.entries
            .iter()
            .find(|e| (e.query.s - s).abs() <= tol && (e.query.horizon - horizon).abs() <= tol)
    }
}
