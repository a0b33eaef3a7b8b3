use super::{rho, Backend, Pos};
use crate::claim::ClaimSpec;
use crate::driver::DriverSpec;
use crate::error::{invalid, Result};
use crate::query::BackendTag;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryRow<S> {
    pub s: S,
    pub z: S,
    pub g_hat: S,
    /// `g(s, s, 0, z)` of the member being recovered.
    pub g_true: S,
}

impl<S: Scalar> RecoveryRow<S> {
    pub fn error(&self) -> S {
        (self.g_hat - self.g_true).abs()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryReport<S> {
    pub backend: BackendTag,
    pub eps: S,
    pub richardson: bool,
    pub rows: Vec<RecoveryRow<S>>,
}

impl<S: Scalar> RecoveryReport<S> {
    pub fn max_error(&self) -> S {
        self.rows.iter().map(|r| r.error()).fold(S::zero(), S::max)
    }
}

/// `rho_{s, s+eps}(-z (B_{s+eps} - B_s)) / eps` with the generator member for `horizon`.
///
/// Evaluated through `rho(-z B_{s+eps}) - z B_s` (translation by an `F_s`-measurable
/// amount), then averaged over the level-`s` nodes or paths.
fn g_hat<S: Scalar>(b: &Backend<'_, S>, g: &DriverSpec<S>, si: usize, eps_steps: usize, z: S) -> Result<S> {
    let hi = si + eps_steps;
    let x = ClaimSpec::linear(-z, S::zero(), b.time(hi));
    let v = rho(b, g, &Pos::Claim(&x), si, hi)?;
    let eps = b.time(hi) - b.time(si);
    let shifted: Vec<S> = match b {
        Backend::Tree(tree) => v.values.iter().enumerate().map(|(j, &r)| r - z * tree.b(si, j)).collect(),
        Backend::Mc(e, _) => v.values.iter().enumerate().map(|(i, &r)| r - z * e.state(si, i)[0]).collect(),
    };
    Ok(shifted.iter().copied().sum::<S>() / S::from_usize_lossy(shifted.len()) / eps)
}

/// Finite-difference estimate of the generator on the `(s, z)` lattice.
///
/// `eps` must be a whole number of grid steps; with `richardson` the estimate is
/// `2 g_hat(eps) - g_hat(2 eps)`.
pub fn recover_driver<S: Scalar>(
    b: &Backend<'_, S>,
    d: &DriverSpec<S>,
    horizon: S,
    s_grid: &[S],
    z_grid: &[S],
    eps: S,
    richardson: bool,
) -> Result<RecoveryReport<S>> {
    if z_grid.is_empty() || s_grid.is_empty() {
        return invalid("recovery lattice is empty");
    }
    if b.grid().steps() == 0 || eps < b.grid().dt(0) * S::lit(1.0 - 1e-9) {
        return invalid("eps must be at least one grid step");
    }
    let g = d.member(horizon)?;
    let mut rows = Vec::new();
    for &s in s_grid {
        let si = b.level(s)?;
        let hi = b.level(s + eps).map_err(|_| crate::error::Error::InvalidArgument("s + eps must be a grid time".into()))?;
        let steps = hi - si;
        if richardson && si + 2 * steps > b.grid().steps() {
            return invalid("s + 2 eps is past the grid horizon");
        }
        for &z in z_grid {
            let mut v = g_hat(b, g, si, steps, z)?;
            if richardson {
                v = S::two() * v - g_hat(b, g, si, 2 * steps, z)?;
            }
            rows.push(RecoveryRow { s, z, g_hat: v, g_true: g.g(s, s, S::zero(), &[z]) });
        }
    }
    Ok(RecoveryReport { backend: b.tag(), eps, richardson, rows })
}
