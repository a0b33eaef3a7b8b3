use super::bsde::{mc_solve_bsde, McSolution, SolverConfig};
use super::paths::PathEnsemble;
use crate::claim::ClaimSpec;
use crate::driver::DriverSpec;
use crate::error::Result;
use crate::scalar::Scalar;

/// `rho_{s, horizon}(X)` for every `s` in `s_times`, one frozen-argument pass per `s`.
pub fn mc_solve_bsvie<S: Scalar>(
    e: &PathEnsemble<S>,
    d: &DriverSpec<S>,
    c: &ClaimSpec<S>,
    s_times: &[S],
    horizon: S,
    cfg: SolverConfig<S>,
) -> Result<Vec<McSolution<S>>> {
    s_times.iter().map(|&s| mc_solve_bsde(e, d, c, s, horizon, cfg)).collect()
}
