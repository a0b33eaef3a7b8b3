//! Least-squares Monte Carlo for BSDE and BSVIE risk measures in dimension `d`.
//!
//! Conditional expectations are regressions on monomials of the Brownian state
//! `B_{t_k}` (total degree `p`). The regression state is Markov, so path-dependent
//! claims are projected onto functions of the current state.

mod bsde;
mod bsvie;
mod paths;
mod regression;

pub use bsde::{mc_solve_bsde, mc_solve_values, mean_stderr, McSolution, SolverConfig};
pub use bsvie::mc_solve_bsvie;
pub use paths::{simulate_paths, EnsembleConfig, PathEnsemble, MAX_ENSEMBLE_CELLS, PATH_BLOCK};
pub use regression::{monomial_exponents, Basis, LeastSquares};
