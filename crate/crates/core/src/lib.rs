//! Fully-dynamic risk measures `rho_{s,t}` generated by backward stochastic
//! differential equations and backward stochastic Volterra integral equations.
//!
//! Two numerical backends share one interface: an exact-arithmetic binomial tree
//! in dimension one and a least-squares Monte Carlo solver in dimension `d`.
//! On top of them sit the dual (penalty) representation and diagnostics for the
//! time-consistency family, longevity, restriction and horizon comparison.
//!
//! Measure-change convention: `dQ/dP = exp(int q dB - 1/2 int |q|^2 ds)`, so that
//! `B - int q ds` is a `Q`-Brownian motion.
//!
//! Engines are generic over [`Scalar`] (`f32` or `f64`); the aliases below fix `f64`.

pub mod claim;
pub mod diagnostics;
pub mod document;
pub mod driver;
pub mod duality;
pub mod error;
pub mod grid;
pub mod mc;
pub mod query;
pub mod scalar;
pub mod timefn;
pub mod tree;

pub use claim::{ClaimKind, ClaimSpec, PathRef};
pub use driver::{CustomDriver, DriverSpec, Family};
pub use error::{Error, Result};
pub use grid::TimeGrid;
pub use query::{BackendTag, RiskQuery, RiskSurface, RiskValue};
pub use scalar::Scalar;
pub use timefn::{KernelFn, TimeFn};

pub type Grid = TimeGrid<f64>;
pub type Driver = DriverSpec<f64>;
pub type Claim = ClaimSpec<f64>;
pub type Tree = tree::TreeModel<f64>;
pub type TreeSol = tree::TreeSolution<f64>;
pub type TreeQ = tree::TreeMeasure<f64>;
pub type Ensemble = mc::PathEnsemble<f64>;
pub type McConfig = mc::SolverConfig<f64>;
pub type McSol = mc::McSolution<f64>;
pub type Measure = duality::MeasureSpec<f64>;
pub type Report = diagnostics::ConsistencyReport<f64>;
pub type Gamma = diagnostics::GammaReport<f64>;

pub type Grid32 = TimeGrid<f32>;
pub type Driver32 = DriverSpec<f32>;
pub type Claim32 = ClaimSpec<f32>;
pub type Tree32 = tree::TreeModel<f32>;
