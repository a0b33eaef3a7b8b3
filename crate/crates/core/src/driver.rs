//! Generator catalog: evaluation, zero sections and convex conjugates.

use std::fmt;
use std::sync::Arc;

use crate::error::{invalid, unsupported, Result};
use crate::grid::TimeGrid;
use crate::scalar::Scalar;
use crate::timefn::{KernelFn, TimeFn};

/// Tolerance for "q equals the slope" tests in indicator-type conjugates.
pub const DOMAIN_TOL: f64 = 1e-9;

/// Half-width of the search interval used by numerical conjugates.
pub const NUMERIC_CONJ_RADIUS: f64 = 200.0;

pub type DriverFn<S> = Arc<dyn Fn(S, S, S, &[S]) -> S + Send + Sync>;
pub type ConjugateFn<S> = Arc<dyn Fn(S, S, &[S]) -> S + Send + Sync>;

/// User supplied generator `g(t, s, y, z)`.
///
/// `t` is the frozen evaluation time (ignored unless `volterra`), `s` the running time.
#[derive(Clone)]
pub struct CustomDriver<S: Scalar> {
    pub name: String,
    pub eval: DriverFn<S>,
    /// Closed-form conjugate `g*(t, s, q)`, returning `+inf` outside the domain.
    pub conjugate: Option<ConjugateFn<S>>,
    pub lipschitz_z: Option<S>,
    pub supports_y: bool,
    pub volterra: bool,
    pub dim: Option<usize>,
}

/// A horizon-indexed family `u -> g_u`.
#[derive(Clone, Debug)]
pub struct Family<S: Scalar> {
    members: Vec<(S, DriverSpec<S>)>,
}

impl<S: Scalar> Family<S> {
    pub fn new(mut members: Vec<(S, DriverSpec<S>)>) -> Result<Self> {
        if members.is_empty() {
            return invalid("family needs at least one member");
        }
        if members.iter().any(|(_, d)| matches!(d, DriverSpec::Family(_))) {
            return invalid("nested families are not supported");
        }
        members.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
        Ok(Self { members })
    }

    /// One member per grid time, built from `f(u)`.
    pub fn from_fn(grid: &TimeGrid<S>, f: impl Fn(S) -> DriverSpec<S>) -> Result<Self> {
        Self::new(grid.times().iter().map(|&u| (u, f(u))).collect())
    }

    pub fn members(&self) -> &[(S, DriverSpec<S>)] {
        &self.members
    }

    pub fn member(&self, horizon: S) -> Result<&DriverSpec<S>> {
        let tol = S::lit(1e-9) * horizon.abs().max(S::one());
        self.members
            .iter()
            .find(|(u, _)| (*u - horizon).abs() <= tol)
            .map(|(_, d)| d)
            .ok_or_else(|| {
                crate::error::Error::InvalidArgument(format!("family has no member for horizon {horizon}"))
            })
    }
}

/// Generator of a BSDE or BSVIE.
#[derive(Clone)]
pub enum DriverSpec<S: Scalar> {
    /// `g = a(s)`
    Constant { a: TimeFn<S> },
    /// `g = b . z + a(s)`
    Linear { b: Vec<S>, a: TimeFn<S> },
    /// `g = (b/2)|z|^2 + a(s)`, `b > 0`
    Entropic { b: S, a: TimeFn<S> },
    /// `g = kappa |z| + a(s)`, `kappa >= 0`
    Abs { kappa: S, a: TimeFn<S> },
    /// `g(t, s, z) = a(t, s) . z + b(t, s)`
    VolterraLinear { a: Vec<KernelFn<S>>, b: KernelFn<S> },
    /// `g(t, s, z) = b(t) |z|^2 / 2 + a(t, s)`, `b > 0`
    VolterraQuadratic { b: TimeFn<S>, a: KernelFn<S> },
    Family(Family<S>),
    Custom(CustomDriver<S>),
}

impl<S: Scalar> fmt::Debug for DriverSpec<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DriverSpec::Constant { a } => write!(f, "Constant({a:?})"),
            DriverSpec::Linear { b, a } => write!(f, "Linear({b:?}, {a:?})"),
            DriverSpec::Entropic { b, a } => write!(f, "Entropic({b}, {a:?})"),
            DriverSpec::Abs { kappa, a } => write!(f, "Abs({kappa}, {a:?})"),
            DriverSpec::VolterraLinear { a, b } => write!(f, "VolterraLinear({a:?}, {b:?})"),
            DriverSpec::VolterraQuadratic { b, a } => write!(f, "VolterraQuadratic({b:?}, {a:?})"),
            DriverSpec::Family(fam) => write!(f, "Family({} members)", fam.members.len()),
            DriverSpec::Custom(c) => write!(f, "Custom({})", c.name),
        }
    }
}

fn norm2<S: Scalar>(z: &[S]) -> S {
    z.iter().fold(S::zero(), |acc, &x| acc + x * x)
}

fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter().zip(b).fold(S::zero(), |acc, (&x, &y)| acc + x * y)
}

fn close_to<S: Scalar>(q: &[S], target: impl Iterator<Item = S>) -> bool {
    q.iter().zip(target).all(|(&x, y)| {
        (x - y).abs() <= S::lit(DOMAIN_TOL) * S::one().max(y.abs())
    })
}

impl<S: Scalar> DriverSpec<S> {
    pub fn constant(a: S) -> Self {
        DriverSpec::Constant { a: TimeFn::Const(a) }
    }

    pub fn linear(b: S, a: S) -> Self {
        DriverSpec::Linear { b: vec![b], a: TimeFn::Const(a) }
    }

    pub fn entropic(b: S, a: S) -> Self {
        DriverSpec::Entropic { b, a: TimeFn::Const(a) }
    }

    pub fn abs(kappa: S, a: S) -> Self {
        DriverSpec::Abs { kappa, a: TimeFn::Const(a) }
    }

    pub fn volterra_linear(a: S, b: S) -> Self {
        DriverSpec::VolterraLinear { a: vec![KernelFn::Const(a)], b: KernelFn::Const(b) }
    }

    pub fn volterra_quadratic(b: S, a: S) -> Self {
        DriverSpec::VolterraQuadratic { b: TimeFn::Const(b), a: KernelFn::Const(a) }
    }

    /// Checks parameter domains.
    pub fn validate(&self) -> Result<()> {
        match self {
            DriverSpec::Entropic { b, .. } if !(*b > S::zero()) => invalid("entropic b must be positive"),
            DriverSpec::Abs { kappa, .. } if *kappa < S::zero() => invalid("abs kappa must be non-negative"),
            DriverSpec::Linear { b, .. } if b.is_empty() => invalid("linear slope must be non-empty"),
            DriverSpec::VolterraLinear { a, .. } if a.is_empty() => invalid("volterra slope must be non-empty"),
            DriverSpec::Family(f) => f.members().iter().try_for_each(|(_, d)| d.validate()),
            _ => Ok(()),
        }
    }

    pub fn is_family(&self) -> bool {
        matches!(self, DriverSpec::Family(_))
    }

    /// Whether the generator depends on the frozen first argument.
    pub fn is_volterra(&self) -> bool {
        match self {
            DriverSpec::VolterraLinear { .. } | DriverSpec::VolterraQuadratic { .. } => true,
            DriverSpec::Custom(c) => c.volterra,
            DriverSpec::Family(f) => f.members().iter().any(|(_, d)| d.is_volterra()),
            _ => false,
        }
    }

    pub fn supports_y(&self) -> bool {
        match self {
            DriverSpec::Custom(c) => c.supports_y,
            DriverSpec::Family(f) => f.members().iter().any(|(_, d)| d.supports_y()),
            _ => false,
        }
    }

    /// Required Brownian dimension, when the generator fixes one.
    pub fn dim(&self) -> Option<usize> {
        match self {
            DriverSpec::Linear { b, .. } => Some(b.len()),
            DriverSpec::VolterraLinear { a, .. } => Some(a.len()),
            DriverSpec::Custom(c) => c.dim,
            DriverSpec::Family(f) => f.members().iter().find_map(|(_, d)| d.dim()),
            _ => None,
        }
    }

    /// Lipschitz constant in `z`, when the generator is globally Lipschitz with a known bound.
    pub fn lipschitz_z(&self) -> Option<S> {
        match self {
            DriverSpec::Constant { .. } => Some(S::zero()),
            DriverSpec::Linear { b, .. } => Some(norm2(b).sqrt()),
            DriverSpec::Abs { kappa, .. } => Some(*kappa),
            DriverSpec::Custom(c) => c.lipschitz_z,
            _ => None,
        }
    }

    /// Member for `horizon`; identity for non-family generators.
    pub fn member(&self, horizon: S) -> Result<&DriverSpec<S>> {
        match self {
            DriverSpec::Family(f) => f.member(horizon),
            d => Ok(d),
        }
    }

    /// `g(t, s, y, z)`. Families must be resolved with [`DriverSpec::member`] first.
    pub fn eval(&self, t: S, s: S, y: S, z: &[S]) -> Result<S> {
        if let DriverSpec::Family(_) = self {
            return invalid("family generator: select a member by horizon first");
        }
        if let Some(d) = self.dim() {
            if d != z.len() {
                return invalid(format!("z has dimension {} but the generator expects {d}", z.len()));
            }
        }
        Ok(self.g(t, s, y, z))
    }

    /// Unchecked evaluation used in the solver loops. Returns NaN for families.
    #[inline]
    pub fn g(&self, t: S, s: S, y: S, z: &[S]) -> S {
        match self {
            DriverSpec::Constant { a } => a.eval(s),
            DriverSpec::Linear { b, a } => dot(b, z) + a.eval(s),
            DriverSpec::Entropic { b, a } => *b * S::half() * norm2(z) + a.eval(s),
            DriverSpec::Abs { kappa, a } => *kappa * norm2(z).sqrt() + a.eval(s),
            DriverSpec::VolterraLinear { a, b } => {
                a.iter().zip(z).fold(S::zero(), |acc, (k, &zi)| acc + k.eval(t, s) * zi) + b.eval(t, s)
            }
            DriverSpec::VolterraQuadratic { b, a } => b.eval(t) * S::half() * norm2(z) + a.eval(t, s),
            DriverSpec::Custom(c) => (c.eval)(t, s, y, z),
            DriverSpec::Family(_) => S::nan(),
        }
    }

    /// Zero section `g(t, s, 0, 0)` in dimension `d`.
    pub fn zero_section(&self, t: S, s: S, d: usize) -> S {
        let z = vec![S::zero(); self.dim().unwrap_or(d)];
        self.g(t, s, S::zero(), &z)
    }

    /// `g(., 0) == 0` on every pair of grid times (every member for families).
    pub fn is_normalized_on(&self, grid: &TimeGrid<S>, tol: S) -> bool {
        let members: Vec<&DriverSpec<S>> = match self {
            DriverSpec::Family(f) => f.members().iter().map(|(_, d)| d).collect(),
            d => vec![d],
        };
        members.iter().all(|d| {
            grid.times().iter().all(|&t| {
                grid.times().iter().all(|&s| s < t || d.zero_section(t, s, 1).abs() <= tol)
            })
        })
    }

    /// Convex conjugate `g*(t, s, q) = sup_z { q . z - g(t, s, 0, z) }`, `+inf` outside the domain.
    ///
    /// Custom generators without a closed form use a one-dimensional golden-section
    /// search over `|z| <= NUMERIC_CONJ_RADIUS`, which is approximate and reports
    /// `+inf` when the maximiser sits on the search boundary.
    pub fn conjugate(&self, t: S, s: S, q: &[S]) -> Result<S> {
        let inf = S::infinity();
        Ok(match self {
            DriverSpec::Constant { a } => {
                if close_to(q, std::iter::repeat(S::zero())) {
                    -a.eval(s)
                } else {
                    inf
                }
            }
            DriverSpec::Linear { b, a } => {
                if q.len() == b.len() && close_to(q, b.iter().copied()) {
                    -a.eval(s)
                } else {
                    inf
                }
            }
            DriverSpec::Entropic { b, a } => norm2(q) / (S::two() * *b) - a.eval(s),
            DriverSpec::Abs { kappa, a } => {
                if norm2(q).sqrt() <= *kappa * (S::one() + S::lit(DOMAIN_TOL)) + S::lit(DOMAIN_TOL) {
                    -a.eval(s)
                } else {
                    inf
                }
            }
            DriverSpec::VolterraLinear { a, b } => {
                if q.len() == a.len() && close_to(q, a.iter().map(|k| k.eval(t, s))) {
                    -b.eval(t, s)
                } else {
                    inf
                }
            }
            DriverSpec::VolterraQuadratic { b, a } => norm2(q) / (S::two() * b.eval(t)) - a.eval(t, s),
            DriverSpec::Custom(c) => match &c.conjugate {
                Some(f) => f(t, s, q),
                None => numeric_conjugate(|z| (c.eval)(t, s, S::zero(), &[z]), q)?,
            },
            DriverSpec::Family(_) => return invalid("family generator: select a member by horizon first"),
        })
    }

    /// Closed interval containing the effective domain of `q -> g*(t, s, q)` in dimension one
    /// (`None` when unbounded or unknown).
    pub fn conjugate_domain(&self, t: S, s: S) -> Option<(S, S)> {
        match self {
            DriverSpec::Constant { .. } => Some((S::zero(), S::zero())),
            DriverSpec::Linear { b, .. } if b.len() == 1 => Some((b[0], b[0])),
            DriverSpec::Abs { kappa, .. } => Some((-*kappa, *kappa)),
            DriverSpec::VolterraLinear { a, .. } if a.len() == 1 => {
                let q = a[0].eval(t, s);
                Some((q, q))
            }
            _ => None,
        }
    }

    /// First and second derivative of `q -> g*(t, s, q)` in dimension one for smooth conjugates.
    pub fn conjugate_derivatives(&self, t: S, _s: S, q: S) -> Option<(S, S)> {
        match self {
            DriverSpec::Entropic { b, .. } => Some((q / *b, S::one() / *b)),
            DriverSpec::VolterraQuadratic { b, .. } => {
                let bt = b.eval(t);
                Some((q / bt, S::one() / bt))
            }
            _ => None,
        }
    }
}

/// `sup_z { q z - f(z) }` for a convex scalar function by golden-section search.
fn numeric_conjugate<S: Scalar>(f: impl Fn(S) -> S, q: &[S]) -> Result<S> {
    if q.len() != 1 {
        return unsupported("numerical conjugate is only available in dimension one");
    }
    let q = q[0];
    let r = S::lit(NUMERIC_CONJ_RADIUS);
    let phi = |z: S| q * z - f(z);
    let gr = S::lit(0.618_033_988_749_894_9);
    let (mut lo, mut hi) = (-r, r);
    let mut x1 = hi - gr * (hi - lo);
    let mut x2 = lo + gr * (hi - lo);
    let (mut f1, mut f2) = (phi(x1), phi(x2));
    for _ in 0..200 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + gr * (hi - lo);
            f2 = phi(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - gr * (hi - lo);
            f1 = phi(x1);
        }
        if hi - lo <= S::lit(1e-12) * r {
            break;
        }
    }
    let z = (lo + hi) * S::half();
    if (z.abs() - r).abs() <= S::lit(1e-6) * r {
        return Ok(S::infinity());
    }
    Ok(phi(z))
}
