//! Deterministic coefficient functions of one or two time arguments.

use std::fmt;
use std::sync::Arc;

use crate::scalar::Scalar;

pub type Callback1<S> = Arc<dyn Fn(S) -> S + Send + Sync>;
pub type Callback2<S> = Arc<dyn Fn(S, S) -> S + Send + Sync>;

/// Deterministic function of time.
#[derive(Clone)]
pub enum TimeFn<S: Scalar> {
    Const(S),
    /// `c0 + c1 * t`
    Affine { c0: S, c1: S },
    /// `scale * exp(rate * t)`
    Exp { scale: S, rate: S },
    Custom(Callback1<S>),
}

impl<S: Scalar> TimeFn<S> {
    pub fn eval(&self, t: S) -> S {
        match self {
            TimeFn::Const(c) => *c,
            TimeFn::Affine { c0, c1 } => *c0 + *c1 * t,
            TimeFn::Exp { scale, rate } => *scale * (*rate * t).exp(),
            TimeFn::Custom(f) => f(t),
        }
    }

    /// Exact integral over `[a, b]` when available.
    pub fn integral(&self, a: S, b: S) -> Option<S> {
        match self {
            TimeFn::Const(c) => Some(*c * (b - a)),
            TimeFn::Affine { c0, c1 } => Some(*c0 * (b - a) + *c1 * (b * b - a * a) * S::half()),
            TimeFn::Exp { scale, rate } => {
                if *rate == S::zero() {
                    Some(*scale * (b - a))
                } else {
                    Some(*scale * ((*rate * b).exp() - (*rate * a).exp()) / *rate)
                }
            }
            TimeFn::Custom(_) => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            TimeFn::Const(c) => *c == S::zero(),
            TimeFn::Affine { c0, c1 } => *c0 == S::zero() && *c1 == S::zero(),
            TimeFn::Exp { scale, .. } => *scale == S::zero(),
            TimeFn::Custom(_) => false,
        }
    }
}

impl<S: Scalar> fmt::Debug for TimeFn<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimeFn::Const(c) => write!(f, "Const({c})"),
            TimeFn::Affine { c0, c1 } => write!(f, "Affine({c0} + {c1} t)"),
            TimeFn::Exp { scale, rate } => write!(f, "Exp({scale} e^({rate} t))"),
            TimeFn::Custom(_) => write!(f, "Custom(<fn>)"),
        }
    }
}

impl<S: Scalar> From<S> for TimeFn<S> {
    fn from(c: S) -> Self {
        TimeFn::Const(c)
    }
}

/// Deterministic function `k(t, s)` of the evaluation time `t` and running time `s`.
#[derive(Clone)]
pub enum KernelFn<S: Scalar> {
    Const(S),
    /// `c0 + ct * t + cs * s`
    Affine { c0: S, ct: S, cs: S },
    Custom(Callback2<S>),
}

impl<S: Scalar> KernelFn<S> {
    pub fn eval(&self, t: S, s: S) -> S {
        match self {
            KernelFn::Const(c) => *c,
            KernelFn::Affine { c0, ct, cs } => *c0 + *ct * t + *cs * s,
            KernelFn::Custom(f) => f(t, s),
        }
    }

    /// Exact `int_a^b k(t, s) ds` when available.
    pub fn integral_in_s(&self, t: S, a: S, b: S) -> Option<S> {
        match self {
            KernelFn::Const(c) => Some(*c * (b - a)),
            KernelFn::Affine { c0, ct, cs } => {
                Some((*c0 + *ct * t) * (b - a) + *cs * (b * b - a * a) * S::half())
            }
            KernelFn::Custom(_) => None,
        }
    }

    /// True when the kernel does not depend on its first argument.
    pub fn is_constant_in_t(&self) -> bool {
        match self {
            KernelFn::Const(_) => true,
            KernelFn::Affine { ct, .. } => *ct == S::zero(),
            KernelFn::Custom(_) => false,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            KernelFn::Const(c) => *c == S::zero(),
            KernelFn::Affine { c0, ct, cs } => {
                *c0 == S::zero() && *ct == S::zero() && *cs == S::zero()
            }
            KernelFn::Custom(_) => false,
        }
    }
}

impl<S: Scalar> fmt::Debug for KernelFn<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelFn::Const(c) => write!(f, "Const({c})"),
            KernelFn::Affine { c0, ct, cs } => write!(f, "Affine({c0} + {ct} t + {cs} s)"),
            KernelFn::Custom(_) => write!(f, "Custom(<fn>)"),
        }
    }
}

impl<S: Scalar> From<S> for KernelFn<S> {
    fn from(c: S) -> Self {
        KernelFn::Const(c)
    }
}
