//! Scalar abstraction shared by the tree engine, the Monte Carlo backend and the
//! dual machinery.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar the engines are generic over. Implemented for `f32` and `f64`.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + LowerExp
    + Default
    + Sum
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Never fails for the two supported types.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn half() -> Self {
        Self::lit(0.5)
    }

    #[inline]
    fn two() -> Self {
        Self::lit(2.0)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// `lhs - rhs` on the extended real line with `+inf - +inf` read as zero.
///
/// Used for penalty residuals, where `+inf` means "measure outside the domain"
/// on both sides.
pub fn ext_sub<S: Scalar>(lhs: S, rhs: S) -> S {
    if lhs == S::infinity() && rhs == S::infinity() {
        S::zero()
    } else {
        lhs - rhs
    }
}
