//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating-point type the solvers are generic over.
///
/// Implemented for `f32` and `f64`. Tolerances inside the crate are expressed
/// through [`Real::tol`], so the same code tightens or relaxes with the
/// precision of the type.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Default
    + Debug
    + Display
    + LowerExp
    + Sum
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Converts an `f64` literal. Panics only if the value is not representable,
    /// which cannot happen for the finite literals used in this crate.
    #[inline]
    fn c(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    /// Converts an index or count.
    #[inline]
    fn from_usize_exact(n: usize) -> Self {
        Self::from_usize(n).expect("representable count")
    }

    /// Lossy conversion used for diagnostics and error payloads.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// `target` clamped from below by a few ulps of the type, so that
    /// tolerances written for `f64` stay meaningful for `f32`.
    #[inline]
    fn tol(target: f64) -> Self {
        Self::c(target).max(Self::epsilon() * Self::c(8.0))
    }

    /// Positive part `[x]_+`.
    #[inline]
    fn pos(self) -> Self {
        self.max(Self::zero())
    }
}

impl Real for f32 {}
impl Real for f64 {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerance_floor_tracks_precision() {
        assert_eq!(<f64 as Real>::tol(1e-10), 1e-10);
        assert!(<f32 as Real>::tol(1e-10) > 1e-7);
    }

    #[test]
    fn positive_part() {
        assert_eq!((-2.0f64).pos(), 0.0);
        assert_eq!(3.5f32.pos(), 3.5);
    }
}
