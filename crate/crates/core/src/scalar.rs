//! Floating point scalar abstraction shared by every numeric routine.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point type the probability and region code is generic over.
///
/// Each implementation fixes the numerical tolerances that make sense for its
/// precision. The `f64` values are the reference ones; `f32` loosens them to
/// what single precision can actually resolve.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Allowed deviation of a table (or conditional slice) total from one.
    const NORM_TOL: f64;
    /// Negative mutual information above `-CLAMP_TOL` is rounded to zero.
    const CLAMP_TOL: f64;
    /// Per-coordinate slack used by dominance tests.
    const SLACK: f64;
    /// Phase-one objective below which a linear system counts as feasible.
    const FEAS_TOL: f64;
    /// Magnitude below which a pivot candidate is treated as zero.
    const PIVOT_TOL: f64;

    /// Converts an `f64` literal. Never fails for finite inputs.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 converts to every Scalar")
    }

    #[inline]
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize converts to every Scalar")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("Scalar converts to f64")
    }

    #[inline]
    fn norm_tol() -> Self {
        Self::of(Self::NORM_TOL)
    }

    #[inline]
    fn clamp_tol() -> Self {
        Self::of(Self::CLAMP_TOL)
    }

    #[inline]
    fn slack() -> Self {
        Self::of(Self::SLACK)
    }

    #[inline]
    fn feas_tol() -> Self {
        Self::of(Self::FEAS_TOL)
    }

    #[inline]
    fn pivot_tol() -> Self {
        Self::of(Self::PIVOT_TOL)
    }
}

impl Scalar for f64 {
    const NORM_TOL: f64 = 1e-12;
    const CLAMP_TOL: f64 = 1e-9;
    const SLACK: f64 = 1e-9;
    const FEAS_TOL: f64 = 1e-9;
    const PIVOT_TOL: f64 = 1e-12;
}

impl Scalar for f32 {
    const NORM_TOL: f64 = 1e-5;
    const CLAMP_TOL: f64 = 1e-4;
    const SLACK: f64 = 1e-5;
    const FEAS_TOL: f64 = 1e-5;
    const PIVOT_TOL: f64 = 1e-7;
}

/// `-p log2 p` with the convention `0 log 0 = 0`.
#[inline]
pub fn plogp<T: Scalar>(p: T) -> T {
    if p > T::zero() {
        -p * p.log2()
    } else {
        T::zero()
    }
}

/// Binary entropy in bits.
pub fn binary_entropy<T: Scalar>(p: T) -> T {
    plogp(p) + plogp(T::one() - p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_entropy_closed_form() {
        let p = 0.11_f64;
        let expect = -p * p.log2() - (1.0 - p) * (1.0 - p).log2();
        assert!((binary_entropy(p) - expect).abs() < 1e-15);
        assert!((binary_entropy(0.11_f64) - 0.499_915_958).abs() < 1e-6);
        assert_eq!(binary_entropy(0.0_f64), 0.0);
        assert_eq!(binary_entropy(1.0_f64), 0.0);
        assert!((binary_entropy(0.5_f32) - 1.0).abs() < 1e-6);
    }
}
