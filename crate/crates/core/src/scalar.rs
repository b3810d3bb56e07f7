//! Numeric traits the solvers are generic over.
//!
//! [`Scalar`] is enough for backward induction and validation, and is met by
//! `f32`, `f64` and the exact rationals of `num-rational`. [`Real`] adds the
//! transcendental and ordering helpers needed by the long-run solvers.

use std::fmt::Debug;

use num_rational::Ratio;
use num_traits::{Float, FromPrimitive, Num, NumAssign, Signed, ToPrimitive};

/// Field-like scalar used for probabilities, rewards and values.
pub trait Scalar:
    Num + NumAssign + Signed + Copy + PartialOrd + FromPrimitive + ToPrimitive + Debug + Send + Sync + 'static
{
    /// Tolerance used when checking that a transition row sums to one.
    fn stochastic_tolerance() -> Self;

    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    /// Lossy conversion for reporting.
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

/// Floating-point scalar.
pub trait Real: Scalar + Float {
    /// Slack applied to `>=` comparisons between independently computed values.
    fn comparison_slack() -> Self;

    fn from_f64_lossy(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("finite f64 representable")
    }
}

impl Scalar for f64 {
    fn stochastic_tolerance() -> Self {
        1e-9
    }
}

impl Scalar for f32 {
    // 1e-9 is below f32 resolution around 1.0.
    fn stochastic_tolerance() -> Self {
        1e-6
    }
}

impl Real for f64 {
    fn comparison_slack() -> Self {
        1e-9
    }
}

impl Real for f32 {
    fn comparison_slack() -> Self {
        1e-5
    }
}

impl Scalar for Ratio<i64> {
    fn stochastic_tolerance() -> Self {
        Ratio::from_integer(0)
    }
}

impl Scalar for Ratio<i128> {
    fn stochastic_tolerance() -> Self {
        Ratio::from_integer(0)
    }
}
