//! Numeric abstraction for the aggregation math.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point scalar the aggregation strategies are generic over: `f32` or `f64`.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` constant. Every `Float` type accepts any finite `f64`.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("finite f64 constant converts to scalar")
    }

    #[inline]
    fn of_u32(v: u32) -> Self {
        Self::from_u32(v).expect("u32 converts to scalar")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Scalar for T where
    T: Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Send + Sync + 'static
{
}

/// Round half away from zero to the nearest integer.
#[inline]
pub fn round_half_up<T: Scalar>(x: T) -> T {
    let half = T::lit(0.5);
    if x >= T::zero() {
        (x + half).floor()
    } else {
        -((-x) + half).floor()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounds_half_away_from_zero() {
        assert_eq!(round_half_up(6.5_f64), 7.0);
        assert_eq!(round_half_up(6.49_f64), 6.0);
        assert_eq!(round_half_up(-2.5_f64), -3.0);
        assert_eq!(round_half_up(8.5_f32), 9.0);
    }
}
