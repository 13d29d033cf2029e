//! Numeric type used for expected rewards.

use std::fmt::Debug;

use num_rational::Ratio;
use num_traits::Num;

/// Scalar type expected rewards are accumulated in. Every reward the planner
/// produces is a ratio of integers, so exact rationals work as well as
/// floating point.
pub trait Reward: Num + Copy + PartialOrd + Debug + Send + Sync + 'static {
    fn from_count(n: u64) -> Self;

    /// `numer / denom`; `denom` must be non-zero.
    fn ratio(numer: u64, denom: u64) -> Self {
        Self::from_count(numer) / Self::from_count(denom)
    }

    fn to_f64(self) -> f64;
}

impl Reward for f64 {
    fn from_count(n: u64) -> Self {
        n as f64
    }

    fn to_f64(self) -> f64 {
        self
    }
}

impl Reward for f32 {
    fn from_count(n: u64) -> Self {
        n as f32
    }

    fn to_f64(self) -> f64 {
        self as f64
    }
}

macro_rules! impl_ratio {
    ($t:ty) => {
        impl Reward for Ratio<$t> {
            fn from_count(n: u64) -> Self {
                Ratio::from_integer(n as $t)
            }

            fn ratio(numer: u64, denom: u64) -> Self {
                Ratio::new(numer as $t, denom as $t)
            }

            fn to_f64(self) -> f64 {
                *self.numer() as f64 / *self.denom() as f64
            }
        }
    };
}

impl_ratio!(i64);
impl_ratio!(i128);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_is_exact() {
        let r = <Ratio<i64> as Reward>::ratio(100 * 25, 50);
        assert_eq!(r, Ratio::from_integer(50));
        let third = <Ratio<i128> as Reward>::ratio(1, 3);
        assert_eq!(third + third + third, Ratio::from_integer(1));
        assert!((third.to_f64() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(<f64 as Reward>::ratio(1, 4), 0.25);
    }
}
