//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar the engines are written against: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + core::ops::AddAssign
    + core::ops::SubAssign
    + core::ops::MulAssign
    + core::ops::DivAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + serde::Serialize
    + serde::de::DeserializeOwned
    + 'static
{
    /// Converts an `f64` literal; lossy for `f32`.
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
        self.to_f64().expect("finite scalar")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Standard normal cumulative distribution function.
pub fn norm_cdf<T: Real>(x: T) -> T {
    use statrs::function::erf::erfc;
    T::lit(0.5 * erfc(-x.as_f64() / std::f64::consts::SQRT_2))
}

/// Inverse of the standard normal CDF, `u` in the open unit interval.
pub fn norm_inv_cdf(u: f64) -> f64 {
    use statrs::function::erf::erfc_inv;
    -std::f64::consts::SQRT_2 * erfc_inv(2.0 * u)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_reference_points() {
        assert!((norm_cdf(0.0_f64) - 0.5).abs() < 1e-15);
        // Phi(1.96) = 0.9750021048517795; the erfc behind it is good to ~1e-11.
        assert!((norm_cdf(1.96_f64) - 0.975_002_104_851_779_5).abs() < 1e-11);
        assert!((norm_cdf(-1.0_f32) - 0.158_655_25).abs() < 1e-6);
    }

    #[test]
    fn inverse_cdf_reference_points() {
        let cases = [
            (1e-12, -7.034_483_825_301_132),
            (1e-6, -4.753_424_308_822_899),
            (0.01, -2.326_347_874_040_840_8),
            (0.3, -0.524_400_512_708_040_7),
            (0.77, 0.738_846_849_185_213_7),
            (0.999, 3.090_232_306_167_813),
        ];
        for (u, x) in cases {
            assert!(
                (norm_inv_cdf(u) - x).abs() < 1e-14 * x.abs().max(1.0),
                "u={u}"
            );
        }
        assert_eq!(norm_inv_cdf(0.5), 0.0);
    }
}
