//! Exercise payoffs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// What an engine needs from a product: the cash flow on exercise and
/// whether exercising is worth considering at all.
pub trait Payoff<T: Real>: Sync {
    fn exercise_value(&self, spot: T) -> T;

    /// Strictly positive exercise value; at-the-money is not in the money.
    fn in_the_money(&self, spot: T) -> bool {
        self.exercise_value(spot) > T::zero()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PutPayoff<T> {
    pub strike: T,
}

impl<T: Real> PutPayoff<T> {
    pub fn new(strike: T) -> Result<Self> {
        if !(strike > T::zero()) || !strike.is_finite() {
            return Err(Error::invalid("strike", "must be finite and > 0"));
        }
        Ok(Self { strike })
    }
}

impl<T: Real> Payoff<T> for PutPayoff<T> {
    #[inline]
    fn exercise_value(&self, spot: T) -> T {
        (self.strike - spot).max(T::zero())
    }

    #[inline]
    fn in_the_money(&self, spot: T) -> bool {
        spot < self.strike
    }
}
