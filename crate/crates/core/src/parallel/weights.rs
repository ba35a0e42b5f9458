//! Iteration ramps for `U`/`V` and the price, and the Gaussian regression
//! weight centred on the estimated exercise boundary.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Factor applied to the accumulated `U`, `V` before adding iteration `i`:
/// `1 - λ exp(-i/μ)`.
#[inline]
pub fn weight_uv_step<T: Real>(i: usize, lambda: T, mu: T) -> T {
    T::one() - lambda * (-T::from_usize_lossy(i) / mu).exp()
}

/// Price weight of iteration `i`: `1 - ½(1 - tanh(ν(i-1)))`.
#[inline]
pub fn weight_price<T: Real>(i: usize, nu: T) -> T {
    let half = T::lit(0.5);
    T::one() - half * (T::one() - (nu * T::from_usize_lossy(i - 1)).tanh())
}

/// `exp(-(x - B)² / (2β²))`.
#[inline]
pub fn boundary_weight<T: Real>(spot: T, boundary: T, beta: T) -> T {
    let z = (spot - boundary) / beta;
    (-T::lit(0.5) * z * z).exp()
}

/// Width of the boundary weight, in price units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BetaSpec<T> {
    Scalar(T),
    PerDate(Vec<T>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightScheme<T> {
    pub lambda: T,
    pub mu: T,
    pub nu: T,
    pub beta: BetaSpec<T>,
    /// Per-iteration multiplier on β (1 disables shrinking).
    pub beta_shrink: T,
    /// Gaussian boundary weights; otherwise the in-the-money indicator.
    pub boundary_weights: bool,
}

impl<T: Real> WeightScheme<T> {
    /// λ = μ = 2, ν = 0.99, β = 0.2·K, no shrink, boundary weights on.
    pub fn for_strike(strike: T) -> Self {
        Self {
            lambda: T::lit(2.0),
            mu: T::lit(2.0),
            nu: T::lit(0.99),
            beta: BetaSpec::Scalar(T::lit(0.2) * strike),
            beta_shrink: T::one(),
            boundary_weights: true,
        }
    }

    /// All ramps off: plain accumulation, equal price weights, ITM indicator.
    pub fn flat() -> Self {
        Self {
            lambda: T::zero(),
            mu: T::one(),
            nu: T::zero(),
            beta: BetaSpec::Scalar(T::one()),
            beta_shrink: T::one(),
            boundary_weights: false,
        }
    }

    /// Checks the parameters for a run of `n_iterations` over `n_dates` dates.
    ///
    /// `w_UV(1)` is never applied (nothing is accumulated before iteration 1),
    /// so only factors `2..=n` must be non-negative.
    pub fn validate(&self, n_iterations: usize, n_dates: usize) -> Result<()> {
        let finite = |name: &'static str, x: T| {
            if x.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(name, "must be finite"))
            }
        };
        finite("lambda", self.lambda)?;
        finite("mu", self.mu)?;
        finite("nu", self.nu)?;
        finite("beta_shrink", self.beta_shrink)?;
        if self.lambda < T::zero() {
            return Err(Error::invalid("lambda", "must be >= 0"));
        }
        if !(self.mu > T::zero()) {
            return Err(Error::invalid("mu", "must be > 0"));
        }
        if self.nu < T::zero() {
            return Err(Error::invalid("nu", "must be >= 0"));
        }
        if !(self.beta_shrink > T::zero() && self.beta_shrink <= T::one()) {
            return Err(Error::invalid("beta_shrink", "must lie in (0, 1]"));
        }
        match &self.beta {
            BetaSpec::Scalar(b) => {
                if !(*b > T::zero()) || !b.is_finite() {
                    return Err(Error::invalid("beta", "must be finite and > 0"));
                }
            }
            BetaSpec::PerDate(bs) => {
                if bs.len() != n_dates {
                    return Err(Error::invalid(
                        "beta",
                        format!("{} per-date widths for {} dates", bs.len(), n_dates),
                    ));
                }
                if bs.iter().any(|b| !(*b > T::zero()) || !b.is_finite()) {
                    return Err(Error::invalid("beta", "every width must be finite and > 0"));
                }
            }
        }
        for i in 2..=n_iterations {
            let w = weight_uv_step(i, self.lambda, self.mu);
            if w < T::zero() {
                return Err(Error::invalid(
                    "lambda",
                    format!("w_UV({i}) = {w} is negative for mu = {}", self.mu),
                ));
            }
        }
        Ok(())
    }

    /// β for date `k` (0-based) in iteration `i`.
    pub fn beta_at(&self, k: usize, i: usize) -> T {
        let base = match &self.beta {
            BetaSpec::Scalar(b) => *b,
            BetaSpec::PerDate(bs) => bs[k],
        };
        base * self.beta_shrink.powi(i as i32 - 1)
    }

    /// Effective weight `w_i = Π_{j=i+1..n} w_UV(j)` carried by iteration `i`
    /// at the end of an `n`-iteration run.
    pub fn effective_uv_weight(&self, i: usize, n: usize) -> T {
        ((i + 1)..=n).fold(T::one(), |acc, j| {
            acc * weight_uv_step(j, self.lambda, self.mu)
        })
    }
}
