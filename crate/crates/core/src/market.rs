//! Black-Scholes world and path simulation on the exercise-date grid.
//!
//! Every normal variate is keyed by `(master_seed, path_index, step_index)`:
//! path `j` uses ChaCha8 stream `j` and draws its `k`-th uniform from word
//! `k` of that stream. Which worker simulates a path, and in which order,
//! therefore never changes its values.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{norm_inv_cdf, Real};

/// Spot, rate, volatility and the put's contract terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketParams<T> {
    pub spot: T,
    pub rate: T,
    pub vol: T,
    pub strike: T,
    pub maturity: T,
}

impl<T: Real> MarketParams<T> {
    pub fn new(spot: T, rate: T, vol: T, strike: T, maturity: T) -> Result<Self> {
        let p = Self {
            spot,
            rate,
            vol,
            strike,
            maturity,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.spot > T::zero()) || !self.spot.is_finite() {
            return Err(Error::invalid("spot", "must be finite and > 0"));
        }
        if !self.rate.is_finite() {
            return Err(Error::invalid("rate", "must be finite"));
        }
        if !(self.vol >= T::zero()) || !self.vol.is_finite() {
            return Err(Error::invalid("vol", "must be finite and >= 0"));
        }
        if !(self.strike > T::zero()) || !self.strike.is_finite() {
            return Err(Error::invalid("strike", "must be finite and > 0"));
        }
        if !(self.maturity > T::zero()) || !self.maturity.is_finite() {
            return Err(Error::invalid("maturity", "must be finite and > 0"));
        }
        Ok(())
    }
}

/// Exercise dates `t_1 < ... < t_M = T`; `t_0 = 0` is the valuation date and
/// not an exercise opportunity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExerciseSchedule<T> {
    dates: Vec<T>,
}

impl<T: Real> ExerciseSchedule<T> {
    /// `t_k = k * maturity / count` for `k = 1..=count`.
    pub fn uniform(maturity: T, count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::invalid("dates", "need at least one exercise date"));
        }
        let m = T::from_usize_lossy(count);
        let mut dates: Vec<T> = (1..=count)
            .map(|k| T::from_usize_lossy(k) * maturity / m)
            .collect();
        dates[count - 1] = maturity;
        Self::from_dates(dates, maturity)
    }

    /// `round(dates_per_year * maturity)` equally spaced dates, at least one.
    pub fn per_year(maturity: T, dates_per_year: usize) -> Result<Self> {
        let count = (T::from_usize_lossy(dates_per_year) * maturity)
            .round()
            .to_usize()
            .unwrap_or(0)
            .max(1);
        Self::uniform(maturity, count)
    }

    pub fn from_dates(dates: Vec<T>, maturity: T) -> Result<Self> {
        if dates.is_empty() {
            return Err(Error::invalid("dates", "need at least one exercise date"));
        }
        if !(dates[0] > T::zero()) {
            return Err(Error::invalid("dates", "first exercise date must be > 0"));
        }
        if dates.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("dates", "must be strictly increasing"));
        }
        if *dates.last().unwrap() != maturity {
            return Err(Error::invalid("dates", "last date must equal maturity"));
        }
        Ok(Self { dates })
    }

    pub fn dates(&self) -> &[T] {
        &self.dates
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn maturity(&self) -> T {
        *self.dates.last().unwrap()
    }

    /// Time of date `k` (0-based), with `time(-1)` conceptually `0`.
    pub fn time(&self, k: usize) -> T {
        self.dates[k]
    }

    fn step(&self, k: usize) -> T {
        if k == 0 {
            self.dates[0]
        } else {
            self.dates[k] - self.dates[k - 1]
        }
    }
}

/// State values of one simulated path at each exercise date.
#[derive(Debug, Clone, PartialEq)]
pub struct PathGrid<T> {
    pub path_index: u64,
    pub values: Vec<T>,
}

/// Identifies the random stream of a single path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub master_seed: u64,
    pub path_index: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, path_index: u64) -> Self {
        Self {
            master_seed,
            path_index,
        }
    }

    fn generator(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.path_index);
        rng
    }

    /// Uniforms in the open interval (0, 1), one per 64-bit word.
    pub fn uniforms(&self) -> impl Iterator<Item = f64> {
        let mut rng = self.generator();
        std::iter::repeat_with(move || {
            ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0)
        })
    }

    /// Standard normals by inversion, one uniform each.
    pub fn normals(&self) -> impl Iterator<Item = f64> {
        self.uniforms().map(norm_inv_cdf)
    }
}

/// Precomputed exact lognormal step coefficients for a schedule.
#[derive(Debug, Clone)]
pub struct PathSimulator<T> {
    log_spot: T,
    drift: Vec<T>,
    diffusion: Vec<T>,
}

impl<T: Real> PathSimulator<T> {
    pub fn new(params: &MarketParams<T>, schedule: &ExerciseSchedule<T>) -> Self {
        let half = T::lit(0.5);
        let mu = params.rate - half * params.vol * params.vol;
        let (drift, diffusion) = (0..schedule.len())
            .map(|k| {
                let dt = schedule.step(k);
                (mu * dt, params.vol * dt.sqrt())
            })
            .unzip();
        Self {
            log_spot: params.spot.ln(),
            drift,
            diffusion,
        }
    }

    pub fn n_dates(&self) -> usize {
        self.drift.len()
    }

    /// Fills `out` (length M) with the path's state at each exercise date.
    pub fn simulate_into(&self, stream: RngStream, out: &mut [T]) {
        debug_assert_eq!(out.len(), self.drift.len());
        let mut log_x = self.log_spot;
        for (((x, &a), &b), z) in out
            .iter_mut()
            .zip(&self.drift)
            .zip(&self.diffusion)
            .zip(stream.normals())
        {
            log_x += a + b * T::lit(z);
            *x = log_x.exp();
        }
    }
}

pub fn simulate_path<T: Real>(
    params: &MarketParams<T>,
    schedule: &ExerciseSchedule<T>,
    stream: RngStream,
) -> PathGrid<T> {
    let sim = PathSimulator::new(params, schedule);
    let mut values = vec![T::zero(); schedule.len()];
    sim.simulate_into(stream, &mut values);
    PathGrid {
        path_index: stream.path_index,
        values,
    }
}

/// `exp(-rate * (t2 - t1))`.
#[inline]
pub fn discount<T: Real>(rate: T, t1: T, t2: T) -> T {
    debug_assert!(t2 >= t1);
    (-rate * (t2 - t1)).exp()
}
