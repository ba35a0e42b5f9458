//! Longstaff-Schwartz baseline: store every path, then one backward
//! regression per exercise date on in-the-money paths.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::market::{discount, ExerciseSchedule, MarketParams, PathSimulator, RngStream};
use crate::product::{Payoff, PutPayoff};
use crate::regression::{default_ridge, solve_block, BasisSpec, NormalEquations};
use crate::result::{EngineKind, PricingResult};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct LsmConfig<T> {
    pub n_paths: usize,
    pub seed: u64,
    pub ridge: T,
    /// Generate paths on a pool of `workers` threads; the backward pass is
    /// always sequential.
    pub parallel_paths: bool,
    pub workers: usize,
}

impl<T: Real> LsmConfig<T> {
    pub fn new(n_paths: usize, seed: u64) -> Self {
        Self {
            n_paths,
            seed,
            ridge: default_ridge(),
            parallel_paths: false,
            workers: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        // Three basis functions need at least three paths.
        if self.n_paths < 3 {
            return Err(Error::invalid("n_paths", "must be >= 3"));
        }
        if self.workers == 0 {
            return Err(Error::invalid("workers", "must be >= 1"));
        }
        if !(self.ridge >= T::zero()) || !self.ridge.is_finite() {
            return Err(Error::invalid("ridge", "must be finite and >= 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct LsmRun<T> {
    pub result: PricingResult<T>,
    /// `α_k` per date (0-based); `None` at maturity and at dates with no
    /// in-the-money path.
    pub coefficients: Vec<Option<Vec<T>>>,
    pub dates: Vec<T>,
}

impl<T: Real> LsmRun<T> {
    /// `date,time,a0,a1,a2`; dates start at 1. Dates without a fit are skipped.
    pub fn write_coefficients_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["date", "time", "a0", "a1", "a2"])?;
        for (k, (alpha, t)) in self.coefficients.iter().zip(&self.dates).enumerate() {
            if let Some(a) = alpha {
                let mut row = vec![(k + 1).to_string(), t.to_string()];
                row.extend(a.iter().map(|x| x.to_string()));
                w.write_record(&row)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

fn simulate_all<T: Real>(
    sim: &PathSimulator<T>,
    seed: u64,
    paths: &mut [T],
    m: usize,
    parallel: bool,
) {
    let fill = |(j, row): (usize, &mut [T])| sim.simulate_into(RngStream::new(seed, j as u64), row);
    if parallel {
        paths.par_chunks_mut(m).enumerate().for_each(fill);
    } else {
        paths.chunks_mut(m).enumerate().for_each(fill);
    }
}

pub fn price_lsm<T: Real>(
    params: &MarketParams<T>,
    schedule: &ExerciseSchedule<T>,
    config: &LsmConfig<T>,
) -> Result<LsmRun<T>> {
    params.validate()?;
    config.validate()?;
    let n = config.n_paths;
    let m = schedule.len();
    let payoff = PutPayoff::new(params.strike)?;
    let spec = BasisSpec::per_date(schedule);

    let t = Instant::now();
    let sim = PathSimulator::new(params, schedule);
    let mut paths = vec![T::zero(); n * m];
    if config.parallel_paths {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
            .map_err(|e| Error::invalid("workers", e.to_string()))?;
        pool.install(|| simulate_all(&sim, config.seed, &mut paths, m, true));
    } else {
        simulate_all(&sim, config.seed, &mut paths, m, false);
    }
    let ms_sim = t.elapsed().as_secs_f64() * 1e3;

    let t = Instant::now();
    let mut value: Vec<T> = (0..n)
        .map(|j| payoff.exercise_value(paths[j * m + m - 1]))
        .collect();
    let mut ne = NormalEquations::zeros(&spec);
    let mut coefficients = vec![None; m];
    let mut f = [T::zero(); 3];
    for k in (0..m.saturating_sub(1)).rev() {
        let d = discount(params.rate, schedule.time(k), schedule.time(k + 1));
        let time = schedule.time(k);
        for v in value.iter_mut() {
            *v *= d;
        }
        for j in 0..n {
            let x = paths[j * m + k];
            if payoff.in_the_money(x) {
                spec.fill(x, time, &mut f);
                ne.accumulate_fast(k, T::one(), &f, value[j]);
            }
        }
        let alpha = solve_block(k, ne.block(k), config.ridge)
            .map_err(|_| Error::DegenerateDate { date: k + 1 })?;
        let Some(alpha) = alpha else { continue };
        for j in 0..n {
            let x = paths[j * m + k];
            if payoff.in_the_money(x) {
                let c = alpha[0] + alpha[1] * x + alpha[2] * x * x;
                let exercise = payoff.exercise_value(x);
                if exercise >= c {
                    value[j] = exercise;
                }
            }
        }
        coefficients[k] = Some(alpha);
    }
    let ms_reg = t.elapsed().as_secs_f64() * 1e3;

    let nf = T::from_usize_lossy(n);
    let mean = value.iter().copied().sum::<T>() / nf;
    let var = value.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() / (nf - T::one());
    let d0 = discount(params.rate, T::zero(), schedule.time(0));
    let mut result =
        PricingResult::new(EngineKind::Lsm, d0 * mean, d0 * (var / nf).sqrt(), n as u64);
    result.push_timing("simulation", ms_sim);
    result.push_timing("regression", ms_reg);
    result.config = serde_json::json!({
        "n_paths": n,
        "seed": config.seed,
        "ridge": config.ridge,
        "parallel_paths": config.parallel_paths,
        "workers": config.workers,
    });
    Ok(LsmRun {
        result,
        coefficients,
        dates: schedule.dates().to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::european_put_closed_form;

    fn base_case(n: usize) -> (MarketParams<f64>, ExerciseSchedule<f64>, LsmConfig<f64>) {
        let p = MarketParams::new(36.0, 0.06, 0.2, 40.0, 1.0).unwrap();
        let s = ExerciseSchedule::per_year(1.0, 50).unwrap();
        (p, s, LsmConfig::new(n, 11))
    }

    #[test]
    fn single_date_is_european() {
        let (p, _, c) = base_case(50_000);
        let s = ExerciseSchedule::uniform(1.0, 1).unwrap();
        let run = price_lsm(&p, &s, &c).unwrap();
        let euro = european_put_closed_form(&p);
        let r = run.result;
        assert!(
            (r.price - euro).abs() < 3.0 * r.standard_error,
            "{} vs {euro}",
            r.price
        );
        assert_eq!(run.coefficients, vec![None]);
    }

    #[test]
    fn parallel_generation_is_identical() {
        let (p, s, mut c) = base_case(2_000);
        let a = price_lsm(&p, &s, &c).unwrap();
        c.parallel_paths = true;
        c.workers = 3;
        let b = price_lsm(&p, &s, &c).unwrap();
        assert_eq!(a.result.price.to_bits(), b.result.price.to_bits());
        assert_eq!(a.coefficients, b.coefficients);
    }

    #[test]
    fn deep_otm_dates_are_skipped() {
        // Spot far above the strike: no path is in the money early on.
        let p = MarketParams::new(400.0, 0.06, 0.05, 40.0, 0.2).unwrap();
        let s = ExerciseSchedule::per_year(0.2, 50).unwrap();
        let run = price_lsm(&p, &s, &LsmConfig::new(500, 1)).unwrap();
        assert_eq!(run.result.price, 0.0);
        assert!(run.coefficients.iter().all(Option::is_none));
    }

    #[test]
    fn coefficient_csv() {
        let (p, s, c) = base_case(2_000);
        let run = price_lsm(&p, &s, &c).unwrap();
        let mut buf = Vec::new();
        run.write_coefficients_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("date,time,a0,a1,a2"));
        assert_eq!(lines.count(), 49);
    }

    #[test]
    fn too_few_paths() {
        let (p, s, _) = base_case(0);
        assert!(price_lsm(&p, &s, &LsmConfig::new(2, 0))
            .unwrap_err()
            .is_configuration());
    }
}
