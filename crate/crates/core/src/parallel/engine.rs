//! Iterative pricing: each iteration values fresh paths with the previous
//! iteration's coefficients and folds them into running normal equations.
//! No path outlives the chunk that produced it.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::boundary::solve_boundary;
use super::valuation::{ExercisePolicy, PathValuer};
use super::weights::{boundary_weight, weight_price, weight_uv_step, WeightScheme};
use crate::error::{Error, Result};
use crate::market::{ExerciseSchedule, MarketParams, PathSimulator, RngStream};
use crate::product::{Payoff, PutPayoff};
use crate::regression::{
    default_ridge, solve_coefficients_parallel, BasisKind, BasisSpec, CoefficientSet,
    NormalEquations,
};
use crate::result::{BoundaryPoint, EngineKind, IterationRecord, PricingResult};
use crate::scalar::Real;

pub const DEFAULT_CHUNK_SIZE: usize = 128;

/// `n` iterations of `m` paths each.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IterationPlan {
    pub n_iterations: usize,
    pub paths_per_iteration: usize,
}

impl IterationPlan {
    pub fn new(n_iterations: usize, paths_per_iteration: usize) -> Result<Self> {
        if n_iterations == 0 {
            return Err(Error::invalid("n_iterations", "must be >= 1"));
        }
        if paths_per_iteration == 0 {
            return Err(Error::invalid("paths_per_iteration", "must be >= 1"));
        }
        Ok(Self {
            n_iterations,
            paths_per_iteration,
        })
    }

    /// Splits `n_paths` evenly over `n_iterations`.
    pub fn from_total(n_paths: usize, n_iterations: usize) -> Result<Self> {
        if n_iterations == 0 || !n_paths.is_multiple_of(n_iterations) {
            return Err(Error::invalid(
                "n_paths",
                format!("{n_paths} paths do not split evenly into {n_iterations} iterations"),
            ));
        }
        Self::new(n_iterations, n_paths / n_iterations)
    }

    pub fn total_paths(&self) -> usize {
        self.n_iterations * self.paths_per_iteration
    }

    /// Path indices of iteration `i` (1-based).
    pub fn path_range(&self, i: usize) -> std::ops::Range<u64> {
        let m = self.paths_per_iteration as u64;
        (i as u64 - 1) * m..i as u64 * m
    }
}

/// Exercise policy of the first iteration.
#[derive(Debug, Clone, PartialEq)]
pub enum Bootstrap<T> {
    /// Hold every path to maturity.
    European,
    /// Coefficients from an earlier run on the same basis layout.
    WarmStart(CoefficientSet<T>),
}

#[derive(Debug, Clone)]
pub struct ParallelConfig<T> {
    pub plan: IterationPlan,
    pub weights: WeightScheme<T>,
    pub basis: BasisKind,
    /// Consecutive exercise dates sharing one coefficient vector.
    pub group_size: usize,
    pub seed: u64,
    pub workers: usize,
    /// Paths per work unit. Partial sums are reduced in chunk order, so the
    /// result does not depend on `workers`.
    pub chunk_size: usize,
    pub ridge: T,
    pub bootstrap: Bootstrap<T>,
}

impl<T: Real> ParallelConfig<T> {
    /// Time-affine basis over groups of 10 dates, default weights.
    pub fn new(plan: IterationPlan, strike: T, seed: u64) -> Self {
        Self {
            plan,
            weights: WeightScheme::for_strike(strike),
            basis: BasisKind::TimeAffineQuadratic,
            group_size: 10,
            seed,
            workers: 1,
            chunk_size: DEFAULT_CHUNK_SIZE,
            ridge: default_ridge(),
            bootstrap: Bootstrap::European,
        }
    }

    pub fn validate(&self, n_dates: usize) -> Result<()> {
        self.weights.validate(self.plan.n_iterations, n_dates)?;
        if self.workers == 0 {
            return Err(Error::invalid("workers", "must be >= 1"));
        }
        if self.chunk_size == 0 {
            return Err(Error::invalid("chunk_size", "must be >= 1"));
        }
        if !(self.ridge >= T::zero()) || !self.ridge.is_finite() {
            return Err(Error::invalid("ridge", "must be finite and >= 0"));
        }
        Ok(())
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "n_iterations": self.plan.n_iterations,
            "paths_per_iteration": self.plan.paths_per_iteration,
            "weights": self.weights,
            "basis": self.basis,
            "group_size": self.group_size,
            "seed": self.seed,
            "workers": self.workers,
            "chunk_size": self.chunk_size,
            "ridge": self.ridge,
            "bootstrap": match self.bootstrap {
                Bootstrap::European => "european",
                Bootstrap::WarmStart(_) => "warm-start",
            },
        })
    }
}

/// Weighted price statistics across iterations.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PriceAccumulator<T> {
    /// `P̄ = Σ w̃_i Σ_j P_1^{(j)}`
    pub weighted_sum: T,
    /// `q = Σ w̃_i m_i`
    pub weight_mass: T,
    /// `q⁽²⁾ = Σ w̃_i² m_i`
    pub squared_weight_mass: T,
    /// `Σ w̃_i Σ_j (P_1^{(j)})²`
    pub weighted_square_sum: T,
}

impl<T: Real> PriceAccumulator<T> {
    pub fn add(&mut self, weight: T, sum: T, square_sum: T, n_paths: usize) {
        let m = T::from_usize_lossy(n_paths);
        self.weighted_sum += weight * sum;
        self.weight_mass += weight * m;
        self.squared_weight_mass += weight * weight * m;
        self.weighted_square_sum += weight * square_sum;
    }

    pub fn price(&self) -> T {
        self.weighted_sum / self.weight_mass
    }

    /// `sqrt(V q⁽²⁾ / q²)` with `V` the weighted payoff variance.
    pub fn standard_error(&self) -> T {
        let p = self.price();
        let var = (self.weighted_square_sum / self.weight_mass - p * p).max(T::zero());
        (var * self.squared_weight_mass).sqrt() / self.weight_mass
    }
}

/// What one iteration adds before any rescaling.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationContribution<T> {
    pub iteration: usize,
    pub normal_equations: NormalEquations<T>,
    /// `Σ P_1` over the iteration's paths, in date-1 money.
    pub payoff_sum: T,
    pub payoff_square_sum: T,
    pub n_paths: usize,
}

/// Stateful driver; [`price_parallel`] runs it to completion.
#[derive(Debug)]
pub struct ParallelPricer<T: Real> {
    params: MarketParams<T>,
    schedule: ExerciseSchedule<T>,
    config: ParallelConfig<T>,
    payoff: PutPayoff<T>,
    simulator: PathSimulator<T>,
    valuer: PathValuer<T>,
    normal_equations: NormalEquations<T>,
    coefficients: CoefficientSet<T>,
    boundaries: Vec<Option<T>>,
    prices: PriceAccumulator<T>,
    records: Vec<IterationRecord<T>>,
    completed: usize,
    ms_paths: f64,
    ms_regression: f64,
    ms_boundary: f64,
}

impl<T: Real> ParallelPricer<T> {
    pub fn new(
        params: &MarketParams<T>,
        schedule: &ExerciseSchedule<T>,
        config: ParallelConfig<T>,
    ) -> Result<Self> {
        params.validate()?;
        config.validate(schedule.len())?;
        if (schedule.maturity() - params.maturity).abs() > T::lit(1e-12) * params.maturity {
            return Err(Error::invalid(
                "schedule",
                "last date must equal the maturity",
            ));
        }
        let spec = BasisSpec::new(config.basis, config.group_size, schedule)?;
        let payoff = PutPayoff::new(params.strike)?;
        let coefficients = match &config.bootstrap {
            Bootstrap::European => CoefficientSet::bootstrap(&spec),
            Bootstrap::WarmStart(c) => {
                c.check_matches(&spec)?;
                c.clone()
            }
        };
        let mut pricer = Self {
            params: *params,
            schedule: schedule.clone(),
            payoff,
            simulator: PathSimulator::new(params, schedule),
            valuer: PathValuer::new(schedule, params.rate, spec.clone()),
            normal_equations: NormalEquations::zeros(&spec),
            coefficients,
            boundaries: vec![None; schedule.len()],
            prices: PriceAccumulator::default(),
            records: Vec::with_capacity(config.plan.n_iterations),
            completed: 0,
            config,
            ms_paths: 0.0,
            ms_regression: 0.0,
            ms_boundary: 0.0,
        };
        pricer.refresh_boundaries();
        Ok(pricer)
    }

    pub fn spec(&self) -> &BasisSpec<T> {
        self.valuer.spec()
    }

    pub fn coefficients(&self) -> &CoefficientSet<T> {
        &self.coefficients
    }

    pub fn normal_equations(&self) -> &NormalEquations<T> {
        &self.normal_equations
    }

    pub fn boundaries(&self) -> &[Option<T>] {
        &self.boundaries
    }

    pub fn records(&self) -> &[IterationRecord<T>] {
        &self.records
    }

    pub fn completed_iterations(&self) -> usize {
        self.completed
    }

    /// Date-1 price and standard error so far, before discounting to time 0.
    pub fn price_accumulator(&self) -> &PriceAccumulator<T> {
        &self.prices
    }

    fn boundary_weights_active(&self) -> bool {
        self.config.weights.boundary_weights && !self.coefficients.is_bootstrap()
    }

    fn refresh_boundaries(&mut self) {
        if self.coefficients.is_bootstrap() {
            return;
        }
        let spec = self.valuer.spec();
        self.boundaries = (0..self.schedule.len())
            .map(|k| solve_boundary(&self.coefficients, spec, &self.payoff, k))
            .collect();
    }

    /// Values iteration `i`'s paths with the current coefficients and returns
    /// their unscaled contribution. Runs on the current rayon pool.
    pub fn run_iteration(&self, i: usize) -> IterationContribution<T> {
        let range = self.config.plan.path_range(i);
        let chunk = self.config.chunk_size as u64;
        let n_chunks = (range.end - range.start).div_ceil(chunk);
        let policy = if self.coefficients.is_bootstrap() {
            ExercisePolicy::HoldToMaturity
        } else {
            ExercisePolicy::Regression(&self.coefficients)
        };
        let betas: Option<Vec<T>> = self.boundary_weights_active().then(|| {
            (0..self.schedule.len())
                .map(|k| self.config.weights.beta_at(k, i))
                .collect()
        });
        let partials: Vec<Partial<T>> = (0..n_chunks)
            .into_par_iter()
            .map(|c| {
                let start = range.start + c * chunk;
                let end = (start + chunk).min(range.end);
                self.value_chunk(start..end, policy, betas.as_deref())
            })
            .collect();

        let mut total = Partial::zeros(self.valuer.spec());
        for p in &partials {
            total.merge(p);
        }
        IterationContribution {
            iteration: i,
            normal_equations: total.normal_equations,
            payoff_sum: total.payoff_sum,
            payoff_square_sum: total.payoff_square_sum,
            n_paths: (range.end - range.start) as usize,
        }
    }

    fn value_chunk(
        &self,
        paths: std::ops::Range<u64>,
        policy: ExercisePolicy<'_, T>,
        betas: Option<&[T]>,
    ) -> Partial<T> {
        let spec = self.valuer.spec();
        let m = self.schedule.len();
        let dim = spec.block_dim();
        let mut out = Partial::zeros(spec);
        let mut states = vec![T::zero(); m];
        let mut continuation = vec![T::zero(); m];
        let mut f = [T::zero(); 6];
        for j in paths {
            self.simulator
                .simulate_into(RngStream::new(self.config.seed, j), &mut states);
            let p1 = self
                .valuer
                .value_into(&states, policy, &self.payoff, &mut continuation, None);
            out.payoff_sum += p1;
            out.payoff_square_sum += p1 * p1;
            for k in 0..m - 1 {
                let x = states[k];
                let w = match (betas, self.boundaries[k]) {
                    (Some(b), Some(boundary)) => boundary_weight(x, boundary, b[k]),
                    _ if self.payoff.in_the_money(x) => T::one(),
                    _ => T::zero(),
                };
                if w > T::zero() {
                    spec.fill(x, spec.date_time(k), &mut f[..dim]);
                    out.normal_equations.accumulate_fast(
                        spec.block_of_date(k),
                        w,
                        &f[..dim],
                        continuation[k],
                    );
                }
            }
        }
        out
    }

    /// Rescales the running normal equations, adds `contribution`, re-solves,
    /// and updates boundaries and the price.
    pub fn absorb(
        &mut self,
        contribution: IterationContribution<T>,
    ) -> Result<&IterationRecord<T>> {
        let i = contribution.iteration;
        let started = Instant::now();

        let t = Instant::now();
        if i >= 2 {
            let w = weight_uv_step(i, self.config.weights.lambda, self.config.weights.mu);
            self.normal_equations.scale(w);
        }
        self.normal_equations
            .merge(&contribution.normal_equations)?;
        let solved = solve_coefficients_parallel(
            &self.normal_equations,
            self.valuer.spec(),
            self.config.ridge,
        )?;
        for (old, new) in self.coefficients.blocks.iter_mut().zip(solved.blocks) {
            if new.is_some() {
                *old = new;
            }
        }
        self.ms_regression += ms_since(t);

        let t = Instant::now();
        self.refresh_boundaries();
        self.ms_boundary += ms_since(t);

        let w_price = weight_price(i, self.config.weights.nu);
        self.prices.add(
            w_price,
            contribution.payoff_sum,
            contribution.payoff_square_sum,
            contribution.n_paths,
        );
        self.completed = i;

        let d0 = self.valuer.first_discount();
        let mid = self.schedule.len().div_ceil(2) - 1;
        self.records.push(IterationRecord {
            iteration: i,
            running_price: d0 * self.prices.price(),
            running_se: d0 * self.prices.standard_error(),
            iteration_price: d0 * contribution.payoff_sum
                / T::from_usize_lossy(contribution.n_paths),
            boundary_mid: self.boundaries[mid],
            wall_ms: ms_since(started),
        });
        Ok(self.records.last().expect("just pushed"))
    }

    /// Runs and absorbs the next iteration.
    pub fn step(&mut self) -> Result<&IterationRecord<T>> {
        let i = self.completed + 1;
        let t = Instant::now();
        let contribution = self.run_iteration(i);
        let ms = ms_since(t);
        self.ms_paths += ms;
        self.absorb(contribution)?;
        let record = self.records.last_mut().expect("just pushed");
        record.wall_ms += ms;
        Ok(record)
    }

    /// Runs the remaining iterations on a dedicated pool of `workers` threads.
    pub fn run(mut self) -> Result<ParallelRun<T>> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.config.workers)
            .build()
            .map_err(|e| Error::invalid("workers", e.to_string()))?;
        pool.install(|| -> Result<()> {
            while self.completed < self.config.plan.n_iterations {
                self.step()?;
            }
            Ok(())
        })?;
        self.finish()
    }

    fn finish(self) -> Result<ParallelRun<T>> {
        if self.schedule.len() > 1 && self.normal_equations.is_empty() {
            return Err(Error::EmptyRegression);
        }
        let d0 = self.valuer.first_discount();
        let mut result = PricingResult::new(
            EngineKind::Parallel,
            d0 * self.prices.price(),
            d0 * self.prices.standard_error(),
            (self.completed * self.config.plan.paths_per_iteration) as u64,
        );
        result.push_timing("paths", self.ms_paths);
        result.push_timing("regression", self.ms_regression);
        result.push_timing("boundary", self.ms_boundary);
        result.iterations = Some(self.records);
        result.boundary = Some(
            self.boundaries
                .iter()
                .zip(self.schedule.dates())
                .map(|(&boundary, &time)| BoundaryPoint { time, boundary })
                .collect(),
        );
        result.config = self.config.to_json();
        Ok(ParallelRun {
            result,
            coefficients: self.coefficients,
            normal_equations: self.normal_equations,
            boundaries: self.boundaries,
        })
    }

    pub fn params(&self) -> &MarketParams<T> {
        &self.params
    }
}

fn ms_since(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// A chunk's private sums.
struct Partial<T> {
    normal_equations: NormalEquations<T>,
    payoff_sum: T,
    payoff_square_sum: T,
}

impl<T: Real> Partial<T> {
    fn zeros(spec: &BasisSpec<T>) -> Self {
        Self {
            normal_equations: NormalEquations::zeros(spec),
            payoff_sum: T::zero(),
            payoff_square_sum: T::zero(),
        }
    }

    fn merge(&mut self, other: &Self) {
        self.normal_equations
            .merge(&other.normal_equations)
            .expect("chunks share one layout");
        self.payoff_sum += other.payoff_sum;
        self.payoff_square_sum += other.payoff_square_sum;
    }
}

/// Final state of a run, kept for warm starts and inspection.
#[derive(Debug, Clone)]
pub struct ParallelRun<T> {
    pub result: PricingResult<T>,
    pub coefficients: CoefficientSet<T>,
    pub normal_equations: NormalEquations<T>,
    pub boundaries: Vec<Option<T>>,
}

pub fn price_parallel<T: Real>(
    params: &MarketParams<T>,
    schedule: &ExerciseSchedule<T>,
    config: ParallelConfig<T>,
) -> Result<ParallelRun<T>> {
    ParallelPricer::new(params, schedule, config)?.run()
}
