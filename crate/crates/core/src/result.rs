//! Engine output shared by every pricer.

use serde::{Deserialize, Serialize};

use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EngineKind {
    Parallel,
    Lsm,
    FiniteDifference,
    European,
}

impl EngineKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EngineKind::Parallel => "parallel",
            EngineKind::Lsm => "lsm",
            EngineKind::FiniteDifference => "finite-difference",
            EngineKind::European => "european",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseTiming {
    pub phase: String,
    pub ms: f64,
}

/// One row of the per-iteration diagnostics stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord<T> {
    pub iteration: usize,
    /// Weighted average of all prices so far.
    pub running_price: T,
    pub running_se: T,
    /// Mean discounted payoff of this iteration's paths alone.
    pub iteration_price: T,
    /// Exercise boundary at the mid-maturity date after this iteration's solve.
    pub boundary_mid: Option<T>,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint<T> {
    pub time: T,
    pub boundary: Option<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PricingResult<T> {
    pub engine: EngineKind,
    pub price: T,
    pub standard_error: T,
    pub ci95_halfwidth: T,
    pub n_paths: u64,
    pub timings: Vec<PhaseTiming>,
    #[serde(default)]
    pub iterations: Option<Vec<IterationRecord<T>>>,
    #[serde(default)]
    pub boundary: Option<Vec<BoundaryPoint<T>>>,
    /// Echo of the configuration that produced the result, filled by callers.
    #[serde(default)]
    pub config: serde_json::Value,
}

impl<T: Real> PricingResult<T> {
    pub fn new(engine: EngineKind, price: T, standard_error: T, n_paths: u64) -> Self {
        Self {
            engine,
            price,
            standard_error,
            ci95_halfwidth: T::lit(1.96) * standard_error,
            n_paths,
            timings: Vec::new(),
            iterations: None,
            boundary: None,
            config: serde_json::Value::Null,
        }
    }

    pub fn push_timing(&mut self, phase: &str, ms: f64) {
        self.timings.push(PhaseTiming {
            phase: phase.to_owned(),
            ms,
        });
    }

    pub fn total_ms(&self) -> f64 {
        self.timings.iter().map(|t| t.ms).sum()
    }
}
