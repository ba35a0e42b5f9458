//! American option pricing by least-squares Monte Carlo.
//!
//! Engines are generic over the scalar (`f32` or `f64`); the aliases below
//! fix it for callers that do not care.

// `!(x > 0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod error;
pub mod lsm;
pub mod market;
pub mod oracle;
pub mod parallel;
pub mod product;
pub mod regression;
pub mod result;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

pub type MarketParamsF64 = market::MarketParams<f64>;
pub type MarketParamsF32 = market::MarketParams<f32>;
pub type ExerciseScheduleF64 = market::ExerciseSchedule<f64>;
pub type ExerciseScheduleF32 = market::ExerciseSchedule<f32>;
pub type PutPayoffF64 = product::PutPayoff<f64>;
pub type BasisSpecF64 = regression::BasisSpec<f64>;
pub type NormalEquationsF64 = regression::NormalEquations<f64>;
pub type CoefficientSetF64 = regression::CoefficientSet<f64>;
pub type WeightSchemeF64 = parallel::WeightScheme<f64>;
pub type ParallelConfigF64 = parallel::ParallelConfig<f64>;
pub type ParallelConfigF32 = parallel::ParallelConfig<f32>;
pub type LsmConfigF64 = lsm::LsmConfig<f64>;
pub type FdGridF64 = oracle::FdGrid<f64>;
pub type PricingResultF64 = result::PricingResult<f64>;
pub type PricingResultF32 = result::PricingResult<f32>;
