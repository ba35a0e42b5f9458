//! Iterative parallel least-squares pricer.

pub mod boundary;
pub mod engine;
pub mod valuation;
pub mod weights;

pub use boundary::solve_boundary;
pub use engine::{
    price_parallel, Bootstrap, IterationContribution, IterationPlan, ParallelConfig,
    ParallelPricer, ParallelRun, PriceAccumulator, DEFAULT_CHUNK_SIZE,
};
pub use valuation::{decide_and_value_path, ExercisePolicy, PathValuation, PathValuer};
pub use weights::{boundary_weight, weight_price, weight_uv_step, BetaSpec, WeightScheme};
