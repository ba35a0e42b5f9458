use amc_core::diagnostics::{
    estimate_rate, run_convergence_study, summarize, ConvergenceStudy, SeSource, StudyAxis,
};
use amc_core::market::{ExerciseSchedule, MarketParams};
use amc_core::parallel::{IterationPlan, ParallelConfig};

#[test]
fn internal_error_shrinks_like_inverse_root_n() {
    let p = MarketParams::new(36.0, 0.06, 0.2, 40.0, 1.0).unwrap();
    let s = ExerciseSchedule::per_year(1.0, 50).unwrap();
    let base = ParallelConfig::new(IterationPlan::new(10, 400).unwrap(), 40.0, 0);
    let study =
        ConvergenceStudy::new(StudyAxis::Paths, vec![4000, 16_000, 64_000], 3, 100).unwrap();
    let study = run_convergence_study(study, &p, &s, &base).unwrap();
    assert_eq!(study.rows.len(), 9);
    assert!(study.traces.iter().all(|t| t.len() == 10));
    let rate = estimate_rate(&study, SeSource::Internal).unwrap();
    assert!((rate.slope + 0.5).abs() < 0.1, "{rate:?}");
    let summary = summarize(&study);
    assert_eq!(summary.len(), 3);
    assert!(summary.iter().all(|p| (p.mean_price - 4.45).abs() < 0.2));

    let mut buf = Vec::new();
    study.write_csv(&mut buf).unwrap();
    assert_eq!(
        ConvergenceStudy::read_rows(buf.as_slice()).unwrap(),
        study.rows
    );
}

#[test]
fn workers_axis_repeats_the_same_price() {
    let p = MarketParams::new(40.0, 0.06, 0.2, 40.0, 1.0).unwrap();
    let s = ExerciseSchedule::per_year(1.0, 50).unwrap();
    let base = ParallelConfig::new(IterationPlan::new(4, 512).unwrap(), 40.0, 0);
    let study = ConvergenceStudy::new(StudyAxis::Workers, vec![1, 2, 3], 1, 5).unwrap();
    let study = run_convergence_study(study, &p, &s, &base).unwrap();
    assert!(study
        .rows
        .iter()
        .all(|r| r.price.to_bits() == study.rows[0].price.to_bits()));
}
