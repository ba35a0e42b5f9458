use amc_core::market::{simulate_path, ExerciseSchedule, MarketParams, RngStream};
use amc_core::parallel::{decide_and_value_path, ExercisePolicy};
use amc_core::product::{Payoff, PutPayoff};
use amc_core::regression::{BasisKind, BasisSpec, CoefficientSet};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

/// Coefficients that put `Ĉ` near the payoff scale so both decisions occur.
fn random_coefficients(spec: &BasisSpec<f64>, rng: &mut ChaCha8Rng) -> CoefficientSet<f64> {
    let dim = spec.block_dim();
    let blocks = (0..spec.n_blocks())
        .map(|_| {
            if unit(rng) < 0.15 {
                return None;
            }
            let mut a = vec![0.0; dim];
            a[0] = 2.0 + 6.0 * unit(rng);
            a[1] = -0.05 * unit(rng);
            a[2] = 0.002 * (unit(rng) - 0.5);
            if dim == 6 {
                a[3] = unit(rng) - 0.5;
            }
            Some(a)
        })
        .collect();
    CoefficientSet {
        fingerprint: spec.fingerprint(),
        blocks,
    }
}

/// First date at or after `k` where the rule says exercise, else maturity.
fn forward_stop(
    states: &[f64],
    k: usize,
    spec: &BasisSpec<f64>,
    c: &CoefficientSet<f64>,
    put: &PutPayoff<f64>,
) -> usize {
    let m = states.len();
    for (j, &x) in states.iter().enumerate().take(m - 1).skip(k) {
        if !put.in_the_money(x) {
            continue;
        }
        if let Some(v) = c.continuation_value(spec, x, spec.date_time(j)) {
            if put.exercise_value(x) >= v {
                return j;
            }
        }
    }
    m - 1
}

#[test]
fn backward_pass_matches_forward_scan() {
    let p = MarketParams::new(36.0, 0.06, 0.2, 40.0, 1.0).unwrap();
    let sched = ExerciseSchedule::per_year(1.0, 50).unwrap();
    let put = PutPayoff::new(40.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for (kind, group) in [
        (BasisKind::TimeAffineQuadratic, 10),
        (BasisKind::Quadratic, 1),
    ] {
        let spec = BasisSpec::new(kind, group, &sched).unwrap();
        for j in 0..1000u64 {
            let coeffs = random_coefficients(&spec, &mut rng);
            let path = simulate_path(&p, &sched, RngStream::new(5, j));
            let x = &path.values;
            let v = decide_and_value_path(
                x,
                ExercisePolicy::Regression(&coeffs),
                &spec,
                &put,
                &sched,
                0.06,
            );
            let m = x.len();
            for k in 0..m {
                let stop = forward_stop(x, k, &spec, &coeffs, &put);
                assert_eq!(v.exercise_index[k], stop, "path {j} date {k}");
            }
            let value_at = |k: usize| {
                let s = v.exercise_index[k];
                (-0.06 * (sched.time(s) - sched.time(k))).exp() * put.exercise_value(x[s])
            };
            assert!((v.p1 - value_at(0)).abs() < 1e-12);
            for k in 0..m - 1 {
                let expect = (-0.06 * (sched.time(k + 1) - sched.time(k))).exp() * value_at(k + 1);
                assert!(
                    (v.continuation_payoffs[k] - expect).abs() < 1e-12,
                    "path {j} date {k}"
                );
            }
        }
    }
}

#[test]
fn hold_policy_pays_terminal_payoff() {
    let p = MarketParams::new(36.0, 0.06, 0.2, 40.0, 1.0).unwrap();
    let sched = ExerciseSchedule::per_year(1.0, 50).unwrap();
    let spec = BasisSpec::new(BasisKind::TimeAffineQuadratic, 10, &sched).unwrap();
    let put = PutPayoff::new(40.0).unwrap();
    for j in 0..50 {
        let x = simulate_path(&p, &sched, RngStream::new(1, j)).values;
        let v = decide_and_value_path(
            &x,
            ExercisePolicy::HoldToMaturity,
            &spec,
            &put,
            &sched,
            0.06,
        );
        let expect = (-0.06 * (1.0 - 0.02_f64)).exp() * put.exercise_value(x[49]);
        assert!((v.p1 - expect).abs() < 1e-12);
        assert!(v.exercise_index.iter().all(|&s| s == 49));
    }
}
