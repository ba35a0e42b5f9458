use amc_core::market::ExerciseSchedule;
use amc_core::regression::{
    solve_coefficients, BasisKind, BasisSpec, NormalEquations, DEFAULT_RIDGE,
};
use proptest::prelude::*;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn q(s: f64, t: f64) -> f64 {
    1.0 + 2.0 * s + 3.0 * s * s + 4.0 * t + 5.0 * t * s + 6.0 * t * s * s
}

#[test]
fn exact_recovery_of_time_affine_quadratic() {
    let dates = vec![0.1, 0.2, 0.3, 0.4];
    let sched = ExerciseSchedule::from_dates(dates.clone(), 0.4).unwrap();
    let spec = BasisSpec::new(BasisKind::TimeAffineQuadratic, 4, &sched).unwrap();
    let mut ne = NormalEquations::zeros(&spec);
    for (k, &t) in dates.iter().enumerate() {
        for s in [1.0, 2.0, 3.0 + k as f64 * 0.1, 4.5] {
            let f = spec.basis_eval(0, s, t).unwrap();
            ne.accumulate(0, 1.0, &f, q(s, t)).unwrap();
        }
    }
    let c = solve_coefficients(&ne, &spec, 0.0).unwrap();
    let alpha = c.block(0).unwrap();
    for (a, e) in alpha.iter().zip([1.0, 2.0, 3.0, 4.0, 5.0, 6.0]) {
        assert!((a - e).abs() < 1e-8, "{alpha:?}");
    }
    // Same fit with the default ridge.
    let c = solve_coefficients(&ne, &spec, DEFAULT_RIDGE).unwrap();
    let v = c.continuation_value(&spec, 3.0, 0.1).unwrap();
    assert!((v - 41.3).abs() < 1e-6, "{v}");
}

#[test]
fn line_through_points() {
    let sched = ExerciseSchedule::uniform(1.0_f64, 1).unwrap();
    let spec = BasisSpec::new(BasisKind::Quadratic, 1, &sched).unwrap();
    let mut ne = NormalEquations::zeros(&spec);
    for x in [0.5, 1.0, 2.0, 3.5, 7.0] {
        ne.accumulate(0, 1.3, &[1.0, x, x * x], 2.0 + 3.0 * x)
            .unwrap();
    }
    let c = solve_coefficients(&ne, &spec, 0.0).unwrap();
    let a = c.block(0).unwrap();
    assert!(
        (a[0] - 2.0).abs() < 1e-9 && (a[1] - 3.0).abs() < 1e-9 && a[2].abs() < 1e-10,
        "{a:?}"
    );
}

fn spec() -> BasisSpec<f64> {
    let sched = ExerciseSchedule::per_year(1.0, 20).unwrap();
    BasisSpec::new(BasisKind::TimeAffineQuadratic, 5, &sched).unwrap()
}

fn fill(ne: &mut NormalEquations<f64>, spec: &BasisSpec<f64>, obs: &[(usize, f64, f64, f64)]) {
    for &(k, s, w, y) in obs {
        let b = spec.block_of_date(k);
        let f = spec.basis_eval(b, s, spec.date_time(k)).unwrap();
        ne.accumulate(b, w, &f, y).unwrap();
    }
}

fn close(a: &NormalEquations<f64>, b: &NormalEquations<f64>) -> bool {
    a.blocks().iter().zip(b.blocks()).all(|(x, y)| {
        let mx = x.matrix();
        let my = y.matrix();
        let scale = mx.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        mx.iter()
            .zip(&my)
            .all(|(p, q)| (p - q).abs() <= 1e-10 * scale)
            && x.vector()
                .iter()
                .zip(y.vector())
                .all(|(p, q)| (p - q).abs() <= 1e-10 * scale)
    })
}

fn observations() -> impl Strategy<Value = Vec<(usize, f64, f64, f64)>> {
    prop::collection::vec(
        (0usize..20, 10.0..60.0f64, 0.0..1.0f64, 0.0..20.0f64),
        0..60,
    )
}

proptest! {
    #[test]
    fn concatenation_equals_sequential_batches(a in observations(), b in observations()) {
        let spec = spec();
        let mut seq = NormalEquations::zeros(&spec);
        fill(&mut seq, &spec, &a);
        fill(&mut seq, &spec, &b);
        let mut union = NormalEquations::zeros(&spec);
        let all: Vec<_> = a.iter().chain(&b).copied().collect();
        fill(&mut union, &spec, &all);
        prop_assert!(close(&seq, &union));
    }

    #[test]
    fn merge_is_associative_and_matches_union(a in observations(), b in observations(), c in observations()) {
        let spec = spec();
        let part = |obs: &[(usize, f64, f64, f64)]| {
            let mut ne = NormalEquations::zeros(&spec);
            fill(&mut ne, &spec, obs);
            ne
        };
        let (pa, pb, pc) = (part(&a), part(&b), part(&c));
        let mut left = pa.clone();
        left.merge(&pb).unwrap();
        left.merge(&pc).unwrap();
        let mut bc = pb.clone();
        bc.merge(&pc).unwrap();
        let mut right = pa.clone();
        right.merge(&bc).unwrap();
        prop_assert!(close(&left, &right));
        let all: Vec<_> = a.iter().chain(&b).chain(&c).copied().collect();
        prop_assert!(close(&left, &part(&all)));
    }

    #[test]
    fn accumulations_stay_symmetric_psd(a in observations()) {
        let spec = spec();
        let mut ne = NormalEquations::zeros(&spec);
        fill(&mut ne, &spec, &a);
        for blk in ne.blocks() {
            let m = blk.matrix();
            let p = blk.dim();
            for i in 0..p {
                prop_assert!(m[i * p + i] >= 0.0);
                for j in 0..p {
                    prop_assert_eq!(m[i * p + j], m[j * p + i]);
                    // 2x2 minors of a Gram matrix are non-negative.
                    let minor = m[i * p + i] * m[j * p + j] - m[i * p + j] * m[i * p + j];
                    prop_assert!(minor >= -1e-9 * m[i * p + i].max(1.0) * m[j * p + j].max(1.0));
                }
            }
        }
    }
}

/// Three states `x ∈ {1, 2, 3}` with probabilities `π`; given `x` the
/// realised discounted payoff is `x² + 1 + ε` with a state-dependent
/// two-point noise of mean zero, so `C(x) = x² + 1`. Regressing on `{1, x}`
/// (two functions, three states) makes the projection non-trivial.
#[test]
fn realised_payoffs_and_exact_continuation_give_the_same_fit() {
    let states = [1.0, 2.0, 3.0];
    let probs = [0.2, 0.5, 0.3];
    let noise = [0.5, 2.0, 4.0];
    let exact = |x: f64| x * x + 1.0;

    // Exact-C regression: minimise Σ π (C - α·f)².
    let (mut a11, mut a12, mut a22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&x, &p) in states.iter().zip(&probs) {
        a11 += p;
        a12 += p * x;
        a22 += p * x * x;
        b1 += p * exact(x);
        b2 += p * x * exact(x);
    }
    let det = a11 * a22 - a12 * a12;
    let alpha_exact = [(a22 * b1 - a12 * b2) / det, (a11 * b2 - a12 * b1) / det];

    let sched = ExerciseSchedule::uniform(1.0, 1).unwrap();
    let spec = BasisSpec::new(BasisKind::Quadratic, 1, &sched).unwrap();
    let batches = 20;
    let per_batch = 50_000;
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut unit = || (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
    let mut fits = Vec::new();
    for _ in 0..batches {
        let mut ne = NormalEquations::zeros(&spec);
        for _ in 0..per_batch {
            let u = unit();
            let i = if u < 0.2 {
                0
            } else if u < 0.7 {
                1
            } else {
                2
            };
            let x = states[i];
            let eps = if unit() < 0.5 { -noise[i] } else { noise[i] };
            // Third basis function switched off with a zero column.
            ne.accumulate(0, 1.0, &[1.0, x, 0.0], exact(x) + eps)
                .unwrap();
        }
        // Solve the 2x2 system directly; the zero column is excluded.
        let m = ne.block(0).matrix();
        let v = ne.block(0).vector();
        let d = m[0] * m[4] - m[1] * m[3];
        fits.push([
            (m[4] * v[0] - m[1] * v[1]) / d,
            (m[0] * v[1] - m[3] * v[0]) / d,
        ]);
    }
    for c in 0..2 {
        let mean = fits.iter().map(|f| f[c]).sum::<f64>() / batches as f64;
        let sd =
            (fits.iter().map(|f| (f[c] - mean).powi(2)).sum::<f64>() / (batches - 1) as f64).sqrt();
        let se = sd / (batches as f64).sqrt();
        assert!(
            (mean - alpha_exact[c]).abs() < 3.0 * se,
            "coefficient {c}: {mean} vs exact {} (se {se})",
            alpha_exact[c]
        );
    }
}
