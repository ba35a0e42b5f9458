//! Exercise decisions and discounted cash flows along one path.

use crate::market::{discount, ExerciseSchedule};
use crate::product::Payoff;
use crate::regression::{BasisSpec, CoefficientSet};
use crate::scalar::Real;

/// How early-exercise decisions are taken on a path.
#[derive(Debug, Clone, Copy)]
pub enum ExercisePolicy<'a, T> {
    /// Never exercise before maturity (European bootstrap).
    HoldToMaturity,
    /// Exercise an in-the-money state when `F_k >= Ĉ_k`; dates whose block
    /// has no coefficients are held.
    Regression(&'a CoefficientSet<T>),
}

/// Outcome of valuing one path.
#[derive(Debug, Clone, PartialEq)]
pub struct PathValuation<T> {
    /// `P_1`: value at the first exercise date, in date-1 money.
    pub p1: T,
    /// `P̃_{k+1} = e^{-r(t_{k+1}-t_k)} P_{k+1}` for `k = 0..M-1` (0-based);
    /// the last entry is unused and zero.
    pub continuation_payoffs: Vec<T>,
    /// `κ_k`: 0-based index of the exercise date reached from date `k`.
    pub exercise_index: Vec<usize>,
}

/// Discount factors between consecutive dates and the date-level basis, so
/// inner loops only do arithmetic.
#[derive(Debug, Clone)]
pub struct PathValuer<T> {
    step_discount: Vec<T>,
    first_discount: T,
    spec: BasisSpec<T>,
}

impl<T: Real> PathValuer<T> {
    pub fn new(schedule: &ExerciseSchedule<T>, rate: T, spec: BasisSpec<T>) -> Self {
        let d = schedule.dates();
        let step_discount = d.windows(2).map(|w| discount(rate, w[0], w[1])).collect();
        Self {
            step_discount,
            first_discount: discount(rate, T::zero(), d[0]),
            spec,
        }
    }

    pub fn spec(&self) -> &BasisSpec<T> {
        &self.spec
    }

    /// `e^{-r t_1}`: converts `P_1` to a time-0 value.
    pub fn first_discount(&self) -> T {
        self.first_discount
    }

    /// Backward pass over `states`, writing `P̃_{k+1}` into `continuation`
    /// (length M) and, when given, `κ_k` into `kappa`. Returns `P_1`.
    pub fn value_into<P: Payoff<T>>(
        &self,
        states: &[T],
        policy: ExercisePolicy<'_, T>,
        payoff: &P,
        continuation: &mut [T],
        mut kappa: Option<&mut [usize]>,
    ) -> T {
        let m = states.len();
        debug_assert_eq!(continuation.len(), m);
        let mut value = payoff.exercise_value(states[m - 1]);
        continuation[m - 1] = T::zero();
        let mut stop = m - 1;
        if let Some(kp) = kappa.as_deref_mut() {
            kp[m - 1] = stop;
        }
        let mut f = [T::zero(); 6];
        let dim = self.spec.block_dim();
        for k in (0..m - 1).rev() {
            let held = self.step_discount[k] * value;
            continuation[k] = held;
            value = held;
            let x = states[k];
            if let ExercisePolicy::Regression(coeffs) = policy {
                if payoff.in_the_money(x) {
                    let block = self.spec.block_of_date(k);
                    self.spec.fill(x, self.spec.date_time(k), &mut f[..dim]);
                    if let Some(c) = coeffs.continuation_from_basis(block, &f[..dim]) {
                        let exercise = payoff.exercise_value(x);
                        if exercise >= c {
                            value = exercise;
                            stop = k;
                        }
                    }
                }
            }
            if let Some(kp) = kappa.as_deref_mut() {
                kp[k] = stop;
            }
        }
        value
    }
}

/// Values one path under `policy`.
pub fn decide_and_value_path<T: Real, P: Payoff<T>>(
    states: &[T],
    policy: ExercisePolicy<'_, T>,
    spec: &BasisSpec<T>,
    payoff: &P,
    schedule: &ExerciseSchedule<T>,
    rate: T,
) -> PathValuation<T> {
    let valuer = PathValuer::new(schedule, rate, spec.clone());
    let m = states.len();
    let mut continuation_payoffs = vec![T::zero(); m];
    let mut exercise_index = vec![0; m];
    let p1 = valuer.value_into(
        states,
        policy,
        payoff,
        &mut continuation_payoffs,
        Some(&mut exercise_index),
    );
    PathValuation {
        p1,
        continuation_payoffs,
        exercise_index,
    }
}
