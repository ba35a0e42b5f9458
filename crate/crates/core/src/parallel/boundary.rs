//! Exercise boundary of a put from fitted continuation coefficients.

use crate::product::PutPayoff;
use crate::regression::{BasisSpec, CoefficientSet};
use crate::scalar::Real;

const SCAN_CELLS: usize = 64;

/// Root of `g(x) = (K - x) - Ĉ_k(x)` on `(0, K]` for date `k` (0-based).
///
/// Scans down from the strike for the highest cell where `g` turns from
/// non-positive (hold) above to positive (exercise) below, then bisects to
/// `1e-6·K`. `None` when the date has no coefficients or `g` never changes
/// sign on the bracket.
pub fn solve_boundary<T: Real>(
    coeffs: &CoefficientSet<T>,
    spec: &BasisSpec<T>,
    payoff: &PutPayoff<T>,
    k: usize,
) -> Option<T> {
    let block = spec.block_of_date(k);
    coeffs.block(block)?;
    let time = spec.date_time(k);
    let strike = payoff.strike;
    let mut f = [T::zero(); 6];
    let dim = spec.block_dim();
    let mut g = |x: T| {
        spec.fill(x, time, &mut f[..dim]);
        let c = coeffs.continuation_from_basis(block, &f[..dim]).unwrap();
        (strike - x) - c
    };

    let g_top = g(strike);
    if g_top == T::zero() {
        return Some(strike);
    }
    let cells = T::from_usize_lossy(SCAN_CELLS);
    let mut hi = strike;
    let mut g_hi = g_top;
    for i in 1..=SCAN_CELLS {
        let lo = strike * (T::one() - T::from_usize_lossy(i) / cells);
        let g_lo = g(lo);
        if g_hi <= T::zero() && g_lo > T::zero() {
            return Some(bisect(&mut g, lo, hi, T::lit(1e-6) * strike));
        }
        hi = lo;
        g_hi = g_lo;
    }
    None
}

/// `g(lo) > 0 >= g(hi)`.
fn bisect<T: Real>(g: &mut impl FnMut(T) -> T, mut lo: T, mut hi: T, tol: T) -> T {
    let half = T::lit(0.5);
    while hi - lo > tol {
        let mid = half * (lo + hi);
        if g(mid) > T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    half * (lo + hi)
}
