//! Reference prices: Black-Scholes European put and an implicit
//! finite-difference American (or Bermudan) put.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::{ExerciseSchedule, MarketParams};
use crate::result::BoundaryPoint;
use crate::scalar::{norm_cdf, Real};

/// Black-Scholes put. Zero volatility gives the discounted forward
/// intrinsic value, zero maturity the plain intrinsic value.
pub fn european_put_closed_form<T: Real>(params: &MarketParams<T>) -> T {
    let MarketParams {
        spot: s,
        rate: r,
        vol,
        strike: k,
        maturity: t,
    } = *params;
    if t <= T::zero() {
        return (k - s).max(T::zero());
    }
    let df = (-r * t).exp();
    if vol <= T::zero() {
        return (k * df - s).max(T::zero());
    }
    let sd = vol * t.sqrt();
    let d1 = ((s / k).ln() + (r + T::lit(0.5) * vol * vol) * t) / sd;
    let d2 = d1 - sd;
    k * df * norm_cdf(-d2) - s * norm_cdf(-d1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdGrid<T> {
    pub n_time_steps: usize,
    pub n_space_steps: usize,
    pub s_max: T,
}

impl<T: Real> FdGrid<T> {
    /// `s_max = 4·K`.
    pub fn new(n_time_steps: usize, n_space_steps: usize, strike: T) -> Self {
        Self {
            n_time_steps,
            n_space_steps,
            s_max: T::lit(4.0) * strike,
        }
    }

    pub fn validate(&self, params: &MarketParams<T>) -> Result<()> {
        if self.n_time_steps < 1 {
            return Err(Error::invalid("fd_time_steps", "must be >= 1"));
        }
        if self.n_space_steps < 3 {
            return Err(Error::invalid("fd_space_steps", "must be >= 3"));
        }
        if !(self.s_max > params.strike) || !self.s_max.is_finite() {
            return Err(Error::invalid("fd_s_max", "must exceed the strike"));
        }
        if !(self.s_max > params.spot) {
            return Err(Error::invalid("fd_s_max", "must exceed the spot"));
        }
        Ok(())
    }
}

/// How the early-exercise constraint is imposed after each step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FdMethod<T> {
    /// Solve, then `V = max(V, K - S)`.
    Projection,
    /// Projected SOR on the linear complementarity problem.
    Psor { omega: T, tol: T, max_iter: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FdSolution<T> {
    pub price: T,
    /// Largest grid spot where the value equals the payoff, at each time
    /// where the constraint was applied; `None` if no node is exercised.
    pub boundary: Vec<BoundaryPoint<T>>,
}

pub fn american_put_fd<T: Real>(
    params: &MarketParams<T>,
    grid: &FdGrid<T>,
) -> Result<FdSolution<T>> {
    american_put_fd_with(params, grid, FdMethod::Projection)
}

pub fn american_put_fd_with<T: Real>(
    params: &MarketParams<T>,
    grid: &FdGrid<T>,
    method: FdMethod<T>,
) -> Result<FdSolution<T>> {
    let all = vec![true; grid.n_time_steps];
    solve(params, grid, method, &all)
}

/// Exercise allowed only at the schedule's dates, each of which must fall
/// on the time grid.
pub fn american_put_fd_bermudan<T: Real>(
    params: &MarketParams<T>,
    grid: &FdGrid<T>,
    schedule: &ExerciseSchedule<T>,
) -> Result<FdSolution<T>> {
    grid.validate(params)?;
    let nt = grid.n_time_steps;
    let dt = params.maturity / T::from_usize_lossy(nt);
    // Step n (1-based) lands on calendar time T - n·dt.
    let mut exercise = vec![false; nt];
    for &t in schedule.dates() {
        let steps = (params.maturity - t) / dt;
        let n = steps.round();
        if (steps - n).abs() > T::lit(1e-6) || n < T::zero() {
            return Err(Error::ScheduleOffGrid { time: t.as_f64() });
        }
        let n = n.to_usize().expect("non-negative");
        if n >= 1 && n <= nt {
            exercise[n - 1] = true;
        }
    }
    solve(params, grid, FdMethod::Projection, &exercise)
}

fn solve<T: Real>(
    params: &MarketParams<T>,
    grid: &FdGrid<T>,
    method: FdMethod<T>,
    exercise: &[bool],
) -> Result<FdSolution<T>> {
    params.validate()?;
    grid.validate(params)?;
    if let FdMethod::Psor {
        omega,
        tol,
        max_iter,
    } = method
    {
        if !(omega > T::zero() && omega < T::lit(2.0)) || !(tol > T::zero()) || max_iter == 0 {
            return Err(Error::invalid(
                "fd_method",
                "PSOR needs 0 < omega < 2, tol > 0, max_iter >= 1",
            ));
        }
    }
    let MarketParams {
        spot,
        rate: r,
        vol,
        strike: k,
        maturity,
    } = *params;
    let ns = grid.n_space_steps;
    let nt = grid.n_time_steps;
    let ds = grid.s_max / T::from_usize_lossy(ns);
    let dt = maturity / T::from_usize_lossy(nt);
    let half = T::lit(0.5);

    let payoff: Vec<T> = (0..=ns)
        .map(|j| (k - T::from_usize_lossy(j) * ds).max(T::zero()))
        .collect();
    // Interior rows j = 1..ns-1: -a_j V_{j-1} + b_j V_j - c_j V_{j+1} = rhs_j.
    let mut a = vec![T::zero(); ns + 1];
    let mut b = vec![T::zero(); ns + 1];
    let mut c = vec![T::zero(); ns + 1];
    for j in 1..ns {
        let jf = T::from_usize_lossy(j);
        let diff = vol * vol * jf * jf;
        a[j] = half * dt * (diff - r * jf);
        c[j] = half * dt * (diff + r * jf);
        b[j] = T::one() + dt * (diff + r);
    }
    // Thomas factorization, shared by every step.
    let mut cp = vec![T::zero(); ns + 1];
    let mut denom = vec![T::zero(); ns + 1];
    for j in 1..ns {
        let d = if j == 1 {
            b[j]
        } else {
            b[j] - a[j] * cp[j - 1]
        };
        denom[j] = d;
        cp[j] = c[j] / d;
    }

    let mut v = payoff.clone();
    let mut rhs = vec![T::zero(); ns + 1];
    let mut y = vec![T::zero(); ns + 1];
    let mut boundary = Vec::new();
    for n in 1..=nt {
        let tau = T::from_usize_lossy(n) * dt;
        let v0 = k * (-r * tau).exp();
        rhs[1..ns].copy_from_slice(&v[1..ns]);
        rhs[1] += a[1] * v0;
        // V_ns = 0, so nothing to add on the last row.
        let project = exercise[n - 1];
        match method {
            FdMethod::Psor {
                omega,
                tol,
                max_iter,
            } if project => {
                v[0] = v0;
                v[ns] = T::zero();
                let mut converged = false;
                for _ in 0..max_iter {
                    let mut err = T::zero();
                    for j in 1..ns {
                        // rhs[1] already carries a_1·V_0, and V_ns = 0.
                        let below = if j == 1 { T::zero() } else { a[j] * v[j - 1] };
                        let gs = (rhs[j] + below + c[j] * v[j + 1]) / b[j];
                        let new = (v[j] + omega * (gs - v[j])).max(payoff[j]);
                        err = err.max((new - v[j]).abs());
                        v[j] = new;
                    }
                    if err < tol {
                        converged = true;
                        break;
                    }
                }
                if !converged {
                    return Err(Error::PsorNotConverged { step: n });
                }
            }
            _ => {
                for j in 1..ns {
                    let prev = if j == 1 { T::zero() } else { y[j - 1] };
                    y[j] = (rhs[j] + a[j] * prev) / denom[j];
                }
                v[ns - 1] = y[ns - 1];
                for j in (1..ns - 1).rev() {
                    v[j] = y[j] + cp[j] * v[j + 1];
                }
                v[0] = v0;
                v[ns] = T::zero();
                if project {
                    for j in 1..ns {
                        v[j] = v[j].max(payoff[j]);
                    }
                }
            }
        }
        if project {
            let front = (1..ns)
                .rev()
                .find(|&j| payoff[j] > T::zero() && v[j] == payoff[j])
                .map(|j| T::from_usize_lossy(j) * ds);
            boundary.push(BoundaryPoint {
                time: maturity - tau,
                boundary: front,
            });
        }
    }
    boundary.reverse();

    Ok(FdSolution {
        price: interpolate(&v, ds, spot),
        boundary,
    })
}

/// Quadratic interpolation through the three nodes nearest `x`.
fn interpolate<T: Real>(v: &[T], ds: T, x: T) -> T {
    let ns = v.len() - 1;
    let j = (x / ds).round().to_usize().unwrap_or(0).clamp(1, ns - 1);
    let x0 = T::from_usize_lossy(j - 1) * ds;
    let x1 = x0 + ds;
    let x2 = x1 + ds;
    let two = T::lit(2.0);
    let l0 = (x - x1) * (x - x2) / (two * ds * ds);
    let l1 = -(x - x0) * (x - x2) / (ds * ds);
    let l2 = (x - x0) * (x - x1) / (two * ds * ds);
    l0 * v[j - 1] + l1 * v[j] + l2 * v[j + 1]
}
