//! Convergence studies over paths, iterations or workers, and log-log rate
//! fits on their standard errors.

use std::io::{Read, Write};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::{ExerciseSchedule, MarketParams};
use crate::parallel::{price_parallel, IterationPlan, ParallelConfig};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StudyAxis {
    /// Total paths `N` at the base iteration count.
    Paths,
    /// Iteration count `n` at the base total `N`.
    Iterations,
    Workers,
}

/// One priced repeat. Columns of the study CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub axis_value: u64,
    pub repeat: u32,
    pub price: f64,
    pub se_internal: f64,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStudy {
    pub axis: StudyAxis,
    pub points: Vec<u64>,
    pub repeats: u32,
    pub master_seed: u64,
    pub rows: Vec<StudyRow>,
    /// Running price per iteration for every row, same order as `rows`.
    #[serde(default)]
    pub traces: Vec<Vec<f64>>,
}

impl ConvergenceStudy {
    pub fn new(axis: StudyAxis, points: Vec<u64>, repeats: u32, master_seed: u64) -> Result<Self> {
        if points.len() < 3 {
            return Err(Error::TooFewPoints(points.len()));
        }
        if points.contains(&0) {
            return Err(Error::invalid(
                "converge_points",
                "every point must be >= 1",
            ));
        }
        if repeats == 0 {
            return Err(Error::invalid("converge_repeats", "must be >= 1"));
        }
        Ok(Self {
            axis,
            points,
            repeats,
            master_seed,
            rows: Vec::new(),
            traces: Vec::new(),
        })
    }

    /// `axis_value,repeat,price,se_internal,wall_ms`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_rows<R: Read>(input: R) -> Result<Vec<StudyRow>> {
        csv::Reader::from_reader(input)
            .deserialize()
            .collect::<std::result::Result<_, _>>()
            .map_err(Into::into)
    }
}

/// Prices every point `repeats` times with seeds `master_seed + repeat`.
pub fn run_convergence_study<T: Real>(
    mut study: ConvergenceStudy,
    params: &MarketParams<T>,
    schedule: &ExerciseSchedule<T>,
    base: &ParallelConfig<T>,
) -> Result<ConvergenceStudy> {
    study.rows.clear();
    study.traces.clear();
    for &x in &study.points {
        let xs = x as usize;
        for repeat in 0..study.repeats {
            let mut config = base.clone();
            config.seed = study.master_seed.wrapping_add(repeat as u64);
            match study.axis {
                StudyAxis::Paths => {
                    config.plan = IterationPlan::from_total(xs, base.plan.n_iterations)?
                }
                StudyAxis::Iterations => {
                    config.plan = IterationPlan::from_total(base.plan.total_paths(), xs)?
                }
                StudyAxis::Workers => config.workers = xs,
            }
            let t = Instant::now();
            let run = price_parallel(params, schedule, config)?;
            let wall_ms = t.elapsed().as_secs_f64() * 1e3;
            study.rows.push(StudyRow {
                axis_value: x,
                repeat,
                price: run.result.price.as_f64(),
                se_internal: run.result.standard_error.as_f64(),
                wall_ms,
            });
            study.traces.push(
                run.result
                    .iterations
                    .unwrap_or_default()
                    .iter()
                    .map(|r| r.running_price.as_f64())
                    .collect(),
            );
        }
    }
    Ok(study)
}

/// Repeats at one axis value, aggregated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSummary {
    pub axis_value: u64,
    pub repeats: usize,
    pub mean_price: f64,
    /// Sample standard deviation of the price across repeats: the
    /// empirical error of a single run.
    pub empirical_sd: f64,
    /// `empirical_sd / √repeats`: error of `mean_price`.
    pub se_of_mean: f64,
    /// Mean of the engines' own standard errors.
    pub se_internal: f64,
    /// `empirical_sd / se_internal`; NaN with a single repeat.
    pub se_ratio: f64,
    pub mean_wall_ms: f64,
}

pub fn summarize(study: &ConvergenceStudy) -> Vec<PointSummary> {
    study
        .points
        .iter()
        .map(|&x| {
            let rows: Vec<&StudyRow> = study.rows.iter().filter(|r| r.axis_value == x).collect();
            let n = rows.len() as f64;
            let mean = rows.iter().map(|r| r.price).sum::<f64>() / n;
            let sd = if rows.len() > 1 {
                (rows.iter().map(|r| (r.price - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
            } else {
                f64::NAN
            };
            let se_internal = rows.iter().map(|r| r.se_internal).sum::<f64>() / n;
            PointSummary {
                axis_value: x,
                repeats: rows.len(),
                mean_price: mean,
                empirical_sd: sd,
                se_of_mean: sd / n.sqrt(),
                se_internal,
                se_ratio: sd / se_internal,
                mean_wall_ms: rows.iter().map(|r| r.wall_ms).sum::<f64>() / n,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeSource {
    /// Mean of the engine's own estimates.
    Internal,
    /// Spread across repeats.
    Empirical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    pub slope: f64,
    pub slope_se: f64,
    pub intercept: f64,
}

/// Least-squares slope of `log(se)` against `log(axis value)`.
pub fn estimate_rate(study: &ConvergenceStudy, source: SeSource) -> Result<RateEstimate> {
    let summary = summarize(study);
    let (x, y): (Vec<f64>, Vec<f64>) = summary
        .iter()
        .map(|p| {
            let se = match source {
                SeSource::Internal => p.se_internal,
                SeSource::Empirical => p.empirical_sd,
            };
            (p.axis_value as f64, se)
        })
        .unzip();
    loglog_slope(&x, &y)
}

pub fn loglog_slope(x: &[f64], y: &[f64]) -> Result<RateEstimate> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    if x.len() < 3 {
        return Err(Error::TooFewPoints(x.len()));
    }
    if x.iter().chain(y).any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::invalid(
            "se",
            "log-log fit needs finite positive values",
        ));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid(
            "points",
            "axis values must not all be equal",
        ));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    Ok(RateEstimate {
        slope,
        slope_se: (ssr / (n - 2.0) / sxx).sqrt(),
        intercept,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn synthetic(se: impl Fn(f64) -> f64) -> ConvergenceStudy {
        let mut s = ConvergenceStudy::new(
            StudyAxis::Paths,
            vec![10_000, 40_000, 160_000, 640_000],
            1,
            0,
        )
        .unwrap();
        for &x in &s.points.clone() {
            s.rows.push(StudyRow {
                axis_value: x,
                repeat: 0,
                price: 4.4,
                se_internal: se(x as f64),
                wall_ms: 1.0,
            });
        }
        s
    }

    #[test]
    fn synthetic_slopes() {
        let r = estimate_rate(&synthetic(|n| 0.9 / n.sqrt()), SeSource::Internal).unwrap();
        assert_abs_diff_eq!(r.slope, -0.5, epsilon = 1e-12);
        assert!(r.slope_se < 1e-10);
        let r = estimate_rate(&synthetic(|n| 3.0 / n), SeSource::Internal).unwrap();
        assert_abs_diff_eq!(r.slope, -1.0, epsilon = 1e-12);
    }

    #[test]
    fn slope_is_scale_invariant() {
        let a = estimate_rate(
            &synthetic(|n| n.powf(-0.45) * (1.0 + 0.1 * n.ln().sin())),
            SeSource::Internal,
        )
        .unwrap();
        let b = estimate_rate(
            &synthetic(|n| 17.0 * n.powf(-0.45) * (1.0 + 0.1 * n.ln().sin())),
            SeSource::Internal,
        )
        .unwrap();
        assert_abs_diff_eq!(a.slope, b.slope, epsilon = 1e-12);
        assert_abs_diff_eq!(a.slope_se, b.slope_se, epsilon = 1e-12);
    }

    #[test]
    fn too_few_points() {
        assert_eq!(
            ConvergenceStudy::new(StudyAxis::Paths, vec![1, 2], 5, 0).unwrap_err(),
            Error::TooFewPoints(2)
        );
        assert_eq!(
            loglog_slope(&[1.0, 2.0], &[1.0, 0.5]).unwrap_err(),
            Error::TooFewPoints(2)
        );
    }

    #[test]
    fn summary_statistics() {
        let mut s = ConvergenceStudy::new(StudyAxis::Iterations, vec![1, 2, 3], 2, 0).unwrap();
        for (x, p) in [(1, 1.0), (1, 3.0), (2, 2.0), (2, 2.0), (3, 0.0), (3, 4.0)] {
            s.rows.push(StudyRow {
                axis_value: x,
                repeat: 0,
                price: p,
                se_internal: 1.0,
                wall_ms: 2.0,
            });
        }
        let sum = summarize(&s);
        assert_eq!(sum[0].mean_price, 2.0);
        assert_abs_diff_eq!(sum[0].empirical_sd, 2.0f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(sum[0].se_of_mean, 1.0, epsilon = 1e-15);
        assert_eq!(sum[1].empirical_sd, 0.0);
        assert_abs_diff_eq!(sum[2].se_ratio, 8.0f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn csv_round_trip() {
        let mut s = synthetic(|n| 1.0 / n.sqrt());
        s.rows[1].price = 4.467_123_456_789_012;
        s.rows[2].wall_ms = 1e-300;
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("axis_value,repeat,price,se_internal,wall_ms\n"));
        assert_eq!(ConvergenceStudy::read_rows(buf.as_slice()).unwrap(), s.rows);
    }
}
