//! Serialization of results: JSON and CSV for machines, 3-decimal text for
//! people.

use std::fmt::Write as _;
use std::io::Write;

use amc_core::result::{BoundaryPoint, IterationRecord, PricingResult};

use crate::config::OutputFormat;
use crate::CliError;

/// Header of the one-row result CSV.
pub const RESULT_CSV_HEADER: &str = "engine,price,standard_error,ci95_halfwidth,n_paths,total_ms";
/// Header of the iteration trace.
pub const TRACE_CSV_HEADER: &str =
    "iteration,running_price,running_se,iteration_price,boundary_mid,wall_ms";
pub const BOUNDARY_CSV_HEADER: &str = "time,boundary";

/// 17 significant digits.
pub fn sig17(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt17(x: Option<f64>) -> String {
    x.map(sig17).unwrap_or_default()
}

/// `4.467 (.009)`.
pub fn price_with_se(price: f64, se: f64) -> String {
    let se = format!("{se:.3}");
    let se = se.strip_prefix('0').unwrap_or(&se);
    format!("{price:.3} ({se})")
}

pub fn emit_result(result: &PricingResult<f64>, format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => serde_json::to_string_pretty(result).expect("plain data") + "\n",
        OutputFormat::Csv => format!(
            "{RESULT_CSV_HEADER}\n{},{},{},{},{},{}\n",
            result.engine.as_str(),
            sig17(result.price),
            sig17(result.standard_error),
            sig17(result.ci95_halfwidth),
            result.n_paths,
            sig17(result.total_ms()),
        ),
        OutputFormat::Text => {
            let mut s = String::new();
            writeln!(s, "engine    {}", result.engine.as_str()).unwrap();
            writeln!(
                s,
                "price     {}",
                price_with_se(result.price, result.standard_error)
            )
            .unwrap();
            writeln!(s, "ci95      +/- {:.3}", result.ci95_halfwidth).unwrap();
            writeln!(s, "paths     {}", result.n_paths).unwrap();
            for t in &result.timings {
                writeln!(s, "{:<9} {:.1} ms", t.phase, t.ms).unwrap();
            }
            s
        }
    }
}

pub fn write_trace<W: Write>(out: W, records: &[IterationRecord<f64>]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_CSV_HEADER.split(','))?;
    for r in records {
        w.write_record([
            r.iteration.to_string(),
            sig17(r.running_price),
            sig17(r.running_se),
            sig17(r.iteration_price),
            opt17(r.boundary_mid),
            sig17(r.wall_ms),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_boundary<W: Write>(out: W, points: &[BoundaryPoint<f64>]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(BOUNDARY_CSV_HEADER.split(','))?;
    for p in points {
        w.write_record([sig17(p.time), opt17(p.boundary)])?;
    }
    w.flush()?;
    Ok(())
}
