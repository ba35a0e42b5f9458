//! The 20-cell American put comparison: FD, LSM, iterative engine and
//! European closed form over spot, volatility and maturity.

use std::fmt::Write as _;
use std::io::Write;

use amc_core::lsm::price_lsm;
use amc_core::oracle::{american_put_fd_bermudan, american_put_fd_with, european_put_closed_form};
use amc_core::parallel::price_parallel;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::emit::{price_with_se, sig17};
use crate::CliError;

pub const SPOTS: [f64; 5] = [36.0, 38.0, 40.0, 42.0, 44.0];
pub const VOLS: [f64; 2] = [0.2, 0.4];
pub const MATURITIES: [f64; 2] = [1.0, 2.0];

/// LSM draws from `seed + LSM_SEED_OFFSET` so its paths are independent of
/// the iterative engine's.
pub const LSM_SEED_OFFSET: u64 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub spot: f64,
    pub vol: f64,
    pub maturity: f64,
    pub fd: f64,
    pub lsm: f64,
    pub lsm_se: f64,
    pub parallel: f64,
    pub parallel_se: f64,
    pub european: f64,
    pub premium_fd: f64,
    pub premium_lsm: f64,
    pub premium_parallel: f64,
    pub lsm_minus_parallel: f64,
    pub lsm_minus_fd: f64,
    pub parallel_minus_fd: f64,
    /// `|LSM - parallel| < 2·sqrt(se_lsm² + se_parallel²)`.
    pub agree: bool,
    pub error: Option<String>,
}

impl TableRow {
    fn failed(spot: f64, vol: f64, maturity: f64, error: String) -> Self {
        Self {
            spot,
            vol,
            maturity,
            fd: f64::NAN,
            lsm: f64::NAN,
            lsm_se: f64::NAN,
            parallel: f64::NAN,
            parallel_se: f64::NAN,
            european: f64::NAN,
            premium_fd: f64::NAN,
            premium_lsm: f64::NAN,
            premium_parallel: f64::NAN,
            lsm_minus_parallel: f64::NAN,
            lsm_minus_fd: f64::NAN,
            parallel_minus_fd: f64::NAN,
            agree: false,
            error: Some(error),
        }
    }
}

pub fn price_cell(
    base: &RunConfig,
    spot: f64,
    vol: f64,
    maturity: f64,
) -> Result<TableRow, CliError> {
    let cfg = RunConfig {
        spot,
        vol,
        maturity,
        ..base.clone()
    };
    let market = cfg.market();
    let schedule = cfg.schedule()?;
    let fd = if cfg.fd_bermudan {
        american_put_fd_bermudan(&market, &cfg.fd_grid(), &schedule)?
    } else {
        american_put_fd_with(&market, &cfg.fd_grid(), cfg.fd_method())?
    }
    .price;
    let mut lsm_cfg = cfg.lsm();
    lsm_cfg.seed = cfg.seed.wrapping_add(LSM_SEED_OFFSET);
    let lsm = price_lsm(&market, &schedule, &lsm_cfg)?.result;
    let par = price_parallel(&market, &schedule, cfg.parallel()?)?.result;
    let european = european_put_closed_form(&market);
    let diff = lsm.price - par.price;
    let combined = lsm.standard_error.hypot(par.standard_error);
    Ok(TableRow {
        spot,
        vol,
        maturity,
        fd,
        lsm: lsm.price,
        lsm_se: lsm.standard_error,
        parallel: par.price,
        parallel_se: par.standard_error,
        european,
        premium_fd: fd - european,
        premium_lsm: lsm.price - european,
        premium_parallel: par.price - european,
        lsm_minus_parallel: diff,
        lsm_minus_fd: lsm.price - fd,
        parallel_minus_fd: par.price - fd,
        agree: diff.abs() < 2.0 * combined,
        error: None,
    })
}

/// Prices every cell; a failing cell is recorded and the rest still run.
pub fn run_table(config: &RunConfig) -> Vec<TableRow> {
    let mut rows = Vec::with_capacity(20);
    for &spot in &SPOTS {
        for &vol in &VOLS {
            for &maturity in &MATURITIES {
                rows.push(
                    price_cell(config, spot, vol, maturity)
                        .unwrap_or_else(|e| TableRow::failed(spot, vol, maturity, e.to_string())),
                );
            }
        }
    }
    rows
}

pub const TABLE_CSV_HEADER: &str = "spot,vol,maturity,fd,lsm,lsm_se,parallel,parallel_se,european,\
premium_fd,premium_lsm,premium_parallel,lsm_minus_parallel,lsm_minus_fd,parallel_minus_fd,agree,error";

pub fn write_table_csv<W: Write>(out: W, rows: &[TableRow]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TABLE_CSV_HEADER.split(','))?;
    for r in rows {
        let mut rec: Vec<String> = [r.spot, r.vol, r.maturity]
            .iter()
            .map(|x| x.to_string())
            .collect();
        rec.extend(
            [
                r.fd,
                r.lsm,
                r.lsm_se,
                r.parallel,
                r.parallel_se,
                r.european,
                r.premium_fd,
                r.premium_lsm,
                r.premium_parallel,
                r.lsm_minus_parallel,
                r.lsm_minus_fd,
                r.parallel_minus_fd,
            ]
            .iter()
            .map(|&x| sig17(x)),
        );
        rec.push(r.agree.to_string());
        rec.push(r.error.clone().unwrap_or_default());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn format_table(rows: &[TableRow]) -> String {
    let mut s = String::new();
    writeln!(
        s,
        "{:>4} {:>5} {:>3} | {:>7} {:>15} {:>15} {:>8} | {:>7} {:>7} {:>7}",
        "S",
        "sigma",
        "T",
        "FD",
        "LSM (s.e.)",
        "Parallel (s.e.)",
        "Euro",
        "EEP FD",
        "L - P",
        "P - FD"
    )
    .unwrap();
    for r in rows {
        if let Some(e) = &r.error {
            writeln!(
                s,
                "{:>4} {:>5.1} {:>3} | error: {e}",
                r.spot, r.vol, r.maturity
            )
            .unwrap();
            continue;
        }
        writeln!(
            s,
            "{:>4} {:>5.1} {:>3} | {:>7.3} {:>15} {:>15} {:>8.3} | {:>7.3} {:>7.3} {:>7.3}",
            r.spot,
            r.vol,
            r.maturity,
            r.fd,
            price_with_se(r.lsm, r.lsm_se),
            price_with_se(r.parallel, r.parallel_se),
            r.european,
            r.premium_fd,
            r.lsm_minus_parallel,
            r.parallel_minus_fd,
        )
        .unwrap();
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> RunConfig {
        RunConfig {
            n_paths: 2_000,
            n_iterations: 10,
            fd_time_steps: 500,
            fd_space_steps: 200,
            workers: 1,
            ..RunConfig::default()
        }
    }

    #[test]
    fn cell_fields_are_consistent() {
        let r = price_cell(&small(), 40.0, 0.2, 1.0).unwrap();
        assert_eq!(r.premium_fd, r.fd - r.european);
        assert_eq!(r.lsm_minus_parallel, r.lsm - r.parallel);
        assert!(r.fd > r.european);
        assert!(r.error.is_none());
    }

    #[test]
    fn failing_cell_is_recorded() {
        let mut cfg = small();
        cfg.fd_s_max = Some(41.0); // below the 42 and 44 spots
        let r = price_cell(&cfg, 44.0, 0.2, 1.0);
        assert!(r.is_err());
        let row = TableRow::failed(44.0, 0.2, 1.0, r.unwrap_err().to_string());
        let text = format_table(std::slice::from_ref(&row));
        assert!(text.contains("error"));
        let mut buf = Vec::new();
        write_table_csv(&mut buf, &[row]).unwrap();
        let csv = String::from_utf8(buf).unwrap();
        assert!(csv.starts_with(TABLE_CSV_HEADER));
        assert!(csv.lines().nth(1).unwrap().contains("fd_s_max"));
    }

    #[test]
    fn text_row_layout() {
        let r = price_cell(&small(), 36.0, 0.2, 1.0).unwrap();
        let text = format_table(std::slice::from_ref(&r));
        let line = text.lines().nth(1).unwrap();
        assert!(line.contains(&price_with_se(r.lsm, r.lsm_se)));
        assert!(line.contains(&format!("{:.3}", r.european)));
    }
}
