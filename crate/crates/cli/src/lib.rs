//! Command-line driver: parse, run one command, write artifacts under
//! `out_dir`.

pub mod config;
pub mod emit;
pub mod table;

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use amc_core::diagnostics::{
    estimate_rate, run_convergence_study, summarize, ConvergenceStudy, SeSource,
};
use amc_core::lsm::price_lsm;
use amc_core::oracle::{american_put_fd_bermudan, american_put_fd_with, european_put_closed_form};
use amc_core::parallel::price_parallel;
use amc_core::result::{EngineKind, PricingResult};
use clap::Parser;
use thiserror::Error;

use config::{parse_config, Command, ConfigError, OutputFormat, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Core(#[from] amc_core::Error),
    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Core(amc_core::Error::Io(_)) => EXIT_IO,
            CliError::Core(e) if e.is_configuration() => EXIT_CONFIG,
            CliError::Core(_) => EXIT_NUMERICAL,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "amc",
    about = "American put pricing: iterative least-squares Monte Carlo, LSM, FD and closed form",
    after_help = "Settings are `--key=value` (hyphens or underscores), read after an optional \
                  `--config=FILE` (flat TOML) and the AMC_SEED environment variable."
)]
pub struct Cli {
    pub command: Command,
    /// `--key=value` settings and `--config=FILE`.
    #[arg(trailing_var_arg = true, allow_hyphen_values = true)]
    pub settings: Vec<String>,
}

/// Files written by a command.
#[derive(Debug, Default)]
pub struct Outcome {
    pub stdout: String,
    pub files: Vec<PathBuf>,
}

/// Parses `argv` (program name first) and runs the command.
pub fn main_with(argv: Vec<String>) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let env_seed = std::env::var("AMC_SEED").ok();
    let result = parse_config(cli.command, &cli.settings, env_seed.as_deref())
        .map_err(CliError::from)
        .and_then(|cfg| run(&cfg));
    match result {
        Ok(out) => {
            print!("{}", out.stdout);
            EXIT_OK
        }
        Err(e) => {
            eprintln!("amc: {e}");
            e.exit_code()
        }
    }
}

fn result_path(cfg: &RunConfig) -> PathBuf {
    let ext = match cfg.format {
        OutputFormat::Json => "json",
        OutputFormat::Csv => "csv",
        OutputFormat::Text => "txt",
    };
    cfg.out_dir.join(format!("result.{ext}"))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str, out: &mut Outcome) -> Result<(), CliError> {
    use std::io::Write;
    let mut f = create(path)?;
    f.write_all(text.as_bytes())?;
    f.flush()?;
    out.files.push(path.to_owned());
    Ok(())
}

fn echo_config(result: &mut PricingResult<f64>, cfg: &RunConfig) {
    let mut echo = cfg.to_json();
    if let serde_json::Value::Object(map) = &mut echo {
        map.insert("engine".into(), std::mem::take(&mut result.config));
    }
    result.config = echo;
}

fn finish_result(
    cfg: &RunConfig,
    mut result: PricingResult<f64>,
    out: &mut Outcome,
) -> Result<(), CliError> {
    echo_config(&mut result, cfg);
    let text = emit::emit_result(&result, cfg.format);
    write_text(&result_path(cfg), &text, out)?;
    out.stdout.push_str(&text);
    Ok(())
}

pub fn run(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    let market = cfg.market();
    match cfg.command.expect("set by parse_config") {
        Command::PriceParallel => {
            let schedule = cfg.schedule()?;
            let run = price_parallel(&market, &schedule, cfg.parallel()?)?;
            let trace = cfg.out_dir.join("trace.csv");
            emit::write_trace(
                create(&trace)?,
                run.result.iterations.as_deref().unwrap_or_default(),
            )?;
            out.files.push(trace);
            let boundary = cfg.out_dir.join("boundary.csv");
            emit::write_boundary(
                create(&boundary)?,
                run.result.boundary.as_deref().unwrap_or_default(),
            )?;
            out.files.push(boundary);
            if let Some(path) = &cfg.save_coefficients {
                write_text(path, &run.coefficients.to_json()?, &mut out)?;
            }
            if let Some(path) = &cfg.dump_normal_equations {
                let dump = run.normal_equations.debug_dump(Some(&run.coefficients));
                write_text(
                    path,
                    &serde_json::to_string_pretty(&dump).expect("plain data"),
                    &mut out,
                )?;
            }
            finish_result(cfg, run.result, &mut out)?;
        }
        Command::PriceLsm => {
            let schedule = cfg.schedule()?;
            let run = price_lsm(&market, &schedule, &cfg.lsm())?;
            if let Some(path) = &cfg.lsm_coefficients {
                run.write_coefficients_csv(create(path)?)?;
                out.files.push(path.clone());
            }
            finish_result(cfg, run.result, &mut out)?;
        }
        Command::PriceFd => {
            let t = Instant::now();
            let sol = if cfg.fd_bermudan {
                american_put_fd_bermudan(&market, &cfg.fd_grid(), &cfg.schedule()?)?
            } else {
                american_put_fd_with(&market, &cfg.fd_grid(), cfg.fd_method())?
            };
            let mut result = PricingResult::new(EngineKind::FiniteDifference, sol.price, 0.0, 0);
            result.push_timing("solve", t.elapsed().as_secs_f64() * 1e3);
            let boundary = cfg.out_dir.join("boundary.csv");
            emit::write_boundary(create(&boundary)?, &sol.boundary)?;
            out.files.push(boundary);
            finish_result(cfg, result, &mut out)?;
        }
        Command::PriceEuropean => {
            let result = PricingResult::new(
                EngineKind::European,
                european_put_closed_form(&market),
                0.0,
                0,
            );
            finish_result(cfg, result, &mut out)?;
        }
        Command::Table => {
            let rows = table::run_table(cfg);
            let csv_path = cfg.out_dir.join("table.csv");
            table::write_table_csv(create(&csv_path)?, &rows)?;
            out.files.push(csv_path);
            let text = table::format_table(&rows);
            write_text(&cfg.out_dir.join("table.txt"), &text, &mut out)?;
            out.stdout.push_str(&text);
        }
        Command::Converge => {
            let schedule = cfg.schedule()?;
            let study = ConvergenceStudy::new(
                cfg.converge_axis,
                cfg.converge_points.clone(),
                cfg.converge_repeats,
                cfg.seed,
            )?;
            let study = run_convergence_study(study, &market, &schedule, &cfg.parallel()?)?;
            let path = cfg.out_dir.join("converge.csv");
            study.write_csv(create(&path)?)?;
            out.files.push(path);
            write_converge_traces(cfg, &study, &mut out)?;
            out.stdout.push_str(&format_summary(&study));
        }
    }
    Ok(out)
}

fn write_converge_traces(
    cfg: &RunConfig,
    study: &ConvergenceStudy,
    out: &mut Outcome,
) -> Result<(), CliError> {
    let path = cfg.out_dir.join("converge_traces.csv");
    let mut w = csv::Writer::from_writer(create(&path)?);
    w.write_record(["axis_value", "repeat", "iteration", "running_price"])?;
    for (row, trace) in study.rows.iter().zip(&study.traces) {
        for (i, p) in trace.iter().enumerate() {
            w.write_record([
                row.axis_value.to_string(),
                row.repeat.to_string(),
                (i + 1).to_string(),
                emit::sig17(*p),
            ])?;
        }
    }
    w.flush()?;
    out.files.push(path);
    Ok(())
}

fn format_summary(study: &ConvergenceStudy) -> String {
    use std::fmt::Write;
    let mut s = String::new();
    writeln!(
        s,
        "{:>10} {:>8} {:>10} {:>10} {:>10} {:>10}",
        "axis", "repeats", "price", "sd", "se_int", "wall_ms"
    )
    .unwrap();
    for p in summarize(study) {
        writeln!(
            s,
            "{:>10} {:>8} {:>10.4} {:>10.4} {:>10.4} {:>10.1}",
            p.axis_value, p.repeats, p.mean_price, p.empirical_sd, p.se_internal, p.mean_wall_ms
        )
        .unwrap();
    }
    for (name, source) in [
        ("internal", SeSource::Internal),
        ("empirical", SeSource::Empirical),
    ] {
        match estimate_rate(study, source) {
            Ok(r) => writeln!(
                s,
                "log-log slope ({name} s.e.): {:.3} +/- {:.3}",
                r.slope, r.slope_se
            )
            .unwrap(),
            Err(e) => writeln!(s, "log-log slope ({name} s.e.): n/a ({e})").unwrap(),
        }
    }
    s
}
