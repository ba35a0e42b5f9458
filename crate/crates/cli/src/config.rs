//! Run configuration: a flat TOML file, then `AMC_SEED`, then `--key=value`
//! flags, each layer overriding the previous one.

use std::path::{Path, PathBuf};

use amc_core::diagnostics::StudyAxis;
use amc_core::lsm::LsmConfig;
use amc_core::market::{ExerciseSchedule, MarketParams};
use amc_core::oracle::{FdGrid, FdMethod};
use amc_core::parallel::{BetaSpec, Bootstrap, IterationPlan, ParallelConfig, WeightScheme};
use amc_core::regression::{BasisKind, BasisSpec, CoefficientSet};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    PriceParallel,
    PriceLsm,
    PriceFd,
    PriceEuropean,
    Table,
    Converge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BootstrapMode {
    European,
    WarmStart,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FdMode {
    Projection,
    Psor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("`{key}`: {message}")]
    Key { key: String, message: String },
    #[error("cannot read config file {path}: {message}")]
    File { path: String, message: String },
    #[error("malformed argument `{0}`: expected --key=value")]
    Argument(String),
}

impl ConfigError {
    fn key(key: &str, message: impl Into<String>) -> Self {
        ConfigError::Key {
            key: key.to_owned(),
            message: message.into(),
        }
    }
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Every key the file and flags accept. Defaults reproduce the 36/0.2/1
/// American put with 100,000 paths in 100 iterations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    #[serde(skip_deserializing)]
    pub command: Option<Command>,

    pub spot: f64,
    pub rate: f64,
    pub vol: f64,
    pub strike: f64,
    pub maturity: f64,
    /// Exercise dates per year; `M = round(dates_per_year · maturity)`.
    pub dates_per_year: usize,

    pub n_paths: usize,
    pub n_iterations: usize,
    pub group_size: usize,
    pub basis: BasisKind,
    pub lambda: f64,
    pub mu: f64,
    pub nu: f64,
    /// Gaussian width in price units; unset means `0.2 · strike`.
    pub beta: Option<f64>,
    pub beta_shrink: f64,
    pub boundary_weights: bool,
    pub seed: u64,
    pub workers: usize,
    pub chunk_size: usize,
    pub ridge: f64,
    pub bootstrap: BootstrapMode,
    pub warm_start_file: Option<PathBuf>,

    pub lsm_parallel_paths: bool,

    pub fd_time_steps: usize,
    pub fd_space_steps: usize,
    /// Unset means `4 · strike`.
    pub fd_s_max: Option<f64>,
    pub fd_method: FdMode,
    pub psor_omega: f64,
    pub psor_tol: f64,
    pub psor_max_iter: usize,
    /// Exercise only on the Monte Carlo schedule's dates.
    pub fd_bermudan: bool,

    pub converge_axis: StudyAxis,
    pub converge_points: Vec<u64>,
    pub converge_repeats: u32,

    pub out_dir: PathBuf,
    pub format: OutputFormat,
    /// Write the final coefficients here (warm-start file format).
    pub save_coefficients: Option<PathBuf>,
    /// Write the final `U_b`, `V_b`, `α_b` here as JSON.
    pub dump_normal_equations: Option<PathBuf>,
    /// Per-date LSM coefficients as CSV.
    pub lsm_coefficients: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: None,
            spot: 36.0,
            rate: 0.06,
            vol: 0.2,
            strike: 40.0,
            maturity: 1.0,
            dates_per_year: 50,
            n_paths: 100_000,
            n_iterations: 100,
            group_size: 10,
            basis: BasisKind::TimeAffineQuadratic,
            lambda: 2.0,
            mu: 2.0,
            nu: 0.99,
            beta: None,
            beta_shrink: 1.0,
            boundary_weights: true,
            seed: 42,
            workers: default_workers(),
            chunk_size: amc_core::parallel::DEFAULT_CHUNK_SIZE,
            ridge: amc_core::regression::DEFAULT_RIDGE,
            bootstrap: BootstrapMode::European,
            warm_start_file: None,
            lsm_parallel_paths: false,
            fd_time_steps: 40_000,
            fd_space_steps: 1_000,
            fd_s_max: None,
            fd_method: FdMode::Projection,
            psor_omega: 1.2,
            psor_tol: 1e-8,
            psor_max_iter: 10_000,
            fd_bermudan: false,
            converge_axis: StudyAxis::Paths,
            converge_points: vec![10_000, 40_000, 160_000],
            converge_repeats: 5,
            out_dir: PathBuf::from("out"),
            format: OutputFormat::Json,
            save_coefficients: None,
            dump_normal_equations: None,
            lsm_coefficients: None,
        }
    }
}

/// Reads a flag value as a TOML scalar or array, falling back to a bare string.
fn flag_value(raw: &str) -> toml::Value {
    match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => toml::Value::String(raw.to_owned()),
    }
}

/// Resolves `args` (everything after the command) against an optional file
/// and `env_seed`, then validates.
pub fn parse_config(
    command: Command,
    args: &[String],
    env_seed: Option<&str>,
) -> Result<RunConfig, ConfigError> {
    let mut file: Option<PathBuf> = None;
    let mut flags = toml::Table::new();
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        let Some(body) = arg.strip_prefix("--") else {
            return Err(ConfigError::Argument(arg.clone()));
        };
        let (key, value) = match body.split_once('=') {
            Some((k, v)) => (k.replace('-', "_"), v.to_owned()),
            None if body == "config" => {
                let v = it
                    .next()
                    .ok_or_else(|| ConfigError::Argument(arg.clone()))?;
                ("config".to_owned(), v.clone())
            }
            None => return Err(ConfigError::Argument(arg.clone())),
        };
        if key == "config" {
            file = Some(PathBuf::from(value));
        } else {
            flags.insert(key, flag_value(&value));
        }
    }

    let mut table = match &file {
        Some(path) => read_table(path)?,
        None => toml::Table::new(),
    };
    if let Some(seed) = env_seed {
        let v = seed
            .trim()
            .parse::<i64>()
            .map_err(|e| ConfigError::key("seed", format!("AMC_SEED: {e}")))?;
        table.insert("seed".into(), toml::Value::Integer(v));
    }
    table.extend(flags);

    let mut config: RunConfig = serde_path_to_error::deserialize(toml::Value::Table(table))
        .map_err(|e| {
            let key = e.path().to_string();
            let message = e.into_inner().to_string();
            match message.strip_prefix("unknown field `") {
                Some(rest) => {
                    let name = rest.split('`').next().unwrap_or_default();
                    ConfigError::key(name, message.clone())
                }
                None => ConfigError::key(&key, message),
            }
        })?;
    config.command = Some(command);
    config.validate()?;
    Ok(config)
}

fn read_table(path: &Path) -> Result<toml::Table, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::File {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    text.parse::<toml::Table>().map_err(|e| ConfigError::File {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = |key: &str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(ConfigError::key(key, "must be finite and > 0"))
            }
        };
        positive("spot", self.spot)?;
        positive("strike", self.strike)?;
        positive("maturity", self.maturity)?;
        if !(self.vol >= 0.0 && self.vol.is_finite()) {
            return Err(ConfigError::key("vol", "must be finite and >= 0"));
        }
        if !self.rate.is_finite() {
            return Err(ConfigError::key("rate", "must be finite"));
        }
        if self.dates_per_year == 0 {
            return Err(ConfigError::key("dates_per_year", "must be >= 1"));
        }
        if self.n_dates() == 0 {
            return Err(ConfigError::key(
                "dates_per_year",
                "gives no exercise date before maturity",
            ));
        }
        if self.workers == 0 {
            return Err(ConfigError::key("workers", "must be >= 1"));
        }
        if self.n_iterations == 0 {
            return Err(ConfigError::key("n_iterations", "must be >= 1"));
        }
        if self.n_paths == 0 || !self.n_paths.is_multiple_of(self.n_iterations) {
            return Err(ConfigError::key(
                "n_paths",
                format!(
                    "must be a positive multiple of n_iterations ({})",
                    self.n_iterations
                ),
            ));
        }
        if self.group_size == 0 {
            return Err(ConfigError::key("group_size", "must be >= 1"));
        }
        // With one date per block t is constant, so t·f duplicates f.
        if self.basis == BasisKind::TimeAffineQuadratic && self.group_size == 1 {
            return Err(ConfigError::key(
                "group_size",
                "the time-affine basis needs at least 2 dates per group; use basis = \"quadratic\"",
            ));
        }
        if self.chunk_size == 0 {
            return Err(ConfigError::key("chunk_size", "must be >= 1"));
        }
        if !(self.ridge >= 0.0 && self.ridge.is_finite()) {
            return Err(ConfigError::key("ridge", "must be finite and >= 0"));
        }
        if let Some(b) = self.beta {
            positive("beta", b)?;
        }
        self.weights()
            .validate(self.n_iterations, self.n_dates())
            .map_err(|e| core_key_error(&e))?;
        if self.bootstrap == BootstrapMode::WarmStart && self.warm_start_file.is_none() {
            return Err(ConfigError::key(
                "warm_start_file",
                "required when bootstrap = \"warm-start\"",
            ));
        }
        if self.fd_time_steps == 0 {
            return Err(ConfigError::key("fd_time_steps", "must be >= 1"));
        }
        if self.fd_space_steps < 3 {
            return Err(ConfigError::key("fd_space_steps", "must be >= 3"));
        }
        if self.fd_s_max() <= self.strike.max(self.spot) {
            return Err(ConfigError::key(
                "fd_s_max",
                "must exceed both strike and spot",
            ));
        }
        if !(self.psor_omega > 0.0 && self.psor_omega < 2.0) {
            return Err(ConfigError::key("psor_omega", "must lie in (0, 2)"));
        }
        positive("psor_tol", self.psor_tol)?;
        if self.converge_points.len() < 3 {
            return Err(ConfigError::key(
                "converge_points",
                "needs at least 3 points",
            ));
        }
        if self.converge_points.contains(&0) {
            return Err(ConfigError::key(
                "converge_points",
                "every point must be >= 1",
            ));
        }
        if self.converge_repeats == 0 {
            return Err(ConfigError::key("converge_repeats", "must be >= 1"));
        }
        Ok(())
    }

    pub fn n_dates(&self) -> usize {
        (self.dates_per_year as f64 * self.maturity).round() as usize
    }

    pub fn market(&self) -> MarketParams<f64> {
        MarketParams {
            spot: self.spot,
            rate: self.rate,
            vol: self.vol,
            strike: self.strike,
            maturity: self.maturity,
        }
    }

    pub fn schedule(&self) -> amc_core::Result<ExerciseSchedule<f64>> {
        ExerciseSchedule::per_year(self.maturity, self.dates_per_year)
    }

    pub fn weights(&self) -> WeightScheme<f64> {
        WeightScheme {
            lambda: self.lambda,
            mu: self.mu,
            nu: self.nu,
            beta: BetaSpec::Scalar(self.beta.unwrap_or(0.2 * self.strike)),
            beta_shrink: self.beta_shrink,
            boundary_weights: self.boundary_weights,
        }
    }

    pub fn fd_s_max(&self) -> f64 {
        self.fd_s_max.unwrap_or(4.0 * self.strike)
    }

    pub fn fd_grid(&self) -> FdGrid<f64> {
        FdGrid {
            n_time_steps: self.fd_time_steps,
            n_space_steps: self.fd_space_steps,
            s_max: self.fd_s_max(),
        }
    }

    pub fn fd_method(&self) -> FdMethod<f64> {
        match self.fd_method {
            FdMode::Projection => FdMethod::Projection,
            FdMode::Psor => FdMethod::Psor {
                omega: self.psor_omega,
                tol: self.psor_tol,
                max_iter: self.psor_max_iter,
            },
        }
    }

    pub fn lsm(&self) -> LsmConfig<f64> {
        LsmConfig {
            n_paths: self.n_paths,
            seed: self.seed,
            ridge: self.ridge,
            parallel_paths: self.lsm_parallel_paths,
            workers: self.workers,
        }
    }

    /// Builds the engine configuration, loading the warm-start file if any.
    pub fn parallel(&self) -> Result<ParallelConfig<f64>, crate::CliError> {
        let plan = IterationPlan::from_total(self.n_paths, self.n_iterations)?;
        let bootstrap = match self.bootstrap {
            BootstrapMode::European => Bootstrap::European,
            BootstrapMode::WarmStart => {
                let path = self.warm_start_file.as_ref().expect("validated");
                let json = std::fs::read_to_string(path)
                    .map_err(|e| crate::CliError::Io(format!("{}: {e}", path.display())))?;
                let spec = BasisSpec::new(self.basis, self.group_size, &self.schedule()?)?;
                Bootstrap::WarmStart(CoefficientSet::from_json(&json, &spec)?)
            }
        };
        Ok(ParallelConfig {
            plan,
            weights: self.weights(),
            basis: self.basis,
            group_size: self.group_size,
            seed: self.seed,
            workers: self.workers,
            chunk_size: self.chunk_size,
            ridge: self.ridge,
            bootstrap,
        })
    }

    /// Echo stored in every result.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("plain data")
    }
}

fn core_key_error(e: &amc_core::Error) -> ConfigError {
    match e {
        amc_core::Error::InvalidParameter { name, reason } => {
            ConfigError::key(name, reason.clone())
        }
        other => ConfigError::key("config", other.to_string()),
    }
}
