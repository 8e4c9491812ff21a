//! Flag / config-file / environment precedence.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde_json::Value;

use crate::args::{CommonArgs, Format, Unit};
use crate::CliError;

pub const SEED_ENV: &str = "HOMODYNE_LAB_SEED";
pub const DEFAULT_SEED: u64 = 7;
pub const DEFAULT_GRID_N: usize = 4096;
pub const DEFAULT_GRID_HALF_WIDTH: f64 = 10.0;

/// Argument struct that can be layered over a config file.
pub trait Layered: Sized + Default + DeserializeOwned {
    fn keys() -> Vec<&'static str>;
    fn or(self, other: Self) -> Self;
    fn common(&self) -> &CommonArgs;
}

/// Fills unset flags from the `--config` document, if any.
pub fn layer<A: Layered>(cli: A) -> Result<A, CliError> {
    let Some(path) = cli.common().config.clone() else {
        return Ok(cli);
    };
    let file: A = read_config(&path, &A::keys())?;
    Ok(cli.or(file))
}

fn read_config<A: DeserializeOwned>(path: &Path, keys: &[&str]) -> Result<A, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::usage(format!("config {} is not valid JSON: {e}", path.display())))?;
    let Value::Object(map) = &value else {
        return Err(CliError::usage(format!("config {} must be a JSON object", path.display())));
    };
    if let Some(unknown) = map.keys().find(|k| !keys.contains(&k.as_str()) || *k == "config") {
        return Err(CliError::usage(format!(
            "config {}: unknown key \"{unknown}\" for this subcommand",
            path.display()
        )));
    }
    serde_json::from_value(value)
        .map_err(|e| CliError::usage(format!("config {}: {e}", path.display())))
}

/// Settings shared by every subcommand after precedence is applied.
#[derive(Debug, Clone)]
pub struct Context {
    pub seed: u64,
    pub workers: usize,
    pub grid_n: usize,
    pub grid_half_width: f64,
    pub format: Format,
    pub unit: Unit,
    pub out: Option<PathBuf>,
    pub timing: bool,
}

impl Context {
    pub fn resolve(common: &CommonArgs, default_format: Format) -> Result<Self, CliError> {
        let seed = match common.seed {
            Some(s) => s,
            None => env_seed()?.unwrap_or(DEFAULT_SEED),
        };
        let workers = common.workers.unwrap_or_else(|| {
            std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
        });
        if workers == 0 {
            return Err(CliError::usage("--workers must be at least 1"));
        }
        let grid_n = common.grid_n.unwrap_or(DEFAULT_GRID_N);
        if grid_n < 64 {
            return Err(CliError::usage("--grid-n must be at least 64"));
        }
        let grid_half_width = common.grid_half_width.unwrap_or(DEFAULT_GRID_HALF_WIDTH);
        if !(grid_half_width > 0.0 && grid_half_width.is_finite()) {
            return Err(CliError::usage("--grid-half-width must be positive"));
        }
        Ok(Self {
            seed,
            workers,
            grid_n,
            grid_half_width,
            format: common.format.unwrap_or(default_format),
            unit: common.unit.unwrap_or(Unit::Nats),
            out: common.out.clone(),
            timing: common.timing,
        })
    }

    /// Runs `f` on a pool of `self.workers` threads.
    pub fn install<R: Send>(&self, f: impl FnOnce() -> R + Send) -> Result<R, CliError> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| CliError::usage(format!("cannot start {} workers: {e}", self.workers)))?;
        Ok(pool.install(f))
    }
}

fn env_seed() -> Result<Option<u64>, CliError> {
    match std::env::var(SEED_ENV) {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::usage(format!("{SEED_ENV}={s:?} is not an unsigned integer"))),
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(CliError::usage(format!("{SEED_ENV}: {e}"))),
    }
}

/// Rejects non-finite or out-of-range numeric settings.
pub fn require(ok: bool, message: impl Into<String>) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(CliError::usage(message))
    }
}
