//! Command-line and config-file arguments.
//!
//! Every subcommand's argument struct doubles as the schema of the `--config`
//! JSON document: a flat object whose keys are the long flag names with `-`
//! replaced by `_`. All fields are optional so that precedence can be applied
//! field by field (flag, then config file, then built-in default).

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::config::Layered;

/// Implements `or` (field-wise precedence) and the list of config keys.
macro_rules! mergeable {
    ($name:ident { $($field:ident),* $(,)? } $(flags { $($flag:ident),* })? $(nested { $($nest:ident),* })?) => {
        impl $name {
            pub fn keys() -> Vec<&'static str> {
                #[allow(unused_mut)]
                let mut keys = vec![$(stringify!($field)),* $($(, stringify!($flag))*)?];
                $($(keys.extend(<_ as Keys>::keys_of(&Self::default().$nest));)*)?
                keys
            }

            pub fn or(self, other: Self) -> Self {
                Self {
                    $($field: self.$field.or(other.$field),)*
                    $($($flag: self.$flag || other.$flag,)*)?
                    $($($nest: self.$nest.or(other.$nest),)*)?
                }
            }
        }

        impl Keys for $name {
            fn keys_of(&self) -> Vec<&'static str> {
                Self::keys()
            }
        }
    };
}

/// [`mergeable`] plus [`Layered`] for subcommand structs.
macro_rules! layered {
    ($name:ident { $($field:ident),* $(,)? } $(flags { $($flag:ident),* })?) => {
        mergeable!($name { $($field),* } $(flags { $($flag),* })? nested { common });

        impl Layered for $name {
            fn keys() -> Vec<&'static str> {
                $name::keys()
            }
            fn or(self, other: Self) -> Self {
                $name::or(self, other)
            }
            fn common(&self) -> &CommonArgs {
                &self.common
            }
        }
    };
}

pub trait Keys {
    fn keys_of(&self) -> Vec<&'static str>;
}

#[derive(Debug, Parser)]
#[command(
    name = "homodyne-lab",
    version,
    about = "Classical capacity of noisy homodyne measurement: closed forms, sweeps, verification suites and Monte-Carlo checks",
    after_help = "Exit codes: 0 all checks pass, 1 a mathematical check was violated, 2 usage or configuration error.\n\
                  Precedence: command-line flag > --config JSON > HOMODYNE_LAB_SEED (seed only) > default."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Capacity, upper bound and optimal ensemble at one (E, beta).
    Capacity(CapacityArgs),
    /// Capacity and bound over an energy range (one CSV row per E).
    Sweep(SweepArgs),
    /// Generalized log-Sobolev inequality suite on random wavefunctions.
    VerifyLogsob(LogsobArgs),
    /// Numerical optimality certificate of the Gaussian encoding.
    VerifyOptimality(OptimalityArgs),
    /// Monte-Carlo mutual information through the channel.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Unit {
    Nats,
    Bits,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// Hermite superpositions and momentum-kicked Gaussian mixtures.
    Random,
    /// Gaussians of random variance and mean.
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorChoice {
    GaussianMle,
    HistogramPlugin,
    Both,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct CommonArgs {
    /// Master seed [fallback: $HOMODYNE_LAB_SEED, then 7]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads [default: available parallelism]
    #[arg(long)]
    pub workers: Option<usize>,
    /// Grid points [default: 4096]
    #[arg(long)]
    pub grid_n: Option<usize>,
    /// Smallest grid half-width L; grids grow beyond it as the states require [default: 10]
    #[arg(long)]
    pub grid_half_width: Option<f64>,
    /// Output format [default: csv for capacity/sweep, json otherwise]
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Information unit for capacities and mutual information [default: nats]
    #[arg(long, value_enum)]
    pub unit: Option<Unit>,
    /// Write output to this file instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON document with default values for any of these flags
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Include wall_time_s in reports (makes them non-reproducible byte for byte)
    #[arg(long)]
    pub timing: bool,
}
mergeable!(CommonArgs { seed, workers, grid_n, grid_half_width, format, unit, out, config } flags { timing });

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct CapacityArgs {
    /// Mean oscillator energy E >= 1/2 [default: 1]
    #[arg(long)]
    pub energy: Option<f64>,
    /// Measurement noise variance beta >= 0 [default: 1]
    #[arg(long)]
    pub beta: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
}
layered!(CapacityArgs { energy, beta });

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepArgs {
    /// Measurement noise variance beta >= 0 [default: 1]
    #[arg(long)]
    pub beta: Option<f64>,
    /// First energy, >= 1/2 [default: 0.5]
    #[arg(long)]
    pub energy_min: Option<f64>,
    /// Last energy [default: 8]
    #[arg(long)]
    pub energy_max: Option<f64>,
    /// Number of equally spaced energies, >= 2 [default: 76]
    #[arg(long)]
    pub steps: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
}
layered!(SweepArgs { beta, energy_min, energy_max, steps });

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct LogsobArgs {
    /// Number of seeded test wavefunctions [default: 200]
    #[arg(long)]
    pub psi_count: Option<usize>,
    /// Comma-separated heat-flow times [default: 0,0.25,0.5,1,2]
    #[arg(long, value_delimiter = ',')]
    pub t_values: Option<Vec<f64>>,
    /// Comma-separated delta values [default: 0.25,0.5,1,2]
    #[arg(long, value_delimiter = ',')]
    pub delta_values: Option<Vec<f64>>,
    /// Cases checked against a finite difference in t [default: 50]
    #[arg(long)]
    pub derivative_cases: Option<usize>,
    /// Points per axis of the log-spaced (u, v) grid of the Gaussian margin [default: 200]
    #[arg(long)]
    pub appendix_n: Option<usize>,
    /// Test-wavefunction family [default: random]
    #[arg(long, value_enum)]
    pub family: Option<Family>,
    /// Largest accepted F and dF/dt [default: 5e-4]
    #[arg(long)]
    pub tol_gap: Option<f64>,
    /// Largest accepted |F| for Gaussians with variance delta [default: 1e-4]
    #[arg(long)]
    pub tol_equality: Option<f64>,
    /// Relative agreement of dF/dt with the finite difference [default: 1e-3]
    #[arg(long)]
    pub tol_derivative_rel: Option<f64>,
    /// Finite-difference step in t [default: 1e-4]
    #[arg(long)]
    pub tol_derivative_step: Option<f64>,
    /// Zero tolerance of the Gaussian margin on u = v [default: 1e-12]
    #[arg(long)]
    pub tol_appendix_zero: Option<f64>,
    /// Relative agreement of the margin's u-derivative with finite differences [default: 1e-6]
    #[arg(long)]
    pub tol_appendix_derivative_rel: Option<f64>,
    /// Self-test: flip the sign of the Dirichlet term so that the suite must fail
    #[arg(long)]
    pub negate_rhs: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
}
layered!(LogsobArgs {
    psi_count, t_values, delta_values, derivative_cases, appendix_n, family, tol_gap,
    tol_equality, tol_derivative_rel, tol_derivative_step, tol_appendix_zero,
    tol_appendix_derivative_rel
} flags { negate_rhs });

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimalityArgs {
    /// Mean oscillator energy E >= 1/2 [default: 1]
    #[arg(long)]
    pub energy: Option<f64>,
    /// Measurement noise variance beta >= 0 [default: 1]
    #[arg(long)]
    pub beta: Option<f64>,
    /// Signal displacements x = k*sqrt(gamma), k centered on 0 [default: 7]
    #[arg(long)]
    pub displacements: Option<usize>,
    /// Random pure states for condition (i) [default: 500]
    #[arg(long)]
    pub pure_cases: Option<usize>,
    /// Random (psi, rho) pairs with mixed rho for condition (i) [default: 100]
    #[arg(long)]
    pub mixed_cases: Option<usize>,
    /// Random pure-state ensembles checked against the convex closure [default: 100]
    #[arg(long)]
    pub em_trials: Option<usize>,
    /// Build the certificate with delta scaled by this factor (negative control) [default: 1]
    #[arg(long)]
    pub perturb_delta: Option<f64>,
    /// Largest accepted condition (ii) residual norm [default: 1e-5]
    #[arg(long)]
    pub tol_condition_ii: Option<f64>,
    /// Most negative accepted condition (i) margin, as a positive number [default: 5e-4]
    #[arg(long)]
    pub tol_condition_i: Option<f64>,
    /// Dual value against the closed-form convex closure [default: 1e-12]
    #[arg(long)]
    pub tol_dual_identity: Option<f64>,
    /// Dual value against grid entropies [default: 5e-4]
    #[arg(long)]
    pub tol_dual_grid: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
}
layered!(OptimalityArgs {
    energy, beta, displacements, pure_cases, mixed_cases, em_trials, perturb_delta,
    tol_condition_ii, tol_condition_i, tol_dual_identity, tol_dual_grid
});

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct SimulateArgs {
    /// Mean oscillator energy E >= 1/2 [default: 1]
    #[arg(long)]
    pub energy: Option<f64>,
    /// Measurement noise variance beta >= 0 [default: 1]
    #[arg(long)]
    pub beta: Option<f64>,
    /// Samples per run, >= 10000 [default: 1000000]
    #[arg(long)]
    pub samples: Option<usize>,
    /// Mutual-information estimator [default: gaussian-mle]
    #[arg(long, value_enum)]
    pub estimator: Option<EstimatorChoice>,
    /// Independent runs; run r uses seed + r [default: 1]
    #[arg(long)]
    pub runs: Option<usize>,
    /// Largest accepted |z| of an estimate against the closed form [default: 5]
    #[arg(long)]
    pub tol_z: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
}
layered!(SimulateArgs { energy, beta, samples, estimator, runs, tol_z });
