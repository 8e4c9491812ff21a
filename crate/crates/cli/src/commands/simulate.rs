//! `simulate`: Monte-Carlo mutual information of the optimal Gaussian
//! encoding, compared with the closed form.

use std::time::Instant;

use homodyne_core::ensemble_sim::{
    analytic_mutual_information, chunk_count, estimate_mutual_information, sample_chunk,
    Estimator, MiEstimate, SimulationConfig,
};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::args::{EstimatorChoice, Format, SimulateArgs, Unit};
use crate::config::{layer, require, Context};
use crate::output::{emit, fmt_g};
use crate::report::{Check, Sense, VerificationReport};
use crate::{CliError, Outcome};

pub const DEFAULT_ENERGY: f64 = 1.0;
pub const DEFAULT_BETA: f64 = 1.0;
pub const DEFAULT_SAMPLES: usize = 1_000_000;
pub const MIN_SAMPLES: usize = 10_000;
pub const DEFAULT_TOL_Z: f64 = 5.0;
/// Coverage is reported as a check once there are this many runs.
pub const COVERAGE_MIN_RUNS: usize = 100;
pub const COVERAGE_SE: f64 = 3.0;
pub const COVERAGE_TARGET: f64 = 0.99;

#[derive(Debug, Clone, Serialize)]
pub struct SimulateParams {
    pub energy: f64,
    pub beta: f64,
    pub samples: usize,
    pub seed: u64,
    /// Not reported: results do not depend on it.
    #[serde(skip)]
    pub workers: usize,
    pub runs: usize,
    pub estimator: EstimatorChoice,
    pub tol_z: f64,
    pub unit: Unit,
}

impl SimulateParams {
    pub fn resolve(args: &SimulateArgs, ctx: &Context) -> Result<Self, CliError> {
        let p = Self {
            energy: args.energy.unwrap_or(DEFAULT_ENERGY),
            beta: args.beta.unwrap_or(DEFAULT_BETA),
            samples: args.samples.unwrap_or(DEFAULT_SAMPLES),
            seed: ctx.seed,
            workers: ctx.workers,
            runs: args.runs.unwrap_or(1),
            estimator: args.estimator.unwrap_or(EstimatorChoice::GaussianMle),
            tol_z: args.tol_z.unwrap_or(DEFAULT_TOL_Z),
            unit: ctx.unit,
        };
        require(p.samples >= MIN_SAMPLES, format!("--samples must be >= {MIN_SAMPLES} (got {})", p.samples))?;
        require(p.runs >= 1, "--runs must be >= 1")?;
        require(p.tol_z.is_finite() && p.tol_z > 0.0, format!("--tol-z must be positive (got {})", p.tol_z))?;
        p.config(0, Estimator::GaussianMle).validate()?;
        Ok(p)
    }

    pub fn estimators(&self) -> Vec<Estimator> {
        match self.estimator {
            EstimatorChoice::GaussianMle => vec![Estimator::GaussianMle],
            EstimatorChoice::HistogramPlugin => vec![Estimator::HistogramPlugin],
            EstimatorChoice::Both => Estimator::ALL.to_vec(),
        }
    }

    /// Run `r` draws from master seed `seed + r`.
    pub fn run_seed(&self, run: usize) -> u64 {
        self.seed.wrapping_add(run as u64)
    }

    fn config(&self, run: usize, estimator: Estimator) -> SimulationConfig<f64> {
        SimulationConfig {
            energy: self.energy,
            beta: self.beta,
            samples: self.samples,
            seed: self.run_seed(run),
            estimator,
        }
    }
}

/// One estimate, in nats.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RunRecord {
    pub run: usize,
    pub seed: u64,
    pub estimator: Estimator,
    pub estimate: MiEstimate,
    pub analytic: f64,
}

impl RunRecord {
    /// `(estimate − analytic)/SE`; zero when both vanish.
    pub fn z_score(&self) -> f64 {
        z(self.estimate.nats - self.analytic, self.estimate.standard_error)
    }
}

fn z(diff: f64, se: f64) -> f64 {
    if diff == 0.0 {
        0.0
    } else {
        diff / se
    }
}

pub fn run(args: SimulateArgs) -> Result<Outcome, CliError> {
    let args = layer(args)?;
    let ctx = Context::resolve(&args.common, Format::Json)?;
    let params = SimulateParams::resolve(&args, &ctx)?;
    let start = Instant::now();
    let records = ctx.install(|| simulate(&params))??;
    let checks = checks(&params, &records);
    let wall = super::wall_time(&ctx, "simulate", start);
    let text = match ctx.format {
        Format::Json => VerificationReport::from_checks("simulate", json!(params), &checks, wall).to_json(),
        Format::Csv => to_csv(&records, params.samples, params.unit),
    };
    emit(&text, ctx.out.as_deref())?;
    Ok(Outcome::from_pass(checks.iter().all(Check::passed)))
}

/// Every run and estimator, ordered by run then estimator. Chunks are drawn
/// in parallel; each run's samples are shared by its estimators.
pub fn simulate(p: &SimulateParams) -> Result<Vec<RunRecord>, CliError> {
    let analytic = analytic_mutual_information(p.energy, p.beta)?;
    let ensemble = p.config(0, Estimator::GaussianMle).ensemble()?;
    let estimators = p.estimators();
    let per_run: Vec<Vec<RunRecord>> = (0..p.runs)
        .into_par_iter()
        .map(|run| {
            let config = p.config(run, estimators[0]);
            let samples: Vec<_> = (0..chunk_count(p.samples))
                .into_par_iter()
                .flat_map_iter(|k| sample_chunk(&config, &ensemble, k))
                .collect();
            estimators
                .par_iter()
                .map(|&estimator| {
                    Ok(RunRecord {
                        run,
                        seed: config.seed,
                        estimator,
                        estimate: estimate_mutual_information(&samples, estimator)?,
                        analytic,
                    })
                })
                .collect::<Result<Vec<_>, CliError>>()
        })
        .collect::<Result<_, _>>()?;
    Ok(per_run.into_iter().flatten().collect())
}

/// `|z| ≤ tol_z` per estimate, pairwise agreement when both estimators ran,
/// and 3-SE coverage per estimator once there are enough runs.
pub fn checks(p: &SimulateParams, records: &[RunRecord]) -> Vec<Check> {
    let u = p.unit;
    let mut out: Vec<Check> = records
        .iter()
        .map(|r| {
            let params = json!({
                "run": r.run,
                "estimator": r.estimator,
                "samples": p.samples,
                "estimate": u.convert(r.estimate.nats),
                "standard_error": u.convert(r.estimate.standard_error),
                "analytic": u.convert(r.analytic),
            });
            Check::new(
                format!("z/{}/run={}", r.estimator, r.run),
                params,
                Some(r.seed),
                r.z_score(),
                Sense::AbsAtMost,
                p.tol_z,
            )
        })
        .collect();

    if p.estimator == EstimatorChoice::Both {
        for pair in records.chunks(2) {
            let [a, b] = pair else { continue };
            let se = a.estimate.standard_error.hypot(b.estimate.standard_error);
            out.push(Check::new(
                format!("agreement/run={}", a.run),
                json!({ "run": a.run, a.estimator.name(): u.convert(a.estimate.nats), b.estimator.name(): u.convert(b.estimate.nats) }),
                Some(a.seed),
                z(a.estimate.nats - b.estimate.nats, se),
                Sense::AbsAtMost,
                p.tol_z,
            ));
        }
    }

    if p.runs >= COVERAGE_MIN_RUNS {
        for estimator in p.estimators() {
            let runs: Vec<_> = records.iter().filter(|r| r.estimator == estimator).collect();
            let inside = runs.iter().filter(|r| r.z_score().abs() <= COVERAGE_SE).count();
            out.push(Check::new(
                format!("coverage/{estimator}"),
                json!({ "estimator": estimator, "runs": runs.len(), "within_3se": inside }),
                Some(p.seed),
                inside as f64 / runs.len() as f64,
                Sense::AtLeast,
                COVERAGE_TARGET,
            ));
        }
    }
    out
}

pub fn to_csv(records: &[RunRecord], samples: usize, unit: Unit) -> String {
    let s = unit.suffix();
    let mut out = format!("run,seed,estimator,samples,estimate_{s},standard_error_{s},analytic_{s},z_score\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.run,
            r.seed,
            r.estimator,
            samples,
            fmt_g(unit.convert(r.estimate.nats)),
            fmt_g(unit.convert(r.estimate.standard_error)),
            fmt_g(unit.convert(r.analytic)),
            fmt_g(r.z_score()),
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use homodyne_core::ensemble_sim::sample_channel;

    fn params(estimator: EstimatorChoice, runs: usize) -> SimulateParams {
        let args = SimulateArgs {
            samples: Some(20_000),
            estimator: Some(estimator),
            runs: Some(runs),
            ..Default::default()
        };
        let ctx = Context::resolve(&args.common, Format::Json).unwrap();
        SimulateParams::resolve(&args, &ctx).unwrap()
    }

    #[test]
    fn parallel_sampling_matches_sequential() {
        let p = params(EstimatorChoice::GaussianMle, 1);
        let records = simulate(&p).unwrap();
        let samples = sample_channel(&p.config(0, Estimator::GaussianMle)).unwrap();
        let direct = estimate_mutual_information(&samples, Estimator::GaussianMle).unwrap();
        assert_eq!(records[0].estimate, direct);
    }

    #[test]
    fn both_estimators_agree() {
        let p = params(EstimatorChoice::Both, 2);
        let records = simulate(&p).unwrap();
        assert_eq!(records.len(), 4);
        let checks = checks(&p, &records);
        assert_eq!(checks.len(), 6);
        assert!(checks.iter().all(Check::passed), "{checks:#?}");
    }

    #[test]
    fn zero_difference_has_zero_z() {
        assert_eq!(z(0.0, 0.0), 0.0);
        assert!(z(1.0, 0.0).is_infinite());
    }

    #[test]
    fn csv_header() {
        let p = params(EstimatorChoice::GaussianMle, 1);
        let csv = to_csv(&simulate(&p).unwrap(), p.samples, Unit::Bits);
        assert!(csv.starts_with("run,seed,estimator,samples,estimate_bits,standard_error_bits,analytic_bits,z_score\n"));
        assert_eq!(csv.lines().count(), 2);
    }
}
