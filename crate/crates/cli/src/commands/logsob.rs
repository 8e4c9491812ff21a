//! `verify-logsob`: the generalized log-Sobolev inequality `F(t, δ) ≤ 0`
//! and its t-derivative over a seeded wavefunction family, the Gaussian
//! equality cases, and the closed-form Gaussian margin on a `(u, v)` grid.

use std::time::Instant;

use homodyne_core::waveform_lab::{
    appendix_derivative, appendix_inequality_margin, generate_test_wavefunction,
    half_width_for, random_family_member, stream_rng, HeatFlowPoint, LogSobolevProbe,
    LogSobolevTolerances, WaveFunctionKind, WaveFunctionSpec,
};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::args::{Family, Format, LogsobArgs};
use crate::config::{layer, require, Context};
use crate::output::emit;
use crate::report::{Check, Sense, VerificationReport};
use crate::{CliError, Outcome};

pub const DEFAULT_PSI_COUNT: usize = 200;
pub const DEFAULT_T_VALUES: [f64; 5] = [0.0, 0.25, 0.5, 1.0, 2.0];
pub const DEFAULT_DELTA_VALUES: [f64; 4] = [0.25, 0.5, 1.0, 2.0];
pub const DEFAULT_DERIVATIVE_CASES: usize = 50;
pub const DEFAULT_APPENDIX_N: usize = 200;
/// `u, v` range of the Gaussian-margin grid.
pub const APPENDIX_RANGE: (f64, f64) = (1e-3, 1e3);

/// Finite-difference cases draw from seed streams starting here, far from
/// the wavefunction indices.
const DERIVATIVE_STREAM_BASE: u64 = 1 << 32;
/// Magnitude below which the derivative comparison becomes absolute:
/// `|d − fd| ≤ rel · max(|d|, |fd|, FLOOR)`.
const DERIVATIVE_FLOOR: f64 = 1e-4;

#[derive(Debug, Clone, Serialize)]
pub struct LogsobParams {
    pub seed: u64,
    /// Not reported: results do not depend on it.
    #[serde(skip)]
    pub workers: usize,
    pub grid_n: usize,
    pub grid_half_width: f64,
    pub psi_count: usize,
    pub t_values: Vec<f64>,
    pub delta_values: Vec<f64>,
    pub derivative_cases: usize,
    pub appendix_n: usize,
    pub family: Family,
    pub negate_rhs: bool,
    pub tolerances: LogSobolevTolerances,
}

impl LogsobParams {
    pub fn resolve(args: &LogsobArgs, ctx: &Context) -> Result<Self, CliError> {
        let d = LogSobolevTolerances::default();
        let p = Self {
            seed: ctx.seed,
            workers: ctx.workers,
            grid_n: ctx.grid_n,
            grid_half_width: ctx.grid_half_width,
            psi_count: args.psi_count.unwrap_or(DEFAULT_PSI_COUNT),
            t_values: args.t_values.clone().unwrap_or(DEFAULT_T_VALUES.to_vec()),
            delta_values: args.delta_values.clone().unwrap_or(DEFAULT_DELTA_VALUES.to_vec()),
            derivative_cases: args.derivative_cases.unwrap_or(DEFAULT_DERIVATIVE_CASES),
            appendix_n: args.appendix_n.unwrap_or(DEFAULT_APPENDIX_N),
            family: args.family.unwrap_or(Family::Random),
            negate_rhs: args.negate_rhs,
            tolerances: LogSobolevTolerances {
                gap: args.tol_gap.unwrap_or(d.gap),
                equality: args.tol_equality.unwrap_or(d.equality),
                derivative_rel: args.tol_derivative_rel.unwrap_or(d.derivative_rel),
                derivative_step: args.tol_derivative_step.unwrap_or(d.derivative_step),
                appendix_zero: args.tol_appendix_zero.unwrap_or(d.appendix_zero),
                appendix_derivative_rel: args
                    .tol_appendix_derivative_rel
                    .unwrap_or(d.appendix_derivative_rel),
            },
        };
        require(!p.t_values.is_empty(), "--t-values is empty")?;
        require(!p.delta_values.is_empty(), "--delta-values is empty")?;
        require(
            p.t_values.iter().all(|t| t.is_finite() && *t >= 0.0),
            "--t-values must be finite and >= 0",
        )?;
        require(
            p.delta_values.iter().all(|d| d.is_finite() && *d > 0.0),
            "--delta-values must be finite and > 0",
        )?;
        require(p.appendix_n >= 2, "--appendix-n must be at least 2")?;
        require(
            p.derivative_cases == 0 || p.psi_count > 0,
            "--derivative-cases needs --psi-count > 0",
        )?;
        let t = &p.tolerances;
        require(
            [t.gap, t.equality, t.derivative_rel, t.derivative_step, t.appendix_zero, t.appendix_derivative_rel]
                .iter()
                .all(|v| v.is_finite() && *v >= 0.0)
                && t.derivative_step > 0.0,
            "tolerances must be finite and >= 0 (step > 0)",
        )?;
        Ok(p)
    }

    fn max_t(&self) -> f64 {
        self.t_values.iter().copied().fold(0.0, f64::max)
    }

    /// Member `index` of the configured family, on a grid no narrower than
    /// `grid_half_width` with room for the heat flow (and the finite
    /// difference step beyond the largest t).
    pub fn spec(&self, index: u64) -> WaveFunctionSpec<f64> {
        let smoothing = self.max_t() + 2.0 * self.tolerances.derivative_step;
        let mut spec = match self.family {
            Family::Random => random_family_member(self.seed, index, self.grid_n, smoothing),
            Family::Gaussian => {
                let mut rng = stream_rng(self.seed, index);
                let kind = WaveFunctionKind::Gaussian {
                    variance: rng.random_range(0.2..2.5),
                    mean: rng.random_range(-1.0..1.0),
                };
                WaveFunctionSpec::auto(kind, self.grid_n, smoothing)
            }
        };
        spec.half_width = spec.half_width.max(self.grid_half_width);
        spec
    }

    /// `F`, with the Dirichlet term's sign flipped under `--negate-rhs`.
    fn gap(&self, probe: &LogSobolevProbe<f64>, point: &HeatFlowPoint<f64>, delta: f64) -> f64 {
        let f = probe.gap(point, delta);
        if self.negate_rhs {
            f + 4.0 * delta * delta * probe.dirichlet_energy()
        } else {
            f
        }
    }
}

pub fn run(args: LogsobArgs) -> Result<Outcome, CliError> {
    let args = layer(args)?;
    let ctx = Context::resolve(&args.common, Format::Json)?;
    let params = LogsobParams::resolve(&args, &ctx)?;
    let start = Instant::now();
    let checks = ctx.install(|| suite(&params))?;
    let report = VerificationReport::from_checks(
        "verify-logsob",
        json!(params),
        &checks,
        super::wall_time(&ctx, "verify-logsob", start),
    );
    let text = match ctx.format {
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv(),
    };
    emit(&text, ctx.out.as_deref())?;
    Ok(Outcome::from_pass(report.pass))
}

/// All checks, in a fixed order independent of scheduling.
pub fn suite(p: &LogsobParams) -> Vec<Check> {
    let mut checks: Vec<Check> = (0..p.psi_count as u64)
        .into_par_iter()
        .map(|i| family_checks(p, i))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    checks.extend(
        (0..p.derivative_cases as u64)
            .into_par_iter()
            .map(|c| derivative_check(p, c))
            .collect::<Vec<_>>(),
    );
    checks.extend(equality_checks(p));
    checks.extend(appendix_checks(p));
    checks
}

fn family_checks(p: &LogsobParams, index: u64) -> Vec<Check> {
    let spec = p.spec(index);
    let base = json!({ "psi_index": index, "state": spec, "grid_n": p.grid_n });
    let probe = match generate_test_wavefunction(&spec).and_then(|psi| LogSobolevProbe::new(&psi)) {
        Ok(probe) => probe,
        Err(e) => return vec![Check::failed(format!("psi={index}"), base, Some(p.seed), e)],
    };
    let tol = p.tolerances.gap;
    let mut out = Vec::new();
    let mut previous: Option<(f64, Vec<f64>)> = None;
    for &t in &p.t_values {
        let point = match probe.flow(t) {
            Ok(point) => point,
            Err(e) => {
                out.push(Check::failed(format!("gap/psi={index}/t={t}"), base.clone(), Some(p.seed), e));
                continue;
            }
        };
        let mut gaps = Vec::with_capacity(p.delta_values.len());
        for &delta in &p.delta_values {
            let params = with(&base, json!({ "t": t, "delta": delta, "mass_defect": point.mass_defect }));
            let f = p.gap(&probe, &point, delta);
            gaps.push(f);
            out.push(Check::new(
                format!("gap/psi={index}/t={t}/delta={delta}"),
                params.clone(),
                Some(p.seed),
                f,
                Sense::AtMost,
                tol,
            ));
            out.push(Check::new(
                format!("gap_derivative/psi={index}/t={t}/delta={delta}"),
                params,
                Some(p.seed),
                probe.gap_derivative(&point, delta),
                Sense::AtMost,
                tol,
            ));
        }
        if let Some((t_prev, prev)) = &previous {
            for ((&delta, f), f_prev) in p.delta_values.iter().zip(&gaps).zip(prev) {
                out.push(Check::new(
                    format!("monotone/psi={index}/t={t_prev}->{t}/delta={delta}"),
                    with(&base, json!({ "t_from": t_prev, "t_to": t, "delta": delta })),
                    Some(p.seed),
                    f - f_prev,
                    Sense::AtMost,
                    tol,
                ));
            }
        }
        previous = Some((t, gaps));
    }
    out
}

/// `∂F/∂t` against a second-order finite difference of `F` in `t`
/// (one-sided when `t < step`).
fn derivative_check(p: &LogsobParams, case: u64) -> Check {
    let mut rng = stream_rng(p.seed, DERIVATIVE_STREAM_BASE + case);
    let index = rng.random_range(0..p.psi_count as u64);
    let h = p.tolerances.derivative_step;
    // Centered differences need t ≥ h. At t = 0 the flow of a density with
    // near-zeros moves like √t, so a one-sided difference is only a fallback.
    let interior: Vec<f64> = p.t_values.iter().copied().filter(|&t| t >= h).collect();
    let times = if interior.is_empty() { &p.t_values } else { &interior };
    let t = times[rng.random_range(0..times.len())];
    let delta = p.delta_values[rng.random_range(0..p.delta_values.len())];
    let spec = p.spec(index);
    let case_id = format!("derivative_fd/case={case}");
    let params = json!({
        "case": case, "psi_index": index, "t": t, "delta": delta, "step": h,
        "state": spec, "grid_n": p.grid_n
    });
    let evaluate = || -> homodyne_core::Result<(f64, f64)> {
        let probe = LogSobolevProbe::new(&generate_test_wavefunction(&spec)?)?;
        let gap_at = |s: f64| probe.flow(s).map(|pt| probe.gap(&pt, delta));
        let analytic = probe.gap_derivative(&probe.flow(t)?, delta);
        let fd = if t >= h {
            (gap_at(t + h)? - gap_at(t - h)?) / (2.0 * h)
        } else {
            (-3.0 * gap_at(t)? + 4.0 * gap_at(t + h)? - gap_at(t + 2.0 * h)?) / (2.0 * h)
        };
        Ok((analytic, fd))
    };
    match evaluate() {
        Ok((analytic, fd)) => {
            let scale = analytic.abs().max(fd.abs()).max(DERIVATIVE_FLOOR);
            let params = with(&params, json!({ "analytic": analytic, "finite_difference": fd }));
            Check::new(
                case_id,
                params,
                Some(p.seed),
                (analytic - fd).abs() / scale,
                Sense::AtMost,
                p.tolerances.derivative_rel,
            )
        }
        Err(e) => Check::failed(case_id, params, Some(p.seed), e),
    }
}

/// Gaussian `ψ` whose density has variance `δ`: `F(t, δ) = 0` for all `t`.
fn equality_checks(p: &LogsobParams) -> Vec<Check> {
    let mut out = Vec::new();
    for &delta in &p.delta_values {
        let kind = WaveFunctionKind::Gaussian {
            variance: delta,
            mean: 0.0,
        };
        let half_width = half_width_for(delta + p.max_t(), 0.0).max(p.grid_half_width);
        let spec = WaveFunctionSpec::new(kind, p.grid_n, half_width);
        let base = json!({ "state": spec, "delta": delta, "grid_n": p.grid_n });
        let probe = match generate_test_wavefunction(&spec).and_then(|psi| LogSobolevProbe::new(&psi)) {
            Ok(probe) => probe,
            Err(e) => {
                out.push(Check::failed(format!("equality/delta={delta}"), base, None, e));
                continue;
            }
        };
        for &t in &p.t_values {
            let case_id = format!("equality/delta={delta}/t={t}");
            let params = with(&base, json!({ "t": t }));
            out.push(match probe.flow(t) {
                Ok(point) => Check::new(
                    case_id,
                    params,
                    None,
                    p.gap(&probe, &point, delta),
                    Sense::AbsAtMost,
                    p.tolerances.equality,
                ),
                Err(e) => Check::failed(case_id, params, None, e),
            });
        }
    }
    out
}

/// `n` log-spaced points on [`APPENDIX_RANGE`].
pub fn log_grid(n: usize) -> Vec<f64> {
    let (lo, hi) = (APPENDIX_RANGE.0.ln(), APPENDIX_RANGE.1.ln());
    (0..n)
        .map(|i| (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Five-point derivative in `u` of the Gaussian margin, and a bound on its
/// rounding error.
fn margin_fd(u: f64, v: f64) -> homodyne_core::Result<(f64, f64)> {
    let h = 1e-3 * u;
    let m = |x: f64| appendix_inequality_margin(x, v);
    let fd = (m(u - 2.0 * h)? - 8.0 * m(u - h)? + 8.0 * m(u + h)? - m(u + 2.0 * h)?) / (12.0 * h);
    let scale = m(u)?.abs() + (v / (1.0 + v)) * (1.0 + v / u) + 1.0;
    Ok((fd, 32.0 * f64::EPSILON * scale / h))
}

pub fn appendix_checks(p: &LogsobParams) -> Vec<Check> {
    let grid = log_grid(p.appendix_n);
    let tol = &p.tolerances;
    let mut out = Vec::with_capacity(2 * grid.len() * grid.len());
    for (i, &u) in grid.iter().enumerate() {
        for (j, &v) in grid.iter().enumerate() {
            let params = json!({ "u": u, "v": v });
            let margin = match appendix_inequality_margin(u, v) {
                Ok(m) => m,
                Err(e) => {
                    out.push(Check::failed(format!("appendix/u={u}/v={v}"), params, None, e));
                    continue;
                }
            };
            out.push(if i == j {
                Check::new(format!("appendix_zero/u={u}"), params.clone(), None, margin, Sense::AbsAtMost, tol.appendix_zero)
            } else {
                Check::new(format!("appendix_margin/u={u}/v={v}"), params.clone(), None, margin, Sense::AtLeast, -tol.appendix_zero)
            });
            let case_id = format!("appendix_derivative/u={u}/v={v}");
            out.push(match (appendix_derivative(u, v), margin_fd(u, v)) {
                (Ok(d), Ok((fd, noise))) => {
                    let scale = d.abs().max(fd.abs()).max(noise / tol.appendix_derivative_rel);
                    Check::new(
                        case_id,
                        with(&params, json!({ "analytic": d, "finite_difference": fd })),
                        None,
                        (d - fd).abs() / scale,
                        Sense::AtMost,
                        tol.appendix_derivative_rel,
                    )
                }
                (Err(e), _) | (_, Err(e)) => Check::failed(case_id, params, None, e),
            });
        }
    }
    out
}

/// Shallow merge of two JSON objects.
fn with(base: &serde_json::Value, extra: serde_json::Value) -> serde_json::Value {
    let mut v = base.clone();
    if let (Some(map), serde_json::Value::Object(more)) = (v.as_object_mut(), extra) {
        map.extend(more);
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(negate_rhs: bool) -> LogsobParams {
        LogsobParams {
            seed: 3,
            workers: 1,
            grid_n: 4096,
            grid_half_width: 10.0,
            psi_count: 6,
            t_values: vec![0.0, 0.5, 2.0],
            delta_values: vec![0.5, 1.0],
            derivative_cases: 4,
            appendix_n: 20,
            family: Family::Random,
            negate_rhs,
            tolerances: LogSobolevTolerances::default(),
        }
    }

    #[test]
    fn small_suite_passes_and_negation_fails() {
        let checks = suite(&small(false));
        let bad: Vec<_> = checks.iter().filter(|c| !c.passed()).collect();
        assert!(bad.is_empty(), "{bad:#?}");
        let negated = suite(&small(true));
        assert!(negated.iter().any(|c| !c.passed()));
    }

    #[test]
    fn suite_is_order_independent() {
        let p = small(false);
        let serial = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| suite(&p));
        let parallel = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap().install(|| suite(&p));
        assert_eq!(
            serde_json::to_string(&serial).unwrap(),
            serde_json::to_string(&parallel).unwrap()
        );
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(200);
        assert!((g[0] - 1e-3).abs() < 1e-15 && (g[199] - 1e3).abs() < 1e-9);
    }
}
