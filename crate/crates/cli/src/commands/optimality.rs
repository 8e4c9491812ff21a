//! `verify-optimality`: numerical certificate that the Gaussian encoding is
//! optimal at `(E, β)`.

use std::time::Instant;

use homodyne_core::ensemble_sim::{em_trial, optimal_ensemble_average};
use homodyne_core::gaussian_core::{convex_closure_entropy_gaussian, optimal_ensemble};
use homodyne_core::optimality_check::{
    condition_i_margin, condition_i_margin_mixed, condition_ii_residual_against, dual_value,
    lambda0_operator, squeezed_coherent, OptimalityTolerances,
};
use homodyne_core::waveform_lab::{
    generate_test_wavefunction, half_width_for, output_entropy, random_family_member,
    smeared_output_density, stream_rng, Grid, GridDensity, WaveFunctionSpec,
};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{Format, OptimalityArgs};
use crate::config::{layer, require, Context};
use crate::output::emit;
use crate::report::{Check, Sense, VerificationReport};
use crate::{CliError, Outcome};

pub const DEFAULT_ENERGY: f64 = 1.0;
pub const DEFAULT_BETA: f64 = 1.0;
pub const DEFAULT_DISPLACEMENTS: usize = 7;
pub const DEFAULT_PURE_CASES: usize = 500;
pub const DEFAULT_MIXED_CASES: usize = 100;
pub const DEFAULT_EM_TRIALS: usize = 100;

/// Seed-stream layout: pure cases use streams `0..`, mixed case `c` uses
/// `MIXED_STREAM_BASE + 8c + j` for its `j`-th state.
const MIXED_STREAM_BASE: u64 = 1 << 32;
const MIXED_MAX_COMPONENTS: u64 = 3;

#[derive(Debug, Clone, Serialize)]
pub struct OptimalityParams {
    pub energy: f64,
    pub beta: f64,
    pub seed: u64,
    /// Not reported: results do not depend on it.
    #[serde(skip)]
    pub workers: usize,
    pub grid_n: usize,
    pub grid_half_width: f64,
    pub displacements: usize,
    pub pure_cases: usize,
    pub mixed_cases: usize,
    pub em_trials: usize,
    pub perturb_delta: f64,
    pub tolerances: OptimalityTolerances,
    /// Derived: `δ` of the optimal ensemble and the one used in `Λ₀`.
    pub delta: f64,
    pub certificate_delta: f64,
    pub gamma: f64,
    pub alpha_p: f64,
}

impl OptimalityParams {
    pub fn resolve(args: &OptimalityArgs, ctx: &Context) -> Result<Self, CliError> {
        let energy = args.energy.unwrap_or(DEFAULT_ENERGY);
        let beta = args.beta.unwrap_or(DEFAULT_BETA);
        let (ens, cov) = optimal_ensemble(energy, beta)?;
        let perturb = args.perturb_delta.unwrap_or(1.0);
        require(
            perturb.is_finite() && perturb > 0.0,
            format!("--perturb-delta must be positive (got {perturb})"),
        )?;
        let d = OptimalityTolerances::default();
        let tolerances = OptimalityTolerances {
            condition_ii: args.tol_condition_ii.unwrap_or(d.condition_ii),
            condition_i: args.tol_condition_i.unwrap_or(d.condition_i),
            dual_identity: args.tol_dual_identity.unwrap_or(d.dual_identity),
            dual_vs_grid: args.tol_dual_grid.unwrap_or(d.dual_vs_grid),
        };
        require(
            [tolerances.condition_ii, tolerances.condition_i, tolerances.dual_identity, tolerances.dual_vs_grid]
                .iter()
                .all(|v| v.is_finite() && *v >= 0.0),
            "tolerances must be finite and >= 0",
        )?;
        Ok(Self {
            energy,
            beta,
            seed: ctx.seed,
            workers: ctx.workers,
            grid_n: ctx.grid_n,
            grid_half_width: ctx.grid_half_width,
            displacements: args.displacements.unwrap_or(DEFAULT_DISPLACEMENTS),
            pure_cases: args.pure_cases.unwrap_or(DEFAULT_PURE_CASES),
            mixed_cases: args.mixed_cases.unwrap_or(DEFAULT_MIXED_CASES),
            em_trials: args.em_trials.unwrap_or(DEFAULT_EM_TRIALS),
            perturb_delta: perturb,
            tolerances,
            delta: ens.delta,
            certificate_delta: ens.delta * perturb,
            gamma: ens.gamma,
            alpha_p: cov.alpha_p,
        })
    }

    /// `x_k = k·√γ`, `k = −(m−1)/2 ..= (m−1)/2` (shifted by ½ for even `m`).
    pub fn displacement_values(&self) -> Vec<f64> {
        let m = self.displacements;
        let center = (m as f64 - 1.0) / 2.0;
        (0..m).map(|k| (k as f64 - center) * self.gamma.sqrt()).collect()
    }

    /// Symmetric grid holding every displaced signal state at no more than
    /// half its half-width, with the smeared density's tails inside.
    pub fn signal_grid(&self) -> homodyne_core::Result<Grid<f64>> {
        let reach = self
            .displacement_values()
            .iter()
            .fold(0.0f64, |a, x| a.max(x.abs()));
        let half_width = half_width_for(self.beta + self.delta, reach)
            .max(2.0 * reach)
            .max(self.grid_half_width);
        Grid::symmetric(self.grid_n, half_width)
    }

    fn family(&self, stream: u64) -> WaveFunctionSpec<f64> {
        let mut spec = random_family_member(self.seed, stream, self.grid_n, self.beta);
        spec.half_width = spec.half_width.max(self.grid_half_width);
        spec
    }
}

pub fn run(args: OptimalityArgs) -> Result<Outcome, CliError> {
    let args = layer(args)?;
    let ctx = Context::resolve(&args.common, Format::Json)?;
    let params = OptimalityParams::resolve(&args, &ctx)?;
    let start = Instant::now();
    let checks = ctx.install(|| suite(&params))?;
    let report = VerificationReport::from_checks(
        "verify-optimality",
        json!(params),
        &checks,
        super::wall_time(&ctx, "verify-optimality", start),
    );
    let text = match ctx.format {
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv(),
    };
    emit(&text, ctx.out.as_deref())?;
    Ok(Outcome::from_pass(report.pass))
}

pub fn suite(p: &OptimalityParams) -> Vec<Check> {
    let mut checks = condition_ii_checks(p);
    checks.extend(
        (0..p.pure_cases as u64)
            .into_par_iter()
            .map(|i| pure_check(p, i))
            .collect::<Vec<_>>(),
    );
    checks.extend(
        (0..p.mixed_cases as u64)
            .into_par_iter()
            .map(|c| mixed_checks(p, c))
            .collect::<Vec<_>>()
            .into_iter()
            .flatten(),
    );
    checks.extend(dual_checks(p));
    checks.extend(em_checks(p));
    checks
}

fn condition_ii_checks(p: &OptimalityParams) -> Vec<Check> {
    let base = json!({ "energy": p.energy, "beta": p.beta, "delta": p.delta, "certificate_delta": p.certificate_delta, "grid_n": p.grid_n });
    let grid = match p.signal_grid() {
        Ok(g) => g,
        Err(e) => return vec![Check::failed("condition_ii", base, None, e)],
    };
    let certificate = match lambda0_operator(&grid, p.beta, p.certificate_delta) {
        Ok(c) => c,
        Err(e) => return vec![Check::failed("condition_ii", base, None, e)],
    };
    p.displacement_values()
        .into_par_iter()
        .map(|x| {
            let case_id = format!("condition_ii/x={x}");
            let params = with(&base, json!({ "x": x, "grid_half_width": grid.half_width() }));
            match condition_ii_residual_against(x, p.beta, p.delta, &certificate) {
                Ok(r) => Check::new(case_id, params, None, r, Sense::AtMost, p.tolerances.condition_ii),
                Err(e) => Check::failed(case_id, params, None, e),
            }
        })
        .collect()
}

fn pure_check(p: &OptimalityParams, index: u64) -> Check {
    let spec = p.family(index);
    let case_id = format!("condition_i/psi={index}");
    let params = json!({ "psi_index": index, "state": spec, "beta": p.beta, "certificate_delta": p.certificate_delta, "grid_n": p.grid_n });
    match generate_test_wavefunction(&spec).and_then(|psi| condition_i_margin(&psi, p.beta, p.certificate_delta)) {
        Ok(m) => Check::new(case_id, params, Some(p.seed), m, Sense::AtLeast, -p.tolerances.condition_i),
        Err(e) => Check::failed(case_id, params, Some(p.seed), e),
    }
}

/// `ψ` plus a mixed `ρ = Σ w_j |φ_j⟩⟨φ_j|` of 1–3 family states, all on the
/// widest of their grids.
fn mixed_checks(p: &OptimalityParams, case: u64) -> Vec<Check> {
    let stream = MIXED_STREAM_BASE + 8 * case;
    let mut rng = stream_rng(p.seed, stream);
    let count = rng.random_range(1..=MIXED_MAX_COMPONENTS);
    let mut weights: Vec<f64> = (0..count).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    let mut specs: Vec<WaveFunctionSpec<f64>> =
        (0..=count).map(|j| p.family(stream + 1 + j)).collect();
    let half_width = specs.iter().fold(0.0f64, |a, s| a.max(s.half_width));
    specs.iter_mut().for_each(|s| s.half_width = half_width);

    let case_id = format!("condition_i_mixed/case={case}");
    let params = json!({
        "case": case, "psi": specs[0], "rho_states": specs[1..], "rho_weights": weights,
        "beta": p.beta, "certificate_delta": p.certificate_delta, "grid_n": p.grid_n
    });
    let evaluate = || -> homodyne_core::Result<_> {
        let psi = generate_test_wavefunction(&specs[0])?;
        let mut density = vec![0.0; psi.grid().len()];
        for (w, spec) in weights.iter().zip(&specs[1..]) {
            let p_phi = smeared_output_density(&generate_test_wavefunction(spec)?, p.beta)?;
            density.iter_mut().zip(p_phi.values()).for_each(|(d, v)| *d += w * v);
        }
        let p_rho = GridDensity::new(*psi.grid(), density)?;
        condition_i_margin_mixed(&p_rho, &psi, p.beta, p.certificate_delta)
    };
    match evaluate() {
        Ok(m) => {
            let tol = p.tolerances.condition_i;
            vec![
                Check::new(case_id, params.clone(), Some(p.seed), m.margin, Sense::AtLeast, -tol),
                Check::new(
                    format!("relative_entropy/case={case}"),
                    params,
                    Some(p.seed),
                    m.relative_entropy(),
                    Sense::AtLeast,
                    -tol,
                ),
            ]
        }
        Err(e) => vec![Check::failed(case_id, params, Some(p.seed), e)],
    }
}

fn dual_checks(p: &OptimalityParams) -> Vec<Check> {
    let params = json!({ "alpha_p": p.alpha_p, "beta": p.beta, "delta": p.delta, "grid_n": p.grid_n });
    let evaluate = || -> homodyne_core::Result<(f64, f64, f64)> {
        let dual = dual_value(p.alpha_p, p.beta)?;
        let em = convex_closure_entropy_gaussian(p.alpha_p, p.beta)?;
        let grid = Grid::for_variance(p.grid_n, p.beta + p.delta, 0.0)?;
        let grid = Grid::symmetric(p.grid_n, grid.half_width().max(p.grid_half_width))?;
        let h = output_entropy(&squeezed_coherent(&grid, 0.0, p.delta)?, p.beta)?;
        Ok((dual, em, h))
    };
    match evaluate() {
        Ok((dual, em, h)) => vec![
            Check::new(
                "dual/identity",
                with(&params, json!({ "dual_value": dual, "convex_closure": em })),
                None,
                dual - em,
                Sense::AbsAtMost,
                p.tolerances.dual_identity,
            ),
            Check::new(
                "dual/grid_entropy",
                with(&params, json!({ "dual_value": dual, "grid_entropy": h })),
                None,
                dual - h,
                Sense::AbsAtMost,
                p.tolerances.dual_vs_grid,
            ),
        ],
        Err(e) => vec![Check::failed("dual", params, None, e)],
    }
}

/// Convex closure on explicit ensembles: the optimal one attains `e_M`,
/// random admissible pure-state ensembles do not go below it.
fn em_checks(p: &OptimalityParams) -> Vec<Check> {
    let tol = p.tolerances.dual_vs_grid;
    let base = json!({ "energy": p.energy, "beta": p.beta, "grid_n": p.grid_n });
    let target = match convex_closure_entropy_gaussian(p.alpha_p, p.beta) {
        Ok(t) => t,
        Err(e) => return vec![Check::failed("em_identity", base, Some(p.seed), e)],
    };
    let mut out = vec![match optimal_ensemble_average(p.energy, p.beta, p.seed, p.grid_n) {
        Ok(avg) => Check::new(
            "em_identity/optimal",
            with(&base, json!({ "average_entropy": avg, "convex_closure": target })),
            Some(p.seed),
            avg - target,
            Sense::AbsAtMost,
            tol,
        ),
        Err(e) => Check::failed("em_identity/optimal", base.clone(), Some(p.seed), e),
    }];
    out.extend(
        (0..p.em_trials as u64)
            .into_par_iter()
            .map(|k| {
                let case_id = format!("em_identity/trial={k}");
                match em_trial(p.energy, p.beta, p.seed, k, p.grid_n) {
                    Ok(trial) => Check::new(
                        case_id,
                        with(&base, json!({ "trial": trial })),
                        Some(p.seed),
                        trial.margin,
                        Sense::AtLeast,
                        -tol,
                    ),
                    Err(e) => Check::failed(case_id, with(&base, json!({ "trial": k })), Some(p.seed), e),
                }
            })
            .collect::<Vec<_>>(),
    );
    out
}

fn with(base: &Value, extra: Value) -> Value {
    let mut v = base.clone();
    if let (Some(map), Value::Object(more)) = (v.as_object_mut(), extra) {
        map.extend(more);
    }
    v
}
