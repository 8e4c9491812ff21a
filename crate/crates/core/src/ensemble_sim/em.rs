//! Convex-closure identity on explicit ensembles of pure states.
//!
//! Displacements leave output entropies and `⟨p²⟩` unchanged, so an
//! ensemble is described by weighted centered states plus the variance of
//! a Gaussian displacement law; it contributes that variance to `α_q`.

use num_complex::Complex;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::gaussian_core::{convex_closure_entropy_gaussian, optimal_ensemble, DiagonalCovariance};
use crate::waveform_lab::{
    dirichlet_energy, generate_test_wavefunction, output_entropy, stream_rng, Grid,
    GridWaveFunction, WaveFunctionKind, WaveFunctionSpec,
};
use crate::{Error, Real, Result};

/// Displacements drawn for the optimal-ensemble average.
pub const EM_DISPLACEMENT_SAMPLES: usize = 16;
/// Redraws allowed per trial when a random ensemble cannot meet `α_q`.
const MAX_ATTEMPTS: u64 = 32;
/// Relative slack on the second-moment constraints (grid quadrature).
const MOMENT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PureEnsemble<T> {
    /// `(weight, state)`; weights sum to one.
    pub components: Vec<(T, WaveFunctionKind<T>)>,
    pub displacement_variance: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleMoments<T> {
    /// `Σ w ⟨p²⟩`.
    pub momentum_second_moment: T,
    /// `Σ w Var(q) + γ`, the position variance of the average state.
    pub position_variance: T,
    /// `Σ w h_M(ψ)`.
    pub average_entropy: T,
}

struct ComponentStats<T> {
    p2: T,
    var_q: T,
    entropy: T,
}

fn component_stats<T: Real>(kind: &WaveFunctionKind<T>, beta: T, points: usize) -> Result<ComponentStats<T>>
where
    StandardNormal: Distribution<T>,
{
    let psi = generate_test_wavefunction(&WaveFunctionSpec::auto(kind.clone(), points, beta))?;
    let mean = psi.mean_position();
    Ok(ComponentStats {
        p2: dirichlet_energy(&psi),
        var_q: psi.second_moment() - mean * mean,
        entropy: output_entropy(&psi, beta)?,
    })
}

/// Moments and average output entropy of `ensemble`, rejecting it unless its
/// average state matches `cov`: `Σ w ⟨p²⟩ ≤ α_p` and position variance
/// `= α_q`.
pub fn check_pure_ensemble<T: Real>(
    ensemble: &PureEnsemble<T>,
    cov: &DiagonalCovariance<T>,
    beta: T,
    points: usize,
) -> Result<EnsembleMoments<T>>
where
    StandardNormal: Distribution<T>,
{
    if ensemble.components.is_empty() {
        return Err(Error::InvalidEnsemble("no components".into()));
    }
    let total = ensemble.components.iter().fold(T::zero(), |a, (w, _)| a + *w);
    if ensemble.components.iter().any(|(w, _)| *w < T::zero())
        || (total - T::one()).abs() > T::tol(1e-12)
    {
        return Err(Error::InvalidEnsemble(format!("weights sum to {total}")));
    }
    if !(ensemble.displacement_variance >= T::zero()) {
        return Err(Error::InvalidEnsemble("negative displacement variance".into()));
    }
    let mut m = EnsembleMoments {
        momentum_second_moment: T::zero(),
        position_variance: ensemble.displacement_variance,
        average_entropy: T::zero(),
    };
    for (w, kind) in &ensemble.components {
        let s = component_stats(kind, beta, points)?;
        m.momentum_second_moment += *w * s.p2;
        m.position_variance += *w * s.var_q;
        m.average_entropy += *w * s.entropy;
    }
    let tol = T::tol(MOMENT_TOL);
    if m.momentum_second_moment > cov.alpha_p * (T::one() + tol) {
        return Err(Error::InvalidEnsemble(format!(
            "average <p^2> = {} exceeds alpha_p = {}",
            m.momentum_second_moment, cov.alpha_p
        )));
    }
    if (m.position_variance - cov.alpha_q).abs() > tol * cov.alpha_q {
        return Err(Error::InvalidEnsemble(format!(
            "position variance {} differs from alpha_q = {}",
            m.position_variance, cov.alpha_q
        )));
    }
    Ok(m)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmTrial<T> {
    pub trial: u64,
    /// Stream index of the master seed that generated the trial.
    pub stream: u64,
    pub ensemble: PureEnsemble<T>,
    pub moments: EnsembleMoments<T>,
    /// `Σ w h_M(ψ) − e_M(ρ_α)`.
    pub margin: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmIdentityReport<T> {
    /// `e_M(ρ_α)` from the closed form.
    pub target: T,
    /// Grid average of `h_M(|x⟩_δ)` over sampled displacements.
    pub optimal_average: T,
    pub trials: Vec<EmTrial<T>>,
}

impl<T: Real> EmIdentityReport<T> {
    pub fn optimal_deviation(&self) -> T {
        (self.optimal_average - self.target).abs()
    }

    pub fn worst_margin(&self) -> T {
        self.trials.iter().map(|t| t.margin).fold(T::infinity(), T::min)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.optimal_deviation().as_f64() <= tol
            && self.trials.iter().all(|t| t.margin.as_f64() >= -tol)
    }
}

/// Average output entropy of `|x⟩_δ` over [`EM_DISPLACEMENT_SAMPLES`]
/// draws `x ~ N(0, γ)` from stream 0 of `seed`.
pub fn optimal_ensemble_average<T: Real>(energy: T, beta: T, seed: u64, points: usize) -> Result<T>
where
    StandardNormal: Distribution<T>,
{
    let (params, _) = optimal_ensemble(energy, beta)?;
    let mut rng = stream_rng(seed, 0);
    let mut sum = T::zero();
    for _ in 0..EM_DISPLACEMENT_SAMPLES {
        let z: T = StandardNormal.sample(&mut rng);
        let x = params.gamma.sqrt() * z;
        let grid = Grid::for_variance(points, beta + params.delta, x)?;
        let psi = GridWaveFunction::from_fn(grid, |q| {
            let d = q - x;
            Complex::new((-d * d / (T::lit(4.0) * params.delta)).exp(), T::zero())
        })?;
        sum += output_entropy(&psi, beta)?;
    }
    Ok(sum / T::from_usize(EM_DISPLACEMENT_SAMPLES).unwrap())
}

/// Random ensemble whose average state is `ρ_α`: 2–4 slightly non-Gaussian
/// states (three-mode superpositions dominated by the ground mode, with
/// squeezing spread around `δ`), dilated so that `Σ w⟨p²⟩ = α_p`, plus the
/// displacement variance that restores `α_q`.
fn random_ensemble<T: Real>(
    rng: &mut impl Rng,
    cov: &DiagonalCovariance<T>,
    delta: T,
    beta: T,
    points: usize,
) -> Result<Option<PureEnsemble<T>>>
where
    StandardNormal: Distribution<T>,
{
    let count = rng.random_range(2..=4usize);
    let mut weights: Vec<T> = (0..count).map(|_| T::lit(rng.random_range(0.2..1.0))).collect();
    let total = weights.iter().fold(T::zero(), |a, w| a + *w);
    weights.iter_mut().for_each(|w| *w /= total);
    let mut kinds: Vec<(T, Vec<Complex<T>>)> = (0..count)
        .map(|_| {
            let squeeze = T::lit(rng.random_range(-0.4f64..0.4).exp());
            let eps = T::lit(rng.random_range(0.0..0.35));
            let mut coefficients = vec![Complex::new(T::one(), T::zero())];
            for _ in 1..3 {
                let re: T = rng.sample(StandardNormal);
                let im: T = rng.sample(StandardNormal);
                coefficients.push(Complex::new(re, im) * (eps / T::lit(2.0).sqrt()));
            }
            (delta * squeeze, coefficients)
        })
        .collect();

    let build = |kinds: &[(T, Vec<Complex<T>>)]| -> Vec<(T, WaveFunctionKind<T>)> {
        weights
            .iter()
            .zip(kinds)
            .map(|(w, (d, c))| {
                (
                    *w,
                    WaveFunctionKind::HermiteSuperposition {
                        coefficients: c.clone(),
                        delta: *d,
                    },
                )
            })
            .collect()
    };
    let mut p2 = T::zero();
    for (w, kind) in build(&kinds) {
        p2 += w * component_stats(&kind, beta, points)?.p2;
    }
    // ψ(x) → √s ψ(sx) scales ⟨p²⟩ by s² and the mode width δ by 1/s².
    let s2 = cov.alpha_p / p2;
    kinds.iter_mut().for_each(|(d, _)| *d /= s2);
    let components = build(&kinds);
    let mut var_q = T::zero();
    for (w, kind) in &components {
        var_q += *w * component_stats(kind, beta, points)?.var_q;
    }
    if var_q > cov.alpha_q {
        return Ok(None);
    }
    Ok(Some(PureEnsemble {
        components,
        displacement_variance: cov.alpha_q - var_q,
    }))
}

/// Trial `trial` of the perturbed-ensemble check, drawn from stream
/// `1 + trial·MAX_ATTEMPTS + attempt` of `seed`.
pub fn em_trial<T: Real>(energy: T, beta: T, seed: u64, trial: u64, points: usize) -> Result<EmTrial<T>>
where
    StandardNormal: Distribution<T>,
{
    let (params, cov) = optimal_ensemble(energy, beta)?;
    let target = convex_closure_entropy_gaussian(cov.alpha_p, beta)?;
    for attempt in 0..MAX_ATTEMPTS {
        let stream = 1 + trial * MAX_ATTEMPTS + attempt;
        let mut rng = stream_rng(seed, stream);
        if let Some(ensemble) = random_ensemble(&mut rng, &cov, params.delta, beta, points)? {
            let moments = check_pure_ensemble(&ensemble, &cov, beta, points)?;
            return Ok(EmTrial {
                trial,
                stream,
                margin: moments.average_entropy - target,
                ensemble,
                moments,
            });
        }
    }
    Err(Error::InvalidEnsemble(format!(
        "no admissible ensemble in {MAX_ATTEMPTS} draws for trial {trial}"
    )))
}

/// (a) the optimal ensemble's average output entropy against `e_M(ρ_α)`;
/// (b) `trials` random admissible ensembles, whose averages must not fall
/// below it.
pub fn verify_em_identity<T: Real>(
    energy: T,
    beta: T,
    trials: u64,
    seed: u64,
    points: usize,
) -> Result<EmIdentityReport<T>>
where
    StandardNormal: Distribution<T>,
{
    let (_, cov) = optimal_ensemble(energy, beta)?;
    Ok(EmIdentityReport {
        target: convex_closure_entropy_gaussian(cov.alpha_p, beta)?,
        optimal_average: optimal_ensemble_average(energy, beta, seed, points)?,
        trials: (0..trials)
            .map(|k| em_trial(energy, beta, seed, k, points))
            .collect::<Result<_>>()?,
    })
}
