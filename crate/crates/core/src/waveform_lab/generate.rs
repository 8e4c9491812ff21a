//! Test-family generator for grid wavefunctions.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::grid::{half_width_for, Grid, GridWaveFunction, DEFAULT_POINTS};
use crate::{Error, Real, Result};

/// Largest `k·dx` accepted, where `k` is the highest local wavenumber of the
/// requested state.
const MAX_PHASE_PER_STEP: f64 = 0.5;

/// Deterministic generator for seed-split streams: stream `index` of
/// `master`.
pub fn stream_rng(master: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent<T> {
    pub weight: Complex<T>,
    pub mean: T,
    /// Variance of the component's density `|φ|²`.
    pub variance: T,
    /// Momentum kick `e^{ikx}`.
    pub momentum: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WaveFunctionKind<T> {
    /// Real Gaussian amplitude whose density is `N(mean, variance)`.
    Gaussian { variance: T, mean: T },
    /// `|x⟩_δ`: squeezed vacuum of position variance `delta` displaced by `x`.
    SqueezedCoherent { delta: T, displacement: T },
    /// `Σ c_n φ_n`, with `φ_n` the oscillator eigenfunctions scaled so that
    /// `|φ_0|²` has variance `delta`.
    HermiteSuperposition {
        coefficients: Vec<Complex<T>>,
        delta: T,
    },
    /// `Σ w_j φ_j` with Gaussian amplitudes `φ_j`.
    GaussianMixtureAmplitude { components: Vec<MixtureComponent<T>> },
    /// Hermite superposition over `modes` modes with coefficients drawn from
    /// a complex normal using `seed`.
    RandomSuperposition { modes: usize, delta: T, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveFunctionSpec<T> {
    pub kind: WaveFunctionKind<T>,
    pub points: usize,
    pub half_width: T,
}

impl<T: Real> WaveFunctionSpec<T> {
    pub fn new(kind: WaveFunctionKind<T>, points: usize, half_width: T) -> Self {
        Self {
            kind,
            points,
            half_width,
        }
    }

    /// Grid sized by [`half_width_for`] from the state's spread plus an
    /// additional smoothing variance `extra_variance`.
    pub fn auto(kind: WaveFunctionKind<T>, points: usize, extra_variance: T) -> Self {
        let (spread, offset) = kind.spread();
        let half_width = half_width_for(spread + extra_variance, offset);
        Self::new(kind, points, half_width)
    }

    pub fn grid(&self) -> Result<Grid<T>> {
        Grid::symmetric(self.points, self.half_width)
    }
}

fn gaussian_amplitude<T: Real>(x: T, mean: T, variance: T) -> T {
    let d = x - mean;
    (-d * d / (T::lit(4.0) * variance)).exp()
}

/// Normalized Hermite functions `h_0..h_{count-1}` at `xi`, by the stable
/// three-term recurrence.
fn hermite_functions<T: Real>(xi: T, count: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return out;
    }
    let h0 = T::PI().powf(T::lit(-0.25)) * (-xi * xi / T::lit(2.0)).exp();
    out.push(h0);
    if count == 1 {
        return out;
    }
    out.push(T::lit(2.0).sqrt() * xi * h0);
    for n in 1..count - 1 {
        let nf = T::from_usize(n).unwrap();
        let next = (T::lit(2.0) / (nf + T::one())).sqrt() * xi * out[n]
            - (nf / (nf + T::one())).sqrt() * out[n - 1];
        out.push(next);
    }
    out
}

impl<T: Real> WaveFunctionKind<T> {
    /// Second-moment scale of `|ψ|²` about `offset`, and the offset itself;
    /// used to size grids.
    pub fn spread(&self) -> (T, T) {
        match self {
            Self::Gaussian { variance, mean } => (*variance, *mean),
            Self::SqueezedCoherent {
                delta,
                displacement,
            } => (*delta, *displacement),
            Self::HermiteSuperposition {
                coefficients,
                delta,
            } => (hermite_spread(coefficients.len(), *delta), T::zero()),
            Self::RandomSuperposition { modes, delta, .. } => {
                (hermite_spread(*modes, *delta), T::zero())
            }
            Self::GaussianMixtureAmplitude { components } => {
                let spread = components
                    .iter()
                    .map(|c| T::lit(2.0) * (c.mean * c.mean + c.variance))
                    .fold(T::zero(), T::max);
                (spread, T::zero())
            }
        }
    }

    /// Highest local wavenumber the state carries.
    fn max_wavenumber(&self) -> T {
        let width = |var: T| (T::lit(2.0) * var).sqrt().recip();
        match self {
            Self::Gaussian { variance, .. } => width(*variance),
            Self::SqueezedCoherent { delta, .. } => width(*delta),
            Self::HermiteSuperposition {
                coefficients,
                delta,
            } => hermite_wavenumber(coefficients.len(), *delta),
            Self::RandomSuperposition { modes, delta, .. } => hermite_wavenumber(*modes, *delta),
            Self::GaussianMixtureAmplitude { components } => components
                .iter()
                .map(|c| width(c.variance) + c.momentum.abs())
                .fold(T::zero(), T::max),
        }
    }

    fn validate(&self) -> Result<()> {
        let positive = |name, v: T| {
            if v > T::zero() && v.is_finite() {
                Ok(())
            } else {
                Err(Error::param(name, v.as_f64(), "must be finite and > 0"))
            }
        };
        match self {
            Self::Gaussian { variance, .. } => positive("variance", *variance),
            Self::SqueezedCoherent { delta, .. } => positive("delta", *delta),
            Self::HermiteSuperposition {
                coefficients,
                delta,
            } => {
                positive("delta", *delta)?;
                if coefficients.iter().all(|c| c.norm_sqr() == T::zero()) {
                    return Err(Error::param("coefficients", 0.0, "all zero"));
                }
                Ok(())
            }
            Self::RandomSuperposition { modes, delta, .. } => {
                positive("delta", *delta)?;
                if *modes == 0 {
                    return Err(Error::param("modes", 0.0, "need at least one mode"));
                }
                Ok(())
            }
            Self::GaussianMixtureAmplitude { components } => {
                if components.is_empty() {
                    return Err(Error::param("components", 0.0, "empty mixture"));
                }
                components
                    .iter()
                    .try_for_each(|c| positive("variance", c.variance))
            }
        }
    }

    /// Resolves seeded kinds into explicit coefficients.
    pub fn materialize(&self) -> Self
    where
        StandardNormal: Distribution<T>,
    {
        match self {
            Self::RandomSuperposition { modes, delta, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let coefficients = (0..*modes)
                    .map(|_| {
                        let re: T = rng.sample(StandardNormal);
                        let im: T = rng.sample(StandardNormal);
                        Complex::new(re, im)
                    })
                    .collect();
                Self::HermiteSuperposition {
                    coefficients,
                    delta: *delta,
                }
            }
            other => other.clone(),
        }
    }

    fn amplitude(&self, x: T) -> Complex<T> {
        match self {
            Self::Gaussian { variance, mean } => {
                Complex::new(gaussian_amplitude(x, *mean, *variance), T::zero())
            }
            Self::SqueezedCoherent {
                delta,
                displacement,
            } => Complex::new(gaussian_amplitude(x, *displacement, *delta), T::zero()),
            Self::HermiteSuperposition {
                coefficients,
                delta,
            } => {
                let xi = x / (T::lit(2.0) * *delta).sqrt();
                hermite_functions(xi, coefficients.len())
                    .into_iter()
                    .zip(coefficients)
                    .fold(Complex::new(T::zero(), T::zero()), |acc, (h, c)| acc + *c * h)
            }
            Self::GaussianMixtureAmplitude { components } => components.iter().fold(
                Complex::new(T::zero(), T::zero()),
                |acc, c| {
                    let norm = c.variance.powf(T::lit(-0.25));
                    let phase = Complex::from_polar(T::one(), c.momentum * x);
                    acc + c.weight * phase * (norm * gaussian_amplitude(x, c.mean, c.variance))
                },
            ),
            Self::RandomSuperposition { .. } => unreachable!("materialize first"),
        }
    }
}

fn hermite_spread<T: Real>(modes: usize, delta: T) -> T {
    // ⟨x²⟩ ≤ δ(2n+1) for each mode, doubled to cover cross terms.
    T::lit(2.0) * delta * T::from_usize(2 * modes.max(1) - 1).unwrap()
}

fn hermite_wavenumber<T: Real>(modes: usize, delta: T) -> T {
    let top = T::from_usize(2 * modes.max(1) - 1).unwrap();
    (top / (T::lit(2.0) * delta)).sqrt()
}

/// Samples and normalizes the requested state. Rejects grids that are too
/// coarse for its highest wavenumber or too narrow for its tails.
pub fn generate_test_wavefunction<T: Real>(spec: &WaveFunctionSpec<T>) -> Result<GridWaveFunction<T>>
where
    StandardNormal: Distribution<T>,
{
    spec.kind.validate()?;
    let kind = spec.kind.materialize();
    let grid = spec.grid()?;
    let phase_step = kind.max_wavenumber() * grid.dx();
    if phase_step > T::lit(MAX_PHASE_PER_STEP) {
        return Err(Error::UnderResolved(format!(
            "wavenumber × dx = {} exceeds {MAX_PHASE_PER_STEP}",
            phase_step.as_f64()
        )));
    }
    GridWaveFunction::from_fn(grid, |x| kind.amplitude(x))
}

/// Member `index` of the seeded random family used by the verification
/// suites: even indices are Hermite superpositions of 1–6 modes, odd
/// indices are 2–3 component Gaussian mixtures with momentum kicks.
/// The grid leaves room for smoothing by variance up to `max_smoothing`.
pub fn random_family_member<T: Real>(
    master_seed: u64,
    index: u64,
    points: usize,
    max_smoothing: T,
) -> WaveFunctionSpec<T>
where
    StandardNormal: Distribution<T>,
{
    let mut rng = stream_rng(master_seed, index);
    let kind = if index.is_multiple_of(2) {
        let modes = rng.random_range(1..=6usize);
        let delta = T::lit(rng.random_range(0.25..1.0));
        WaveFunctionKind::RandomSuperposition {
            modes,
            delta,
            seed: rng.random(),
        }
    } else {
        let count = rng.random_range(2..=3usize);
        let components = (0..count)
            .map(|_| {
                let re: T = rng.sample(StandardNormal);
                let im: T = rng.sample(StandardNormal);
                MixtureComponent {
                    weight: Complex::new(re, im),
                    mean: T::lit(rng.random_range(-2.0..2.0)),
                    variance: T::lit(rng.random_range(0.1..1.0)),
                    momentum: T::lit(rng.random_range(-1.0..1.0)),
                }
            })
            .collect();
        WaveFunctionKind::GaussianMixtureAmplitude { components }
    };
    WaveFunctionSpec::auto(kind.materialize(), points, max_smoothing)
}

/// [`random_family_member`] with the default grid size.
pub fn random_family_default<T: Real>(master_seed: u64, index: u64, max_smoothing: T) -> WaveFunctionSpec<T>
where
    StandardNormal: Distribution<T>,
{
    random_family_member(master_seed, index, DEFAULT_POINTS, max_smoothing)
}
