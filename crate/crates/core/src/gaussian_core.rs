//! Closed-form capacities, bounds and optimal-ensemble parameters for the
//! approximate position measurement with an oscillator energy constraint.
//!
//! The channel measures `y = q + ξ` with `ξ ~ N(0, β)`. Average states are
//! restricted to centered Gaussians with diagonal covariance `(α_q, α_p)`;
//! the energy constraint `Tr ρ (q² + p²)/2 ≤ E` becomes `α_q + α_p ≤ 2E`.

use serde::{Deserialize, Serialize};

use crate::{Error, Real, Result};

/// Energy of the oscillator ground state.
pub const VACUUM_ENERGY: f64 = 0.5;

/// Noisy position measurement with Gaussian noise variance `beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Channel<T> {
    beta: T,
}

impl<T: Real> Channel<T> {
    pub fn new(beta: T) -> Result<Self> {
        check_beta(beta)?;
        Ok(Self { beta })
    }

    /// The sharp (noiseless) position measurement.
    pub fn sharp() -> Self {
        Self { beta: T::zero() }
    }

    pub fn beta(&self) -> T {
        self.beta
    }

    pub fn is_sharp(&self) -> bool {
        self.beta == T::zero()
    }
}

/// Mean oscillator energy bound `E` for `H = (q² + p²)/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillatorConstraint<T> {
    energy: T,
}

impl<T: Real> OscillatorConstraint<T> {
    pub fn new(energy: T) -> Result<Self> {
        check_energy(energy)?;
        Ok(Self { energy })
    }

    pub fn energy(&self) -> T {
        self.energy
    }

    /// Largest admissible `α_q + α_p`.
    pub fn covariance_trace(&self) -> T {
        T::lit(2.0) * self.energy
    }
}

/// Second moments `(α_q, α_p)` of a centered single-mode Gaussian state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagonalCovariance<T> {
    pub alpha_q: T,
    pub alpha_p: T,
}

impl<T: Real> DiagonalCovariance<T> {
    /// Validates positivity and the uncertainty bound `α_q α_p ≥ 1/4`.
    pub fn new(alpha_q: T, alpha_p: T) -> Result<Self> {
        if !(alpha_q > T::zero()) {
            return Err(Error::param("alpha_q", alpha_q.as_f64(), "must be > 0"));
        }
        if !(alpha_p > T::zero()) {
            return Err(Error::param("alpha_p", alpha_p.as_f64(), "must be > 0"));
        }
        let product = alpha_q * alpha_p;
        // A pure squeezed state sits exactly on the bound, so allow rounding.
        if product < T::lit(0.25) * (T::one() - T::tol(1e-12)) {
            return Err(Error::InvalidCovariance {
                product: product.as_f64(),
            });
        }
        Ok(Self { alpha_q, alpha_p })
    }

    /// `Tr ρ (q² + p²)/2`.
    pub fn energy(&self) -> T {
        (self.alpha_q + self.alpha_p) / T::lit(2.0)
    }
}

/// Parameters of the Gaussian encoding: squeezed states of position
/// variance `delta`, displaced by `x ~ N(0, gamma)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianEnsembleParams<T> {
    pub delta: T,
    pub gamma: T,
}

impl<T: Real> GaussianEnsembleParams<T> {
    /// The unique ensemble whose average state has covariance `cov`.
    pub fn for_covariance(cov: &DiagonalCovariance<T>) -> Self {
        let delta = T::one() / (T::lit(4.0) * cov.alpha_p);
        let gamma = (cov.alpha_q - delta).max(T::zero());
        Self { delta, gamma }
    }

    /// Covariance of the average state.
    pub fn average_covariance(&self) -> DiagonalCovariance<T> {
        DiagonalCovariance {
            alpha_q: self.delta + self.gamma,
            alpha_p: T::one() / (T::lit(4.0) * self.delta),
        }
    }
}

fn check_beta<T: Real>(beta: T) -> Result<()> {
    if beta >= T::zero() && beta.is_finite() {
        Ok(())
    } else {
        Err(Error::param("beta", beta.as_f64(), "must be finite and >= 0"))
    }
}

fn check_energy<T: Real>(energy: T) -> Result<()> {
    if !energy.is_finite() {
        return Err(Error::param("energy", energy.as_f64(), "must be finite"));
    }
    if energy < T::lit(VACUUM_ENERGY) {
        return Err(Error::BelowVacuumEnergy(energy.as_f64()));
    }
    Ok(())
}

/// `½ ln(2πe)`, the entropy offset of a unit-variance Gaussian.
fn half_ln_2pi_e<T: Real>() -> T {
    T::lit(0.5) * (T::lit(2.0) * T::PI() * T::E()).ln()
}

/// Output differential entropy `h_M(ρ_α) = ½ ln(α_q + β) + ½ ln(2πe)`.
pub fn output_entropy_gaussian<T: Real>(alpha_q: T, beta: T) -> Result<T> {
    if !(alpha_q > T::zero()) {
        return Err(Error::param("alpha_q", alpha_q.as_f64(), "must be > 0"));
    }
    check_beta(beta)?;
    Ok(T::lit(0.5) * (alpha_q + beta).ln() + half_ln_2pi_e())
}

/// Convex closure of the output entropy at a Gaussian average state,
/// `e_M(ρ_α) = ½ ln(1/(4α_p) + β) + ½ ln(2πe)`.
pub fn convex_closure_entropy_gaussian<T: Real>(alpha_p: T, beta: T) -> Result<T> {
    if !(alpha_p > T::zero()) {
        return Err(Error::param("alpha_p", alpha_p.as_f64(), "must be > 0"));
    }
    check_beta(beta)?;
    let delta = T::one() / (T::lit(4.0) * alpha_p);
    Ok(T::lit(0.5) * (delta + beta).ln() + half_ln_2pi_e())
}

/// Capacity at a fixed average covariance,
/// `½ ln[(α_q + β) / (1/(4α_p) + β)]`.
pub fn alpha_constrained_capacity<T: Real>(cov: &DiagonalCovariance<T>, beta: T) -> Result<T> {
    let cov = DiagonalCovariance::new(cov.alpha_q, cov.alpha_p)?;
    check_beta(beta)?;
    let delta = T::one() / (T::lit(4.0) * cov.alpha_p);
    Ok(T::lit(0.5) * ((cov.alpha_q + beta) / (delta + beta)).ln())
}

/// Momentum variance of the capacity-achieving average state: the positive
/// root of `4β α_p² + 2α_p − (2E + β) = 0`, or `E` when `β = 0`.
pub fn optimal_alpha_p<T: Real>(energy: T, beta: T) -> Result<T> {
    check_energy(energy)?;
    check_beta(beta)?;
    if beta == T::zero() {
        return Ok(energy);
    }
    // (√D − 1)/(4β) rewritten as (2E + β)/(√D + 1) to avoid cancellation for small β.
    let two = T::lit(2.0);
    let disc = T::one() + T::lit(8.0) * energy * beta + T::lit(4.0) * beta * beta;
    Ok((two * energy + beta) / (disc.sqrt() + T::one()))
}

/// Energy-constrained capacity of the Gaussian encoding,
/// `ln[(√(1 + 8Eβ + 4β²) − 1)/(2β)]`, equal to `ln 2E` at `β = 0`.
pub fn gaussian_capacity<T: Real>(energy: T, beta: T) -> Result<T> {
    // (√D − 1)/(2β) is exactly 2α_p*.
    let alpha_p = optimal_alpha_p(energy, beta)?;
    Ok((T::lit(2.0) * alpha_p).ln())
}

/// Upper bound `ln(2(E + β)/(1 + 2β))` valid for every encoding.
pub fn hall_upper_bound<T: Real>(energy: T, beta: T) -> Result<T> {
    check_energy(energy)?;
    check_beta(beta)?;
    let two = T::lit(2.0);
    Ok((two * (energy + beta) / (T::one() + two * beta)).ln())
}

/// Optimal Gaussian encoding and the (energy-saturating) average covariance.
pub fn optimal_ensemble<T: Real>(
    energy: T,
    beta: T,
) -> Result<(GaussianEnsembleParams<T>, DiagonalCovariance<T>)> {
    let alpha_p = optimal_alpha_p(energy, beta)?;
    let alpha_q = T::lit(2.0) * energy - alpha_p;
    let delta = T::one() / (T::lit(4.0) * alpha_p);
    let gamma = alpha_q - delta;
    // α_p ≤ E for E ≥ 1/2 implies γ ≥ 0 up to rounding at E = 1/2.
    assert!(
        gamma >= -T::tol(1e-12) * alpha_q,
        "negative displacement variance {gamma} at E={energy}, beta={beta}"
    );
    let gamma = gamma.max(T::zero());
    Ok((
        GaussianEnsembleParams { delta, gamma },
        DiagonalCovariance { alpha_q, alpha_p },
    ))
}

/// Capacity value bundle reported by the command-line tool.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityRecord<T> {
    pub energy: T,
    pub beta: T,
    pub capacity: T,
    pub upper_bound: T,
    pub alpha_q: T,
    pub alpha_p: T,
    pub delta: T,
    pub gamma: T,
}

impl<T: Real> CapacityRecord<T> {
    pub fn compute(energy: T, beta: T) -> Result<Self> {
        let (params, cov) = optimal_ensemble(energy, beta)?;
        Ok(Self {
            energy,
            beta,
            capacity: gaussian_capacity(energy, beta)?,
            upper_bound: hall_upper_bound(energy, beta)?,
            alpha_q: cov.alpha_q,
            alpha_p: cov.alpha_p,
            delta: params.delta,
            gamma: params.gamma,
        })
    }
}
