//! Generalized log-Sobolev inequality along the heat flow.
//!
//! For a unit vector `ψ` with `f = |ψ|²`, `g = T_t f` and `δ̃ = t + δ`,
//!
//! ```text
//! F(t, δ) = δ̃ ∫ g ln g + δ̃ ln √(2πe δ̃) + δ/2 − 2δ² ∫|ψ'|²  ≤ 0
//! ∂F/∂t   = ∫ g ln g + ln √(2π δ̃) + 1 − 2δ̃ ∫|(√g)'|²        ≤ 0
//! ```
//!
//! Both vanish identically when `f` is Gaussian with variance `δ`.

use serde::{Deserialize, Serialize};

use super::functionals::{
    density_from_wavefunction, differential_entropy, dirichlet_energy, output_entropy,
    sqrt_density_energy,
};
use super::grid::{GridDensity, GridWaveFunction};
use super::heat::heat_semigroup;
use crate::{Error, Real, Result};

/// Heat-flow quantities of `g = T_t f` at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatFlowPoint<T> {
    pub t: T,
    /// `∫ g ln g`.
    pub neg_entropy: T,
    /// `∫ |(√g)'|²`.
    pub sqrt_energy: T,
    pub mass_defect: T,
}

/// Caches `|ψ|²` and `∫|ψ'|²` so that the gap can be evaluated over many
/// `(t, δ)` pairs with one smoothing per `t`.
#[derive(Debug, Clone)]
pub struct LogSobolevProbe<T> {
    density: GridDensity<T>,
    dirichlet: T,
}

fn check_delta<T: Real>(delta: T) -> Result<()> {
    if delta > T::zero() && delta.is_finite() {
        Ok(())
    } else {
        Err(Error::param("delta", delta.as_f64(), "must be finite and > 0"))
    }
}

impl<T: Real> LogSobolevProbe<T> {
    pub fn new(psi: &GridWaveFunction<T>) -> Result<Self> {
        Ok(Self {
            density: density_from_wavefunction(psi)?,
            dirichlet: dirichlet_energy(psi),
        })
    }

    /// `∫|ψ'|²`.
    pub fn dirichlet_energy(&self) -> T {
        self.dirichlet
    }

    pub fn density(&self) -> &GridDensity<T> {
        &self.density
    }

    pub fn flow(&self, t: T) -> Result<HeatFlowPoint<T>> {
        let g = heat_semigroup(&self.density, t)?;
        Ok(HeatFlowPoint {
            t,
            neg_entropy: -differential_entropy(&g),
            sqrt_energy: sqrt_density_energy(&g),
            mass_defect: g.mass_defect,
        })
    }

    /// `F(t, δ)` from a precomputed flow point.
    pub fn gap(&self, point: &HeatFlowPoint<T>, delta: T) -> T {
        let two = T::lit(2.0);
        let dt = point.t + delta;
        let log_norm = T::lit(0.5) * (two * T::PI() * T::E() * dt).ln();
        dt * point.neg_entropy + dt * log_norm + delta / two - two * delta * delta * self.dirichlet
    }

    /// `∂F/∂t (t, δ)` from a precomputed flow point.
    pub fn gap_derivative(&self, point: &HeatFlowPoint<T>, delta: T) -> T {
        let two = T::lit(2.0);
        let dt = point.t + delta;
        let log_norm = T::lit(0.5) * (two * T::PI() * dt).ln();
        point.neg_entropy + log_norm + T::one() - two * dt * point.sqrt_energy
    }
}

/// `F(t, δ)`; the inequality asserts `F ≤ 0`.
pub fn logsobolev_gap<T: Real>(psi: &GridWaveFunction<T>, t: T, delta: T) -> Result<T> {
    check_delta(delta)?;
    let probe = LogSobolevProbe::new(psi)?;
    let point = probe.flow(t)?;
    Ok(probe.gap(&point, delta))
}

/// Closed-form `∂F/∂t (t, δ)`; nonpositive by the `t = 0` inequality
/// applied to `√(T_t f)`.
pub fn logsobolev_gap_derivative<T: Real>(psi: &GridWaveFunction<T>, t: T, delta: T) -> Result<T> {
    check_delta(delta)?;
    let probe = LogSobolevProbe::new(psi)?;
    let point = probe.flow(t)?;
    Ok(probe.gap_derivative(&point, delta))
}

/// `∫|ψ|² ln|ψ|² + ln a + 1 − (a²/π)∫|ψ'|²`; nonpositive for unit `ψ`.
/// With `a = √(2πδ)` this equals `F(0, δ)/δ`.
pub fn lieb_gap<T: Real>(psi: &GridWaveFunction<T>, a: T) -> Result<T> {
    if !(a > T::zero()) || !a.is_finite() {
        return Err(Error::param("a", a.as_f64(), "must be finite and > 0"));
    }
    let f = density_from_wavefunction(psi)?;
    let neg_entropy = -differential_entropy(&f);
    Ok(neg_entropy + a.ln() + T::one() - a * a / T::PI() * dirichlet_energy(psi))
}

/// `F(t, δ)` for the Gaussian density of variance `a`:
/// `(t+δ)·½ ln((t+δ)/(a+t)) + δ/2 − δ²/(2a)`.
pub fn gaussian_gap_closed_form<T: Real>(a: T, t: T, delta: T) -> T {
    let two = T::lit(2.0);
    let dt = t + delta;
    dt * ((dt / (a + t)).ln() / two) + delta / two - delta * delta / (two * a)
}

/// `ln((1+u)/(1+v)) − v/(1+v)·(1 − v/u)`, the Gaussian case of the
/// inequality in the variables `u = a/t`, `v = δ/t`. Nonnegative, zero on
/// `u = v`.
pub fn appendix_inequality_margin<T: Real>(u: T, v: T) -> Result<T> {
    check_uv(u, v)?;
    let log_ratio = ((u - v) / (T::one() + v)).ln_1p();
    Ok(log_ratio - v / (T::one() + v) * (T::one() - v / u))
}

/// `d/du` of [`appendix_inequality_margin`]:
/// `(u−v)(u+v+uv) / ((1+u)(1+v)u²)`.
pub fn appendix_derivative<T: Real>(u: T, v: T) -> Result<T> {
    check_uv(u, v)?;
    let one = T::one();
    Ok((u - v) * (u + v + u * v) / ((one + u) * (one + v) * u * u))
}

fn check_uv<T: Real>(u: T, v: T) -> Result<()> {
    if !(u > T::zero()) || !u.is_finite() {
        return Err(Error::param("u", u.as_f64(), "must be finite and > 0"));
    }
    if !(v >= T::zero()) || !v.is_finite() {
        return Err(Error::param("v", v.as_f64(), "must be finite and >= 0"));
    }
    Ok(())
}

/// Output entropy of a pure state and its lower bound from the
/// inequality, `ln√(2π(β+δ)) + (β+2δ)/(2(β+δ)) − 2δ²/(β+δ)·⟨p²⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmxBound<T> {
    pub entropy: T,
    pub bound: T,
}

impl<T: Real> EmxBound<T> {
    pub fn slack(&self) -> T {
        self.entropy - self.bound
    }
}

/// Lower bound on `h_M(ψ)` that is affine in `⟨p²⟩`.
pub fn emx_bound_value<T: Real>(beta: T, delta: T, momentum_second_moment: T) -> T {
    let two = T::lit(2.0);
    let s = beta + delta;
    T::lit(0.5) * (two * T::PI() * s).ln() + (beta + two * delta) / (two * s)
        - two * delta * delta / s * momentum_second_moment
}

pub fn emx_lower_bound<T: Real>(psi: &GridWaveFunction<T>, beta: T, delta: T) -> Result<EmxBound<T>> {
    check_delta(delta)?;
    let entropy = output_entropy(psi, beta)?;
    let bound = emx_bound_value(beta, delta, dirichlet_energy(psi));
    Ok(EmxBound { entropy, bound })
}
