//! Capacity of the noisy position (homodyne) measurement channel under an
//! oscillator energy constraint, together with the grid numerics needed to
//! certify that the Gaussian encoding attains it.
//!
//! All math is generic over a [`Real`] scalar (`f32` or `f64`); the `f64`
//! aliases at the bottom of this file are what the command-line tool uses.
//! Entropies and capacities are in nats.

// `!(x > 0)` is deliberate throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ensemble_sim;
pub mod error;
pub mod gaussian_core;
pub mod optimality_check;
pub mod waveform_lab;

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

pub use error::{Error, Result};

/// Floating-point scalar the crate computes in: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + NumAssign
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
    + rustfft::FftNum
{
    /// Converts an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// A tolerance of `x`, widened to a few ulps when the type cannot
    /// resolve `x` itself.
    #[inline]
    fn tol(x: f64) -> Self {
        Self::lit(x).max(Self::epsilon() * Self::lit(64.0))
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub type Channel = gaussian_core::Channel<f64>;
pub type OscillatorConstraint = gaussian_core::OscillatorConstraint<f64>;
pub type DiagonalCovariance = gaussian_core::DiagonalCovariance<f64>;
pub type GaussianEnsembleParams = gaussian_core::GaussianEnsembleParams<f64>;
pub type Grid = waveform_lab::Grid<f64>;
pub type GridWaveFunction = waveform_lab::GridWaveFunction<f64>;
pub type GridDensity = waveform_lab::GridDensity<f64>;
pub type GridOperator = optimality_check::GridOperator<f64>;
pub type EncodingSample = ensemble_sim::EncodingSample<f64>;
