//! Grid numerics for wavefunctions and densities: heat semigroup, entropy
//! and Dirichlet functionals, and the generalized log-Sobolev gap.

mod functionals;
mod generate;
mod grid;
mod heat;
mod logsob;

use serde::{Deserialize, Serialize};

pub use functionals::{
    density_from_wavefunction, differential_entropy, dirichlet_energy, output_entropy,
    smeared_output_density, sqrt_density_energy, ENTROPY_FLOOR, FISHER_RELATIVE_FLOOR,
};
pub use generate::{
    generate_test_wavefunction, random_family_default, random_family_member, stream_rng,
    MixtureComponent, WaveFunctionKind, WaveFunctionSpec,
};
pub use grid::{
    half_width_for, Grid, GridDensity, GridWaveFunction, BOUNDARY_DECAY, DEFAULT_POINTS,
    DENSITY_MASS_TOL, HALF_WIDTH_SIGMAS, MIN_HALF_WIDTH, WAVEFUNCTION_NORM_TOL,
};
pub(crate) use grid::{inner_product, second_derivative};
pub use heat::{heat_semigroup, MAX_KERNEL_FRACTION};
pub use logsob::{
    appendix_derivative, appendix_inequality_margin, emx_bound_value, emx_lower_bound,
    gaussian_gap_closed_form, lieb_gap, logsobolev_gap, logsobolev_gap_derivative, EmxBound,
    HeatFlowPoint, LogSobolevProbe,
};

/// Quadrature-limited thresholds for the inequality checks, calibrated at
/// `N = 4096`, `L ≥ 10`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogSobolevTolerances {
    /// Largest accepted `F(t, δ)` and `∂F/∂t`.
    pub gap: f64,
    /// Largest accepted `|F|` in the Gaussian equality cases.
    pub equality: f64,
    /// Relative agreement of `∂F/∂t` with a finite difference.
    pub derivative_rel: f64,
    /// Step of that finite difference in `t`.
    pub derivative_step: f64,
    /// Zero tolerance of the appendix margin on `u = v`.
    pub appendix_zero: f64,
    /// Relative agreement of the appendix derivative with finite differences.
    pub appendix_derivative_rel: f64,
}

impl Default for LogSobolevTolerances {
    fn default() -> Self {
        Self {
            gap: 5e-4,
            equality: 1e-4,
            derivative_rel: 1e-3,
            derivative_step: 1e-4,
            appendix_zero: 1e-12,
            appendix_derivative_rel: 1e-6,
        }
    }
}
