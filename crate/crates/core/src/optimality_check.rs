//! Numerical certificate for the optimality of the Gaussian encoding.
//!
//! In the position representation every POVM density `m(y)` is a
//! multiplication operator, so `K(ρ) = −∫ m(y) ln p_ρ(y) dy` is the
//! multiplication by `T_β(−ln p_ρ)`, and the dual certificate
//! `Λ₀ = c + (β+2δ)/(2(β+δ)) − 2δ²p²/(β+δ)` only adds a `p²` term. Both fit
//! in [`GridOperator`].
//!
//! Condition (ii): `[K(ρ₀(x)) − Λ₀] |x⟩_δ = 0` for every signal state.
//! Condition (i): `⟨ψ|Λ₀|ψ⟩ ≤ ⟨ψ|K(ρ)|ψ⟩` for all states `ρ` and unit `ψ`,
//! checked on seeded random families.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::waveform_lab::{
    inner_product, output_entropy, second_derivative, smeared_output_density, Grid, GridDensity,
    GridWaveFunction,
};
use crate::{Error, Real, Result};

/// `constant + multiplier(q) + psq_coefficient · p²` on a grid, with
/// `p² = −d²/dq²`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridOperator<T> {
    grid: Grid<T>,
    pub multiplier: Vec<T>,
    pub psq_coefficient: T,
    pub constant: T,
}

impl<T: Real> GridOperator<T> {
    pub fn new(grid: Grid<T>, multiplier: Vec<T>, psq_coefficient: T, constant: T) -> Result<Self> {
        if multiplier.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        Ok(Self {
            grid,
            multiplier,
            psq_coefficient,
            constant,
        })
    }

    /// `c₀ + V(q)` with no kinetic part.
    pub fn multiplication(grid: Grid<T>, constant: T, potential: impl Fn(T) -> T) -> Self {
        let multiplier = grid.points().map(potential).collect();
        Self {
            grid,
            multiplier,
            psq_coefficient: T::zero(),
            constant,
        }
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    /// `self − other`.
    pub fn difference(&self, other: &Self) -> Result<Self> {
        if !self.grid.same_as(&other.grid) {
            return Err(Error::GridMismatch);
        }
        Ok(Self {
            grid: self.grid,
            multiplier: self
                .multiplier
                .iter()
                .zip(&other.multiplier)
                .map(|(a, b)| *a - *b)
                .collect(),
            psq_coefficient: self.psq_coefficient - other.psq_coefficient,
            constant: self.constant - other.constant,
        })
    }

    /// Multiplier plus constant at grid index `i`.
    pub fn potential_at(&self, i: usize) -> T {
        self.constant + self.multiplier[i]
    }

    /// `(c₀ + V)ψ − c₂ ψ''`; the result is not normalized.
    pub fn apply(&self, psi: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        if psi.len() != self.grid.len() {
            return Err(Error::GridMismatch);
        }
        let mut out: Vec<Complex<T>> = psi
            .iter()
            .enumerate()
            .map(|(i, z)| *z * self.potential_at(i))
            .collect();
        if self.psq_coefficient != T::zero() {
            let d2 = second_derivative(psi, self.grid.dx());
            for (o, d) in out.iter_mut().zip(d2) {
                *o -= d * self.psq_coefficient;
            }
        }
        Ok(out)
    }

    /// `Re ⟨ψ|A|ψ⟩`.
    pub fn expectation(&self, psi: &GridWaveFunction<T>) -> Result<T> {
        self.check_grid(psi)?;
        let applied = self.apply(psi.values())?;
        Ok(psi.inner(&applied).re)
    }

    /// `‖Aψ‖₂`.
    pub fn residual_norm(&self, psi: &GridWaveFunction<T>) -> Result<T> {
        self.check_grid(psi)?;
        let applied = self.apply(psi.values())?;
        Ok(inner_product(&self.grid, &applied, &applied).re.sqrt())
    }

    fn check_grid(&self, psi: &GridWaveFunction<T>) -> Result<()> {
        if self.grid.same_as(psi.grid()) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
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

fn check_delta<T: Real>(delta: T) -> Result<()> {
    if delta > T::zero() && delta.is_finite() {
        Ok(())
    } else {
        Err(Error::param("delta", delta.as_f64(), "must be finite and > 0"))
    }
}

/// `c = ln √(2π(β+δ))`.
fn log_normalizer<T: Real>(beta: T, delta: T) -> T {
    T::lit(0.5) * (T::lit(2.0) * T::PI() * (beta + delta)).ln()
}

/// `K(ρ₀(x)) = c + ((q−x)² + β)/(2(β+δ))` for the squeezed coherent state
/// `|x⟩_δ`.
pub fn kernel_k_closed_form<T: Real>(grid: &Grid<T>, x: T, beta: T, delta: T) -> Result<GridOperator<T>> {
    check_beta(beta)?;
    check_delta(delta)?;
    let denom = T::lit(2.0) * (beta + delta);
    Ok(GridOperator::multiplication(
        *grid,
        log_normalizer(beta, delta),
        |q| ((q - x) * (q - x) + beta) / denom,
    ))
}

/// Density values below this fraction of the peak are not trusted inside
/// a logarithm; `−ln p` is extrapolated there.
pub const RELIABLE_DENSITY_FLOOR: f64 = 1e-10;
/// Kernel standard deviations kept in the direct convolution.
const KERNEL_SIGMAS: f64 = 12.0;

/// Least-squares quadratic `a + b z + c z²` with `z = (x − center)/scale`.
#[derive(Debug, Clone, Copy)]
struct QuadraticFit<T> {
    center: T,
    scale: T,
    coef: [T; 3],
}

impl<T: Real> QuadraticFit<T> {
    fn fit(xs: &[T], ys: &[T]) -> Option<Self> {
        let n = T::from_usize(xs.len())?;
        let center = xs.iter().fold(T::zero(), |a, x| a + *x) / n;
        let scale = xs
            .iter()
            .map(|x| (*x - center).abs())
            .fold(T::zero(), T::max)
            .max(T::min_positive_value());
        // Normal equations for the monomials 1, z, z².
        let mut m = [[T::zero(); 4]; 3];
        for (x, y) in xs.iter().zip(ys) {
            let z = (*x - center) / scale;
            let basis = [T::one(), z, z * z];
            for r in 0..3 {
                for c in 0..3 {
                    m[r][c] += basis[r] * basis[c];
                }
                m[r][3] += basis[r] * *y;
            }
        }
        for col in 0..3 {
            let pivot = (col..3).max_by(|&a, &b| {
                m[a][col]
                    .abs()
                    .partial_cmp(&m[b][col].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })?;
            m.swap(col, pivot);
            if m[col][col].abs() <= T::min_positive_value() {
                return None;
            }
            for r in 0..3 {
                if r != col {
                    let factor = m[r][col] / m[col][col];
                    for c in col..4 {
                        let v = m[col][c];
                        m[r][c] -= factor * v;
                    }
                }
            }
        }
        Some(Self {
            center,
            scale,
            coef: [m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]],
        })
    }

    fn eval(&self, x: T) -> T {
        let z = (x - self.center) / self.scale;
        self.coef[0] + z * (self.coef[1] + z * self.coef[2])
    }
}

/// `K(ρ)` from the outcome density `p_ρ`: multiplication by
/// `(T_β(−ln p_ρ))(q)`.
///
/// `−ln p_ρ` is only trusted where `p_ρ ≥ 1e-10·max p_ρ`; beyond the
/// outermost such points it is continued by quadratics fitted to the
/// adjacent stretch, which is exact for Gaussian-smeared densities, and
/// the convolution runs over that continuation rather than a truncated
/// grid. Points below the floor between trusted ones are rejected.
pub fn kernel_k_numeric<T: Real>(p_rho: &GridDensity<T>, beta: T) -> Result<GridOperator<T>> {
    check_beta(beta)?;
    let grid = *p_rho.grid();
    let p = p_rho.values();
    let n = p.len();
    let peak = p.iter().copied().fold(T::zero(), T::max);
    let floor = T::lit(RELIABLE_DENSITY_FLOOR) * peak;
    let first = p.iter().position(|v| *v >= floor).ok_or(Error::ZeroDensity { index: 0 })?;
    let last = p.iter().rposition(|v| *v >= floor).unwrap_or(first);
    if let Some(offset) = p[first..=last].iter().position(|v| *v < floor) {
        return Err(Error::ZeroDensity {
            index: first + offset,
        });
    }
    let span = last - first + 1;
    let window = (span / 8).clamp(8, 256);
    if span < 2 * window {
        return Err(Error::UnderResolved(format!(
            "density is trusted on only {span} grid points"
        )));
    }

    let neg_log: Vec<T> = p[first..=last].iter().map(|v| -v.ln()).collect();
    let xs: Vec<T> = (first..=last).map(|i| grid.x(i)).collect();
    let fit_err = || Error::UnderResolved("tail fit of -ln p is singular".into());
    let left = QuadraticFit::fit(&xs[..window], &neg_log[..window]).ok_or_else(fit_err)?;
    let right =
        QuadraticFit::fit(&xs[span - window..], &neg_log[span - window..]).ok_or_else(fit_err)?;

    let x_at = |i: isize| grid.x0() + T::from_isize(i).unwrap() * grid.dx();
    let extended = |i: isize| -> T {
        if i < first as isize {
            left.eval(x_at(i))
        } else if i > last as isize {
            right.eval(x_at(i))
        } else {
            neg_log[i as usize - first]
        }
    };

    let multiplier: Vec<T> = if beta == T::zero() {
        (0..n as isize).map(extended).collect()
    } else {
        let sigma_points = (beta.sqrt() / grid.dx()).as_f64();
        let radius = (KERNEL_SIGMAS * sigma_points).ceil().max(1.0) as isize;
        let mut weights: Vec<T> = (-radius..=radius)
            .map(|k| {
                let y = T::from_isize(k).unwrap() * grid.dx();
                (-y * y / (T::lit(2.0) * beta)).exp()
            })
            .collect();
        let total = weights.iter().fold(T::zero(), |a, w| a + *w);
        weights.iter_mut().for_each(|w| *w /= total);
        let padded: Vec<T> = (-radius..n as isize + radius).map(extended).collect();
        (0..n)
            .map(|i| {
                padded[i..i + weights.len()]
                    .iter()
                    .zip(&weights)
                    .fold(T::zero(), |acc, (v, w)| acc + *v * *w)
            })
            .collect()
    };
    GridOperator::new(grid, multiplier, T::zero(), T::zero())
}

/// `Λ₀ = c + (β+2δ)/(2(β+δ)) − 2δ²/(β+δ) · p²`.
pub fn lambda0_operator<T: Real>(grid: &Grid<T>, beta: T, delta: T) -> Result<GridOperator<T>> {
    check_beta(beta)?;
    check_delta(delta)?;
    let two = T::lit(2.0);
    let s = beta + delta;
    Ok(GridOperator {
        grid: *grid,
        multiplier: vec![T::zero(); grid.len()],
        psq_coefficient: -two * delta * delta / s,
        constant: log_normalizer(beta, delta) + (beta + two * delta) / (two * s),
    })
}

/// `(c₀ + V)ψ − c₂ψ''`.
pub fn apply_operator<T: Real>(op: &GridOperator<T>, psi: &GridWaveFunction<T>) -> Result<Vec<Complex<T>>> {
    op.check_grid(psi)?;
    op.apply(psi.values())
}

/// `|x⟩_δ` sampled on `grid`.
pub fn squeezed_coherent<T: Real>(grid: &Grid<T>, x: T, delta: T) -> Result<GridWaveFunction<T>> {
    check_delta(delta)?;
    GridWaveFunction::from_fn(*grid, |q| {
        let d = q - x;
        Complex::new((-d * d / (T::lit(4.0) * delta)).exp(), T::zero())
    })
}

/// `‖[K(ρ₀(x)) − Λ₀] |x⟩_δ‖₂` with `K` computed numerically from the
/// grid-smeared outcome density of `|x⟩_δ`.
pub fn condition_ii_residual<T: Real>(x: T, beta: T, delta: T, grid: &Grid<T>) -> Result<T> {
    let certificate = lambda0_operator(grid, beta, delta)?;
    condition_ii_residual_against(x, beta, delta, &certificate)
}

/// Condition (ii) residual of the signal state `|x⟩_δ` against an arbitrary
/// candidate certificate (e.g. `Λ₀` built for a different `δ`).
pub fn condition_ii_residual_against<T: Real>(
    x: T,
    beta: T,
    state_delta: T,
    certificate: &GridOperator<T>,
) -> Result<T> {
    let grid = certificate.grid();
    if x.abs() > grid.half_width() / T::lit(2.0) {
        return Err(Error::param(
            "x",
            x.as_f64(),
            "displacement exceeds half the grid half-width",
        ));
    }
    let state = squeezed_coherent(grid, x, state_delta)?;
    let k = kernel_k_numeric(&smeared_output_density(&state, beta)?, beta)?;
    k.difference(certificate)?.residual_norm(&state)
}

/// `h_M(ψ) − ⟨ψ|Λ₀|ψ⟩`; nonnegative by the log-Sobolev-type inequality.
pub fn condition_i_margin<T: Real>(psi: &GridWaveFunction<T>, beta: T, delta: T) -> Result<T> {
    let lambda = lambda0_operator(psi.grid(), beta, delta)?.expectation(psi)?;
    Ok(output_entropy(psi, beta)? - lambda)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixedMargin<T> {
    /// `⟨ψ|K(ρ)|ψ⟩ − ⟨ψ|Λ₀|ψ⟩`.
    pub margin: T,
    /// `⟨ψ|K(ρ)|ψ⟩`.
    pub k_expectation: T,
    /// `h_M(ψ)`.
    pub output_entropy: T,
}

impl<T: Real> MixedMargin<T> {
    /// `⟨ψ|K(ρ)|ψ⟩ − h_M(ψ) = D(p_ψ ‖ p_ρ) ≥ 0`.
    pub fn relative_entropy(&self) -> T {
        self.k_expectation - self.output_entropy
    }
}

/// Condition (i) for a general state `ρ` given through its outcome density.
pub fn condition_i_margin_mixed<T: Real>(
    p_rho: &GridDensity<T>,
    psi: &GridWaveFunction<T>,
    beta: T,
    delta: T,
) -> Result<MixedMargin<T>> {
    if !p_rho.grid().same_as(psi.grid()) {
        return Err(Error::GridMismatch);
    }
    let k_expectation = kernel_k_numeric(p_rho, beta)?.expectation(psi)?;
    let lambda = lambda0_operator(psi.grid(), beta, delta)?.expectation(psi)?;
    Ok(MixedMargin {
        margin: k_expectation - lambda,
        k_expectation,
        output_entropy: output_entropy(psi, beta)?,
    })
}

/// `Tr ρ_α Λ₀` with `δ = 1/(4α_p)`; equals `e_M(ρ_α)`.
pub fn dual_value<T: Real>(alpha_p: T, beta: T) -> Result<T> {
    if !(alpha_p > T::zero()) || !alpha_p.is_finite() {
        return Err(Error::param("alpha_p", alpha_p.as_f64(), "must be finite and > 0"));
    }
    check_beta(beta)?;
    let two = T::lit(2.0);
    let delta = (T::lit(4.0) * alpha_p).recip();
    let s = beta + delta;
    Ok(log_normalizer(beta, delta) + (beta + two * delta) / (two * s)
        - two * delta * delta / s * alpha_p)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimalityTolerances {
    pub condition_ii: f64,
    pub condition_i: f64,
    /// `|dual_value − e_M|`, an algebraic identity.
    pub dual_identity: f64,
    /// `|dual_value − h_M(|0⟩_δ)|` with the entropy computed on the grid.
    pub dual_vs_grid: f64,
}

impl Default for OptimalityTolerances {
    fn default() -> Self {
        Self {
            condition_ii: 1e-5,
            condition_i: 5e-4,
            dual_identity: 1e-12,
            dual_vs_grid: 5e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalityReport<T> {
    /// `(x, residual)` per displacement.
    pub condition_ii_residuals: Vec<(T, T)>,
    /// `(case id, margin)` per sampled `ψ` or `(ψ, ρ)` pair.
    pub condition_i_margins: Vec<(String, T)>,
    pub dual_value: T,
    /// `dual_value − e_M(ρ_α)`.
    pub dual_gap: T,
}

impl<T: Real> OptimalityReport<T> {
    pub fn worst_residual(&self) -> T {
        self.condition_ii_residuals
            .iter()
            .map(|(_, r)| *r)
            .fold(T::zero(), T::max)
    }

    pub fn worst_margin(&self) -> T {
        self.condition_i_margins
            .iter()
            .map(|(_, m)| *m)
            .fold(T::infinity(), T::min)
    }

    pub fn passes(&self, tol: &OptimalityTolerances) -> bool {
        self.condition_ii_residuals
            .iter()
            .all(|(_, r)| r.as_f64() <= tol.condition_ii)
            && self
                .condition_i_margins
                .iter()
                .all(|(_, m)| m.as_f64() >= -tol.condition_i)
            && self.dual_gap.abs().as_f64() <= tol.dual_identity
    }
}
