use std::ops::{Add, Mul, Sub};

use num_complex::Complex;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::{Error, Real, Result};

/// Default number of grid points.
pub const DEFAULT_POINTS: usize = 4096;
/// Smallest half-width used by the automatic grid choice.
pub const MIN_HALF_WIDTH: f64 = 10.0;
/// Standard deviations of the widest Gaussian that must fit inside `[-L, L]`.
pub const HALF_WIDTH_SIGMAS: f64 = 8.0;

/// Uniform grid `x_i = x0 + i·dx`, `i = 0..n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid<T> {
    x0: T,
    dx: T,
    n: usize,
}

impl<T: Real> Grid<T> {
    pub fn new(x0: T, dx: T, n: usize) -> Result<Self> {
        if !(dx > T::zero()) || !dx.is_finite() {
            return Err(Error::param("dx", dx.as_f64(), "must be finite and > 0"));
        }
        if !x0.is_finite() {
            return Err(Error::param("x0", x0.as_f64(), "must be finite"));
        }
        if n < 8 {
            return Err(Error::param("n", n as f64, "need at least 8 grid points"));
        }
        Ok(Self { x0, dx, n })
    }

    /// `n` points spanning `[-half_width, half_width]` inclusive.
    pub fn symmetric(n: usize, half_width: T) -> Result<Self> {
        if !(half_width > T::zero()) {
            return Err(Error::param(
                "half_width",
                half_width.as_f64(),
                "must be > 0",
            ));
        }
        let dx = T::lit(2.0) * half_width / T::from_usize(n.max(2) - 1).unwrap();
        Self::new(-half_width, dx, n)
    }

    /// Symmetric grid of `n` points wide enough for a Gaussian of variance
    /// `max_variance` centered within `offset` of the origin:
    /// `L = max(10, |offset| + 8·√max_variance)`.
    pub fn for_variance(n: usize, max_variance: T, offset: T) -> Result<Self> {
        let half_width = half_width_for(max_variance, offset);
        Self::symmetric(n, half_width)
    }

    pub fn x0(&self) -> T {
        self.x0
    }

    pub fn dx(&self) -> T {
        self.dx
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn x(&self, i: usize) -> T {
        self.x0 + T::from_usize(i).unwrap() * self.dx
    }

    pub fn points(&self) -> impl Iterator<Item = T> + '_ {
        (0..self.n).map(move |i| self.x(i))
    }

    /// Half the span `x_{n-1} - x_0`.
    pub fn half_width(&self) -> T {
        T::from_usize(self.n - 1).unwrap() * self.dx / T::lit(2.0)
    }

    pub fn center(&self) -> T {
        self.x0 + self.half_width()
    }

    pub fn same_as(&self, other: &Self) -> bool {
        self.n == other.n
            && (self.dx - other.dx).abs() <= T::tol(1e-12) * self.dx
            && (self.x0 - other.x0).abs() <= T::tol(1e-12) * self.dx
    }

    /// Riemann sum `Σ v_i·dx`.
    pub fn integrate(&self, values: impl Iterator<Item = T>) -> T {
        values.fold(T::zero(), |acc, v| acc + v) * self.dx
    }
}

/// `max(10, |offset| + 8·√max_variance)`.
pub fn half_width_for<T: Real>(max_variance: T, offset: T) -> T {
    let sigmas = T::lit(HALF_WIDTH_SIGMAS) * max_variance.max(T::zero()).sqrt();
    (offset.abs() + sigmas).max(T::lit(MIN_HALF_WIDTH))
}

/// Complex amplitudes on a grid, L²-normalized and decaying at both ends.
#[derive(Debug, Clone, PartialEq)]
pub struct GridWaveFunction<T> {
    grid: Grid<T>,
    values: Vec<Complex<T>>,
}

/// Largest `|ψ|²` at the grid endpoints, relative to the peak of `|ψ|²`.
pub const BOUNDARY_DECAY: f64 = 1e-12;
/// Allowed deviation of `Σ|ψ|²dx` from one.
pub const WAVEFUNCTION_NORM_TOL: f64 = 1e-10;
/// Allowed deviation of `Σ f dx` from one.
pub const DENSITY_MASS_TOL: f64 = 1e-8;

impl<T: Real> GridWaveFunction<T> {
    pub fn new(grid: Grid<T>, values: Vec<Complex<T>>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        let norm = grid.integrate(values.iter().map(|z| z.norm_sqr()));
        if !norm.is_finite() || (norm - T::one()).abs() > T::tol(WAVEFUNCTION_NORM_TOL) {
            return Err(Error::NotNormalized {
                mass: norm.as_f64(),
            });
        }
        let peak = values.iter().map(|z| z.norm_sqr()).fold(T::zero(), T::max);
        let edge = values[0].norm_sqr().max(values[values.len() - 1].norm_sqr());
        if edge > T::tol(BOUNDARY_DECAY) * peak {
            return Err(Error::UnderResolved(format!(
                "endpoint density {} exceeds {:e} of the peak {}",
                edge.as_f64(),
                BOUNDARY_DECAY,
                peak.as_f64()
            )));
        }
        Ok(Self { grid, values })
    }

    /// Samples `amplitude` on the grid, normalizes, then validates.
    pub fn from_fn(grid: Grid<T>, amplitude: impl Fn(T) -> Complex<T>) -> Result<Self> {
        let mut values: Vec<Complex<T>> = grid.points().map(amplitude).collect();
        let norm = grid.integrate(values.iter().map(|z| z.norm_sqr()));
        if !(norm > T::zero()) || !norm.is_finite() {
            return Err(Error::NotNormalized {
                mass: norm.as_f64(),
            });
        }
        let scale = norm.sqrt().recip();
        values.iter_mut().for_each(|z| *z *= scale);
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    /// `⟨self, other⟩ = Σ conj(φ_i)·ψ_i·dx` for vectors on the same grid.
    pub fn inner(&self, other: &[Complex<T>]) -> Complex<T> {
        inner_product(&self.grid, &self.values, other)
    }

    /// `∫ x |ψ|² dx`.
    pub fn mean_position(&self) -> T {
        self.grid.integrate(
            self.values
                .iter()
                .enumerate()
                .map(|(i, z)| self.grid.x(i) * z.norm_sqr()),
        )
    }

    /// `∫ x² |ψ|² dx`.
    pub fn second_moment(&self) -> T {
        self.grid.integrate(self.values.iter().enumerate().map(|(i, z)| {
            let x = self.grid.x(i);
            x * x * z.norm_sqr()
        }))
    }
}

pub(crate) fn inner_product<T: Real>(grid: &Grid<T>, a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    a.iter()
        .zip(b)
        .fold(Complex::zero(), |acc, (u, v)| acc + u.conj() * v)
        * grid.dx()
}

/// Nonnegative density on a grid with unit mass.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDensity<T> {
    grid: Grid<T>,
    values: Vec<T>,
    /// Relative mass lost before renormalization, when this density was
    /// produced by smoothing. Zero otherwise.
    pub mass_defect: T,
}

impl<T: Real> GridDensity<T> {
    pub fn new(grid: Grid<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        if let Some((index, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(**v >= T::zero()) || !v.is_finite())
        {
            return Err(Error::NegativeDensity {
                index,
                value: v.as_f64(),
            });
        }
        let mass = grid.integrate(values.iter().copied());
        if (mass - T::one()).abs() > T::tol(DENSITY_MASS_TOL) {
            return Err(Error::NotNormalized {
                mass: mass.as_f64(),
            });
        }
        Ok(Self {
            grid,
            values,
            mass_defect: T::zero(),
        })
    }

    /// Samples `density`, clamps at zero, normalizes and validates.
    pub fn from_fn(grid: Grid<T>, density: impl Fn(T) -> T) -> Result<Self> {
        let values: Vec<T> = grid.points().map(|x| density(x).max(T::zero())).collect();
        Self::normalized(grid, values)
    }

    pub(crate) fn normalized(grid: Grid<T>, mut values: Vec<T>) -> Result<Self> {
        let mass = grid.integrate(values.iter().copied());
        if !(mass > T::zero()) || !mass.is_finite() {
            return Err(Error::NotNormalized {
                mass: mass.as_f64(),
            });
        }
        values.iter_mut().for_each(|v| *v /= mass);
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn mass(&self) -> T {
        self.grid.integrate(self.values.iter().copied())
    }

    pub fn mean(&self) -> T {
        self.grid
            .integrate(self.values.iter().enumerate().map(|(i, f)| self.grid.x(i) * *f))
    }

    pub fn variance(&self) -> T {
        let m = self.mean();
        self.grid.integrate(self.values.iter().enumerate().map(|(i, f)| {
            let d = self.grid.x(i) - m;
            d * d * *f
        }))
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (*a - *b).abs())
            .fold(T::zero(), T::max)
    }
}

/// Fourth-order first derivative; one-sided stencils at the two outermost
/// points on each side.
pub(crate) fn first_derivative<T, V>(values: &[V], dx: T) -> Vec<V>
where
    T: Real,
    V: Copy + Zero + Add<Output = V> + Sub<Output = V> + Mul<T, Output = V>,
{
    let n = values.len();
    assert!(n >= 5, "stencil needs at least 5 points");
    let f = values;
    let c = |k: f64| T::lit(k);
    let scale = (T::lit(12.0) * dx).recip();
    let mut out = vec![V::zero(); n];
    for i in 2..n - 2 {
        out[i] = (f[i - 2] - f[i + 2] + (f[i + 1] - f[i - 1]) * c(8.0)) * scale;
    }
    let fwd0 = |a: usize, s: isize| {
        let at = |k: isize| f[(a as isize + s * k) as usize];
        at(1) * c(48.0) + at(3) * c(16.0) - at(0) * c(25.0) - at(2) * c(36.0) - at(4) * c(3.0)
    };
    let fwd1 = |a: usize, s: isize| {
        let at = |k: isize| f[(a as isize + s * k) as usize];
        at(2) * c(18.0) + at(4) - at(0) * c(3.0) - at(1) * c(10.0) - at(3) * c(6.0)
    };
    out[0] = fwd0(0, 1) * scale;
    out[1] = fwd1(0, 1) * scale;
    // Mirrored stencils pick up a sign flip for an odd derivative.
    out[n - 1] = (V::zero() - fwd0(n - 1, -1)) * scale;
    out[n - 2] = (V::zero() - fwd1(n - 1, -1)) * scale;
    out
}

/// Fourth-order second derivative; one-sided stencils at the boundary.
pub(crate) fn second_derivative<T, V>(values: &[V], dx: T) -> Vec<V>
where
    T: Real,
    V: Copy + Zero + Add<Output = V> + Sub<Output = V> + Mul<T, Output = V>,
{
    let n = values.len();
    assert!(n >= 6, "stencil needs at least 6 points");
    let f = values;
    let c = |k: f64| T::lit(k);
    let scale = (T::lit(12.0) * dx * dx).recip();
    let mut out = vec![V::zero(); n];
    for i in 2..n - 2 {
        out[i] = ((f[i - 1] + f[i + 1]) * c(16.0) - f[i - 2] - f[i + 2] - f[i] * c(30.0)) * scale;
    }
    let edge0 = |a: usize, s: isize| {
        let at = |k: isize| f[(a as isize + s * k) as usize];
        at(0) * c(45.0) + at(2) * c(214.0) + at(4) * c(61.0)
            - at(1) * c(154.0)
            - at(3) * c(156.0)
            - at(5) * c(10.0)
    };
    let edge1 = |a: usize, s: isize| {
        let at = |k: isize| f[(a as isize + s * k) as usize];
        at(0) * c(10.0) + at(3) * c(14.0) + at(5) - at(1) * c(15.0) - at(2) * c(4.0) - at(4) * c(6.0)
    };
    out[0] = edge0(0, 1) * scale;
    out[1] = edge1(0, 1) * scale;
    out[n - 1] = edge0(n - 1, -1) * scale;
    out[n - 2] = edge1(n - 1, -1) * scale;
    out
}
