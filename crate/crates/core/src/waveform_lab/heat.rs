//! Heat semigroup `T_t f = f * N(0, t)` on a finite grid.
//!
//! The flow is applied as the exact Fourier multiplier `exp(-t ω²/2)` on a
//! zero-padded copy of the grid. The padding is at least twelve kernel
//! standard deviations on each side, so the periodic wrap of the discrete
//! transform never reaches the grid and the result is the linear
//! (full-line) convolution.

use num_complex::Complex;
use rustfft::FftPlanner;

use super::grid::GridDensity;
use crate::{Error, Real, Result};

/// Kernel standard deviations kept on each side of the grid.
const PAD_SIGMAS: f64 = 12.0;
/// Largest `√t / L` accepted by [`heat_semigroup`].
pub const MAX_KERNEL_FRACTION: f64 = 0.125;

/// `T_t f`. `t = 0` returns `f` unchanged. The result is renormalized and
/// the relative mass that left the grid is stored in `mass_defect`.
pub fn heat_semigroup<T: Real>(f: &GridDensity<T>, t: T) -> Result<GridDensity<T>> {
    if !(t >= T::zero()) || !t.is_finite() {
        return Err(Error::param("t", t.as_f64(), "must be finite and >= 0"));
    }
    if t == T::zero() {
        return Ok(f.clone());
    }
    let grid = *f.grid();
    if t.sqrt() > T::lit(MAX_KERNEL_FRACTION) * grid.half_width() {
        return Err(Error::KernelTooWide {
            variance: t.as_f64(),
            half_width: grid.half_width().as_f64(),
        });
    }
    let mut values = gaussian_smooth(f.values(), grid.dx(), t);
    values.iter_mut().for_each(|v| *v = v.max(T::zero()));
    let before = f.mass();
    let after = grid.integrate(values.iter().copied());
    let mut out = GridDensity::normalized(grid, values)?;
    out.mass_defect = T::one() - after / before;
    Ok(out)
}

/// Convolves grid samples (zero outside the grid) with the Gaussian of
/// variance `t`, returning values on the same grid.
pub(crate) fn gaussian_smooth<T: Real>(values: &[T], dx: T, t: T) -> Vec<T> {
    let n = values.len();
    if t == T::zero() {
        return values.to_vec();
    }
    let sigma_points = (t.sqrt() / dx).to_f64().unwrap_or(0.0);
    let pad = (PAD_SIGMAS * sigma_points).ceil() as usize + 8;
    let size = (n + 2 * pad).next_power_of_two();
    let left = (size - n) / 2;

    let mut buffer = vec![Complex::new(T::zero(), T::zero()); size];
    for (slot, v) in buffer[left..left + n].iter_mut().zip(values) {
        slot.re = *v;
    }

    let mut planner = FftPlanner::<T>::new();
    planner.plan_fft_forward(size).process(&mut buffer);

    let period = dx * T::from_usize(size).unwrap();
    let omega_unit = T::lit(2.0) * T::PI() / period;
    let half_t = t / T::lit(2.0);
    let inv_size = T::from_usize(size).unwrap().recip();
    for (k, z) in buffer.iter_mut().enumerate() {
        let signed = if k <= size / 2 {
            k as f64
        } else {
            k as f64 - size as f64
        };
        let omega = omega_unit * T::lit(signed);
        *z *= (-half_t * omega * omega).exp() * inv_size;
    }
    planner.plan_fft_inverse(size).process(&mut buffer);

    buffer[left..left + n].iter().map(|z| z.re).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::waveform_lab::grid::Grid;

    fn normal(mean: f64, var: f64) -> impl Fn(f64) -> f64 {
        move |x| (-(x - mean) * (x - mean) / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt()
    }

    #[test]
    fn zero_time_is_identity() {
        let g = Grid::symmetric(512, 10.0).unwrap();
        let f = GridDensity::from_fn(g, normal(0.3, 0.7)).unwrap();
        assert_eq!(heat_semigroup(&f, 0.0).unwrap(), f);
    }

    #[test]
    fn gaussian_variance_adds() {
        let g = Grid::symmetric(4096, 10.0).unwrap();
        for (a, t) in [(0.5, 0.25), (1.0, 1.0), (0.01, 1.0), (0.3, 1e-4)] {
            let f = GridDensity::from_fn(g, normal(0.5, a)).unwrap();
            let out = heat_semigroup(&f, t).unwrap();
            let expect = GridDensity::from_fn(g, normal(0.5, a + t)).unwrap();
            let err = out.max_abs_diff(&expect);
            assert!(err < 1e-8, "a={a} t={t}: sup error {err:e}");
            assert!(out.mass_defect.abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_bad_times() {
        let g = Grid::symmetric(512, 10.0).unwrap();
        let f = GridDensity::from_fn(g, normal(0.0, 1.0)).unwrap();
        assert!(heat_semigroup(&f, -1.0).is_err());
        assert!(matches!(
            heat_semigroup(&f, 4.0),
            Err(Error::KernelTooWide { .. })
        ));
    }

    #[test]
    fn mass_leaving_the_grid_is_recorded() {
        let g = Grid::symmetric(1024, 10.0).unwrap();
        let f = GridDensity::from_fn(g, normal(8.5, 0.1)).unwrap();
        let out = heat_semigroup(&f, 1.5).unwrap();
        assert!(out.mass_defect > 1e-3);
        assert!((out.mass() - 1.0).abs() < 1e-12);
    }
}
