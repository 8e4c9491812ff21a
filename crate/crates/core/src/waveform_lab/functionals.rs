use super::grid::{first_derivative, GridDensity, GridWaveFunction};
use super::heat::heat_semigroup;
use crate::{Real, Result};

/// Values at or below this are treated as exact zeros in `f ln f`.
pub const ENTROPY_FLOOR: f64 = 1e-300;

/// Density values below this fraction of the peak are skipped in the
/// Fisher-type integrand `(f')²/(4f)`; their contribution is below the
/// quadrature error while the ratio itself is dominated by roundoff.
pub const FISHER_RELATIVE_FLOOR: f64 = 1e-14;

/// `f = |ψ|²`.
pub fn density_from_wavefunction<T: Real>(psi: &GridWaveFunction<T>) -> Result<GridDensity<T>> {
    let values = psi.values().iter().map(|z| z.norm_sqr()).collect();
    GridDensity::normalized(*psi.grid(), values)
}

/// `-∫ f ln f`, with `0 ln 0 = 0`.
pub fn differential_entropy<T: Real>(f: &GridDensity<T>) -> T {
    let floor = T::from_f64(ENTROPY_FLOOR).unwrap_or_else(T::zero);
    -f.grid().integrate(
        f.values()
            .iter()
            .filter(|v| **v > floor)
            .map(|v| *v * v.ln()),
    )
}

/// `∫|ψ'|² = ⟨ψ|p²|ψ⟩`.
pub fn dirichlet_energy<T: Real>(psi: &GridWaveFunction<T>) -> T {
    let grid = psi.grid();
    let d = first_derivative(psi.values(), grid.dx());
    grid.integrate(d.iter().map(|z| z.norm_sqr()))
}

/// `∫ |d√f/dx|²`, evaluated as `∫ (f')² / (4f)` so that nodes of `f`
/// (kinks of `√f`) do not spoil the quadrature.
pub fn sqrt_density_energy<T: Real>(f: &GridDensity<T>) -> T {
    let grid = f.grid();
    let values = f.values();
    let peak = values.iter().copied().fold(T::zero(), T::max);
    let floor = T::tol(FISHER_RELATIVE_FLOOR) * peak;
    let d = first_derivative(values, grid.dx());
    let four = T::lit(4.0);
    grid.integrate(
        values
            .iter()
            .zip(&d)
            .filter(|(v, _)| **v > floor)
            .map(|(v, dv)| *dv * *dv / (four * *v)),
    )
}

/// Outcome density `p_ψ(y) = ⟨ψ|m(y)|ψ⟩ = (T_β |ψ|²)(y)` of the noisy
/// position measurement.
pub fn smeared_output_density<T: Real>(psi: &GridWaveFunction<T>, beta: T) -> Result<GridDensity<T>> {
    heat_semigroup(&density_from_wavefunction(psi)?, beta)
}

/// Output differential entropy `h_M(|ψ⟩⟨ψ|)`.
pub fn output_entropy<T: Real>(psi: &GridWaveFunction<T>, beta: T) -> Result<T> {
    Ok(differential_entropy(&smeared_output_density(psi, beta)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::waveform_lab::grid::Grid;
    use num_complex::Complex;
    use std::f64::consts::{E, PI};

    fn gaussian_amp(var: f64, mean: f64, k: f64) -> impl Fn(f64) -> Complex<f64> {
        move |x| Complex::from_polar((-(x - mean) * (x - mean) / (4.0 * var)).exp(), k * x)
    }

    fn grid() -> Grid<f64> {
        Grid::symmetric(4096, 10.0).unwrap()
    }

    #[test]
    fn uniform_density_has_zero_entropy() {
        let n = 1000;
        let g = Grid::new(0.0, 1.0 / n as f64, n).unwrap();
        let f = GridDensity::new(g, vec![1.0; n]).unwrap();
        assert_eq!(differential_entropy(&f), 0.0);
    }

    #[test]
    fn gaussian_entropies() {
        for (var, expect) in [(1.0, 1.418939), (1.5, 1.621672)] {
            let psi = GridWaveFunction::from_fn(grid(), gaussian_amp(var, 0.0, 0.0)).unwrap();
            let f = density_from_wavefunction(&psi).unwrap();
            let h = differential_entropy(&f);
            assert!((h - 0.5 * (2.0 * PI * E * var).ln()).abs() < 1e-9);
            assert!((h - expect).abs() < 1e-6);
        }
    }

    #[test]
    fn density_of_gaussian_amplitude_has_its_variance() {
        let psi = GridWaveFunction::from_fn(grid(), gaussian_amp(0.7, 0.4, 0.0)).unwrap();
        let f = density_from_wavefunction(&psi).unwrap();
        assert!((f.mean() - 0.4).abs() < 1e-10);
        assert!((f.variance() - 0.7).abs() < 1e-10);
        assert!((f.mass() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn dirichlet_energy_examples() {
        for delta in [0.5, 0.25, 2.0] {
            let g = Grid::for_variance(4096, delta, 0.0).unwrap();
            let psi = GridWaveFunction::from_fn(g, gaussian_amp(delta, 0.0, 0.0)).unwrap();
            let e = dirichlet_energy(&psi);
            assert!((e - 1.0 / (4.0 * delta)).abs() < 1e-8, "delta {delta}: {e}");
        }
        // e^{ikx} adds k² to the energy.
        let k = 1.3;
        let base = GridWaveFunction::from_fn(grid(), gaussian_amp(0.5, 0.0, 0.0)).unwrap();
        let kicked = GridWaveFunction::from_fn(grid(), gaussian_amp(0.5, 0.0, k)).unwrap();
        let shift = dirichlet_energy(&kicked) - dirichlet_energy(&base);
        assert!((shift - k * k).abs() < 1e-7, "{shift}");
    }

    #[test]
    fn sqrt_density_energy_examples() {
        let g = grid();
        let f = GridDensity::from_fn(g, |x| (-x * x / 2.0).exp()).unwrap();
        assert!((sqrt_density_energy(&f) - 0.25).abs() < 1e-8);

        let real = GridWaveFunction::from_fn(g, |x| {
            Complex::new((1.0 + x - 0.3 * x * x) * (-x * x / 3.0).exp(), 0.0)
        })
        .unwrap();
        let fr = density_from_wavefunction(&real).unwrap();
        assert!((sqrt_density_energy(&fr) - dirichlet_energy(&real)).abs() < 1e-8);

        let kicked = GridWaveFunction::from_fn(g, gaussian_amp(0.5, 0.0, 2.0)).unwrap();
        let fk = density_from_wavefunction(&kicked).unwrap();
        assert!(sqrt_density_energy(&fk) < dirichlet_energy(&kicked) - 1.0);
    }

    #[test]
    fn smeared_output_examples() {
        let g = grid();
        let delta = 0.383818;
        let x = 1.2;
        let psi = GridWaveFunction::from_fn(g, gaussian_amp(delta, x, 0.0)).unwrap();
        let p = smeared_output_density(&psi, 1.0).unwrap();
        let s = 1.0 + delta;
        let expect = GridDensity::from_fn(g, |y| (-(y - x) * (y - x) / (2.0 * s)).exp()).unwrap();
        assert!(p.max_abs_diff(&expect) < 1e-8);

        let p0 = smeared_output_density(&psi, 0.0).unwrap();
        assert!(p0.max_abs_diff(&density_from_wavefunction(&psi).unwrap()) < 1e-15);

        let vac = GridWaveFunction::from_fn(g, gaussian_amp(0.5, 0.0, 0.0)).unwrap();
        let pv = smeared_output_density(&vac, 1.0).unwrap();
        let mid = g.len() / 2;
        // Grid has an even number of points; interpolate the two central values.
        let at_zero = 0.5 * (pv.values()[mid - 1] + pv.values()[mid]);
        assert!((at_zero - 0.325735).abs() < 1e-5);
    }

    #[test]
    fn output_entropy_examples() {
        let g = grid();
        let delta = 0.383_795_939_621_999_15;
        let psi = GridWaveFunction::from_fn(g, gaussian_amp(delta, 0.0, 0.0)).unwrap();
        let h = output_entropy(&psi, 1.0).unwrap();
        assert!((h - 1.581_353_735_132_23).abs() < 1e-9);
        let vac = GridWaveFunction::from_fn(g, gaussian_amp(0.5, 0.0, 0.0)).unwrap();
        assert!((output_entropy(&vac, 0.0).unwrap() - 1.072365).abs() < 1e-6);
    }
}
