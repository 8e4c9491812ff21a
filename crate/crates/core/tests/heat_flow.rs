use homodyne_core::waveform_lab::{
    density_from_wavefunction, gaussian_gap_closed_form, generate_test_wavefunction, heat_semigroup,
    lieb_gap, logsobolev_gap, logsobolev_gap_derivative, random_family_member, Grid,
    GridWaveFunction, LogSobolevProbe, WaveFunctionKind, WaveFunctionSpec,
};
use proptest::prelude::*;

const SEED: u64 = 20;

fn family(index: u64) -> GridWaveFunction<f64> {
    generate_test_wavefunction(&random_family_member(SEED, index, 4096, 2.5)).unwrap()
}

#[test]
fn semigroup_composes() {
    for index in 0..6 {
        let f = density_from_wavefunction(&family(index)).unwrap();
        for &(t1, t2) in &[(0.1, 0.4), (0.5, 1.0), (0.25, 2.0)] {
            let two_steps = heat_semigroup(&heat_semigroup(&f, t2).unwrap(), t1).unwrap();
            let one_step = heat_semigroup(&f, t1 + t2).unwrap();
            let diff = two_steps.max_abs_diff(&one_step);
            assert!(diff <= 1e-7, "psi {index}, t=({t1},{t2}): {diff:e}");
        }
    }
}

#[test]
fn gap_decreases_along_the_flow() {
    let times = [0.0, 0.1, 0.25, 0.5, 1.0, 2.0];
    for index in 0..12 {
        let probe = LogSobolevProbe::new(&family(index)).unwrap();
        let flow: Vec<_> = times.iter().map(|&t| probe.flow(t).unwrap()).collect();
        for &delta in &[0.25, 0.5, 1.0, 2.0] {
            for w in flow.windows(2) {
                let (a, b) = (probe.gap(&w[0], delta), probe.gap(&w[1], delta));
                assert!(b <= a + 5e-4, "psi {index}, delta {delta}: F({})={a} < F({})={b}", w[0].t, w[1].t);
            }
        }
    }
}

#[test]
fn lieb_gap_controls_the_initial_gap() {
    for index in 0..12 {
        let psi = family(index);
        for &delta in &[0.25f64, 0.5, 1.0, 2.0] {
            let lieb = lieb_gap(&psi, (2.0 * std::f64::consts::PI * delta).sqrt()).unwrap();
            let gap = logsobolev_gap(&psi, 0.0, delta).unwrap();
            assert!((lieb * delta - gap).abs() <= 1e-10 * gap.abs().max(1.0));
            if lieb <= 0.0 {
                assert!(gap <= 0.0);
            }
        }
    }
}

#[test]
fn derivative_matches_centered_difference() {
    let h = 1e-4;
    for index in 0..8 {
        let psi = family(index);
        for &(t, delta) in &[(0.25, 0.5), (1.0, 1.0), (0.5, 2.0)] {
            let analytic = logsobolev_gap_derivative(&psi, t, delta).unwrap();
            let fd = (logsobolev_gap(&psi, t + h, delta).unwrap() - logsobolev_gap(&psi, t - h, delta).unwrap())
                / (2.0 * h);
            let rel = (analytic - fd).abs() / analytic.abs().max(1e-4);
            assert!(rel <= 1e-3, "psi {index}, t {t}, delta {delta}: {analytic} vs {fd}");
        }
    }
}

#[test]
fn gaussian_gap_converges_under_refinement() {
    let (a, t, delta) = (0.5f64, 0.5, 1.0);
    let exact = gaussian_gap_closed_form(a, t, delta);
    let error = |n: usize| {
        let spec = WaveFunctionSpec::new(WaveFunctionKind::Gaussian { variance: a, mean: 0.0 }, n, 10.0);
        (logsobolev_gap(&generate_test_wavefunction(&spec).unwrap(), t, delta).unwrap() - exact).abs()
    };
    let errors: Vec<f64> = [128, 256, 512, 1024, 2048].iter().map(|&n| error(n)).collect();
    for w in errors.windows(2) {
        assert!(w[1] <= (w[0] / 4.0).max(1e-10), "{errors:?}");
    }
    assert!(errors[4] <= 1e-8, "{errors:?}");
}

#[test]
fn complex_dirichlet_dominates_sqrt_density_energy() {
    for index in 0..12 {
        let psi = family(index);
        let probe = LogSobolevProbe::new(&psi).unwrap();
        let at_zero = probe.flow(0.0).unwrap();
        assert!(probe.dirichlet_energy() >= at_zero.sqrt_energy * (1.0 - 1e-9));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_states_satisfy_the_inequality(index in 0u64..10_000, t in 0.0f64..2.0, delta in 0.25f64..2.0) {
        let psi = generate_test_wavefunction(&random_family_member(SEED, index, 4096, t)).unwrap();
        prop_assert!(logsobolev_gap(&psi, t, delta).unwrap() <= 5e-4);
        prop_assert!(logsobolev_gap_derivative(&psi, t, delta).unwrap() <= 5e-4);
    }

    #[test]
    fn smoothing_preserves_mass_and_adds_variance(index in 0u64..10_000, t in 0.01f64..2.0) {
        let psi = generate_test_wavefunction(&random_family_member(SEED, index, 4096, t)).unwrap();
        let f = density_from_wavefunction(&psi).unwrap();
        let g = heat_semigroup(&f, t).unwrap();
        prop_assert!((g.mass() - 1.0).abs() <= 1e-10);
        prop_assert!(g.mass_defect.abs() <= 1e-8);
        prop_assert!((g.variance() - f.variance() - t).abs() <= 1e-8 * (1.0 + f.variance()));
        prop_assert!((g.mean() - f.mean()).abs() <= 1e-8);
    }

    #[test]
    fn gaussian_equality_case(delta in 0.25f64..2.0, t in 0.0f64..2.0) {
        let grid = Grid::for_variance(4096, delta + t, 0.0).unwrap();
        let spec = WaveFunctionSpec::new(WaveFunctionKind::Gaussian { variance: delta, mean: 0.0 }, 4096, grid.half_width());
        let gap = logsobolev_gap(&generate_test_wavefunction(&spec).unwrap(), t, delta).unwrap();
        prop_assert!(gap.abs() <= 1e-4, "{}", gap);
    }
}
