use homodyne_core::gaussian_core::{
    alpha_constrained_capacity, convex_closure_entropy_gaussian, gaussian_capacity,
    hall_upper_bound, optimal_alpha_p, optimal_ensemble, output_entropy_gaussian,
};
use homodyne_core::DiagonalCovariance;
use proptest::prelude::*;

/// Brute-force maximum of the capacity at fixed covariance over `points`
/// momentum variances on the energy shell `α_q = 2E − α_p`, restricted to
/// the physical region `α_q α_p ≥ 1/4`.
pub fn grid_maximum(energy: f64, beta: f64, points: usize) -> f64 {
    let half = (energy * energy - 0.25).max(0.0).sqrt();
    let (lo, hi) = (energy - half, energy + half);
    (0..points)
        .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
        .filter_map(|alpha_p| {
            let cov = DiagonalCovariance::new(2.0 * energy - alpha_p, alpha_p).ok()?;
            alpha_constrained_capacity(&cov, beta).ok()
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

#[test]
fn closed_form_is_the_grid_maximum() {
    for &energy in &[0.5f64, 0.75, 1.0, 2.0, 5.0, 8.0] {
        for &beta in &[0.0, 0.1, 0.5, 1.0, 4.0] {
            let closed = gaussian_capacity(energy, beta).unwrap();
            let grid = grid_maximum(energy, beta, 100_000);
            assert!(closed >= grid - 1e-12, "E={energy} beta={beta}: {closed} < {grid}");
            assert!(closed - grid <= 1e-6, "E={energy} beta={beta}: {closed} vs {grid}");
        }
    }
}

#[test]
fn sharp_measurement_gives_ln_2e() {
    for &energy in &[0.5f64, 1.0, 2.0, 4.0] {
        let c = gaussian_capacity(energy, 0.0).unwrap();
        assert!((c - (2.0 * energy).ln()).abs() <= 1e-12);
        assert_eq!(c, hall_upper_bound(energy, 0.0).unwrap());
    }
}

#[test]
fn monotone_on_grid() {
    let energies: Vec<f64> = (0..=30).map(|i| 0.5 + 7.5 * i as f64 / 30.0).collect();
    let betas: Vec<f64> = (0..=20).map(|i| 4.0 * i as f64 / 20.0).collect();
    for &beta in &betas {
        for w in energies.windows(2) {
            assert!(gaussian_capacity(w[1], beta).unwrap() >= gaussian_capacity(w[0], beta).unwrap() - 1e-15);
        }
    }
    for &energy in &energies {
        for w in betas.windows(2) {
            assert!(gaussian_capacity(energy, w[1]).unwrap() <= gaussian_capacity(energy, w[0]).unwrap() + 1e-15);
        }
    }
}

proptest! {
    #[test]
    fn capacity_below_hall_bound(energy in 0.5f64..8.0, beta in 0.0f64..4.0) {
        let c = gaussian_capacity(energy, beta).unwrap();
        let u = hall_upper_bound(energy, beta).unwrap();
        prop_assert!(c <= u + 1e-12, "{} > {}", c, u);
    }

    #[test]
    fn capacity_splits_into_entropies(alpha_p in 0.05f64..10.0, excess in 0.0f64..10.0, beta in 0.0f64..4.0) {
        let alpha_q = 0.25 / alpha_p + excess;
        let cov = DiagonalCovariance::new(alpha_q, alpha_p).unwrap();
        let c = alpha_constrained_capacity(&cov, beta).unwrap();
        let split = output_entropy_gaussian(alpha_q, beta).unwrap()
            - convex_closure_entropy_gaussian(alpha_p, beta).unwrap();
        prop_assert!((c - split).abs() <= 1e-14, "{} vs {}", c, split);
    }

    #[test]
    fn ensemble_reproduces_covariance(energy in 0.5f64..8.0, beta in 0.0f64..4.0) {
        let (ens, cov) = optimal_ensemble(energy, beta).unwrap();
        prop_assert!((ens.delta + ens.gamma - cov.alpha_q).abs() <= 1e-12);
        prop_assert!((1.0 / (4.0 * ens.delta) - cov.alpha_p).abs() <= 1e-12);
        prop_assert!((cov.alpha_q + cov.alpha_p - 2.0 * energy).abs() <= 1e-12);
        prop_assert!(ens.gamma >= 0.0);
    }

    #[test]
    fn optimum_is_stationary(energy in 0.6f64..8.0, beta in 0.01f64..4.0) {
        // The closed form sits at the top: nearby points on the shell are lower.
        let alpha_p = optimal_alpha_p(energy, beta).unwrap();
        let c = |a: f64| alpha_constrained_capacity(&DiagonalCovariance::new(2.0 * energy - a, a).unwrap(), beta).unwrap();
        let h = 1e-3 * alpha_p;
        prop_assert!(c(alpha_p) >= c(alpha_p + h) - 1e-15);
        if (2.0 * energy - alpha_p + h) * (alpha_p - h) >= 0.25 {
            prop_assert!(c(alpha_p) >= c(alpha_p - h) - 1e-15);
        }
    }

    #[test]
    fn continuous_at_sharp_measurement(energy in 0.5f64..8.0) {
        let c = gaussian_capacity(energy, 1e-8).unwrap();
        prop_assert!((c - (2.0 * energy).ln()).abs() <= 1e-6);
    }
}
