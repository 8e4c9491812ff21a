use homodyne_core::ensemble_sim::{
    analytic_mutual_information, estimate_mutual_information, sample_channel, Estimator,
    SimulationConfig,
};
use homodyne_core::gaussian_core::gaussian_capacity;

fn config(seed: u64, samples: usize) -> SimulationConfig<f64> {
    SimulationConfig {
        energy: 1.0,
        beta: 1.0,
        samples,
        seed,
        estimator: Estimator::GaussianMle,
    }
}

#[test]
fn information_equals_capacity_on_grid() {
    for i in 0..=15 {
        let energy = 0.5 + 7.5 * i as f64 / 15.0;
        for j in 0..=8 {
            let beta = 0.5 * j as f64;
            let mi = analytic_mutual_information(energy, beta).unwrap();
            let c = gaussian_capacity(energy, beta).unwrap();
            assert!((mi - c).abs() <= 1e-12, "E={energy} beta={beta}: {mi} vs {c}");
        }
    }
}

#[test]
fn three_se_coverage_over_seeds() {
    let analytic = analytic_mutual_information(1.0, 1.0).unwrap();
    let mut inside = [0usize; 2];
    for seed in 0..100 {
        let samples = sample_channel(&config(1000 + seed, 100_000)).unwrap();
        for (k, estimator) in Estimator::ALL.into_iter().enumerate() {
            let e = estimate_mutual_information(&samples, estimator).unwrap();
            if (e.nats - analytic).abs() <= 3.0 * e.standard_error {
                inside[k] += 1;
            }
        }
    }
    assert!(inside.iter().all(|&n| n >= 99), "{inside:?}");
}

#[test]
fn conditional_variance_is_channel_noise() {
    let samples = sample_channel(&config(3, 400_000)).unwrap();
    let (ens, cov) = homodyne_core::gaussian_core::optimal_ensemble(1.0, 1.0).unwrap();
    let n = samples.len() as f64;
    let noise = samples.iter().map(|s| (s.y - s.x).powi(2)).sum::<f64>() / n;
    let y2 = samples.iter().map(|s| s.y * s.y).sum::<f64>() / n;
    assert!((noise / (1.0 + ens.delta) - 1.0).abs() < 0.01);
    assert!((y2 / (cov.alpha_q + 1.0) - 1.0).abs() < 0.01);
}
