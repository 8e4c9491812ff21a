use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::estimate::Estimator;
use crate::gaussian_core::{optimal_ensemble, GaussianEnsembleParams};
use crate::waveform_lab::stream_rng;
use crate::{Error, Real, Result};

/// Samples drawn from one seed stream. Stream `k` of the master seed covers
/// samples `k·SAMPLE_CHUNK ..`, so any partition of the chunks over workers
/// reproduces the same sequence.
pub const SAMPLE_CHUNK: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig<T> {
    pub energy: T,
    pub beta: T,
    pub samples: usize,
    pub seed: u64,
    pub estimator: Estimator,
}

impl<T: Real> SimulationConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::param("samples", 0.0, "need at least one sample"));
        }
        // Energy and beta are checked by the ensemble construction.
        optimal_ensemble(self.energy, self.beta).map(|_| ())
    }

    pub fn ensemble(&self) -> Result<GaussianEnsembleParams<T>> {
        self.validate()?;
        Ok(optimal_ensemble(self.energy, self.beta)?.0)
    }
}

/// Transmitted displacement `x` and measured outcome `y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EncodingSample<T> {
    pub x: T,
    pub y: T,
}

pub fn chunk_count(samples: usize) -> usize {
    samples.div_ceil(SAMPLE_CHUNK)
}

/// Chunk `index` of the sample sequence: `x ~ N(0, γ)`, `y = x + η`,
/// `η ~ N(0, β + δ)`.
pub fn sample_chunk<T: Real>(
    config: &SimulationConfig<T>,
    params: &GaussianEnsembleParams<T>,
    index: usize,
) -> Vec<EncodingSample<T>>
where
    StandardNormal: Distribution<T>,
{
    let start = index * SAMPLE_CHUNK;
    let len = SAMPLE_CHUNK.min(config.samples.saturating_sub(start));
    let mut rng = stream_rng(config.seed, index as u64);
    let sx = params.gamma.sqrt();
    let sn = (config.beta + params.delta).sqrt();
    (0..len)
        .map(|_| {
            let z1: T = StandardNormal.sample(&mut rng);
            let z2: T = StandardNormal.sample(&mut rng);
            let x = sx * z1;
            EncodingSample { x, y: x + sn * z2 }
        })
        .collect()
}

/// All `config.samples` pairs, deterministic in `config.seed`.
pub fn sample_channel<T: Real>(config: &SimulationConfig<T>) -> Result<Vec<EncodingSample<T>>>
where
    StandardNormal: Distribution<T>,
{
    let params = config.ensemble()?;
    let mut out = Vec::with_capacity(config.samples);
    for index in 0..chunk_count(config.samples) {
        out.extend(sample_chunk(config, &params, index));
    }
    Ok(out)
}

/// `½ ln(1 + γ/(β + δ))`, the Shannon information of the Gaussian channel
/// `x → x + η`.
pub fn analytic_mutual_information<T: Real>(energy: T, beta: T) -> Result<T> {
    let (params, _) = optimal_ensemble(energy, beta)?;
    Ok(T::lit(0.5) * (params.gamma / (beta + params.delta)).ln_1p())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian_core::gaussian_capacity;

    fn config(energy: f64, samples: usize, seed: u64) -> SimulationConfig<f64> {
        SimulationConfig {
            energy,
            beta: 1.0,
            samples,
            seed,
            estimator: Estimator::GaussianMle,
        }
    }

    fn var(v: impl Iterator<Item = f64> + Clone) -> f64 {
        let n = v.clone().count() as f64;
        let m = v.clone().sum::<f64>() / n;
        v.map(|a| (a - m) * (a - m)).sum::<f64>() / n
    }

    #[test]
    fn vacuum_energy_sends_nothing() {
        let s = sample_channel(&config(0.5, 50_000, 3)).unwrap();
        assert!(s.iter().all(|p| p.x == 0.0));
        // β + δ = 1.5 at E = 1/2.
        assert!((var(s.iter().map(|p| p.y)) - 1.5).abs() < 0.04);
    }

    #[test]
    fn second_moments_at_unit_energy() {
        let s = sample_channel(&config(1.0, 1_000_000, 7)).unwrap();
        assert_eq!(s.len(), 1_000_000);
        assert!((var(s.iter().map(|p| p.x)) - 0.964_816_241_512_003_4).abs() < 0.004);
        assert!((var(s.iter().map(|p| p.y)) - 2.348_612_181_134_002_6).abs() < 0.01);
        assert!((var(s.iter().map(|p| p.y - p.x)) - 1.383_795_939_621_999).abs() < 0.006);
    }

    #[test]
    fn deterministic_and_chunk_stable() {
        let a = sample_channel(&config(1.0, 10_000, 11)).unwrap();
        let b = sample_channel(&config(1.0, 10_000, 11)).unwrap();
        assert_eq!(a, b);
        let longer = sample_channel(&config(1.0, 20_000, 11)).unwrap();
        assert_eq!(&longer[..10_000], &a[..]);
        let other = sample_channel(&config(1.0, 10_000, 12)).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(sample_channel(&config(0.4, 10, 1)).is_err());
        assert!(sample_channel(&config(1.0, 0, 1)).is_err());
    }

    #[test]
    fn analytic_values() {
        let c = analytic_mutual_information(1.0f64, 1.0).unwrap();
        assert!((c - 0.264_497_094_315_708_45).abs() < 1e-12);
        assert_eq!(analytic_mutual_information(0.5, 1.0).unwrap(), 0.0);
        assert!((analytic_mutual_information(1.0, 0.0).unwrap() - 2f64.ln()).abs() < 1e-12);
        for e in [0.5f64, 0.7, 1.0, 3.0, 8.0] {
            for b in [0.0, 1e-6, 0.1, 1.0, 4.0] {
                let a = analytic_mutual_information(e, b).unwrap();
                assert!((a - gaussian_capacity(e, b).unwrap()).abs() < 1e-12, "E={e} b={b}");
            }
        }
    }
}
