//! Mutual-information estimators with leave-one-out jackknife errors.
//!
//! Statistics are accumulated in `f64` regardless of the sample scalar.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::sample::EncodingSample;
use crate::{Error, Real, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Estimator {
    /// `½ ln(var̂ y / var̂(y − b̂x)) = −½ ln(1 − r²)`.
    GaussianMle,
    /// Equal-mass 2-D histogram, Miller–Madow corrected.
    HistogramPlugin,
}

impl Estimator {
    pub const ALL: [Estimator; 2] = [Estimator::GaussianMle, Estimator::HistogramPlugin];

    pub fn name(self) -> &'static str {
        match self {
            Self::GaussianMle => "gaussian-mle",
            Self::HistogramPlugin => "histogram-plugin",
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::param("estimator", f64::NAN, "expected gaussian-mle or histogram-plugin"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MiEstimate {
    pub nats: f64,
    pub standard_error: f64,
}

impl MiEstimate {
    const ZERO: Self = Self {
        nats: 0.0,
        standard_error: 0.0,
    };
}

/// Mutual information of the `(x, y)` pairs in nats, with its jackknife
/// standard error. Samples where either coordinate has zero variance give
/// `0 ± 0`.
pub fn estimate_mutual_information<T: Real>(
    samples: &[EncodingSample<T>],
    estimator: Estimator,
) -> Result<MiEstimate> {
    if samples.len() < 3 {
        return Err(Error::param(
            "samples",
            samples.len() as f64,
            "need at least 3 samples",
        ));
    }
    let xs: Vec<f64> = samples.iter().map(|s| s.x.as_f64()).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.y.as_f64()).collect();
    if xs.iter().chain(&ys).any(|v| !v.is_finite()) {
        return Err(Error::param("samples", f64::NAN, "non-finite sample"));
    }
    if is_constant(&xs) || is_constant(&ys) {
        return Ok(MiEstimate::ZERO);
    }
    Ok(match estimator {
        Estimator::GaussianMle => gaussian_mle(&xs, &ys),
        Estimator::HistogramPlugin => histogram_plugin(&xs, &ys),
    })
}

fn is_constant(v: &[f64]) -> bool {
    v.iter().all(|a| *a == v[0])
}

/// `√((n−1)/n · Σ (θ_i − θ̄)²)` from `(θ_i, multiplicity)` pairs.
fn jackknife_se(values: impl Iterator<Item = (f64, f64)> + Clone, n: f64) -> f64 {
    let mean = values.clone().map(|(v, w)| v * w).sum::<f64>() / n;
    let ss: f64 = values.map(|(v, w)| w * (v - mean) * (v - mean)).sum();
    ((n - 1.0) / n * ss).sqrt()
}

fn gaussian_mi(sxx: f64, syy: f64, sxy: f64, sx: f64, sy: f64, n: f64) -> f64 {
    let vx = sxx - sx * sx / n;
    let vy = syy - sy * sy / n;
    let cxy = sxy - sx * sy / n;
    let r2 = (cxy * cxy / (vx * vy)).min(1.0);
    -0.5 * (-r2).ln_1p()
}

fn gaussian_mle(xs: &[f64], ys: &[f64]) -> MiEstimate {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    // Deviations from the full-sample means keep the updates well conditioned.
    let (mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sx += dx;
        sy += dy;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    let nats = gaussian_mi(sxx, syy, sxy, sx, sy, n);
    let loo = xs.iter().zip(ys).map(|(x, y)| {
        let (dx, dy) = (x - mx, y - my);
        let v = gaussian_mi(
            sxx - dx * dx,
            syy - dy * dy,
            sxy - dx * dy,
            sx - dx,
            sy - dy,
            n - 1.0,
        );
        (v, 1.0)
    });
    MiEstimate {
        nats,
        standard_error: jackknife_se(loo, n),
    }
}

/// Bins per axis for `n` samples: `⌈2·n^{1/3}⌉`.
pub fn histogram_bins(n: usize) -> usize {
    (2.0 * (n as f64).cbrt()).ceil().max(2.0) as usize
}

/// Equal-mass bin labels: rank `r` goes to bin `⌊r·B/n⌋`. Ties are split by
/// sample index.
fn rank_bins(v: &[f64], bins: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_unstable_by(|&a, &b| v[a].total_cmp(&v[b]).then(a.cmp(&b)));
    let mut out = vec![0; v.len()];
    for (rank, &i) in order.iter().enumerate() {
        out[i] = rank * bins / v.len();
    }
    out
}

fn xlogx(c: f64) -> f64 {
    if c > 0.0 {
        c * c.ln()
    } else {
        0.0
    }
}

/// Miller–Madow entropy from `Σ c ln c`, the occupied-cell count and `n`.
fn miller_madow(sum_clnc: f64, occupied: f64, n: f64) -> f64 {
    n.ln() - sum_clnc / n + (occupied - 1.0) / (2.0 * n)
}

#[derive(Debug, Clone, Copy)]
struct EntropyStats {
    sum_clnc: f64,
    occupied: f64,
}

impl EntropyStats {
    fn from_counts(counts: &[u64]) -> Self {
        Self {
            sum_clnc: counts.iter().map(|&c| xlogx(c as f64)).sum(),
            occupied: counts.iter().filter(|&&c| c > 0).count() as f64,
        }
    }

    fn entropy(&self, n: f64) -> f64 {
        miller_madow(self.sum_clnc, self.occupied, n)
    }

    /// Entropy after removing one sample from a cell holding `c`.
    fn entropy_without(&self, c: u64, n: f64) -> f64 {
        let c = c as f64;
        let sum = self.sum_clnc - xlogx(c) + xlogx(c - 1.0);
        let occupied = self.occupied - if c == 1.0 { 1.0 } else { 0.0 };
        miller_madow(sum, occupied, n - 1.0)
    }
}

fn histogram_plugin(xs: &[f64], ys: &[f64]) -> MiEstimate {
    let n = xs.len();
    let nf = n as f64;
    let bins = histogram_bins(n);
    let bx = rank_bins(xs, bins);
    let by = rank_bins(ys, bins);
    let mut cx = vec![0u64; bins];
    let mut cy = vec![0u64; bins];
    let mut cxy = vec![0u64; bins * bins];
    for (a, b) in bx.iter().zip(&by) {
        cx[*a] += 1;
        cy[*b] += 1;
        cxy[a * bins + b] += 1;
    }
    let hx = EntropyStats::from_counts(&cx);
    let hy = EntropyStats::from_counts(&cy);
    let hxy = EntropyStats::from_counts(&cxy);
    let nats = hx.entropy(nf) + hy.entropy(nf) - hxy.entropy(nf);

    // Every sample in a joint cell has the same leave-one-out value.
    let loo = cxy.iter().enumerate().filter(|(_, c)| **c > 0).map(|(k, &c)| {
        let (a, b) = (k / bins, k % bins);
        let v = hx.entropy_without(cx[a], nf) + hy.entropy_without(cy[b], nf)
            - hxy.entropy_without(c, nf);
        (v, c as f64)
    });
    MiEstimate {
        nats,
        standard_error: jackknife_se(loo, nf),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble_sim::{sample_channel, SimulationConfig};
    use crate::waveform_lab::stream_rng;
    use rand::seq::SliceRandom;

    fn samples(energy: f64, n: usize, seed: u64) -> Vec<EncodingSample<f64>> {
        sample_channel(&SimulationConfig {
            energy,
            beta: 1.0,
            samples: n,
            seed,
            estimator: Estimator::GaussianMle,
        })
        .unwrap()
    }

    /// Brute-force leave-one-out for a small sample (MLE only: the histogram
    /// path keeps the full-sample bin edges).
    fn naive_jackknife(s: &[EncodingSample<f64>], est: Estimator) -> f64 {
        let n = s.len();
        let vals: Vec<f64> = (0..n)
            .map(|i| {
                let rest: Vec<_> = s.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, p)| *p).collect();
                estimate_mutual_information(&rest, est).unwrap().nats
            })
            .collect();
        jackknife_se(vals.iter().map(|v| (*v, 1.0)), n as f64)
    }

    #[test]
    fn estimator_names_round_trip() {
        for e in Estimator::ALL {
            assert_eq!(e.name().parse::<Estimator>().unwrap(), e);
            assert_eq!(serde_json::to_string(&e).unwrap(), format!("\"{}\"", e.name()));
        }
        assert!("knn".parse::<Estimator>().is_err());
    }

    #[test]
    fn mle_jackknife_matches_brute_force() {
        let s = samples(1.0, 400, 5);
        let fast = estimate_mutual_information(&s, Estimator::GaussianMle).unwrap();
        let slow = naive_jackknife(&s, Estimator::GaussianMle);
        assert!((fast.standard_error - slow).abs() < 1e-9 * slow.max(1.0));
    }

    #[test]
    fn histogram_loo_update_matches_recount() {
        let counts = [3u64, 1, 0, 7];
        let stats = EntropyStats::from_counts(&counts);
        for (k, &c) in counts.iter().enumerate().filter(|(_, c)| **c > 0) {
            let mut fewer = counts;
            fewer[k] -= 1;
            let direct = EntropyStats::from_counts(&fewer).entropy(10.0);
            assert!((stats.entropy_without(c, 11.0) - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn both_estimators_recover_capacity() {
        let s = samples(1.0, 1_000_000, 7);
        let truth = 0.264_497_094_315_708_45;
        let mut found = vec![];
        for e in Estimator::ALL {
            let m = estimate_mutual_information(&s, e).unwrap();
            assert!((m.nats - truth).abs() <= 3.0 * m.standard_error, "{e}: {m:?}");
            assert!(m.standard_error > 1e-4 && m.standard_error < 2e-3, "{e}: {m:?}");
            found.push(m);
        }
        let combined = (found[0].standard_error.powi(2) + found[1].standard_error.powi(2)).sqrt();
        assert!((found[0].nats - found[1].nats).abs() <= 3.0 * combined);
    }

    #[test]
    fn independence_gives_zero() {
        let mut s = samples(1.0, 100_000, 9);
        let mut ys: Vec<f64> = s.iter().map(|p| p.y).collect();
        ys.shuffle(&mut stream_rng(1, 0));
        for (p, y) in s.iter_mut().zip(ys) {
            p.y = y;
        }
        for e in Estimator::ALL {
            let m = estimate_mutual_information(&s, e).unwrap();
            assert!(m.nats.abs() <= 4.0 * m.standard_error + 1e-4, "{e}: {m:?}");
        }
    }

    #[test]
    fn degenerate_samples() {
        let s = samples(0.5, 20_000, 2);
        for e in Estimator::ALL {
            assert_eq!(estimate_mutual_information(&s, e).unwrap(), MiEstimate::ZERO);
        }
        assert!(estimate_mutual_information(&s[..2], Estimator::GaussianMle).is_err());
    }

    #[test]
    fn standard_error_halves_when_n_quadruples() {
        for e in Estimator::ALL {
            let small = estimate_mutual_information(&samples(1.0, 50_000, 21), e).unwrap();
            let large = estimate_mutual_information(&samples(1.0, 200_000, 21), e).unwrap();
            let ratio = large.standard_error / small.standard_error;
            assert!((ratio - 0.5).abs() <= 0.1, "{e}: ratio {ratio}");
        }
    }
}
