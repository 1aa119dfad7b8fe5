//! Domain types, random waveform generation, and sparse-instance generation
//! with reproducible seeding.
//!
//! Every generator is a pure function of (parameters, seed): identical inputs
//! give bit-identical outputs regardless of thread schedule. Monte Carlo
//! trials derive independent streams from (master seed, trial index) through
//! [`trial_seed`].

use crate::error::{Error, Result};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Problem dimensions (n, m, S, delta).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemDims {
    pub n: usize,
    pub m: usize,
    pub sparsity: usize,
    pub delta: f64,
}

impl ProblemDims {
    pub fn new(n: usize, m: usize, sparsity: usize, delta: f64) -> Result<Self> {
        if sparsity < 1 || sparsity > n {
            return Err(Error::invalid(format!("sparsity {sparsity} not in 1..={n}")));
        }
        if m < 1 || m > n {
            return Err(Error::invalid(format!("m {m} not in 1..={n}")));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::invalid(format!("delta {delta} not in (0,1)")));
        }
        Ok(ProblemDims { n, m, sparsity, delta })
    }
}

/// Waveform ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Distribution {
    Gaussian,
    Bernoulli,
    BandlimitedGaussian,
}

impl std::str::FromStr for Distribution {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" => Ok(Distribution::Gaussian),
            "bernoulli" => Ok(Distribution::Bernoulli),
            "bandlimited" | "bandlimited-gaussian" => Ok(Distribution::BandlimitedGaussian),
            other => Err(Error::invalid(format!("unknown distribution '{other}'"))),
        }
    }
}

/// A white random waveform h of length n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Waveform {
    pub samples: Vec<f64>,
    pub distribution: Distribution,
    pub seed: u64,
}

impl Waveform {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Draws a waveform of the given ensemble.
    pub fn generate(dist: Distribution, n: usize, seed: u64) -> Result<Waveform> {
        match dist {
            Distribution::Gaussian => gen_gaussian_waveform(n, seed),
            Distribution::Bernoulli => gen_bernoulli_waveform(n, seed),
            Distribution::BandlimitedGaussian => gen_bandlimited_waveform(n, 4, seed),
        }
    }
}

/// i.i.d. N(0,1) samples from a deterministic stream keyed by `seed`.
pub fn gen_gaussian_waveform(n: usize, seed: u64) -> Result<Waveform> {
    if n == 0 {
        return Err(Error::invalid("waveform length must be >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    Ok(Waveform { samples, distribution: Distribution::Gaussian, seed })
}

/// i.i.d. symmetric +-1 samples, deterministic per seed.
pub fn gen_bernoulli_waveform(n: usize, seed: u64) -> Result<Waveform> {
    if n == 0 {
        return Err(Error::invalid("waveform length must be >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = (0..n)
        .map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 })
        .collect();
    Ok(Waveform { samples, distribution: Distribution::Bernoulli, seed })
}

/// Half-width of the truncated sinc kernel, in integer lags.
const SINC_LOBES: usize = 32;

/// Discretization of the continuous white waveform: Gaussian noise on a grid
/// of spacing 1/oversample, filtered with a truncated sinc kernel, sampled at
/// integer lags, then normalized to unit sample variance.
pub fn gen_bandlimited_waveform(n: usize, oversample: usize, seed: u64) -> Result<Waveform> {
    if n == 0 {
        return Err(Error::invalid("waveform length must be >= 1"));
    }
    if oversample < 2 {
        return Err(Error::invalid(format!("oversample {oversample} must be >= 2")));
    }
    let dt = 1.0 / oversample as f64;
    let half = SINC_LOBES * oversample;
    // Fine grid covers [-SINC_LOBES, n-1 + SINC_LOBES]; noise scaled so the
    // discretized integral of white noise has unit variance per unit time.
    let grid_len = (n - 1) * oversample + 2 * half + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise: Vec<f64> = (0..grid_len)
        .map(|_| rng.sample::<f64, _>(StandardNormal) * dt.sqrt())
        .collect();
    let sinc = |t: f64| {
        if t.abs() < 1e-12 {
            1.0
        } else {
            (std::f64::consts::PI * t).sin() / (std::f64::consts::PI * t)
        }
    };
    let mut samples = Vec::with_capacity(n);
    for k in 0..n {
        let center = k * oversample + half;
        let mut acc = 0.0;
        for j in center.saturating_sub(half)..=(center + half).min(grid_len - 1) {
            let t = (j as f64 - center as f64) * dt;
            acc += noise[j] * sinc(t);
        }
        samples.push(acc);
    }
    // Eq (1.5) assumes sigma^2 = 1; renormalize to unit mean square.
    let ms = samples.iter().map(|v| v * v).sum::<f64>() / n as f64;
    if ms > 0.0 {
        let scale = ms.sqrt().recip();
        for v in &mut samples {
            *v *= scale;
        }
    }
    Ok(Waveform { samples, distribution: Distribution::BandlimitedGaussian, seed })
}

/// Support set T: strictly increasing positions in [0, n).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportSet {
    indices: Vec<usize>,
}

impl SupportSet {
    pub fn new(mut indices: Vec<usize>, n: usize) -> Result<Self> {
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("support indices must be distinct"));
        }
        if indices.last().is_some_and(|&i| i >= n) {
            return Err(Error::invalid("support index out of range"));
        }
        if indices.is_empty() {
            return Err(Error::invalid("support must be non-empty"));
        }
        Ok(SupportSet { indices })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn size(&self) -> usize {
        self.indices.len()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }
}

/// Sign sequence z on a support set, values in {+1, -1}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignPattern {
    signs: Vec<f64>,
}

impl SignPattern {
    pub fn new(signs: Vec<f64>) -> Result<Self> {
        if signs.iter().any(|&s| s != 1.0 && s != -1.0) {
            return Err(Error::invalid("signs must be +1 or -1"));
        }
        Ok(SignPattern { signs })
    }

    pub fn signs(&self) -> &[f64] {
        &self.signs
    }

    pub fn len(&self) -> usize {
        self.signs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }
}

/// Magnitude law for sparse coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum MagnitudeLaw {
    Unit,
    Uniform(f64, f64),
}

/// A sparse test signal: support T, signs z, and nonzero magnitudes, sparse
/// in the basis named by `basis_id`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseInstance {
    pub n: usize,
    pub support: SupportSet,
    pub signs: SignPattern,
    pub coefficients: Vec<f64>,
    pub basis_id: String,
}

impl SparseInstance {
    pub fn sparsity(&self) -> usize {
        self.support.size()
    }

    /// Dense coefficient vector alpha_0 of length n.
    pub fn densify(&self) -> Vec<f64> {
        let mut alpha = vec![0.0; self.n];
        for ((&i, &s), &c) in self
            .support
            .indices()
            .iter()
            .zip(self.signs.signs())
            .zip(&self.coefficients)
        {
            alpha[i] = s * c;
        }
        alpha
    }

    /// Rebuilds the instance from a dense coefficient vector.
    pub fn sparsify(alpha: &[f64], basis_id: &str) -> Result<SparseInstance> {
        let mut support = Vec::new();
        let mut signs = Vec::new();
        let mut coefficients = Vec::new();
        for (i, &v) in alpha.iter().enumerate() {
            if v != 0.0 {
                support.push(i);
                signs.push(v.signum());
                coefficients.push(v.abs());
            }
        }
        Ok(SparseInstance {
            n: alpha.len(),
            support: SupportSet::new(support, alpha.len())?,
            signs: SignPattern::new(signs)?,
            coefficients,
            basis_id: basis_id.to_string(),
        })
    }
}

/// Support drawn uniformly without replacement, signs i.i.d. uniform on
/// {+-1}, magnitudes per the law.
pub fn gen_sparse_instance(
    n: usize,
    sparsity: usize,
    law: MagnitudeLaw,
    basis_id: &str,
    seed: u64,
) -> Result<SparseInstance> {
    if sparsity < 1 || sparsity > n {
        return Err(Error::invalid(format!("sparsity {sparsity} not in 1..={n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut indices: Vec<usize> = sample(&mut rng, n, sparsity).into_vec();
    indices.sort_unstable();
    let signs: Vec<f64> = (0..sparsity)
        .map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 })
        .collect();
    let coefficients: Vec<f64> = (0..sparsity)
        .map(|_| match law {
            MagnitudeLaw::Unit => 1.0,
            MagnitudeLaw::Uniform(a, b) => rng.gen_range(a..b),
        })
        .collect();
    Ok(SparseInstance {
        n,
        support: SupportSet::new(indices, n)?,
        signs: SignPattern::new(signs)?,
        coefficients,
        basis_id: basis_id.to_string(),
    })
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives an independent per-trial seed from (master seed, trial index),
/// so parallel scheduling cannot affect any trial's stream.
pub fn trial_seed(master: u64, trial: u64) -> u64 {
    splitmix64(master ^ splitmix64(trial))
}

/// ChaCha stream for one Monte Carlo trial.
pub fn trial_rng(master: u64, trial: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(trial_seed(master, trial))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn autocov(samples: &[f64], lag: usize) -> f64 {
        let n = samples.len();
        (0..n - lag).map(|i| samples[i] * samples[i + lag]).sum::<f64>() / (n - lag) as f64
    }

    #[test]
    fn gaussian_deterministic() {
        let a = gen_gaussian_waveform(1, 7).unwrap();
        let b = gen_gaussian_waveform(1, 7).unwrap();
        assert_eq!(a.samples, b.samples);
        let c = gen_gaussian_waveform(1, 8).unwrap();
        assert_ne!(a.samples, c.samples);
    }

    #[test]
    fn gaussian_moments() {
        let w = gen_gaussian_waveform(10_000, 42).unwrap();
        let mean = w.samples.iter().sum::<f64>() / 1e4;
        let var = w.samples.iter().map(|v| v * v).sum::<f64>() / 1e4 - mean * mean;
        assert!(mean.abs() < 4.0 / 100.0, "mean {mean}");
        assert!((var - 1.0).abs() < 0.1, "var {var}");
    }

    #[test]
    fn gaussian_whiteness() {
        // Eq-(1.5)-style second-order whiteness at lags 0..10.
        for seed in [1u64, 2] {
            let w = gen_gaussian_waveform(10_000, seed).unwrap();
            assert!((autocov(&w.samples, 0) - 1.0).abs() < 0.05);
            for lag in 1..=10 {
                assert!(autocov(&w.samples, lag).abs() < 0.05, "lag {lag}");
            }
        }
        let rho1 = {
            let w = gen_gaussian_waveform(10_000, 3).unwrap();
            autocov(&w.samples, 1)
        };
        assert!(rho1.abs() < 0.05);
    }

    #[test]
    fn gaussian_rejects_empty() {
        assert!(gen_gaussian_waveform(0, 1).is_err());
    }

    #[test]
    fn bernoulli_support_and_moments() {
        let w = gen_bernoulli_waveform(10_000, 9).unwrap();
        assert!(w.samples.iter().all(|&e| e == 1.0 || e == -1.0));
        let mean = w.samples.iter().sum::<f64>() / 1e4;
        assert!(mean.abs() < 4.0 / 100.0);
        let second: f64 = w.samples.iter().map(|v| v * v).sum::<f64>() / 1e4;
        assert_eq!(second, 1.0);
        for lag in 1..=10 {
            assert!(autocov(&w.samples, lag).abs() < 0.05);
        }
    }

    #[test]
    fn bandlimited_rejects_bad_oversample() {
        assert!(gen_bandlimited_waveform(16, 1, 0).is_err());
        assert!(gen_bandlimited_waveform(0, 4, 0).is_err());
    }

    #[test]
    fn bandlimited_decorrelation() {
        // Autocovariance across independent draws at a fixed pair of
        // positions; the sinc filtering should leave integer lags white.
        for oversample in [2usize, 8] {
            let trials = 10_000;
            let n = 16;
            let (mut lag0, mut lag3) = (0.0, 0.0);
            for t in 0..trials {
                let w = gen_bandlimited_waveform(n, oversample, trial_seed(100, t)).unwrap();
                lag0 += w.samples[5] * w.samples[5];
                lag3 += w.samples[5] * w.samples[8];
            }
            lag0 /= trials as f64;
            lag3 /= trials as f64;
            assert!((lag0 - 1.0).abs() < 0.05, "oversample {oversample} lag0 {lag0}");
            assert!(lag3.abs() < 0.05, "oversample {oversample} lag3 {lag3}");
        }
    }

    #[test]
    fn sparse_instance_saturated() {
        let inst = gen_sparse_instance(8, 8, MagnitudeLaw::Unit, "spikes", 5).unwrap();
        assert_eq!(inst.support.indices(), &[0, 1, 2, 3, 4, 5, 6, 7]);
        let dense = inst.densify();
        assert!(dense.iter().all(|&v| v == 1.0 || v == -1.0));
    }

    #[test]
    fn sparse_instance_counts() {
        let inst = gen_sparse_instance(64, 4, MagnitudeLaw::Unit, "spikes", 11).unwrap();
        let dense = inst.densify();
        assert_eq!(dense.iter().filter(|&&v| v != 0.0).count(), 4);
        assert!(dense.iter().filter(|&&v| v != 0.0).all(|&v| v.abs() == 1.0));
    }

    #[test]
    fn sparse_instance_rejects_oversparse() {
        assert!(gen_sparse_instance(4, 5, MagnitudeLaw::Unit, "spikes", 0).is_err());
    }

    #[test]
    fn sign_frequency() {
        let mut plus = 0usize;
        let trials = 10_000;
        for t in 0..trials {
            let inst =
                gen_sparse_instance(16, 1, MagnitudeLaw::Unit, "spikes", trial_seed(7, t as u64))
                    .unwrap();
            if inst.signs.signs()[0] > 0.0 {
                plus += 1;
            }
        }
        let freq = plus as f64 / trials as f64;
        assert!((freq - 0.5).abs() < 0.02, "freq {freq}");
    }

    #[test]
    fn sparsify_round_trip() {
        let inst = gen_sparse_instance(32, 5, MagnitudeLaw::Uniform(0.5, 2.0), "haar", 3).unwrap();
        let back = SparseInstance::sparsify(&inst.densify(), "haar").unwrap();
        assert_eq!(inst, back);
    }

    #[test]
    fn dims_validation() {
        assert!(ProblemDims::new(8, 4, 2, 0.1).is_ok());
        assert!(ProblemDims::new(8, 9, 2, 0.1).is_err());
        assert!(ProblemDims::new(8, 4, 0, 0.1).is_err());
        assert!(ProblemDims::new(8, 4, 2, 1.0).is_err());
    }

    #[test]
    fn waveform_json_round_trip() {
        let w = gen_bernoulli_waveform(16, 99).unwrap();
        let s = serde_json::to_string(&w).unwrap();
        let back: Waveform = serde_json::from_str(&s).unwrap();
        assert_eq!(w, back);
    }
}
