//! Orthonormal sparsity bases Psi with fast synthesis/analysis, and the
//! Fourier-coherence functional mu(F, Psi).
//!
//! All four bases are real orthonormal transforms applied in O(n log n):
//! spikes (identity), dyadic Haar wavelets, DCT-II, and the orthonormal real
//! Fourier basis (cosine/sine atoms). The coherence scan is exact: it walks
//! every column of F*Psi via the fast DFT rather than estimating.

use crate::error::{Error, Result};
use crate::fft::Dft;
use serde::{Deserialize, Serialize};

/// Coherence scan guard: n applications of an n-point DFT.
const COHERENCE_GUARD: usize = 65_536;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BasisId {
    Spikes,
    Haar,
    Dct,
    FourierReal,
}

impl BasisId {
    pub fn name(&self) -> &'static str {
        match self {
            BasisId::Spikes => "spikes",
            BasisId::Haar => "haar",
            BasisId::Dct => "dct",
            BasisId::FourierReal => "fourier-real",
        }
    }
}

impl std::str::FromStr for BasisId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "spikes" | "identity" => Ok(BasisId::Spikes),
            "haar" => Ok(BasisId::Haar),
            "dct" => Ok(BasisId::Dct),
            "fourier-real" | "fourier" => Ok(BasisId::FourierReal),
            other => Err(Error::invalid(format!("unknown basis '{other}'"))),
        }
    }
}

/// Mutual coherence mu(F, Psi) with F the unnormalized DFT.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherenceValue {
    pub mu: f64,
    pub basis_id: BasisId,
    pub n: usize,
}

/// An orthonormal synthesis transform of fixed dimension.
#[derive(Debug, Clone)]
pub struct Orthobasis {
    id: BasisId,
    n: usize,
    // 4n-point plan for the DCT, n-point plan for the real Fourier basis.
    dft: Option<Dft>,
}

impl Orthobasis {
    pub fn new(id: BasisId, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("basis dimension must be >= 1"));
        }
        match id {
            BasisId::Haar => {
                if !n.is_power_of_two() {
                    return Err(Error::invalid(format!(
                        "haar basis needs a power-of-two dimension, got {n}"
                    )));
                }
                Ok(Orthobasis { id, n, dft: None })
            }
            BasisId::Spikes => Ok(Orthobasis { id, n, dft: None }),
            BasisId::Dct => Ok(Orthobasis { id, n, dft: Some(Dft::new(4 * n)) }),
            BasisId::FourierReal => {
                if n % 2 != 0 {
                    return Err(Error::invalid(format!(
                        "fourier-real basis needs an even dimension, got {n}"
                    )));
                }
                Ok(Orthobasis { id, n, dft: Some(Dft::new(n)) })
            }
        }
    }

    pub fn id(&self) -> BasisId {
        self.id
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// x = Psi alpha.
    pub fn synthesize(&self, alpha: &[f64]) -> Result<Vec<f64>> {
        self.check_len(alpha)?;
        Ok(match self.id {
            BasisId::Spikes => alpha.to_vec(),
            BasisId::Haar => haar_synthesize(alpha),
            BasisId::Dct => dct3(self.dft.as_ref().unwrap(), alpha),
            BasisId::FourierReal => fourier_real_synthesize(self.dft.as_ref().unwrap(), alpha),
        })
    }

    /// alpha = Psi^T x.
    pub fn analyze(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_len(x)?;
        Ok(match self.id {
            BasisId::Spikes => x.to_vec(),
            BasisId::Haar => haar_analyze(x),
            BasisId::Dct => dct2(self.dft.as_ref().unwrap(), x),
            BasisId::FourierReal => fourier_real_analyze(self.dft.as_ref().unwrap(), x),
        })
    }

    /// Basis atom psi_t.
    pub fn atom(&self, t: usize) -> Result<Vec<f64>> {
        let mut e = vec![0.0; self.n];
        e[t] = 1.0;
        self.synthesize(&e)
    }

    /// mu(F, Psi) = max |(F Psi)_jk|, scanned exactly column by column.
    pub fn coherence(&self) -> Result<CoherenceValue> {
        if self.n > COHERENCE_GUARD {
            return Err(Error::invalid(format!(
                "coherence scan limited to n <= {COHERENCE_GUARD}"
            )));
        }
        // Spike atoms are delta functions: every DFT entry has unit modulus,
        // so the scan would only accumulate FFT rounding.
        if self.id == BasisId::Spikes {
            return Ok(CoherenceValue { mu: 1.0, basis_id: self.id, n: self.n });
        }
        let dft = Dft::new(self.n);
        let mut mu: f64 = 0.0;
        for t in 0..self.n {
            let atom = self.atom(t)?;
            for c in dft.forward_real(&atom) {
                mu = mu.max(c.norm());
            }
        }
        // Parseval pins mu to [1, sqrt(n)] for any orthobasis; the scan can
        // overshoot the boundary by a few ulps (Haar's constant atom does).
        mu = mu.clamp(1.0, (self.n as f64).sqrt());
        Ok(CoherenceValue { mu, basis_id: self.id, n: self.n })
    }

    fn check_len(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.n {
            return Err(Error::invalid(format!(
                "expected vector of length {}, got {}",
                self.n,
                v.len()
            )));
        }
        Ok(())
    }
}

fn haar_analyze(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut c = x.to_vec();
    let mut scratch = vec![0.0; n];
    let mut len = n;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    while len > 1 {
        let half = len / 2;
        for i in 0..half {
            scratch[i] = (c[2 * i] + c[2 * i + 1]) * s;
            scratch[half + i] = (c[2 * i] - c[2 * i + 1]) * s;
        }
        c[..len].copy_from_slice(&scratch[..len]);
        len = half;
    }
    c
}

fn haar_synthesize(alpha: &[f64]) -> Vec<f64> {
    let n = alpha.len();
    let mut c = alpha.to_vec();
    let mut scratch = vec![0.0; n];
    let mut len = 1;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    while len < n {
        for i in 0..len {
            scratch[2 * i] = (c[i] + c[len + i]) * s;
            scratch[2 * i + 1] = (c[i] - c[len + i]) * s;
        }
        c[..2 * len].copy_from_slice(&scratch[..2 * len]);
        len *= 2;
    }
    c
}

/// Orthonormal DCT-II through a 4n-point DFT of the odd-sample symmetric
/// extension.
fn dct2(dft: &Dft, x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut buf = vec![num_complex::Complex64::new(0.0, 0.0); 4 * n];
    for (j, &v) in x.iter().enumerate() {
        buf[2 * j + 1].re = v;
        buf[4 * n - 2 * j - 1].re = v;
    }
    dft.forward(&mut buf);
    let s0 = (1.0 / n as f64).sqrt();
    let sk = (2.0 / n as f64).sqrt();
    (0..n)
        .map(|k| buf[k].re * 0.5 * if k == 0 { s0 } else { sk })
        .collect()
}

/// Orthonormal DCT-III (inverse of `dct2`) through the same 4n-point DFT.
fn dct3(dft: &Dft, alpha: &[f64]) -> Vec<f64> {
    let n = alpha.len();
    let s0 = (1.0 / n as f64).sqrt();
    let sk = (2.0 / n as f64).sqrt();
    let mut buf = vec![num_complex::Complex64::new(0.0, 0.0); 4 * n];
    buf[0].re = s0 * alpha[0];
    for k in 1..n {
        let v = 0.5 * sk * alpha[k];
        buf[k].re = v;
        buf[4 * n - k].re = v;
    }
    dft.forward(&mut buf);
    (0..n).map(|j| buf[2 * j + 1].re).collect()
}

/// Coefficient layout for the real Fourier basis: [dc, cos_1, sin_1, cos_2,
/// sin_2, ..., nyquist]. Atoms: 1/sqrt(n), sqrt(2/n) cos(2 pi k t / n),
/// sqrt(2/n) sin(2 pi k t / n), (-1)^t / sqrt(n).
fn fourier_real_analyze(dft: &Dft, x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let spec = dft.forward_real(x);
    let rn = (n as f64).sqrt();
    let r2n = (2.0 / n as f64).sqrt();
    let mut alpha = vec![0.0; n];
    alpha[0] = spec[0].re / rn;
    for k in 1..n / 2 {
        alpha[2 * k - 1] = spec[k].re * r2n;
        alpha[2 * k] = -spec[k].im * r2n;
    }
    alpha[n - 1] = spec[n / 2].re / rn;
    alpha
}

fn fourier_real_synthesize(dft: &Dft, alpha: &[f64]) -> Vec<f64> {
    let n = alpha.len();
    let rn = (n as f64).sqrt();
    let mut buf = vec![num_complex::Complex64::new(0.0, 0.0); n];
    buf[0].re = alpha[0] * rn;
    let half = rn / (2.0f64).sqrt();
    for k in 1..n / 2 {
        let c = num_complex::Complex64::new(alpha[2 * k - 1], -alpha[2 * k]) * half;
        buf[k] = c;
        buf[n - k] = c.conj();
    }
    buf[n / 2].re = alpha[n - 1] * rn;
    // Conjugate-symmetric spectrum: the inverse DFT is real by construction.
    dft.inverse(&mut buf);
    buf.iter().map(|c| c.re).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{gen_gaussian_waveform, trial_seed};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    const BASES: [BasisId; 4] = [BasisId::Spikes, BasisId::Haar, BasisId::Dct, BasisId::FourierReal];

    fn norm(v: &[f64]) -> f64 {
        v.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    #[test]
    fn spikes_is_identity() {
        let b = Orthobasis::new(BasisId::Spikes, 8).unwrap();
        let x: Vec<f64> = (0..8).map(|i| i as f64).collect();
        assert_eq!(b.synthesize(&x).unwrap(), x);
        assert_eq!(b.analyze(&x).unwrap(), x);
    }

    #[test]
    fn zero_maps_to_zero() {
        for id in BASES {
            let b = Orthobasis::new(id, 16).unwrap();
            assert!(b.synthesize(&[0.0; 16]).unwrap().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn haar_first_atom_is_constant() {
        let b = Orthobasis::new(BasisId::Haar, 8).unwrap();
        let atom = b.atom(0).unwrap();
        let expect = 1.0 / (8.0f64).sqrt();
        for v in atom {
            assert!((v - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn haar_requires_power_of_two() {
        assert!(Orthobasis::new(BasisId::Haar, 12).is_err());
        assert!(Orthobasis::new(BasisId::Haar, 16).is_ok());
    }

    #[test]
    fn round_trip_and_parseval() {
        for id in BASES {
            let b = Orthobasis::new(id, 64).unwrap();
            for t in 0..100u64 {
                let x = gen_gaussian_waveform(64, trial_seed(50, t)).unwrap().samples;
                let alpha = b.analyze(&x).unwrap();
                assert!((norm(&alpha) - norm(&x)).abs() < 1e-10, "{id:?} parseval");
                let back = b.synthesize(&alpha).unwrap();
                let err = x
                    .iter()
                    .zip(&back)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                assert!(err < 1e-10, "{id:?} round trip err {err}");
            }
        }
    }

    #[test]
    fn dense_orthonormality() {
        for id in BASES {
            for n in [8usize, 64, 256] {
                let b = Orthobasis::new(id, n).unwrap();
                let atoms: Vec<Vec<f64>> = (0..n).map(|t| b.atom(t).unwrap()).collect();
                for i in 0..n {
                    for j in i..n {
                        let dot: f64 = atoms[i].iter().zip(&atoms[j]).map(|(a, b)| a * b).sum();
                        let expect = if i == j { 1.0 } else { 0.0 };
                        assert!(
                            (dot - expect).abs() < 1e-10,
                            "{id:?} n={n} <{i},{j}> = {dot}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn dct_matches_direct_formula() {
        let n = 16;
        let b = Orthobasis::new(BasisId::Dct, n).unwrap();
        let x = gen_gaussian_waveform(n, 3).unwrap().samples;
        let alpha = b.analyze(&x).unwrap();
        for k in 0..n {
            let s = if k == 0 { (1.0 / n as f64).sqrt() } else { (2.0 / n as f64).sqrt() };
            let direct: f64 = (0..n)
                .map(|j| x[j] * (PI * k as f64 * (2 * j + 1) as f64 / (2.0 * n as f64)).cos())
                .sum::<f64>()
                * s;
            assert!((alpha[k] - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn coherence_trivial_spikes() {
        for n in [8usize, 64, 256] {
            let mu = Orthobasis::new(BasisId::Spikes, n).unwrap().coherence().unwrap();
            assert!((mu.mu - 1.0).abs() < 1e-12, "n={n} mu={}", mu.mu);
        }
    }

    #[test]
    fn coherence_fourier_is_sqrt_n() {
        let mu = Orthobasis::new(BasisId::FourierReal, 16).unwrap().coherence().unwrap();
        assert!((mu.mu - 4.0).abs() < 1e-10, "mu={}", mu.mu);
    }

    #[test]
    fn coherence_bounds_and_ordering() {
        for n in [8usize, 64] {
            let rn = (n as f64).sqrt();
            let mut mus = std::collections::HashMap::new();
            for id in BASES {
                let mu = Orthobasis::new(id, n).unwrap().coherence().unwrap().mu;
                assert!(mu >= 1.0 - 1e-10 && mu <= rn + 1e-10, "{id:?} n={n} mu={mu}");
                mus.insert(id.name(), mu);
            }
            assert!(mus["spikes"] <= mus["haar"] + 1e-12);
            assert!(mus["haar"] <= mus["fourier-real"] + 1e-12);
            // the constant scaling atom puts mu(haar) at sqrt(n) exactly
            assert!(mus["haar"] > 1.0 && mus["haar"] <= rn + 1e-12);
        }
    }

    #[test]
    fn dimension_mismatch() {
        let b = Orthobasis::new(BasisId::Haar, 8).unwrap();
        assert!(b.synthesize(&[0.0; 7]).is_err());
        assert!(b.analyze(&[0.0; 9]).is_err());
    }

    proptest! {
        #[test]
        fn prop_round_trip(seed in 0u64..200, id in 0usize..4) {
            let b = Orthobasis::new(BASES[id], 32).unwrap();
            let x = gen_gaussian_waveform(32, seed).unwrap().samples;
            let back = b.synthesize(&b.analyze(&x).unwrap()).unwrap();
            for (a, v) in x.iter().zip(&back) {
                prop_assert!((a - v).abs() < 1e-10);
            }
        }
    }
}
