//! The circulant sensing operator H^Omega: fast forward and adjoint
//! application through the DFT, subsampling schemes, the circulant
//! spectral-norm identity, and dense small-n oracles for verification.
//!
//! Row arrangement follows the form whose first row is h itself, so row k
//! (0-based) has entries H[k][j] = h[(j - k) mod n]. Applying H is then a
//! circular correlation with h and applying H^T is a circular convolution,
//! both diagonal in the Fourier domain.

use crate::error::{Error, Result};
use crate::fft::{take_real, Dft};
use crate::signal::Waveform;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Imaginary residue threshold when mapping DFT output back to reals.
const IMAG_TOL: f64 = 1e-10;

/// Dense-oracle size guard.
const DENSE_GUARD: usize = 4096;

/// Subsampling scheme for the fixed measurement locations Omega.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SubsampleScheme {
    EqualInterval,
    ExplicitFixed,
}

/// The fixed measurement rows Omega, strictly increasing in [0, n).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsampleSet {
    indices: Vec<usize>,
    scheme: SubsampleScheme,
    n: usize,
}

impl SubsampleSet {
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn scheme(&self) -> SubsampleScheme {
        self.scheme
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn signal_len(&self) -> usize {
        self.n
    }

    /// Row spacing when the scheme is equal-interval.
    pub fn stride(&self) -> Option<usize> {
        match self.scheme {
            SubsampleScheme::EqualInterval => Some(self.n / self.indices.len()),
            SubsampleScheme::ExplicitFixed => None,
        }
    }
}

/// Builds a validated subsample set. EqualInterval requires n mod m = 0 and
/// yields {0, n/m, 2n/m, ...}; ExplicitFixed takes the given rows.
pub fn make_subsample_set(
    n: usize,
    m: usize,
    scheme: SubsampleScheme,
    explicit_indices: Option<Vec<usize>>,
) -> Result<SubsampleSet> {
    if m == 0 || m > n {
        return Err(Error::invalid(format!("m {m} not in 1..={n}")));
    }
    match scheme {
        SubsampleScheme::EqualInterval => {
            if n % m != 0 {
                return Err(Error::invalid(format!(
                    "equal-interval subsampling needs n mod m = 0, got n={n}, m={m}"
                )));
            }
            let step = n / m;
            Ok(SubsampleSet {
                indices: (0..m).map(|i| i * step).collect(),
                scheme,
                n,
            })
        }
        SubsampleScheme::ExplicitFixed => {
            let mut indices = explicit_indices
                .ok_or_else(|| Error::invalid("explicit scheme needs indices"))?;
            indices.sort_unstable();
            if indices.len() != m {
                return Err(Error::invalid(format!(
                    "expected {m} explicit indices, got {}",
                    indices.len()
                )));
            }
            if indices.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::invalid("duplicate subsample indices"));
            }
            if indices.last().is_some_and(|&i| i >= n) {
                return Err(Error::invalid("subsample index out of range"));
            }
            Ok(SubsampleSet { indices, scheme, n })
        }
    }
}

/// Applies the full circulant matrix H built from h (first row = h) to x,
/// via the DFT in O(n log n).
pub fn circular_convolve(h: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    if h.len() != x.len() || h.is_empty() {
        return Err(Error::invalid(format!(
            "length mismatch: |h|={}, |x|={}",
            h.len(),
            x.len()
        )));
    }
    let dft = Dft::new(h.len());
    let spectrum = dft.forward_real(h);
    apply_full(&dft, &spectrum, x, true)
}

/// Pointwise spectral multiply; `correlate` selects conj(spectrum) (the H
/// direction) versus spectrum (the H^T direction).
fn apply_full(dft: &Dft, spectrum: &[Complex64], x: &[f64], correlate: bool) -> Result<Vec<f64>> {
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    dft.forward(&mut buf);
    for (b, s) in buf.iter_mut().zip(spectrum) {
        *b *= if correlate { s.conj() } else { *s };
    }
    dft.inverse(&mut buf);
    let scale = x.iter().map(|v| v.abs()).fold(1.0, f64::max);
    take_real(&buf, IMAG_TOL * scale * x.len() as f64)
        .ok_or_else(|| Error::numerical("imaginary residue above threshold"))
}

/// Dense H for tests and small-n verification; row k is h cyclically
/// shifted so that H[k][j] = h[(j - k) mod n].
pub fn build_dense_h(h: &[f64]) -> Result<Vec<Vec<f64>>> {
    let n = h.len();
    if n == 0 || n > DENSE_GUARD {
        return Err(Error::invalid(format!(
            "dense oracle limited to 1..={DENSE_GUARD}, got {n}"
        )));
    }
    Ok((0..n)
        .map(|k| (0..n).map(|j| h[(j + n - k) % n]).collect())
        .collect())
}

/// The fast sensing operator H^Omega with cached spectrum.
///
/// Immutable after construction; forward/adjoint applications allocate
/// per-call scratch and need no synchronization.
#[derive(Debug, Clone)]
pub struct SensingOperator {
    waveform: Waveform,
    omega: SubsampleSet,
    spectrum: Vec<Complex64>,
    dft: Dft,
}

impl SensingOperator {
    pub fn new(waveform: Waveform, omega: SubsampleSet) -> Result<Self> {
        let n = waveform.len();
        if omega.signal_len() != n {
            return Err(Error::invalid(format!(
                "subsample set built for n={}, waveform has n={n}",
                omega.signal_len()
            )));
        }
        let dft = Dft::new(n);
        let spectrum = dft.forward_real(&waveform.samples);
        Ok(SensingOperator { waveform, omega, spectrum, dft })
    }

    pub fn signal_len(&self) -> usize {
        self.waveform.len()
    }

    pub fn measurement_len(&self) -> usize {
        self.omega.len()
    }

    pub fn waveform(&self) -> &Waveform {
        &self.waveform
    }

    pub fn omega(&self) -> &SubsampleSet {
        &self.omega
    }

    pub fn spectrum(&self) -> &[Complex64] {
        &self.spectrum
    }

    /// y = H^Omega x: circular correlation with h, rows kept at Omega.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.signal_len() {
            return Err(Error::invalid(format!(
                "expected signal of length {}, got {}",
                self.signal_len(),
                x.len()
            )));
        }
        let full = apply_full(&self.dft, &self.spectrum, x, true)?;
        Ok(self.omega.indices().iter().map(|&i| full[i]).collect())
    }

    /// (H^Omega)^T y: zero-fill at Omega, then circular convolution with h.
    pub fn apply_adjoint(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.measurement_len() {
            return Err(Error::invalid(format!(
                "expected measurements of length {}, got {}",
                self.measurement_len(),
                y.len()
            )));
        }
        let mut full = vec![0.0; self.signal_len()];
        for (&i, &v) in self.omega.indices().iter().zip(y) {
            full[i] = v;
        }
        apply_full(&self.dft, &self.spectrum, &full, false)
    }

    /// Dense H^Omega for oracle comparisons at small n.
    pub fn dense(&self) -> Result<Vec<Vec<f64>>> {
        let h = build_dense_h(&self.waveform.samples)?;
        Ok(self.omega.indices().iter().map(|&i| h[i].clone()).collect())
    }
}

/// Operator norm of the circulant matrix built from l: the largest DFT
/// amplitude ||F l||_inf.
pub fn circulant_operator_norm(l: &[f64]) -> Result<f64> {
    if l.is_empty() {
        return Err(Error::invalid("empty vector"));
    }
    let dft = Dft::new(l.len());
    Ok(dft
        .forward_real(l)
        .iter()
        .map(|c| c.norm())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{gen_gaussian_waveform, trial_seed};
    use proptest::prelude::*;

    fn mat_vec(mat: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
        mat.iter()
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    fn delta0(n: usize) -> Vec<f64> {
        let mut h = vec![0.0; n];
        h[0] = 1.0;
        h
    }

    #[test]
    fn identity_kernel() {
        let x: Vec<f64> = (0..16).map(|i| i as f64 - 3.5).collect();
        let y = circular_convolve(&delta0(16), &x).unwrap();
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn averaging_kernel() {
        let x = vec![1.0, -2.0, 3.5, 0.25];
        let total: f64 = x.iter().sum();
        let y = circular_convolve(&[1.0; 4], &x).unwrap();
        for v in y {
            assert!((v - total).abs() < 1e-12);
        }
    }

    #[test]
    fn convolve_length_mismatch() {
        assert!(circular_convolve(&[1.0, 2.0], &[1.0]).is_err());
    }

    #[test]
    fn dense_h_pattern_n3() {
        let h = vec![1.0, 2.0, 3.0]; // [a, b, c]
        let dense = build_dense_h(&h).unwrap();
        assert_eq!(dense[0], vec![1.0, 2.0, 3.0]);
        assert_eq!(dense[1], vec![3.0, 1.0, 2.0]);
        assert_eq!(dense[2], vec![2.0, 3.0, 1.0]);
    }

    #[test]
    fn dense_h_identity_and_guard() {
        let dense = build_dense_h(&delta0(4)).unwrap();
        for (k, row) in dense.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                assert_eq!(v, if j == k { 1.0 } else { 0.0 });
            }
        }
        assert!(build_dense_h(&vec![0.0; 5000]).is_err());
    }

    #[test]
    fn dense_h_shift_structure() {
        let h = gen_gaussian_waveform(8, 21).unwrap();
        let dense = build_dense_h(&h.samples).unwrap();
        for k in 0..7 {
            for j in 0..8 {
                assert_eq!(dense[k + 1][(j + 1) % 8], dense[k][j]);
            }
        }
        // H H^T has constant diagonal sum(h_i^2).
        let energy: f64 = h.samples.iter().map(|v| v * v).sum();
        for k in 0..8 {
            let diag: f64 = dense[k].iter().map(|v| v * v).sum();
            assert!((diag - energy).abs() < 1e-12);
        }
    }

    #[test]
    fn fast_matches_dense_small_n() {
        let h = gen_gaussian_waveform(16, 5).unwrap();
        let x = gen_gaussian_waveform(16, 6).unwrap();
        let fast = circular_convolve(&h.samples, &x.samples).unwrap();
        let dense = mat_vec(&build_dense_h(&h.samples).unwrap(), &x.samples);
        for (a, b) in fast.iter().zip(&dense) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn subsample_sets() {
        let s = make_subsample_set(8, 4, SubsampleScheme::EqualInterval, None).unwrap();
        assert_eq!(s.indices(), &[0, 2, 4, 6]);
        assert_eq!(s.stride(), Some(2));
        assert!(make_subsample_set(8, 3, SubsampleScheme::EqualInterval, None).is_err());
        let e =
            make_subsample_set(8, 3, SubsampleScheme::ExplicitFixed, Some(vec![1, 5, 6])).unwrap();
        assert_eq!(e.indices(), &[1, 5, 6]);
        assert!(
            make_subsample_set(8, 3, SubsampleScheme::ExplicitFixed, Some(vec![1, 1, 6])).is_err()
        );
        assert!(
            make_subsample_set(8, 3, SubsampleScheme::ExplicitFixed, Some(vec![1, 5, 8])).is_err()
        );
    }

    #[test]
    fn sensing_identity_cases() {
        let n = 8;
        let h = Waveform {
            samples: delta0(n),
            distribution: crate::signal::Distribution::Gaussian,
            seed: 0,
        };
        let all = make_subsample_set(n, n, SubsampleScheme::EqualInterval, None).unwrap();
        let op = SensingOperator::new(h.clone(), all).unwrap();
        let x: Vec<f64> = (0..n).map(|i| (i as f64).cos()).collect();
        let y = op.apply(&x).unwrap();
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).abs() < 1e-12);
        }
        // adjoint = identity too
        let back = op.apply_adjoint(&y).unwrap();
        for (a, b) in x.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12);
        }
        // half-rate subsampling of the identity picks even samples
        let half = make_subsample_set(n, n / 2, SubsampleScheme::EqualInterval, None).unwrap();
        let op = SensingOperator::new(h, half).unwrap();
        let y = op.apply(&x).unwrap();
        for (k, v) in y.iter().enumerate() {
            assert!((v - x[2 * k]).abs() < 1e-12);
        }
    }

    #[test]
    fn sensing_matches_dense() {
        let h = gen_gaussian_waveform(32, 77).unwrap();
        let omega = make_subsample_set(32, 8, SubsampleScheme::EqualInterval, None).unwrap();
        let op = SensingOperator::new(h, omega).unwrap();
        let x = gen_gaussian_waveform(32, 78).unwrap();
        let fast = op.apply(&x.samples).unwrap();
        let dense = mat_vec(&op.dense().unwrap(), &x.samples);
        for (a, b) in fast.iter().zip(&dense) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn adjoint_zero_and_dims() {
        let h = gen_gaussian_waveform(16, 1).unwrap();
        let omega = make_subsample_set(16, 4, SubsampleScheme::EqualInterval, None).unwrap();
        let op = SensingOperator::new(h, omega).unwrap();
        let z = op.apply_adjoint(&[0.0; 4]).unwrap();
        assert!(z.iter().all(|&v| v == 0.0));
        assert!(op.apply(&[0.0; 7]).is_err());
        assert!(op.apply_adjoint(&[0.0; 5]).is_err());
    }

    #[test]
    fn adjointness_identity() {
        let n = 64;
        for t in 0..100u64 {
            let h = gen_gaussian_waveform(n, trial_seed(10, t)).unwrap();
            let omega = make_subsample_set(n, 16, SubsampleScheme::EqualInterval, None).unwrap();
            let op = SensingOperator::new(h, omega).unwrap();
            let x = gen_gaussian_waveform(n, trial_seed(11, t)).unwrap().samples;
            let y = gen_gaussian_waveform(16, trial_seed(12, t)).unwrap().samples;
            let ax: f64 = op.apply(&x).unwrap().iter().zip(&y).map(|(a, b)| a * b).sum();
            let aty: f64 = op.apply_adjoint(&y).unwrap().iter().zip(&x).map(|(a, b)| a * b).sum();
            let nx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            let ny = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((ax - aty).abs() <= 1e-10 * nx * ny);
        }
    }

    #[test]
    fn operator_norm_trivial_cases() {
        let norm = circulant_operator_norm(&delta0(8)).unwrap();
        assert!((norm - 1.0).abs() < 1e-12);
        let norm = circulant_operator_norm(&[1.0; 8]).unwrap();
        assert!((norm - 8.0).abs() < 1e-12);
        assert!(circulant_operator_norm(&[]).is_err());
    }

    #[test]
    fn operator_norm_matches_dense_spectral_norm() {
        // Power iteration on C^T C of the dense circulant as the oracle.
        for t in 0..10u64 {
            let l = gen_gaussian_waveform(32, trial_seed(31, t)).unwrap().samples;
            let c = build_dense_h(&l).unwrap();
            let mut v: Vec<f64> =
                gen_gaussian_waveform(32, trial_seed(32, t)).unwrap().samples;
            let mut sigma = 0.0;
            for _ in 0..3000 {
                let cv = mat_vec(&c, &v);
                let mut ctcv = vec![0.0; 32];
                for (k, row) in c.iter().enumerate() {
                    for (j, &e) in row.iter().enumerate() {
                        ctcv[j] += e * cv[k];
                    }
                }
                let norm = ctcv.iter().map(|x| x * x).sum::<f64>().sqrt();
                sigma = norm.sqrt();
                for (a, b) in v.iter_mut().zip(&ctcv) {
                    *a = b / norm;
                }
            }
            let fast = circulant_operator_norm(&l).unwrap();
            assert!(
                (fast - sigma).abs() <= 1e-8 * sigma,
                "fast {fast} dense {sigma}"
            );
        }
    }

    proptest! {
        #[test]
        fn prop_fast_matches_dense(seed in 0u64..500, n_pow in 2u32..7) {
            let n = 1usize << n_pow;
            let h = gen_gaussian_waveform(n, seed).unwrap();
            let x = gen_gaussian_waveform(n, seed ^ 0xabcd).unwrap();
            let fast = circular_convolve(&h.samples, &x.samples).unwrap();
            let dense = mat_vec(&build_dense_h(&h.samples).unwrap(), &x.samples);
            for (a, b) in fast.iter().zip(&dense) {
                prop_assert!((a - b).abs() < 1e-10);
            }
        }
    }
}
