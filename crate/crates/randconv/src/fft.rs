//! Thin wrapper around rustfft with the DFT convention used throughout:
//! unnormalized forward transform F with entries e^{-i2pi jk/n}, inverse
//! carrying the 1/n factor.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// Forward/inverse DFT plans for a fixed length.
#[derive(Clone)]
pub struct Dft {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Dft {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Dft {
            n,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    /// Unnormalized DFT of a real vector.
    pub fn forward_real(&self, x: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fwd.process(&mut buf);
        buf
    }

    /// Unnormalized DFT, in place.
    pub fn forward(&self, buf: &mut [Complex64]) {
        self.fwd.process(buf);
    }

    /// Inverse DFT including the 1/n normalization, in place.
    pub fn inverse(&self, buf: &mut [Complex64]) {
        self.inv.process(buf);
        let scale = 1.0 / self.n as f64;
        for v in buf.iter_mut() {
            *v *= scale;
        }
    }
}

impl std::fmt::Debug for Dft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Dft").field("n", &self.n).finish()
    }
}

/// Drops an imaginary residue after checking it is below `tol`, returning the
/// real parts. Returns None when the residue is too large.
pub fn take_real(buf: &[Complex64], tol: f64) -> Option<Vec<f64>> {
    let worst = buf.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
    if worst > tol {
        return None;
    }
    Some(buf.iter().map(|c| c.re).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let dft = Dft::new(12);
        let x: Vec<f64> = (0..12).map(|i| (i as f64).sin()).collect();
        let mut buf = dft.forward_real(&x);
        dft.inverse(&mut buf);
        let back = take_real(&buf, 1e-10).unwrap();
        for (a, b) in x.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn dc_bin_is_sum() {
        let dft = Dft::new(8);
        let x = vec![1.0; 8];
        let spec = dft.forward_real(&x);
        assert!((spec[0].re - 8.0).abs() < 1e-12);
        for k in 1..8 {
            assert!(spec[k].norm() < 1e-12);
        }
    }
}
