//! Coded-aperture imaging demo: 2D circular convolution with a white mask,
//! equal-interval 2D subsampling, and recovery in the 2D Haar basis, with a
//! naive adjoint-backprojection baseline for comparison.

use super::config::ExperimentConfig;
use super::pgm::read_pgm;
use crate::bases::{BasisId, Orthobasis};
use crate::error::{Error, Result};
use crate::fft::Dft;
use crate::recovery::{solve_l1, MeasurementModel, SolverConfig};
use crate::signal::{trial_rng, trial_seed, Waveform};
use num_complex::Complex64;
use rand_distr::{Distribution as _, StandardNormal};
use serde::{Deserialize, Serialize};
use std::path::Path;

const MAX_SIDE: usize = 256;

/// Square grayscale image, side a power of two, pixels in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct Image2d {
    pub side: usize,
    pub pixels: Vec<f64>,
}

impl Image2d {
    pub fn new(side: usize, pixels: Vec<f64>) -> Result<Self> {
        if side == 0 || !side.is_power_of_two() || side > MAX_SIDE {
            return Err(Error::invalid(format!(
                "image side must be a power of two <= {MAX_SIDE}, got {side}"
            )));
        }
        if pixels.len() != side * side {
            return Err(Error::invalid("pixel count does not match side^2"));
        }
        Ok(Image2d { side, pixels })
    }

    pub fn from_pgm(path: &Path) -> Result<Self> {
        let (w, h, pixels) = read_pgm(path)?;
        if w != h {
            return Err(Error::invalid(format!("image must be square, got {w}x{h}")));
        }
        Image2d::new(w, pixels)
    }
}

/// A flat test scene: grey background, a bright square object, and a dark
/// shadow band beneath it.
pub fn synthetic_scene(side: usize) -> Result<Image2d> {
    let mut pixels = vec![0.5; side * side];
    let (lo, hi) = (side / 4, side / 2);
    for r in lo..hi {
        for c in lo..hi {
            pixels[r * side + c] = 1.0;
        }
    }
    for r in hi..hi + side / 8 {
        for c in lo + side / 8..hi + side / 8 {
            pixels[r * side + c] = 0.0;
        }
    }
    Image2d::new(side, pixels)
}

/// Tensor-product 2D Haar transform: the 1D basis applied along rows, then
/// along columns.
pub struct Haar2d {
    side: usize,
    basis: Orthobasis,
}

impl Haar2d {
    pub fn new(side: usize) -> Result<Self> {
        Ok(Haar2d { side, basis: Orthobasis::new(BasisId::Haar, side)? })
    }

    fn transform(&self, data: &[f64], analyze: bool) -> Result<Vec<f64>> {
        let s = self.side;
        if data.len() != s * s {
            return Err(Error::invalid("2D transform length mismatch"));
        }
        let apply = |v: &[f64]| -> Result<Vec<f64>> {
            if analyze {
                self.basis.analyze(v)
            } else {
                self.basis.synthesize(v)
            }
        };
        let mut out = vec![0.0; s * s];
        for (row_out, row_in) in out.chunks_mut(s).zip(data.chunks(s)) {
            row_out.copy_from_slice(&apply(row_in)?);
        }
        let mut col = vec![0.0; s];
        for c in 0..s {
            for r in 0..s {
                col[r] = out[r * s + c];
            }
            let t = apply(&col)?;
            for r in 0..s {
                out[r * s + c] = t[r];
            }
        }
        Ok(out)
    }

    pub fn analyze(&self, pixels: &[f64]) -> Result<Vec<f64>> {
        self.transform(pixels, true)
    }

    pub fn synthesize(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        self.transform(coeffs, false)
    }
}

/// 2D white-mask convolution sensing composed with the 2D Haar basis:
/// A = R (circular correlation with the mask) Psi, where R keeps every
/// `step`-th pixel in each dimension. The subsampled Gram is a 2D circulant,
/// solved exactly through its 2D DFT eigenvalues.
pub struct Conv2dModel {
    side: usize,
    step: usize,
    m_side: usize,
    spectrum: Vec<Complex64>,
    dft: Dft,
    dft_m: Dft,
    inv_eigs: Vec<f64>,
    haar: Haar2d,
}

fn fft2(dft: &Dft, data: &mut [Complex64], side: usize, inverse: bool) {
    for row in data.chunks_mut(side) {
        if inverse {
            dft.inverse(row);
        } else {
            dft.forward(row);
        }
    }
    let mut col = vec![Complex64::default(); side];
    for c in 0..side {
        for r in 0..side {
            col[r] = data[r * side + c];
        }
        if inverse {
            dft.inverse(&mut col);
        } else {
            dft.forward(&mut col);
        }
        for r in 0..side {
            data[r * side + c] = col[r];
        }
    }
}

impl Conv2dModel {
    pub fn new(mask: &Waveform, side: usize, rate: usize) -> Result<Self> {
        if mask.len() != side * side {
            return Err(Error::invalid("mask length must equal side^2"));
        }
        let step = (rate as f64).sqrt().round() as usize;
        if step * step != rate || rate == 0 {
            return Err(Error::invalid(format!(
                "subsampling rate {rate} must be a perfect square"
            )));
        }
        if side % step != 0 {
            return Err(Error::invalid(format!("step {step} must divide side {side}")));
        }
        let m_side = side / step;
        let dft = Dft::new(side);
        let mut spectrum: Vec<Complex64> = mask
            .samples
            .iter()
            .map(|&v| Complex64::new(v, 0.0))
            .collect();
        fft2(&dft, &mut spectrum, side, false);

        // Gram eigenvalues: 2D autocorrelation of the mask from its power
        // spectrum, sampled on the coarse grid, then an m-side 2D DFT.
        let mut rho: Vec<Complex64> = spectrum
            .iter()
            .map(|c| Complex64::new(c.norm_sqr(), 0.0))
            .collect();
        fft2(&dft, &mut rho, side, true);
        let dft_m = Dft::new(m_side);
        let mut eigs: Vec<Complex64> = (0..m_side * m_side)
            .map(|i| {
                let (p, q) = (i / m_side, i % m_side);
                rho[(p * step % side) * side + q * step % side]
            })
            .collect();
        fft2(&dft_m, &mut eigs, m_side, false);
        let max_eig = eigs.iter().map(|c| c.re.abs()).fold(0.0, f64::max);
        let inv_eigs = eigs
            .iter()
            .map(|c| if c.re.abs() > 1e-12 * max_eig { 1.0 / c.re } else { 0.0 })
            .collect();

        Ok(Conv2dModel {
            side,
            step,
            m_side,
            spectrum,
            dft,
            dft_m,
            inv_eigs,
            haar: Haar2d::new(side)?,
        })
    }

    pub fn measurement_count(&self) -> usize {
        self.m_side * self.m_side
    }

    /// R (correlation with the mask) applied to an image.
    pub fn sense_image(&self, pixels: &[f64]) -> Result<Vec<f64>> {
        if pixels.len() != self.side * self.side {
            return Err(Error::invalid("image length mismatch"));
        }
        let mut buf: Vec<Complex64> =
            pixels.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft2(&self.dft, &mut buf, self.side, false);
        for (b, s) in buf.iter_mut().zip(&self.spectrum) {
            *b *= s.conj();
        }
        fft2(&self.dft, &mut buf, self.side, true);
        Ok((0..self.measurement_count())
            .map(|i| {
                let (p, q) = (i / self.m_side, i % self.m_side);
                buf[p * self.step * self.side + q * self.step].re
            })
            .collect())
    }

    /// Adjoint of `sense_image`, back to an image.
    pub fn backproject_image(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.measurement_count() {
            return Err(Error::invalid("measurement length mismatch"));
        }
        let mut buf = vec![Complex64::default(); self.side * self.side];
        for (i, &v) in y.iter().enumerate() {
            let (p, q) = (i / self.m_side, i % self.m_side);
            buf[p * self.step * self.side + q * self.step] = Complex64::new(v, 0.0);
        }
        fft2(&self.dft, &mut buf, self.side, false);
        for (b, s) in buf.iter_mut().zip(&self.spectrum) {
            *b *= s;
        }
        fft2(&self.dft, &mut buf, self.side, true);
        Ok(buf.iter().map(|c| c.re).collect())
    }
}

impl MeasurementModel for Conv2dModel {
    fn coeff_len(&self) -> usize {
        self.side * self.side
    }

    fn measurement_len(&self) -> usize {
        self.measurement_count()
    }

    fn forward(&self, alpha: &[f64]) -> Result<Vec<f64>> {
        self.sense_image(&self.haar.synthesize(alpha)?)
    }

    fn adjoint(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.haar.analyze(&self.backproject_image(y)?)
    }

    fn gram_solve(&self, b: &[f64], _cfg: &SolverConfig) -> Result<Vec<f64>> {
        let mut buf: Vec<Complex64> =
            b.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft2(&self.dft_m, &mut buf, self.m_side, false);
        for (c, &inv) in buf.iter_mut().zip(&self.inv_eigs) {
            *c *= inv;
        }
        fft2(&self.dft_m, &mut buf, self.m_side, true);
        Ok(buf.iter().map(|c| c.re).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodedApertureReport {
    pub side: usize,
    pub rate: usize,
    pub measurements: usize,
    pub noise_db: Option<f64>,
    pub cs_relative_error: f64,
    pub cs_psnr_db: f64,
    pub backprojection_relative_error: f64,
    pub backprojection_psnr_db: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn rel_error(est: &[f64], truth: &[f64]) -> f64 {
    let num: f64 = est
        .iter()
        .zip(truth)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let den: f64 = truth.iter().map(|v| v * v).sum::<f64>().sqrt();
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

/// PSNR in dB against a unit peak.
fn psnr(est: &[f64], truth: &[f64]) -> f64 {
    let mse: f64 = est
        .iter()
        .zip(truth)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / truth.len() as f64;
    if mse == 0.0 {
        f64::INFINITY
    } else {
        -10.0 * mse.log10()
    }
}

/// Senses the scene through a fresh white mask, optionally adds measurement
/// noise at the configured SNR, and reconstructs two ways: l1 recovery in the
/// 2D Haar basis, and scaled adjoint backprojection. Returns the metrics and
/// both reconstructed images.
pub fn run_coded_aperture(
    cfg: &ExperimentConfig,
) -> Result<(CodedApertureReport, Image2d, Image2d)> {
    let scene = match &cfg.image {
        Some(path) => Image2d::from_pgm(path)?,
        None => synthetic_scene(64)?,
    };
    let side = scene.side;
    let mask = Waveform::generate(
        cfg.ensemble.distribution(),
        side * side,
        trial_seed(cfg.seed, 0),
    )?;
    let model = Conv2dModel::new(&mask, side, cfg.rate)?;
    let m = model.measurement_count();

    let mut y = model.sense_image(&scene.pixels)?;
    if let Some(db) = cfg.noise_db {
        let y_norm: f64 = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        let sigma = y_norm / (m as f64).sqrt() * 10f64.powf(-db / 20.0);
        let mut rng = trial_rng(cfg.seed, 1);
        for v in y.iter_mut() {
            let g: f64 = StandardNormal.sample(&mut rng);
            *v += sigma * g;
        }
    }

    let result = solve_l1(&model, &y, &cfg.solver)?;
    let cs_pixels = model.haar.synthesize(&result.alpha_hat)?;

    // Baseline: adjoint backprojection with a measurement-domain least
    // squares scale (no access to the truth).
    let bp_raw = model.backproject_image(&y)?;
    let abp = model.sense_image(&bp_raw)?;
    let denom: f64 = abp.iter().map(|v| v * v).sum();
    let scale = if denom > 0.0 {
        abp.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>() / denom
    } else {
        0.0
    };
    let bp_pixels: Vec<f64> = bp_raw.iter().map(|v| v * scale).collect();

    let report = CodedApertureReport {
        side,
        rate: cfg.rate,
        measurements: m,
        noise_db: cfg.noise_db,
        cs_relative_error: rel_error(&cs_pixels, &scene.pixels),
        cs_psnr_db: psnr(&cs_pixels, &scene.pixels),
        backprojection_relative_error: rel_error(&bp_pixels, &scene.pixels),
        backprojection_psnr_db: psnr(&bp_pixels, &scene.pixels),
        iterations: result.iterations,
        converged: result.converged,
    };
    Ok((
        report,
        Image2d::new(side, cs_pixels)?,
        Image2d::new(side, bp_pixels)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::ExperimentKind;
    use crate::signal::gen_gaussian_waveform;

    fn model(side: usize, rate: usize, seed: u64) -> Conv2dModel {
        let mask = gen_gaussian_waveform(side * side, seed).unwrap();
        Conv2dModel::new(&mask, side, rate).unwrap()
    }

    #[test]
    fn haar2d_orthonormal_round_trip() {
        let haar = Haar2d::new(16).unwrap();
        let x: Vec<f64> = (0..256).map(|i| ((i * 37) % 11) as f64 / 11.0).collect();
        let c = haar.analyze(&x).unwrap();
        let back = haar.synthesize(&c).unwrap();
        let e_x: f64 = x.iter().map(|v| v * v).sum();
        let e_c: f64 = c.iter().map(|v| v * v).sum();
        assert!((e_x - e_c).abs() < 1e-10 * e_x);
        for (a, b) in x.iter().zip(&back) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn conv2d_adjointness() {
        let m = model(16, 4, 5);
        let mut rng = trial_rng(6, 0);
        for _ in 0..20 {
            let alpha: Vec<f64> =
                (0..256).map(|_| StandardNormal.sample(&mut rng)).collect();
            let v: Vec<f64> = (0..64).map(|_| StandardNormal.sample(&mut rng)).collect();
            let lhs: f64 = m
                .forward(&alpha)
                .unwrap()
                .iter()
                .zip(&v)
                .map(|(a, b)| a * b)
                .sum();
            let rhs: f64 = alpha
                .iter()
                .zip(&m.adjoint(&v).unwrap())
                .map(|(a, b)| a * b)
                .sum();
            assert!((lhs - rhs).abs() < 1e-8 * lhs.abs().max(1.0));
        }
    }

    #[test]
    fn gram_solve_inverts_gram() {
        let m = model(16, 4, 7);
        let mut rng = trial_rng(8, 0);
        let b: Vec<f64> = (0..64).map(|_| StandardNormal.sample(&mut rng)).collect();
        let w = m.gram_solve(&b, &SolverConfig::default()).unwrap();
        let back = m.forward(&m.adjoint(&w).unwrap()).unwrap();
        for (got, want) in back.iter().zip(&b) {
            assert!((got - want).abs() < 1e-8, "gram solve residual too large");
        }
    }

    #[test]
    fn rejects_bad_geometry() {
        let mask = gen_gaussian_waveform(256, 1).unwrap();
        assert!(Conv2dModel::new(&mask, 16, 2).is_err()); // not a square
        assert!(Conv2dModel::new(&mask, 16, 9).is_err()); // 3 does not divide 16
        assert!(Conv2dModel::new(&mask, 8, 4).is_err()); // mask length mismatch
        assert!(Image2d::new(12, vec![0.0; 144]).is_err());
        assert!(Image2d::new(16, vec![0.0; 10]).is_err());
    }

    fn demo_cfg() -> ExperimentConfig {
        ExperimentConfig {
            experiment: ExperimentKind::CodedAperture,
            seed: 11,
            rate: 4,
            noise_db: Some(30.0),
            ..Default::default()
        }
    }

    #[test]
    fn full_rate_noiseless_inverts() {
        let mut cfg = demo_cfg();
        cfg.rate = 1;
        cfg.noise_db = None;
        let (report, _, _) = run_coded_aperture(&cfg).unwrap();
        assert!(report.cs_relative_error < 1e-3, "err {}", report.cs_relative_error);
    }

    #[test]
    fn zero_image_recovers_zero() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("zero.pgm");
        super::super::pgm::write_pgm(&path, 32, 32, &vec![0.0; 1024]).unwrap();
        let mut cfg = demo_cfg();
        cfg.image = Some(path);
        cfg.noise_db = None;
        let (report, recon, _) = run_coded_aperture(&cfg).unwrap();
        assert!(recon.pixels.iter().all(|&v| v.abs() < 1e-12));
        assert_eq!(report.cs_relative_error, 0.0);
    }

    #[test]
    fn cs_beats_backprojection_on_synthetic_scene() {
        let (report, _, _) = run_coded_aperture(&demo_cfg()).unwrap();
        assert!(
            report.cs_relative_error < report.backprojection_relative_error,
            "cs {} vs bp {}",
            report.cs_relative_error,
            report.backprojection_relative_error
        );
    }
}
