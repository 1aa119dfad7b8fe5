//! Closed-form evaluators for the measurement-count and concentration
//! bounds, and Monte Carlo machinery to confront them with empirical
//! frequencies.
//!
//! The Bernoulli fixed-vector constants mirror the Gaussian derivation with
//! the sub-Gaussian factor of the symmetric Bernoulli tail (16 in the
//! exponent, threshold 32 sigma^2/m) and the sigma^2 <= mu^2 S envelope;
//! they are a reconstructed intermediate, not a displayed statement.

use crate::bases::Orthobasis;
use crate::error::{Error, Result};
use crate::operators::SensingOperator;
use crate::recovery::{ComposedModel, MeasurementModel};
use crate::signal::{gen_sparse_instance, trial_seed, Distribution, MagnitudeLaw, SupportSet, Waveform};
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Waveform ensemble covered by the bound formulas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Ensemble {
    Gaussian,
    Bernoulli,
}

impl Ensemble {
    pub fn name(&self) -> &'static str {
        match self {
            Ensemble::Gaussian => "gaussian",
            Ensemble::Bernoulli => "bernoulli",
        }
    }

    pub fn distribution(&self) -> Distribution {
        match self {
            Ensemble::Gaussian => Distribution::Gaussian,
            Ensemble::Bernoulli => Distribution::Bernoulli,
        }
    }
}

impl std::str::FromStr for Ensemble {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" => Ok(Ensemble::Gaussian),
            "bernoulli" => Ok(Ensemble::Bernoulli),
            other => Err(Error::invalid(format!("unknown ensemble '{other}'"))),
        }
    }
}

/// Which tail statement is being evaluated: one fixed vector, any vector on
/// a fixed support, or any support of the given size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundVariant {
    FixedVector,
    FixedSupport,
    AnySupport,
}

impl BoundVariant {
    pub fn name(&self) -> &'static str {
        match self {
            BoundVariant::FixedVector => "fixed-vector",
            BoundVariant::FixedSupport => "fixed-support",
            BoundVariant::AnySupport => "any-support",
        }
    }
}

/// Arguments of a tail-bound evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailBoundQuery {
    pub m: usize,
    pub sparsity: usize,
    pub n: usize,
    pub mu: f64,
    pub r: f64,
    pub ensemble: Ensemble,
    pub variant: BoundVariant,
}

/// A clamped probability bound plus the validity threshold of the chosen
/// variant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundEvaluation {
    pub probability_bound: f64,
    pub validity_threshold: f64,
    pub valid: bool,
}

/// log C(n, s), accumulated in log space.
fn ln_binomial(n: usize, s: usize) -> f64 {
    (0..s)
        .map(|i| (((n - i) as f64) / ((i + 1) as f64)).ln())
        .sum()
}

/// Evaluates the concentration tail bound for the query, exactly per the
/// variant's formula, clamped into [0, 1].
pub fn tail_bound(q: &TailBoundQuery) -> Result<BoundEvaluation> {
    if q.m < 1 || q.sparsity < 1 || q.n < q.sparsity {
        return Err(Error::invalid("tail bound needs m >= 1 and 1 <= S <= n"));
    }
    if q.mu < 1.0 {
        return Err(Error::invalid(format!("mu {} must be >= 1", q.mu)));
    }
    if q.r <= 0.0 {
        return Err(Error::invalid("deviation level r must be positive"));
    }
    let mu2s = q.mu * q.mu * q.sparsity as f64;
    let m = q.m as f64;
    let s = q.sparsity as f64;
    // (prefactor in log space, exponent divisor c in exp(-mr/(c mu^2 S)),
    //  threshold coefficient t in t mu^2 S / m)
    let (ln_pref, c, t) = match (q.ensemble, q.variant) {
        (Ensemble::Gaussian, BoundVariant::FixedVector) => (2.0, 2.0, 2.0),
        (Ensemble::Gaussian, BoundVariant::FixedSupport) => (2.0 + 2.0 * s.ln(), 4.0, 4.0),
        (Ensemble::Gaussian, BoundVariant::AnySupport) => {
            (2.0 + 2.0 * s.ln() + ln_binomial(q.n, q.sparsity), 4.0, 4.0)
        }
        (Ensemble::Bernoulli, BoundVariant::FixedVector) => (2.0f64.ln() + 2.0, 16.0, 32.0),
        (Ensemble::Bernoulli, BoundVariant::FixedSupport) => {
            (2.0f64.ln() + 2.0 + 2.0 * s.ln(), 32.0, 64.0)
        }
        (Ensemble::Bernoulli, BoundVariant::AnySupport) => (
            2.0f64.ln() + 2.0 + 2.0 * s.ln() + ln_binomial(q.n, q.sparsity),
            32.0,
            64.0,
        ),
    };
    let ln_bound = ln_pref - m * q.r / (c * mu2s);
    let probability_bound = ln_bound.min(0.0).exp();
    let validity_threshold = t * mu2s / m;
    Ok(BoundEvaluation {
        probability_bound,
        validity_threshold,
        valid: q.r > validity_threshold,
    })
}

/// Measurement-count formulas: the theorem right-hand side (ceiling) and,
/// for the Gaussian ensemble, the sharper intermediate value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementBound {
    pub theorem_m: u64,
    pub sharp_m: Option<u64>,
}

pub fn measurement_bound(
    n: usize,
    sparsity: usize,
    mu: f64,
    delta: f64,
    ensemble: Ensemble,
    k: f64,
) -> Result<MeasurementBound> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(format!("delta {delta} not in (0,1)")));
    }
    if sparsity < 1 || mu < 1.0 || k <= 0.0 {
        return Err(Error::invalid("need S >= 1, mu >= 1, K > 0"));
    }
    let s = sparsity as f64;
    let mu2 = mu * mu;
    let log_nd = (n as f64 / delta).ln();
    let e2 = std::f64::consts::E * std::f64::consts::E;
    let sp1 = s + 1.0;
    let value = match ensemble {
        Ensemble::Gaussian => {
            k * mu2 * s * log_nd.sqrt() * (2.0 * e2 * sp1 * sp1).ln().max(log_nd)
        }
        Ensemble::Bernoulli => {
            k * mu2 * s * log_nd.powf(1.5) * (4.0 * e2 * sp1 * sp1).ln().max(log_nd)
        }
    };
    let sharp_m = match ensemble {
        Ensemble::Gaussian => {
            let sharp = 4.0
                * mu2
                * sp1
                * (1.0 + (2.0 * (4.0 * n as f64 / delta).ln()).sqrt())
                * (2.0 * e2 * sp1 * sp1 * n as f64 / delta).ln();
            Some(sharp.ceil() as u64)
        }
        Ensemble::Bernoulli => None,
    };
    Ok(MeasurementBound { theorem_m: value.ceil() as u64, sharp_m })
}

/// One row of a concentration table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationRow {
    pub r: f64,
    pub empirical: f64,
    pub bound: f64,
    pub stderr: f64,
    pub valid: bool,
}

/// Result of a concentration study: per-r rows plus the sample mean of the
/// normalized energy R over all trials.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConcentrationTable {
    pub rows: Vec<ConcentrationRow>,
    pub mean_r: f64,
    pub trials: usize,
}

/// Monte Carlo check of the fixed-vector concentration: one support/sign
/// draw is fixed, the waveform is resampled each trial (the randomness in
/// the tail statement is the waveform), and the frequency of |R - 1| > r is
/// tabulated against the bound.
#[allow(clippy::too_many_arguments)]
pub fn empirical_concentration(
    n: usize,
    sparsity: usize,
    basis: &Orthobasis,
    ensemble: Ensemble,
    op_template: impl Fn(Waveform) -> Result<SensingOperator> + Sync,
    m: usize,
    r_grid: &[f64],
    trials: usize,
    seed: u64,
) -> Result<ConcentrationTable> {
    if trials < 100 {
        return Err(Error::invalid("need at least 100 trials"));
    }
    if r_grid.is_empty() {
        return Err(Error::invalid("empty r grid"));
    }
    let mu = basis.coherence()?.mu;
    let instance = gen_sparse_instance(n, sparsity, MagnitudeLaw::Unit, basis.id().name(), seed)?;
    let mut alpha0 = instance.densify();
    let norm = alpha0.iter().map(|v| v * v).sum::<f64>().sqrt();
    for v in &mut alpha0 {
        *v /= norm;
    }
    let x0 = basis.synthesize(&alpha0)?;

    let r_values: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let h = Waveform::generate(ensemble.distribution(), n, trial_seed(seed, t + 1))?;
            let op = op_template(h)?;
            let y = op.apply(&x0)?;
            Ok(y.iter().map(|v| v * v).sum::<f64>() / m as f64)
        })
        .collect::<Result<Vec<f64>>>()?;
    let mean_r = r_values.iter().sum::<f64>() / trials as f64;

    let rows = r_grid
        .iter()
        .map(|&r| {
            let count = r_values.iter().filter(|&&v| (v - 1.0).abs() > r).count();
            let empirical = count as f64 / trials as f64;
            let eval = tail_bound(&TailBoundQuery {
                m,
                sparsity,
                n,
                mu,
                r,
                ensemble,
                variant: BoundVariant::FixedVector,
            })?;
            Ok(ConcentrationRow {
                r,
                empirical,
                bound: eval.probability_bound,
                stderr: (empirical * (1.0 - empirical) / trials as f64).sqrt(),
                valid: eval.valid,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConcentrationTable { rows, mean_r, trials })
}

/// Extreme eigenvalues of the S x S Gram of (1/sqrt(m)) U_T^Omega.
pub fn eigenvalue_extremes(
    op: &SensingOperator,
    basis: &Orthobasis,
    support: &SupportSet,
) -> Result<(f64, f64)> {
    let s = support.size();
    let n = op.signal_len();
    let m = op.measurement_len() as f64;
    let model = ComposedModel::new(op, basis)?;
    let mut columns = Vec::with_capacity(s);
    for &t in support.indices() {
        let mut e = vec![0.0; n];
        e[t] = 1.0;
        columns.push(model.forward(&e)?);
    }
    let mut gram = DMatrix::zeros(s, s);
    for i in 0..s {
        for j in i..s {
            let g: f64 =
                columns[i].iter().zip(&columns[j]).map(|(a, b)| a * b).sum::<f64>() / m;
            gram[(i, j)] = g;
            gram[(j, i)] = g;
        }
    }
    let eig = gram.symmetric_eigen();
    let lam_max = eig.eigenvalues.iter().cloned().fold(f64::MIN, f64::max);
    let lam_min = eig.eigenvalues.iter().cloned().fold(f64::MAX, f64::min).max(0.0);
    Ok((lam_min, lam_max))
}

/// Fits the numerical constant K of the measurement-count formula from a
/// 50%-success contour: least squares through the origin of observed contour
/// m against the formula evaluated at K = 1.
pub fn fit_constant_k(
    contour: &[(usize, usize)], // (S, m at the contour)
    n: usize,
    mu: f64,
    delta: f64,
    ensemble: Ensemble,
) -> Result<(f64, f64)> {
    if contour.is_empty() {
        return Err(Error::invalid("empty contour"));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    let mut preds = Vec::new();
    for &(s, m_obs) in contour {
        let pred = measurement_bound(n, s, mu, delta, ensemble, 1.0)?.theorem_m as f64;
        num += pred * m_obs as f64;
        den += pred * pred;
        preds.push((pred, m_obs as f64));
    }
    let k = num / den;
    let residual = preds
        .iter()
        .map(|(p, o)| (k * p - o) * (k * p - o))
        .sum::<f64>()
        .sqrt();
    Ok((k, residual))
}
