//! Phase-transition, concentration, certificate, and bounds experiments,
//! with CSV/JSON persistence.

use super::config::{ExperimentConfig, OutputFormat};
use crate::analysis::{
    empirical_concentration, fit_constant_k, measurement_bound, ConcentrationTable, Ensemble,
};
use crate::bases::Orthobasis;
use crate::error::{Error, Result};
use crate::operators::SensingOperator;
use crate::recovery::{
    adjudicate, basis_pursuit, dual_certificate, RecoveryFlags, DEFAULT_EXACT_TOL,
};
use crate::signal::{gen_sparse_instance, trial_seed, MagnitudeLaw, Waveform};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseTransitionCell {
    pub s: usize,
    pub m: usize,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub mean_relative_error: f64,
    pub mean_certificate_sup: Option<f64>,
    pub skipped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseTransitionGrid {
    pub config: ExperimentConfig,
    pub cells: Vec<PhaseTransitionCell>,
}

/// Seed stream for one grid cell, independent of every other cell.
fn cell_seed(master: u64, s: usize, m: usize) -> u64 {
    trial_seed(master, ((s as u64) << 32) | m as u64)
}

fn run_trial(
    cfg: &ExperimentConfig,
    s: usize,
    m: usize,
    trial: u64,
    with_certificate: bool,
) -> Result<(RecoveryFlags, Option<CertificateTrial>)> {
    let base = cell_seed(cfg.seed, s, m);
    let h = Waveform::generate(cfg.ensemble.distribution(), cfg.n, trial_seed(base, 2 * trial))?;
    let omega = cfg.omega.build(cfg.n, m)?;
    let op = SensingOperator::new(h, omega)?;
    let basis = Orthobasis::new(cfg.basis, cfg.n)?;
    let inst = gen_sparse_instance(
        cfg.n,
        s,
        MagnitudeLaw::Unit,
        cfg.basis.name(),
        trial_seed(base, 2 * trial + 1),
    )?;
    let cert = if with_certificate {
        Some(dual_certificate(&op, &basis, &inst.support, &inst.signs)?)
    } else {
        None
    };
    let y = op.apply(&basis.synthesize(&inst.densify())?)?;
    let result = basis_pursuit(&y, &op, &basis, &cfg.solver)?;
    let flags = adjudicate(&result.alpha_hat, &inst, DEFAULT_EXACT_TOL)?;
    let cert_trial = cert.map(|c| CertificateTrial {
        trial,
        sup_offsupport: c.sup_offsupport,
        gram_condition_ok: c.gram_condition_ok,
        certifies: c.certifies(),
        solver_exact: flags.exact,
        relative_error: flags.relative_error,
    });
    Ok((flags, cert_trial))
}

/// Sweeps the (m, S) grid: fresh waveform and sparse instance per trial,
/// sense, solve, adjudicate. Invalid (n, m) cells are reported as skipped.
pub fn run_phase_transition(cfg: &ExperimentConfig) -> Result<PhaseTransitionGrid> {
    cfg.validate()?;
    let mut cells = Vec::new();
    for &s in &cfg.s_grid {
        for &m in &cfg.m_grid {
            if s > cfg.n || m > cfg.n || cfg.omega.build(cfg.n, m).is_err() {
                cells.push(PhaseTransitionCell {
                    s,
                    m,
                    trials: 0,
                    successes: 0,
                    success_rate: 0.0,
                    mean_relative_error: f64::NAN,
                    mean_certificate_sup: None,
                    skipped: true,
                });
                continue;
            }
            let outcomes: Vec<RecoveryFlags> = (0..cfg.trials as u64)
                .into_par_iter()
                .map(|t| run_trial(cfg, s, m, t, false).map(|(f, _)| f))
                .collect::<Result<_>>()?;
            let successes = outcomes.iter().filter(|f| f.exact).count();
            let mean_relative_error =
                outcomes.iter().map(|f| f.relative_error).sum::<f64>() / cfg.trials as f64;
            cells.push(PhaseTransitionCell {
                s,
                m,
                trials: cfg.trials,
                successes,
                success_rate: successes as f64 / cfg.trials as f64,
                mean_relative_error,
                mean_certificate_sup: None,
                skipped: false,
            });
        }
    }
    Ok(PhaseTransitionGrid { config: cfg.clone(), cells })
}

pub fn phase_csv(grid: &PhaseTransitionGrid) -> String {
    let mut out = String::from(
        "s,m,trials,successes,success_rate,mean_relative_error,skipped\n",
    );
    for c in &grid.cells {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            c.s, c.m, c.trials, c.successes, c.success_rate, c.mean_relative_error, c.skipped
        );
    }
    out
}

/// Reads back a phase CSV into (s, m, success_rate) triples.
pub fn parse_phase_csv(text: &str) -> Result<Vec<(usize, usize, f64)>> {
    let mut rows = Vec::new();
    for line in text.lines().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() < 5 {
            return Err(Error::invalid(format!("bad phase row '{line}'")));
        }
        let parse_err = || Error::invalid(format!("bad phase row '{line}'"));
        rows.push((
            fields[0].parse().map_err(|_| parse_err())?,
            fields[1].parse().map_err(|_| parse_err())?,
            fields[4].parse().map_err(|_| parse_err())?,
        ));
    }
    Ok(rows)
}

/// Smallest m reaching the success level, per sparsity row.
pub fn contour(rows: &[(usize, usize, f64)], level: f64) -> Vec<(usize, usize)> {
    let mut by_s: std::collections::BTreeMap<usize, Vec<(usize, f64)>> = Default::default();
    for &(s, m, rate) in rows {
        by_s.entry(s).or_default().push((m, rate));
    }
    let mut result = Vec::new();
    for (s, mut ms) in by_s {
        ms.sort_unstable_by_key(|&(m, _)| m);
        if let Some(&(m, _)) = ms.iter().find(|&&(_, rate)| rate >= level) {
            result.push((s, m));
        }
    }
    result
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateTrial {
    pub trial: u64,
    pub sup_offsupport: f64,
    pub gram_condition_ok: bool,
    pub certifies: bool,
    pub solver_exact: bool,
    pub relative_error: f64,
}

/// Joint certificate/solver sweep at the first (S, m) grid point.
pub fn run_certificate(cfg: &ExperimentConfig) -> Result<Vec<CertificateTrial>> {
    cfg.validate()?;
    let s = cfg.s_grid[0];
    let m = cfg.m_grid[0];
    (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| {
            run_trial(cfg, s, m, t, true).map(|(_, c)| c.expect("certificate requested"))
        })
        .collect()
}

pub fn certificate_csv(trials: &[CertificateTrial]) -> String {
    let mut out = String::from(
        "trial,sup_offsupport,gram_condition_ok,certifies,solver_exact,relative_error\n",
    );
    for t in trials {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            t.trial, t.sup_offsupport, t.gram_condition_ok, t.certifies, t.solver_exact,
            t.relative_error
        );
    }
    out
}

/// Concentration study at the first (S, m) grid point, persisted with the
/// fixed schema.
pub fn run_concentration(cfg: &ExperimentConfig) -> Result<ConcentrationTable> {
    cfg.validate()?;
    let s = cfg.s_grid[0];
    let m = cfg.m_grid[0];
    let basis = Orthobasis::new(cfg.basis, cfg.n)?;
    let omega_spec = cfg.omega.clone();
    let n = cfg.n;
    empirical_concentration(
        n,
        s,
        &basis,
        cfg.ensemble,
        move |h| SensingOperator::new(h, omega_spec.build(n, m)?),
        m,
        &cfg.r_grid,
        cfg.trials,
        cfg.seed,
    )
}

pub fn concentration_csv(cfg: &ExperimentConfig, table: &ConcentrationTable) -> String {
    let mut out = String::from("variant,ensemble,n,m,S,mu,r,empirical,bound,stderr,valid\n");
    let basis = Orthobasis::new(cfg.basis, cfg.n).expect("validated config");
    let mu = basis.coherence().expect("coherence guard").mu;
    for row in &table.rows {
        let _ = writeln!(
            out,
            "fixed-vector,{},{},{},{},{},{},{},{},{},{}",
            cfg.ensemble.name(),
            cfg.n,
            cfg.m_grid[0],
            cfg.s_grid[0],
            mu,
            row.r,
            row.empirical,
            row.bound,
            row.stderr,
            row.valid
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsRow {
    pub ensemble: Ensemble,
    pub n: usize,
    pub s: usize,
    pub mu: f64,
    pub delta: f64,
    pub k: f64,
    pub theorem_m: u64,
    pub sharp_m: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub config: ExperimentConfig,
    pub rows: Vec<BoundsRow>,
    /// (fitted K, fit residual) from phase-transition contour data.
    pub fitted_k: Option<(f64, f64)>,
}

/// Tabulates the measurement-count formulas over the S grid for both
/// ensembles; fits the empirical constant K when phase data is supplied.
pub fn run_bounds_report(cfg: &ExperimentConfig) -> Result<BoundsReport> {
    cfg.validate()?;
    let mu = Orthobasis::new(cfg.basis, cfg.n)?.coherence()?.mu;
    let mut rows = Vec::new();
    for ensemble in [Ensemble::Gaussian, Ensemble::Bernoulli] {
        for &s in &cfg.s_grid {
            let b = measurement_bound(cfg.n, s, mu, cfg.delta, ensemble, cfg.constant_k)?;
            rows.push(BoundsRow {
                ensemble,
                n: cfg.n,
                s,
                mu,
                delta: cfg.delta,
                k: cfg.constant_k,
                theorem_m: b.theorem_m,
                sharp_m: b.sharp_m,
            });
        }
    }
    let fitted_k = match &cfg.phase_data {
        Some(path) => {
            let rows = parse_phase_csv(&std::fs::read_to_string(path)?)?;
            let contour = contour(&rows, cfg.contour_level);
            if contour.is_empty() {
                None
            } else {
                Some(fit_constant_k(&contour, cfg.n, mu, cfg.delta, cfg.ensemble)?)
            }
        }
        None => None,
    };
    Ok(BoundsReport { config: cfg.clone(), rows, fitted_k })
}

pub fn bounds_csv(report: &BoundsReport) -> String {
    let mut out = String::from("ensemble,n,s,mu,delta,k,theorem_m,sharp_m\n");
    for r in &report.rows {
        let sharp = r.sharp_m.map_or(String::new(), |v| v.to_string());
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.ensemble.name(),
            r.n,
            r.s,
            r.mu,
            r.delta,
            r.k,
            r.theorem_m,
            sharp
        );
    }
    if let Some((k, residual)) = report.fitted_k {
        let _ = writeln!(out, "\nfitted_k,residual\n{k},{residual}");
    }
    out
}

/// Serializes a payload with the full config echo and writes it to the
/// configured path (or returns it for stdout).
pub fn render<T: Serialize>(cfg: &ExperimentConfig, payload: &T, csv: String) -> Result<String> {
    match cfg.format {
        OutputFormat::Csv => Ok(csv),
        OutputFormat::Json => {
            #[derive(Serialize)]
            struct Envelope<'a, T> {
                config: &'a ExperimentConfig,
                data: &'a T,
            }
            let mut s = serde_json::to_string_pretty(&Envelope { config: cfg, data: payload })?;
            s.push('\n');
            Ok(s)
        }
    }
}

pub fn write_report(path: Option<&Path>, content: &str) -> Result<()> {
    match path {
        Some(p) => {
            std::fs::write(p, content)?;
            Ok(())
        }
        None => {
            print!("{content}");
            Ok(())
        }
    }
}
