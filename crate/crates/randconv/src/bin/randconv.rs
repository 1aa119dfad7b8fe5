//! Command-line front end: experiment subcommands plus small debugging
//! utilities (coherence table, single-instance sense/recover).

use clap::{Args, Parser, Subcommand};
use randconv::bases::{BasisId, Orthobasis};
use randconv::error::{Error, Result};
use randconv::harness::{
    bounds_csv, certificate_csv, concentration_csv, phase_csv, render, run_bounds_report,
    run_certificate, run_coded_aperture, run_concentration, run_phase_transition, write_pgm,
    write_report, ExperimentConfig, ExperimentKind,
};
use randconv::operators::SensingOperator;
use randconv::recovery::{adjudicate, basis_pursuit, DEFAULT_EXACT_TOL};
use randconv::signal::{gen_sparse_instance, trial_seed, MagnitudeLaw, SparseInstance, Waveform};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "randconv",
    about = "Compressive sensing with white random convolution: experiments and utilities"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Monte Carlo exact-recovery rates over an (m, S) grid.
    PhaseTransition(Common),
    /// Empirical energy-concentration frequencies against the tail bound.
    Concentration(Common),
    /// Dual-certificate sweep joined with solver outcomes.
    Certificate(Common),
    /// 2D convolution imaging demo with a backprojection baseline.
    CodedAperture {
        #[command(flatten)]
        common: Common,
        /// Input image (binary P5 graymap); defaults to a synthetic scene.
        #[arg(long)]
        image: Option<PathBuf>,
        /// Subsampling rate (perfect square; 4 keeps every 2nd pixel per axis).
        #[arg(long)]
        rate: Option<usize>,
        /// Measurement SNR in dB; "none" disables noise.
        #[arg(long)]
        noise_db: Option<String>,
    },
    /// Measurement-count formulas over the S grid, with an optional K fit.
    Bounds {
        #[command(flatten)]
        common: Common,
        /// Failure probability delta of the formulas.
        #[arg(long)]
        delta: Option<f64>,
        /// Numerical constant K in the formulas.
        #[arg(long)]
        k: Option<f64>,
        /// Phase-transition CSV whose contour calibrates K.
        #[arg(long)]
        phase_data: Option<PathBuf>,
        /// Success level defining the contour.
        #[arg(long)]
        contour_level: Option<f64>,
    },
    /// Print mu(F, Psi) for a basis and dimension.
    Coherence {
        #[arg(long, default_value_t = 256)]
        n: usize,
        #[arg(long, default_value = "spikes")]
        basis: String,
    },
    /// Generate one sparse instance, sense it, and write the record.
    Sense(Common),
    /// Solve a record produced by `sense` and adjudicate the result.
    Recover {
        /// Record written by `sense`.
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

/// Flags shared by every experiment; each maps onto a config key, and flags
/// win over `--config` file values.
#[derive(Args, Default)]
struct Common {
    /// Flat key=value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    /// Single measurement count (shorthand for a one-point m grid).
    #[arg(long)]
    m: Option<usize>,
    /// Single sparsity (shorthand for a one-point S grid).
    #[arg(long)]
    s: Option<usize>,
    /// Comma-separated measurement counts.
    #[arg(long)]
    m_grid: Option<String>,
    /// Comma-separated sparsities.
    #[arg(long)]
    s_grid: Option<String>,
    /// Comma-separated deviation levels for concentration studies.
    #[arg(long)]
    r_grid: Option<String>,
    #[arg(long)]
    basis: Option<String>,
    #[arg(long)]
    ensemble: Option<String>,
    /// 'equal' or 'explicit:<file>'.
    #[arg(long)]
    omega: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// 'csv' or 'json'.
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
}

impl Common {
    fn to_config(&self, kind: ExperimentKind) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_file(path)?,
            None => ExperimentConfig::default(),
        };
        cfg.experiment = kind;
        let mut kv = BTreeMap::new();
        let mut set = |key: &str, value: Option<String>| {
            if let Some(v) = value {
                kv.insert(key.to_string(), v);
            }
        };
        set("n", self.n.map(|v| v.to_string()));
        set("m_grid", self.m.map(|v| v.to_string()));
        set("m_grid", self.m_grid.clone());
        set("s_grid", self.s.map(|v| v.to_string()));
        set("s_grid", self.s_grid.clone());
        set("r_grid", self.r_grid.clone());
        set("basis", self.basis.clone());
        set("ensemble", self.ensemble.clone());
        set("omega", self.omega.clone());
        set("trials", self.trials.map(|v| v.to_string()));
        set("seed", self.seed.map(|v| v.to_string()));
        set("out", self.out.as_ref().map(|p| p.display().to_string()));
        set("format", self.format.clone());
        set("max_iters", self.max_iters.map(|v| v.to_string()));
        set("tol", self.tol.map(|v| v.to_string()));
        cfg.apply_kv(&kv)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Everything `recover` needs to replay a sensed instance.
#[derive(Serialize, Deserialize)]
struct SenseRecord {
    n: usize,
    m: usize,
    basis: String,
    ensemble: String,
    omega: String,
    seed: u64,
    instance: SparseInstance,
    measurements: Vec<f64>,
}

fn build_pipeline(
    cfg: &ExperimentConfig,
) -> Result<(SensingOperator, Orthobasis, SparseInstance)> {
    let m = cfg.m_grid[0];
    let s = cfg.s_grid[0];
    let h = Waveform::generate(cfg.ensemble.distribution(), cfg.n, trial_seed(cfg.seed, 0))?;
    let op = SensingOperator::new(h, cfg.omega.build(cfg.n, m)?)?;
    let basis = Orthobasis::new(cfg.basis, cfg.n)?;
    let inst = gen_sparse_instance(
        cfg.n,
        s,
        MagnitudeLaw::Unit,
        cfg.basis.name(),
        trial_seed(cfg.seed, 1),
    )?;
    Ok((op, basis, inst))
}

fn cmd_sense(common: &Common) -> Result<()> {
    let cfg = common.to_config(ExperimentKind::PhaseTransition)?;
    let (op, basis, inst) = build_pipeline(&cfg)?;
    let y = op.apply(&basis.synthesize(&inst.densify())?)?;
    let record = SenseRecord {
        n: cfg.n,
        m: cfg.m_grid[0],
        basis: cfg.basis.name().to_string(),
        ensemble: cfg.ensemble.name().to_string(),
        omega: match &cfg.omega {
            randconv::harness::OmegaSpec::Equal => "equal".to_string(),
            randconv::harness::OmegaSpec::Explicit(p) => format!("explicit:{}", p.display()),
        },
        seed: cfg.seed,
        instance: inst,
        measurements: y,
    };
    let mut text = serde_json::to_string_pretty(&record)?;
    text.push('\n');
    write_report(cfg.out.as_deref(), &text)
}

fn cmd_recover(input: &PathBuf, common: &Common) -> Result<()> {
    let record: SenseRecord = serde_json::from_str(&std::fs::read_to_string(input)?)?;
    let mut cfg = common.to_config(ExperimentKind::PhaseTransition)?;
    cfg.n = record.n;
    cfg.m_grid = vec![record.m];
    cfg.basis = record.basis.parse()?;
    cfg.ensemble = record.ensemble.parse()?;
    cfg.omega = record.omega.parse()?;
    cfg.seed = record.seed;
    let h = Waveform::generate(cfg.ensemble.distribution(), cfg.n, trial_seed(cfg.seed, 0))?;
    let op = SensingOperator::new(h, cfg.omega.build(cfg.n, record.m)?)?;
    let basis = Orthobasis::new(cfg.basis, cfg.n)?;
    let result = basis_pursuit(&record.measurements, &op, &basis, &cfg.solver)?;
    let flags = adjudicate(&result.alpha_hat, &record.instance, DEFAULT_EXACT_TOL)?;

    #[derive(Serialize)]
    struct Report {
        iterations: usize,
        converged: bool,
        residual_norm: f64,
        flags: randconv::recovery::RecoveryFlags,
        alpha_hat: Vec<f64>,
    }
    let report = Report {
        iterations: result.iterations,
        converged: result.converged,
        residual_norm: result.residual_norm,
        flags,
        alpha_hat: result.alpha_hat,
    };
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    write_report(cfg.out.as_deref(), &text)
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.cmd {
        Cmd::PhaseTransition(common) => {
            let cfg = common.to_config(ExperimentKind::PhaseTransition)?;
            let grid = run_phase_transition(&cfg)?;
            let text = render(&cfg, &grid.cells, phase_csv(&grid))?;
            write_report(cfg.out.as_deref(), &text)
        }
        Cmd::Concentration(common) => {
            let cfg = common.to_config(ExperimentKind::Concentration)?;
            let table = run_concentration(&cfg)?;
            let text = render(&cfg, &table, concentration_csv(&cfg, &table))?;
            write_report(cfg.out.as_deref(), &text)
        }
        Cmd::Certificate(common) => {
            let cfg = common.to_config(ExperimentKind::Certificate)?;
            let trials = run_certificate(&cfg)?;
            let text = render(&cfg, &trials, certificate_csv(&trials))?;
            write_report(cfg.out.as_deref(), &text)
        }
        Cmd::CodedAperture { common, image, rate, noise_db } => {
            let mut cfg = common.to_config(ExperimentKind::CodedAperture)?;
            if let Some(p) = image {
                cfg.image = Some(p.clone());
            }
            if let Some(r) = rate {
                cfg.rate = *r;
            }
            if let Some(db) = noise_db {
                cfg.noise_db = if db.eq_ignore_ascii_case("none") {
                    None
                } else {
                    Some(db.parse().map_err(|_| {
                        Error::invalid(format!("bad noise level '{db}'"))
                    })?)
                };
            }
            let (report, recon, _) = run_coded_aperture(&cfg)?;
            // --out receives the reconstructed graymap; metrics go to stdout.
            if let Some(path) = &cfg.out {
                write_pgm(path, recon.side, recon.side, &recon.pixels)?;
            }
            let mut csv = String::from("metric,value\n");
            let _ = write!(
                csv,
                "side,{}\nrate,{}\nmeasurements,{}\ncs_relative_error,{}\ncs_psnr_db,{}\n\
                 backprojection_relative_error,{}\nbackprojection_psnr_db,{}\niterations,{}\n\
                 converged,{}\n",
                report.side,
                report.rate,
                report.measurements,
                report.cs_relative_error,
                report.cs_psnr_db,
                report.backprojection_relative_error,
                report.backprojection_psnr_db,
                report.iterations,
                report.converged
            );
            let text = render(&cfg, &report, csv)?;
            write_report(None, &text)
        }
        Cmd::Bounds { common, delta, k, phase_data, contour_level } => {
            let mut cfg = common.to_config(ExperimentKind::Bounds)?;
            if let Some(d) = delta {
                cfg.delta = *d;
            }
            if let Some(k) = k {
                cfg.constant_k = *k;
            }
            if let Some(p) = phase_data {
                cfg.phase_data = Some(p.clone());
            }
            if let Some(l) = contour_level {
                cfg.contour_level = *l;
            }
            cfg.validate()?;
            let report = run_bounds_report(&cfg)?;
            let text = render(&cfg, &report, bounds_csv(&report))?;
            write_report(cfg.out.as_deref(), &text)
        }
        Cmd::Coherence { n, basis } => {
            let id: BasisId = basis.parse()?;
            let value = Orthobasis::new(id, *n)?.coherence()?;
            println!("mu({}, n={}) = {}", id.name(), n, value.mu);
            Ok(())
        }
        Cmd::Sense(common) => cmd_sense(common),
        Cmd::Recover { input, common } => cmd_recover(input, common),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version requests are not failures
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
