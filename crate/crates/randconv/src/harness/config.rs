//! Experiment configuration: a flat key-value text file plus CLI overrides,
//! flags winning over file values.

use crate::bases::BasisId;
use crate::analysis::Ensemble;
use crate::error::{Error, Result};
use crate::operators::{make_subsample_set, SubsampleScheme, SubsampleSet};
use crate::recovery::SolverConfig;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExperimentKind {
    PhaseTransition,
    Concentration,
    Certificate,
    CodedAperture,
    Bounds,
}

impl FromStr for ExperimentKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "phase-transition" => Ok(ExperimentKind::PhaseTransition),
            "concentration" => Ok(ExperimentKind::Concentration),
            "certificate" => Ok(ExperimentKind::Certificate),
            "coded-aperture" => Ok(ExperimentKind::CodedAperture),
            "bounds" => Ok(ExperimentKind::Bounds),
            other => Err(Error::invalid(format!("unknown experiment '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::invalid(format!("unknown format '{other}'"))),
        }
    }
}

/// Subsampling selection: equal interval, or explicit indices loaded from a
/// file (one index per line).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum OmegaSpec {
    Equal,
    Explicit(PathBuf),
}

impl FromStr for OmegaSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("equal") {
            Ok(OmegaSpec::Equal)
        } else if let Some(path) = s.strip_prefix("explicit:") {
            Ok(OmegaSpec::Explicit(PathBuf::from(path)))
        } else {
            Err(Error::invalid(format!(
                "omega must be 'equal' or 'explicit:<file>', got '{s}'"
            )))
        }
    }
}

impl OmegaSpec {
    pub fn build(&self, n: usize, m: usize) -> Result<SubsampleSet> {
        match self {
            OmegaSpec::Equal => make_subsample_set(n, m, SubsampleScheme::EqualInterval, None),
            OmegaSpec::Explicit(path) => {
                let text = std::fs::read_to_string(path)?;
                let indices = text
                    .lines()
                    .map(str::trim)
                    .filter(|l| !l.is_empty() && !l.starts_with('#'))
                    .map(|l| {
                        l.parse::<usize>()
                            .map_err(|_| Error::invalid(format!("bad index line '{l}'")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                make_subsample_set(n, m, SubsampleScheme::ExplicitFixed, Some(indices))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub n: usize,
    pub basis: BasisId,
    pub ensemble: Ensemble,
    pub omega: OmegaSpec,
    pub m_grid: Vec<usize>,
    pub s_grid: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub solver: SolverConfig,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
    pub delta: f64,
    pub constant_k: f64,
    /// Concentration study deviation grid.
    pub r_grid: Vec<f64>,
    /// Coded-aperture inputs.
    pub image: Option<PathBuf>,
    pub rate: usize,
    pub noise_db: Option<f64>,
    /// Success level defining the phase-transition contour.
    pub contour_level: f64,
    /// Phase-transition CSV consumed by the bounds report's K fit.
    pub phase_data: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: ExperimentKind::PhaseTransition,
            n: 256,
            basis: BasisId::Spikes,
            ensemble: Ensemble::Gaussian,
            omega: OmegaSpec::Equal,
            m_grid: vec![16, 32, 64, 128],
            s_grid: vec![1, 2, 4, 8],
            trials: 100,
            seed: 1,
            solver: SolverConfig::default(),
            out: None,
            format: OutputFormat::Csv,
            delta: 0.1,
            constant_k: 1.0,
            r_grid: vec![0.3, 0.4, 0.5, 0.7, 1.0, 1.5, 2.0, 3.0],
            image: None,
            rate: 4,
            noise_db: Some(30.0),
            contour_level: 0.9,
            phase_data: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m_grid.is_empty() || self.s_grid.is_empty() {
            return Err(Error::invalid("grids must be non-empty"));
        }
        if self.trials < 1 {
            return Err(Error::invalid("trials must be >= 1"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::invalid("delta must be in (0,1)"));
        }
        self.solver.validate()
    }

    /// Loads a flat `key = value` config file.
    pub fn from_file(path: &Path) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        cfg.apply_kv(&parse_kv(&std::fs::read_to_string(path)?)?)?;
        Ok(cfg)
    }

    /// Applies key-value overrides; unknown keys are rejected.
    pub fn apply_kv(&mut self, kv: &BTreeMap<String, String>) -> Result<()> {
        for (key, value) in kv {
            match key.as_str() {
                "experiment" => self.experiment = value.parse()?,
                "n" => self.n = parse_num(key, value)?,
                "basis" => self.basis = value.parse()?,
                "ensemble" => self.ensemble = value.parse()?,
                "omega" => self.omega = value.parse()?,
                "m_grid" => self.m_grid = parse_list(key, value)?,
                "s_grid" => self.s_grid = parse_list(key, value)?,
                "trials" => self.trials = parse_num(key, value)?,
                "seed" => self.seed = parse_num(key, value)?,
                "out" => self.out = Some(PathBuf::from(value)),
                "format" => self.format = value.parse()?,
                "delta" => self.delta = parse_num(key, value)?,
                "k" => self.constant_k = parse_num(key, value)?,
                "r_grid" => self.r_grid = parse_list(key, value)?,
                "image" => self.image = Some(PathBuf::from(value)),
                "rate" => self.rate = parse_num(key, value)?,
                "noise_db" => {
                    self.noise_db = if value.eq_ignore_ascii_case("none") {
                        None
                    } else {
                        Some(parse_num(key, value)?)
                    }
                }
                "contour_level" => self.contour_level = parse_num(key, value)?,
                "phase_data" => self.phase_data = Some(PathBuf::from(value)),
                "max_iters" => self.solver.max_iterations = parse_num(key, value)?,
                "tol" => {
                    let t: f64 = parse_num(key, value)?;
                    self.solver.primal_tolerance = t;
                    self.solver.dual_tolerance = t;
                }
                "penalty" => self.solver.penalty = parse_num(key, value)?,
                "cg_tol" => self.solver.inner_cg_tolerance = parse_num(key, value)?,
                "cg_max_iters" => self.solver.inner_cg_max_iters = parse_num(key, value)?,
                other => return Err(Error::invalid(format!("unknown config key '{other}'"))),
            }
        }
        Ok(())
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::invalid(format!("bad value '{value}' for key '{key}'")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| parse_num(key, v))
        .collect()
}

/// Parses `key = value` lines; '#' starts a comment.
pub fn parse_kv(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::invalid(format!("line {}: expected key = value", lineno + 1)))?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_file_and_overrides() {
        let text = "\
# comment
experiment = concentration
n = 128
basis = haar
m_grid = 16, 32
tol = 1e-6
";
        let kv = parse_kv(text).unwrap();
        let mut cfg = ExperimentConfig::default();
        cfg.apply_kv(&kv).unwrap();
        assert_eq!(cfg.experiment, ExperimentKind::Concentration);
        assert_eq!(cfg.n, 128);
        assert_eq!(cfg.basis, BasisId::Haar);
        assert_eq!(cfg.m_grid, vec![16, 32]);
        assert_eq!(cfg.solver.primal_tolerance, 1e-6);

        // flags win over file values
        let mut flags = BTreeMap::new();
        flags.insert("n".to_string(), "64".to_string());
        cfg.apply_kv(&flags).unwrap();
        assert_eq!(cfg.n, 64);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_lines() {
        let mut cfg = ExperimentConfig::default();
        let mut kv = BTreeMap::new();
        kv.insert("frobnicate".to_string(), "1".to_string());
        assert!(cfg.apply_kv(&kv).is_err());
        assert!(parse_kv("just words\n").is_err());
    }

    #[test]
    fn omega_spec_parsing() {
        assert_eq!("equal".parse::<OmegaSpec>().unwrap(), OmegaSpec::Equal);
        assert!(matches!(
            "explicit:idx.txt".parse::<OmegaSpec>().unwrap(),
            OmegaSpec::Explicit(_)
        ));
        assert!("random".parse::<OmegaSpec>().is_err());
    }

    #[test]
    fn validation() {
        let mut cfg = ExperimentConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.trials = 0;
        assert!(cfg.validate().is_err());
    }
}
