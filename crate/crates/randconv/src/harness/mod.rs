//! Experiment orchestration: configuration, phase-transition and
//! concentration studies, certificate sweeps, the coded-aperture demo, and
//! CSV/JSON persistence.
//!
//! Every experiment is deterministic per master seed: each (cell, trial)
//! work item derives its own RNG stream, so output files are byte-identical
//! across reruns and worker counts.

mod coded_aperture;
mod config;
mod experiments;
mod pgm;

pub use coded_aperture::{
    run_coded_aperture, synthetic_scene, CodedApertureReport, Conv2dModel, Haar2d, Image2d,
};
pub use config::{ExperimentConfig, ExperimentKind, OmegaSpec, OutputFormat};
pub use experiments::{
    bounds_csv, certificate_csv, concentration_csv, contour, parse_phase_csv, phase_csv, render,
    run_bounds_report, run_certificate, run_concentration, run_phase_transition, write_report,
    BoundsReport, BoundsRow, CertificateTrial, PhaseTransitionCell, PhaseTransitionGrid,
};
pub use pgm::{read_pgm, write_pgm};
