//! Small phase-transition sweep: exact-recovery rate over an (m, S) grid.

use randconv::harness::{run_phase_transition, ExperimentConfig, ExperimentKind};

fn main() -> randconv::Result<()> {
    let cfg = ExperimentConfig {
        experiment: ExperimentKind::PhaseTransition,
        n: 128,
        m_grid: vec![16, 32, 64],
        s_grid: vec![1, 2, 4, 8],
        trials: 25,
        seed: 7,
        ..Default::default()
    };
    let grid = run_phase_transition(&cfg)?;

    println!("{:>4} {:>4} {:>8} {:>12}", "S", "m", "success", "mean relerr");
    for cell in &grid.cells {
        println!(
            "{:>4} {:>4} {:>8.2} {:>12.3e}",
            cell.s, cell.m, cell.success_rate, cell.mean_relative_error
        );
    }
    Ok(())
}
