//! Empirical energy concentration of the subsampled measurements against
//! the closed-form tail bound: Pr(|R - 1| > r) vs the Gaussian fixed-vector
//! formula, where R = ||Ax||^2 / m for a unit-energy sparse x.

use randconv::analysis::{empirical_concentration, Ensemble};
use randconv::bases::{BasisId, Orthobasis};
use randconv::operators::{make_subsample_set, SensingOperator, SubsampleScheme};

fn main() -> randconv::Result<()> {
    let (n, m, s) = (256, 64, 4);
    let basis = Orthobasis::new(BasisId::Spikes, n)?;
    let r_grid = [0.3, 0.5, 0.7, 1.0, 1.5, 2.0];
    let table = empirical_concentration(
        n,
        s,
        &basis,
        Ensemble::Gaussian,
        |h| {
            SensingOperator::new(
                h,
                make_subsample_set(n, m, SubsampleScheme::EqualInterval, None)?,
            )
        },
        m,
        &r_grid,
        1000,
        13,
    )?;

    println!("mean R over {} trials: {:.4}", table.trials, table.mean_r);
    println!("{:>5} {:>10} {:>10} {:>7}", "r", "empirical", "bound", "valid");
    for row in &table.rows {
        println!(
            "{:>5.2} {:>10.4} {:>10.4} {:>7}",
            row.r, row.empirical, row.bound, row.valid
        );
    }
    Ok(())
}
