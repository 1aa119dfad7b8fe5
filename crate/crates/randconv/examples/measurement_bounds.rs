//! Measurement-count formulas: how many measurements the recovery theorems
//! ask for as sparsity grows, for both waveform ensembles, plus the sharper
//! Gaussian intermediate bound.

use randconv::analysis::{measurement_bound, Ensemble};

fn main() -> randconv::Result<()> {
    let (n, mu, delta, k) = (1024, 1.0, 0.1, 1.0);
    println!("n = {n}, mu = {mu}, delta = {delta}, K = {k}");
    println!(
        "{:>4} {:>16} {:>16} {:>16}",
        "S", "gaussian m", "gaussian sharp", "bernoulli m"
    );
    for s in [1usize, 2, 4, 8, 16, 32] {
        let g = measurement_bound(n, s, mu, delta, Ensemble::Gaussian, k)?;
        let b = measurement_bound(n, s, mu, delta, Ensemble::Bernoulli, k)?;
        println!(
            "{:>4} {:>16} {:>16} {:>16}",
            s,
            g.theorem_m,
            g.sharp_m.unwrap(),
            b.theorem_m
        );
    }
    Ok(())
}
