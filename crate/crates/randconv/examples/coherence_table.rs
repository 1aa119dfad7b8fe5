//! Fourier coherence mu(F, Psi) for every basis at a few dimensions.
//! mu drives the measurement-count formulas quadratically: spikes sit at the
//! optimum mu = 1, the real Fourier basis at the unusable extreme sqrt(n).

use randconv::bases::{BasisId, Orthobasis};

fn main() -> randconv::Result<()> {
    let bases = [
        BasisId::Spikes,
        BasisId::Haar,
        BasisId::Dct,
        BasisId::FourierReal,
    ];
    println!("{:>14} {:>10} {:>10} {:>10}", "basis", "n=64", "n=256", "n=1024");
    for id in bases {
        let mus: Vec<f64> = [64, 256, 1024]
            .iter()
            .map(|&n| Ok(Orthobasis::new(id, n)?.coherence()?.mu))
            .collect::<randconv::Result<_>>()?;
        println!(
            "{:>14} {:>10.4} {:>10.4} {:>10.4}",
            id.name(),
            mus[0],
            mus[1],
            mus[2]
        );
    }
    println!("(sqrt(n) = 8, 16, 32)");
    Ok(())
}
