//! Dual certificates: for each trial, build the dual vector interpolating
//! the planted sign pattern and compare its verdict with the solver outcome.
//! A certified trial is guaranteed to recover exactly.

use randconv::bases::{BasisId, Orthobasis};
use randconv::operators::{make_subsample_set, SensingOperator, SubsampleScheme};
use randconv::recovery::{
    adjudicate, basis_pursuit, dual_certificate, SolverConfig, DEFAULT_EXACT_TOL,
};
use randconv::signal::{gen_gaussian_waveform, gen_sparse_instance, trial_seed, MagnitudeLaw};

fn main() -> randconv::Result<()> {
    let (n, m, s) = (64, 32, 3);
    let basis = Orthobasis::new(BasisId::Spikes, n)?;
    let mut certified = 0;
    let mut exact = 0;
    let trials = 40u64;
    for t in 0..trials {
        let h = gen_gaussian_waveform(n, trial_seed(100, t))?;
        let omega = make_subsample_set(n, m, SubsampleScheme::EqualInterval, None)?;
        let op = SensingOperator::new(h, omega)?;
        let inst = gen_sparse_instance(n, s, MagnitudeLaw::Unit, "spikes", trial_seed(101, t))?;

        let cert = dual_certificate(&op, &basis, &inst.support, &inst.signs)?;
        let y = op.apply(&basis.synthesize(&inst.densify())?)?;
        let result = basis_pursuit(&y, &op, &basis, &SolverConfig::default())?;
        let flags = adjudicate(&result.alpha_hat, &inst, DEFAULT_EXACT_TOL)?;
        if cert.certifies() {
            certified += 1;
            assert!(flags.exact, "a certified instance must recover exactly");
        }
        if flags.exact {
            exact += 1;
        }
        if t < 5 {
            println!(
                "trial {t}: sup|pi| off support = {:.4}, certifies = {}, solver exact = {}",
                cert.sup_offsupport,
                cert.certifies(),
                flags.exact
            );
        }
    }
    println!("...");
    println!("{certified}/{trials} certified, {exact}/{trials} solver-exact");
    Ok(())
}
