//! End-to-end single instance: white waveform, circulant sensing at 4x
//! subsampling, basis pursuit, adjudication against the planted truth.

use randconv::bases::{BasisId, Orthobasis};
use randconv::operators::{make_subsample_set, SensingOperator, SubsampleScheme};
use randconv::recovery::{adjudicate, basis_pursuit, SolverConfig, DEFAULT_EXACT_TOL};
use randconv::signal::{gen_gaussian_waveform, gen_sparse_instance, MagnitudeLaw};

fn main() -> randconv::Result<()> {
    let (n, m, s) = (256, 64, 4);
    let h = gen_gaussian_waveform(n, 42)?;
    let omega = make_subsample_set(n, m, SubsampleScheme::EqualInterval, None)?;
    let op = SensingOperator::new(h, omega)?;
    let basis = Orthobasis::new(BasisId::Spikes, n)?;

    let inst = gen_sparse_instance(n, s, MagnitudeLaw::Uniform(0.5, 2.0), "spikes", 43)?;
    println!("planted support: {:?}", inst.support.indices());

    let x = basis.synthesize(&inst.densify())?;
    let y = op.apply(&x)?;
    println!("sensed {} samples down to {} measurements", n, y.len());

    let result = basis_pursuit(&y, &op, &basis, &SolverConfig::default())?;
    let flags = adjudicate(&result.alpha_hat, &inst, DEFAULT_EXACT_TOL)?;
    println!(
        "solved in {} iterations (converged: {})",
        result.iterations, result.converged
    );
    println!(
        "exact: {}, relative error: {:.3e}",
        flags.exact, flags.relative_error
    );
    Ok(())
}
