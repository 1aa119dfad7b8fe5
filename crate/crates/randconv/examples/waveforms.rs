//! The three waveform generators and their whiteness: unit mean-square
//! energy and vanishing lag correlations, including the sinc-filtered
//! bandlimited waveform that stands in for the continuous-time case.

use randconv::signal::{
    gen_bandlimited_waveform, gen_bernoulli_waveform, gen_gaussian_waveform, Waveform,
};

fn stats(label: &str, w: &Waveform) {
    let n = w.len() as f64;
    let energy: f64 = w.samples.iter().map(|v| v * v).sum::<f64>() / n;
    let lag1: f64 = (0..w.len())
        .map(|i| w.samples[i] * w.samples[(i + 1) % w.len()])
        .sum::<f64>()
        / n;
    println!("{label:>12}: mean square {energy:.4}, lag-1 correlation {lag1:+.4}");
}

fn main() -> randconv::Result<()> {
    let n = 4096;
    stats("gaussian", &gen_gaussian_waveform(n, 1)?);
    stats("bernoulli", &gen_bernoulli_waveform(n, 2)?);
    stats("bandlimited", &gen_bandlimited_waveform(n, 4, 3)?);
    Ok(())
}
