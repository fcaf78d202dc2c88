//! Kernel density estimation over a walker cloud: Silverman bandwidth
//! selection, pointwise density and gradient evaluation, and the smoothed
//! effective electron-electron potential built from the same kernel.
//!
//! Run with `cargo run --release --example kernel_density`.

use rand::prelude::*;
use rand_distr::StandardNormal;
use tdqmc::kde::{kde_bandwidth, Alpha, BandwidthRule, DensityEstimate};
use tdqmc::potentials::{effective_v_ee, KernelWidth, SoftCoreParams};

fn main() -> tdqmc::Result<()> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    let m = 5_000;

    // two correlated clouds standing in for the two electrons
    let e0: Vec<f64> = (0..m).map(|_| rng.sample::<f64, _>(StandardNormal) * 0.7).collect();
    let e1: Vec<f64> = e0
        .iter()
        .map(|&x| -0.3 * x + rng.sample::<f64, _>(StandardNormal) * 0.6)
        .collect();

    let bw0 = kde_bandwidth(&e0, BandwidthRule::RobustMin)?;
    let bw1 = kde_bandwidth(&e1, BandwidthRule::RobustMin)?;
    println!("Silverman bandwidths: {bw0:.4}, {bw1:.4}");

    let est = DensityEstimate::new(vec![e0.clone(), e1], vec![bw0, bw1], Alpha::Scale(8.0));
    println!("\n  x      rho(x, 0)   d(rho)/dx");
    for &x in &[-2.0, -1.0, 0.0, 1.0, 2.0] {
        let r = [x, 0.0];
        println!("{x:>5.1} {:>12.5e} {:>12.5e}", est.density(&r), est.gradient(&r, 0));
    }

    // the same Gaussian kernel smooths the pair potential: each guide wave
    // sees the other cloud weighted by distance to its reference walker
    let params = SoftCoreParams::default();
    let x_eval: Vec<f64> = (-20..=20).map(|i| 0.25 * i as f64).collect();
    let k_ref = 0;
    let smoothed = effective_v_ee(&x_eval, &e0, k_ref, KernelWidth::Length(1.35), &params)?;
    let pairwise = effective_v_ee(&x_eval, &e0, k_ref, KernelWidth::Length(0.0), &params)?;
    let hartree = effective_v_ee(&x_eval, &e0, k_ref, KernelWidth::MeanField, &params)?;

    println!("\n  x    smoothed   pairwise   mean-field");
    for i in (0..x_eval.len()).step_by(5) {
        println!(
            "{:>5.2} {:>9.5} {:>9.5} {:>9.5}",
            x_eval[i], smoothed[i], pairwise[i], hartree[i]
        );
    }
    Ok(())
}
