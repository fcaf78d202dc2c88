//! Prepare the two-electron ground state with a modest walker count and
//! print the convergence trace plus the final ensemble energy.
//!
//! Run with `cargo run --release --example ground_state`.

use tdqmc::engine::{prepare_ground_state, PropagationConfig};
use tdqmc::estimators::energy_estimate;
use tdqmc::grid::Grid1D;
use tdqmc::kde::Alpha;
use tdqmc::potentials::SoftCoreParams;

fn main() -> tdqmc::Result<()> {
    let grid = Grid1D::new(-30.0, 30.0, 256)?;
    let params = SoftCoreParams::default();
    let cfg = PropagationConfig::complex_time(400);

    // alpha scales the Silverman bandwidth into the correlation length
    let alpha = Alpha::Scale(8.0);
    let n_walkers = 2_000;

    println!("relaxing {n_walkers} walkers per electron in complex time...");
    let (state, trace) = prepare_ground_state(alpha, n_walkers, grid, params, &cfg, 42)?;

    println!("step    energy      stderr");
    for ((&s, &e), &se) in trace
        .energy_steps
        .iter()
        .zip(&trace.energies)
        .zip(&trace.energy_stderrs)
        .step_by(8)
    {
        println!("{s:>5} {e:>10.5} {se:>10.5}");
    }

    let est = state.density_estimate()?;
    let (energy, stderr) = energy_estimate(&est, &params)?;
    println!("\nfinal ensemble energy: {energy:.5} +/- {stderr:.5}");
    println!("steady correlation length: {:.4}", trace.steady_nqcl);
    Ok(())
}
