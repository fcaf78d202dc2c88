//! Drive the prepared ground state with a few-cycle laser pulse and watch
//! ionization: the survival probability drops and the correlation length
//! swells as the walker cloud spreads.
//!
//! This example keeps itself light by skipping the exact-reference
//! comparison; the `realtime` CLI mode runs the full lockstep comparison
//! including the MISE column.
//!
//! Run with `cargo run --release --example strong_field`.

use tdqmc::engine::{prepare_ground_state, propagate_realtime, PropagationConfig};
use tdqmc::estimators::survival_probability;
use tdqmc::grid::Grid1D;
use tdqmc::kde::Alpha;
use tdqmc::potentials::{Envelope, LaserParams, SoftCoreParams};

fn main() -> tdqmc::Result<()> {
    let grid = Grid1D::new(-120.0, 120.0, 512)?;
    let params = SoftCoreParams::default();
    let alpha = Alpha::Scale(8.0);

    println!("preparing the ground state...");
    let mut ground_cfg = PropagationConfig::complex_time(400);
    ground_cfg.trace_stride = 0;
    let (mut state, _) = prepare_ground_state(alpha, 500, grid, params, &ground_cfg, 11)?;

    let laser = LaserParams {
        peak_amplitude: 0.15,
        carrier_frequency: 0.153,
        n_cycles: 3,
        envelope: Envelope::Sin2,
        t_start: 0.0,
    };
    let n_steps = (laser.duration() / 0.05).ceil() as usize;
    let mut cfg = PropagationConfig::real_time(n_steps);
    cfg.dt = 0.05;

    println!("propagating through a {}-cycle pulse ({n_steps} steps)...\n", laser.n_cycles);
    println!("    t     field    corr.len  survival");
    propagate_realtime(&mut state, Some(&laser), &cfg, |step, st| {
        if step % 200 == 0 || step == n_steps as u64 {
            let bw = st.compute_bandwidths()?;
            let corr = match st.alpha() {
                Alpha::Scale(a) => {
                    bw.bandwidths().iter().map(|&s| a * s).sum::<f64>()
                        / st.n_electrons() as f64
                }
                Alpha::MeanField => f64::INFINITY,
            };
            println!(
                "{:>7.1} {:>8.4} {:>9.3} {:>9.4}",
                st.t(),
                laser.field(st.t()),
                corr,
                survival_probability(st.walkers(), 10.0)
            );
        }
        Ok(())
    })?;
    Ok(())
}
