//! Save an ensemble to a checkpoint, reload it, and verify that resuming
//! reproduces a continuous run bit for bit. Checkpoints capture the grid,
//! walker positions, escape flags, and every guide wave.
//!
//! Run with `cargo run --release --example checkpoint_resume`.

use tdqmc::engine::{
    load_checkpoint, prepare_ground_state, propagate_realtime, save_checkpoint,
    PropagationConfig,
};
use tdqmc::grid::Grid1D;
use tdqmc::kde::Alpha;
use tdqmc::potentials::SoftCoreParams;

fn main() -> tdqmc::Result<()> {
    let grid = Grid1D::new(-40.0, 40.0, 256)?;
    let mut cfg = PropagationConfig::complex_time(200);
    cfg.trace_stride = 0;
    let (state, _) =
        prepare_ground_state(Alpha::Scale(8.0), 300, grid, SoftCoreParams::default(), &cfg, 5)?;

    let dir = std::env::temp_dir().join("tdqmc_checkpoint_example");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("ground.ckpt");
    save_checkpoint(&state, &path)?;
    println!(
        "saved {} walkers x {} electrons after step {} to {}",
        state.n_walkers(),
        state.n_electrons(),
        state.step_count(),
        path.display()
    );

    let rt = PropagationConfig::real_time(50);

    // continuous run: keep going from the in-memory state
    let mut continued = state;
    propagate_realtime(&mut continued, None, &rt, |_, _| Ok(()))?;

    // resumed run: reload from disk, then do the same steps
    let mut resumed = load_checkpoint(&path)?;
    println!("reloaded checkpoint at t = {}, step {}", resumed.t(), resumed.step_count());
    propagate_realtime(&mut resumed, None, &rt, |_, _| Ok(()))?;

    assert_eq!(
        continued.walkers().positions(),
        resumed.walkers().positions(),
        "resumed walker positions must match the continuous run exactly"
    );
    for e in 0..continued.n_electrons() {
        for k in 0..continued.n_walkers() {
            assert_eq!(continued.wave(e, k).values(), resumed.wave(e, k).values());
        }
    }
    println!("resumed run matches the continuous run bit for bit");
    Ok(())
}
