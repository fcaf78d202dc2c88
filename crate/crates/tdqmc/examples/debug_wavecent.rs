//! Scratch diagnostic: do the guide waves slosh differently from the
//! walker cloud during the pulse?

use tdqmc::engine::{self, PropagationConfig};
use tdqmc::grid::Grid1D;
use tdqmc::kde::{Alpha, BandwidthRule};
use tdqmc::potentials::{Envelope, LaserParams, SoftCoreParams};

fn main() -> tdqmc::Result<()> {
    let params = SoftCoreParams::default();
    let laser = LaserParams {
        peak_amplitude: 0.15,
        carrier_frequency: 0.153,
        n_cycles: 6,
        envelope: Envelope::Sin2,
        t_start: 0.0,
    };
    let rt_dt = 0.05;
    let n_steps = (laser.duration() / rt_dt).ceil() as usize;
    let grid = Grid1D::new(-120.0, 120.0, 1024)?;
    let mut gcfg = PropagationConfig::complex_time(400);
    gcfg.trace_stride = 0;
    let (mut state, _) = engine::prepare_ground_state(
        Alpha::Scale(8.0),
        500,
        grid,
        params,
        &gcfg,
        0xACCE_57ED ^ 0x11,
    )?;
    state.set_bandwidth_rule(BandwidthRule::PlainStd);
    state.set_bandwidth_window(Some(20.0));
    let mut rt_cfg = PropagationConfig::real_time(n_steps);
    rt_cfg.dt = rt_dt;
    let h = grid.spacing();
    let xs: Vec<f64> = grid.points().collect();
    engine::propagate_realtime(&mut state, Some(&laser), &rt_cfg, |step, st| {
        if step % 25 != 0 && step != n_steps as u64 {
            return Ok(());
        }
        // norm-weighted mean wave centroid, window |x|<=12
        let m = st.n_walkers();
        let (mut w0, mut w1) = (0.0, 0.0);
        for i in 0..2 {
            for k in 0..m {
                let wave = st.wave(i, k);
                for (x, v) in xs.iter().zip(wave.values()) {
                    if x.abs() <= 12.0 {
                        let p = v.norm_sqr() * h;
                        w0 += p;
                        w1 += x * p;
                    }
                }
            }
        }
        // walker centroid, window |x|<=12
        let (mut c0, mut c1) = (0.0f64, 0.0f64);
        for i in 0..2 {
            for &x in &st.walkers().positions()[i] {
                if x.abs() <= 12.0 {
                    c0 += 1.0;
                    c1 += x;
                }
            }
        }
        println!(
            "t={:7.2} E={:+.4} wave_c={:+.4} walker_c={:+.4} in_frac={:.3}",
            st.t(),
            laser.field(st.t()),
            w1 / w0,
            c1 / c0,
            c0 / (2.0 * m as f64),
        );
        Ok(())
    })?;
    Ok(())
}
