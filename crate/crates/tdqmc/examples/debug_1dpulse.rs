//! Scratch diagnostic: in-window dipole phase of a single 1D wave in the
//! guide potential under the full-strength pulse.

use num_complex::Complex64;
use tdqmc::engine::{phase_factor, SplitOperator1D, TimeStep};
use tdqmc::grid::{ComplexField1D, Grid1D};
use tdqmc::potentials::{effective_v_ee, Envelope, KernelWidth, LaserParams, SoftCoreParams};

fn main() -> tdqmc::Result<()> {
    let p = SoftCoreParams::default();
    let grid = Grid1D::new(-120.0, 120.0, 1024)?;
    let xs: Vec<f64> = grid.points().collect();
    let v_en: Vec<f64> = xs.iter().map(|&x| p.v_en(x)).collect();
    use rand::prelude::*;
    use rand_distr::Normal;
    let mut rng = rand::rngs::StdRng::seed_from_u64(42);
    let normal = Normal::new(0.0, 0.7).unwrap();
    let mut others: Vec<f64> = (0..2000).map(|_| normal.sample(&mut rng)).collect();
    others[0] = 0.3;
    let vee = effective_v_ee(&xs, &others, 0, KernelWidth::Length(1.35), &p)?;
    let pot: Vec<f64> = v_en.iter().zip(&vee).map(|(&a, &b)| a + b).collect();

    // relax to the guide ground state
    let relax = SplitOperator1D::new(grid, TimeStep::Imaginary(0.01));
    let mut w = ComplexField1D::from_fn(grid, |x| Complex64::new((-0.3 * x * x).exp(), 0.0))
        .normalized()?;
    let rp = relax.half_phase(&pot);
    let mut scratch = relax.make_scratch();
    for _ in 0..20000 {
        relax.step(w.values_mut(), &rp, &mut scratch);
        w.normalize()?;
    }
    println!("guide ground energy {:.4}", relax.energy(&w, &pot));

    let laser = LaserParams {
        peak_amplitude: 0.15,
        carrier_frequency: 0.153,
        n_cycles: 6,
        envelope: Envelope::Sin2,
        t_start: 0.0,
    };
    let dt = 0.05;
    let op = SplitOperator1D::new(grid, TimeStep::Real(dt));
    let tau = op.tau();
    let mask = tdqmc::engine::AbsorberParams::default().mask_on_grid(&grid);
    let mut scratch = op.make_scratch();
    let h = grid.spacing();
    let n = (laser.duration() / dt).ceil() as usize;
    let mut t = 0.0;
    for s in 0..n {
        let e = laser.field(t + 0.5 * dt);
        let phase: Vec<Complex64> = xs
            .iter()
            .zip(&pot)
            .map(|(&x, &v)| phase_factor(0.5 * (v + x * e), tau))
            .collect();
        op.step(w.values_mut(), &phase, &mut scratch);
        for (v, &m) in w.values_mut().iter_mut().zip(&mask) {
            *v *= m;
        }
        t += dt;
        if s % 25 == 24 {
            let (mut m0, mut m1, mut tot) = (0.0, 0.0, 0.0);
            for (x, v) in xs.iter().zip(w.values()) {
                let pr = v.norm_sqr() * h;
                tot += pr;
                if x.abs() <= 12.0 {
                    m0 += pr;
                    m1 += x * pr;
                }
            }
            println!(
                "t={t:7.2} E={:+.4} c_in={:+.4} m_in={:.3} norm={:.3}",
                laser.field(t),
                m1 / m0,
                m0,
                tot
            );
        }
    }
    Ok(())
}
