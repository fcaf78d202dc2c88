//! Scratch diagnostic: dipole response sign of the 2D propagator.
//! (a) laser path of ExactPropagator; (b) the same uniform field baked
//! statically into the half phase; (c) 1D single-particle splitop with the
//! same laser. All three should push <x> opposite to E.

use num_complex::Complex64;
use tdqmc::engine::{phase_factor, SplitOperator1D, TimeStep};
use tdqmc::grid::{ComplexField1D, Grid1D, Grid2D};
use tdqmc::oracle::{self, SplitOperator2D};
use tdqmc::potentials::{Envelope, LaserParams, SoftCoreParams};

fn mean_x1(field: &tdqmc::grid::ComplexField2D) -> f64 {
    let g = field.grid();
    let n2 = g.axis2.n_points();
    let (mut m0, mut m1) = (0.0, 0.0);
    for (i, x) in g.axis1.points().enumerate() {
        for j in 0..n2 {
            let p = field.at(i, j).norm_sqr();
            m0 += p;
            m1 += x * p;
        }
    }
    m1 / m0
}

fn mean_x(field: &ComplexField1D) -> f64 {
    let h = field.grid().spacing();
    let (mut m0, mut m1) = (0.0, 0.0);
    for (x, v) in field.grid().points().zip(field.values()) {
        let p = v.norm_sqr() * h;
        m0 += p;
        m1 += x * p;
    }
    m1 / m0
}

fn main() -> tdqmc::Result<()> {
    let params = SoftCoreParams::default();
    let grid = Grid2D::square(-15.0, 15.0, 128)?;
    let (ground, e0) = oracle::exact_ground_state(grid, &params, 0.02, 1e-10, 20_000)?;
    println!("ground energy {e0:.5}");
    let dt = 0.05;
    let laser = LaserParams {
        peak_amplitude: 0.02,
        carrier_frequency: 0.05,
        n_cycles: 1,
        envelope: Envelope::Sin2,
        t_start: 0.0,
    };

    // (a) laser path
    let mut prop = oracle::ExactPropagator::new(grid, &params, dt, None);
    let mut f = ground.clone();
    println!("-- (a) ExactPropagator laser path");
    for s in 0..1200u64 {
        prop.step(&mut f, Some(&laser))?;
        if s % 100 == 99 {
            println!("t={:6.1} E={:+.5} <x1>={:+.4}", prop.t(), laser.field(prop.t()), mean_x1(&f));
        }
    }

    // (b) static field baked into the half phase
    let e_static = 0.01;
    let mut op = SplitOperator2D::new(grid, TimeStep::Real(dt));
    let mut pot = oracle::two_electron_potential(&grid, &params);
    {
        let n2 = grid.axis2.n_points();
        for (i, x1) in grid.axis1.points().enumerate() {
            for (j, x2) in grid.axis2.points().enumerate() {
                pot[i * n2 + j] += (x1 + x2) * e_static;
            }
        }
    }
    let half = op.half_phase(&pot);
    let mut f = ground.clone();
    println!("-- (b) static +x*E baked in, E={e_static}");
    for s in 0..400u64 {
        op.step(f.values_mut(), &half);
        if s % 50 == 49 {
            println!("t={:6.1} <x1>={:+.4}", (s + 1) as f64 * dt, mean_x1(&f));
        }
    }

    // (c) 1D single particle, same laser, explicit per-step phases
    let g1 = Grid1D::new(-15.0, 15.0, 128)?;
    let op1 = SplitOperator1D::new(g1, TimeStep::Real(dt));
    let v_en: Vec<f64> = g1.points().map(|x| params.v_en(x)).collect();
    // crude 1D ground state by imaginary-time relaxation
    let relax = SplitOperator1D::new(g1, TimeStep::Imaginary(0.02));
    let mut w = ComplexField1D::from_fn(g1, |x| Complex64::new((-0.5 * x * x).exp(), 0.0))
        .normalized()?;
    let rp = relax.half_phase(&v_en);
    let mut scratch = relax.make_scratch();
    for _ in 0..4000 {
        relax.step(w.values_mut(), &rp, &mut scratch);
        w.normalize()?;
    }
    println!("-- (c) 1D splitop laser path, <x0>={:+.4}", mean_x(&w));
    let mut scratch = op1.make_scratch();
    let tau = op1.tau();
    let mut t = 0.0;
    for s in 0..1200u64 {
        let e = laser.field(t + 0.5 * dt);
        let phase: Vec<Complex64> =
            g1.points().zip(&v_en).map(|(x, &v)| phase_factor(0.5 * (v + x * e), tau)).collect();
        op1.step(w.values_mut(), &phase, &mut scratch);
        t += dt;
        if s % 100 == 99 {
            println!("t={:6.1} E={:+.5} <x>={:+.4}", t, laser.field(t), mean_x(&w));
        }
    }
    Ok(())
}
