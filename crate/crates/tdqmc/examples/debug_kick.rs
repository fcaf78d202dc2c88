//! Scratch diagnostic: exact transition frequency via a dipole kick, and
//! linear response phase at the production carrier frequency.

use num_complex::Complex64;
use tdqmc::grid::Grid2D;
use tdqmc::oracle;
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

fn main() -> tdqmc::Result<()> {
    let params = SoftCoreParams::default();
    let grid = Grid2D::square(-15.0, 15.0, 128)?;
    let (ground, _) = oracle::exact_ground_state(grid, &params, 0.02, 1e-10, 20_000)?;
    let dt = 0.05;

    // dipole kick: psi -> exp(i k (x1+x2)) psi, then free ringing at the
    // dominant transition frequency
    let mut f = ground.clone();
    {
        let n2 = grid.axis2.n_points();
        let vals = f.values_mut();
        for (i, x1) in grid.axis1.points().enumerate() {
            for (j, x2) in grid.axis2.points().enumerate() {
                vals[i * n2 + j] *= Complex64::new(0.0, 0.05 * (x1 + x2)).exp();
            }
        }
    }
    let mut prop = oracle::ExactPropagator::new(grid, &params, dt, None);
    println!("-- kick response <x1>(t)");
    for s in 0..1200u64 {
        prop.step(&mut f, None)?;
        if s % 10 == 9 {
            println!("t={:6.2} <x1>={:+.5}", prop.t(), mean_x1(&f));
        }
    }

    // linear response at the production carrier
    let laser = LaserParams {
        peak_amplitude: 0.005,
        carrier_frequency: 0.153,
        n_cycles: 4,
        envelope: Envelope::Sin2,
        t_start: 0.0,
    };
    let mut f = ground.clone();
    let mut prop = oracle::ExactPropagator::new(grid, &params, dt, None);
    println!("-- laser response at w=0.153");
    let n = (laser.duration() / dt).ceil() as u64;
    for s in 0..n {
        prop.step(&mut f, Some(&laser))?;
        if s % 20 == 19 {
            println!("t={:6.2} E={:+.5} <x1>={:+.5}", prop.t(), laser.field(prop.t()), mean_x1(&f));
        }
    }
    Ok(())
}
