//! Scratch diagnostic: effective binding energy of a guide wave vs the true
//! single-electron removal energy of the model atom.

use num_complex::Complex64;
use tdqmc::engine::{SplitOperator1D, TimeStep};
use tdqmc::grid::{ComplexField1D, Grid1D};
use tdqmc::potentials::{effective_v_ee, KernelWidth, SoftCoreParams};

fn ground_energy(grid: Grid1D, pot: &[f64]) -> f64 {
    let relax = SplitOperator1D::new(grid, TimeStep::Imaginary(0.01));
    let mut w = ComplexField1D::from_fn(grid, |x| Complex64::new((-0.3 * x * x).exp(), 0.0))
        .normalized()
        .unwrap();
    let rp = relax.half_phase(pot);
    let mut scratch = relax.make_scratch();
    for _ in 0..20000 {
        relax.step(w.values_mut(), &rp, &mut scratch);
        w.normalize().unwrap();
    }
    relax.energy(&w, pot)
}

fn main() -> tdqmc::Result<()> {
    let p = SoftCoreParams::default();
    let grid = Grid1D::new(-60.0, 60.0, 1024)?;
    let xs: Vec<f64> = grid.points().collect();

    let v_en: Vec<f64> = xs.iter().map(|&x| p.v_en(x)).collect();
    let e_ion = ground_energy(grid, &v_en);
    println!("He+ ground (bare v_en): {e_ion:.4}; removal energy from He: {:.4}", e_ion + 2.3995);

    // guide-wave potential: v_en + effective v_ee against a bound partner
    // cloud (normal, std 0.7), reference walker at 0.3, several sigmas
    use rand::prelude::*;
    use rand_distr::Normal;
    let mut rng = rand::rngs::StdRng::seed_from_u64(42);
    let normal = Normal::new(0.0, 0.7).unwrap();
    let others: Vec<f64> = (0..2000).map(|_| normal.sample(&mut rng)).collect();
    let mut others = others;
    others[0] = 0.3; // reference walker
    for sigma in [0.0, 0.5, 1.35, 3.0, 6.0] {
        let vee = effective_v_ee(&xs, &others, 0, KernelWidth::Length(sigma), &p)?;
        let pot: Vec<f64> = v_en.iter().zip(&vee).map(|(&a, &b)| a + b).collect();
        let e = ground_energy(grid, &pot);
        println!("sigma={sigma:4.2}: guide ground {e:.4}, binding {:.4}", -e);
    }
    Ok(())
}
