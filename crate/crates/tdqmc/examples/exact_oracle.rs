//! Solve the full two-electron problem on a 2D grid by imaginary-time
//! relaxation. This is the reference every Monte Carlo result is checked
//! against: it gives the exact ground-state energy and density.
//!
//! Run with `cargo run --release --example exact_oracle`.

use tdqmc::grid::Grid2D;
use tdqmc::oracle::{exact_density, exact_ground_state};
use tdqmc::potentials::SoftCoreParams;

fn main() -> tdqmc::Result<()> {
    let params = SoftCoreParams::default();

    // coarse grid: fast, already accurate to a few mHa
    let grid = Grid2D::square(-15.0, 15.0, 256)?;
    println!("relaxing on a {n}x{n} grid...", n = 256);
    let (field, energy) = exact_ground_state(grid, &params, 0.02, 1e-10, 20_000)?;
    println!("exact ground-state energy: {energy:.5}");

    let density = exact_density(&field);
    println!("density mass (should be 1): {:.9}", density.integral());

    // diagonal profile: the e-e repulsion dents the density along x1 = x2
    let n = grid.axis1.n_points();
    println!("\n  x      rho(x, x)     rho(x, -x)");
    for i in (n / 2..n).step_by(16) {
        let x = grid.axis1.point(i);
        let j_mirror = n - 1 - i;
        println!(
            "{x:>5.1}  {:>12.6e}  {:>12.6e}",
            density.at(i, i),
            density.at(i, j_mirror)
        );
    }
    Ok(())
}
