//! Exact two-electron reference: the full two-dimensional wave function
//! psi(x1, x2, t) propagated with the same Strang split-operator scheme as
//! the guide waves, so density comparisons measure the method difference and
//! not discretization mismatch.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

use crate::engine::{fft_momenta, phase_factor, AbsorberParams, TimeStep};
use crate::error::{Error, Result};
use crate::grid::{ComplexField2D, Grid2D, RealField2D};
use crate::potentials::{LaserParams, SoftCoreParams};

/// Strang stepper on a tensor-product 2D grid. Layout is row-major with
/// axis2 contiguous; the kinetic factor lives in the transposed (spectral)
/// layout so each step needs exactly two transposes.
pub struct SplitOperator2D {
    grid: Grid2D,
    fft1: Arc<dyn Fft<f64>>,
    ifft1: Arc<dyn Fft<f64>>,
    fft2: Arc<dyn Fft<f64>>,
    ifft2: Arc<dyn Fft<f64>>,
    /// exp(-i (k1^2 + k2^2)/2 tau) / (n1 n2), transposed layout.
    kinetic_t: Vec<Complex64>,
    tau: Complex64,
    buf: Vec<Complex64>,
}

impl SplitOperator2D {
    pub fn new(grid: Grid2D, step: TimeStep) -> Self {
        let (n1, n2) = (grid.axis1.n_points(), grid.axis2.n_points());
        let mut planner = FftPlanner::new();
        let fft1 = planner.plan_fft_forward(n1);
        let ifft1 = planner.plan_fft_inverse(n1);
        let fft2 = planner.plan_fft_forward(n2);
        let ifft2 = planner.plan_fft_inverse(n2);
        let tau = step.tau();
        let k1 = fft_momenta(n1, grid.axis1.spacing());
        let k2 = fft_momenta(n2, grid.axis2.spacing());
        let inv = 1.0 / (n1 * n2) as f64;
        let mut kinetic_t = Vec::with_capacity(n1 * n2);
        for &q2 in &k2 {
            for &q1 in &k1 {
                kinetic_t.push(phase_factor(0.5 * (q1 * q1 + q2 * q2), tau) * inv);
            }
        }
        let buf = vec![Complex64::new(0.0, 0.0); n1 * n2];
        SplitOperator2D { grid, fft1, ifft1, fft2, ifft2, kinetic_t, tau, buf }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn tau(&self) -> Complex64 {
        self.tau
    }

    pub fn half_phase(&self, potential: &[f64]) -> Vec<Complex64> {
        assert_eq!(potential.len(), self.grid.n_total());
        potential.iter().map(|&v| phase_factor(0.5 * v, self.tau)).collect()
    }

    fn transpose(src: &[Complex64], dst: &mut [Complex64], n1: usize, n2: usize) {
        // blocked for cache friendliness on large grids
        const B: usize = 32;
        for i0 in (0..n1).step_by(B) {
            for j0 in (0..n2).step_by(B) {
                for i in i0..(i0 + B).min(n1) {
                    for j in j0..(j0 + B).min(n2) {
                        dst[j * n1 + i] = src[i * n2 + j];
                    }
                }
            }
        }
    }

    fn rows(fft: &Arc<dyn Fft<f64>>, data: &mut [Complex64], len: usize) {
        data.par_chunks_mut(len).for_each_init(
            || vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()],
            |scratch, row| fft.process_with_scratch(row, scratch),
        );
    }

    /// One Strang step: half potential, spectral kinetic, half potential.
    pub fn step(&mut self, values: &mut [Complex64], half_phase: &[Complex64]) {
        let (n1, n2) = (self.grid.axis1.n_points(), self.grid.axis2.n_points());
        debug_assert_eq!(values.len(), n1 * n2);
        for (v, p) in values.iter_mut().zip(half_phase) {
            *v *= p;
        }
        Self::rows(&self.fft2, values, n2);
        Self::transpose(values, &mut self.buf, n1, n2);
        Self::rows(&self.fft1, &mut self.buf, n1);
        for (v, k) in self.buf.iter_mut().zip(&self.kinetic_t) {
            *v *= k;
        }
        Self::rows(&self.ifft1, &mut self.buf, n1);
        Self::transpose(&self.buf, values, n2, n1);
        Self::rows(&self.ifft2, values, n2);
        for (v, p) in values.iter_mut().zip(half_phase) {
            *v *= p;
        }
    }

    /// ⟨psi|H|psi⟩ / ⟨psi|psi⟩ with spectral kinetic energy.
    pub fn energy(&mut self, field: &ComplexField2D, potential: &[f64]) -> f64 {
        let (n1, n2) = (self.grid.axis1.n_points(), self.grid.axis2.n_points());
        let mut vals = field.values().to_vec();
        Self::rows(&self.fft2, &mut vals, n2);
        Self::transpose(&vals, &mut self.buf, n1, n2);
        Self::rows(&self.fft1, &mut self.buf, n1);
        let k1 = fft_momenta(n1, self.grid.axis1.spacing());
        let k2 = fft_momenta(n2, self.grid.axis2.spacing());
        let mut kin = 0.0;
        let mut norm_k = 0.0;
        for (j, &q2) in k2.iter().enumerate() {
            for (i, &q1) in k1.iter().enumerate() {
                let p = self.buf[j * n1 + i].norm_sqr();
                kin += 0.5 * (q1 * q1 + q2 * q2) * p;
                norm_k += p;
            }
        }
        let mut pot = 0.0;
        let mut norm = 0.0;
        for (v, &u) in field.values().iter().zip(potential) {
            let p = v.norm_sqr();
            pot += u * p;
            norm += p;
        }
        kin / norm_k + pot / norm
    }
}

/// Static two-electron potential sampled on the grid.
pub fn two_electron_potential(grid: &Grid2D, params: &SoftCoreParams) -> Vec<f64> {
    let mut pot = Vec::with_capacity(grid.n_total());
    for x1 in grid.axis1.points() {
        for x2 in grid.axis2.points() {
            pot.push(params.v_en(x1) + params.v_en(x2) + params.v_ee(x1, x2));
        }
    }
    pot
}

/// Lowest eigenstate of an arbitrary potential by imaginary-time relaxation.
/// Converged when the energy moves less than `tol` between checks (every 20
/// steps); errors with the residual delta otherwise.
pub fn relax_to_ground(
    grid: Grid2D,
    potential: &[f64],
    dt: f64,
    tol: f64,
    max_steps: usize,
) -> Result<(ComplexField2D, f64)> {
    let mut op = SplitOperator2D::new(grid, TimeStep::Imaginary(dt));
    let half = op.half_phase(potential);
    let mut field = ComplexField2D::from_fn(grid, |x1, x2| {
        Complex64::new((-0.5 * (x1 * x1 + x2 * x2)).exp(), 0.0)
    });
    field.normalize()?;
    let mut last_e = f64::INFINITY;
    let check = 20;
    let mut steps = 0;
    while steps < max_steps {
        for _ in 0..check {
            op.step(field.values_mut(), &half);
            field.normalize()?;
        }
        steps += check;
        let e = op.energy(&field, potential);
        let delta = (e - last_e).abs();
        if delta < tol {
            return Ok((field, e));
        }
        last_e = e;
    }
    Err(Error::NotConverged { max_steps, delta: (op.energy(&field, potential) - last_e).abs() })
}

/// Exact field-free ground state of the two-electron soft-core atom.
pub fn exact_ground_state(
    grid: Grid2D,
    params: &SoftCoreParams,
    dt: f64,
    tol: f64,
    max_steps: usize,
) -> Result<(ComplexField2D, f64)> {
    relax_to_ground(grid, &two_electron_potential(&grid, params), dt, tol, max_steps)
}

/// Real-time propagator with laser coupling `(x1 + x2) E(t)` and an
/// absorbing mask over the outer region of both axes.
pub struct ExactPropagator {
    op: SplitOperator2D,
    static_phase: Vec<Complex64>,
    /// exp(-i x tau / 2) raised to E(t) per axis, assembled per step.
    axis1_x: Vec<f64>,
    axis2_x: Vec<f64>,
    mask: Option<Vec<f64>>,
    dt: f64,
    t: f64,
    step: u64,
}

impl ExactPropagator {
    pub fn new(
        grid: Grid2D,
        params: &SoftCoreParams,
        dt: f64,
        absorber: Option<AbsorberParams>,
    ) -> Self {
        let op = SplitOperator2D::new(grid, TimeStep::Real(dt));
        let static_phase = op.half_phase(&two_electron_potential(&grid, params));
        let mask = absorber.map(|a| {
            let m1 = a.mask_on_grid(&grid.axis1);
            let m2 = a.mask_on_grid(&grid.axis2);
            let mut m = Vec::with_capacity(grid.n_total());
            for &u in &m1 {
                for &v in &m2 {
                    m.push(u * v);
                }
            }
            m
        });
        ExactPropagator {
            op,
            static_phase,
            axis1_x: grid.axis1.points().collect(),
            axis2_x: grid.axis2.points().collect(),
            mask,
            dt,
            t: 0.0,
            step: 0,
        }
    }

    pub fn grid(&self) -> &Grid2D {
        self.op.grid()
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// Advance one step under the optional laser, then absorb.
    pub fn step(&mut self, field: &mut ComplexField2D, laser: Option<&LaserParams>) -> Result<()> {
        let e = laser.map_or(0.0, |l| l.field(self.t + 0.5 * self.dt));
        let tau = self.op.tau();
        let n2 = self.axis2_x.len();
        if e == 0.0 {
            let phase = &self.static_phase;
            self.op.step(field.values_mut(), phase);
        } else {
            let f1: Vec<Complex64> =
                self.axis1_x.iter().map(|&x| phase_factor(0.5 * x * e, tau)).collect();
            let f2: Vec<Complex64> =
                self.axis2_x.iter().map(|&x| phase_factor(0.5 * x * e, tau)).collect();
            let mut phase = self.static_phase.clone();
            for (i, p1) in f1.iter().enumerate() {
                for (j, p2) in f2.iter().enumerate() {
                    phase[i * n2 + j] *= p1 * p2;
                }
            }
            self.op.step(field.values_mut(), &phase);
        }
        if let Some(mask) = &self.mask {
            for (v, &m) in field.values_mut().iter_mut().zip(mask) {
                *v *= m;
            }
        }
        if !field.values().iter().take(8).all(|v| v.re.is_finite()) || !field.norm_sq().is_finite() {
            return Err(Error::PropagationBlowUp {
                step: self.step as usize,
                detail: "NaN/Inf in exact wave function".into(),
            });
        }
        self.t += self.dt;
        self.step += 1;
        Ok(())
    }
}

/// |psi|^2 on the field's own grid (not renormalized; the absorber makes the
/// total mass decay in time).
pub fn exact_density(field: &ComplexField2D) -> RealField2D {
    let mut d = RealField2D::zeros(*field.grid());
    for (o, v) in d.values_mut().iter_mut().zip(field.values()) {
        *o = v.norm_sqr();
    }
    d
}

/// |psi|^2 bilinearly interpolated onto another (typically smaller) grid,
/// for density comparisons in a fixed window. Errors if `target` reaches
/// outside the field's grid.
pub fn exact_density_on(field: &ComplexField2D, target: &Grid2D) -> Result<RealField2D> {
    let src = field.grid();
    let full = exact_density(field);
    let n2 = target.axis2.n_points();
    let mut out = RealField2D::zeros(*target);
    for i in 0..target.axis1.n_points() {
        let (gi, wi) = src.axis1.bracket(target.axis1.point(i))?;
        for j in 0..n2 {
            let (gj, wj) = src.axis2.bracket(target.axis2.point(j))?;
            out.values_mut()[i * n2 + j] = full.at(gi, gj) * (1.0 - wi) * (1.0 - wj)
                + full.at(gi + 1, gj) * wi * (1.0 - wj)
                + full.at(gi, gj + 1) * (1.0 - wi) * wj
                + full.at(gi + 1, gj + 1) * wi * wj;
        }
    }
    Ok(out)
}

/// Probability mass with both electrons inside |x| <= radius. Relative to
/// the initial unit norm, so absorbed flux counts as ionized.
pub fn exact_survival_probability(field: &ComplexField2D, radius: f64) -> f64 {
    let grid = field.grid();
    let da = grid.cell_area();
    let n2 = grid.axis2.n_points();
    let inside1: Vec<bool> = grid.axis1.points().map(|x| x.abs() <= radius).collect();
    let inside2: Vec<bool> = grid.axis2.points().map(|x| x.abs() <= radius).collect();
    let mut acc = 0.0;
    for (idx, v) in field.values().iter().enumerate() {
        if inside1[idx / n2] && inside2[idx % n2] {
            acc += v.norm_sqr();
        }
    }
    acc * da
}

/// Plain-text matrix dump: a comment header with the grid extents, then one
/// whitespace-separated row per axis1 node.
pub fn write_density_text(density: &RealField2D, mut w: impl std::io::Write) -> Result<()> {
    let g = density.grid();
    writeln!(
        w,
        "# axis1 {} {} {} axis2 {} {} {}",
        g.axis1.x_min(),
        g.axis1.x_max(),
        g.axis1.n_points(),
        g.axis2.x_min(),
        g.axis2.x_max(),
        g.axis2.n_points()
    )?;
    let n2 = g.axis2.n_points();
    for row in density.values().chunks(n2) {
        let line: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
        writeln!(w, "{}", line.join(" "))?;
    }
    Ok(())
}
