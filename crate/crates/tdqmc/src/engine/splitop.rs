//! Strang split-operator stepper with a spectral kinetic factor on a
//! periodic uniform grid. One implementation serves both real-time and
//! complex-time (relaxation) propagation; the same scheme is reused by the
//! exact two-electron solver so that method mismatch never enters density
//! comparisons.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::{ComplexField1D, Grid1D};

/// Propagation time step. The complex variant has equal real and imaginary
/// parts with |step| = dt; the imaginary part damps excited states so that
/// repeated renormalized steps relax onto the ground state while walkers
/// keep a nonzero drift velocity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeStep {
    Real(f64),
    /// dt * (1 - i) / sqrt(2)
    Complex(f64),
    /// -i * dt (pure relaxation, used by the exact solver)
    Imaginary(f64),
}

impl TimeStep {
    pub fn tau(&self) -> Complex64 {
        match *self {
            TimeStep::Real(dt) => Complex64::new(dt, 0.0),
            TimeStep::Complex(dt) => {
                Complex64::new(dt / std::f64::consts::SQRT_2, -dt / std::f64::consts::SQRT_2)
            }
            TimeStep::Imaginary(dt) => Complex64::new(0.0, -dt),
        }
    }

    /// Real-time component, the amount walkers advance per step.
    pub fn dt_real(&self) -> f64 {
        self.tau().re
    }
}

/// Phase factor `exp(-i v tau)` for real `v`.
#[inline]
pub fn phase_factor(v: f64, tau: Complex64) -> Complex64 {
    // -i v (tau_re + i tau_im) = -i v tau_re + v tau_im
    let (s, c) = (-v * tau.re).sin_cos();
    let mag = (v * tau.im).exp();
    Complex64::new(mag * c, mag * s)
}

/// FFT momenta in transform order for an n-point periodic grid of spacing h.
pub fn fft_momenta(n: usize, h: f64) -> Vec<f64> {
    let dk = std::f64::consts::TAU / (n as f64 * h);
    (0..n)
        .map(|m| {
            let m = if m <= n / 2 { m as isize } else { m as isize - n as isize };
            m as f64 * dk
        })
        .collect()
}

pub struct SplitOperator1D {
    grid: Grid1D,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
    /// exp(-i k²/2 tau) with the inverse-FFT 1/n folded in.
    kinetic: Vec<Complex64>,
    tau: Complex64,
    scratch_len: usize,
}

impl SplitOperator1D {
    pub fn new(grid: Grid1D, step: TimeStep) -> Self {
        let n = grid.n_points();
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(n);
        let ifft = planner.plan_fft_inverse(n);
        let tau = step.tau();
        let inv_n = 1.0 / n as f64;
        let kinetic = fft_momenta(n, grid.spacing())
            .into_iter()
            .map(|k| phase_factor(0.5 * k * k, tau) * inv_n)
            .collect();
        let scratch_len = fft.get_inplace_scratch_len().max(ifft.get_inplace_scratch_len());
        SplitOperator1D { grid, fft, ifft, kinetic, tau, scratch_len }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn tau(&self) -> Complex64 {
        self.tau
    }

    pub fn scratch_len(&self) -> usize {
        self.scratch_len
    }

    pub fn make_scratch(&self) -> Vec<Complex64> {
        vec![Complex64::new(0.0, 0.0); self.scratch_len]
    }

    /// Half-step potential factors `exp(-i V tau / 2)` for a potential
    /// sampled on the grid.
    pub fn half_phase(&self, potential: &[f64]) -> Vec<Complex64> {
        assert_eq!(potential.len(), self.grid.n_points());
        potential.iter().map(|&v| phase_factor(0.5 * v, self.tau)).collect()
    }

    /// One Strang step: half potential, spectral kinetic, half potential.
    pub fn step(&self, values: &mut [Complex64], half_phase: &[Complex64], scratch: &mut [Complex64]) {
        debug_assert_eq!(values.len(), self.grid.n_points());
        for (v, p) in values.iter_mut().zip(half_phase) {
            *v *= p;
        }
        self.fft.process_with_scratch(values, scratch);
        for (v, k) in values.iter_mut().zip(&self.kinetic) {
            *v *= k;
        }
        self.ifft.process_with_scratch(values, scratch);
        for (v, p) in values.iter_mut().zip(half_phase) {
            *v *= p;
        }
    }

    /// Convenience single-field step against an explicit potential.
    pub fn step_field(&self, field: &mut ComplexField1D, potential: &[f64]) -> Result<()> {
        let phase = self.half_phase(potential);
        let mut scratch = self.make_scratch();
        self.step(field.values_mut(), &phase, &mut scratch);
        if !field.values().iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::PropagationBlowUp { step: 0, detail: "NaN/Inf in wave".into() });
        }
        Ok(())
    }

    /// ⟨ψ|H|ψ⟩ / ⟨ψ|ψ⟩ with spectral kinetic energy; used for relaxation
    /// convergence checks and tests.
    pub fn energy(&self, field: &ComplexField1D, potential: &[f64]) -> f64 {
        let n = self.grid.n_points();
        let mut buf = field.values().to_vec();
        let mut scratch = self.make_scratch();
        self.fft.process_with_scratch(&mut buf, &mut scratch);
        let momenta = fft_momenta(n, self.grid.spacing());
        let mut kin = 0.0;
        let mut norm_k = 0.0;
        for (v, k) in buf.iter().zip(&momenta) {
            let p = v.norm_sqr();
            kin += 0.5 * k * k * p;
            norm_k += p;
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

/// Absorbing-mask shape: `cos(pi s / 2)^exponent` over the outer
/// `width_fraction` of the grid on each side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbsorberParams {
    pub width_fraction: f64,
    pub exponent: f64,
}

impl Default for AbsorberParams {
    fn default() -> Self {
        AbsorberParams { width_fraction: 0.2, exponent: 0.125 }
    }
}

impl AbsorberParams {
    /// Mask value at position x on the given grid extent.
    pub fn mask_at(&self, x: f64, x_min: f64, x_max: f64) -> f64 {
        let width = (x_max - x_min) * self.width_fraction;
        let d = if x < x_min + width {
            (x_min + width - x) / width
        } else if x > x_max - width {
            (x - (x_max - width)) / width
        } else {
            return 1.0;
        };
        (std::f64::consts::FRAC_PI_2 * d.min(1.0)).cos().powf(self.exponent)
    }

    pub fn mask_on_grid(&self, grid: &Grid1D) -> Vec<f64> {
        grid.points().map(|x| self.mask_at(x, grid.x_min(), grid.x_max())).collect()
    }
}
