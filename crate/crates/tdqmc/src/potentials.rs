//! Soft-core Coulomb potentials, the external laser field, and the
//! kernel-smoothed nonlocal effective electron-electron potential.
//!
//! Atomic units throughout (ħ = m = e = 1).

use crate::error::{Error, Result};

/// Softening parameters of the 1D model potentials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SoftCoreParams {
    /// Electron-nucleus softening (a.u.²).
    pub a: f64,
    /// Electron-electron softening (a.u.).
    pub b: f64,
    /// Nuclear charge, 2 for helium.
    pub nuclear_charge: f64,
}

impl Default for SoftCoreParams {
    fn default() -> Self {
        SoftCoreParams { a: 1.0, b: 1.0, nuclear_charge: 2.0 }
    }
}

impl SoftCoreParams {
    /// Electron-nucleus attraction: `-Z / sqrt(a + x²)`.
    #[inline]
    pub fn v_en(&self, x: f64) -> f64 {
        -self.nuclear_charge / (self.a + x * x).sqrt()
    }

    /// Electron-electron repulsion: `1 / (b + |x1 - x2|)`. Symmetric.
    #[inline]
    pub fn v_ee(&self, x1: f64, x2: f64) -> f64 {
        1.0 / (self.b + (x1 - x2).abs())
    }
}

/// Pulse envelope shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Envelope {
    /// sin²(π (t - t_start) / T), identically zero outside the pulse.
    Sin2,
    /// Gaussian with std T/8 centered on the pulse; no compact support.
    Gaussian,
}

/// Linearly polarized few-cycle pulse, length gauge: `V_ext(x, t) = x E(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaserParams {
    /// Peak field strength E₀ (a.u.).
    pub peak_amplitude: f64,
    /// Carrier angular frequency ω (a.u.).
    pub carrier_frequency: f64,
    /// Number of optical cycles under the envelope.
    pub n_cycles: u32,
    pub envelope: Envelope,
    /// Time at which the envelope turns on (a.u.).
    pub t_start: f64,
}

impl LaserParams {
    /// Total envelope support: `n_cycles * 2π / ω`.
    pub fn duration(&self) -> f64 {
        self.n_cycles as f64 * std::f64::consts::TAU / self.carrier_frequency
    }

    pub fn t_center(&self) -> f64 {
        self.t_start + 0.5 * self.duration()
    }

    /// E(t) = E₀(t) cos(ω (t - t_center)); cosine phase is zero (field
    /// maximal) at the envelope peak.
    pub fn field(&self, t: f64) -> f64 {
        let total = self.duration();
        let center = self.t_center();
        let env = match self.envelope {
            Envelope::Sin2 => {
                if t < self.t_start || t > self.t_start + total {
                    return 0.0;
                }
                let s = (std::f64::consts::PI * (t - self.t_start) / total).sin();
                self.peak_amplitude * s * s
            }
            Envelope::Gaussian => {
                let w = total / 8.0;
                self.peak_amplitude * (-(t - center) * (t - center) / (2.0 * w * w)).exp()
            }
        };
        env * (self.carrier_frequency * (t - center)).cos()
    }
}

/// Width of the Gaussian smoothing kernel in the effective potential.
///
/// Zero width collapses the sum to the bare pairwise potential against the
/// reference walker; the mean-field variant weights every walker equally
/// (the Hartree-Fock limit) and is an explicit mode rather than a large
/// float, so both limits are exactly testable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelWidth {
    Length(f64),
    MeanField,
}

impl KernelWidth {
    pub fn is_mean_field(&self) -> bool {
        matches!(self, KernelWidth::MeanField)
    }
}

/// Unnormalized Gaussian kernel K(u) = exp(-u²/2); normalization constants
/// cancel between the weighted sum and its weighting factor.
#[inline]
pub fn gaussian_kernel(u: f64) -> f64 {
    (-0.5 * u * u).exp()
}

/// Relative kernel weights below this are dropped; changes results below
/// test tolerances while bounding the summation window.
const KERNEL_CUTOFF: f64 = 1e-12;

/// Kernel-smoothed effective electron-electron potential.
///
/// For each evaluation point `x` returns
/// `(1/Z) Σ_l v_ee(x, others[l]) K(|others[l] - others[k_ref]| / σ)` with
/// `Z` the sum of the kernel weights. `σ = 0` reduces to the bare pairwise
/// potential against the reference walker; the mean-field width averages
/// uniformly over the ensemble.
pub fn effective_v_ee(
    x_eval: &[f64],
    others: &[f64],
    k_ref: usize,
    sigma: KernelWidth,
    params: &SoftCoreParams,
) -> Result<Vec<f64>> {
    let m = others.len();
    if m == 0 {
        return Err(Error::EmptyEnsemble);
    }
    assert!(k_ref < m, "reference walker out of range");

    match sigma {
        KernelWidth::MeanField => {
            let inv_m = 1.0 / m as f64;
            Ok(x_eval
                .iter()
                .map(|&x| others.iter().map(|&xl| params.v_ee(x, xl)).sum::<f64>() * inv_m)
                .collect())
        }
        KernelWidth::Length(s) if s == 0.0 => {
            let xr = others[k_ref];
            Ok(x_eval.iter().map(|&x| params.v_ee(x, xr)).collect())
        }
        KernelWidth::Length(s) => {
            assert!(s > 0.0 && s.is_finite(), "kernel width must be nonnegative");
            let xr = others[k_ref];
            let reach = s * (-2.0 * KERNEL_CUTOFF.ln()).sqrt();
            let mut weights = Vec::with_capacity(m);
            let mut z = 0.0;
            for &xl in others {
                let w = if (xl - xr).abs() > reach {
                    0.0
                } else {
                    gaussian_kernel((xl - xr) / s)
                };
                z += w;
                weights.push(w);
            }
            let inv_z = 1.0 / z;
            Ok(x_eval
                .iter()
                .map(|&x| {
                    others
                        .iter()
                        .zip(&weights)
                        .filter(|(_, &w)| w > 0.0)
                        .map(|(&xl, &w)| w * params.v_ee(x, xl))
                        .sum::<f64>()
                        * inv_z
                })
                .collect())
        }
    }
}
