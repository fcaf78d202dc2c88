//! Tabulated kernel-smoothed effective potential.
//!
//! The per-walker effective potential depends on the reference walker only
//! through its position, and varies smoothly with it on the scale of the
//! correlation length. The engine therefore evaluates the smoothed sum on a
//! uniform axis of reference positions (one FFT convolution against a
//! deposited walker histogram per row) and linearly interpolates rows per
//! walker, instead of paying O(grid x M) for each of the M walkers. The
//! exact small-ensemble form lives in [`crate::potentials::effective_v_ee`];
//! a test pins the table against it.

use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::grid::Grid1D;
use crate::potentials::{gaussian_kernel, KernelWidth, SoftCoreParams};

/// Cached FFT machinery for one (grid, refinement) combination.
pub struct ConvPlan {
    refine: usize,
    n_fine: usize,
    len: usize,
    fine_spacing: f64,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
    /// FFT of the pair-potential offset kernel, 1/len folded in.
    kernel_fft: Vec<Complex64>,
}

impl ConvPlan {
    fn new(grid: &Grid1D, refine: usize, params: &SoftCoreParams) -> Self {
        let n_fine = grid.n_points() * refine;
        let len = 2 * n_fine;
        let fine_spacing = grid.spacing() / refine as f64;
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(len);
        let ifft = planner.plan_fft_inverse(len);
        let mut kernel = vec![Complex64::new(0.0, 0.0); len];
        for d in -(n_fine as isize - 1)..=(n_fine as isize - 1) {
            let idx = d.rem_euclid(len as isize) as usize;
            kernel[idx] = Complex64::new(params.v_ee(d.abs() as f64 * fine_spacing, 0.0), 0.0);
        }
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        fft.process_with_scratch(&mut kernel, &mut scratch);
        let inv = 1.0 / len as f64;
        for k in &mut kernel {
            *k *= inv;
        }
        ConvPlan { refine, n_fine, len, fine_spacing, fft, ifft, kernel_fft: kernel }
    }
}

/// Per-(grid, params) cache of convolution plans keyed by refinement.
#[derive(Default)]
pub struct ConvPlans {
    plans: HashMap<usize, Arc<ConvPlan>>,
}

impl ConvPlans {
    pub fn get(&mut self, grid: &Grid1D, refine: usize, params: &SoftCoreParams) -> Arc<ConvPlan> {
        self.plans
            .entry(refine)
            .or_insert_with(|| Arc::new(ConvPlan::new(grid, refine, params)))
            .clone()
    }
}

/// Relative kernel weights below this are dropped (same cutoff as the exact
/// path).
const KERNEL_CUTOFF: f64 = 1e-12;

/// Effective-potential curves on a uniform axis of reference positions.
pub struct EffectivePotentialTable {
    rows: Vec<Vec<f64>>,
    y0: f64,
    dy: f64,
}

impl EffectivePotentialTable {
    /// Build the table for the waves of one electron from the walker
    /// positions of the other (`others`), with that ensemble's correlation
    /// length.
    pub fn build(
        grid: &Grid1D,
        others: &[f64],
        sigma: KernelWidth,
        params: &SoftCoreParams,
        plans: &mut ConvPlans,
        max_rows: usize,
    ) -> Self {
        assert!(!others.is_empty());
        let clamp = |x: f64| x.clamp(grid.x_min(), grid.x_max());
        let lo = others.iter().copied().fold(f64::MAX, f64::min);
        let hi = others.iter().copied().fold(f64::MIN, f64::max);
        let (lo, hi) = (clamp(lo), clamp(hi));
        let range = hi - lo;

        match sigma {
            KernelWidth::MeanField => {
                let refine = 1;
                let plan = plans.get(grid, refine, params);
                let hist = deposit(grid, others, &plan);
                let weights: Vec<(usize, f64)> =
                    hist.iter().enumerate().filter(|(_, &h)| h > 0.0).map(|(b, &h)| (b, h)).collect();
                let row = convolve_row(&weights, others.len() as f64, &plan, grid.n_points());
                EffectivePotentialTable { rows: vec![row], y0: lo, dy: 0.0 }
            }
            KernelWidth::Length(s) if s == 0.0 => {
                // bare pairwise potential against the reference walker
                let n_rows = if range == 0.0 { 1 } else { max_rows.max(2) };
                let dy = if n_rows > 1 { range / (n_rows - 1) as f64 } else { 0.0 };
                let rows = (0..n_rows)
                    .map(|j| {
                        let y = lo + j as f64 * dy;
                        grid.points().map(|x| params.v_ee(x, y)).collect()
                    })
                    .collect();
                EffectivePotentialTable { rows, y0: lo, dy }
            }
            KernelWidth::Length(s) => {
                assert!(s > 0.0 && s.is_finite());
                // deposition fine enough to resolve the kernel
                let refine = ((5.0 * grid.spacing() / s).ceil() as usize).clamp(1, 4);
                let plan = plans.get(grid, refine, params);
                let hist = deposit(grid, others, &plan);
                let occupied: Vec<(usize, f64)> =
                    hist.iter().enumerate().filter(|(_, &h)| h > 0.0).map(|(b, &h)| (b, h)).collect();
                let n_rows = if range == 0.0 {
                    1
                } else {
                    (((range / (s / 6.0)).ceil() as usize) + 1).clamp(2, max_rows)
                };
                let dy = if n_rows > 1 { range / (n_rows - 1) as f64 } else { 0.0 };
                let reach = s * (-2.0 * KERNEL_CUTOFF.ln()).sqrt();
                let rows = (0..n_rows)
                    .map(|j| {
                        let y = lo + j as f64 * dy;
                        let mut z = 0.0;
                        let weights: Vec<(usize, f64)> = occupied
                            .iter()
                            .filter_map(|&(b, h)| {
                                let u = grid.x_min() + b as f64 * plan.fine_spacing;
                                if (u - y).abs() > reach {
                                    return None;
                                }
                                let w = h * gaussian_kernel((u - y) / s);
                                z += w;
                                Some((b, w))
                            })
                            .collect();
                        if z == 0.0 {
                            // all mass beyond the cutoff; fall back to the
                            // nearest occupied bin
                            let (b, _) = occupied
                                .iter()
                                .min_by(|a, c| {
                                    let ua = grid.x_min() + a.0 as f64 * plan.fine_spacing;
                                    let uc = grid.x_min() + c.0 as f64 * plan.fine_spacing;
                                    (ua - y).abs().partial_cmp(&(uc - y).abs()).unwrap()
                                })
                                .unwrap();
                            return convolve_row(&[(*b, 1.0)], 1.0, &plan, grid.n_points());
                        }
                        convolve_row(&weights, z, &plan, grid.n_points())
                    })
                    .collect();
                EffectivePotentialTable { rows, y0: lo, dy }
            }
        }
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// Bracketing row index and interpolation weight for a reference
    /// position.
    #[inline]
    pub fn locate(&self, y: f64) -> (usize, f64) {
        if self.rows.len() == 1 || self.dy == 0.0 {
            return (0, 0.0);
        }
        let s = ((y - self.y0) / self.dy).clamp(0.0, (self.rows.len() - 1) as f64);
        let j = (s.floor() as usize).min(self.rows.len() - 2);
        (j, s - j as f64)
    }

    /// Interpolated potential curve for one reference position.
    pub fn fill(&self, y: f64, out: &mut [f64]) {
        let (j, w) = self.locate(y);
        if w == 0.0 {
            out.copy_from_slice(&self.rows[j]);
            return;
        }
        for ((o, a), b) in out.iter_mut().zip(&self.rows[j]).zip(&self.rows[j + 1]) {
            *o = a * (1.0 - w) + b * w;
        }
    }
}

/// Linear deposition of walker mass onto the fine histogram.
fn deposit(grid: &Grid1D, others: &[f64], plan: &ConvPlan) -> Vec<f64> {
    let mut hist = vec![0.0f64; plan.n_fine];
    let inv_h = 1.0 / plan.fine_spacing;
    for &x in others {
        let x = x.clamp(grid.x_min(), grid.x_max());
        let s = (x - grid.x_min()) * inv_h;
        let b = (s.floor() as usize).min(plan.n_fine - 2);
        let w = s - b as f64;
        hist[b] += 1.0 - w;
        hist[b + 1] += w;
    }
    hist
}

/// FFT convolution of the weighted histogram against the pair potential,
/// downsampled back to the wave grid and normalized by the weight sum.
fn convolve_row(weights: &[(usize, f64)], z: f64, plan: &ConvPlan, n_out: usize) -> Vec<f64> {
    let mut buf = vec![Complex64::new(0.0, 0.0); plan.len];
    for &(b, w) in weights {
        buf[b] = Complex64::new(w, 0.0);
    }
    let mut scratch =
        vec![
            Complex64::new(0.0, 0.0);
            plan.fft.get_inplace_scratch_len().max(plan.ifft.get_inplace_scratch_len())
        ];
    plan.fft.process_with_scratch(&mut buf, &mut scratch);
    for (v, k) in buf.iter_mut().zip(&plan.kernel_fft) {
        *v *= k;
    }
    plan.ifft.process_with_scratch(&mut buf, &mut scratch);
    let inv_z = 1.0 / z;
    (0..n_out).map(|a| buf[a * plan.refine].re * inv_z).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::effective_v_ee;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup() -> (Grid1D, Vec<f64>, SoftCoreParams) {
        let grid = Grid1D::new(-10.0, 10.0, 129).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let others: Vec<f64> = (0..60).map(|_| rng.gen_range(-3.0..3.0)).collect();
        (grid, others, SoftCoreParams::default())
    }

    #[test]
    fn table_matches_exact_smoothed_potential() {
        let (grid, others, params) = setup();
        let mut plans = ConvPlans::default();
        let xs: Vec<f64> = grid.points().collect();
        for s in [0.5, 1.0, 2.0] {
            let sigma = KernelWidth::Length(s);
            let table =
                EffectivePotentialTable::build(&grid, &others, sigma, &params, &mut plans, 512);
            let mut filled = vec![0.0; grid.n_points()];
            for &k in &[0usize, 7, 33, 59] {
                table.fill(others[k], &mut filled);
                let exact = effective_v_ee(&xs, &others, k, sigma, &params).unwrap();
                let max_err = filled
                    .iter()
                    .zip(&exact)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0f64, f64::max);
                assert!(max_err < 5e-3, "sigma {s} walker {k}: max_err {max_err}");
            }
        }
    }

    #[test]
    fn table_mean_field_matches_exact() {
        let (grid, others, params) = setup();
        let mut plans = ConvPlans::default();
        let xs: Vec<f64> = grid.points().collect();
        let table = EffectivePotentialTable::build(
            &grid,
            &others,
            KernelWidth::MeanField,
            &params,
            &mut plans,
            512,
        );
        assert_eq!(table.n_rows(), 1);
        let mut filled = vec![0.0; grid.n_points()];
        table.fill(0.0, &mut filled);
        let exact = effective_v_ee(&xs, &others, 0, KernelWidth::MeanField, &params).unwrap();
        let max_err =
            filled.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0f64, f64::max);
        assert!(max_err < 5e-3, "max_err {max_err}");
    }

    #[test]
    fn table_pairwise_matches_exact() {
        let (grid, others, params) = setup();
        let mut plans = ConvPlans::default();
        let xs: Vec<f64> = grid.points().collect();
        let table = EffectivePotentialTable::build(
            &grid,
            &others,
            KernelWidth::Length(0.0),
            &params,
            &mut plans,
            512,
        );
        let mut filled = vec![0.0; grid.n_points()];
        for &k in &[3usize, 41] {
            table.fill(others[k], &mut filled);
            let exact = effective_v_ee(&xs, &others, k, KernelWidth::Length(0.0), &params).unwrap();
            let max_err =
                filled.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0f64, f64::max);
            // row interpolation slightly rounds the |x - y| kink
            assert!(max_err < 1e-2, "walker {k}: max_err {max_err}");
        }
    }

    #[test]
    fn single_walker_table() {
        let grid = Grid1D::new(-5.0, 5.0, 65).unwrap();
        let params = SoftCoreParams::default();
        let mut plans = ConvPlans::default();
        let table = EffectivePotentialTable::build(
            &grid,
            &[1.25],
            KernelWidth::Length(0.7),
            &params,
            &mut plans,
            512,
        );
        let mut filled = vec![0.0; 65];
        table.fill(1.25, &mut filled);
        for (x, v) in grid.points().zip(&filled) {
            assert!((v - params.v_ee(x, 1.25)).abs() < 5e-3, "x = {x}");
        }
    }
}
