//! Kernel density estimation over the walker ensemble: Silverman bandwidth
//! selection, the nonlocal quantum correlation length, the product-kernel
//! density estimate over configuration space, and its analytic gradient.

use crate::error::{Error, Result};
use crate::grid::{Grid2D, RealField2D};
use crate::potentials::KernelWidth;
use crate::stats;

/// Gaussian factors beyond this many bandwidths are dropped. Both the
/// pointwise and the grid evaluation apply the identical per-term test, so
/// the two paths stay bit-exact; at 12 bandwidths the dropped mass is below
/// 1e-31 relative.
const CUTOFF_SIGMAS: f64 = 12.0;

/// Spread statistic used inside Silverman's rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BandwidthRule {
    /// 1.06 * min(std, IQR/1.34) * M^(-1/5) — the robust default.
    #[default]
    RobustMin,
    /// 1.06 * std * M^(-1/5), for A/B comparison during scans.
    PlainStd,
}

/// Silverman rule-of-thumb bandwidth for a Gaussian kernel.
pub fn kde_bandwidth(samples: &[f64], rule: BandwidthRule) -> Result<f64> {
    let m = samples.len();
    if m < 2 {
        return Err(Error::DegenerateEnsemble("need at least 2 samples"));
    }
    let std = stats::sample_std(samples);
    if std == 0.0 || !std.is_finite() {
        return Err(Error::DegenerateEnsemble("zero spread"));
    }
    let spread = match rule {
        BandwidthRule::PlainStd => std,
        BandwidthRule::RobustMin => {
            let iqr_scaled = stats::iqr(samples) / 1.34;
            if iqr_scaled > 0.0 {
                std.min(iqr_scaled)
            } else {
                std
            }
        }
    };
    Ok(1.06 * spread * (m as f64).powf(-0.2))
}

/// Scale factor between the KDE bandwidth and the correlation length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Alpha {
    Scale(f64),
    /// Hartree-Fock limit: every walker weighted equally.
    MeanField,
}

impl Alpha {
    pub fn is_mean_field(&self) -> bool {
        matches!(self, Alpha::MeanField)
    }
}

/// Nonlocal quantum correlation length: the linear law `sigma = alpha *
/// bandwidth`. Zero alpha gives the pairwise limit; the mean-field sentinel
/// propagates.
pub fn nqcl(bandwidth: f64, alpha: Alpha) -> KernelWidth {
    match alpha {
        Alpha::Scale(a) => KernelWidth::Length(a * bandwidth),
        Alpha::MeanField => KernelWidth::MeanField,
    }
}

/// Per-electron bandwidths plus the shared alpha; correlation lengths follow
/// as `alpha * bandwidth`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandwidthState {
    per_electron: Vec<f64>,
    alpha: Alpha,
}

impl BandwidthState {
    pub fn new(per_electron: Vec<f64>, alpha: Alpha) -> Self {
        assert!(per_electron.iter().all(|&b| b > 0.0));
        BandwidthState { per_electron, alpha }
    }

    pub fn bandwidth(&self, electron: usize) -> f64 {
        self.per_electron[electron]
    }

    pub fn bandwidths(&self) -> &[f64] {
        &self.per_electron
    }

    pub fn alpha(&self) -> Alpha {
        self.alpha
    }

    /// Correlation length of the given electron's ensemble.
    pub fn correlation_length(&self, electron: usize) -> KernelWidth {
        nqcl(self.per_electron[electron], self.alpha)
    }
}

/// Frozen walker snapshot with per-electron Gaussian product-kernel
/// bandwidths; evaluable anywhere in configuration space.
#[derive(Debug, Clone)]
pub struct DensityEstimate {
    /// N electrons x M walkers.
    walkers: Vec<Vec<f64>>,
    bandwidths: Vec<f64>,
    alpha: Alpha,
    /// Walker indices sorted by electron-0 position, for windowed queries.
    order0: Vec<u32>,
}

impl DensityEstimate {
    pub fn new(walkers: Vec<Vec<f64>>, bandwidths: Vec<f64>, alpha: Alpha) -> Self {
        assert!(!walkers.is_empty());
        let m = walkers[0].len();
        assert!(m >= 1);
        assert!(walkers.iter().all(|w| w.len() == m));
        assert_eq!(walkers.len(), bandwidths.len());
        assert!(bandwidths.iter().all(|&b| b > 0.0 && b.is_finite()));
        let mut order0: Vec<u32> = (0..m as u32).collect();
        order0.sort_unstable_by(|&a, &b| {
            walkers[0][a as usize]
                .partial_cmp(&walkers[0][b as usize])
                .unwrap()
                .then(a.cmp(&b))
        });
        DensityEstimate { walkers, bandwidths, alpha, order0 }
    }

    /// Bandwidths from Silverman's rule on each electron's marginal.
    pub fn from_snapshot(walkers: Vec<Vec<f64>>, alpha: Alpha, rule: BandwidthRule) -> Result<Self> {
        let bandwidths = walkers
            .iter()
            .map(|w| kde_bandwidth(w, rule))
            .collect::<Result<Vec<f64>>>()?;
        Ok(DensityEstimate::new(walkers, bandwidths, alpha))
    }

    pub fn n_electrons(&self) -> usize {
        self.walkers.len()
    }

    pub fn n_walkers(&self) -> usize {
        self.walkers[0].len()
    }

    pub fn walkers(&self) -> &[Vec<f64>] {
        &self.walkers
    }

    pub fn bandwidths(&self) -> &[f64] {
        &self.bandwidths
    }

    pub fn alpha(&self) -> Alpha {
        self.alpha
    }

    /// Product-kernel estimate at a configuration point (one coordinate per
    /// electron): `(1/M) Σ_k Π_i N(r_i; x_i^k, σ_i)`.
    pub fn density(&self, r: &[f64]) -> f64 {
        assert_eq!(r.len(), self.n_electrons());
        let m = self.n_walkers();
        let mut sum = 0.0;
        'walker: for k in 0..m {
            let mut expo = 0.0;
            for (i, &ri) in r.iter().enumerate() {
                let s = self.bandwidths[i];
                let dx = ri - self.walkers[i][k];
                if dx.abs() > CUTOFF_SIGMAS * s {
                    continue 'walker;
                }
                expo += dx * dx / (s * s);
            }
            sum += (-0.5 * expo).exp();
        }
        // same association as the grid path, for bit-exact agreement
        sum * (self.norm_factor() / m as f64)
    }

    /// Analytic gradient component `∂/∂r_i` of [`Self::density`].
    pub fn gradient(&self, r: &[f64], electron: usize) -> f64 {
        assert_eq!(r.len(), self.n_electrons());
        let m = self.n_walkers();
        let si = self.bandwidths[electron];
        let mut sum = 0.0;
        'walker: for k in 0..m {
            let mut expo = 0.0;
            for (i, &ri) in r.iter().enumerate() {
                let s = self.bandwidths[i];
                let dx = ri - self.walkers[i][k];
                if dx.abs() > CUTOFF_SIGMAS * s {
                    continue 'walker;
                }
                expo += dx * dx / (s * s);
            }
            let dxe = r[electron] - self.walkers[electron][k];
            sum += (-dxe / (si * si)) * (-0.5 * expo).exp();
        }
        sum * (self.norm_factor() / m as f64)
    }

    /// Density and all gradient components in one pass, windowed on the
    /// electron-0 coordinate. Used heavily by the energy estimator.
    pub fn density_and_gradients(&self, r: &[f64]) -> (f64, Vec<f64>) {
        let n = self.n_electrons();
        assert_eq!(r.len(), n);
        let m = self.n_walkers();
        let s0 = self.bandwidths[0];
        let lo = r[0] - CUTOFF_SIGMAS * s0;
        let hi = r[0] + CUTOFF_SIGMAS * s0;
        let start = self.order0.partition_point(|&k| self.walkers[0][k as usize] < lo);
        let mut p = 0.0;
        let mut g = vec![0.0; n];
        'walker: for &k in &self.order0[start..] {
            let k = k as usize;
            if self.walkers[0][k] > hi {
                break;
            }
            let mut expo = 0.0;
            for i in 0..n {
                let s = self.bandwidths[i];
                let dx = r[i] - self.walkers[i][k];
                if dx.abs() > CUTOFF_SIGMAS * s {
                    continue 'walker;
                }
                expo += dx * dx / (s * s);
            }
            let w = (-0.5 * expo).exp();
            p += w;
            for i in 0..n {
                let s = self.bandwidths[i];
                g[i] += (-(r[i] - self.walkers[i][k]) / (s * s)) * w;
            }
        }
        let scale = self.norm_factor() / m as f64;
        for gi in &mut g {
            *gi *= scale;
        }
        (p * scale, g)
    }

    /// Evaluate the two-electron estimate at every node of `grid`.
    ///
    /// Accumulates each walker's (truncated) Gaussian patch; term set, term
    /// expressions, and accumulation order match the pointwise path, so the
    /// result agrees bit-exactly with [`Self::density`] node by node.
    pub fn density_on_grid(&self, grid: &Grid2D) -> RealField2D {
        assert_eq!(self.n_electrons(), 2, "grid evaluation is two-electron only");
        let (g1, g2) = (grid.axis1, grid.axis2);
        let (s1, s2) = (self.bandwidths[0], self.bandwidths[1]);
        let m = self.n_walkers();
        let mut values = vec![0.0f64; grid.n_total()];
        let n2 = g2.n_points();
        for k in 0..m {
            let (c1, c2) = (self.walkers[0][k], self.walkers[1][k]);
            let i_lo = index_floor(&g1, c1 - CUTOFF_SIGMAS * s1);
            let i_hi = index_ceil(&g1, c1 + CUTOFF_SIGMAS * s1);
            let j_lo = index_floor(&g2, c2 - CUTOFF_SIGMAS * s2);
            let j_hi = index_ceil(&g2, c2 + CUTOFF_SIGMAS * s2);
            for i in i_lo..=i_hi {
                let dx1 = g1.point(i) - c1;
                if dx1.abs() > CUTOFF_SIGMAS * s1 {
                    continue;
                }
                let e1 = dx1 * dx1 / (s1 * s1);
                let row = &mut values[i * n2..(i + 1) * n2];
                for j in j_lo..=j_hi {
                    let dx2 = g2.point(j) - c2;
                    if dx2.abs() > CUTOFF_SIGMAS * s2 {
                        continue;
                    }
                    row[j] += (-0.5 * (e1 + dx2 * dx2 / (s2 * s2))).exp();
                }
            }
        }
        let scale = self.norm_factor() / m as f64;
        for v in &mut values {
            *v *= scale;
        }
        RealField2D::new(*grid, values)
    }

    /// Product of the per-electron `1/(sqrt(2π) σ)` normalizations.
    fn norm_factor(&self) -> f64 {
        self.bandwidths
            .iter()
            .map(|s| 1.0 / ((2.0 * std::f64::consts::PI).sqrt() * s))
            .product()
    }
}

fn index_floor(g: &crate::grid::Grid1D, x: f64) -> usize {
    if x <= g.x_min() {
        return 0;
    }
    (((x - g.x_min()) / g.spacing()).floor() as usize).min(g.n_points() - 1)
}

fn index_ceil(g: &crate::grid::Grid1D, x: f64) -> usize {
    if x >= g.x_max() {
        return g.n_points() - 1;
    }
    if x <= g.x_min() {
        return 0;
    }
    (((x - g.x_min()) / g.spacing()).ceil() as usize).min(g.n_points() - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn normal_draws(seed: u64, m: usize) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..m).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
    }

    /// Straight-line reimplementation of Silverman's rule, kept independent
    /// of the library path.
    fn silverman_reference(samples: &[f64]) -> f64 {
        let m = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / m;
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
        let std = var.sqrt();
        let mut sorted = samples.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let q = |p: f64| {
            let h = p * (sorted.len() - 1) as f64;
            let lo = h.floor() as usize;
            let w = h - lo as f64;
            if lo + 1 < sorted.len() { sorted[lo] * (1.0 - w) + sorted[lo + 1] * w } else { sorted[lo] }
        };
        let iqr = q(0.75) - q(0.25);
        1.06 * std.min(iqr / 1.34) * m.powf(-0.2)
    }

    #[test]
    fn silverman_matches_reference_on_normal_sample() {
        let samples = normal_draws(7, 10_000);
        let got = kde_bandwidth(&samples, BandwidthRule::RobustMin).unwrap();
        assert_relative_eq!(got, silverman_reference(&samples), max_relative = 1e-13);
        // ballpark for a standard normal: 1.06 * shat * 10000^(-0.2)
        assert!(got > 0.13 && got < 0.20, "got {got}");
    }

    #[test]
    fn silverman_scale_and_translation() {
        let samples = normal_draws(3, 500);
        let base = kde_bandwidth(&samples, BandwidthRule::RobustMin).unwrap();
        let scaled: Vec<f64> = samples.iter().map(|x| 2.5 * x).collect();
        assert_relative_eq!(
            kde_bandwidth(&scaled, BandwidthRule::RobustMin).unwrap(),
            2.5 * base,
            max_relative = 1e-12
        );
        let shifted: Vec<f64> = samples.iter().map(|x| x + 17.0).collect();
        assert_relative_eq!(
            kde_bandwidth(&shifted, BandwidthRule::RobustMin).unwrap(),
            base,
            max_relative = 1e-10
        );
    }

    #[test]
    fn silverman_two_points() {
        // std of {0, 1} is 1/sqrt(2); IQR = 0.5, IQR/1.34 < std
        let got = kde_bandwidth(&[0.0, 1.0], BandwidthRule::RobustMin).unwrap();
        let shat = (0.5f64 / 1.34).min(std::f64::consts::FRAC_1_SQRT_2);
        assert_relative_eq!(got, 1.06 * shat * 2f64.powf(-0.2), max_relative = 1e-13);
    }

    #[test]
    fn silverman_degenerate_errors() {
        assert!(kde_bandwidth(&[1.0], BandwidthRule::RobustMin).is_err());
        assert!(kde_bandwidth(&[2.0; 50], BandwidthRule::RobustMin).is_err());
    }

    #[test]
    fn nqcl_linear() {
        assert_eq!(nqcl(0.5, Alpha::Scale(2.0)), KernelWidth::Length(1.0));
        assert_eq!(nqcl(0.7, Alpha::Scale(0.0)), KernelWidth::Length(0.0));
        assert_eq!(nqcl(0.7, Alpha::MeanField), KernelWidth::MeanField);
    }

    #[test]
    fn density_single_walker_peaks() {
        let est = DensityEstimate::new(vec![vec![0.0]], vec![1.0], Alpha::Scale(1.0));
        assert_relative_eq!(est.density(&[0.0]), 0.39894, max_relative = 1e-4);
        let est2 =
            DensityEstimate::new(vec![vec![0.0], vec![0.0]], vec![1.0, 1.0], Alpha::Scale(1.0));
        assert_relative_eq!(est2.density(&[0.0, 0.0]), 0.15915, max_relative = 1e-4);
    }

    #[test]
    fn density_two_walker_hand_sum() {
        let est = DensityEstimate::new(vec![vec![-1.0, 1.0]], vec![1.0], Alpha::Scale(1.0));
        let expect = (1.0 / (2.0 * std::f64::consts::PI).sqrt()) * (-0.5f64).exp();
        assert_relative_eq!(est.density(&[0.0]), expect, max_relative = 1e-12);
        assert_relative_eq!(est.density(&[0.0]), 0.24197, max_relative = 1e-4);
    }

    #[test]
    fn gradient_symmetric_set_zero_at_center() {
        let est = DensityEstimate::new(
            vec![vec![-1.0, 1.0, -0.5, 0.5], vec![-2.0, 2.0, -0.25, 0.25]],
            vec![0.8, 1.1],
            Alpha::Scale(1.0),
        );
        assert!(est.gradient(&[0.0, 0.0], 0).abs() < 1e-15);
        assert!(est.gradient(&[0.0, 0.0], 1).abs() < 1e-15);
    }

    #[test]
    fn gradient_single_walker_hand_value() {
        let est = DensityEstimate::new(vec![vec![0.0]], vec![1.0], Alpha::Scale(1.0));
        let gauss = est.density(&[0.5]);
        assert_relative_eq!(est.gradient(&[0.5], 0), -0.5 * gauss, max_relative = 1e-12);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let walkers: Vec<Vec<f64>> = (0..2)
            .map(|_| (0..5).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
            .collect();
        let est = DensityEstimate::new(walkers, vec![0.6, 0.9], Alpha::Scale(1.0));
        let h = 1e-5;
        for _ in 0..100 {
            let r = [
                2.0 * rng.sample::<f64, _>(StandardNormal),
                2.0 * rng.sample::<f64, _>(StandardNormal),
            ];
            for i in 0..2 {
                let mut rp = r;
                let mut rm = r;
                rp[i] += h;
                rm[i] -= h;
                let fd = (est.density(&rp) - est.density(&rm)) / (2.0 * h);
                let an = est.gradient(&r, i);
                let scale = fd.abs().max(est.density(&r).abs()).max(1e-12);
                assert!((an - fd).abs() / scale < 1e-6, "an {an} fd {fd} at {r:?}");
            }
        }
    }

    #[test]
    fn density_and_gradients_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let walkers: Vec<Vec<f64>> = (0..2)
            .map(|_| (0..200).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
            .collect();
        let est = DensityEstimate::new(walkers, vec![0.3, 0.4], Alpha::Scale(1.0));
        for _ in 0..20 {
            let r = [
                rng.sample::<f64, _>(StandardNormal),
                rng.sample::<f64, _>(StandardNormal),
            ];
            let (p, g) = est.density_and_gradients(&r);
            assert_relative_eq!(p, est.density(&r), max_relative = 1e-12);
            assert_relative_eq!(g[0], est.gradient(&r, 0), max_relative = 1e-10, epsilon = 1e-14);
            assert_relative_eq!(g[1], est.gradient(&r, 1), max_relative = 1e-10, epsilon = 1e-14);
        }
    }

    #[test]
    fn grid_density_normalizes_and_matches_pointwise() {
        let walkers = vec![vec![0.1, -0.4, 0.9], vec![-0.2, 0.3, 0.0]];
        let est = DensityEstimate::new(walkers, vec![0.5, 0.7], Alpha::Scale(1.0));
        let grid = Grid2D::square(-8.0, 8.0, 161).unwrap();
        let field = est.density_on_grid(&grid);
        assert_relative_eq!(field.integral(), 1.0, epsilon = 1e-6);
        for (i, j) in [(0, 0), (80, 80), (40, 120), (97, 3)] {
            let x = [grid.axis1.point(i), grid.axis2.point(j)];
            assert_eq!(field.at(i, j), est.density(&x), "node ({i},{j})");
        }
    }

    #[test]
    fn single_walker_grid_mass_is_one() {
        let est = DensityEstimate::new(vec![vec![0.0], vec![0.0]], vec![0.5, 0.5], Alpha::Scale(1.0));
        let grid = Grid2D::square(-6.0, 6.0, 241).unwrap();
        assert_relative_eq!(est.density_on_grid(&grid).integral(), 1.0, epsilon = 1e-6);
    }

    #[test]
    fn pointwise_integral_padded_grid() {
        // integral over a grid padded by 8 bandwidths beyond walker extremes
        let walkers = vec![vec![-1.0, 0.5, 2.0], vec![0.0, -0.7, 1.1]];
        let est = DensityEstimate::new(walkers, vec![0.4, 0.6], Alpha::Scale(1.0));
        let grid = Grid2D::new(
            crate::grid::Grid1D::new(-1.0 - 8.0 * 0.4, 2.0 + 8.0 * 0.4, 201).unwrap(),
            crate::grid::Grid1D::new(-0.7 - 8.0 * 0.6, 1.1 + 8.0 * 0.6, 201).unwrap(),
        );
        assert_relative_eq!(est.density_on_grid(&grid).integral(), 1.0, epsilon = 1e-6);
    }
}
