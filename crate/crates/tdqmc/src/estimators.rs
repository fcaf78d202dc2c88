//! Observables over walker ensembles: ensemble-averaged total energy,
//! density error against the exact two-electron solution, survival
//! probability, and the correlation-length scan that locates the optimum.

use crate::engine::{self, EnsembleState, PropagationConfig, WalkerEnsemble};
use crate::error::{Error, Result};
use crate::grid::{Grid1D, Grid2D, RealField2D};
use crate::kde::{Alpha, BandwidthRule, DensityEstimate};
use crate::potentials::{LaserParams, SoftCoreParams};
use crate::rng::mix;
use crate::stats;

/// Grid nodes with kernel density below this are excluded from the energy
/// functional; it sits well above kernel-truncation residue and removes a
/// negligible fraction of the mass.
pub const DENSITY_FLOOR: f64 = 1e-10;

/// The energy functional is evaluated on a deliberately oversmoothed density:
/// its sampling-noise contribution falls like 1/(M h^4) while the smoothing
/// penalty grows only like h^4 near the minimum, so a kernel wider than the
/// density-estimation bandwidth flattens the overall bias.
pub const ENERGY_BANDWIDTH_INFLATION: f64 = 1.5;

/// Number of disjoint walker subsets used for the standard-error estimate.
const ENERGY_SPLITS: usize = 4;

/// Ensemble energy from the walker kernel density and its standard error.
///
/// The energy is the density functional
///   E[P] = integral of (grad P)^2 / (8 P) + V(r) P(r)
/// evaluated on an adaptive uniform grid, with the pointwise kernel-sampling
/// variance of grad P subtracted (clamped at zero) before forming the
/// gradient term. The raw plug-in functional inflates the kinetic term by
/// the Monte Carlo variance of the estimated gradient; the subtraction
/// removes that inflation to leading order, leaving only the small
/// oversmoothing penalty. For a real nodeless state the functional is the
/// Rayleigh quotient of sqrt(P), so it is minimized exactly when P matches
/// the true ground density.
///
/// The standard error comes from evaluating the same functional on four
/// disjoint walker subsets sharing the full-ensemble bandwidths and grid.
/// Two-electron ensembles only.
pub fn energy_estimate(est: &DensityEstimate, params: &SoftCoreParams) -> Result<(f64, f64)> {
    if est.n_electrons() != 2 {
        return Err(Error::GridMismatch("energy functional is two-electron only"));
    }
    let w = est.walkers();
    let m = est.n_walkers();
    let h: Vec<f64> =
        est.bandwidths().iter().map(|&b| b * ENERGY_BANDWIDTH_INFLATION).collect();
    if !h.iter().all(|&x| x.is_finite() && x > 0.0) {
        return Err(Error::DegenerateField);
    }
    let (h0, h1) = (h[0], h[1]);
    let h_min = h0.min(h1);
    let h_max = h0.max(h1);

    // adaptive square evaluation window: cover every walker plus the kernel
    // reach, at a spacing that resolves the smoothed density
    let mut ext: f64 = 0.0;
    for e in w {
        for &x in e {
            ext = ext.max(x.abs());
        }
    }
    let reach_len = 7.0 * h_max;
    let half_ext = ext + reach_len;
    let spacing_target = h_min / 2.0;
    let n = (((2.0 * half_ext / spacing_target).ceil() as usize) + 1).clamp(65, 1025);
    let dx = 2.0 * half_ext / (n - 1) as f64;
    let norm = 1.0 / (2.0 * std::f64::consts::PI * h0 * h1);
    if !norm.is_finite() || norm <= 0.0 {
        return Err(Error::DegenerateField);
    }
    let reach = (reach_len / dx).ceil() as i64;

    // per-subset accumulators: density, per-axis gradient, per-axis sum of
    // squared kernel gradients (for the variance correction); the full
    // ensemble is the sum of the subsets
    let mut p = vec![[0.0f64; ENERGY_SPLITS]; n * n];
    let mut g = vec![[[0.0f64; ENERGY_SPLITS]; 2]; n * n];
    let mut s = vec![[[0.0f64; ENERGY_SPLITS]; 2]; n * n];
    let node = |x: f64| -> i64 { ((x + half_ext) / dx).round() as i64 };
    for l in 0..m {
        let q = l % ENERGY_SPLITS;
        let (x, y) = (w[0][l], w[1][l]);
        let (ci, cj) = (node(x), node(y));
        let lo_i = (ci - reach).max(0);
        let hi_i = (ci + reach).min(n as i64 - 1);
        let lo_j = (cj - reach).max(0);
        let hi_j = (cj + reach).min(n as i64 - 1);
        for i in lo_i..=hi_i {
            let d0 = (-half_ext + i as f64 * dx - x) / h0;
            for j in lo_j..=hi_j {
                let d1 = (-half_ext + j as f64 * dx - y) / h1;
                let kern = norm * (-0.5 * (d0 * d0 + d1 * d1)).exp();
                let idx = (i * n as i64 + j) as usize;
                p[idx][q] += kern;
                let a = -d0 / h0 * kern;
                let b = -d1 / h1 * kern;
                g[idx][0][q] += a;
                g[idx][1][q] += b;
                s[idx][0][q] += a * a;
                s[idx][1][q] += b * b;
            }
        }
    }

    let counts: [f64; ENERGY_SPLITS] = {
        let mut c = [0usize; ENERGY_SPLITS];
        for l in 0..m {
            c[l % ENERGY_SPLITS] += 1;
        }
        c.map(|x| x as f64)
    };
    if counts.iter().any(|&c| c < 2.0) {
        return Err(Error::EmptyEnsemble);
    }
    // index ENERGY_SPLITS = full ensemble
    let mut t_acc = [0.0f64; ENERGY_SPLITS + 1];
    let mut v_acc = [0.0f64; ENERGY_SPLITS + 1];
    let mut mass = [0.0f64; ENERGY_SPLITS + 1];
    let mf = m as f64;
    for i in 0..n {
        let gx = -half_ext + i as f64 * dx;
        for j in 0..n {
            let gy = -half_ext + j as f64 * dx;
            let idx = i * n + j;
            let vpot = params.v_en(gx) + params.v_en(gy) + params.v_ee(gx, gy);
            for set in 0..=ENERGY_SPLITS {
                let (cnt, pd, gs, ss) = if set == ENERGY_SPLITS {
                    (
                        mf,
                        p[idx].iter().sum::<f64>(),
                        [g[idx][0].iter().sum::<f64>(), g[idx][1].iter().sum::<f64>()],
                        [s[idx][0].iter().sum::<f64>(), s[idx][1].iter().sum::<f64>()],
                    )
                } else {
                    (
                        counts[set],
                        p[idx][set],
                        [g[idx][0][set], g[idx][1][set]],
                        [s[idx][0][set], s[idx][1][set]],
                    )
                };
                let pd = pd / cnt;
                if pd < DENSITY_FLOOR {
                    continue;
                }
                let mut tk = 0.0;
                for axis in 0..2 {
                    let gd = gs[axis] / cnt;
                    let var = (ss[axis] / cnt - gd * gd) / cnt;
                    tk += 0.125 * (gd * gd - var).max(0.0) / pd;
                }
                t_acc[set] += tk;
                v_acc[set] += vpot * pd;
                mass[set] += pd;
            }
        }
    }
    if mass[ENERGY_SPLITS] <= 0.0 || !mass[ENERGY_SPLITS].is_finite() {
        return Err(Error::DegenerateField);
    }
    let energy_of = |set: usize| (t_acc[set] + v_acc[set]) / mass[set];
    let full = energy_of(ENERGY_SPLITS);
    let subs: Vec<f64> = (0..ENERGY_SPLITS)
        .filter(|&q| mass[q] > 0.0)
        .map(energy_of)
        .collect();
    let se = if subs.len() > 1 {
        stats::sample_std(&subs) / (subs.len() as f64).sqrt()
    } else {
        0.0
    };
    Ok((full, se))
}

/// Mean integrated squared error between a kernel density and the exact
/// two-electron density on a shared grid. Both are normalized to unit mass
/// before comparison so only shape differences count.
pub fn mise(estimate: &RealField2D, exact: &RealField2D) -> Result<f64> {
    if estimate.grid() != exact.grid() {
        return Err(Error::GridMismatch("mise inputs live on different grids"));
    }
    let (a, b) = (estimate.integral(), exact.integral());
    if a <= 0.0 || b <= 0.0 {
        return Err(Error::DegenerateField);
    }
    let da = estimate.grid().cell_area();
    let mut acc = 0.0;
    for (&p, &q) in estimate.values().iter().zip(exact.values()) {
        let d = p / a - q / b;
        acc += d * d * da;
    }
    Ok(acc)
}

/// Fraction of walker configurations with every electron inside |x| <= radius
/// and no escape flag set.
pub fn survival_probability(walkers: &WalkerEnsemble, radius: f64) -> f64 {
    let m = walkers.n_walkers();
    let n_el = walkers.n_electrons();
    let surviving = (0..m)
        .filter(|&k| {
            (0..n_el).all(|i| !walkers.is_escaped(i, k) && walkers.positions()[i][k].abs() <= radius)
        })
        .count();
    surviving as f64 / m as f64
}

/// One scanned correlation-length point.
#[derive(Debug, Clone)]
pub struct ScanRecord {
    pub alpha: Alpha,
    /// Converged kernel width (alpha x steady bandwidth); infinite for the
    /// mean-field point.
    pub sigma: f64,
    pub energy: f64,
    pub energy_stderr: f64,
    pub mise: f64,
    pub mise_stderr: f64,
}

/// Inputs shared by every point of a scan.
pub struct ScanSetup<'a> {
    pub grid: Grid1D,
    pub params: SoftCoreParams,
    pub n_walkers: usize,
    pub cfg: &'a PropagationConfig,
    pub master_seed: u64,
    /// Ground-state replicates averaged per point for the density error.
    pub n_replicates: usize,
    /// Exact two-electron ground density, already on the comparison grid.
    pub exact_density: &'a RealField2D,
}

/// Scan a set of kernel-width scale factors (plus optionally the mean-field
/// point) and record energy and density error per point. Failing points are
/// reported and skipped rather than aborting the scan. Results are sorted by
/// kernel width.
pub fn alpha_scan(setup: &ScanSetup, alphas: &[Alpha]) -> Result<Vec<ScanRecord>> {
    let mut records = Vec::new();
    for (ai, &alpha) in alphas.iter().enumerate() {
        match scan_point(setup, alpha, ai as u64) {
            Ok(rec) => records.push(rec),
            Err(e) => eprintln!("scan point {alpha:?} failed: {e}"),
        }
    }
    if records.is_empty() {
        return Err(Error::DegenerateEnsemble("every scan point failed"));
    }
    records.sort_by(|x, y| x.sigma.total_cmp(&y.sigma));
    Ok(records)
}

fn scan_point(setup: &ScanSetup, alpha: Alpha, _alpha_index: u64) -> Result<ScanRecord> {
    let reps = setup.n_replicates.max(1);
    let mut energies = Vec::with_capacity(reps);
    let mut mises = Vec::with_capacity(reps);
    let mut sigma = 0.0;
    for r in 0..reps {
        // common random numbers: replicate r reuses the same seed at every
        // scan point, so differences between points reflect the kernel width
        // rather than independent sampling noise
        let seed = mix(setup.master_seed ^ mix(0x5ca1ab1e + r as u64));
        let (state, trace) = engine::prepare_ground_state(
            alpha,
            setup.n_walkers,
            setup.grid,
            setup.params,
            setup.cfg,
            seed,
        )?;
        let est = state.density_estimate()?;
        let (e, _) = energy_estimate(&est, &setup.params)?;
        energies.push(e);
        let grid2 = setup.exact_density.grid();
        let kde = est.density_on_grid(grid2);
        mises.push(mise(&kde, setup.exact_density)?);
        sigma += trace.steady_nqcl / reps as f64;
    }
    let (e_mean, e_se) = mean_and_se(&energies);
    let (m_mean, m_se) = mean_and_se(&mises);
    Ok(ScanRecord {
        alpha,
        sigma,
        energy: e_mean,
        energy_stderr: e_se,
        mise: m_mean,
        mise_stderr: m_se,
    })
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let mean = stats::mean(xs);
    let se = if xs.len() > 1 { stats::sample_std(xs) / (xs.len() as f64).sqrt() } else { 0.0 };
    (mean, se)
}

/// Scan records with the smallest density error.
pub fn argmin_mise(records: &[ScanRecord]) -> Option<&ScanRecord> {
    records.iter().filter(|r| r.sigma.is_finite()).min_by(|a, b| a.mise.total_cmp(&b.mise))
}

/// One sampled instant of a strong-field run.
#[derive(Debug, Clone)]
pub struct RealtimeSample {
    pub t: f64,
    pub field: f64,
    /// Mean kernel width (alpha x bandwidth averaged over electrons).
    pub nqcl: f64,
    pub mise: f64,
    pub survival_tdqmc: f64,
    pub survival_exact: f64,
}

/// Observer wiring for a strong-field run: samples the kernel width, the
/// density error against a co-propagated exact density, and both survival
/// probabilities every `stride` steps.
pub struct RealtimeSeries {
    pub samples: Vec<RealtimeSample>,
}

/// Drive a real-time TDQMC run while the caller supplies, per sampled step,
/// the exact density and exact survival probability at that instant.
#[allow(clippy::too_many_arguments)]
pub fn realtime_series<F>(
    state: &mut EnsembleState,
    laser: &LaserParams,
    cfg: &PropagationConfig,
    comparison_grid: &Grid2D,
    survival_radius: f64,
    stride: usize,
    mut exact_at: F,
) -> Result<RealtimeSeries>
where
    F: FnMut(u64) -> Result<(RealField2D, f64)>,
{
    assert!(stride >= 1);
    let mut samples = Vec::new();
    let alpha = state.alpha();
    engine::propagate_realtime(state, Some(laser), cfg, |step, st| {
        if step % stride as u64 != 0 && step != cfg.n_steps as u64 {
            return Ok(());
        }
        let (exact_density, survival_exact) = exact_at(step)?;
        // density-estimation bandwidth for the exact comparison; the
        // configured statistic (plain-std, windowed during ionization)
        // belongs to the correlation length, not to the KDE
        let est = st.density_estimate_using(crate::kde::BandwidthRule::RobustMin, None)?;
        let kde = est.density_on_grid(comparison_grid);
        let err = mise(&kde, &exact_density)?;
        let bw = st.compute_bandwidths()?;
        let nqcl = match alpha {
            Alpha::Scale(a) => {
                a * bw.bandwidths().iter().sum::<f64>() / bw.bandwidths().len() as f64
            }
            Alpha::MeanField => f64::INFINITY,
        };
        samples.push(RealtimeSample {
            t: st.t(),
            field: laser.field(st.t()),
            nqcl,
            mise: err,
            survival_tdqmc: survival_probability(st.walkers(), survival_radius),
            survival_exact,
        });
        Ok(())
    })?;
    Ok(RealtimeSeries { samples })
}

/// CSV with one row per scanned kernel width.
pub fn write_scan_csv(records: &[ScanRecord], mut w: impl std::io::Write) -> Result<()> {
    writeln!(w, "alpha,sigma,energy,energy_stderr,mise,mise_stderr")?;
    for r in records {
        let alpha = match r.alpha {
            Alpha::Scale(a) => format!("{a}"),
            Alpha::MeanField => "mean_field".to_string(),
        };
        writeln!(
            w,
            "{alpha},{},{},{},{},{}",
            r.sigma, r.energy, r.energy_stderr, r.mise, r.mise_stderr
        )?;
    }
    Ok(())
}

/// CSV with one row per sampled instant of a strong-field run.
pub fn write_realtime_csv(series: &RealtimeSeries, mut w: impl std::io::Write) -> Result<()> {
    writeln!(w, "t,field,nqcl,mise,survival_tdqmc,survival_exact")?;
    for s in &series.samples {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            s.t, s.field, s.nqcl, s.mise, s.survival_tdqmc, s.survival_exact
        )?;
    }
    Ok(())
}

/// Convenience: fresh kernel density of a state on a grid.
pub fn state_density(state: &EnsembleState, grid: &Grid2D) -> Result<RealField2D> {
    Ok(state.density_estimate()?.density_on_grid(grid))
}

/// Ground-state density from raw walker positions (used by tests and the
/// oracle comparisons).
pub fn snapshot_density(
    walkers: Vec<Vec<f64>>,
    alpha: Alpha,
    rule: BandwidthRule,
    grid: &Grid2D,
) -> Result<RealField2D> {
    Ok(DensityEstimate::from_snapshot(walkers, alpha, rule)?.density_on_grid(grid))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid2D;
    use approx::assert_relative_eq;

    // Independent oracle: the same functional written naively, evaluating
    // every kernel at every grid node without windowing, subset bookkeeping,
    // or accumulator reuse.
    fn naive_energy(walkers: &[Vec<f64>], bw: &[f64], params: &SoftCoreParams) -> f64 {
        let m = walkers[0].len();
        let mf = m as f64;
        let h = [bw[0] * ENERGY_BANDWIDTH_INFLATION, bw[1] * ENERGY_BANDWIDTH_INFLATION];
        let ext = walkers
            .iter()
            .flat_map(|e| e.iter())
            .fold(0.0f64, |a, &x| a.max(x.abs()));
        let half_ext = ext + 7.0 * h[0].max(h[1]);
        let spacing_target = h[0].min(h[1]) / 2.0;
        let n = (((2.0 * half_ext / spacing_target).ceil() as usize) + 1).clamp(65, 1025);
        let dx = 2.0 * half_ext / (n - 1) as f64;
        let norm = 1.0 / (2.0 * std::f64::consts::PI * h[0] * h[1]);
        let reach_len = 7.0 * h[0].max(h[1]);
        let reach_nodes = (reach_len / dx).ceil() * dx;
        let (mut t, mut v, mut mass) = (0.0, 0.0, 0.0);
        for i in 0..n {
            let gx = -half_ext + i as f64 * dx;
            for j in 0..n {
                let gy = -half_ext + j as f64 * dx;
                let (mut p, mut g0, mut g1, mut s0, mut s1) = (0.0, 0.0, 0.0, 0.0, 0.0);
                for l in 0..m {
                    // mirror the fast path's square kernel window exactly
                    let (nx, ny) = (
                        ((walkers[0][l] + half_ext) / dx).round() * dx - half_ext,
                        ((walkers[1][l] + half_ext) / dx).round() * dx - half_ext,
                    );
                    if (gx - nx).abs() > reach_nodes + 1e-12
                        || (gy - ny).abs() > reach_nodes + 1e-12
                    {
                        continue;
                    }
                    let d0 = (gx - walkers[0][l]) / h[0];
                    let d1 = (gy - walkers[1][l]) / h[1];
                    let kern = norm * (-0.5 * (d0 * d0 + d1 * d1)).exp();
                    p += kern;
                    let a = -d0 / h[0] * kern;
                    let b = -d1 / h[1] * kern;
                    g0 += a;
                    g1 += b;
                    s0 += a * a;
                    s1 += b * b;
                }
                let pd = p / mf;
                if pd < DENSITY_FLOOR {
                    continue;
                }
                let mut tk = 0.0;
                for (g, s) in [(g0, s0), (g1, s1)] {
                    let gd = g / mf;
                    let var = (s / mf - gd * gd) / mf;
                    tk += 0.125 * (gd * gd - var).max(0.0) / pd;
                }
                t += tk;
                v += (params.v_en(gx) + params.v_en(gy) + params.v_ee(gx, gy)) * pd;
                mass += pd;
            }
        }
        (t + v) / mass
    }

    fn toy_walkers(m: usize) -> Vec<Vec<f64>> {
        // deterministic low-discrepancy-ish cloud
        let phi = 0.6180339887498949;
        let pos = |i: usize, off: f64| -> Vec<f64> {
            (0..m)
                .map(|k| {
                    let u = ((k as f64 + off) * phi).fract();
                    2.0 * crate::stats::inverse_normal_cdf_approx(u.clamp(1e-4, 1.0 - 1e-4))
                        + 0.1 * i as f64
                })
                .collect()
        };
        vec![pos(0, 0.25), pos(1, 0.75)]
    }

    #[test]
    fn energy_matches_naive_sum() {
        let params = SoftCoreParams::default();
        let walkers = toy_walkers(300);
        let est = DensityEstimate::from_snapshot(
            walkers.clone(),
            Alpha::Scale(1.0),
            BandwidthRule::RobustMin,
        )
        .unwrap();
        let bw = est.bandwidths().to_vec();
        let expect = naive_energy(&walkers, &bw, &params);
        let (got, se) = energy_estimate(&est, &params).unwrap();
        assert_relative_eq!(got, expect, max_relative = 1e-9);
        assert!(se > 0.0);
    }

    #[test]
    fn mise_zero_for_identical_and_scales_quadratically() {
        let grid = Grid2D::square(-5.0, 5.0, 41).unwrap();
        let mut base = RealField2D::zeros(grid.clone());
        for i in 0..41 {
            for j in 0..41 {
                let (x, y) = (grid.axis1.point(i), grid.axis2.point(j));
                base.values_mut()[i * 41 + j] = (-(x * x + y * y) / 2.0).exp();
            }
        }
        assert_relative_eq!(mise(&base, &base).unwrap(), 0.0);
        // normalization invariance: scaling one input changes nothing
        let mut scaled = base.clone();
        for v in scaled.values_mut() {
            *v *= 7.0;
        }
        assert_relative_eq!(mise(&scaled, &base).unwrap(), 0.0, epsilon = 1e-14);

        // perturb with a normalized bump and check the error is positive
        let mut bumped = base.clone();
        for (idx, v) in bumped.values_mut().iter_mut().enumerate() {
            let i = idx / 41;
            let x = grid.axis1.point(i);
            *v += 0.05 * (-(x - 1.0) * (x - 1.0)).exp();
        }
        let e1 = mise(&bumped, &base).unwrap();
        assert!(e1 > 0.0);
    }

    #[test]
    fn mise_rejects_mismatched_grids() {
        let a = RealField2D::zeros(Grid2D::square(-5.0, 5.0, 41).unwrap());
        let b = RealField2D::zeros(Grid2D::square(-5.0, 5.0, 43).unwrap());
        assert!(matches!(
            mise(&a, &b),
            Err(Error::GridMismatch(_)) | Err(Error::DegenerateField)
        ));
    }

    #[test]
    fn survival_counts_configurations() {
        let mut w = WalkerEnsemble::new(vec![vec![0.0, 3.0, 0.5, -0.2], vec![0.1, 0.0, 9.0, 0.3]]);
        // walker 1: electron 0 outside radius 2; walker 2: electron 1 outside
        assert_relative_eq!(survival_probability(&w, 2.0), 0.5);
        // escape flags override position
        crate::engine::test_support::mark_escaped(&mut w, 0, 0);
        assert_relative_eq!(survival_probability(&w, 2.0), 0.25);
    }

    #[test]
    fn underflow_guard_triggers() {
        // bandwidths so large that the kernel normalization underflows and
        // the evaluated density degenerates
        let walkers = toy_walkers(100);
        let est = DensityEstimate::new(walkers, vec![1e160, 1e160], Alpha::Scale(1.0));
        assert!(matches!(
            energy_estimate(&est, &SoftCoreParams::default()),
            Err(Error::DegenerateField) | Err(Error::EmptyEnsemble)
        ));
    }
}
