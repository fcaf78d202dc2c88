//! The walker/guide-wave state machine.
//!
//! Each of the M walkers per electron carries its own guide wave. Per step,
//! under a frozen snapshot of all walker positions: correlation lengths are
//! recomputed from the ensemble spread, every guide wave advances one
//! split-operator step under nucleus + smoothed electron-electron +
//! external-field potentials, walkers drift with the phase-gradient velocity
//! of their own wave, and (in complex time) a thermalization kick plus one
//! Metropolis step keep each walker sampling |phi|^2. A barrier separates
//! steps; random streams are per-walker functions of the master seed, so
//! results are bitwise independent of the worker count.

mod checkpoint;
mod splitop;
mod table;

pub use checkpoint::{load_checkpoint, save_checkpoint};
pub use splitop::{fft_momenta, phase_factor, AbsorberParams, SplitOperator1D, TimeStep};
pub use table::{ConvPlans, EffectivePotentialTable};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimators;
use crate::grid::{ComplexField1D, Grid1D};
use crate::kde::{self, Alpha, BandwidthRule, BandwidthState, DensityEstimate};
use crate::potentials::{LaserParams, SoftCoreParams};
use crate::rng::{purpose, stream};

/// Walker positions and escape flags, N electrons x M walkers.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkerEnsemble {
    positions: Vec<Vec<f64>>,
    escaped: Vec<Vec<bool>>,
}

impl WalkerEnsemble {
    pub fn new(positions: Vec<Vec<f64>>) -> Self {
        assert!(!positions.is_empty());
        let m = positions[0].len();
        assert!(m >= 1 && positions.iter().all(|p| p.len() == m));
        let escaped = positions.iter().map(|p| vec![false; p.len()]).collect();
        WalkerEnsemble { positions, escaped }
    }

    pub fn n_electrons(&self) -> usize {
        self.positions.len()
    }

    pub fn n_walkers(&self) -> usize {
        self.positions[0].len()
    }

    pub fn positions(&self) -> &[Vec<f64>] {
        &self.positions
    }

    pub fn escaped(&self) -> &[Vec<bool>] {
        &self.escaped
    }

    pub fn is_escaped(&self, electron: usize, walker: usize) -> bool {
        self.escaped[electron][walker]
    }

    /// Positions of walkers that have not left the grid.
    pub fn active_positions(&self, electron: usize) -> Vec<f64> {
        self.positions[electron]
            .iter()
            .zip(&self.escaped[electron])
            .filter(|(_, &e)| !e)
            .map(|(&x, _)| x)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PropagationMode {
    ComplexTime,
    RealTime,
}

/// Knobs of one propagation run. The absorber only acts in real time.
#[derive(Debug, Clone)]
pub struct PropagationConfig {
    pub dt: f64,
    pub mode: PropagationMode,
    pub n_steps: usize,
    /// Thermalization kick std; `None` means 0.1 x the current bandwidth.
    pub noise_amplitude: Option<f64>,
    pub metropolis_proposal_width: f64,
    pub absorber: Option<AbsorberParams>,
    pub bandwidth_rule: BandwidthRule,
    /// Metropolis sweeps when drawing the initial walker set.
    pub burn_in_sweeps: usize,
    /// Energy-trace cadence during ground-state preparation.
    pub trace_stride: usize,
    pub max_table_rows: usize,
}

impl PropagationConfig {
    pub fn complex_time(n_steps: usize) -> Self {
        PropagationConfig {
            dt: 0.02,
            mode: PropagationMode::ComplexTime,
            n_steps,
            noise_amplitude: None,
            // small proposals keep resampling slower than the guide waves'
            // complex-time relaxation; wide proposals decorrelate walker
            // pairs faster than the waves can condition on them and push
            // the ensemble toward the mean-field limit
            metropolis_proposal_width: 0.07,
            absorber: None,
            bandwidth_rule: BandwidthRule::RobustMin,
            burn_in_sweeps: 200,
            trace_stride: 5,
            max_table_rows: 512,
        }
    }

    pub fn real_time(n_steps: usize) -> Self {
        PropagationConfig {
            mode: PropagationMode::RealTime,
            absorber: Some(AbsorberParams::default()),
            ..PropagationConfig::complex_time(n_steps)
        }
    }

    pub fn time_step(&self) -> TimeStep {
        match self.mode {
            PropagationMode::ComplexTime => TimeStep::Complex(self.dt),
            PropagationMode::RealTime => TimeStep::Real(self.dt),
        }
    }
}

/// The full TDQMC state: walkers, guide waves, bandwidths, clock.
pub struct EnsembleState {
    grid: Grid1D,
    params: SoftCoreParams,
    alpha: Alpha,
    rule: BandwidthRule,
    /// Optional |x| <= r restriction for the bandwidth statistic.
    bandwidth_window: Option<f64>,
    walkers: WalkerEnsemble,
    /// Guide wave of (electron i, walker k) at index `i * M + k`.
    waves: Vec<ComplexField1D>,
    bandwidths: Option<BandwidthState>,
    t: f64,
    step: u64,
    master_seed: u64,
}

impl EnsembleState {
    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn params(&self) -> &SoftCoreParams {
        &self.params
    }

    pub fn alpha(&self) -> Alpha {
        self.alpha
    }

    pub fn walkers(&self) -> &WalkerEnsemble {
        &self.walkers
    }

    pub fn n_electrons(&self) -> usize {
        self.walkers.n_electrons()
    }

    pub fn n_walkers(&self) -> usize {
        self.walkers.n_walkers()
    }

    pub fn wave(&self, electron: usize, walker: usize) -> &ComplexField1D {
        &self.waves[electron * self.n_walkers() + walker]
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    /// Bandwidth state of the most recent step, if any step has run.
    pub fn bandwidths(&self) -> Option<&BandwidthState> {
        self.bandwidths.as_ref()
    }

    /// Switch the bandwidth spread statistic. Ionization runs want the
    /// plain standard deviation: the robust IQR-based spread ignores the
    /// escaping tail, freezing the correlation length while the cloud
    /// actually disperses.
    pub fn set_bandwidth_rule(&mut self, rule: BandwidthRule) {
        self.rule = rule;
        self.bandwidths = None;
    }

    /// Restrict the bandwidth statistic to walkers with |x| <= radius.
    /// During ionization the outgoing walkers drift arbitrarily far before
    /// reaching the absorber; including them makes the spread (and with it
    /// the correlation length and the electron-electron kernel) track the
    /// free fragments instead of the bound system.
    pub fn set_bandwidth_window(&mut self, radius: Option<f64>) {
        self.bandwidth_window = radius;
        self.bandwidths = None;
    }

    /// Silverman bandwidths over the non-escaped walkers of each electron,
    /// with the configured spread statistic and window.
    pub fn compute_bandwidths(&self) -> Result<BandwidthState> {
        self.bandwidths_using(self.rule, self.bandwidth_window)
    }

    /// Silverman bandwidths with an explicit spread statistic and window,
    /// independent of the configured ones.
    pub fn bandwidths_using(
        &self,
        rule: BandwidthRule,
        window: Option<f64>,
    ) -> Result<BandwidthState> {
        let per_electron = (0..self.n_electrons())
            .map(|i| {
                let active = self.walkers.active_positions(i);
                match window {
                    Some(r) => {
                        let core: Vec<f64> =
                            active.iter().copied().filter(|x| x.abs() <= r).collect();
                        kde::kde_bandwidth(&core, rule)
                    }
                    None => kde::kde_bandwidth(&active, rule),
                }
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(BandwidthState::new(per_electron, self.alpha))
    }

    /// KDE over the current walker snapshot (bandwidths from the non-escaped
    /// cloud, every walker contributing a kernel).
    ///
    /// The configuration-space estimate is a joint density over all N
    /// electron coordinates, so its per-axis bandwidth follows the
    /// N-dimensional Silverman rate s * M^(-1/(N+4)), not the 1D rate used
    /// for the correlation length. At the 1D rate the kinetic term of the
    /// ensemble energy is dominated by gradient noise from sparse regions.
    pub fn density_estimate(&self) -> Result<DensityEstimate> {
        self.density_estimate_using(self.rule, self.bandwidth_window)
    }

    /// Like [`density_estimate`](Self::density_estimate), but with an
    /// explicit bandwidth statistic. Ionization runs configure a plain-std
    /// windowed statistic to let the correlation length track the driven
    /// cloud; that statistic oversmooths a density estimate, so comparisons
    /// against the exact density pass the robust rule here instead.
    pub fn density_estimate_using(
        &self,
        rule: BandwidthRule,
        window: Option<f64>,
    ) -> Result<DensityEstimate> {
        let bw = self.bandwidths_using(rule, window)?;
        let m = self.n_walkers() as f64;
        let d = self.n_electrons() as f64;
        let rescale = m.powf(0.2 - 1.0 / (d + 4.0)) / 1.06;
        let eval_bw: Vec<f64> = bw.bandwidths().iter().map(|&b| b * rescale).collect();
        Ok(DensityEstimate::new(self.walkers.positions.clone(), eval_bw, self.alpha))
    }

    /// Drift every non-escaped walker by its Bohm velocity times `dt`.
    /// Real-time exits become sticky `escaped` flags; complex-time exits are
    /// redrawn from the walker's own guide wave.
    pub fn advance_walkers(&mut self, dt: f64, cfg: &PropagationConfig) {
        let m = self.n_walkers();
        let n_el = self.n_electrons();
        let velocities: Vec<f64> = (0..n_el * m)
            .into_par_iter()
            .map(|idx| {
                let (i, k) = (idx / m, idx % m);
                if self.walkers.escaped[i][k] {
                    return 0.0;
                }
                let wave = &self.waves[idx];
                let floor = amplitude_floor(wave);
                bohm_velocity_local(wave, self.walkers.positions[i][k], floor)
            })
            .collect();
        for i in 0..n_el {
            for k in 0..m {
                if self.walkers.escaped[i][k] {
                    continue;
                }
                let x = self.walkers.positions[i][k] + velocities[i * m + k] * dt;
                if self.grid.contains(x) {
                    self.walkers.positions[i][k] = x;
                } else if cfg.mode == PropagationMode::RealTime {
                    self.walkers.escaped[i][k] = true;
                    self.walkers.positions[i][k] = x.clamp(self.grid.x_min(), self.grid.x_max());
                } else {
                    // complex time conserves ensemble size: redraw from the
                    // walker's own wave
                    let mut rng = stream(self.master_seed, self.step, i as u64, k as u64, purpose::REDRAW);
                    let mut y = 0.5 * rng.sample::<f64, _>(StandardNormal)
                        * (self.grid.x_max() - self.grid.x_min())
                        * 0.1;
                    y = y.clamp(self.grid.x_min(), self.grid.x_max());
                    // wide proposals here: the chain starts far from the
                    // cloud and has only this one shot to equilibrate
                    for _ in 0..100 {
                        y = metropolis_step(&self.waves[idx_of(i, k, m)], y, 1.0, &mut rng);
                    }
                    self.walkers.positions[i][k] = y;
                }
            }
        }
    }

    /// Thermalization kick plus one Metropolis step per walker against its
    /// own |phi|^2 (complex-time only).
    pub fn thermalize_and_resample(&mut self, cfg: &PropagationConfig) -> Result<()> {
        debug_assert_eq!(cfg.mode, PropagationMode::ComplexTime);
        let bw = match (&self.bandwidths, cfg.noise_amplitude) {
            (_, Some(_)) | (Some(_), None) => self.bandwidths.clone(),
            (None, None) => Some(self.compute_bandwidths()?),
        };
        let m = self.n_walkers();
        let new_positions: Vec<f64> = (0..self.n_electrons() * m)
            .into_par_iter()
            .map(|idx| {
                let (i, k) = (idx / m, idx % m);
                let mut x = self.walkers.positions[i][k];
                let amp = cfg
                    .noise_amplitude
                    .unwrap_or_else(|| 0.1 * bw.as_ref().unwrap().bandwidth(i));
                if amp > 0.0 {
                    let mut rng =
                        stream(self.master_seed, self.step, i as u64, k as u64, purpose::THERMAL_NOISE);
                    let kick = amp * rng.sample::<f64, _>(StandardNormal);
                    if self.grid.contains(x + kick) {
                        x += kick;
                    }
                }
                if cfg.metropolis_proposal_width > 0.0 {
                    let mut rng =
                        stream(self.master_seed, self.step, i as u64, k as u64, purpose::METROPOLIS);
                    x = metropolis_step(&self.waves[idx], x, cfg.metropolis_proposal_width, &mut rng);
                }
                x
            })
            .collect();
        for i in 0..self.n_electrons() {
            for k in 0..m {
                self.walkers.positions[i][k] = new_positions[i * m + k];
            }
        }
        Ok(())
    }
}

#[inline]
fn idx_of(i: usize, k: usize, m: usize) -> usize {
    i * m + k
}

/// Relative amplitude below which the velocity is frozen to zero instead of
/// dividing by a near-node value.
const NODE_FLOOR: f64 = 1e-10;

fn amplitude_floor(wave: &ComplexField1D) -> f64 {
    let max_sq = wave.values().iter().map(|v| v.norm_sqr()).fold(0.0f64, f64::max);
    NODE_FLOOR * max_sq.sqrt()
}

/// Velocity from the local phase gradient: Im[phi' / phi] at x, with wave and
/// derivative linearly interpolated from neighboring nodes. Returns 0 when
/// the amplitude is below `floor` (node proximity).
fn bohm_velocity_local(wave: &ComplexField1D, x: f64, floor: f64) -> f64 {
    let grid = wave.grid();
    let Ok((i, w)) = grid.bracket(x) else { return 0.0 };
    let v = wave.values();
    let n = v.len();
    let h = grid.spacing();
    let deriv_at = |j: usize| -> Complex64 {
        if j == 0 {
            (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h)
        } else if j == n - 1 {
            (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h)
        } else {
            (v[j + 1] - v[j - 1]) / (2.0 * h)
        }
    };
    let value = v[i] * (1.0 - w) + v[i + 1] * w;
    if value.norm() < floor {
        return 0.0;
    }
    let deriv = deriv_at(i) * (1.0 - w) + deriv_at(i + 1) * w;
    (deriv / value).im
}

/// de Broglie-Bohm velocity of a guide wave at `x` (ħ = m = 1).
///
/// Errors if `x` is off-grid; near amplitude nodes the velocity is frozen to
/// zero rather than regularized.
pub fn bohm_velocity(wave: &ComplexField1D, x: f64) -> Result<f64> {
    if !wave.grid().contains(x) {
        return Err(Error::WalkerLeftGrid { x });
    }
    Ok(bohm_velocity_local(wave, x, amplitude_floor(wave)))
}

/// One Metropolis move targeting |phi(x)|^2. Proposals leaving the grid are
/// rejected.
fn metropolis_step(
    wave: &ComplexField1D,
    x: f64,
    width: f64,
    rng: &mut impl Rng,
) -> f64 {
    if width == 0.0 {
        return x;
    }
    let proposal = x + width * rng.sample::<f64, _>(StandardNormal);
    if !wave.grid().contains(proposal) {
        return x;
    }
    let p_old = wave.interpolate(x).map(|v| v.norm_sqr()).unwrap_or(0.0);
    let p_new = wave.interpolate(proposal).map(|v| v.norm_sqr()).unwrap_or(0.0);
    if p_new >= p_old || (p_old > 0.0 && rng.gen::<f64>() < p_new / p_old) {
        proposal
    } else {
        x
    }
}

/// Convergence record of a ground-state preparation.
#[derive(Debug, Clone, Default)]
pub struct GroundStateTrace {
    /// Steps at which the energy was sampled.
    pub energy_steps: Vec<u64>,
    pub energies: Vec<f64>,
    pub energy_stderrs: Vec<f64>,
    /// Per-step Silverman bandwidths, one entry per electron.
    pub sigma_kde: Vec<Vec<f64>>,
    /// Mean bandwidth per electron over the final 10% of steps.
    pub steady_bandwidth: Vec<f64>,
    /// alpha x mean steady bandwidth, averaged over electrons; infinite in
    /// mean-field mode.
    pub steady_nqcl: f64,
}

impl GroundStateTrace {
    fn finalize(&mut self, alpha: Alpha) {
        let n_steps = self.sigma_kde.len();
        if n_steps == 0 {
            return;
        }
        let tail = (n_steps / 10).max(1);
        let n_el = self.sigma_kde[0].len();
        self.steady_bandwidth = (0..n_el)
            .map(|i| {
                self.sigma_kde[n_steps - tail..].iter().map(|s| s[i]).sum::<f64>() / tail as f64
            })
            .collect();
        let mean_bw = self.steady_bandwidth.iter().sum::<f64>() / n_el as f64;
        self.steady_nqcl = match alpha {
            Alpha::Scale(a) => a * mean_bw,
            Alpha::MeanField => f64::INFINITY,
        };
    }
}

/// Shared per-run machinery: split-operator plans, node potential, absorber
/// mask, convolution plans.
struct StepMachinery {
    prop: SplitOperator1D,
    v_en: Vec<f64>,
    mask: Option<Vec<f64>>,
    plans: ConvPlans,
}

impl StepMachinery {
    fn new(grid: Grid1D, params: &SoftCoreParams, cfg: &PropagationConfig) -> Self {
        let prop = SplitOperator1D::new(grid, cfg.time_step());
        let v_en = grid.points().map(|x| params.v_en(x)).collect();
        let mask = match (cfg.mode, cfg.absorber) {
            (PropagationMode::RealTime, Some(a)) => Some(a.mask_on_grid(&grid)),
            _ => None,
        };
        StepMachinery { prop, v_en, mask, plans: ConvPlans::default() }
    }
}

/// Advance the whole ensemble by one bulk-synchronous step.
fn step_once(
    state: &mut EnsembleState,
    cfg: &PropagationConfig,
    laser: Option<&LaserParams>,
    mach: &mut StepMachinery,
) -> Result<()> {
    let n_el = state.n_electrons();
    let m = state.n_walkers();
    let grid = state.grid;
    let n = grid.n_points();
    let tau = mach.prop.tau();

    // frozen snapshot for the whole step
    let bw = state.compute_bandwidths()?;
    state.bandwidths = Some(bw.clone());

    let field_now = laser.map_or(0.0, |l| l.field(state.t + 0.5 * cfg.dt));

    // phase-factor rows per electron: exp(-i (V_en + V_ee_eff + x E) tau / 2)
    let mut phase_tables: Vec<(EffectivePotentialTable, Vec<Vec<Complex64>>)> =
        Vec::with_capacity(n_el);
    for i in 0..n_el {
        let j = (i + 1) % n_el; // the other electron's ensemble smooths me
        let table = EffectivePotentialTable::build(
            &grid,
            &state.walkers.positions[j],
            bw.correlation_length(j),
            &state.params,
            &mut mach.plans,
            cfg.max_table_rows,
        );
        let rows: Vec<Vec<Complex64>> = table
            .rows()
            .par_iter()
            .map(|row| {
                grid.points()
                    .zip(row)
                    .zip(&mach.v_en)
                    .map(|((x, &v_ee), &v_en)| {
                        phase_factor(0.5 * (v_en + v_ee + x * field_now), tau)
                    })
                    .collect()
            })
            .collect();
        phase_tables.push((table, rows));
    }

    // reference positions snapshot (walkers of the other electron)
    let refs: Vec<Vec<f64>> =
        (0..n_el).map(|i| state.walkers.positions[(i + 1) % n_el].clone()).collect();

    let step_no = state.step as usize;
    let renorm = cfg.mode == PropagationMode::ComplexTime;
    let mask = mach.mask.as_deref();
    let prop = &mach.prop;
    state
        .waves
        .par_iter_mut()
        .enumerate()
        .try_for_each_init(
            || (prop.make_scratch(), vec![Complex64::new(0.0, 0.0); n]),
            |(scratch, phase), (idx, wave)| -> Result<()> {
                let (i, k) = (idx / m, idx % m);
                let (table, rows) = &phase_tables[i];
                let (j, w) = table.locate(refs[i][k]);
                if w == 0.0 {
                    phase.copy_from_slice(&rows[j]);
                } else {
                    // complex lerp of unimodular factors plus a second-order
                    // magnitude restoration
                    let (a_row, b_row) = (&rows[j], &rows[j + 1]);
                    for ((p, &a), &b) in phase.iter_mut().zip(a_row).zip(b_row) {
                        let d = b - a;
                        let f = a + d * w;
                        *p = f * (1.0 + 0.5 * w * (1.0 - w) * d.norm_sqr());
                    }
                }
                prop.step(wave.values_mut(), phase, scratch);
                if renorm {
                    wave.normalize().map_err(|_| Error::PropagationBlowUp {
                        step: step_no,
                        detail: format!("wave ({i},{k}) lost its norm"),
                    })?;
                } else if let Some(mask) = mask {
                    for (v, &mv) in wave.values_mut().iter_mut().zip(mask) {
                        *v *= mv;
                    }
                }
                let norm = wave.norm_sq();
                if !norm.is_finite() {
                    return Err(Error::PropagationBlowUp {
                        step: step_no,
                        detail: format!("NaN/Inf in wave ({i},{k})"),
                    });
                }
                Ok(())
            },
        )?;

    state.advance_walkers(cfg.time_step().dt_real(), cfg);
    if cfg.mode == PropagationMode::ComplexTime {
        state.thermalize_and_resample(cfg)?;
    } else {
        state.t += cfg.dt;
    }
    state.step += 1;
    Ok(())
}

/// Prepare the correlated ground state: identical Gaussian guide waves,
/// Metropolis-drawn walkers, then `cfg.n_steps` complex-time steps with
/// thermalization. Returns the converged state and its convergence trace.
pub fn prepare_ground_state(
    alpha: Alpha,
    m: usize,
    grid: Grid1D,
    params: SoftCoreParams,
    cfg: &PropagationConfig,
    master_seed: u64,
) -> Result<(EnsembleState, GroundStateTrace)> {
    assert!(m >= 2, "need at least two walkers");
    assert_eq!(cfg.mode, PropagationMode::ComplexTime, "ground state uses complex time");
    let n_el = 2;

    let initial =
        ComplexField1D::from_fn(grid, |x| Complex64::new((-x * x).exp(), 0.0)).normalized()?;
    let waves = vec![initial.clone(); n_el * m];

    // initial walkers: Metropolis burn-in against |phi_0|^2
    let positions: Vec<Vec<f64>> = (0..n_el)
        .map(|i| {
            (0..m)
                .into_par_iter()
                .map(|k| {
                    let mut rng = stream(master_seed, 0, i as u64, k as u64, purpose::INIT_SAMPLE);
                    let mut x = 0.5 * rng.sample::<f64, _>(StandardNormal);
                    x = x.clamp(grid.x_min(), grid.x_max());
                    for _ in 0..cfg.burn_in_sweeps {
                        x = metropolis_step(&initial, x, cfg.metropolis_proposal_width, &mut rng);
                    }
                    x
                })
                .collect()
        })
        .collect();

    let mut state = EnsembleState {
        grid,
        params,
        alpha,
        rule: cfg.bandwidth_rule,
        bandwidth_window: None,
        walkers: WalkerEnsemble::new(positions),
        waves,
        bandwidths: None,
        t: 0.0,
        step: 0,
        master_seed,
    };

    let mut mach = StepMachinery::new(grid, &params, cfg);
    let mut trace = GroundStateTrace::default();
    for s in 0..cfg.n_steps {
        step_once(&mut state, cfg, None, &mut mach)?;
        let bw = state.bandwidths.as_ref().expect("set by step");
        trace.sigma_kde.push(bw.bandwidths().to_vec());
        if cfg.trace_stride > 0 && (s % cfg.trace_stride == 0 || s + 1 == cfg.n_steps) {
            let est = state.density_estimate()?;
            let (e, se) = estimators::energy_estimate(&est, &params)?;
            trace.energy_steps.push(state.step);
            trace.energies.push(e);
            trace.energy_stderrs.push(se);
        }
    }
    trace.finalize(alpha);
    Ok((state, trace))
}

/// Real-time propagation with optional laser coupling. The observer runs
/// once before the first step and after every step; it decides its own
/// sampling stride from the step index.
pub fn propagate_realtime<F>(
    state: &mut EnsembleState,
    laser: Option<&LaserParams>,
    cfg: &PropagationConfig,
    mut observe: F,
) -> Result<()>
where
    F: FnMut(u64, &EnsembleState) -> Result<()>,
{
    assert_eq!(cfg.mode, PropagationMode::RealTime);
    let mut mach = StepMachinery::new(state.grid, &state.params, cfg);
    observe(state.step, state)?;
    for _ in 0..cfg.n_steps {
        step_once(state, cfg, laser, &mut mach)?;
        observe(state.step, state)?;
    }
    Ok(())
}

/// Build a state directly from parts; used by the checkpoint loader and by
/// tests that need hand-made ensembles.
#[allow(clippy::too_many_arguments)]
pub(crate) fn state_from_parts(
    grid: Grid1D,
    params: SoftCoreParams,
    alpha: Alpha,
    rule: BandwidthRule,
    walkers: WalkerEnsemble,
    waves: Vec<ComplexField1D>,
    t: f64,
    step: u64,
    master_seed: u64,
) -> EnsembleState {
    assert_eq!(waves.len(), walkers.n_electrons() * walkers.n_walkers());
    EnsembleState {
        grid,
        params,
        alpha,
        rule,
        bandwidth_window: None,
        walkers,
        waves,
        bandwidths: None,
        t,
        step,
        master_seed,
    }
}


#[cfg(test)]
mod tests;
