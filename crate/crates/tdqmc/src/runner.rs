//! Mode dispatch: wires configuration into the engine, the exact solver and
//! the estimators, writes CSV artifacts and plots, and finishes every run
//! with a manifest holding the resolved configuration and a sha256 per
//! artifact. Reruns with the same configuration produce byte-identical
//! artifacts regardless of worker count.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::config::{Mode, RunConfig};
use crate::engine::{self, AbsorberParams, PropagationConfig, PropagationMode};
use crate::error::Result;
use crate::estimators::{self, ScanSetup};
use crate::grid::{Grid1D, Grid2D};
use crate::oracle;
use crate::plot::{self, Series};
use crate::potentials::{Envelope, LaserParams, SoftCoreParams};

/// Run one configured job inside a worker pool of the requested size.
pub fn run(cfg: &RunConfig) -> Result<()> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.out)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if cfg.workers > 0 {
        builder = builder.num_threads(cfg.workers);
    }
    let pool = builder.build().map_err(|e| {
        std::io::Error::new(std::io::ErrorKind::Other, format!("worker pool: {e}"))
    })?;
    let artifacts = pool.install(|| match cfg.mode {
        Mode::GroundState => run_ground_state(cfg),
        Mode::AlphaScan => run_alpha_scan(cfg),
        Mode::Realtime => run_realtime(cfg),
        Mode::Oracle => run_oracle(cfg),
    })?;
    write_manifest(cfg, &artifacts)?;
    Ok(())
}

fn propagation_config(cfg: &RunConfig, mode: PropagationMode, n_steps: usize) -> PropagationConfig {
    PropagationConfig {
        dt: if mode == PropagationMode::RealTime { cfg.realtime_dt } else { cfg.dt },
        mode,
        n_steps,
        noise_amplitude: (cfg.noise_amplitude >= 0.0).then_some(cfg.noise_amplitude),
        metropolis_proposal_width: cfg.proposal_width,
        absorber: (mode == PropagationMode::RealTime).then(AbsorberParams::default),
        bandwidth_rule: Default::default(),
        burn_in_sweeps: cfg.burn_in_sweeps,
        trace_stride: cfg.trace_stride,
        max_table_rows: cfg.max_table_rows,
    }
}

fn laser(cfg: &RunConfig) -> LaserParams {
    LaserParams {
        peak_amplitude: cfg.laser_amplitude,
        carrier_frequency: cfg.laser_frequency,
        n_cycles: cfg.laser_cycles as u32,
        envelope: Envelope::Sin2,
        t_start: 0.0,
    }
}

fn run_ground_state(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let grid = Grid1D::new(cfg.grid_min, cfg.grid_max, cfg.grid_points)?;
    let params = SoftCoreParams::default();
    let pcfg = propagation_config(cfg, PropagationMode::ComplexTime, cfg.ground_steps);
    let (state, trace) =
        engine::prepare_ground_state(cfg.alpha, cfg.walkers, grid, params, &pcfg, cfg.seed)?;

    let mut artifacts = Vec::new();

    let trace_path = cfg.out.join("trace.csv");
    let mut w = fs::File::create(&trace_path)?;
    writeln!(w, "step,energy,energy_stderr")?;
    for ((s, e), se) in trace.energy_steps.iter().zip(&trace.energies).zip(&trace.energy_stderrs) {
        writeln!(w, "{s},{e},{se}")?;
    }
    artifacts.push(trace_path);

    let sigma_path = cfg.out.join("bandwidth.csv");
    let mut w = fs::File::create(&sigma_path)?;
    writeln!(w, "step,sigma_kde_1,sigma_kde_2")?;
    for (s, bw) in trace.sigma_kde.iter().enumerate() {
        writeln!(w, "{},{},{}", s + 1, bw[0], bw[1])?;
    }
    artifacts.push(sigma_path);

    let est = state.density_estimate()?;
    let (energy, stderr) = estimators::energy_estimate(&est, &params)?;
    let summary_path = cfg.out.join("summary.txt");
    let mut w = fs::File::create(&summary_path)?;
    writeln!(w, "energy = {energy}")?;
    writeln!(w, "energy_stderr = {stderr}")?;
    writeln!(w, "sigma_kde = {:?}", trace.steady_bandwidth)?;
    writeln!(w, "nqcl = {}", trace.steady_nqcl)?;
    artifacts.push(summary_path);

    let ckpt_path = cfg.out.join("ground_state.ckpt");
    engine::save_checkpoint(&state, &ckpt_path)?;
    artifacts.push(ckpt_path);

    if cfg.plots {
        let path = cfg.out.join("energy_trace.svg");
        let pts: Vec<(f64, f64)> = trace
            .energy_steps
            .iter()
            .zip(&trace.energies)
            .map(|(&s, &e)| (s as f64, e))
            .collect();
        plot::line_chart_svg(
            &path,
            "ground-state relaxation",
            "step",
            "ensemble energy (a.u.)",
            &[Series::new("energy", pts)],
            false,
        )?;
        artifacts.push(path);
    }
    Ok(artifacts)
}

fn run_alpha_scan(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let grid = Grid1D::new(cfg.grid_min, cfg.grid_max, cfg.grid_points)?;
    let params = SoftCoreParams::default();
    let compare = Grid2D::square(cfg.compare_min, cfg.compare_max, cfg.compare_points)?;
    let (exact_field, exact_energy) =
        oracle::exact_ground_state(compare, &params, cfg.oracle_dt, cfg.oracle_tol, cfg.oracle_max_steps)?;
    let exact_density = oracle::exact_density(&exact_field);

    let pcfg = propagation_config(cfg, PropagationMode::ComplexTime, cfg.ground_steps);
    let setup = ScanSetup {
        grid,
        params,
        n_walkers: cfg.walkers,
        cfg: &pcfg,
        master_seed: cfg.seed,
        n_replicates: cfg.replicates,
        exact_density: &exact_density,
    };
    let records = estimators::alpha_scan(&setup, &cfg.alphas)?;

    let mut artifacts = Vec::new();
    let scan_path = cfg.out.join("scan.csv");
    estimators::write_scan_csv(&records, fs::File::create(&scan_path)?)?;
    artifacts.push(scan_path);

    let summary_path = cfg.out.join("summary.txt");
    let mut w = fs::File::create(&summary_path)?;
    writeln!(w, "exact_energy = {exact_energy}")?;
    if let Some(best) = estimators::argmin_mise(&records) {
        writeln!(w, "optimal_sigma = {}", best.sigma)?;
        writeln!(w, "optimal_energy = {}", best.energy)?;
        writeln!(w, "optimal_mise = {}", best.mise)?;
    }
    artifacts.push(summary_path);

    if cfg.plots {
        let finite: Vec<_> = records.iter().filter(|r| r.sigma.is_finite()).collect();
        let e_path = cfg.out.join("energy_vs_sigma.svg");
        plot::line_chart_svg(
            &e_path,
            "energy vs kernel width",
            "sigma (a.u.)",
            "energy (a.u.)",
            &[
                Series::new("tdqmc", finite.iter().map(|r| (r.sigma, r.energy)).collect()),
                Series::new(
                    "exact",
                    finite.iter().map(|r| (r.sigma, exact_energy)).collect(),
                ),
            ],
            false,
        )?;
        artifacts.push(e_path);
        let m_path = cfg.out.join("mise_vs_sigma.svg");
        plot::line_chart_svg(
            &m_path,
            "density error vs kernel width",
            "sigma (a.u.)",
            "mise",
            &[Series::new("mise", finite.iter().map(|r| (r.sigma, r.mise)).collect())],
            true,
        )?;
        artifacts.push(m_path);
    }
    Ok(artifacts)
}

fn run_realtime(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let grid = Grid1D::new(cfg.realtime_min, cfg.realtime_max, cfg.realtime_points)?;
    let params = SoftCoreParams::default();

    // ground-state preparation on the large real-time grid
    let gcfg = propagation_config(cfg, PropagationMode::ComplexTime, cfg.ground_steps);
    let (mut state, _) =
        engine::prepare_ground_state(cfg.alpha, cfg.walkers, grid, params, &gcfg, cfg.seed)?;
    state.set_bandwidth_rule(crate::kde::BandwidthRule::PlainStd);
    // bound + near-field region: wide enough to see the driven cloud spread,
    // narrow enough to ignore fragments drifting toward the absorber
    state.set_bandwidth_window(Some(2.0 * cfg.survival_radius));

    let pulse = laser(cfg);
    let n_steps = (pulse.duration() / cfg.realtime_dt).ceil() as usize;
    let pcfg = propagation_config(cfg, PropagationMode::RealTime, n_steps);

    // exact co-propagation on half the extent (ionized flux is absorbed in
    // both pictures before it matters for the comparison box)
    let exact_grid = Grid2D::square(
        cfg.realtime_min / 2.0,
        cfg.realtime_max / 2.0,
        (cfg.realtime_points / 2).max(64),
    )?;
    let (mut exact_field, _) =
        oracle::exact_ground_state(exact_grid, &params, cfg.oracle_dt, cfg.oracle_tol, cfg.oracle_max_steps)?;
    let mut exact_prop =
        oracle::ExactPropagator::new(exact_grid, &params, cfg.realtime_dt, Some(AbsorberParams::default()));

    let compare = Grid2D::square(cfg.compare_min, cfg.compare_max, cfg.compare_points)?;
    let mut done: u64 = 0;
    let series = estimators::realtime_series(
        &mut state,
        &pulse,
        &pcfg,
        &compare,
        cfg.survival_radius,
        cfg.sample_stride,
        |step| {
            while done < step {
                exact_prop.step(&mut exact_field, Some(&pulse))?;
                done += 1;
            }
            Ok((
                oracle::exact_density_on(&exact_field, &compare)?,
                oracle::exact_survival_probability(&exact_field, cfg.survival_radius),
            ))
        },
    )?;

    let mut artifacts = Vec::new();
    let csv_path = cfg.out.join("realtime.csv");
    estimators::write_realtime_csv(&series, fs::File::create(&csv_path)?)?;
    artifacts.push(csv_path);

    let ckpt_path = cfg.out.join("final_state.ckpt");
    engine::save_checkpoint(&state, &ckpt_path)?;
    artifacts.push(ckpt_path);

    if cfg.plots {
        let surv_path = cfg.out.join("survival.svg");
        plot::line_chart_svg(
            &surv_path,
            "survival probability",
            "t (a.u.)",
            "P(survival)",
            &[
                Series::new("tdqmc", series.samples.iter().map(|s| (s.t, s.survival_tdqmc)).collect()),
                Series::new("exact", series.samples.iter().map(|s| (s.t, s.survival_exact)).collect()),
            ],
            false,
        )?;
        artifacts.push(surv_path);

        let nqcl_path = cfg.out.join("nqcl.svg");
        plot::line_chart_svg(
            &nqcl_path,
            "correlation length under the pulse",
            "t (a.u.)",
            "sigma (a.u.)",
            &[
                Series::new("nqcl", series.samples.iter().map(|s| (s.t, s.nqcl)).collect()),
                Series::new("field x 10", series.samples.iter().map(|s| (s.t, 10.0 * s.field)).collect()),
            ],
            false,
        )?;
        artifacts.push(nqcl_path);

        let mise_path = cfg.out.join("mise.svg");
        plot::line_chart_svg(
            &mise_path,
            "density error under the pulse",
            "t (a.u.)",
            "mise",
            &[Series::new("mise", series.samples.iter().map(|s| (s.t, s.mise)).collect())],
            true,
        )?;
        artifacts.push(mise_path);
    }
    Ok(artifacts)
}

fn run_oracle(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let grid = Grid2D::square(cfg.oracle_min, cfg.oracle_max, cfg.oracle_points)?;
    let params = SoftCoreParams::default();
    let (field, energy) =
        oracle::exact_ground_state(grid, &params, cfg.oracle_dt, cfg.oracle_tol, cfg.oracle_max_steps)?;
    let density = oracle::exact_density(&field);

    let mut artifacts = Vec::new();
    let density_path = cfg.out.join("density.txt");
    oracle::write_density_text(&density, fs::File::create(&density_path)?)?;
    artifacts.push(density_path);

    let summary_path = cfg.out.join("summary.txt");
    let mut w = fs::File::create(&summary_path)?;
    writeln!(w, "exact_energy = {energy}")?;
    artifacts.push(summary_path);

    if cfg.plots {
        let map_path = cfg.out.join("density.png");
        plot::heatmap_png(&map_path, &density, &[0.5, 0.1, 0.01])?;
        artifacts.push(map_path);
    }
    Ok(artifacts)
}

fn sha256_hex(path: &Path) -> Result<String> {
    let bytes = fs::read(path)?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    Ok(format!("{:x}", hasher.finalize()))
}

fn write_manifest(cfg: &RunConfig, artifacts: &[PathBuf]) -> Result<()> {
    let path = cfg.out.join("manifest.txt");
    let mut w = fs::File::create(&path)?;
    writeln!(w, "## resolved configuration")?;
    write!(w, "{}", cfg.to_text())?;
    writeln!(w)?;
    writeln!(w, "## artifacts (sha256  file)")?;
    for a in artifacts {
        let name = a.file_name().map(|n| n.to_string_lossy().to_string()).unwrap_or_default();
        writeln!(w, "{}  {}", sha256_hex(a)?, name)?;
    }
    Ok(())
}
