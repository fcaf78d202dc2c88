use super::*;
use crate::estimators;
use approx::assert_relative_eq;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn plane_wave(grid: Grid1D, momentum: f64) -> ComplexField1D {
    ComplexField1D::from_fn(grid, |x| Complex64::new(0.0, momentum * x).exp())
}

fn ground_gaussian(grid: Grid1D) -> ComplexField1D {
    ComplexField1D::from_fn(grid, |x| Complex64::new((-0.5 * x * x).exp(), 0.0))
        .normalized()
        .unwrap()
}

#[test]
fn plane_wave_velocity_is_momentum() {
    let grid = Grid1D::new(-10.0, 10.0, 401).unwrap();
    let wave = plane_wave(grid, 0.75);
    for &x in &[-5.0, -1.3, 0.0, 2.0, 7.7] {
        assert_relative_eq!(bohm_velocity(&wave, x).unwrap(), 0.75, epsilon = 1e-3);
    }
}

#[test]
fn real_wave_velocity_is_zero() {
    let grid = Grid1D::new(-10.0, 10.0, 201).unwrap();
    let wave = ground_gaussian(grid);
    for &x in &[-3.0, 0.0, 1.5] {
        assert_relative_eq!(bohm_velocity(&wave, x).unwrap(), 0.0, epsilon = 1e-12);
    }
}

#[test]
fn node_proximity_freezes_velocity() {
    // first excited oscillator state has a node at x = 0 where the naive
    // quotient diverges
    let grid = Grid1D::new(-10.0, 10.0, 801).unwrap();
    let wave = ComplexField1D::from_fn(grid, |x| Complex64::new(x * (-0.5 * x * x).exp(), 0.0))
        .normalized()
        .unwrap();
    let near_node = grid.point(400); // x = 0 exactly on a node of the grid
    assert_eq!(bohm_velocity(&wave, near_node).unwrap(), 0.0);
}

#[test]
fn off_grid_velocity_errors() {
    let grid = Grid1D::new(-5.0, 5.0, 64).unwrap();
    let wave = ground_gaussian(grid);
    assert!(matches!(bohm_velocity(&wave, 6.0), Err(Error::WalkerLeftGrid { .. })));
}

#[test]
fn metropolis_equilibrates_to_wave_density() {
    let grid = Grid1D::new(-12.0, 12.0, 512).unwrap();
    let wave = ground_gaussian(grid);
    let n = 4000;
    let samples: Vec<f64> = (0..n)
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + k);
            let mut x = 0.0;
            for _ in 0..150 {
                x = metropolis_step(&wave, x, 1.0, &mut rng);
            }
            x
        })
        .collect();
    // |phi|^2 is Normal(0, 1/sqrt(2))
    let sigma = std::f64::consts::FRAC_1_SQRT_2;
    let d = crate::stats::ks_statistic(&samples, |x| crate::stats::normal_cdf(x, 0.0, sigma));
    assert!(d < 0.02, "KS statistic {d} too large");
}

#[test]
fn zero_noise_zero_width_is_identity() {
    let grid = Grid1D::new(-10.0, 10.0, 128).unwrap();
    let wave = ground_gaussian(grid);
    let walkers = WalkerEnsemble::new(vec![vec![-1.0, 0.5, 2.0], vec![0.0, 1.0, -2.5]]);
    let waves = vec![wave; 6];
    let mut state = state_from_parts(
        grid,
        SoftCoreParams::default(),
        Alpha::Scale(1.0),
        BandwidthRule::RobustMin,
        walkers.clone(),
        waves,
        0.0,
        0,
        7,
    );
    let mut cfg = PropagationConfig::complex_time(1);
    cfg.noise_amplitude = Some(0.0);
    cfg.metropolis_proposal_width = 0.0;
    state.thermalize_and_resample(&cfg).unwrap();
    assert_eq!(state.walkers().positions(), walkers.positions());
}

fn smoke_state(m: usize, steps: usize, seed: u64) -> (EnsembleState, GroundStateTrace) {
    let grid = Grid1D::new(-15.0, 15.0, 128).unwrap();
    let mut cfg = PropagationConfig::complex_time(steps);
    cfg.burn_in_sweeps = 60;
    cfg.trace_stride = 10;
    prepare_ground_state(Alpha::Scale(8.0), m, grid, SoftCoreParams::default(), &cfg, seed).unwrap()
}

#[test]
fn ground_state_energy_in_expected_range() {
    let (state, trace) = smoke_state(128, 300, 42);
    let est = state.density_estimate().unwrap();
    let (e, _) = estimators::energy_estimate(&est, state.params()).unwrap();
    // small-ensemble smoke: the two-electron soft-core atom sits near -2.4
    assert!((-2.7..=-2.1).contains(&e), "ground energy {e} out of range");
    assert!(trace.steady_nqcl.is_finite() && trace.steady_nqcl > 0.0);
    // energy trace should have relaxed: late mean below early mean
    let n = trace.energies.len();
    assert!(n > 5);
    let early = trace.energies[..2].iter().sum::<f64>() / 2.0;
    let late = trace.energies[n - 3..].iter().sum::<f64>() / 3.0;
    assert!(late < early + 0.05, "no relaxation: early {early}, late {late}");
}

#[test]
fn ground_state_is_deterministic_across_thread_pools() {
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| smoke_state(48, 40, 9))
    };
    let (a, _) = run(1);
    let (b, _) = run(3);
    assert_eq!(a.walkers().positions(), b.walkers().positions());
    for i in 0..2 {
        for k in 0..48 {
            assert_eq!(a.wave(i, k).values(), b.wave(i, k).values());
        }
    }
}

#[test]
fn realtime_without_field_conserves_norm_and_state() {
    let (mut state, _) = smoke_state(32, 30, 5);
    let mut cfg = PropagationConfig::real_time(200);
    cfg.absorber = None;
    cfg.dt = 0.02;
    let norms_before: Vec<f64> =
        (0..2).flat_map(|i| (0..32).map(move |k| (i, k))).map(|(i, k)| state.wave(i, k).norm_sq()).collect();
    propagate_realtime(&mut state, None, &cfg, |_, _| Ok(())).unwrap();
    for (idx, (i, k)) in (0..2).flat_map(|i| (0..32).map(move |k| (i, k))).enumerate() {
        let after = state.wave(i, k).norm_sq();
        assert!(
            (after - norms_before[idx]).abs() < 1e-8,
            "norm drifted for wave ({i},{k}): {} -> {after}",
            norms_before[idx]
        );
    }
    assert_relative_eq!(state.t(), 200.0 * 0.02, epsilon = 1e-12);
}

#[test]
fn absorber_and_drift_flag_escapes() {
    // park one walker at the grid edge with an outgoing plane wave; it must
    // escape and stay escaped
    let grid = Grid1D::new(-5.0, 5.0, 128).unwrap();
    let fast = plane_wave(grid, 30.0).normalized().unwrap();
    let calm = ground_gaussian(grid);
    let walkers = WalkerEnsemble::new(vec![vec![4.9, 0.0], vec![0.0, 0.1]]);
    let waves = vec![fast, calm.clone(), calm.clone(), calm];
    let mut state = state_from_parts(
        grid,
        SoftCoreParams::default(),
        Alpha::Scale(1.0),
        BandwidthRule::RobustMin,
        walkers,
        waves,
        0.0,
        0,
        3,
    );
    let cfg = PropagationConfig::real_time(1);
    state.advance_walkers(0.02, &cfg);
    assert!(state.walkers().is_escaped(0, 0));
    assert!(!state.walkers().is_escaped(0, 1));
    let frozen = state.walkers().positions()[0][0];
    state.advance_walkers(0.02, &cfg);
    assert_eq!(state.walkers().positions()[0][0], frozen);
}

#[test]
fn checkpoint_round_trip_is_bitwise() {
    let dir = std::env::temp_dir().join("tdqmc-ckpt-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("state.ckpt");

    let (state, _) = smoke_state(24, 20, 11);
    save_checkpoint(&state, &path).unwrap();
    let loaded = load_checkpoint(&path).unwrap();

    assert_eq!(loaded.walkers().positions(), state.walkers().positions());
    assert_eq!(loaded.walkers().escaped(), state.walkers().escaped());
    assert_eq!(loaded.t(), state.t());
    assert_eq!(loaded.step_count(), state.step_count());
    assert_eq!(loaded.master_seed(), state.master_seed());
    for i in 0..2 {
        for k in 0..24 {
            assert_eq!(loaded.wave(i, k).values(), state.wave(i, k).values());
        }
    }

    // resumed propagation matches continued propagation bit for bit
    let mut cont = state;
    let mut resumed = loaded;
    let cfg = PropagationConfig::real_time(5);
    propagate_realtime(&mut cont, None, &cfg, |_, _| Ok(())).unwrap();
    propagate_realtime(&mut resumed, None, &cfg, |_, _| Ok(())).unwrap();
    assert_eq!(cont.walkers().positions(), resumed.walkers().positions());
    assert_eq!(cont.wave(1, 3).values(), resumed.wave(1, 3).values());
}

#[test]
fn checkpoint_rejects_garbage() {
    let dir = std::env::temp_dir().join("tdqmc-ckpt-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("garbage.ckpt");
    std::fs::write(&path, b"definitely not a checkpoint").unwrap();
    assert!(matches!(load_checkpoint(&path), Err(Error::Checkpoint(_))));

    // truncation after a valid header must also fail
    let good = dir.join("good.ckpt");
    let (state, _) = smoke_state(8, 3, 2);
    save_checkpoint(&state, &good).unwrap();
    let bytes = std::fs::read(&good).unwrap();
    let truncated = dir.join("truncated.ckpt");
    std::fs::write(&truncated, &bytes[..bytes.len() / 2]).unwrap();
    assert!(matches!(load_checkpoint(&truncated), Err(Error::Checkpoint(_))));
}

#[test]
fn mean_field_run_completes() {
    let grid = Grid1D::new(-15.0, 15.0, 128).unwrap();
    let mut cfg = PropagationConfig::complex_time(120);
    cfg.burn_in_sweeps = 40;
    cfg.trace_stride = 0; // no energy trace
    let (state, trace) = prepare_ground_state(
        Alpha::MeanField,
        64,
        grid,
        SoftCoreParams::default(),
        &cfg,
        77,
    )
    .unwrap();
    assert!(trace.steady_nqcl.is_infinite());
    let est = state.density_estimate().unwrap();
    let (e, _) = estimators::energy_estimate(&est, state.params()).unwrap();
    assert!((-2.7..=-2.0).contains(&e), "mean-field energy {e}");
}
