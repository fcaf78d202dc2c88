//! Run configuration: a flat `key = value` file format layered over smoke or
//! paper-scale defaults. Unknown keys are rejected and every violation is
//! reported at once.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::kde::Alpha;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    GroundState,
    AlphaScan,
    Realtime,
    Oracle,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "ground_state" => Ok(Mode::GroundState),
            "alpha_scan" => Ok(Mode::AlphaScan),
            "realtime" => Ok(Mode::Realtime),
            "oracle" => Ok(Mode::Oracle),
            other => Err(format!("unknown mode '{other}' (ground_state | alpha_scan | realtime | oracle)")),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::GroundState => "ground_state",
            Mode::AlphaScan => "alpha_scan",
            Mode::Realtime => "realtime",
            Mode::Oracle => "oracle",
        })
    }
}

/// Parse a kernel-width scale: a number, or `mean_field` for the
/// uniform-weight limit.
pub fn parse_alpha(s: &str) -> std::result::Result<Alpha, String> {
    if s == "mean_field" {
        return Ok(Alpha::MeanField);
    }
    s.parse::<f64>()
        .map(Alpha::Scale)
        .map_err(|_| format!("alpha must be a number or 'mean_field', got '{s}'"))
}

fn alpha_to_string(a: Alpha) -> String {
    match a {
        Alpha::Scale(v) => format!("{v}"),
        Alpha::MeanField => "mean_field".to_string(),
    }
}

/// Every knob of a run, resolved. Defaults are smoke scale; `paper_scale`
/// switches to publication-size ensembles and grids.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub mode: Mode,
    pub seed: u64,
    pub walkers: usize,
    pub alpha: Alpha,
    pub alphas: Vec<Alpha>,
    pub paper_scale: bool,
    /// 0 means one worker per available core.
    pub workers: usize,
    pub out: PathBuf,
    pub plots: bool,

    // single-particle grid
    pub grid_min: f64,
    pub grid_max: f64,
    pub grid_points: usize,

    // ground-state preparation
    pub dt: f64,
    pub ground_steps: usize,
    pub burn_in_sweeps: usize,
    /// Negative means automatic (0.1 x bandwidth).
    pub noise_amplitude: f64,
    pub proposal_width: f64,
    pub replicates: usize,

    // exact solver
    pub oracle_min: f64,
    pub oracle_max: f64,
    pub oracle_points: usize,
    pub oracle_dt: f64,
    pub oracle_tol: f64,
    pub oracle_max_steps: usize,

    // density comparison grid
    pub compare_min: f64,
    pub compare_max: f64,
    pub compare_points: usize,

    // strong-field run
    pub realtime_min: f64,
    pub realtime_max: f64,
    pub realtime_points: usize,
    pub realtime_dt: f64,
    pub sample_stride: usize,
    pub survival_radius: f64,
    pub laser_amplitude: f64,
    pub laser_frequency: f64,
    pub laser_cycles: usize,

    // engine internals
    pub max_table_rows: usize,
    pub trace_stride: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mode: Mode::GroundState,
            seed: 20_260_824,
            walkers: 2_000,
            alpha: Alpha::Scale(8.0),
            alphas: [2.0, 4.0, 6.0, 8.0, 10.0, 12.0].iter().map(|&a| Alpha::Scale(a)).collect(),
            paper_scale: false,
            workers: 0,
            out: PathBuf::from("out"),
            plots: false,
            grid_min: -30.0,
            grid_max: 30.0,
            grid_points: 256,
            dt: 0.02,
            ground_steps: 400,
            burn_in_sweeps: 200,
            noise_amplitude: -1.0,
            // matches the engine default: slow resampling relative to the
            // guide waves' relaxation preserves walker-pair correlation
            proposal_width: 0.07,
            replicates: 2,
            oracle_min: -30.0,
            oracle_max: 30.0,
            oracle_points: 256,
            oracle_dt: 0.02,
            oracle_tol: 1e-10,
            oracle_max_steps: 8_000,
            compare_min: -12.0,
            compare_max: 12.0,
            compare_points: 128,
            realtime_min: -120.0,
            realtime_max: 120.0,
            realtime_points: 1_024,
            realtime_dt: 0.05,
            sample_stride: 25,
            survival_radius: 10.0,
            laser_amplitude: 0.15,
            laser_frequency: 0.153,
            laser_cycles: 6,
            max_table_rows: 512,
            trace_stride: 5,
        }
    }
}

impl RunConfig {
    /// Publication-scale sizes: large ensembles, fine grids, more scan
    /// replicates.
    pub fn apply_paper_scale(&mut self) {
        self.paper_scale = true;
        self.walkers = 25_000;
        self.grid_points = 512;
        self.oracle_points = 512;
        self.compare_points = 256;
        self.replicates = 5;
    }

    /// Parse `key = value` lines onto `self`. `#` starts a comment; blank
    /// lines are skipped. All problems are reported together.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        let mut errors = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                errors.push(format!("line {}: expected key = value, got '{line}'", lineno + 1));
                continue;
            };
            let (key, value) = (key.trim(), value.trim());
            if let Err(e) = self.apply_key(key, value) {
                errors.push(format!("line {}: {e}", lineno + 1));
            }
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errors))
        }
    }

    fn apply_key(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        fn num<T: FromStr>(key: &str, value: &str) -> std::result::Result<T, String> {
            value.parse().map_err(|_| format!("invalid value '{value}' for {key}"))
        }
        match key {
            "mode" => self.mode = value.parse()?,
            "seed" => self.seed = num(key, value)?,
            "walkers" => self.walkers = num(key, value)?,
            "alpha" => self.alpha = parse_alpha(value)?,
            "alphas" => {
                self.alphas = value
                    .split(',')
                    .map(|s| parse_alpha(s.trim()))
                    .collect::<std::result::Result<_, _>>()?;
            }
            // only records the flag; sizes come from apply_paper_scale so
            // explicit overrides in the same file are never clobbered
            "paper_scale" => self.paper_scale = num(key, value)?,
            "workers" => self.workers = num(key, value)?,
            "out" => self.out = PathBuf::from(value),
            "plots" => self.plots = num(key, value)?,
            "grid_min" => self.grid_min = num(key, value)?,
            "grid_max" => self.grid_max = num(key, value)?,
            "grid_points" => self.grid_points = num(key, value)?,
            "dt" => self.dt = num(key, value)?,
            "ground_steps" => self.ground_steps = num(key, value)?,
            "burn_in_sweeps" => self.burn_in_sweeps = num(key, value)?,
            "noise_amplitude" => self.noise_amplitude = num(key, value)?,
            "proposal_width" => self.proposal_width = num(key, value)?,
            "replicates" => self.replicates = num(key, value)?,
            "oracle_min" => self.oracle_min = num(key, value)?,
            "oracle_max" => self.oracle_max = num(key, value)?,
            "oracle_points" => self.oracle_points = num(key, value)?,
            "oracle_dt" => self.oracle_dt = num(key, value)?,
            "oracle_tol" => self.oracle_tol = num(key, value)?,
            "oracle_max_steps" => self.oracle_max_steps = num(key, value)?,
            "compare_min" => self.compare_min = num(key, value)?,
            "compare_max" => self.compare_max = num(key, value)?,
            "compare_points" => self.compare_points = num(key, value)?,
            "realtime_min" => self.realtime_min = num(key, value)?,
            "realtime_max" => self.realtime_max = num(key, value)?,
            "realtime_points" => self.realtime_points = num(key, value)?,
            "realtime_dt" => self.realtime_dt = num(key, value)?,
            "sample_stride" => self.sample_stride = num(key, value)?,
            "survival_radius" => self.survival_radius = num(key, value)?,
            "laser_amplitude" => self.laser_amplitude = num(key, value)?,
            "laser_frequency" => self.laser_frequency = num(key, value)?,
            "laser_cycles" => self.laser_cycles = num(key, value)?,
            "max_table_rows" => self.max_table_rows = num(key, value)?,
            "trace_stride" => self.trace_stride = num(key, value)?,
            other => return Err(format!("unknown key '{other}'")),
        }
        Ok(())
    }

    /// Check every invariant at once.
    pub fn validate(&self) -> Result<()> {
        let mut errors = Vec::new();
        let mut check = |ok: bool, msg: &str| {
            if !ok {
                errors.push(msg.to_string());
            }
        };
        check(self.walkers >= 2, "walkers must be at least 2");
        check(self.grid_min < self.grid_max, "grid_min must be below grid_max");
        check(self.grid_points >= 8, "grid_points must be at least 8");
        check(self.dt > 0.0, "dt must be positive");
        check(self.ground_steps >= 1, "ground_steps must be at least 1");
        check(self.replicates >= 1, "replicates must be at least 1");
        check(self.proposal_width >= 0.0, "proposal_width must be nonnegative");
        check(self.oracle_min < self.oracle_max, "oracle_min must be below oracle_max");
        check(self.oracle_points >= 8, "oracle_points must be at least 8");
        check(self.oracle_dt > 0.0, "oracle_dt must be positive");
        check(self.oracle_tol > 0.0, "oracle_tol must be positive");
        check(self.compare_min < self.compare_max, "compare_min must be below compare_max");
        check(self.compare_points >= 8, "compare_points must be at least 8");
        check(self.realtime_min < self.realtime_max, "realtime_min must be below realtime_max");
        check(self.realtime_points >= 8, "realtime_points must be at least 8");
        check(self.realtime_dt > 0.0, "realtime_dt must be positive");
        check(self.sample_stride >= 1, "sample_stride must be at least 1");
        check(self.survival_radius > 0.0, "survival_radius must be positive");
        check(self.laser_frequency > 0.0, "laser_frequency must be positive");
        check(self.laser_cycles >= 1, "laser_cycles must be at least 1");
        check(self.max_table_rows >= 2, "max_table_rows must be at least 2");
        check(!self.alphas.is_empty(), "alphas must not be empty");
        if errors.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errors))
        }
    }

    /// Resolved configuration in the same `key = value` syntax the parser
    /// accepts; round-trips through `apply_text`.
    pub fn to_text(&self) -> String {
        let alphas: Vec<String> = self.alphas.iter().map(|&a| alpha_to_string(a)).collect();
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(&v);
            s.push('\n');
        };
        kv("mode", self.mode.to_string());
        kv("seed", self.seed.to_string());
        kv("walkers", self.walkers.to_string());
        kv("alpha", alpha_to_string(self.alpha));
        kv("alphas", alphas.join(", "));
        kv("paper_scale", self.paper_scale.to_string());
        kv("workers", self.workers.to_string());
        kv("out", self.out.display().to_string());
        kv("plots", self.plots.to_string());
        kv("grid_min", self.grid_min.to_string());
        kv("grid_max", self.grid_max.to_string());
        kv("grid_points", self.grid_points.to_string());
        kv("dt", self.dt.to_string());
        kv("ground_steps", self.ground_steps.to_string());
        kv("burn_in_sweeps", self.burn_in_sweeps.to_string());
        kv("noise_amplitude", self.noise_amplitude.to_string());
        kv("proposal_width", self.proposal_width.to_string());
        kv("replicates", self.replicates.to_string());
        kv("oracle_min", self.oracle_min.to_string());
        kv("oracle_max", self.oracle_max.to_string());
        kv("oracle_points", self.oracle_points.to_string());
        kv("oracle_dt", self.oracle_dt.to_string());
        kv("oracle_tol", self.oracle_tol.to_string());
        kv("oracle_max_steps", self.oracle_max_steps.to_string());
        kv("compare_min", self.compare_min.to_string());
        kv("compare_max", self.compare_max.to_string());
        kv("compare_points", self.compare_points.to_string());
        kv("realtime_min", self.realtime_min.to_string());
        kv("realtime_max", self.realtime_max.to_string());
        kv("realtime_points", self.realtime_points.to_string());
        kv("realtime_dt", self.realtime_dt.to_string());
        kv("sample_stride", self.sample_stride.to_string());
        kv("survival_radius", self.survival_radius.to_string());
        kv("laser_amplitude", self.laser_amplitude.to_string());
        kv("laser_frequency", self.laser_frequency.to_string());
        kv("laser_cycles", self.laser_cycles.to_string());
        kv("max_table_rows", self.max_table_rows.to_string());
        kv("trace_stride", self.trace_stride.to_string());
        s
    }
}
