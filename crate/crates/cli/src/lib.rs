//! Scenario runner for `nhlab`: simulate a builtin system, evaluate the
//! requested checks and write `trajectory.csv`, `momentum.csv` and
//! `report.json`.

pub mod checks;
pub mod config;
pub mod error;
pub mod report;
pub mod templates;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use nhlab_core::mech::{benenti_system, simulate, MechState, DEFAULT_DRIFT_TOL, DEFAULT_STEP};
use nhlab_core::rod::{
    default_step, rod_simulate, RodGrid, RodInitialData, RodParams, RodShape,
};
use serde_json::json;

use crate::checks::{evaluate, CheckResult, Simulation};
use crate::config::{ScenarioConfig, ShapeKind, SystemKind};
pub use crate::error::CliError;
use crate::report::{CheckRecord, Environment, Timings, VerificationReport};

pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const MOMENTUM_FILE: &str = "momentum.csv";
pub const REPORT_FILE: &str = "report.json";
pub const DEFAULT_OUTPUT_DIR: &str = "nhlab-out";
const DEFAULT_SAFETY: f64 = 0.4;

/// Command-line overrides applied on top of a config.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub tolerance_scale: Option<f64>,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub output_dir: PathBuf,
    pub checks: Vec<CheckResult>,
    pub report: VerificationReport,
}

impl RunOutcome {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// 0 when every check passed, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.all_passed() {
            0
        } else {
            2
        }
    }
}

pub fn run_path(path: &Path, opts: &RunOptions) -> Result<RunOutcome, CliError> {
    let cfg = ScenarioConfig::from_path(path)?;
    run(&cfg, opts)
}

pub fn run(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<RunOutcome, CliError> {
    let started = Instant::now();
    let scale = opts.tolerance_scale.unwrap_or(1.0);
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(CliError::config("--tolerance-scale", "must be a positive finite number"));
    }
    let seed = opts.seed.unwrap_or(cfg.seed);
    let out_dir = opts
        .output_dir
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR));
    std::fs::create_dir_all(&out_dir).map_err(|e| CliError::Io {
        path: out_dir.clone(),
        source: e,
    })?;

    let (sim, integration) = simulate_scenario(cfg, &out_dir)?;
    let sim_time = started.elapsed().as_secs_f64();
    report::write_trajectory(&out_dir.join(TRAJECTORY_FILE), &sim)?;

    let checks_started = Instant::now();
    let checks = cfg
        .checks
        .iter()
        .enumerate()
        .map(|(i, c)| evaluate(c, i, &sim, scale, seed))
        .collect::<Result<Vec<_>, _>>()?;
    let checks_time = checks_started.elapsed().as_secs_f64();
    report::write_momentum(&out_dir.join(MOMENTUM_FILE), &checks)?;

    let params = match &sim {
        Simulation::Mech { sys, .. } => sys.params.clone(),
        Simulation::Rod { params, .. } => rod_param_map(params),
    };
    let report = VerificationReport {
        environment: Environment {
            version: env!("CARGO_PKG_VERSION").to_string(),
            os: std::env::consts::OS.to_string(),
            arch: std::env::consts::ARCH.to_string(),
            seed,
            system: cfg.system.to_string(),
            params,
            integration,
            tolerance_scale: scale,
        },
        sign_convention: report::SIGN_CONVENTION.to_string(),
        checks: checks.iter().map(CheckRecord::from).collect(),
        all_passed: checks.iter().all(|c| c.pass),
        timings: Timings {
            simulation_s: sim_time,
            checks_s: checks_time,
            total_s: started.elapsed().as_secs_f64(),
        },
    };
    report.write(&out_dir.join(REPORT_FILE))?;
    Ok(RunOutcome {
        output_dir: out_dir,
        checks,
        report,
    })
}

fn rod_param_map(p: &RodParams) -> BTreeMap<String, f64> {
    BTreeMap::from([
        ("rho".to_string(), p.rho),
        ("alpha".to_string(), p.alpha),
        ("beta".to_string(), p.beta),
        ("K".to_string(), p.k),
        ("R".to_string(), p.r),
        ("length".to_string(), p.length),
    ])
}

pub fn rod_params(cfg: &ScenarioConfig) -> RodParams {
    let d = RodParams::default();
    RodParams {
        rho: cfg.param("rho", d.rho),
        alpha: cfg.param("alpha", d.alpha),
        beta: cfg.param("beta", d.beta),
        k: cfg.param("K", d.k),
        r: cfg.param("R", d.r),
        length: cfg.param("length", d.length),
    }
}

pub fn rod_initial(cfg: &ScenarioConfig) -> RodInitialData {
    let i = &cfg.initial;
    let d = RodInitialData::default();
    RodInitialData {
        shape: match i.shape {
            Some(ShapeKind::Straight) => RodShape::Straight {
                angle: i.angle.unwrap_or(0.0),
            },
            Some(ShapeKind::Ring) | None => RodShape::Ring,
        },
        spin: i.spin.unwrap_or(d.spin),
        theta_amplitude: i.theta_amplitude.unwrap_or(d.theta_amplitude),
        theta_mode: i.theta_mode.unwrap_or(d.theta_mode),
        spin_amplitude: i.spin_amplitude.unwrap_or(d.spin_amplitude),
        spin_mode: i.spin_mode.unwrap_or(d.spin_mode),
        twist: i.twist.unwrap_or(d.twist),
    }
}

type IntegrationRecord = BTreeMap<String, serde_json::Value>;

/// Runs the simulation. On an aborted mechanics run the partial trajectory
/// is still written before the error is returned.
fn simulate_scenario(
    cfg: &ScenarioConfig,
    out_dir: &Path,
) -> Result<(Simulation, IntegrationRecord), CliError> {
    let int = &cfg.integration;
    let mut record = BTreeMap::from([("T".to_string(), json!(int.total))]);
    match cfg.system {
        SystemKind::Benenti => {
            let tol = int.drift_tolerance.unwrap_or(DEFAULT_DRIFT_TOL);
            let sys = benenti_system(cfg.param("m", 1.0), cfg.param("g", 0.0))?
                .with_drift_tolerance(tol);
            let q = cfg.initial.q.clone().unwrap_or_else(|| vec![0.0; 4]);
            let v = cfg.initial.v.clone().unwrap_or_default();
            let h = int.h.unwrap_or(DEFAULT_STEP);
            record.insert("h".into(), json!(h));
            record.insert("drift_tolerance".into(), json!(tol));
            match simulate(&sys, &MechState::new(0.0, &q, &v), int.total, h) {
                Ok(traj) => Ok((Simulation::Mech { sys, traj }, record)),
                Err(aborted) => {
                    let partial = Simulation::Mech {
                        sys,
                        traj: aborted.partial,
                    };
                    report::write_trajectory(&out_dir.join(TRAJECTORY_FILE), &partial)?;
                    Err(aborted.error.into())
                }
            }
        }
        SystemKind::CosseratRod => {
            let params = rod_params(cfg);
            params.validate()?;
            let n = int.nodes.unwrap_or(0);
            let grid = RodGrid::new(n, params.length)?;
            let s0 = rod_initial(cfg).build(&params, &grid)?;
            let h = match int.h {
                Some(h) => h,
                None => default_step(&params, &s0, &grid, int.total, int.safety.unwrap_or(DEFAULT_SAFETY))?,
            };
            let every = int.record_every.unwrap_or(1);
            record.insert("h".into(), json!(h));
            record.insert("N".into(), json!(n));
            record.insert("record_every".into(), json!(every));
            let hist = rod_simulate(&params, &s0, &grid, int.total, h, every)?;
            Ok((Simulation::Rod { params, grid, hist }, record))
        }
    }
}
