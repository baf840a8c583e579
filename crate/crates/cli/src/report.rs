//! CSV time series and the JSON verification report.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use nhlab_core::rod::rod_energy_density;
use serde::Serialize;
use serde_json::Value;

use crate::checks::{CheckResult, Simulation};
use crate::error::CliError;

pub const SIGN_CONVENTION: &str =
    "rod momentum residual r = d_s Q - d_t P - RHS for J = P ds + Q dt, volume form ds^dt";

/// Fixed-width scientific notation with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_writer(path: &Path) -> Result<csv::Writer<File>, CliError> {
    let file = File::create(path).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    Ok(csv::Writer::from_writer(file))
}

pub fn write_trajectory(path: &Path, sim: &Simulation) -> Result<(), CliError> {
    let mut w = csv_writer(path)?;
    match sim {
        Simulation::Mech { sys, traj } => {
            let n = sys.n_dof();
            let k = sys.n_constraints();
            let mut header = vec!["t".to_string()];
            header.extend((1..=n).map(|i| format!("q{i}")));
            header.extend((1..=n).map(|i| format!("v{i}")));
            header.extend((1..=k).map(|i| format!("lambda{i}")));
            header.extend((1..=k).map(|i| format!("phi_residual{i}")));
            w.write_record(&header)?;
            for s in &traj.samples {
                let row = std::iter::once(s.state.t)
                    .chain(s.state.q.iter().copied())
                    .chain(s.state.v.iter().copied())
                    .chain(s.lambda.iter().copied())
                    .chain(s.phi.iter().copied())
                    .map(fmt_f64);
                w.write_record(row)?;
            }
        }
        Simulation::Rod { grid, hist, .. } => {
            w.write_record([
                "t",
                "node",
                "s",
                "x",
                "y",
                "theta",
                "theta_dot",
                "lambda",
                "mu",
                "energy_density",
            ])?;
            let s_nodes = grid.node_positions();
            for snap in &hist.snapshots {
                let density = rod_energy_density(&hist.params, &snap.state, grid)?;
                let st = &snap.state;
                for j in 0..grid.n_nodes() {
                    let t = fmt_f64(st.t);
                    let mut row = vec![t, j.to_string()];
                    row.extend(
                        [
                            s_nodes[j],
                            st.x[j],
                            st.y[j],
                            st.theta[j],
                            st.theta_dot[j],
                            snap.accel.lambda[j],
                            snap.accel.mu[j],
                            density[j],
                        ]
                        .map(fmt_f64),
                    );
                    w.write_record(&row)?;
                }
            }
        }
    }
    w.flush().map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    Ok(())
}

pub fn write_momentum(path: &Path, checks: &[CheckResult]) -> Result<(), CliError> {
    let mut w = csv_writer(path)?;
    w.write_record(["check", "t", "max_abs", "l2"])?;
    for c in checks {
        for e in &c.series {
            w.write_record([c.name.clone(), fmt_f64(e.t), fmt_f64(e.max_abs), fmt_f64(e.l2)])?;
        }
    }
    w.flush().map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub kind: String,
    pub anchor: String,
    /// The residual compared against `tolerance`.
    pub max: f64,
    pub l2: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub details: BTreeMap<String, Value>,
}

impl From<&CheckResult> for CheckRecord {
    fn from(c: &CheckResult) -> Self {
        Self {
            name: c.name.clone(),
            kind: c.kind.to_string(),
            anchor: c.anchor.to_string(),
            max: c.max,
            l2: c.l2,
            tolerance: c.tolerance,
            pass: c.pass,
            details: c.details.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Environment {
    pub version: String,
    pub os: String,
    pub arch: String,
    pub seed: u64,
    pub system: String,
    pub params: BTreeMap<String, f64>,
    pub integration: BTreeMap<String, Value>,
    pub tolerance_scale: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Timings {
    pub simulation_s: f64,
    pub checks_s: f64,
    pub total_s: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub environment: Environment,
    pub sign_convention: String,
    pub checks: Vec<CheckRecord>,
    pub all_passed: bool,
    pub timings: Timings,
}

impl VerificationReport {
    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(self)?;
        let mut f = File::create(path).map_err(|e| CliError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        writeln!(f, "{text}").map_err(|e| CliError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Ok(())
    }
}
