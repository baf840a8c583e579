//! Verification checks evaluated on a finished simulation.

use std::collections::BTreeMap;

use nalgebra::DVector;
use nhlab_core::jet::SystemSpec;
use nhlab_core::mech::{benenti_ansatz, benenti_section, MechSystem, Trajectory};
use nhlab_core::momentum::{
    momentum_equation_residual_mech, momentum_equation_residual_rod, rod_translation_identity,
    ResidualEntry, RodLaw,
};
use nhlab_core::rod::{
    rod_ansatz, rod_system_spec, FieldHistory, RodGrid, RodKinematics, RodParams, RodSnapshot,
};
use nhlab_core::symmetry::{
    admissibility_residual, find_admissible, sample_constraint_manifold, SamplerConfig,
    SymmetryAnsatz,
};
use serde_json::{json, Value};

use crate::config::{CheckConfig, LawKind};
use crate::error::CliError;

pub const ANCHOR_BENENTI_LAWS: &str = "Benenti system: parallel-velocity conservation laws";
pub const ANCHOR_BENENTI_CONSTRAINT: &str = "Benenti system: parallel-velocity constraint";
pub const ANCHOR_ROD_ENERGY: &str = "Rolling rod: local energy conservation";
pub const ANCHOR_ROD_MOMENTUM: &str = "Rolling rod: multiplier-free momentum equation";
pub const ANCHOR_ROD_FIELD: &str = "Rolling rod: constrained field equations";
pub const ANCHOR_SYMMETRY: &str = "Generalized nonholonomic symmetries";

const ENERGY_FLOOR: f64 = 1e-12;
const DEFAULT_SAMPLES: usize = 200;

/// Default tolerance per check kind, before `--tolerance-scale`.
pub fn default_tolerance(check: &CheckConfig) -> f64 {
    match check {
        CheckConfig::ConservationLaw { .. } => 1e-8,
        CheckConfig::ConstraintDrift { .. } => 1e-9,
        CheckConfig::EnergyDrift { .. } => 1e-4,
        CheckConfig::MomentumResidual { .. } => 1.0,
        CheckConfig::TranslationIdentity { .. } | CheckConfig::FieldEquations { .. } => 1e-10,
        CheckConfig::SymmetryDiscovery { .. } => 1e-9,
    }
}

/// Outcome of one check. `pass` is derived from `max` and `tolerance` only,
/// plus the structural expectation of a symmetry search.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub kind: &'static str,
    pub anchor: &'static str,
    pub series: Vec<ResidualEntry>,
    pub max: f64,
    pub l2: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub details: BTreeMap<String, Value>,
}

impl CheckResult {
    fn new(
        name: String,
        kind: &'static str,
        anchor: &'static str,
        series: Vec<ResidualEntry>,
        tolerance: f64,
    ) -> Self {
        let max = series.iter().map(|e| e.max_abs).fold(0.0, nan_max);
        let l2 = rms(series.iter().map(|e| e.l2));
        let mut out = Self {
            name,
            kind,
            anchor,
            series,
            max,
            l2,
            tolerance,
            pass: false,
            details: BTreeMap::new(),
        };
        out.pass = verdict(out.max, tolerance, true);
        out
    }
}

/// NaN-propagating maximum, so a non-finite residual can never pass.
fn nan_max(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

fn rms(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v * v, n + 1));
    if n == 0 {
        0.0
    } else {
        (sum / n as f64).sqrt()
    }
}

pub fn verdict(residual: f64, tolerance: f64, structural_ok: bool) -> bool {
    structural_ok && residual <= tolerance
}

/// A finished simulation the checks can read.
pub enum Simulation {
    Mech {
        sys: MechSystem,
        traj: Trajectory,
    },
    Rod {
        params: RodParams,
        grid: RodGrid,
        hist: FieldHistory,
    },
}

pub fn evaluate(
    check: &CheckConfig,
    index: usize,
    sim: &Simulation,
    tolerance_scale: f64,
    seed: u64,
) -> Result<CheckResult, CliError> {
    let tol = check.tolerance().unwrap_or_else(|| default_tolerance(check)) * tolerance_scale;
    let name = check
        .name()
        .map(str::to_string)
        .unwrap_or_else(|| format!("{}-{index}", check.kind()));
    let kind = check.kind();
    match (check, sim) {
        (CheckConfig::ConservationLaw { weights, .. }, Simulation::Mech { sys, traj }) => {
            let series = momentum_equation_residual_mech(&benenti_section(*weights), sys, traj)?;
            let mut out = CheckResult::new(name, kind, ANCHOR_BENENTI_LAWS, series.entries, tol);
            out.details.insert("weights".into(), json!(weights));
            out.details
                .insert("admissibility_defect".into(), json!(series.admissibility_defect));
            out.details.insert("admissible".into(), json!(series.admissible));
            Ok(out)
        }
        (CheckConfig::ConstraintDrift { .. }, Simulation::Mech { traj, .. }) => {
            let series = traj
                .samples
                .iter()
                .map(|s| ResidualEntry {
                    t: s.state.t,
                    max_abs: s.phi.amax(),
                    l2: s.phi.norm(),
                })
                .collect();
            Ok(CheckResult::new(name, kind, ANCHOR_BENENTI_CONSTRAINT, series, tol))
        }
        (CheckConfig::EnergyDrift { floor, .. }, Simulation::Rod { hist, .. }) => {
            let floor = floor.unwrap_or(ENERGY_FLOOR);
            let e0 = hist.snapshots.first().map_or(0.0, |s| s.energy);
            let scale = e0.abs().max(floor);
            let series = hist
                .snapshots
                .iter()
                .map(|s| {
                    let d = (s.energy - e0).abs() / scale;
                    ResidualEntry {
                        t: s.state.t,
                        max_abs: d,
                        l2: d,
                    }
                })
                .collect();
            let mut out = CheckResult::new(name, kind, ANCHOR_ROD_ENERGY, series, tol);
            out.details.insert("initial_energy".into(), json!(e0));
            out.details.insert("floor".into(), json!(floor));
            Ok(out)
        }
        (CheckConfig::MomentumResidual { law, .. }, Simulation::Rod { params, grid, hist }) => {
            let (which, anchor) = match law {
                LawKind::Energy => (RodLaw::Energy, ANCHOR_ROD_ENERGY),
                LawKind::Translation => (RodLaw::Translation, ANCHOR_ROD_MOMENTUM),
            };
            let series = momentum_equation_residual_rod(params, hist, grid, which)?;
            let mut out = CheckResult::new(name, kind, anchor, series.entries, tol);
            out.details.insert("law".into(), json!(which.to_string()));
            out.details.insert("sign_convention".into(), json!(crate::report::SIGN_CONVENTION));
            Ok(out)
        }
        (CheckConfig::TranslationIdentity { .. }, Simulation::Rod { params, grid, hist }) => {
            let series = per_snapshot(hist, |snap| translation_identity_relative(params, snap, grid))?;
            Ok(CheckResult::new(name, kind, ANCHOR_ROD_MOMENTUM, series, tol))
        }
        (CheckConfig::FieldEquations { .. }, Simulation::Rod { params, grid, hist }) => {
            let series = per_snapshot(hist, |snap| field_equation_relative(params, snap, grid))?;
            Ok(CheckResult::new(name, kind, ANCHOR_ROD_FIELD, series, tol))
        }
        (
            CheckConfig::SymmetryDiscovery {
                samples,
                expected_dim,
                bounds,
                ..
            },
            _,
        ) => {
            let (spec, sections) = match sim {
                Simulation::Mech { sys, .. } => (sys.spec.clone(), benenti_ansatz()),
                Simulation::Rod { params, .. } => (rod_system_spec(params)?, rod_ansatz(params.r)),
            };
            let [lower, upper] = bounds.unwrap_or([-2.0, 2.0]);
            let cfg = SamplerConfig {
                lower,
                upper,
                count: samples.unwrap_or(DEFAULT_SAMPLES),
                seed,
            };
            symmetry(name, &spec, sections, cfg, *expected_dim, tol)
        }
        _ => Err(CliError::config(
            &format!("checks[{index}].kind"),
            format!("{kind} does not match the simulated system"),
        )),
    }
}

fn per_snapshot(
    hist: &FieldHistory,
    f: impl Fn(&RodSnapshot) -> Result<DVector<f64>, CliError>,
) -> Result<Vec<ResidualEntry>, CliError> {
    hist.snapshots
        .iter()
        .map(|snap| {
            let r = f(snap)?;
            Ok(ResidualEntry {
                t: snap.state.t,
                max_abs: r.iter().copied().fold(0.0, |a, b| nan_max(a, b.abs())),
                l2: (r.norm_squared() / r.len().max(1) as f64).sqrt(),
            })
        })
        .collect()
}

/// Normwise relative residual per node for one equation: `|Σ terms_j|`
/// over the largest `Σ |terms|` on the grid, so nodes where every term is
/// at roundoff level do not dominate.
fn normwise(rows: &[Vec<f64>]) -> DVector<f64> {
    let scale = rows
        .iter()
        .map(|t| t.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, nan_max);
    DVector::from_iterator(
        rows.len(),
        rows.iter().map(|t| {
            let r = t.iter().sum::<f64>().abs();
            if scale == 0.0 {
                r
            } else {
                r / scale
            }
        }),
    )
}

fn worst_of(eqs: &[DVector<f64>]) -> DVector<f64> {
    DVector::from_fn(eqs[0].len(), |j, _| eqs.iter().map(|e| e[j]).fold(0.0, nan_max))
}

/// Per node, the worst normwise residual of the three field equations and
/// the two time-differentiated rolling constraints, with the recorded
/// multipliers substituted.
pub fn field_equation_relative(
    p: &RodParams,
    snap: &RodSnapshot,
    grid: &RodGrid,
) -> Result<DVector<f64>, CliError> {
    let kin = RodKinematics::new(p, &snap.state, grid)?;
    let a = &snap.accel;
    let n = grid.n_nodes();
    let eq = |terms: &dyn Fn(usize) -> Vec<f64>| normwise(&(0..n).map(terms).collect::<Vec<_>>());
    Ok(worst_of(&[
        eq(&|j| vec![p.rho * a.x_ddot[j], p.k * kin.x_ssss[j], -a.lambda[j]]),
        eq(&|j| vec![p.rho * a.y_ddot[j], p.k * kin.y_ssss[j], -a.mu[j]]),
        eq(&|j| {
            vec![
                p.alpha * a.theta_ddot[j],
                -p.beta * kin.theta_ss[j],
                -p.r * kin.y_s[j] * a.lambda[j],
                p.r * kin.x_s[j] * a.mu[j],
            ]
        }),
        eq(&|j| {
            vec![
                a.x_ddot[j],
                p.r * a.theta_ddot[j] * kin.y_s[j],
                p.r * kin.theta_t[j] * kin.y_st[j],
            ]
        }),
        eq(&|j| {
            vec![
                a.y_ddot[j],
                -p.r * a.theta_ddot[j] * kin.x_s[j],
                -p.r * kin.theta_t[j] * kin.x_st[j],
            ]
        }),
    ]))
}

/// Per node, the multiplier-free momentum identity in the same normwise
/// relative measure.
pub fn translation_identity_relative(
    p: &RodParams,
    snap: &RodSnapshot,
    grid: &RodGrid,
) -> Result<DVector<f64>, CliError> {
    let kin = RodKinematics::new(p, &snap.state, grid)?;
    let id = rod_translation_identity(p, &snap.state, grid)?;
    let a = &snap.accel;
    let scale = (0..grid.n_nodes())
        .map(|j| {
            (p.r * kin.y_s[j] * a.lambda[j]).abs()
                + (p.r * kin.x_s[j] * a.mu[j]).abs()
                + (p.alpha * a.theta_ddot[j]).abs()
                + (p.beta * kin.theta_ss[j]).abs()
        })
        .fold(0.0, nan_max);
    Ok(if scale == 0.0 { id.abs() } else { id.abs() / scale })
}

fn symmetry(
    name: String,
    spec: &SystemSpec,
    sections: Vec<nhlab_core::jet::SymmetrySection>,
    cfg: SamplerConfig,
    expected_dim: Option<usize>,
    tol: f64,
) -> Result<CheckResult, CliError> {
    let ansatz = SymmetryAnsatz::new(sections, spec)?;
    let samples = sample_constraint_manifold(spec, &cfg)?;
    let basis = find_admissible(spec, &ansatz, &samples)?;
    // soundness on points the nullspace never saw
    let fresh = sample_constraint_manifold(spec, &cfg.with_seed(cfg.seed.wrapping_add(1)))?;
    let mut fresh_worst: f64 = 0.0;
    let mut per_vector = Vec::with_capacity(basis.dim());
    for v in &basis.vectors {
        let r = admissibility_residual(spec, &ansatz.section(v)?, &fresh)?;
        fresh_worst = nan_max(fresh_worst, r);
        per_vector.push(r);
    }
    let max = nan_max(basis.residual_bound, fresh_worst);
    let dim_ok = expected_dim.is_none_or(|d| d == basis.dim());
    let as_rows = |vs: &[DVector<f64>]| vs.iter().map(|v| v.as_slice().to_vec()).collect::<Vec<_>>();
    let mut details = BTreeMap::new();
    details.insert("dim".into(), json!(basis.dim()));
    details.insert("expected_dim".into(), json!(expected_dim));
    details.insert("vectors".into(), json!(as_rows(&basis.vectors)));
    details.insert("complement".into(), json!(as_rows(&basis.complement)));
    details.insert("singular_values".into(), json!(basis.singular_values.as_slice()));
    details.insert("sample_count".into(), json!(basis.sample_count));
    details.insert("in_sample_residual".into(), json!(basis.residual_bound));
    details.insert("fresh_sample_residual".into(), json!(fresh_worst));
    details.insert("seed".into(), json!(cfg.seed));
    Ok(CheckResult {
        name,
        kind: "symmetry_discovery",
        anchor: ANCHOR_SYMMETRY,
        series: Vec::new(),
        max,
        l2: rms(per_vector.into_iter().chain(std::iter::once(basis.residual_bound))),
        tolerance: tol,
        pass: verdict(max, tol, dim_ok),
        details,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nan_never_passes() {
        assert!(!verdict(f64::NAN, 1.0, true));
        assert!(nan_max(0.0, f64::NAN).is_nan());
        assert!(verdict(1.0, 1.0, true));
        assert!(!verdict(0.0, 1.0, false));
    }

    #[test]
    fn normwise_scales_by_largest_row() {
        let r = normwise(&[vec![2.0, -2.0], vec![1e-9, 0.0], vec![3.0, 1.0]]);
        assert_eq!(r[0], 0.0);
        assert_eq!(r[1], 1e-9 / 4.0);
        assert_eq!(r[2], 1.0);
        assert_eq!(normwise(&[vec![0.0, 0.0]])[0], 0.0);
    }
}
