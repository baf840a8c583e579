//! Scenario configuration: strict JSON/TOML schema plus per-system validation.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    Benenti,
    CosseratRod,
}

impl fmt::Display for SystemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SystemKind::Benenti => "benenti",
            SystemKind::CosseratRod => "cosserat_rod",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeKind {
    Ring,
    Straight,
}

/// Initial data. Mechanics reads `q`, `v`; the rod reads the remaining keys.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    pub q: Option<Vec<f64>>,
    pub v: Option<Vec<f64>>,
    pub shape: Option<ShapeKind>,
    /// Direction of a straight rod, radians.
    pub angle: Option<f64>,
    pub spin: Option<f64>,
    pub theta_amplitude: Option<f64>,
    pub theta_mode: Option<u32>,
    pub spin_amplitude: Option<f64>,
    pub spin_mode: Option<u32>,
    pub twist: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrationConfig {
    /// Step size. Optional for the rod, where it defaults to a stable step.
    pub h: Option<f64>,
    #[serde(rename = "T")]
    pub total: f64,
    #[serde(rename = "N")]
    pub nodes: Option<usize>,
    /// Rod snapshots are kept every this many steps.
    pub record_every: Option<usize>,
    /// Mechanics velocity-projection tolerance.
    pub drift_tolerance: Option<f64>,
    /// Fraction of the stability estimate used for the default rod step.
    pub safety: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LawKind {
    Energy,
    Translation,
}

/// One requested verification; `kind` selects the variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CheckConfig {
    /// Benenti momentum balance for the section with the given weights.
    ConservationLaw {
        name: Option<String>,
        weights: [f64; 4],
        tolerance: Option<f64>,
    },
    /// Benenti `max |φ|` along the trajectory.
    ConstraintDrift {
        name: Option<String>,
        tolerance: Option<f64>,
    },
    /// Rod `|E(t) − E(0)| / E(0)`.
    EnergyDrift {
        name: Option<String>,
        tolerance: Option<f64>,
        floor: Option<f64>,
    },
    /// Rod `∂_s Q − ∂_t P − RHS` for the energy or translation law.
    MomentumResidual {
        name: Option<String>,
        law: LawKind,
        tolerance: Option<f64>,
    },
    /// Rod multiplier-free momentum identity, relative per node.
    TranslationIdentity {
        name: Option<String>,
        tolerance: Option<f64>,
    },
    /// Rod field equations and differentiated constraints, relative per node.
    FieldEquations {
        name: Option<String>,
        tolerance: Option<f64>,
    },
    /// Sampling-based admissible-symmetry search over the builtin ansatz.
    SymmetryDiscovery {
        name: Option<String>,
        tolerance: Option<f64>,
        samples: Option<usize>,
        expected_dim: Option<usize>,
        bounds: Option<[f64; 2]>,
    },
}

impl CheckConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            CheckConfig::ConservationLaw { .. } => "conservation_law",
            CheckConfig::ConstraintDrift { .. } => "constraint_drift",
            CheckConfig::EnergyDrift { .. } => "energy_drift",
            CheckConfig::MomentumResidual { .. } => "momentum_residual",
            CheckConfig::TranslationIdentity { .. } => "translation_identity",
            CheckConfig::FieldEquations { .. } => "field_equations",
            CheckConfig::SymmetryDiscovery { .. } => "symmetry_discovery",
        }
    }

    pub fn name(&self) -> Option<&str> {
        match self {
            CheckConfig::ConservationLaw { name, .. }
            | CheckConfig::ConstraintDrift { name, .. }
            | CheckConfig::EnergyDrift { name, .. }
            | CheckConfig::MomentumResidual { name, .. }
            | CheckConfig::TranslationIdentity { name, .. }
            | CheckConfig::FieldEquations { name, .. }
            | CheckConfig::SymmetryDiscovery { name, .. } => name.as_deref(),
        }
    }

    pub fn tolerance(&self) -> Option<f64> {
        match self {
            CheckConfig::ConservationLaw { tolerance, .. }
            | CheckConfig::ConstraintDrift { tolerance, .. }
            | CheckConfig::EnergyDrift { tolerance, .. }
            | CheckConfig::MomentumResidual { tolerance, .. }
            | CheckConfig::TranslationIdentity { tolerance, .. }
            | CheckConfig::FieldEquations { tolerance, .. }
            | CheckConfig::SymmetryDiscovery { tolerance, .. } => *tolerance,
        }
    }

    fn supports(&self, system: SystemKind) -> bool {
        match self {
            CheckConfig::ConservationLaw { .. } | CheckConfig::ConstraintDrift { .. } => {
                system == SystemKind::Benenti
            }
            CheckConfig::EnergyDrift { .. }
            | CheckConfig::MomentumResidual { .. }
            | CheckConfig::TranslationIdentity { .. }
            | CheckConfig::FieldEquations { .. } => system == SystemKind::CosseratRod,
            CheckConfig::SymmetryDiscovery { .. } => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub system: SystemKind,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default)]
    pub initial: InitialConfig,
    pub integration: IntegrationConfig,
    #[serde(default)]
    pub checks: Vec<CheckConfig>,
    pub output_dir: Option<PathBuf>,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_seed() -> u64 {
    42
}

pub const BENENTI_PARAMS: &[&str] = &["m", "g"];
pub const ROD_PARAMS: &[&str] = &["rho", "alpha", "beta", "K", "R", "length"];
const MECH_INITIAL: &[&str] = &["q", "v"];

impl ScenarioConfig {
    /// Parses JSON (`.json`) or TOML (anything else) and validates.
    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        Self::parse(&text, is_json)
    }

    pub fn parse(text: &str, json: bool) -> Result<Self, CliError> {
        let value: serde_json::Value = if json {
            serde_json::from_str(text).map_err(|e| CliError::config("<document>", e.to_string()))?
        } else {
            let table: toml::Table =
                toml::from_str(text).map_err(|e| CliError::config("<document>", e.to_string()))?;
            serde_json::to_value(table).map_err(|e| CliError::config("<document>", e.to_string()))?
        };
        let cfg: Self = serde_path_to_error::deserialize(value).map_err(|e| {
            let key = e.path().to_string();
            CliError::config(&key, e.into_inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let allowed = match self.system {
            SystemKind::Benenti => BENENTI_PARAMS,
            SystemKind::CosseratRod => ROD_PARAMS,
        };
        for (key, value) in &self.params {
            if !allowed.contains(&key.as_str()) {
                return Err(CliError::config(
                    &format!("params.{key}"),
                    format!("not a parameter of system {} (expected one of {})", self.system, allowed.join(", ")),
                ));
            }
            if !value.is_finite() {
                return Err(CliError::config(&format!("params.{key}"), "must be finite"));
            }
        }
        self.validate_integration()?;
        self.validate_initial()?;
        for (i, check) in self.checks.iter().enumerate() {
            if !check.supports(self.system) {
                return Err(CliError::config(
                    &format!("checks[{i}].kind"),
                    format!("{} is not available for system {}", check.kind(), self.system),
                ));
            }
            if let Some(tol) = check.tolerance() {
                if !(tol >= 0.0 && tol.is_finite()) {
                    return Err(CliError::config(
                        &format!("checks[{i}].tolerance"),
                        "must be a non-negative finite number",
                    ));
                }
            }
        }
        Ok(())
    }

    fn validate_integration(&self) -> Result<(), CliError> {
        let int = &self.integration;
        if let Some(h) = int.h {
            if !(h > 0.0 && h.is_finite()) {
                return Err(CliError::config("integration.h", "integration.h must be positive"));
            }
        }
        if !(int.total >= 0.0 && int.total.is_finite()) {
            return Err(CliError::config("integration.T", "integration.T must be non-negative"));
        }
        if int.record_every == Some(0) {
            return Err(CliError::config("integration.record_every", "must be at least 1"));
        }
        for (key, v) in [("drift_tolerance", int.drift_tolerance), ("safety", int.safety)] {
            if v.is_some_and(|x| !(x > 0.0 && x.is_finite())) {
                return Err(CliError::config(&format!("integration.{key}"), "must be positive"));
            }
        }
        match self.system {
            SystemKind::Benenti => {
                for (key, present) in [
                    ("N", int.nodes.is_some()),
                    ("record_every", int.record_every.is_some()),
                    ("safety", int.safety.is_some()),
                ] {
                    if present {
                        return Err(CliError::config(
                            &format!("integration.{key}"),
                            "only valid for system cosserat_rod",
                        ));
                    }
                }
            }
            SystemKind::CosseratRod => {
                if int.nodes.is_none() {
                    return Err(CliError::config(
                        "integration.N",
                        "integration.N is required for system cosserat_rod",
                    ));
                }
                if int.drift_tolerance.is_some() {
                    return Err(CliError::config(
                        "integration.drift_tolerance",
                        "only valid for system benenti",
                    ));
                }
            }
        }
        Ok(())
    }

    fn validate_initial(&self) -> Result<(), CliError> {
        let init = &self.initial;
        let rod_keys = [
            ("shape", init.shape.is_some()),
            ("angle", init.angle.is_some()),
            ("spin", init.spin.is_some()),
            ("theta_amplitude", init.theta_amplitude.is_some()),
            ("theta_mode", init.theta_mode.is_some()),
            ("spin_amplitude", init.spin_amplitude.is_some()),
            ("spin_mode", init.spin_mode.is_some()),
            ("twist", init.twist.is_some()),
        ];
        match self.system {
            SystemKind::Benenti => {
                if let Some((key, _)) = rod_keys.iter().find(|(_, p)| *p) {
                    return Err(CliError::config(
                        &format!("initial.{key}"),
                        format!("not valid for system benenti (expected {})", MECH_INITIAL.join(", ")),
                    ));
                }
                let v = init
                    .v
                    .as_ref()
                    .ok_or_else(|| CliError::config("initial.v", "required for system benenti"))?;
                if v.len() != 4 {
                    return Err(CliError::config("initial.v", format!("needs 4 entries, got {}", v.len())));
                }
                if let Some(q) = &init.q {
                    if q.len() != 4 {
                        return Err(CliError::config("initial.q", format!("needs 4 entries, got {}", q.len())));
                    }
                }
                if init.q.iter().chain(init.v.iter()).flatten().any(|x| !x.is_finite()) {
                    return Err(CliError::config("initial", "state entries must be finite"));
                }
            }
            SystemKind::CosseratRod => {
                for (key, present) in [("q", init.q.is_some()), ("v", init.v.is_some())] {
                    if present {
                        return Err(CliError::config(
                            &format!("initial.{key}"),
                            "not valid for system cosserat_rod",
                        ));
                    }
                }
                if init.angle.is_some() && init.shape != Some(ShapeKind::Straight) {
                    return Err(CliError::config("initial.angle", "only valid with shape = \"straight\""));
                }
            }
        }
        Ok(())
    }

    /// Parameter value or its default.
    pub fn param(&self, key: &str, default: f64) -> f64 {
        self.params.get(key).copied().unwrap_or(default)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
system = "benenti"
[initial]
v = [1.0, 0.5, 2.0, 1.0]
[integration]
h = 1e-3
T = 1.0
"#;

    #[test]
    fn minimal_toml_parses() {
        let cfg = ScenarioConfig::parse(MINIMAL, false).unwrap();
        assert_eq!(cfg.system, SystemKind::Benenti);
        assert_eq!(cfg.seed, 42);
        assert!(cfg.checks.is_empty());
    }

    #[test]
    fn unknown_nested_key_is_named() {
        let text = MINIMAL.replace("T = 1.0", "T = 1.0\nsteps = 3");
        let err = ScenarioConfig::parse(&text, false).unwrap_err();
        assert!(err.to_string().contains("integration.steps"), "{err}");
    }

    #[test]
    fn unknown_check_field_is_named() {
        let text = format!("{MINIMAL}\n[[checks]]\nkind = \"constraint_drift\"\ntolerence = 1e-9\n");
        let err = ScenarioConfig::parse(&text, false).unwrap_err();
        assert!(err.to_string().contains("checks[0]"), "{err}");
    }

    #[test]
    fn zero_step_is_rejected() {
        let err = ScenarioConfig::parse(&MINIMAL.replace("h = 1e-3", "h = 0.0"), false).unwrap_err();
        assert!(err.to_string().contains("integration.h must be positive"));
    }

    #[test]
    fn rod_needs_grid() {
        let text = "system = \"cosserat_rod\"\n[integration]\nT = 1.0\n";
        let err = ScenarioConfig::parse(text, false).unwrap_err();
        assert!(err.to_string().contains("integration.N"));
    }

    #[test]
    fn rod_check_on_benenti_is_rejected() {
        let text = format!("{MINIMAL}\n[[checks]]\nkind = \"energy_drift\"\n");
        let err = ScenarioConfig::parse(&text, false).unwrap_err();
        assert!(err.to_string().contains("checks[0].kind"));
    }

    #[test]
    fn json_and_toml_agree() {
        let json = r#"{"system":"benenti","initial":{"v":[1.0,0.5,2.0,1.0]},"integration":{"h":0.001,"T":1.0}}"#;
        assert_eq!(
            ScenarioConfig::parse(json, true).unwrap(),
            ScenarioConfig::parse(MINIMAL, false).unwrap()
        );
    }
}
