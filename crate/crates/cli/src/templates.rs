//! Builtin scenario templates shipped with the binary.

use crate::checks::{
    ANCHOR_BENENTI_CONSTRAINT, ANCHOR_BENENTI_LAWS, ANCHOR_ROD_ENERGY, ANCHOR_ROD_MOMENTUM,
    ANCHOR_SYMMETRY,
};
use crate::config::ScenarioConfig;
use crate::error::CliError;

#[derive(Debug, Clone, Copy)]
pub struct Template {
    pub name: &'static str,
    pub description: &'static str,
    pub anchor: &'static str,
    /// TOML source.
    pub source: &'static str,
}

pub const TEMPLATES: &[Template] = &[
    Template {
        name: "benenti-free",
        description: "force-free Benenti system, T = 10, three conservation laws and constraint drift",
        anchor: ANCHOR_BENENTI_LAWS,
        source: include_str!("../scenarios/benenti-free.toml"),
    },
    Template {
        name: "benenti-forced",
        description: "Benenti system under a vertical force, nonzero multipliers and momentum balance",
        anchor: ANCHOR_BENENTI_CONSTRAINT,
        source: include_str!("../scenarios/benenti-forced.toml"),
    },
    Template {
        name: "benenti-symmetry-discovery",
        description: "admissible weights of the velocity-weighted translation ansatz",
        anchor: ANCHOR_SYMMETRY,
        source: include_str!("../scenarios/benenti-symmetry-discovery.toml"),
    },
    Template {
        name: "rod-energy-conservation",
        description: "spinning rolling ring, energy drift, energy-current balance and field equations",
        anchor: ANCHOR_ROD_ENERGY,
        source: include_str!("../scenarios/rod-energy-conservation.toml"),
    },
    Template {
        name: "rod-translation-momentum",
        description: "spinning rolling ring, generalized translation momentum balance",
        anchor: ANCHOR_ROD_MOMENTUM,
        source: include_str!("../scenarios/rod-translation-momentum.toml"),
    },
    Template {
        name: "rod-symmetry-discovery",
        description: "admissible sections among constant translations and the rolling section",
        anchor: ANCHOR_SYMMETRY,
        source: include_str!("../scenarios/rod-symmetry-discovery.toml"),
    },
];

pub fn find(name: &str) -> Result<&'static Template, CliError> {
    TEMPLATES
        .iter()
        .find(|t| t.name == name)
        .ok_or_else(|| CliError::UnknownTemplate(name.to_string()))
}

impl Template {
    pub fn config(&self) -> Result<ScenarioConfig, CliError> {
        ScenarioConfig::parse(self.source, false)
    }
}

/// One line per template: name, description, anchor.
pub fn listing() -> String {
    let width = TEMPLATES.iter().map(|t| t.name.len()).max().unwrap_or(0);
    TEMPLATES
        .iter()
        .map(|t| format!("{:width$}  {}  [{}]\n", t.name, t.description, t.anchor))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_template_parses() {
        for t in TEMPLATES {
            t.config().unwrap_or_else(|e| panic!("{}: {e}", t.name));
        }
    }

    #[test]
    fn unknown_template() {
        assert!(matches!(find("nope"), Err(CliError::UnknownTemplate(_))));
    }
}
