//! Run configuration: one JSON document describing the synthetic inputs,
//! the feeder, the scenario grid, the solver and where to write results.

use std::path::{Path, PathBuf};

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::feeder::{build_feeder, FeederSpec};
use crate::scenario::{ScenarioError, ScenarioInputs, ScenarioSpec};
use crate::scheduler::SolverSettings;
use crate::synth::SynthConfig;

/// The bundled configuration reproducing the full experiment grid.
pub const PAPER_GRID_JSON: &str = include_str!("../data/paper_grid.json");

#[derive(Debug, Clone, PartialEq, Default)]
pub enum FeederChoice {
    /// The 31-bus community chain.
    #[default]
    Default31,
    Custom(FeederSpec),
}

impl Serialize for FeederChoice {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            FeederChoice::Default31 => s.serialize_str("default31"),
            FeederChoice::Custom(spec) => spec.serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for FeederChoice {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match serde_json::Value::deserialize(d)? {
            serde_json::Value::String(name) if name == "default31" => Ok(FeederChoice::Default31),
            serde_json::Value::String(name) => Err(D::Error::custom(format!(
                "unknown feeder `{name}`, expected \"default31\" or a topology object"
            ))),
            other => FeederSpec::deserialize(other).map(FeederChoice::Custom).map_err(D::Error::custom),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub participation: Vec<usize>,
    pub penalty_price: Vec<f64>,
    pub pv: Vec<bool>,
    /// Adds a run with PV on the most enrolled homes but no scheduling, the
    /// baseline for the reverse-flow comparison.
    pub pv_reference: bool,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            participation: vec![0, 4, 8, 16],
            penalty_price: vec![0.0, 0.05, 0.10],
            pv: vec![false, true],
            pv_reference: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub synth: SynthConfig,
    #[serde(default)]
    pub feeder: FeederChoice,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub solver: SolverSettings,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("dsmsim-out")
}

impl Default for RunConfig {
    fn default() -> Self {
        Self::paper_grid()
    }
}

impl RunConfig {
    pub fn paper_grid() -> Self {
        serde_json::from_str(PAPER_GRID_JSON).expect("bundled grid parses")
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        let config: RunConfig = serde_json::from_str(text).map_err(|e| e.to_string())?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        Self::from_json(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    /// Checks everything that does not need the inputs built.
    pub fn validate(&self) -> Result<(), String> {
        self.synth.validate().map_err(|e| format!("synth: {e}"))?;
        if let FeederChoice::Custom(spec) = &self.feeder {
            build_feeder(spec.clone()).map_err(|e| format!("feeder: {e}"))?;
        }
        let g = &self.grid;
        if g.participation.is_empty() || g.penalty_price.is_empty() || g.pv.is_empty() {
            return Err("grid: participation, penalty_price and pv must each list at least one value".into());
        }
        let smart = self.synth.community.smart_homes.len();
        if let Some(p) = g.participation.iter().find(|&&p| p > smart) {
            return Err(format!("grid.participation: {p} exceeds the {smart} smart homes"));
        }
        if let Some(p) = g.penalty_price.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(format!("grid.penalty_price: {p} must be finite and non-negative"));
        }
        let s = &self.solver;
        if s.time_limit_s.is_nan() || s.time_limit_s <= 0.0 || s.max_nodes == 0 {
            return Err("solver: max_nodes and time_limit_s must be positive".into());
        }
        Ok(())
    }

    /// Scenario list in output order: PV setting, then penalty, then
    /// participation, with the optional PV-only run last.
    pub fn specs(&self) -> Vec<ScenarioSpec> {
        let g = &self.grid;
        let mut specs = Vec::new();
        for &pv in &g.pv {
            for &penalty in &g.penalty_price {
                for &participation in &g.participation {
                    specs.push(ScenarioSpec {
                        solver: self.solver,
                        ..ScenarioSpec::new(participation, penalty, pv)
                    });
                }
            }
        }
        let most = g.participation.iter().copied().max().unwrap_or(0);
        if g.pv_reference && most > 0 && g.pv.contains(&true) {
            specs.push(ScenarioSpec {
                dsm_enabled: false,
                solver: self.solver,
                ..ScenarioSpec::new(most, 0.0, true)
            });
        }
        specs
    }

    pub fn inputs(&self) -> Result<ScenarioInputs, ScenarioError> {
        let mut inputs = ScenarioInputs::from_synth(&self.synth)?;
        if let FeederChoice::Custom(spec) = &self.feeder {
            inputs.community.feeder = build_feeder(spec.clone())?;
        }
        Ok(inputs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_grid_has_24_cells_and_a_pv_reference() {
        let c = RunConfig::paper_grid();
        let specs = c.specs();
        assert_eq!(specs.len(), 25);
        assert_eq!(specs.iter().filter(|s| s.dsm_enabled).count(), 24);
        assert_eq!(c.feeder, FeederChoice::Default31);
    }

    #[test]
    fn unknown_keys_are_named() {
        let err = RunConfig::from_json(r#"{"grid": {"participaton": [0]}}"#).unwrap_err();
        assert!(err.contains("participaton"), "{err}");
        let err = RunConfig::from_json(r#"{"solvr": {}}"#).unwrap_err();
        assert!(err.contains("solvr"), "{err}");
    }

    #[test]
    fn bad_values_are_named() {
        let err = RunConfig::from_json(r#"{"grid": {"penalty_price": [-1.0]}}"#).unwrap_err();
        assert!(err.starts_with("grid.penalty_price"), "{err}");
        let err = RunConfig::from_json(r#"{"grid": {"participation": [17]}}"#).unwrap_err();
        assert!(err.starts_with("grid.participation"), "{err}");
        let err = RunConfig::from_json(r#"{"feeder": "ieee33"}"#).unwrap_err();
        assert!(err.contains("ieee33"), "{err}");
    }

    #[test]
    fn custom_feeder_round_trips() {
        let mut c = RunConfig::paper_grid();
        c.feeder = FeederChoice::Custom(FeederSpec::default_community());
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(RunConfig::from_json(&text).unwrap(), c);
    }
}
