//! Scenario configuration: every model coefficient, the design (or design
//! space) under study, the cost model and the run settings.
//!
//! Scenarios are read from TOML. Every section except `[run]` is optional;
//! omitted sections and omitted keys take their `ama-default` values (see
//! [`crate::calibration`]). `run.master_seed` is required. Unknown keys are
//! rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::affect::{AffectParams, Design, MeasurementParams};
use crate::calibration;
use crate::design::{CostModel, DesignSpace};
use crate::diffusion::{DecisionParams, TransmissionParams};
use crate::error::{AmaError, Result};
use crate::game::PlayerConfig;
use crate::graph::GraphConfig;
use crate::impact::ImpactWeights;

/// Whether the social graph is sampled once per scenario or once per replication.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphPolicy {
    #[default]
    Fixed,
    PerRep,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub master_seed: u64,
    #[serde(default = "default_reps")]
    pub reps: usize,
    #[serde(default = "default_max_rounds")]
    pub max_rounds: u32,
    #[serde(default)]
    pub graph_policy: GraphPolicy,
}

fn default_reps() -> usize {
    200
}

fn default_max_rounds() -> u32 {
    1000
}

/// The structural coefficients of the model, shared by every run mode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub affect: AffectParams,
    pub measurement: MeasurementParams,
    pub decision: DecisionParams,
    pub transmission: TransmissionParams,
    pub impact: ImpactWeights,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameConfig {
    pub left: PlayerConfig,
    pub right: PlayerConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default = "default_name")]
    pub name: String,
    pub run: RunConfig,
    #[serde(default = "calibration::community_graph")]
    pub graph: GraphConfig,
    #[serde(default = "calibration::affect")]
    pub affect: AffectParams,
    #[serde(default = "calibration::measurement")]
    pub measurement: MeasurementParams,
    #[serde(default = "calibration::decision")]
    pub decision: DecisionParams,
    #[serde(default = "calibration::transmission")]
    pub transmission: TransmissionParams,
    #[serde(default = "calibration::weights")]
    pub impact: ImpactWeights,
    #[serde(default = "calibration::design")]
    pub design: Design,
    #[serde(default = "calibration::design_space")]
    pub space: DesignSpace,
    #[serde(default = "calibration::cost_model")]
    pub cost: CostModel,
    #[serde(default = "calibration::budget")]
    pub budget: f64,
    #[serde(default = "calibration::toxicity_limit")]
    pub toxicity_limit: f64,
    #[serde(default = "calibration::game")]
    pub game: GameConfig,
}

fn default_name() -> String {
    "custom".to_string()
}

impl Scenario {
    pub fn model(&self) -> Model {
        Model {
            affect: self.affect.clone(),
            measurement: self.measurement.clone(),
            decision: self.decision.clone(),
            transmission: self.transmission.clone(),
            impact: self.impact.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.graph.validate()?;
        self.affect.validate()?;
        self.measurement.validate()?;
        self.decision.validate()?;
        self.transmission.validate()?;
        self.impact.validate()?;
        self.design.validate(self.graph.dim)?;
        self.space.validate(self.graph.dim)?;
        self.cost.validate()?;
        for p in [&self.game.left, &self.game.right] {
            p.validate(self.graph.dim)?;
        }
        if self.run.reps < 1 {
            return Err(AmaError::InvalidConfig("run: reps must be at least 1".into()));
        }
        if self.run.max_rounds < 1 {
            return Err(AmaError::InvalidConfig("run: max_rounds must be at least 1".into()));
        }
        if !(self.budget >= 0.0) {
            return Err(AmaError::InvalidConfig("budget must be >= 0".into()));
        }
        if !(0.0..=1.0).contains(&self.toxicity_limit) {
            return Err(AmaError::InvalidConfig("toxicity_limit must lie in [0,1]".into()));
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let s: Scenario = toml::from_str(text).map_err(|e| AmaError::Parse(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario serializes to TOML")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Scenario::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_toml_string())?;
        Ok(())
    }

    /// SHA-256 of the canonical TOML rendering, hex encoded.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml_string().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::ContextPreset;

    #[test]
    fn minimal_file_fills_defaults() {
        let s = Scenario::from_toml_str("[run]\nmaster_seed = 7\n").unwrap();
        assert_eq!(s.run.master_seed, 7);
        assert_eq!(s.run.reps, 200);
        assert_eq!(s.affect, calibration::affect());
        assert_eq!(s.graph.context, ContextPreset::Community);
    }

    #[test]
    fn partial_sections_fill_missing_keys() {
        let s = Scenario::from_toml_str("[run]\nmaster_seed = 1\n[graph]\nn = 50\n").unwrap();
        assert_eq!(s.graph.n, 50);
        assert_eq!(s.graph.blocks, calibration::community_graph().blocks);
    }

    #[test]
    fn missing_seed_is_an_error() {
        let e = Scenario::from_toml_str("[run]\nreps = 3\n").unwrap_err();
        assert!(e.to_string().contains("master_seed"), "{e}");
        assert!(Scenario::from_toml_str("").is_err());
    }

    #[test]
    fn unknown_keys_are_errors() {
        assert!(Scenario::from_toml_str("[run]\nmaster_seed = 1\nfoo = 2\n").is_err());
        assert!(Scenario::from_toml_str("[run]\nmaster_seed = 1\n[graph]\nnn = 2\n").is_err());
        assert!(Scenario::from_toml_str("bogus = 1\n[run]\nmaster_seed = 1\n").is_err());
    }

    #[test]
    fn invalid_values_are_errors() {
        assert!(Scenario::from_toml_str("[run]\nmaster_seed = 1\n[graph]\np_in = 0.001\np_out = 0.5\n").is_err());
        assert!(Scenario::from_toml_str("[run]\nmaster_seed = 1\nreps = 0\n").is_err());
    }

    #[test]
    fn save_load_round_trip() {
        for ctx in [ContextPreset::Community, ContextPreset::Fragmented] {
            let s = calibration::scenario(ctx, 99);
            let back = Scenario::from_toml_str(&s.to_toml_string()).unwrap();
            assert_eq!(back, s);
            assert_eq!(back.hash(), s.hash());
        }
        let dir = std::env::temp_dir().join(format!("ama-scenario-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("s.toml");
        let s = calibration::scenario(ContextPreset::Custom { mean: 0.4, spread: 0.2 }, 3);
        s.save(&path).unwrap();
        assert_eq!(Scenario::load(&path).unwrap(), s);
        std::fs::remove_dir_all(dir).ok();
    }

    #[test]
    fn hash_changes_with_content() {
        let a = calibration::scenario(ContextPreset::Community, 1);
        let mut b = a.clone();
        b.run.master_seed = 2;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
