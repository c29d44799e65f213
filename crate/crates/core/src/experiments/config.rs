use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::agent::{
    ExplorationConfig, DEFAULT_IDLE_BAND, DEFAULT_MIN_DISTANCE, DEFAULT_SIGMA0, DEFAULT_STEP_NORM,
};
use crate::belief::SensorModel;
use crate::geometry::{GeometryKind, Point};
use crate::pushforward::IntegrationConfig;

use super::ExperimentError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum GeometrySelection {
    Euclidean,
    Projective,
    #[default]
    Both,
}

impl std::str::FromStr for GeometrySelection {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "euclidean" => Ok(Self::Euclidean),
            "projective" => Ok(Self::Projective),
            "both" => Ok(Self::Both),
            other => Err(format!("unknown geometry {other:?}")),
        }
    }
}

/// Object grid around the agent for the direction-profile experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    /// Cells per side.
    pub cells: usize,
    /// Half side length; the grid spans `[-extent, extent]²` around the start.
    pub extent: f64,
    /// Cells whose centre lies closer than this to the agent are skipped.
    pub exclusion_radius: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            cells: 20,
            extent: 5.0,
            exclusion_radius: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleSpec {
    /// Points per sample cloud.
    pub cloud_size: usize,
    /// Independent clouds per ball estimate.
    pub replicates: usize,
    /// Standard deviation of the tight belief fed to the ball oracle.
    pub belief_sigma: f64,
    /// Ball radius relative to the cloud's smallest marginal std.
    pub epsilon_factor: f64,
    /// Radii (relative to cloud std) for the ordering sweep.
    pub epsilon_sweep: Vec<f64>,
    /// Random `(Σ, ε)` instances in the closed-form comparison.
    pub mi_instances: usize,
    pub mi_samples: usize,
    /// Seeds for the ε-halving check.
    pub halving_seeds: usize,
    /// Larger of the two radii (relative to cloud std) in the halving check.
    pub halving_epsilon_factor: f64,
    pub halving_cloud_size: usize,
    /// Random frame sets in the Jacobian ranking check.
    pub ranking_sets: usize,
}

impl Default for OracleSpec {
    fn default() -> Self {
        Self {
            cloud_size: 10_000,
            replicates: 8,
            belief_sigma: 0.05,
            epsilon_factor: 0.05,
            epsilon_sweep: vec![0.03, 0.1, 0.3],
            mi_instances: 50,
            mi_samples: 100_000,
            halving_seeds: 10,
            halving_epsilon_factor: 0.4,
            halving_cloud_size: 40_000,
            ranking_sets: 20,
        }
    }
}

/// Every knob of the experiments. All fields are optional in JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub geometry: GeometrySelection,
    pub gamma: f64,
    pub dim: usize,
    pub start: Vec<f64>,
    pub object: Vec<f64>,
    pub iterations: usize,
    pub step_norm: f64,
    pub epsilon: f64,
    pub sigma0: f64,
    pub idle_band: f64,
    pub min_distance: f64,
    pub integration: IntegrationConfig,
    pub seed: u64,
    pub raw_frame_observation: bool,
    pub observation_noise: bool,
    pub grid: GridSpec,
    pub oracle: OracleSpec,
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            geometry: GeometrySelection::Both,
            gamma: 1.0,
            dim: 2,
            start: vec![0.0, 0.0],
            object: vec![0.0, 2.0],
            iterations: 20,
            step_norm: DEFAULT_STEP_NORM,
            epsilon: 0.1,
            sigma0: DEFAULT_SIGMA0,
            idle_band: DEFAULT_IDLE_BAND,
            min_distance: DEFAULT_MIN_DISTANCE,
            integration: IntegrationConfig::default(),
            seed: 0,
            raw_frame_observation: false,
            observation_noise: false,
            grid: GridSpec::default(),
            oracle: OracleSpec::default(),
            output_dir: PathBuf::from("out"),
        }
    }
}

fn invalid(msg: impl Into<String>) -> ExperimentError {
    ExperimentError::Config(msg.into())
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ExperimentError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| invalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        let text = std::fs::read_to_string(path).map_err(|source| ExperimentError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    /// Compact JSON of the resolved configuration, embedded in outputs.
    pub fn snapshot(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    pub fn kinds(&self) -> Vec<GeometryKind> {
        let projective = GeometryKind::Projective { gamma: self.gamma };
        match self.geometry {
            GeometrySelection::Euclidean => vec![GeometryKind::Euclidean],
            GeometrySelection::Projective => vec![projective],
            GeometrySelection::Both => vec![GeometryKind::Euclidean, projective],
        }
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.dim != 2 && self.dim != 3 {
            return Err(invalid(format!("dim must be 2 or 3, got {}", self.dim)));
        }
        if self.start.len() != self.dim || self.object.len() != self.dim {
            return Err(invalid(format!(
                "start and object must have {} coordinates",
                self.dim
            )));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(invalid("gamma must be strictly positive"));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(invalid("epsilon must be strictly positive"));
        }
        let g = &self.grid;
        if g.cells == 0 || !(g.extent > 0.0) || !(g.exclusion_radius >= 0.0) {
            return Err(invalid("grid needs cells > 0, extent > 0, exclusion_radius >= 0"));
        }
        if g.exclusion_radius < self.min_distance + self.step_norm {
            return Err(invalid(
                "grid exclusion_radius must be at least min_distance + step_norm",
            ));
        }
        let o = &self.oracle;
        if o.replicates < 2 || o.mi_instances == 0 || o.halving_seeds == 0 || o.ranking_sets == 0 {
            return Err(invalid("oracle counts must be positive (replicates >= 2)"));
        }
        if !(o.belief_sigma > 0.0) || !(o.epsilon_factor > 0.0) || !(o.halving_epsilon_factor > 0.0) {
            return Err(invalid("oracle belief_sigma and epsilon_factor must be positive"));
        }
        if o.epsilon_sweep.iter().any(|f| !(*f > 0.0)) {
            return Err(invalid("oracle epsilon_sweep entries must be positive"));
        }
        for kind in self.kinds() {
            self.exploration(kind)
                .validate()
                .map_err(|e| invalid(e.to_string()))?;
        }
        Ok(())
    }

    pub fn sensor(&self) -> SensorModel {
        SensorModel::gaussian(self.epsilon).expect("validated epsilon")
    }

    /// Single-run configuration for one geometry.
    pub fn exploration(&self, kind: GeometryKind) -> ExplorationConfig {
        ExplorationConfig {
            geometry: kind,
            start: Point::from_column_slice(&self.start),
            object: Point::from_column_slice(&self.object),
            iterations: self.iterations,
            step_norm: self.step_norm,
            sensor: SensorModel::gaussian(self.epsilon)
                .unwrap_or(SensorModel::gaussian(1.0).expect("positive")),
            sigma0: self.sigma0,
            idle_band: self.idle_band,
            min_distance: self.min_distance,
            integration: self.integration,
            seed: self.seed,
            raw_frame_observation: self.raw_frame_observation,
            observation_noise: self.observation_noise,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        let cfg = ExperimentConfig::from_json("{}").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        assert_eq!(cfg.kinds().len(), 2);
    }

    #[test]
    fn partial_document_overrides() {
        let cfg = ExperimentConfig::from_json(
            r#"{"geometry": "projective", "gamma": 2.0, "integration": {"sample_count": 5000}}"#,
        )
        .unwrap();
        assert_eq!(cfg.kinds(), vec![GeometryKind::Projective { gamma: 2.0 }]);
        assert_eq!(cfg.integration.sample_count, 5000);
        assert_eq!(cfg.integration.half_width_sigmas, 5.0);
    }

    #[test]
    fn bad_documents_rejected() {
        for doc in [
            r#"{"gamma": 0.0}"#,
            r#"{"dim": 3}"#,
            r#"{"epsilon": -1}"#,
            r#"{"unknown_field": 1}"#,
            r#"{"object": [0.0, 0.1]}"#,
            r#"{"integration": {"sample_count": 10}}"#,
            "not json",
        ] {
            assert!(
                matches!(ExperimentConfig::from_json(doc), Err(ExperimentError::Config(_))),
                "{doc}"
            );
        }
    }

    #[test]
    fn snapshot_round_trips() {
        let cfg = ExperimentConfig::default();
        let back = ExperimentConfig::from_json(&cfg.snapshot()).unwrap();
        assert_eq!(back, cfg);
    }
}
