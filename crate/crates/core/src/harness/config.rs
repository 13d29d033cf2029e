use std::path::PathBuf;

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::grid::{generate_map, load_map, reachable_free_cells, Cell, GenParams, GroundTruthMap};
use crate::oracle::{EstimatorSpec, DEFAULT_STEP_RATIO};
use crate::planner::{PlannerKind, DEFAULT_K};
use crate::sensing::SensorConfig;

pub const DEFAULT_BUDGET: u64 = 500;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MapSource {
    File(PathBuf),
    Generated { seed: u64, params: GenParams },
    /// A map already in memory; not serializable.
    #[serde(skip)]
    Inline(GroundTruthMap),
}

impl MapSource {
    pub fn load(&self) -> Result<GroundTruthMap, ConfigError> {
        match self {
            MapSource::File(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
                    path: path.display().to_string(),
                    message: e.to_string(),
                })?;
                load_map(&text).map_err(|source| ConfigError::Map {
                    path: path.display().to_string(),
                    source,
                })
            }
            MapSource::Generated { seed, params } => Ok(generate_map(*seed, params)?),
            MapSource::Inline(map) => Ok(map.clone()),
        }
    }

    /// Short label for tables.
    pub fn label(&self) -> String {
        match self {
            MapSource::File(path) => path.display().to_string(),
            MapSource::Generated { seed, .. } => format!("gen-{seed}"),
            MapSource::Inline(map) => format!("inline-{}x{}", map.width(), map.height()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeConfig {
    pub map: MapSource,
    /// Start cell; a free cell drawn with `seed` when absent.
    pub start: Option<Cell>,
    pub budget: u64,
    pub planner: PlannerKind,
    pub estimator: EstimatorSpec,
    pub sensor: SensorConfig,
    pub step_ratio: f64,
    pub k: usize,
    pub seed: u64,
}

impl EpisodeConfig {
    pub fn new(map: MapSource) -> Self {
        Self {
            map,
            start: None,
            budget: DEFAULT_BUDGET,
            planner: PlannerKind::Lfe,
            estimator: EstimatorSpec::Oracle,
            sensor: SensorConfig::default(),
            step_ratio: DEFAULT_STEP_RATIO,
            k: DEFAULT_K,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: &str| Err(ConfigError::Invalid(m.to_string()));
        if self.budget == 0 {
            return bad("budget must be at least 1");
        }
        if self.k == 0 {
            return bad("k must be at least 1");
        }
        if !(self.step_ratio.is_finite() && self.step_ratio > 0.0) {
            return bad("step ratio must be positive");
        }
        if self.sensor.range_cells == 0 {
            return bad("sensor range must be at least 1 cell");
        }
        Ok(())
    }

    /// Loads the map and fixes the start cell.
    pub fn resolve(&self) -> Result<(GroundTruthMap, Cell), ConfigError> {
        self.validate()?;
        let gt = self.map.load()?;
        let start = match self.start {
            Some(c) => c,
            None => {
                let free: Vec<Cell> = gt.free_cells().collect();
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                *free
                    .choose(&mut rng)
                    .ok_or(ConfigError::Grid(crate::error::GridError::EmptyReachable))?
            }
        };
        reachable_free_cells(&gt, start)?;
        Ok((gt, start))
    }
}
