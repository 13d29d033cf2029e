use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::grid::GenParams;
use crate::harness::config::{EpisodeConfig, MapSource, DEFAULT_BUDGET};
use crate::harness::episode::{run_episode, EpisodeResult, Termination};
use crate::oracle::{EstimatorSpec, DEFAULT_STEP_RATIO};
use crate::planner::{PlannerKind, DEFAULT_K};
use crate::sensing::{FieldOfView, SensorConfig, DEFAULT_RANGE_CELLS};

/// Map size class by reachable free cell count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SizeBucket {
    Small,
    Medium,
    Large,
}

impl SizeBucket {
    pub fn of(reachable_cells: usize) -> Self {
        match reachable_cells {
            0..4000 => SizeBucket::Small,
            4000..=10_000 => SizeBucket::Medium,
            _ => SizeBucket::Large,
        }
    }
}

/// A benchmark matrix as read from TOML. Every field has a default; the
/// defaults describe the full 50-map suite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    pub parallelism: usize,
    pub budget: u64,
    pub step_ratio: f64,
    pub k: usize,
    pub range_cells: u32,
    pub planners: Vec<PlannerKind>,
    pub estimators: Vec<EstimatorSpec>,
    pub fovs: Vec<u32>,
    /// Generated maps use seeds `first_map_seed..first_map_seed + map_count`.
    pub map_count: usize,
    pub first_map_seed: u64,
    pub generator: GenParams,
    /// Map files benchmarked in addition to the generated maps.
    pub map_files: Vec<PathBuf>,
    /// Start cells per map, drawn with seeds `first_start_seed..`.
    pub starts_per_map: usize,
    pub first_start_seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            parallelism: 8,
            budget: DEFAULT_BUDGET,
            step_ratio: DEFAULT_STEP_RATIO,
            k: DEFAULT_K,
            range_cells: DEFAULT_RANGE_CELLS,
            planners: PlannerKind::ALL.to_vec(),
            estimators: vec![EstimatorSpec::Oracle, EstimatorSpec::OracleNoisy { rel_sigma: 0.2 }],
            fovs: vec![360, 90],
            map_count: 50,
            first_map_seed: 0,
            generator: GenParams::default(),
            map_files: Vec::new(),
            starts_per_map: 5,
            first_start_seed: 0,
        }
    }
}

impl BenchConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_toml(&text)
    }

    /// Expands the matrix. Episodes are ordered by map, start, field of view,
    /// estimator and planner, so planners sharing a map and start are
    /// adjacent.
    pub fn episodes(&self) -> Result<Vec<EpisodeConfig>, ConfigError> {
        let fovs = self
            .fovs
            .iter()
            .map(|&d| {
                FieldOfView::from_degrees(d)
                    .ok_or_else(|| ConfigError::Invalid(format!("field of view must be 360 or 90, got {d}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let maps: Vec<MapSource> = (0..self.map_count as u64)
            .map(|i| MapSource::Generated {
                seed: self.first_map_seed + i,
                params: self.generator.clone(),
            })
            .chain(self.map_files.iter().cloned().map(MapSource::File))
            .collect();
        let mut out = Vec::new();
        for map in &maps {
            for s in 0..self.starts_per_map as u64 {
                for &fov in &fovs {
                    for &estimator in &self.estimators {
                        for &planner in &self.planners {
                            let mut c = EpisodeConfig::new(map.clone());
                            c.budget = self.budget;
                            c.planner = planner;
                            c.estimator = estimator;
                            c.sensor = SensorConfig {
                                fov,
                                range_cells: self.range_cells,
                            };
                            c.step_ratio = self.step_ratio;
                            c.k = self.k;
                            c.seed = self.first_start_seed + s;
                            out.push(c);
                        }
                    }
                }
            }
        }
        if out.is_empty() {
            return Err(ConfigError::Invalid("benchmark matrix is empty".into()));
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub index: usize,
    pub map: String,
    pub seed: u64,
    pub planner: PlannerKind,
    pub estimator: String,
    pub fov: u32,
    pub reachable_cells: usize,
    pub bucket: SizeBucket,
    pub coverage: f64,
    pub steps: u64,
    pub termination: Termination,
    pub frontiers_remaining: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub planner: PlannerKind,
    pub estimator: String,
    pub fov: u32,
    pub bucket: SizeBucket,
    pub episodes: usize,
    pub mean_coverage: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchTable {
    pub rows: Vec<BenchRow>,
    pub summary: Vec<SummaryRow>,
}

fn row(index: usize, c: &EpisodeConfig, r: &EpisodeResult) -> BenchRow {
    BenchRow {
        index,
        map: c.map.label(),
        seed: c.seed,
        planner: c.planner,
        estimator: c.estimator.to_string(),
        fov: c.sensor.fov.degrees(),
        reachable_cells: r.reachable_cells,
        bucket: SizeBucket::of(r.reachable_cells),
        coverage: r.coverage,
        steps: r.steps,
        termination: r.termination,
        frontiers_remaining: r.frontiers_remaining,
    }
}

/// Mean coverage per (planner, estimator, field of view, size bucket), in
/// order of first appearance.
pub fn summarize(rows: &[BenchRow]) -> Vec<SummaryRow> {
    let mut out: Vec<(SummaryRow, f64)> = Vec::new();
    for r in rows {
        let pos = out.iter().position(|(s, _)| {
            s.planner == r.planner && s.estimator == r.estimator && s.fov == r.fov && s.bucket == r.bucket
        });
        let i = pos.unwrap_or_else(|| {
            out.push((
                SummaryRow {
                    planner: r.planner,
                    estimator: r.estimator.clone(),
                    fov: r.fov,
                    bucket: r.bucket,
                    episodes: 0,
                    mean_coverage: 0.0,
                },
                0.0,
            ));
            out.len() - 1
        });
        out[i].0.episodes += 1;
        out[i].1 += r.coverage;
    }
    out.into_iter()
        .map(|(mut s, total)| {
            s.mean_coverage = total / s.episodes as f64;
            s
        })
        .collect()
}

/// Runs every episode on a pool of `parallelism` threads. Rows come back in
/// matrix order regardless of scheduling; the first failing episode aborts
/// the run with its index.
pub fn run_benchmark(matrix: &[EpisodeConfig], parallelism: usize) -> Result<BenchTable, ConfigError> {
    if matrix.is_empty() {
        return Err(ConfigError::Invalid("benchmark matrix is empty".into()));
    }
    for (index, c) in matrix.iter().enumerate() {
        c.validate().map_err(|e| ConfigError::Episode {
            index,
            source: Box::new(e),
        })?;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .map_err(|e| ConfigError::Invalid(e.to_string()))?;
    let results: Vec<Result<EpisodeResult, ConfigError>> =
        pool.install(|| matrix.par_iter().map(run_episode).collect());
    let mut rows = Vec::with_capacity(matrix.len());
    for (index, (c, r)) in matrix.iter().zip(results).enumerate() {
        let r = r.map_err(|e| ConfigError::Episode {
            index,
            source: Box::new(e),
        })?;
        rows.push(row(index, c, &r));
    }
    let summary = summarize(&rows);
    Ok(BenchTable { rows, summary })
}

impl BenchTable {
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r).expect("rows serialize");
        }
        String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn buckets() {
        assert_eq!(SizeBucket::of(0), SizeBucket::Small);
        assert_eq!(SizeBucket::of(3999), SizeBucket::Small);
        assert_eq!(SizeBucket::of(4000), SizeBucket::Medium);
        assert_eq!(SizeBucket::of(10_000), SizeBucket::Medium);
        assert_eq!(SizeBucket::of(10_001), SizeBucket::Large);
    }

    #[test]
    fn default_matrix_size() {
        let c = BenchConfig::default();
        assert_eq!(c.episodes().unwrap().len(), 50 * 5 * 3 * 2 * 2);
    }

    #[test]
    fn toml_round_trip_and_rejection() {
        let c = BenchConfig::from_toml(
            r#"
            parallelism = 2
            planners = ["lfe", "nearest"]
            estimators = ["oracle", "oracle-noisy(0.1)"]
            fovs = [90]
            map_count = 3
            [generator]
            width = 40
            height = 40
            "#,
        )
        .unwrap();
        assert_eq!(c.planners, vec![PlannerKind::Lfe, PlannerKind::Nearest]);
        assert_eq!(c.generator.width, 40);
        assert_eq!(c.generator.room_count_range, GenParams::default().room_count_range);
        assert_eq!(c.episodes().unwrap().len(), 3 * 5 * 2 * 2);
        assert!(BenchConfig::from_toml("planners = [\"random\"]").is_err());
        assert!(BenchConfig::from_toml("bogus = 1").is_err());
        let bad_fov = BenchConfig::from_toml("fovs = [180]").unwrap();
        assert!(bad_fov.episodes().is_err());
    }
}
