//! Ground-truth frontier properties and the estimator interface the planner
//! consumes.
//!
//! The oracle labels a frontier with the free area of the unexplored region
//! behind it (`area`), the length of a tour over that region's skeleton that
//! starts next to the frontier (`d_in`) and the walk back from where the tour
//! ends (`d_out`). Distances are converted to timesteps with the configured
//! step ratio.

pub mod skeleton;
pub mod tsp;

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;
use std::sync::Mutex;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::frontier::Frontier;
use crate::grid::{Cell, CellState, GroundTruthMap, ObservedMap};
use crate::search::to_timesteps;
use skeleton::{skeletonize, BinaryMask, SkeletonGraph};
use tsp::{closed_tour, ClosedTour, TourCosts};

/// Default cell-distance to timestep ratio.
pub const DEFAULT_STEP_RATIO: f64 = 1.7;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FrontierEstimate {
    /// Free cells in the unexplored region beyond the frontier.
    pub area: u64,
    /// Timesteps to explore that region, stopping where the tour ends.
    pub d_in: u64,
    /// Timesteps to walk from the end of the tour back to the frontier.
    pub d_out: u64,
}

impl FrontierEstimate {
    pub const ZERO: Self = Self {
        area: 0,
        d_in: 0,
        d_out: 0,
    };
}

/// Unknown cells that are free in the ground truth and 4-connected to the
/// frontier (through its own cells or their orthogonal neighbours).
pub fn region_beyond(gt: &GroundTruthMap, observed: &ObservedMap, f: &Frontier) -> Vec<Cell> {
    let open = |c: Cell| observed.is_unknown(c) && gt.is_free(c);
    let grid = gt.grid();
    let mut seen = vec![false; grid.len()];
    let mut queue = VecDeque::new();
    for &c in &f.cells {
        for s in std::iter::once(c).chain(c.neighbors4()) {
            if open(s) && !seen[grid.index(s)] {
                seen[grid.index(s)] = true;
                queue.push_back(s);
            }
        }
    }
    let mut out = Vec::new();
    while let Some(c) = queue.pop_front() {
        out.push(c);
        for n in c.neighbors4() {
            if open(n) && !seen[grid.index(n)] {
                seen[grid.index(n)] = true;
                queue.push_back(n);
            }
        }
    }
    out.sort_unstable();
    out
}

pub fn oracle_area(gt: &GroundTruthMap, observed: &ObservedMap, f: &Frontier) -> u64 {
    region_beyond(gt, observed, f)
        .iter()
        .filter(|c| gt.get(**c) == Some(CellState::Free))
        .count() as u64
}

/// Source of frontier property estimates.
pub trait Estimator: Send + Sync {
    /// `step` is the episode timestep at which the estimate is requested.
    fn estimate(&self, observed: &ObservedMap, frontier: &Frontier, step: u64) -> FrontierEstimate;
}

/// Skeleton cells of a region, plus the start when they are disconnected.
type TourKey = (Vec<Cell>, Option<Cell>);

/// Exact labels computed from the ground-truth map.
pub struct OracleEstimator<'a> {
    gt: &'a GroundTruthMap,
    skeleton: SkeletonGraph,
    step_ratio: f64,
    tours: Mutex<HashMap<TourKey, ClosedTour>>,
}

const TOUR_CACHE_LIMIT: usize = 4096;

impl<'a> OracleEstimator<'a> {
    pub fn new(gt: &'a GroundTruthMap, step_ratio: f64) -> Self {
        let free = BinaryMask::of_state(gt.grid(), CellState::Free);
        Self {
            gt,
            skeleton: skeletonize(&free),
            step_ratio,
            tours: Mutex::new(HashMap::new()),
        }
    }

    pub fn skeleton(&self) -> &SkeletonGraph {
        &self.skeleton
    }

    fn connect(&self, nodes: Vec<Cell>, start: Cell) -> SkeletonGraph {
        let sub = SkeletonGraph::from_cells(nodes);
        let comps = sub.components();
        if comps.len() <= 1 {
            return sub;
        }
        let full = &self.skeleton;
        let sub_nodes = sub.nodes();
        let comp_of: HashMap<usize, usize> = comps
            .iter()
            .enumerate()
            .flat_map(|(k, members)| {
                members
                    .iter()
                    .map(move |&i| (full.node_index(sub_nodes[i]).expect("skeleton node"), k))
            })
            .collect();
        let start_comp = comp_of[&full.node_index(start).expect("skeleton node")];
        let mut joined = vec![false; comps.len()];
        joined[start_comp] = true;
        let mut members: Vec<usize> = comps[start_comp]
            .iter()
            .map(|&i| full.node_index(sub.nodes()[i]).expect("skeleton node"))
            .collect();
        let mut extra = Vec::new();
        loop {
            let (dist, prev) = full.dijkstra(&members);
            // Closest node of a component not yet joined.
            let target = comp_of
                .iter()
                .filter(|(n, k)| !joined[**k] && dist[**n].is_finite())
                .min_by(|a, b| dist[*a.0].total_cmp(&dist[*b.0]).then(a.0.cmp(b.0)));
            let Some((&node, &k)) = target else { break };
            joined[k] = true;
            let mut cur = node;
            while let Some(p) = prev[cur] {
                if dist[p] > 0.0 {
                    extra.push(full.nodes()[p]);
                    members.push(p);
                }
                cur = p;
            }
            members.extend(
                comps[k]
                    .iter()
                    .map(|&i| full.node_index(sub.nodes()[i]).expect("skeleton node")),
            );
        }
        let mut cells: Vec<Cell> = sub
            .nodes()
            .iter()
            .enumerate()
            .filter(|(i, _)| {
                let n = full.node_index(sub.nodes()[*i]).expect("skeleton node");
                joined[comp_of[&n]]
            })
            .map(|(_, c)| *c)
            .collect();
        cells.extend(extra);
        SkeletonGraph::from_cells(cells)
    }

    /// Tour lengths in cells for a region. The tour visits the skeleton cells
    /// inside the region, joined through the full skeleton where they fall
    /// apart, and starts at the one nearest `centroid`. Zero when the region
    /// holds no skeleton cell.
    ///
    /// A closed tour costs the same from any of its nodes, so tours over a
    /// connected node set are cached independently of the start.
    pub fn region_tour(&self, region: &[Cell], centroid: Cell) -> TourCosts {
        let zero = TourCosts {
            d_in: 0.0,
            d_out: 0.0,
        };
        let inside: Vec<Cell> = region
            .iter()
            .copied()
            .filter(|c| self.skeleton.contains(*c))
            .collect();
        let Some(&start) = inside.iter().min_by_key(|c| (c.dist2(centroid), **c)) else {
            return zero;
        };
        let sub = SkeletonGraph::from_cells(inside.iter().copied());
        let key = if sub.is_connected() {
            (inside, None)
        } else {
            (inside, Some(start))
        };
        let cached = self.tours.lock().expect("tour cache").get(&key).cloned();
        let tour = match cached {
            Some(t) => t,
            None => {
                let graph = match key.1 {
                    None => sub,
                    Some(_) => self.connect(key.0.clone(), start),
                };
                let Ok(t) = closed_tour(&graph, start) else {
                    return zero;
                };
                let mut cache = self.tours.lock().expect("tour cache");
                if cache.len() >= TOUR_CACHE_LIMIT {
                    cache.clear();
                }
                cache.insert(key, t.clone());
                t
            }
        };
        tour.split_at(start).unwrap_or(zero)
    }
}

impl Estimator for OracleEstimator<'_> {
    fn estimate(&self, observed: &ObservedMap, frontier: &Frontier, _step: u64) -> FrontierEstimate {
        let region = region_beyond(self.gt, observed, frontier);
        if region.is_empty() {
            return FrontierEstimate::ZERO;
        }
        let tour = self.region_tour(&region, frontier.centroid);
        FrontierEstimate {
            area: region.len() as u64,
            d_in: to_timesteps(tour.d_in, self.step_ratio),
            d_out: to_timesteps(tour.d_out, self.step_ratio),
        }
    }
}

/// One-shot oracle label; builds the skeleton on every call.
pub fn oracle_estimate(
    gt: &GroundTruthMap,
    observed: &ObservedMap,
    f: &Frontier,
    step_ratio: f64,
) -> FrontierEstimate {
    OracleEstimator::new(gt, step_ratio).estimate(observed, f, 0)
}

/// Multiplies each field of an inner estimate by an independent log-normal
/// factor with unit mean, drawn deterministically from
/// `(seed, step, frontier id)`.
pub struct NoisyEstimator<E> {
    inner: E,
    seed: u64,
    rel_sigma: f64,
}

impl<E: Estimator> NoisyEstimator<E> {
    pub fn new(inner: E, seed: u64, rel_sigma: f64) -> Self {
        Self {
            inner,
            seed,
            rel_sigma: rel_sigma.max(0.0),
        }
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The three multiplicative factors applied to (area, d_in, d_out).
pub fn noise_factors(seed: u64, step: u64, frontier_id: usize, rel_sigma: f64) -> [f64; 3] {
    let key = splitmix(splitmix(splitmix(seed) ^ step) ^ frontier_id as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    let s = rel_sigma.max(0.0);
    [(); 3].map(|_| {
        let z: f64 = StandardNormal.sample(&mut rng);
        (s * z - 0.5 * s * s).exp()
    })
}

impl<E: Estimator> Estimator for NoisyEstimator<E> {
    fn estimate(&self, observed: &ObservedMap, frontier: &Frontier, step: u64) -> FrontierEstimate {
        let e = self.inner.estimate(observed, frontier, step);
        if self.rel_sigma == 0.0 {
            return e;
        }
        let [fa, fi, fo] = noise_factors(self.seed, step, frontier.id, self.rel_sigma);
        let scale = |v: u64, f: f64| (v as f64 * f).round().max(0.0) as u64;
        FrontierEstimate {
            area: scale(e.area, fa),
            d_in: scale(e.d_in, fi),
            d_out: scale(e.d_out, fo),
        }
    }
}

impl<E: Estimator + ?Sized> Estimator for Box<E> {
    fn estimate(&self, observed: &ObservedMap, frontier: &Frontier, step: u64) -> FrontierEstimate {
        (**self).estimate(observed, frontier, step)
    }
}

/// Estimator selection by name: `oracle` or `oracle-noisy(SIGMA)`
/// (`oracle-noisy=SIGMA` is accepted too).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum EstimatorSpec {
    Oracle,
    OracleNoisy { rel_sigma: f64 },
}

impl EstimatorSpec {
    pub fn build<'a>(&self, gt: &'a GroundTruthMap, step_ratio: f64, seed: u64) -> Box<dyn Estimator + 'a> {
        let oracle = OracleEstimator::new(gt, step_ratio);
        match *self {
            EstimatorSpec::Oracle => Box::new(oracle),
            EstimatorSpec::OracleNoisy { rel_sigma } => {
                Box::new(NoisyEstimator::new(oracle, seed, rel_sigma))
            }
        }
    }
}

impl fmt::Display for EstimatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EstimatorSpec::Oracle => write!(f, "oracle"),
            EstimatorSpec::OracleNoisy { rel_sigma } => write!(f, "oracle-noisy({rel_sigma})"),
        }
    }
}

impl FromStr for EstimatorSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "oracle" {
            return Ok(EstimatorSpec::Oracle);
        }
        let arg = s
            .strip_prefix("oracle-noisy=")
            .or_else(|| s.strip_prefix("oracle-noisy(").and_then(|r| r.strip_suffix(')')))
            .ok_or_else(|| format!("unknown estimator {s:?} (expected oracle or oracle-noisy=SIGMA)"))?;
        let rel_sigma: f64 = arg
            .trim()
            .parse()
            .map_err(|_| format!("bad noise level {arg:?}"))?;
        if !(rel_sigma.is_finite() && rel_sigma >= 0.0) {
            return Err(format!("noise level must be non-negative, got {rel_sigma}"));
        }
        Ok(EstimatorSpec::OracleNoisy { rel_sigma })
    }
}

impl TryFrom<String> for EstimatorSpec {
    type Error = String;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<EstimatorSpec> for String {
    fn from(e: EstimatorSpec) -> Self {
        e.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontier::extract_frontiers;

    /// Corridor of the top row leads right into a sealed room.
    fn room_fixture() -> (GroundTruthMap, ObservedMap) {
        let gt = GroundTruthMap::from_rows(&[
            "#########",
            "#...#...#",
            "#.......#",
            "#...#...#",
            "#########",
        ])
        .unwrap();
        let mut obs = ObservedMap::unknown_like(&gt);
        obs.reveal(&gt, gt.grid().cells().filter(|c| c.x <= 4 && !(c.x == 4 && c.y == 2)));
        (gt, obs)
    }

    fn flood_count(gt: &GroundTruthMap, obs: &ObservedMap, seeds: &[Cell]) -> usize {
        let mut seen = std::collections::BTreeSet::new();
        let mut stack: Vec<Cell> = seeds
            .iter()
            .copied()
            .filter(|c| obs.is_unknown(*c) && gt.is_free(*c))
            .collect();
        seen.extend(stack.iter().copied());
        while let Some(c) = stack.pop() {
            for n in [c.offset(1, 0), c.offset(-1, 0), c.offset(0, 1), c.offset(0, -1)] {
                if obs.is_unknown(n) && gt.is_free(n) && seen.insert(n) {
                    stack.push(n);
                }
            }
        }
        seen.len()
    }

    #[test]
    fn region_of_sealed_room() {
        let (gt, obs) = room_fixture();
        let fs = extract_frontiers(&obs);
        assert_eq!(fs.len(), 1);
        assert_eq!(fs[0].cells, vec![Cell::new(4, 2)]);
        let region = region_beyond(&gt, &obs, &fs[0]);
        // Doorway plus the 3x3 room.
        assert_eq!(region.len(), 10);
        assert_eq!(region.len(), flood_count(&gt, &obs, &[Cell::new(4, 2)]));
        assert_eq!(oracle_area(&gt, &obs, &fs[0]), 10);
    }

    #[test]
    fn wall_backed_frontier_is_empty() {
        let gt = GroundTruthMap::from_rows(&["#####", "#...#", "#####"]).unwrap();
        let mut obs = ObservedMap::unknown_like(&gt);
        obs.reveal(&gt, [Cell::new(1, 1), Cell::new(2, 1), Cell::new(3, 1)]);
        let fs = extract_frontiers(&obs);
        assert!(!fs.is_empty());
        for f in &fs {
            assert!(region_beyond(&gt, &obs, f).is_empty());
            assert_eq!(oracle_area(&gt, &obs, f), 0);
            assert_eq!(oracle_estimate(&gt, &obs, f, 1.7), FrontierEstimate::ZERO);
        }
    }

    #[test]
    fn two_frontiers_share_a_region() {
        let gt = GroundTruthMap::from_rows(&[
            "#######",
            "#.....#",
            "#.....#",
            "#.....#",
            "#######",
        ])
        .unwrap();
        let mut obs = ObservedMap::unknown_like(&gt);
        // Reveal the left column and the right column; the middle stays unknown.
        obs.reveal(&gt, gt.grid().cells().filter(|c| c.x <= 1 || c.x >= 5));
        let fs = extract_frontiers(&obs);
        assert_eq!(fs.len(), 2);
        let a = region_beyond(&gt, &obs, &fs[0]);
        let b = region_beyond(&gt, &obs, &fs[1]);
        assert_eq!(a, b);
        assert_eq!(a.len(), 9);
    }

    #[test]
    fn dead_end_corridor_return_leg() {
        // Frontier at x=2 opens onto a straight corridor of 10 unknown cells.
        let gt = GroundTruthMap::from_rows(&[
            "##############",
            "#............#",
            "##############",
        ])
        .unwrap();
        let mut obs = ObservedMap::unknown_like(&gt);
        obs.reveal(&gt, gt.grid().cells().filter(|c| c.x <= 1 || c.y != 1));
        let fs = extract_frontiers(&obs);
        assert_eq!(fs.len(), 1);
        let est = oracle_estimate(&gt, &obs, &fs[0], 1.0);
        assert_eq!(est.area, 11);
        // The skeleton of a one-wide corridor is the corridor itself, so the
        // tour walks from the frontier end to the dead end and back.
        let ones = oracle_estimate(&gt, &obs, &fs[0], 1.0);
        assert_eq!((ones.d_in, ones.d_out), (10, 10));
        let scaled = oracle_estimate(&gt, &obs, &fs[0], 1.7);
        assert_eq!(scaled.area, ones.area);
        assert_eq!((scaled.d_in, scaled.d_out), (17, 17));
    }

    #[test]
    fn estimate_is_pure() {
        let (gt, obs) = room_fixture();
        let f = &extract_frontiers(&obs)[0];
        let e = OracleEstimator::new(&gt, 1.7);
        let a = e.estimate(&obs, f, 3);
        assert_eq!(a, e.estimate(&obs, f, 9));
        assert_eq!(a, oracle_estimate(&gt, &obs, f, 1.7));
        assert_eq!(a.area, 10);
    }

    #[test]
    fn noise_identity_and_determinism() {
        let (gt, obs) = room_fixture();
        let f = &extract_frontiers(&obs)[0];
        let exact = oracle_estimate(&gt, &obs, f, 1.7);
        let zero = NoisyEstimator::new(OracleEstimator::new(&gt, 1.7), 5, 0.0);
        assert_eq!(zero.estimate(&obs, f, 4), exact);
        let a = NoisyEstimator::new(OracleEstimator::new(&gt, 1.7), 5, 0.3);
        let b = NoisyEstimator::new(OracleEstimator::new(&gt, 1.7), 5, 0.3);
        assert_eq!(a.estimate(&obs, f, 4), b.estimate(&obs, f, 4));
        assert_eq!(noise_factors(1, 2, 3, 0.2), noise_factors(1, 2, 3, 0.2));
        assert_ne!(noise_factors(1, 2, 3, 0.2), noise_factors(1, 2, 4, 0.2));
    }

    #[test]
    fn noise_factor_mean() {
        // Unit-mean log-normal: E[exp(sZ - s^2/2)] = 1.
        let n = 1000;
        let mean: f64 = (0..n)
            .map(|i| noise_factors(11, i as u64, 0, 0.2)[0])
            .sum::<f64>()
            / n as f64;
        assert!((mean - 1.0).abs() < 0.05, "mean {mean}");
    }

    #[test]
    fn spec_parsing() {
        assert_eq!("oracle".parse::<EstimatorSpec>(), Ok(EstimatorSpec::Oracle));
        assert_eq!(
            "oracle-noisy=0.2".parse::<EstimatorSpec>(),
            Ok(EstimatorSpec::OracleNoisy { rel_sigma: 0.2 })
        );
        assert_eq!(
            "oracle-noisy(0.2)".parse::<EstimatorSpec>(),
            Ok(EstimatorSpec::OracleNoisy { rel_sigma: 0.2 })
        );
        assert!("oracle-noisy=-1".parse::<EstimatorSpec>().is_err());
        assert!("unet".parse::<EstimatorSpec>().is_err());
        let s = EstimatorSpec::OracleNoisy { rel_sigma: 0.2 };
        assert_eq!(s.to_string().parse::<EstimatorSpec>(), Ok(s));
    }
}
