//! Frontier-based exploration on occupancy grids.
//!
//! A grid-world simulator (ground-truth maps, a range- and field-of-view
//! limited sensor, 8-heading motion) and planners that pick which frontier
//! to explore next. The look-ahead planner weighs the area behind each
//! frontier against the time needed to reach and explore it, and chains
//! frontiers within the remaining budget.
//!
//! Expected rewards are generic over [`Reward`]; the harness uses exact
//! rationals so ties are decided without rounding.

pub mod error;
pub mod frontier;
pub mod grid;
pub mod harness;
pub mod navigation;
pub mod oracle;
pub mod planner;
pub mod scalar;
pub mod search;
pub mod sensing;

use num_rational::Ratio;

pub use error::{ConfigError, GenerateError, GridError, NavError, ParseError, SenseError, TourError};
pub use frontier::{extract_frontiers, filter_reachable, Frontier};
pub use grid::{generate_map, load_map, Cell, CellState, GenParams, GroundTruthMap, ObservedMap};
pub use oracle::{Estimator, EstimatorSpec, FrontierEstimate, OracleEstimator};
pub use planner::{partial_reward, select_greedy, select_lfe, select_nearest, PlannerBelief, PlannerKind};
pub use scalar::Reward;
pub use sensing::{Action, AgentState, FieldOfView, Heading, SensorConfig};

/// Exact rational rewards.
pub type ExactReward = Ratio<i128>;
pub type PlanResult = planner::PlanResult<ExactReward>;
pub type PlanResultF64 = planner::PlanResult<f64>;
pub type PlanResultF32 = planner::PlanResult<f32>;
