use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::frontier::{extract_frontiers, filter_reachable, is_frontier_cell, Frontier};
use crate::grid::{reachable_free_cells, Cell, GroundTruthMap, ObservedMap, ReachableSet};
use crate::harness::config::EpisodeConfig;
use crate::navigation::{next_primitive, plan_path, step_toward};
use crate::oracle::{Estimator, FrontierEstimate};
use crate::planner::{PlannerBelief, PlannerKind};
use crate::sensing::{apply_action, Action, AgentState, Heading, Sensor};
use crate::ExactReward;

/// One line of the replay log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: u64,
    /// Position and heading after the action.
    pub pos: Cell,
    pub heading: Heading,
    pub action: Action,
    pub coverage: f64,
    /// Frontier cell being approached (normally the centroid).
    pub chosen_frontier: Option<Cell>,
}

impl StepRecord {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("step records serialize")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub step: u64,
    pub frontier_id: usize,
    pub centroid: Cell,
    pub estimate: FrontierEstimate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    BudgetExhausted,
    NoFrontiers,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub start: Cell,
    pub reachable_cells: usize,
    pub coverage: f64,
    /// Coverage after the initial scan and after every step.
    pub trace: Vec<f64>,
    pub steps: u64,
    pub selections: Vec<Selection>,
    pub frontiers_remaining: usize,
    pub termination: Termination,
    pub wall_ms: f64,
}

/// Equality ignores the wall-clock time.
impl PartialEq for EpisodeResult {
    fn eq(&self, other: &Self) -> bool {
        self.start == other.start
            && self.reachable_cells == other.reachable_cells
            && self.coverage == other.coverage
            && self.trace == other.trace
            && self.steps == other.steps
            && self.selections == other.selections
            && self.frontiers_remaining == other.frontiers_remaining
            && self.termination == other.termination
    }
}

impl EpisodeResult {
    /// Number of times the pursued frontier changed to a different one.
    pub fn target_switches(&self) -> usize {
        self.selections
            .windows(2)
            .filter(|w| w[0].centroid != w[1].centroid)
            .count()
    }
}

#[derive(Clone, Debug)]
struct Target {
    /// Frontier cell being approached.
    aim: Cell,
    /// Free neighbour of `aim` the path leads to.
    goal: Cell,
}

/// A running exploration episode.
pub struct Episode<'a> {
    gt: &'a GroundTruthMap,
    start: Cell,
    reachable: ReachableSet,
    observed: ObservedMap,
    agent: AgentState,
    sensor: Sensor,
    estimator: Box<dyn Estimator + 'a>,
    planner: PlannerKind,
    k: usize,
    step_ratio: f64,
    target: Option<Target>,
    seen: usize,
    step: u64,
    trace: Vec<f64>,
    selections: Vec<Selection>,
    frontiers_remaining: usize,
    termination: Option<Termination>,
}

impl<'a> Episode<'a> {
    /// Places the agent at `start` facing east and takes the first scan.
    pub fn new(gt: &'a GroundTruthMap, start: Cell, config: &EpisodeConfig) -> Result<Self, ConfigError> {
        config.validate()?;
        let reachable = reachable_free_cells(gt, start)?;
        let mut ep = Self {
            gt,
            start,
            reachable,
            observed: ObservedMap::unknown_like(gt),
            agent: AgentState::new(start, Heading::E, config.budget),
            sensor: Sensor::new(config.sensor),
            estimator: config.estimator.build(gt, config.step_ratio, config.seed),
            planner: config.planner,
            k: config.k,
            step_ratio: config.step_ratio,
            target: None,
            seen: 0,
            step: 0,
            trace: Vec::new(),
            selections: Vec::new(),
            frontiers_remaining: 0,
            termination: None,
        };
        ep.sense();
        Ok(ep)
    }

    pub fn observed(&self) -> &ObservedMap {
        &self.observed
    }

    pub fn agent(&self) -> &AgentState {
        &self.agent
    }

    pub fn coverage(&self) -> f64 {
        self.seen as f64 / self.reachable.len() as f64
    }

    pub fn termination(&self) -> Option<Termination> {
        self.termination
    }

    /// Frontier selections so far.
    pub fn selections(&self) -> &[Selection] {
        &self.selections
    }

    fn sense(&mut self) {
        let visible = self.sensor.visible_cells(self.gt, &self.agent);
        self.seen += visible
            .iter()
            .filter(|c| self.observed.is_unknown(**c) && self.reachable.contains(**c))
            .count();
        self.observed.reveal(self.gt, visible);
        self.trace.push(self.coverage());
    }

    fn at_anchor(&self, aim: Cell) -> bool {
        aim.neighbors4().contains(&self.agent.pos)
    }

    fn select(&mut self, frontiers: &[Frontier]) {
        let candidates = frontiers
            .iter()
            .map(|f| {
                let e = match self.planner {
                    PlannerKind::Nearest => FrontierEstimate::ZERO,
                    _ => self.estimator.estimate(&self.observed, f, self.step),
                };
                (f.clone(), e)
            })
            .collect();
        let lookahead = if self.planner.looks_ahead() { self.k } else { 0 };
        let belief = PlannerBelief::from_observed(
            &self.observed,
            self.agent.pos,
            self.agent.remaining_budget as i64,
            candidates,
            self.step_ratio,
            lookahead,
        );
        let plan = self.planner.select::<ExactReward>(&belief, self.k);
        self.target = plan.chosen.map(|id| {
            let a = belief
                .actions
                .iter()
                .find(|a| a.frontier.id == id)
                .expect("chosen action exists");
            self.selections.push(Selection {
                step: self.step,
                frontier_id: id,
                centroid: a.frontier.centroid,
                estimate: a.estimate,
            });
            Target {
                aim: a.aim,
                goal: a.anchor,
            }
        });
    }

    fn choose_action(&mut self) -> Action {
        let Some(t) = self.target.clone() else {
            return Action::TurnLeft;
        };
        if self.at_anchor(t.aim) {
            // Reached but still unseen (narrow field of view): face it.
            return step_toward(&self.agent, t.aim);
        }
        match plan_path(&self.observed, self.agent.pos, t.goal) {
            Ok(path) => next_primitive(&self.agent, &path),
            Err(_) => {
                self.target = None;
                Action::TurnLeft
            }
        }
    }

    /// Advances one timestep: re-selects a frontier when needed, applies one
    /// primitive and senses. Returns `None` once the episode is over.
    pub fn step(&mut self) -> Option<StepRecord> {
        if self.termination.is_some() {
            return None;
        }
        let frontiers = filter_reachable(&extract_frontiers(&self.observed), &self.observed, &self.agent);
        self.frontiers_remaining = frontiers.len();
        if frontiers.is_empty() {
            self.termination = Some(Termination::NoFrontiers);
            return None;
        }
        if self.agent.remaining_budget == 0 {
            self.termination = Some(Termination::BudgetExhausted);
            return None;
        }
        let reselect = match &self.target {
            None => true,
            Some(t) => !is_frontier_cell(&self.observed, t.aim) || self.at_anchor(t.aim),
        };
        if reselect {
            self.select(&frontiers);
        }
        let action = self.choose_action();
        self.agent = apply_action(&self.agent, action, &self.observed).expect("budget checked above");
        self.step += 1;
        self.sense();
        Some(StepRecord {
            step: self.step,
            pos: self.agent.pos,
            heading: self.agent.heading,
            action,
            coverage: self.coverage(),
            chosen_frontier: self.target.as_ref().map(|t| t.aim),
        })
    }

    /// Runs to completion, handing every step record to `on_step`.
    pub fn run(mut self, mut on_step: impl FnMut(&StepRecord)) -> EpisodeResult {
        let t0 = Instant::now();
        while let Some(rec) = self.step() {
            on_step(&rec);
        }
        EpisodeResult {
            start: self.start,
            reachable_cells: self.reachable.len(),
            coverage: self.coverage(),
            trace: self.trace,
            steps: self.step,
            selections: self.selections,
            frontiers_remaining: self.frontiers_remaining,
            termination: self.termination.expect("loop ends on termination"),
            wall_ms: t0.elapsed().as_secs_f64() * 1e3,
        }
    }
}

/// Runs one episode from its configuration.
pub fn run_episode(config: &EpisodeConfig) -> Result<EpisodeResult, ConfigError> {
    run_episode_with(config, |_| {})
}

/// Runs one episode, handing every step record to `on_step`.
pub fn run_episode_with(
    config: &EpisodeConfig,
    on_step: impl FnMut(&StepRecord),
) -> Result<EpisodeResult, ConfigError> {
    let (gt, start) = config.resolve()?;
    let ep = Episode::new(&gt, start, config)?;
    Ok(ep.run(on_step))
}
