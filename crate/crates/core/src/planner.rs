//! Frontier selection: the look-ahead planner that maximises expected
//! revealed area over the remaining budget, and two baselines.
//!
//! The look-ahead value of visiting frontier `a` with `σ` timesteps left is
//!
//! ```text
//! Q(a, σ) = partial(R_a, D_in,a, σ - D_k,a) + max_{b ≠ a} Q(b, σ - D_k,a - D_in,a - D_out,a)
//! ```
//!
//! where the continuation starts from `a`'s anchor cell and is dropped once
//! the residual budget is spent. The observed map is frozen during the
//! recursion.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::frontier::{free_neighbors4, Frontier};
use crate::grid::{Cell, ObservedMap};
use crate::oracle::FrontierEstimate;
use crate::scalar::Reward;
use crate::search::{to_timesteps, DistanceField};

/// Default number of frontiers the look-ahead planner considers.
pub const DEFAULT_K: usize = 6;

/// A candidate high-level action: travel to a frontier, then explore the
/// region behind it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlannerAction {
    pub frontier: Frontier,
    pub estimate: FrontierEstimate,
    /// Timesteps through known space from the agent to the frontier.
    pub d_k: u64,
    /// Member cell the agent heads for; the centroid unless that is cut off
    /// from the agent (see [`Frontier::aim`]).
    pub aim: Cell,
    /// Free orthogonal neighbour of `aim` nearest the agent; where the agent
    /// stands once the frontier is reached.
    pub anchor: Cell,
}

/// What the planner knows at one decision point.
#[derive(Clone, Debug, PartialEq)]
pub struct PlannerBelief {
    pub agent_pos: Cell,
    /// Timesteps left; never negative for a belief built from an episode.
    pub remaining: i64,
    pub actions: Vec<PlannerAction>,
    /// `transfer[i][j]`: timesteps from the anchor of action `i` to action
    /// `j`, or `None` when unknown or unreachable.
    transfer: Vec<Vec<Option<u64>>>,
}

/// Timesteps through known space from `from` to the nearest free orthogonal
/// neighbour of the frontier's aim cell (normally its centroid); `None` if
/// there is no such path.
pub fn known_space_distance(
    observed: &ObservedMap,
    from: Cell,
    frontier: &Frontier,
    step_ratio: f64,
) -> Option<u64> {
    let field = DistanceField::from_source(observed, from);
    approach(observed, &field, frontier).map(|(_, _, d)| to_timesteps(d, step_ratio))
}

/// Aim cell, nearest anchor and its cost under `field`.
fn approach(observed: &ObservedMap, field: &DistanceField, f: &Frontier) -> Option<(Cell, Cell, f64)> {
    let aim = f.aim(observed, |c| field.get(c).is_some())?;
    let (anchor, d) = field.nearest(free_neighbors4(observed, aim))?;
    Some((aim, anchor, d))
}

/// Candidate order used for pruning: larger estimated area first, then id.
fn by_area(a: &PlannerAction, b: &PlannerAction) -> std::cmp::Ordering {
    b.estimate
        .area
        .cmp(&a.estimate.area)
        .then(a.frontier.id.cmp(&b.frontier.id))
}

/// Indices of the `k` largest actions.
fn top_k(actions: &[PlannerAction], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..actions.len()).collect();
    idx.sort_by(|&a, &b| by_area(&actions[a], &actions[b]));
    idx.truncate(k);
    idx
}

impl PlannerBelief {
    /// Builds a belief from an observed map. Candidates the agent cannot
    /// reach are dropped. Frontier-to-frontier distances are computed only
    /// among the `lookahead` largest candidates (pass 0 for planners that do
    /// not look ahead).
    pub fn from_observed(
        observed: &ObservedMap,
        agent_pos: Cell,
        remaining: i64,
        candidates: Vec<(Frontier, FrontierEstimate)>,
        step_ratio: f64,
        lookahead: usize,
    ) -> Self {
        let here = DistanceField::from_source(observed, agent_pos);
        let mut actions = Vec::new();
        for (frontier, estimate) in candidates {
            if let Some((aim, anchor, d)) = approach(observed, &here, &frontier) {
                actions.push(PlannerAction {
                    frontier,
                    estimate,
                    d_k: to_timesteps(d, step_ratio),
                    aim,
                    anchor,
                });
            }
        }
        let n = actions.len();
        let mut transfer = vec![vec![None; n]; n];
        let top = top_k(&actions, lookahead);
        for &i in &top {
            let field = DistanceField::from_source(observed, actions[i].anchor);
            for &j in &top {
                transfer[i][j] = field
                    .nearest(free_neighbors4(observed, actions[j].aim))
                    .map(|(_, d)| to_timesteps(d, step_ratio));
            }
        }
        Self {
            agent_pos,
            remaining,
            actions,
            transfer,
        }
    }

    /// Assembles a belief from explicit numbers. `transfer` must be square
    /// with one row per action.
    pub fn from_parts(
        agent_pos: Cell,
        remaining: i64,
        actions: Vec<PlannerAction>,
        transfer: Vec<Vec<Option<u64>>>,
    ) -> Self {
        assert_eq!(transfer.len(), actions.len(), "transfer rows");
        assert!(transfer.iter().all(|r| r.len() == actions.len()), "transfer columns");
        Self {
            agent_pos,
            remaining,
            actions,
            transfer,
        }
    }

    pub fn transfer(&self, from: usize, to: usize) -> Option<u64> {
        self.transfer[from][to]
    }

    /// Budget left after travelling to action `i` and completing its tour.
    pub fn residual(&self, i: usize) -> i64 {
        let a = &self.actions[i];
        self.remaining - a.d_k as i64 - a.estimate.d_in as i64 - a.estimate.d_out as i64
    }
}

/// Expected area revealed when `sigma` timesteps are left for exploring a
/// region of `area` cells whose tour takes `d_in` timesteps: all of it if
/// the tour completes, a proportional share otherwise.
pub fn partial_reward<R: Reward>(area: u64, d_in: u64, sigma: i64) -> R {
    if sigma <= 0 {
        return R::zero();
    }
    let sigma = sigma as u64;
    if d_in == 0 || sigma > d_in {
        return R::from_count(area);
    }
    match area.checked_mul(sigma) {
        Some(n) => R::ratio(n, d_in),
        None => R::from_count(area) * R::ratio(sigma, d_in),
    }
}

/// Value of taking action `i` with `sigma` left and `d` timesteps of travel,
/// when only the actions in `avail` may follow. Returns the value and the
/// best continuation (including `i`).
fn q_rec<R: Reward>(belief: &PlannerBelief, i: usize, d: u64, sigma: i64, avail: &[usize]) -> (R, Vec<usize>) {
    let a = &belief.actions[i];
    let gain: R = partial_reward(a.estimate.area, a.estimate.d_in, sigma - d as i64);
    let rest = sigma - d as i64 - a.estimate.d_in as i64 - a.estimate.d_out as i64;
    let mut best: Option<(R, Vec<usize>)> = None;
    if rest > 0 {
        for (pos, &j) in avail.iter().enumerate() {
            let Some(t) = belief.transfer[i][j] else { continue };
            let mut others = avail.to_vec();
            others.remove(pos);
            let (q, seq) = q_rec::<R>(belief, j, t, rest, &others);
            if best.as_ref().is_none_or(|(b, _)| q > *b) {
                best = Some((q, seq));
            }
        }
    }
    let (tail, mut seq) = best.unwrap_or((R::zero(), Vec::new()));
    seq.insert(0, i);
    (gain + tail, seq)
}

/// Look-ahead value of every action in `considered`, each followed only by
/// other members of `considered`.
fn q_values_over<R: Reward>(belief: &PlannerBelief, considered: &[usize]) -> Vec<(R, Vec<usize>)> {
    considered
        .iter()
        .enumerate()
        .map(|(pos, &i)| {
            let mut others = considered.to_vec();
            others.remove(pos);
            q_rec(belief, i, belief.actions[i].d_k, belief.remaining, &others)
        })
        .collect()
}

/// Look-ahead value of action `i` over all other actions (no pruning).
pub fn q_value<R: Reward>(belief: &PlannerBelief, i: usize) -> R {
    let others: Vec<usize> = (0..belief.actions.len()).filter(|&j| j != i).collect();
    q_rec::<R>(belief, i, belief.actions[i].d_k, belief.remaining, &others).0
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlanResult<R> {
    /// Id of the selected frontier; `None` iff there were no actions.
    pub chosen: Option<usize>,
    /// Frontier id → look-ahead value; empty for the baselines.
    pub q_values: BTreeMap<usize, R>,
    /// Frontier ids of the best visiting sequence starting with `chosen`.
    pub visit_order: Vec<usize>,
}

impl<R> PlanResult<R> {
    fn none() -> Self {
        Self {
            chosen: None,
            q_values: BTreeMap::new(),
            visit_order: Vec::new(),
        }
    }
}

/// Look-ahead selection over the `k` candidates with the largest estimated
/// area. Ties in value go to the action leaving the most budget after its
/// tour, then to the smallest frontier id.
pub fn select_lfe<R: Reward>(belief: &PlannerBelief, k: usize) -> PlanResult<R> {
    let considered = top_k(&belief.actions, k.max(1));
    if considered.is_empty() {
        return PlanResult::none();
    }
    let values = q_values_over::<R>(belief, &considered);
    let mut best = 0;
    for c in 1..considered.len() {
        let (i, b) = (considered[c], considered[best]);
        let better = match values[c].0.partial_cmp(&values[best].0) {
            Some(std::cmp::Ordering::Greater) => true,
            Some(std::cmp::Ordering::Less) | None => false,
            Some(std::cmp::Ordering::Equal) => {
                let (ri, rb) = (belief.residual(i), belief.residual(b));
                ri > rb || (ri == rb && belief.actions[i].frontier.id < belief.actions[b].frontier.id)
            }
        };
        if better {
            best = c;
        }
    }
    let id = |i: usize| belief.actions[i].frontier.id;
    PlanResult {
        chosen: Some(id(considered[best])),
        q_values: considered
            .iter()
            .zip(&values)
            .map(|(&i, (q, _))| (id(i), *q))
            .collect(),
        visit_order: values[best].1.iter().map(|&i| id(i)).collect(),
    }
}

fn single<R>(belief: &PlannerBelief, pick: Option<usize>) -> PlanResult<R> {
    match pick {
        None => PlanResult::none(),
        Some(i) => {
            let id = belief.actions[i].frontier.id;
            PlanResult {
                chosen: Some(id),
                q_values: BTreeMap::new(),
                visit_order: vec![id],
            }
        }
    }
}

/// Closest frontier through known space; ties by smallest id.
pub fn select_nearest<R>(belief: &PlannerBelief) -> PlanResult<R> {
    let pick = (0..belief.actions.len()).min_by_key(|&i| {
        let a = &belief.actions[i];
        (a.d_k, a.frontier.id)
    });
    single(belief, pick)
}

/// Frontier with the largest estimated area; ties by smallest id.
pub fn select_greedy<R>(belief: &PlannerBelief) -> PlanResult<R> {
    let pick = (0..belief.actions.len()).min_by(|&a, &b| by_area(&belief.actions[a], &belief.actions[b]));
    single(belief, pick)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlannerKind {
    #[default]
    Lfe,
    Greedy,
    Nearest,
}

impl PlannerKind {
    pub const ALL: [PlannerKind; 3] = [PlannerKind::Lfe, PlannerKind::Greedy, PlannerKind::Nearest];

    pub fn name(self) -> &'static str {
        match self {
            PlannerKind::Lfe => "lfe",
            PlannerKind::Greedy => "greedy",
            PlannerKind::Nearest => "nearest",
        }
    }

    /// Whether beliefs for this planner need frontier-to-frontier distances.
    pub fn looks_ahead(self) -> bool {
        self == PlannerKind::Lfe
    }

    pub fn select<R: Reward>(self, belief: &PlannerBelief, k: usize) -> PlanResult<R> {
        match self {
            PlannerKind::Lfe => select_lfe(belief, k),
            PlannerKind::Greedy => select_greedy(belief),
            PlannerKind::Nearest => select_nearest(belief),
        }
    }
}

impl fmt::Display for PlannerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PlannerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PlannerKind::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown planner {s:?} (expected lfe, greedy or nearest)"))
    }
}
