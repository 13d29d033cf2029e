//! Agent motion model and the raycast range sensor.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::SenseError;
use crate::grid::{Cell, CellState, GroundTruthMap, ObservedMap};

pub const DEFAULT_RANGE_CELLS: u32 = 40;

/// One of eight compass headings, counter-clockwise from East.
/// North is towards row 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Heading {
    E,
    NE,
    N,
    NW,
    W,
    SW,
    S,
    SE,
}

impl Heading {
    pub const ALL: [Heading; 8] = [
        Heading::E,
        Heading::NE,
        Heading::N,
        Heading::NW,
        Heading::W,
        Heading::SW,
        Heading::S,
        Heading::SE,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Self {
        Self::ALL[i % 8]
    }

    pub fn left(self) -> Self {
        Self::from_index(self.index() + 1)
    }

    pub fn right(self) -> Self {
        Self::from_index(self.index() + 7)
    }

    pub fn delta(self) -> (i32, i32) {
        match self {
            Heading::E => (1, 0),
            Heading::NE => (1, -1),
            Heading::N => (0, -1),
            Heading::NW => (-1, -1),
            Heading::W => (-1, 0),
            Heading::SW => (-1, 1),
            Heading::S => (0, 1),
            Heading::SE => (1, 1),
        }
    }

    /// Heading whose step is exactly `(dx, dy)`, for unit 8-neighbour steps.
    pub fn from_delta(dx: i32, dy: i32) -> Option<Self> {
        Self::ALL.into_iter().find(|h| h.delta() == (dx, dy))
    }

    /// Signed number of 45° left turns from `self` to `other`, in `-3..=4`.
    pub fn turns_to(self, other: Heading) -> i32 {
        let d = (other.index() as i32 - self.index() as i32).rem_euclid(8);
        if d > 4 {
            d - 8
        } else {
            d
        }
    }
}

impl fmt::Display for Heading {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    Forward,
    TurnLeft,
    TurnRight,
    Stop,
}

impl Action {
    /// Replay-log code.
    pub fn code(self) -> char {
        match self {
            Action::Forward => 'F',
            Action::TurnLeft => 'L',
            Action::TurnRight => 'R',
            Action::Stop => 'S',
        }
    }

    pub fn from_code(c: char) -> Option<Self> {
        match c {
            'F' => Some(Action::Forward),
            'L' => Some(Action::TurnLeft),
            'R' => Some(Action::TurnRight),
            'S' => Some(Action::Stop),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AgentState {
    pub pos: Cell,
    pub heading: Heading,
    pub remaining_budget: u64,
    pub stopped: bool,
}

impl AgentState {
    pub fn new(pos: Cell, heading: Heading, budget: u64) -> Self {
        Self {
            pos,
            heading,
            remaining_budget: budget,
            stopped: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FieldOfView {
    Panoramic,
    Forward90,
}

impl FieldOfView {
    pub fn degrees(self) -> u32 {
        match self {
            FieldOfView::Panoramic => 360,
            FieldOfView::Forward90 => 90,
        }
    }

    pub fn from_degrees(deg: u32) -> Option<Self> {
        match deg {
            360 => Some(FieldOfView::Panoramic),
            90 => Some(FieldOfView::Forward90),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SensorConfig {
    pub fov: FieldOfView,
    pub range_cells: u32,
}

impl Default for SensorConfig {
    fn default() -> Self {
        Self {
            fov: FieldOfView::Panoramic,
            range_cells: DEFAULT_RANGE_CELLS,
        }
    }
}

/// Offset of a target cell relative to the agent, with the cells its
/// supercover ray crosses on the way, the target last.
#[derive(Clone, Debug)]
struct Ray {
    dx: i32,
    dy: i32,
    span: std::ops::Range<usize>,
}

/// One cell along a ray. `joined` marks the first of two cells the ray passes
/// between at a lattice corner; the pair is entered together.
#[derive(Clone, Copy, Debug)]
struct Step {
    dx: i32,
    dy: i32,
    joined: bool,
}

/// Precomputed supercover rays to every offset within range.
#[derive(Clone, Debug)]
pub struct Sensor {
    config: SensorConfig,
    rays: Vec<Ray>,
    steps: Vec<Step>,
}

impl Sensor {
    pub fn new(config: SensorConfig) -> Self {
        let r = config.range_cells.max(1) as i32;
        let mut rays = Vec::new();
        let mut steps = Vec::new();
        for dy in -r..=r {
            for dx in -r..=r {
                if (dx, dy) == (0, 0) || (dx * dx + dy * dy) as i64 > (r as i64) * (r as i64) {
                    continue;
                }
                let start = steps.len();
                supercover(dx, dy, &mut steps);
                rays.push(Ray {
                    dx,
                    dy,
                    span: start..steps.len(),
                });
            }
        }
        Self { config, rays, steps }
    }

    pub fn config(&self) -> SensorConfig {
        self.config
    }

    fn in_view(&self, h: (i32, i32), dx: i32, dy: i32) -> bool {
        let r = self.config.range_cells as i64;
        let v2 = (dx * dx + dy * dy) as i64;
        if v2 > r * r {
            return false;
        }
        if self.config.fov == FieldOfView::Panoramic || v2 == 0 {
            return true;
        }
        let dot = (h.0 * dx + h.1 * dy) as i64;
        let h2 = (h.0 * h.0 + h.1 * h.1) as i64;
        // angle <= 45°  <=>  dot >= 0 and 2 dot^2 >= |h|^2 |v|^2
        dot >= 0 && 2 * dot * dot >= h2 * v2
    }

    /// Cells in range and inside the field of view that some ray reaches:
    /// rays are cast towards every such cell and reveal what they cross up to
    /// and including the first `Occupied` cell. The agent's own cell is
    /// always included.
    pub fn visible_cells(&self, gt: &GroundTruthMap, agent: &AgentState) -> Vec<Cell> {
        let h = agent.heading.delta();
        let r = self.config.range_cells.max(1) as i32;
        let side = (2 * r + 1) as usize;
        let slot = |dx: i32, dy: i32| (dy + r) as usize * side + (dx + r) as usize;
        let mut marked = vec![false; side * side];
        marked[slot(0, 0)] = true;
        let mut out = vec![agent.pos];
        for ray in &self.rays {
            if !gt.in_bounds(agent.pos.offset(ray.dx, ray.dy)) || !self.in_view(h, ray.dx, ray.dy) {
                continue;
            }
            let mut blocked = false;
            for s in &self.steps[ray.span.clone()] {
                let c = agent.pos.offset(s.dx, s.dy);
                let i = slot(s.dx, s.dy);
                if !marked[i] && self.in_view(h, s.dx, s.dy) {
                    marked[i] = true;
                    out.push(c);
                }
                blocked |= gt.get(c) == Some(CellState::Occupied);
                if blocked && !s.joined {
                    break;
                }
            }
        }
        out
    }
}

/// Cells a centre-to-centre segment from the origin cell to the cell at
/// `(dx, dy)` touches, in order, excluding the origin. At exact lattice-corner
/// crossings both side cells are emitted, joined, before the diagonal cell.
fn supercover(dx: i32, dy: i32, out: &mut Vec<Step>) {
    let (nx, ny) = (dx.unsigned_abs() as i64, dy.unsigned_abs() as i64);
    let (sx, sy) = (dx.signum(), dy.signum());
    let (mut x, mut y) = (0i32, 0i32);
    let (mut ix, mut iy) = (0i64, 0i64);
    let step = |dx, dy, joined| Step { dx, dy, joined };
    while ix < nx || iy < ny {
        let decision = (1 + 2 * ix) * ny - (1 + 2 * iy) * nx;
        if decision == 0 {
            out.push(step(x + sx, y, true));
            out.push(step(x, y + sy, false));
            x += sx;
            y += sy;
            ix += 1;
            iy += 1;
        } else if decision < 0 {
            x += sx;
            ix += 1;
        } else {
            y += sy;
            iy += 1;
        }
        out.push(step(x, y, false));
    }
}

/// Convenience wrapper that builds the ray table on every call; episodes hold
/// a [`Sensor`] instead.
pub fn visible_cells(gt: &GroundTruthMap, agent: &AgentState, sensor: &SensorConfig) -> Vec<Cell> {
    Sensor::new(*sensor).visible_cells(gt, agent)
}

/// Writes the ground-truth value of `cells` into `observed`.
pub fn reveal(observed: &mut ObservedMap, gt: &GroundTruthMap, cells: &[Cell]) {
    observed.reveal(gt, cells.iter().copied());
}

/// Forward moves may only enter `Free` cells; a diagonal move additionally
/// needs both orthogonal cells it squeezes past to be `Free`.
pub fn can_step(observed: &ObservedMap, from: Cell, dx: i32, dy: i32) -> bool {
    let to = from.offset(dx, dy);
    if !observed.is_free(to) {
        return false;
    }
    dx == 0 || dy == 0 || (observed.is_free(from.offset(dx, 0)) && observed.is_free(from.offset(0, dy)))
}

pub fn apply_action(
    agent: &AgentState,
    action: Action,
    observed: &ObservedMap,
) -> Result<AgentState, SenseError> {
    if agent.stopped {
        return Err(SenseError::Stopped);
    }
    if agent.remaining_budget == 0 {
        return Err(SenseError::BudgetExhausted);
    }
    let mut next = *agent;
    match action {
        Action::Stop => {
            next.stopped = true;
            return Ok(next);
        }
        Action::TurnLeft => next.heading = agent.heading.left(),
        Action::TurnRight => next.heading = agent.heading.right(),
        Action::Forward => {
            let (dx, dy) = agent.heading.delta();
            if can_step(observed, agent.pos, dx, dy) {
                next.pos = agent.pos.offset(dx, dy);
            }
        }
    }
    next.remaining_budget -= 1;
    Ok(next)
}
