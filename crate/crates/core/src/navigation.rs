//! Point-to-point motion over the known free space: A* paths and the
//! primitive action that follows them.

use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::NavError;
use crate::grid::{Cell, ObservedMap};
use crate::search::{HeapEntry, SQRT_2, STEPS};
use crate::sensing::{can_step, Action, AgentState, Heading};

/// Cells from the start to the goal; consecutive cells are 8-adjacent and
/// every step obeys the motion model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub cells: Vec<Cell>,
    pub cost: f64,
}

impl Path {
    pub fn start(&self) -> Cell {
        self.cells[0]
    }

    pub fn goal(&self) -> Cell {
        *self.cells.last().expect("paths are non-empty")
    }

    /// The cell after the start, if any.
    pub fn next(&self) -> Option<Cell> {
        self.cells.get(1).copied()
    }
}

/// Admissible and consistent for unit / √2 step costs.
fn octile(a: Cell, b: Cell) -> f64 {
    let dx = (a.x - b.x).abs();
    let dy = (a.y - b.y).abs();
    let (lo, hi) = if dx < dy { (dx, dy) } else { (dy, dx) };
    (hi - lo) as f64 + SQRT_2 * lo as f64
}

/// Minimum-cost path from `from` to `goal` over observed free cells.
pub fn plan_path(observed: &ObservedMap, from: Cell, goal: Cell) -> Result<Path, NavError> {
    let unreachable = NavError::Unreachable { from, goal };
    if !observed.is_free(from) || !observed.is_free(goal) {
        return Err(unreachable);
    }
    let grid = observed.grid();
    let mut g = vec![f64::INFINITY; grid.len()];
    let mut parent = vec![usize::MAX; grid.len()];
    let mut closed = vec![false; grid.len()];
    let (s, t) = (grid.index(from), grid.index(goal));
    g[s] = 0.0;
    let mut open = BinaryHeap::from([HeapEntry {
        cost: octile(from, goal),
        index: s,
    }]);
    while let Some(HeapEntry { index, .. }) = open.pop() {
        if closed[index] {
            continue;
        }
        closed[index] = true;
        if index == t {
            break;
        }
        let c = grid.cell_at(index);
        for (dx, dy, w) in STEPS {
            if !can_step(observed, c, dx, dy) {
                continue;
            }
            let n = c.offset(dx, dy);
            let j = grid.index(n);
            let ng = g[index] + w;
            if ng < g[j] {
                g[j] = ng;
                parent[j] = index;
                open.push(HeapEntry {
                    cost: ng + octile(n, goal),
                    index: j,
                });
            }
        }
    }
    if !g[t].is_finite() {
        return Err(unreachable);
    }
    let mut cells = vec![goal];
    let mut i = t;
    while i != s {
        i = parent[i];
        cells.push(grid.cell_at(i));
    }
    cells.reverse();
    Ok(Path { cells, cost: g[t] })
}

/// The primitive that best advances toward `target`, a cell 8-adjacent to the
/// agent: Forward when already facing it, otherwise one turn in the shorter
/// direction (left on a half turn).
pub fn step_toward(agent: &AgentState, target: Cell) -> Action {
    let desired = Heading::from_delta(target.x - agent.pos.x, target.y - agent.pos.y)
        .expect("target must be 8-adjacent to the agent");
    match agent.heading.turns_to(desired) {
        0 => Action::Forward,
        t if t > 0 => Action::TurnLeft,
        _ => Action::TurnRight,
    }
}

/// Next primitive along `path`, which must start at the agent. A path that
/// has already arrived yields `Stop`.
pub fn next_primitive(agent: &AgentState, path: &Path) -> Action {
    debug_assert_eq!(path.start(), agent.pos);
    match path.next() {
        Some(next) => step_toward(agent, next),
        None => Action::Stop,
    }
}
