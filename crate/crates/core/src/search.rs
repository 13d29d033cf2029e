//! Shortest paths over the known free space.
//!
//! Moves are 8-connected with unit / √2 costs and never cut a corner: a
//! diagonal step needs both orthogonal cells it passes between to be free,
//! the same rule the motion model applies.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::grid::{Cell, ObservedMap};
use crate::sensing::can_step;

pub const SQRT_2: f64 = std::f64::consts::SQRT_2;

pub(crate) const STEPS: [(i32, i32, f64); 8] = [
    (1, 0, 1.0),
    (0, 1, 1.0),
    (-1, 0, 1.0),
    (0, -1, 1.0),
    (1, 1, SQRT_2),
    (-1, 1, SQRT_2),
    (-1, -1, SQRT_2),
    (1, -1, SQRT_2),
];

/// Slack used when rounding geometric costs up to whole timesteps, so that
/// e.g. `10 * 1.7` is 17 and not 18.
const ROUND_SLACK: f64 = 1e-9;

/// Converts a geometric cost in cells to timesteps: `ceil(cost * ratio)`.
pub fn to_timesteps(cost: f64, ratio: f64) -> u64 {
    let t = (cost * ratio - ROUND_SLACK).ceil();
    if t <= 0.0 {
        0
    } else {
        t as u64
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct HeapEntry {
    pub cost: f64,
    pub index: usize,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap on cost, then on index for determinism.
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.index.cmp(&self.index))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Single-source shortest path costs over the free cells of an observed map.
#[derive(Clone, Debug)]
pub struct DistanceField {
    width: usize,
    height: usize,
    dist: Vec<f64>,
}

impl DistanceField {
    pub fn from_source(observed: &ObservedMap, source: Cell) -> Self {
        let grid = observed.grid();
        let mut dist = vec![f64::INFINITY; grid.len()];
        if observed.is_free(source) {
            let mut heap = BinaryHeap::new();
            let s = grid.index(source);
            dist[s] = 0.0;
            heap.push(HeapEntry { cost: 0.0, index: s });
            while let Some(HeapEntry { cost, index }) = heap.pop() {
                if cost > dist[index] {
                    continue;
                }
                let c = grid.cell_at(index);
                for (dx, dy, w) in STEPS {
                    if !can_step(observed, c, dx, dy) {
                        continue;
                    }
                    let j = grid.index(c.offset(dx, dy));
                    let nc = cost + w;
                    if nc < dist[j] {
                        dist[j] = nc;
                        heap.push(HeapEntry { cost: nc, index: j });
                    }
                }
            }
        }
        Self {
            width: grid.width(),
            height: grid.height(),
            dist,
        }
    }

    /// Cost to `c`, or `None` if unreachable or out of bounds.
    pub fn get(&self, c: Cell) -> Option<f64> {
        if c.x < 0 || c.y < 0 || c.x as usize >= self.width || c.y as usize >= self.height {
            return None;
        }
        let d = self.dist[c.y as usize * self.width + c.x as usize];
        d.is_finite().then_some(d)
    }

    /// Cheapest of `cells`; ties go to the smaller cell.
    pub fn nearest<I: IntoIterator<Item = Cell>>(&self, cells: I) -> Option<(Cell, f64)> {
        cells
            .into_iter()
            .filter_map(|c| self.get(c).map(|d| (c, d)))
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
    }
}
