//! Closed tours over the metric closure of a skeleton graph, split into the
//! outbound part (visit every node, stop) and the return leg.

use crate::error::TourError;
use crate::grid::Cell;
use crate::oracle::skeleton::SkeletonGraph;

/// Instances up to this many nodes are solved exactly.
pub const EXACT_LIMIT: usize = 12;

const IMPROVE_EPS: f64 = 1e-12;

/// Tour lengths in cell units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TourCosts {
    pub d_in: f64,
    pub d_out: f64,
}

impl TourCosts {
    pub fn closed(&self) -> f64 {
        self.d_in + self.d_out
    }
}

/// All-pairs shortest path costs between graph nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricClosure {
    n: usize,
    dist: Vec<f64>,
}

impl MetricClosure {
    pub fn of_graph(g: &SkeletonGraph) -> Result<Self, TourError> {
        let n = g.len();
        let mut dist = Vec::with_capacity(n * n);
        for i in 0..n {
            let row = g.distances_from(i);
            if row.iter().any(|d| !d.is_finite()) {
                return Err(TourError::Disconnected);
            }
            dist.extend(row);
        }
        Ok(Self { n, dist })
    }

    /// Wraps an explicit symmetric cost matrix.
    pub fn from_matrix(rows: Vec<Vec<f64>>) -> Self {
        let n = rows.len();
        let dist: Vec<f64> = rows.into_iter().flatten().collect();
        assert_eq!(dist.len(), n * n, "cost matrix must be square");
        Self { n, dist }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn d(&self, a: usize, b: usize) -> f64 {
        self.dist[a * self.n + b]
    }

    /// Length of the closed tour visiting `order` (which starts at the
    /// tour origin) and returning to its first node.
    pub fn cycle_cost(&self, order: &[usize]) -> f64 {
        if order.len() < 2 {
            return 0.0;
        }
        let legs: f64 = order.windows(2).map(|w| self.d(w[0], w[1])).sum();
        legs + self.d(*order.last().unwrap(), order[0])
    }
}

/// Optimal closed tour through every node, by Held–Karp
/// dynamic programming over subsets. Returns the visiting order beginning
/// with `start`.
pub fn held_karp(m: &MetricClosure, start: usize) -> Vec<usize> {
    let n = m.len();
    if n <= 2 {
        let mut order = vec![start];
        order.extend((0..n).filter(|&i| i != start));
        return order;
    }
    let others: Vec<usize> = (0..n).filter(|&i| i != start).collect();
    let k = others.len();
    let full = 1usize << k;
    let mut dp = vec![f64::INFINITY; full * k];
    let mut parent = vec![usize::MAX; full * k];
    for j in 0..k {
        dp[(1 << j) * k + j] = m.d(start, others[j]);
    }
    for mask in 1..full {
        for j in 0..k {
            if mask & (1 << j) == 0 {
                continue;
            }
            let cur = dp[mask * k + j];
            if !cur.is_finite() {
                continue;
            }
            for t in 0..k {
                if mask & (1 << t) != 0 {
                    continue;
                }
                let next = mask | (1 << t);
                let cand = cur + m.d(others[j], others[t]);
                if cand < dp[next * k + t] {
                    dp[next * k + t] = cand;
                    parent[next * k + t] = j;
                }
            }
        }
    }
    let last_mask = full - 1;
    let mut best_j = 0;
    let mut best = f64::INFINITY;
    for j in 0..k {
        let c = dp[last_mask * k + j] + m.d(others[j], start);
        if c < best {
            best = c;
            best_j = j;
        }
    }
    let mut rev = Vec::with_capacity(k);
    let (mut mask, mut j) = (last_mask, best_j);
    while j != usize::MAX {
        rev.push(others[j]);
        let p = parent[mask * k + j];
        mask &= !(1 << j);
        j = p;
    }
    let mut order = vec![start];
    order.extend(rev.into_iter().rev());
    order
}

/// Nearest-neighbour construction followed by 2-opt until no improving
/// reversal remains.
pub fn nearest_neighbor_two_opt(m: &MetricClosure, start: usize) -> Vec<usize> {
    let n = m.len();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut cur = start;
    visited[cur] = true;
    order.push(cur);
    for _ in 1..n {
        let mut best = usize::MAX;
        let mut best_d = f64::INFINITY;
        for j in 0..n {
            if !visited[j] && m.d(cur, j) < best_d {
                best_d = m.d(cur, j);
                best = j;
            }
        }
        visited[best] = true;
        order.push(best);
        cur = best;
    }
    two_opt(m, &mut order);
    order
}

/// In-place 2-opt on a closed tour, keeping `order[0]` fixed.
pub fn two_opt(m: &MetricClosure, order: &mut [usize]) {
    let n = order.len();
    if n < 4 {
        return;
    }
    let mut improved = true;
    while improved {
        improved = false;
        for i in 1..n - 1 {
            for j in i + 1..n {
                let a = order[i - 1];
                let b = order[i];
                let c = order[j];
                let d = order[(j + 1) % n];
                let delta = m.d(a, c) + m.d(b, d) - m.d(a, b) - m.d(c, d);
                if delta < -IMPROVE_EPS {
                    order[i..=j].reverse();
                    improved = true;
                }
            }
        }
    }
}

/// Splits a closed tour into outbound and return legs. Of the two travel
/// directions, the one with the shorter outbound part is used.
pub fn split_cycle(m: &MetricClosure, order: &[usize]) -> TourCosts {
    if order.len() < 2 {
        return TourCosts {
            d_in: 0.0,
            d_out: 0.0,
        };
    }
    let closed = m.cycle_cost(order);
    let start = order[0];
    let back_fwd = m.d(*order.last().unwrap(), start);
    let back_rev = m.d(order[1], start);
    let back = if back_rev > back_fwd { back_rev } else { back_fwd };
    TourCosts {
        d_in: closed - back,
        d_out: back,
    }
}

/// A closed tour as its node sequence and the cost of each leg;
/// `legs[i]` runs from `nodes[i]` to `nodes[(i + 1) % n]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ClosedTour {
    pub nodes: Vec<Cell>,
    pub legs: Vec<f64>,
}

impl ClosedTour {
    fn from_order(g: &SkeletonGraph, m: &MetricClosure, order: &[usize]) -> Self {
        let n = order.len();
        let legs = if n < 2 {
            vec![0.0; n]
        } else {
            (0..n).map(|i| m.d(order[i], order[(i + 1) % n])).collect()
        };
        Self {
            nodes: order.iter().map(|&i| g.nodes()[i]).collect(),
            legs,
        }
    }

    pub fn cost(&self) -> f64 {
        self.legs.iter().sum()
    }

    /// Splits the tour where it passes `start`: the leg back into `start` is
    /// the return, and of the two travel directions the one with the longer
    /// return (so the shorter outbound part) is used.
    pub fn split_at(&self, start: Cell) -> Option<TourCosts> {
        let p = self.nodes.iter().position(|c| *c == start)?;
        let n = self.nodes.len();
        if n < 2 {
            return Some(TourCosts {
                d_in: 0.0,
                d_out: 0.0,
            });
        }
        let closed = self.cost();
        let into = self.legs[(p + n - 1) % n];
        let out_of = self.legs[p];
        let back = if out_of > into { out_of } else { into };
        Some(TourCosts {
            d_in: closed - back,
            d_out: back,
        })
    }
}

/// Closed tour over every node of `g` beginning at `start`: exact for up
/// to [`EXACT_LIMIT`] nodes, nearest-neighbour + 2-opt beyond.
pub fn closed_tour(g: &SkeletonGraph, start: Cell) -> Result<ClosedTour, TourError> {
    if g.is_empty() {
        return Err(TourError::Empty);
    }
    let s = g.node_index(start).ok_or(TourError::StartNotNode(start))?;
    let m = MetricClosure::of_graph(g)?;
    Ok(ClosedTour::from_order(g, &m, &solve(&m, s)))
}

fn solve(m: &MetricClosure, start: usize) -> Vec<usize> {
    if m.len() <= EXACT_LIMIT {
        held_karp(m, start)
    } else {
        nearest_neighbor_two_opt(m, start)
    }
}

/// Outbound and return legs of a tour from `start` over every node of `g`.
pub fn tour_costs(g: &SkeletonGraph, start: Cell) -> Result<TourCosts, TourError> {
    Ok(closed_tour(g, start)?.split_at(start).expect("tour passes its start"))
}

pub fn tour_on_closure(m: &MetricClosure, start: usize) -> TourCosts {
    split_cycle(m, &solve(m, start))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_node() {
        let g = SkeletonGraph::from_cells([Cell::new(2, 2)]);
        let t = tour_costs(&g, Cell::new(2, 2)).unwrap();
        assert_eq!(t, TourCosts { d_in: 0.0, d_out: 0.0 });
    }

    #[test]
    fn forced_path() {
        let g = SkeletonGraph::from_cells([Cell::new(0, 0), Cell::new(1, 0), Cell::new(2, 0)]);
        let t = tour_costs(&g, Cell::new(0, 0)).unwrap();
        assert_eq!(t, TourCosts { d_in: 2.0, d_out: 2.0 });
    }

    #[test]
    fn errors() {
        let g = SkeletonGraph::from_cells([Cell::new(0, 0), Cell::new(5, 0)]);
        assert_eq!(tour_costs(&g, Cell::new(0, 0)), Err(TourError::Disconnected));
        assert_eq!(
            tour_costs(&g, Cell::new(1, 0)),
            Err(TourError::StartNotNode(Cell::new(1, 0)))
        );
        let empty = SkeletonGraph::from_cells([]);
        assert_eq!(tour_costs(&empty, Cell::new(0, 0)), Err(TourError::Empty));
    }

    #[test]
    fn two_opt_untangles_crossing() {
        // Unit square visited in crossing order 0-2-1-3.
        let s = std::f64::consts::SQRT_2;
        let m = MetricClosure::from_matrix(vec![
            vec![0.0, 1.0, s, 1.0],
            vec![1.0, 0.0, 1.0, s],
            vec![s, 1.0, 0.0, 1.0],
            vec![1.0, s, 1.0, 0.0],
        ]);
        let mut order = vec![0, 2, 1, 3];
        two_opt(&m, &mut order);
        assert!((m.cycle_cost(&order) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn long_corridor_uses_heuristic() {
        let g = SkeletonGraph::from_cells((0..30).map(|x| Cell::new(x, 0)));
        let t = tour_costs(&g, Cell::new(0, 0)).unwrap();
        assert_eq!(t.d_in, 29.0);
        assert_eq!(t.d_out, 29.0);
    }

    #[test]
    fn split_anywhere_on_the_cycle() {
        // A path with a two-cell spur.
        let g = SkeletonGraph::from_cells([
            Cell::new(0, 0),
            Cell::new(1, 0),
            Cell::new(2, 0),
            Cell::new(3, 0),
            Cell::new(1, 2),
            Cell::new(1, 1),
        ]);
        let tour = closed_tour(&g, Cell::new(0, 0)).unwrap();
        for &c in g.nodes() {
            let t = tour.split_at(c).unwrap();
            assert!((t.closed() - tour.cost()).abs() < 1e-9);
            let fresh = tour_costs(&g, c).unwrap();
            assert!((fresh.closed() - t.closed()).abs() < 1e-9);
        }
        assert_eq!(tour.split_at(Cell::new(9, 9)), None);
    }
}
