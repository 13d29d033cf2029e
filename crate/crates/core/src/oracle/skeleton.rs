//! Zhang–Suen thinning of free-space masks and the graph over the result.

use std::collections::{BinaryHeap, HashMap, VecDeque};

use crate::grid::{Cell, CellState, Grid};
use crate::search::{HeapEntry, SQRT_2};

/// Binary raster; cells outside the bounds read as unset.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(Cell) -> bool) -> Self {
        let mut m = Self::new(width, height);
        for y in 0..height {
            for x in 0..width {
                let c = Cell::new(x as i32, y as i32);
                m.bits[y * width + x] = f(c);
            }
        }
        m
    }

    /// Cells of `grid` equal to `state`.
    pub fn of_state(grid: &Grid, state: CellState) -> Self {
        Self::from_fn(grid.width(), grid.height(), |c| grid.is(c, state))
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, c: Cell) -> bool {
        c.x >= 0
            && c.y >= 0
            && (c.x as usize) < self.width
            && (c.y as usize) < self.height
            && self.bits[c.y as usize * self.width + c.x as usize]
    }

    pub fn set(&mut self, c: Cell, v: bool) {
        let i = c.y as usize * self.width + c.x as usize;
        self.bits[i] = v;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        let w = self.width;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, b)| **b)
            .map(move |(i, _)| Cell::new((i % w) as i32, (i / w) as i32))
    }

    /// Number of 8-connected components of set cells.
    pub fn components8(&self) -> usize {
        let mut seen = vec![false; self.bits.len()];
        let mut count = 0;
        for start in self.cells() {
            let si = start.y as usize * self.width + start.x as usize;
            if seen[si] {
                continue;
            }
            count += 1;
            seen[si] = true;
            let mut queue = VecDeque::from([start]);
            while let Some(c) = queue.pop_front() {
                for n in c.neighbors8() {
                    if self.get(n) {
                        let ni = n.y as usize * self.width + n.x as usize;
                        if !seen[ni] {
                            seen[ni] = true;
                            queue.push_back(n);
                        }
                    }
                }
            }
        }
        count
    }
}

/// Neighbours P2..P9 in the usual clockwise order starting north.
const RING: [(i32, i32); 8] = [
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
];

fn ring(mask: &BinaryMask, c: Cell) -> [bool; 8] {
    RING.map(|(dx, dy)| mask.get(c.offset(dx, dy)))
}

/// (B, A): number of set neighbours, and number of unset→set transitions
/// around the ring.
fn counts(p: &[bool; 8]) -> (u32, u32) {
    let b = p.iter().filter(|v| **v).count() as u32;
    let a = (0..8).filter(|&i| !p[i] && p[(i + 1) % 8]).count() as u32;
    (b, a)
}

fn removable(p: &[bool; 8]) -> bool {
    let (b, a) = counts(p);
    (2..=6).contains(&b) && a == 1
}

/// Zhang–Suen thinning.
///
/// Each sub-iteration marks candidates against the current image as in the
/// classic parallel scheme, then deletes them in raster order, re-checking
/// the connectivity condition (2 ≤ B ≤ 6, A = 1) against the partially
/// thinned image before each deletion. A pixel passing that check is simple,
/// so the 8-connected component count never changes; the plain parallel
/// scheme would erase 2x2 blocks and two-pixel diagonal lines outright.
pub fn thin(mask: &BinaryMask) -> BinaryMask {
    let mut img = mask.clone();
    loop {
        let mut changed = false;
        for pass in 0..2 {
            let candidates: Vec<Cell> = img
                .cells()
                .filter(|&c| {
                    let p = ring(&img, c);
                    if !removable(&p) {
                        return false;
                    }
                    // p[0]=P2 (N), p[2]=P4 (E), p[4]=P6 (S), p[6]=P8 (W)
                    if pass == 0 {
                        !(p[0] && p[2] && p[4]) && !(p[2] && p[4] && p[6])
                    } else {
                        !(p[0] && p[2] && p[6]) && !(p[0] && p[4] && p[6])
                    }
                })
                .collect();
            for c in candidates {
                if removable(&ring(&img, c)) {
                    img.set(c, false);
                    changed = true;
                }
            }
        }
        if !changed {
            return img;
        }
    }
}

/// Graph over skeleton cells; 8-adjacent cells are joined by edges of
/// length 1 or √2.
#[derive(Clone, Debug, PartialEq)]
pub struct SkeletonGraph {
    nodes: Vec<Cell>,
    index: HashMap<Cell, usize>,
    adjacency: Vec<Vec<(usize, f64)>>,
}

impl SkeletonGraph {
    pub fn from_cells<I: IntoIterator<Item = Cell>>(cells: I) -> Self {
        let mut nodes: Vec<Cell> = cells.into_iter().collect();
        nodes.sort_unstable();
        nodes.dedup();
        let index: HashMap<Cell, usize> = nodes.iter().enumerate().map(|(i, c)| (*c, i)).collect();
        let adjacency = nodes
            .iter()
            .map(|c| {
                c.neighbors8()
                    .into_iter()
                    .filter_map(|n| {
                        index.get(&n).map(|&j| {
                            let w = if n.x != c.x && n.y != c.y { SQRT_2 } else { 1.0 };
                            (j, w)
                        })
                    })
                    .collect()
            })
            .collect();
        Self {
            nodes,
            index,
            adjacency,
        }
    }

    pub fn nodes(&self) -> &[Cell] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node_index(&self, c: Cell) -> Option<usize> {
        self.index.get(&c).copied()
    }

    pub fn contains(&self, c: Cell) -> bool {
        self.index.contains_key(&c)
    }

    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.adjacency[i]
    }

    /// Edges as `(a, b, weight)` with `a < b`.
    pub fn edges(&self) -> impl Iterator<Item = (Cell, Cell, f64)> + '_ {
        self.adjacency.iter().enumerate().flat_map(move |(i, adj)| {
            adj.iter()
                .filter(move |(j, _)| i < *j)
                .map(move |(j, w)| (self.nodes[i], self.nodes[*j], *w))
        })
    }

    /// Shortest-path costs from node `source` to every node.
    pub fn distances_from(&self, source: usize) -> Vec<f64> {
        self.dijkstra(&[source]).0
    }

    /// Multi-source Dijkstra; returns costs and predecessor links.
    pub(crate) fn dijkstra(&self, sources: &[usize]) -> (Vec<f64>, Vec<Option<usize>>) {
        let mut dist = vec![f64::INFINITY; self.nodes.len()];
        let mut prev = vec![None; self.nodes.len()];
        let mut heap = BinaryHeap::new();
        for &s in sources {
            dist[s] = 0.0;
            heap.push(HeapEntry { cost: 0.0, index: s });
        }
        while let Some(HeapEntry { cost, index }) = heap.pop() {
            if cost > dist[index] {
                continue;
            }
            for &(j, w) in &self.adjacency[index] {
                let nc = cost + w;
                if nc < dist[j] {
                    dist[j] = nc;
                    prev[j] = Some(index);
                    heap.push(HeapEntry { cost: nc, index: j });
                }
            }
        }
        (dist, prev)
    }

    /// Node indices grouped into connected components, each sorted.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut label = vec![usize::MAX; self.nodes.len()];
        let mut out = Vec::new();
        for s in 0..self.nodes.len() {
            if label[s] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut members = vec![s];
            label[s] = id;
            let mut k = 0;
            while k < members.len() {
                let c = members[k];
                k += 1;
                for &(j, _) in &self.adjacency[c] {
                    if label[j] == usize::MAX {
                        label[j] = id;
                        members.push(j);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }
}

/// Thins `free_mask` and returns the skeleton as a graph.
pub fn skeletonize(free_mask: &BinaryMask) -> SkeletonGraph {
    SkeletonGraph::from_cells(thin(free_mask).cells())
}
