//! Frontier extraction: unknown cells bordering free space, grouped by
//! 8-connectivity.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::grid::{free_component, Cell, ObservedMap};
use crate::sensing::AgentState;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Frontier {
    pub id: usize,
    /// Member cells in ascending order.
    pub cells: Vec<Cell>,
    pub centroid: Cell,
}

impl Frontier {
    pub fn contains(&self, c: Cell) -> bool {
        self.cells.binary_search(&c).is_ok()
    }

    /// Free orthogonal neighbours of the centroid.
    pub fn anchors<'a>(&self, observed: &'a ObservedMap) -> impl Iterator<Item = Cell> + 'a {
        free_neighbors4(observed, self.centroid)
    }

    /// The member to approach: the centroid if one of its free orthogonal
    /// neighbours passes `reachable`, otherwise the member nearest the
    /// centroid that has such a neighbour. `None` if no member has one.
    ///
    /// The fallback matters with a narrow field of view, where a frontier
    /// can border both the agent's free space and a patch of free space seen
    /// past it but not yet connected to it.
    pub fn aim(&self, observed: &ObservedMap, reachable: impl Fn(Cell) -> bool) -> Option<Cell> {
        let ok = |c: Cell| free_neighbors4(observed, c).any(&reachable);
        if ok(self.centroid) {
            return Some(self.centroid);
        }
        self.cells
            .iter()
            .copied()
            .filter(|&c| ok(c))
            .min_by_key(|c| (c.dist2(self.centroid), *c))
    }
}

/// Free orthogonal neighbours of `c`: where the agent stands once a frontier
/// aimed at `c` counts as reached.
pub fn free_neighbors4(observed: &ObservedMap, c: Cell) -> impl Iterator<Item = Cell> + '_ {
    c.neighbors4().into_iter().filter(move |n| observed.is_free(*n))
}

/// An unknown cell with at least one free orthogonal neighbour.
pub fn is_frontier_cell(observed: &ObservedMap, c: Cell) -> bool {
    observed.is_unknown(c) && c.neighbors4().iter().any(|n| observed.is_free(*n))
}

/// Partitions all frontier cells into maximal 8-connected groups, ordered by
/// their smallest member; ids follow that order.
pub fn extract_frontiers(observed: &ObservedMap) -> Vec<Frontier> {
    let grid = observed.grid();
    let mask: Vec<bool> = grid.cells().map(|c| is_frontier_cell(observed, c)).collect();
    let mut seen = vec![false; mask.len()];
    let mut groups: Vec<Vec<Cell>> = Vec::new();
    for i in 0..mask.len() {
        if !mask[i] || seen[i] {
            continue;
        }
        seen[i] = true;
        let mut members = Vec::new();
        let mut queue = VecDeque::from([grid.cell_at(i)]);
        while let Some(c) = queue.pop_front() {
            members.push(c);
            for n in c.neighbors8() {
                if grid.in_bounds(n) {
                    let j = grid.index(n);
                    if mask[j] && !seen[j] {
                        seen[j] = true;
                        queue.push_back(n);
                    }
                }
            }
        }
        members.sort_unstable();
        groups.push(members);
    }
    groups.sort_by_key(|g| g[0]);
    groups
        .into_iter()
        .enumerate()
        .map(|(id, cells)| Frontier {
            id,
            centroid: centroid(&cells),
            cells,
        })
        .collect()
}

/// The member nearest the arithmetic mean of `cells`; ties go to the smaller
/// cell. Panics on an empty slice.
pub fn centroid(cells: &[Cell]) -> Cell {
    assert!(!cells.is_empty(), "centroid of an empty frontier");
    let n = cells.len() as i64;
    let (sx, sy) = cells
        .iter()
        .fold((0i64, 0i64), |(ax, ay), c| (ax + c.x as i64, ay + c.y as i64));
    // Compare n^2 * squared distance to keep everything integral.
    let key = |c: &Cell| {
        let dx = n * c.x as i64 - sx;
        let dy = n * c.y as i64 - sy;
        (dx as i128 * dx as i128 + dy as i128 * dy as i128, *c)
    };
    *cells.iter().min_by_key(|c| key(c)).expect("non-empty")
}

/// Keeps frontiers with a member whose free orthogonal neighbour lies in the
/// agent's 4-connected free component. Ids are preserved.
pub fn filter_reachable(
    frontiers: &[Frontier],
    observed: &ObservedMap,
    agent: &AgentState,
) -> Vec<Frontier> {
    let grid = observed.grid();
    let component = free_component(grid, agent.pos);
    frontiers
        .iter()
        .filter(|f| f.aim(observed, |a| component[grid.index(a)]).is_some())
        .cloned()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{CellState, GroundTruthMap};
    use crate::sensing::Heading;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn fully_revealed_has_no_frontiers() {
        let gt = GroundTruthMap::from_rows(&["#####", "#...#", "#####"]).unwrap();
        assert!(extract_frontiers(&ObservedMap::fully_revealed(&gt)).is_empty());
    }

    #[test]
    fn single_free_cell_in_unknown() {
        let obs = ObservedMap::from_rows(&["?????", "?????", "??.??", "?????", "?????"]).unwrap();
        let fs = extract_frontiers(&obs);
        assert_eq!(fs.len(), 1);
        // The four orthogonal neighbours touch diagonally, so they form one group.
        assert_eq!(
            fs[0].cells,
            vec![Cell::new(1, 2), Cell::new(2, 1), Cell::new(2, 3), Cell::new(3, 2)]
        );
        // Mean is the free cell itself; all four are equidistant.
        assert_eq!(fs[0].centroid, Cell::new(1, 2));
    }

    #[test]
    fn two_pockets_give_two_frontiers() {
        let obs = ObservedMap::from_rows(&[
            "?????????",
            "?..#?????",
            "?..#?...?",
            "?###?...?",
            "?????????",
        ])
        .unwrap();
        let fs = extract_frontiers(&obs);
        assert_eq!(fs.len(), 2);
        assert_eq!(fs[0].id, 0);
        assert_eq!(fs[1].id, 1);
        // Left pocket: border cells above and left of the 2x2 free block.
        assert!(fs[0].contains(Cell::new(0, 1)));
        assert!(fs[0].contains(Cell::new(1, 0)));
        assert!(fs.iter().all(|f| f.cells.iter().all(|c| obs.is_unknown(*c))));
    }

    #[test]
    fn centroid_cases() {
        assert_eq!(centroid(&[Cell::new(3, 4)]), Cell::new(3, 4));
        assert_eq!(
            centroid(&[Cell::new(0, 0), Cell::new(1, 0), Cell::new(2, 0)]),
            Cell::new(1, 0)
        );
        let l = [
            Cell::new(0, 0),
            Cell::new(0, 1),
            Cell::new(0, 2),
            Cell::new(1, 2),
            Cell::new(2, 2),
        ];
        let mean = (0.6, 1.4);
        let brute = *l
            .iter()
            .min_by(|a, b| {
                let da = (a.x as f64 - mean.0).powi(2) + (a.y as f64 - mean.1).powi(2);
                let db = (b.x as f64 - mean.0).powi(2) + (b.y as f64 - mean.1).powi(2);
                da.partial_cmp(&db).unwrap().then(a.cmp(b))
            })
            .unwrap();
        assert_eq!(centroid(&l), brute);
    }

    #[test]
    fn filter_drops_sealed_pocket() {
        let obs = ObservedMap::from_rows(&[
            "?????????",
            "?..#?????",
            "?..#?...?",
            "?###?...?",
            "?????????",
        ])
        .unwrap();
        let fs = extract_frontiers(&obs);
        let agent = AgentState::new(Cell::new(1, 1), Heading::E, 10);
        let kept = filter_reachable(&fs, &obs, &agent);
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].id, 0);
    }

    #[test]
    fn aim_falls_back_to_a_reachable_member() {
        // The frontier column x=3 borders the agent's room on the left at
        // rows 1-2 only; its centroid (3, 3) touches just the detached patch.
        let obs = ObservedMap::from_rows(&[
            "#######",
            "#..?..#",
            "#..?..#",
            "###?..#",
            "###?..#",
            "###?..#",
            "#######",
        ])
        .unwrap();
        let fs = extract_frontiers(&obs);
        assert_eq!(fs.len(), 1);
        let f = &fs[0];
        assert_eq!(f.centroid, Cell::new(3, 3));
        let agent = AgentState::new(Cell::new(1, 1), Heading::E, 10);
        let comp = free_component(obs.grid(), agent.pos);
        let aim = f.aim(&obs, |c| comp[obs.grid().index(c)]);
        assert_eq!(aim, Some(Cell::new(3, 2)));
        assert_eq!(filter_reachable(&fs, &obs, &agent).len(), 1);
        assert_eq!(f.aim(&obs, |_| false), None);
        assert_eq!(f.aim(&obs, |_| true), Some(f.centroid));
    }

    #[test]
    fn filter_keeps_frontiers_of_agent_room() {
        let obs = ObservedMap::from_rows(&["?????", "?...?", "?...?", "?????"]).unwrap();
        let fs = extract_frontiers(&obs);
        let agent = AgentState::new(Cell::new(2, 1), Heading::E, 10);
        assert_eq!(filter_reachable(&fs, &obs, &agent), fs);
    }

    fn random_observed(seed: u64, w: i32, h: i32) -> ObservedMap {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut obs = ObservedMap::from_rows(&vec!["?".repeat(w as usize).as_str(); h as usize]).unwrap();
        for y in 0..h {
            for x in 0..w {
                let s = match rng.random_range(0..10) {
                    0..=3 => CellState::Unknown,
                    4..=5 => CellState::Occupied,
                    _ => CellState::Free,
                };
                obs.set(Cell::new(x, y), s);
            }
        }
        obs
    }

    #[test]
    fn filter_matches_flood_fill_oracle() {
        for seed in 0..40 {
            let obs = random_observed(seed, 14, 11);
            let Some(start) = obs.grid().cells().find(|c| obs.is_free(*c)) else {
                continue;
            };
            let agent = AgentState::new(start, Heading::E, 1);
            // Oracle: explicit DFS from the agent.
            let mut comp = std::collections::HashSet::from([start]);
            let mut stack = vec![start];
            while let Some(c) = stack.pop() {
                for n in c.neighbors4() {
                    if obs.is_free(n) && comp.insert(n) {
                        stack.push(n);
                    }
                }
            }
            let fs = extract_frontiers(&obs);
            let expected: Vec<usize> = fs
                .iter()
                .filter(|f| {
                    f.cells
                        .iter()
                        .any(|c| c.neighbors4().iter().any(|n| comp.contains(n)))
                })
                .map(|f| f.id)
                .collect();
            let got: Vec<usize> = filter_reachable(&fs, &obs, &agent).iter().map(|f| f.id).collect();
            assert_eq!(got, expected, "seed {seed}");
        }
    }

    proptest! {
        #[test]
        fn extraction_covers_exactly_frontier_cells(seed in 0u64..1000) {
            let obs = random_observed(seed, 12, 9);
            let fs = extract_frontiers(&obs);
            let mut all: Vec<Cell> = fs.iter().flat_map(|f| f.cells.iter().copied()).collect();
            let n = all.len();
            all.sort();
            all.dedup();
            prop_assert_eq!(all.len(), n, "frontiers overlap");
            let expected: Vec<Cell> = obs.grid().cells().filter(|c| is_frontier_cell(&obs, *c)).collect::<std::collections::BTreeSet<_>>().into_iter().collect();
            prop_assert_eq!(all, expected);
            prop_assert_eq!(extract_frontiers(&obs), fs);
        }
    }
}
