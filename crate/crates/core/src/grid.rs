//! Occupancy grids, the map text format, procedural environments and the
//! coverage metric.

use std::collections::VecDeque;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{GenerateError, GridError, ParseError};

/// Default side length of one cell in meters.
pub const DEFAULT_CELL_SIZE: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[repr(u8)]
pub enum CellState {
    Unknown = 0,
    Occupied = 1,
    Free = 2,
}

impl CellState {
    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(CellState::Unknown),
            1 => Some(CellState::Occupied),
            2 => Some(CellState::Free),
            _ => None,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            CellState::Unknown => '?',
            CellState::Occupied => '#',
            CellState::Free => '.',
        }
    }

    fn from_symbol(c: char) -> Option<Self> {
        match c {
            '?' => Some(CellState::Unknown),
            '#' => Some(CellState::Occupied),
            '.' => Some(CellState::Free),
            _ => None,
        }
    }
}

/// Grid coordinate: `x` is the column, `y` the row (row 0 at the top).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub x: i32,
    pub y: i32,
}

impl Cell {
    pub const fn new(x: i32, y: i32) -> Self {
        Self { x, y }
    }

    pub fn offset(self, dx: i32, dy: i32) -> Self {
        Self::new(self.x + dx, self.y + dy)
    }

    pub fn neighbors4(self) -> [Cell; 4] {
        [
            self.offset(1, 0),
            self.offset(0, 1),
            self.offset(-1, 0),
            self.offset(0, -1),
        ]
    }

    pub fn neighbors8(self) -> [Cell; 8] {
        [
            self.offset(1, 0),
            self.offset(1, 1),
            self.offset(0, 1),
            self.offset(-1, 1),
            self.offset(-1, 0),
            self.offset(-1, -1),
            self.offset(0, -1),
            self.offset(1, -1),
        ]
    }

    pub fn dist2(self, other: Cell) -> i64 {
        let dx = (self.x - other.x) as i64;
        let dy = (self.y - other.y) as i64;
        dx * dx + dy * dy
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Row-major raster of cell states. Shared storage behind both map kinds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    width: usize,
    height: usize,
    cell_size: f64,
    cells: Vec<CellState>,
}

impl Grid {
    fn filled(width: usize, height: usize, cell_size: f64, state: CellState) -> Self {
        Self {
            width,
            height,
            cell_size,
            cells: vec![state; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn in_bounds(&self, c: Cell) -> bool {
        c.x >= 0 && c.y >= 0 && (c.x as usize) < self.width && (c.y as usize) < self.height
    }

    #[inline]
    pub fn index(&self, c: Cell) -> usize {
        c.y as usize * self.width + c.x as usize
    }

    #[inline]
    pub fn cell_at(&self, index: usize) -> Cell {
        Cell::new((index % self.width) as i32, (index / self.width) as i32)
    }

    /// State at `c`; out-of-bounds cells read as `None`.
    #[inline]
    pub fn get(&self, c: Cell) -> Option<CellState> {
        if self.in_bounds(c) {
            Some(self.cells[self.index(c)])
        } else {
            None
        }
    }

    #[inline]
    pub fn is(&self, c: Cell, state: CellState) -> bool {
        self.get(c) == Some(state)
    }

    #[inline]
    pub fn is_free(&self, c: Cell) -> bool {
        self.is(c, CellState::Free)
    }

    pub fn states(&self) -> &[CellState] {
        &self.cells
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.cells.len()).map(move |i| self.cell_at(i))
    }

    fn set(&mut self, c: Cell, state: CellState) {
        let i = self.index(c);
        self.cells[i] = state;
    }

    fn write_text(&self, out: &mut String) {
        use fmt::Write;
        let _ = writeln!(out, "{} {} {}", self.width, self.height, self.cell_size);
        for row in self.cells.chunks(self.width) {
            out.extend(row.iter().map(|s| s.symbol()));
            out.push('\n');
        }
    }

    fn parse(text: &str, allow_unknown: bool) -> Result<Self, ParseError> {
        let mut lines = text.split('\n').enumerate();
        let (_, header) = lines.next().ok_or(ParseError::MissingHeader)?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(ParseError::Header(format!(
                "expected `W H cell_size_m`, got {:?}",
                header
            )));
        }
        let width: usize = fields[0]
            .parse()
            .map_err(|_| ParseError::Header(format!("bad width {:?}", fields[0])))?;
        let height: usize = fields[1]
            .parse()
            .map_err(|_| ParseError::Header(format!("bad height {:?}", fields[1])))?;
        let cell_size: f64 = fields[2]
            .parse()
            .map_err(|_| ParseError::Header(format!("bad cell size {:?}", fields[2])))?;
        if !(cell_size.is_finite() && cell_size > 0.0) {
            return Err(ParseError::Header(format!("bad cell size {:?}", fields[2])));
        }

        let mut cells = Vec::with_capacity(width * height);
        let mut rows = 0usize;
        for (line_no, line) in lines {
            if line.is_empty() {
                // trailing newline
                continue;
            }
            if rows == height {
                return Err(ParseError::ExtraRow { line: line_no + 1 });
            }
            let mut len = 0usize;
            for (col, ch) in line.chars().enumerate() {
                let state = CellState::from_symbol(ch)
                    .filter(|s| allow_unknown || *s != CellState::Unknown)
                    .ok_or(ParseError::IllegalChar {
                        line: line_no + 1,
                        column: col + 1,
                        ch,
                    })?;
                cells.push(state);
                len += 1;
            }
            if len != width {
                return Err(ParseError::RaggedRow {
                    line: line_no + 1,
                    expected: width,
                    found: len,
                });
            }
            rows += 1;
        }
        if rows == 0 {
            return Err(ParseError::ZeroRows);
        }
        if width == 0 || height == 0 {
            return Err(ParseError::Header("width and height must be positive".into()));
        }
        if rows != height {
            return Err(ParseError::RowCount {
                expected: height,
                found: rows,
            });
        }
        Ok(Self {
            width,
            height,
            cell_size,
            cells,
        })
    }
}

/// Fully known environment: every cell is `Occupied` or `Free`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthMap {
    grid: Grid,
}

impl GroundTruthMap {
    /// Builds a map from row-major states. Rejects `Unknown` entries.
    pub fn from_cells(
        width: usize,
        height: usize,
        cell_size: f64,
        cells: Vec<CellState>,
    ) -> Result<Self, GridError> {
        if width == 0 || height == 0 || cells.len() != width * height {
            return Err(GridError::Shape {
                width,
                height,
                len: cells.len(),
            });
        }
        if let Some(i) = cells.iter().position(|s| *s == CellState::Unknown) {
            return Err(GridError::UnknownInGroundTruth(Cell::new(
                (i % width) as i32,
                (i / width) as i32,
            )));
        }
        Ok(Self {
            grid: Grid {
                width,
                height,
                cell_size,
                cells,
            },
        })
    }

    /// Parses rows of `#` and `.`; convenient for fixtures.
    pub fn from_rows(rows: &[&str]) -> Result<Self, ParseError> {
        let width = rows.first().map_or(0, |r| r.chars().count());
        let mut text = format!("{} {} {}\n", width, rows.len(), DEFAULT_CELL_SIZE);
        for r in rows {
            text.push_str(r);
            text.push('\n');
        }
        load_map(&text)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn width(&self) -> usize {
        self.grid.width
    }

    pub fn height(&self) -> usize {
        self.grid.height
    }

    pub fn get(&self, c: Cell) -> Option<CellState> {
        self.grid.get(c)
    }

    pub fn is_free(&self, c: Cell) -> bool {
        self.grid.is_free(c)
    }

    pub fn in_bounds(&self, c: Cell) -> bool {
        self.grid.in_bounds(c)
    }

    pub fn free_cells(&self) -> impl Iterator<Item = Cell> + '_ {
        self.grid.cells().filter(|c| self.grid.is_free(*c))
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        self.grid.write_text(&mut s);
        s
    }
}

/// Parses the text map format into a ground-truth map (`?` is rejected).
pub fn load_map(text: &str) -> Result<GroundTruthMap, ParseError> {
    Ok(GroundTruthMap {
        grid: Grid::parse(text, false)?,
    })
}

/// The agent's belief about the environment. Cells only ever go from
/// `Unknown` to the ground-truth value.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservedMap {
    grid: Grid,
}

impl ObservedMap {
    pub fn unknown_like(gt: &GroundTruthMap) -> Self {
        Self {
            grid: Grid::filled(gt.width(), gt.height(), gt.grid.cell_size, CellState::Unknown),
        }
    }

    /// Snapshot of the ground truth with every cell already revealed.
    pub fn fully_revealed(gt: &GroundTruthMap) -> Self {
        Self {
            grid: gt.grid.clone(),
        }
    }

    /// Parses an observed-map snapshot (`?` allowed).
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        Ok(Self {
            grid: Grid::parse(text, true)?,
        })
    }

    pub fn from_rows(rows: &[&str]) -> Result<Self, ParseError> {
        let width = rows.first().map_or(0, |r| r.chars().count());
        let mut text = format!("{} {} {}\n", width, rows.len(), DEFAULT_CELL_SIZE);
        for r in rows {
            text.push_str(r);
            text.push('\n');
        }
        Self::parse(&text)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn width(&self) -> usize {
        self.grid.width
    }

    pub fn height(&self) -> usize {
        self.grid.height
    }

    pub fn get(&self, c: Cell) -> Option<CellState> {
        self.grid.get(c)
    }

    pub fn is_free(&self, c: Cell) -> bool {
        self.grid.is_free(c)
    }

    pub fn is_unknown(&self, c: Cell) -> bool {
        self.grid.is(c, CellState::Unknown)
    }

    pub fn in_bounds(&self, c: Cell) -> bool {
        self.grid.in_bounds(c)
    }

    /// Copies the ground-truth value of each in-bounds cell into the map.
    /// Returns how many cells changed from `Unknown`.
    pub fn reveal<I>(&mut self, gt: &GroundTruthMap, cells: I) -> usize
    where
        I: IntoIterator<Item = Cell>,
    {
        let mut changed = 0;
        for c in cells {
            if let Some(truth) = gt.get(c) {
                let i = self.grid.index(c);
                if self.grid.cells[i] == CellState::Unknown {
                    changed += 1;
                }
                self.grid.cells[i] = truth;
            }
        }
        changed
    }

    /// Every known cell agrees with `gt`.
    pub fn is_consistent_with(&self, gt: &GroundTruthMap) -> bool {
        self.grid.width == gt.width()
            && self.grid.height == gt.height()
            && self
                .grid
                .cells
                .iter()
                .zip(&gt.grid.cells)
                .all(|(o, t)| *o == CellState::Unknown || o == t)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        self.grid.write_text(&mut s);
        s
    }

    #[cfg(test)]
    pub(crate) fn set(&mut self, c: Cell, state: CellState) {
        self.grid.set(c, state);
    }
}

/// 4-connected component of `Free` cells containing `start` in any grid.
pub(crate) fn free_component(grid: &Grid, start: Cell) -> Vec<bool> {
    let mut seen = vec![false; grid.len()];
    if !grid.is_free(start) {
        return seen;
    }
    let mut queue = VecDeque::from([start]);
    seen[grid.index(start)] = true;
    while let Some(c) = queue.pop_front() {
        for n in c.neighbors4() {
            if grid.is_free(n) && !seen[grid.index(n)] {
                seen[grid.index(n)] = true;
                queue.push_back(n);
            }
        }
    }
    seen
}

/// The reachable free space from `start` as a boolean mask over the grid.
#[derive(Clone, Debug)]
pub struct ReachableSet {
    mask: Vec<bool>,
    width: usize,
    count: usize,
}

impl ReachableSet {
    pub fn contains(&self, c: Cell) -> bool {
        c.x >= 0
            && c.y >= 0
            && (c.x as usize) < self.width
            && self
                .mask
                .get(c.y as usize * self.width + c.x as usize)
                .copied()
                .unwrap_or(false)
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = Cell> + '_ {
        let w = self.width;
        self.mask
            .iter()
            .enumerate()
            .filter(|(_, m)| **m)
            .map(move |(i, _)| Cell::new((i % w) as i32, (i / w) as i32))
    }
}

pub fn reachable_free_cells(gt: &GroundTruthMap, start: Cell) -> Result<ReachableSet, GridError> {
    if !gt.is_free(start) {
        return Err(GridError::StartNotFree(start));
    }
    let mask = free_component(&gt.grid, start);
    let count = mask.iter().filter(|m| **m).count();
    Ok(ReachableSet {
        mask,
        width: gt.width(),
        count,
    })
}

/// Fraction of the reachable free space that is no longer `Unknown`.
pub fn coverage(observed: &ObservedMap, gt: &GroundTruthMap, start: Cell) -> Result<f64, GridError> {
    let reachable = reachable_free_cells(gt, start)?;
    coverage_of(observed, &reachable)
}

pub fn coverage_of(observed: &ObservedMap, reachable: &ReachableSet) -> Result<f64, GridError> {
    if reachable.is_empty() {
        return Err(GridError::EmptyReachable);
    }
    let seen = reachable
        .iter()
        .filter(|c| !observed.is_unknown(*c))
        .count();
    Ok(seen as f64 / reachable.len() as f64)
}

/// Parameters of the rooms-and-corridors generator.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(default)]
pub struct GenParams {
    pub width: usize,
    pub height: usize,
    /// Inclusive range of the number of rooms to aim for.
    pub room_count_range: (usize, usize),
    pub corridor_width: usize,
    pub min_room_size: usize,
}

impl Default for GenParams {
    fn default() -> Self {
        Self {
            width: 80,
            height: 80,
            room_count_range: (5, 9),
            corridor_width: 2,
            min_room_size: 6,
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Rect {
    x: usize,
    y: usize,
    w: usize,
    h: usize,
}

impl Rect {
    fn center(&self) -> (usize, usize) {
        (self.x + self.w / 2, self.y + self.h / 2)
    }
}

/// Generates a rooms-and-corridors environment by binary space partitioning.
///
/// The interior (everything inside the one-cell border) is split into leaves,
/// a room is carved inside each leaf and sibling subtrees are joined by
/// L-shaped corridors, so the free space is a single 4-connected component.
pub fn generate_map(seed: u64, params: &GenParams) -> Result<GroundTruthMap, GenerateError> {
    let GenParams {
        width,
        height,
        room_count_range: (min_rooms, max_rooms),
        corridor_width,
        min_room_size,
    } = params.clone();
    if width < 16 || height < 16 {
        return Err(GenerateError::TooSmall { width, height });
    }
    if min_rooms == 0 || min_rooms > max_rooms || corridor_width == 0 || min_room_size == 0 {
        return Err(GenerateError::BadParams(format!("{:?}", params)));
    }
    // A leaf needs the room plus one wall cell on each side.
    let min_leaf = min_room_size + 2;
    if min_room_size > width - 2 || min_room_size > height - 2 {
        return Err(GenerateError::NoRoomFits {
            min_room_size,
            width,
            height,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let target = rng.random_range(min_rooms..=max_rooms);

    // Leaves are split breadth-first, largest first, until the target count.
    let root = Rect {
        x: 1,
        y: 1,
        w: width - 2,
        h: height - 2,
    };
    let mut nodes: Vec<(Rect, Option<(usize, usize)>)> = vec![(root, None)];
    let mut leaves = vec![0usize];
    while leaves.len() < target {
        leaves.sort_by_key(|&i| std::cmp::Reverse(nodes[i].0.w * nodes[i].0.h));
        let mut split_any = false;
        for pos in 0..leaves.len() {
            let li = leaves[pos];
            let r = nodes[li].0;
            let can_v = r.w >= 2 * min_leaf;
            let can_h = r.h >= 2 * min_leaf;
            if !can_v && !can_h {
                continue;
            }
            let vertical = match (can_v, can_h) {
                (true, true) => {
                    if r.w * 4 > r.h * 5 {
                        true
                    } else if r.h * 4 > r.w * 5 {
                        false
                    } else {
                        rng.random_bool(0.5)
                    }
                }
                (v, _) => v,
            };
            let (a, b) = if vertical {
                let cut = rng.random_range(min_leaf..=r.w - min_leaf);
                (
                    Rect { w: cut, ..r },
                    Rect {
                        x: r.x + cut,
                        w: r.w - cut,
                        ..r
                    },
                )
            } else {
                let cut = rng.random_range(min_leaf..=r.h - min_leaf);
                (
                    Rect { h: cut, ..r },
                    Rect {
                        y: r.y + cut,
                        h: r.h - cut,
                        ..r
                    },
                )
            };
            let ai = nodes.len();
            nodes.push((a, None));
            nodes.push((b, None));
            nodes[li].1 = Some((ai, ai + 1));
            leaves.remove(pos);
            leaves.push(ai);
            leaves.push(ai + 1);
            split_any = true;
            break;
        }
        if !split_any {
            break;
        }
    }

    let mut grid = Grid::filled(width, height, DEFAULT_CELL_SIZE, CellState::Occupied);
    let mut rooms: Vec<Option<Rect>> = vec![None; nodes.len()];
    let mut leaf_ids: Vec<usize> = (0..nodes.len()).filter(|&i| nodes[i].1.is_none()).collect();
    leaf_ids.sort_unstable();
    for li in leaf_ids {
        let leaf = nodes[li].0;
        // Rooms keep a wall between themselves and the leaf edge.
        let max_w = leaf.w.saturating_sub(2).max(1).min(leaf.w);
        let max_h = leaf.h.saturating_sub(2).max(1).min(leaf.h);
        let min_w = min_room_size.min(max_w);
        let min_h = min_room_size.min(max_h);
        let w = rng.random_range(min_w.max(max_w * 3 / 5).min(max_w)..=max_w);
        let h = rng.random_range(min_h.max(max_h * 3 / 5).min(max_h)..=max_h);
        let x = leaf.x + rng.random_range(0..=leaf.w - w);
        let y = leaf.y + rng.random_range(0..=leaf.h - h);
        let room = Rect { x, y, w, h };
        carve_rect(&mut grid, room);
        rooms[li] = Some(room);
    }

    // Join the two subtrees of each internal node through representative rooms.
    for i in (0..nodes.len()).rev() {
        if let Some((a, b)) = nodes[i].1 {
            let ra = representative(&nodes, &rooms, a, &mut rng);
            let rb = representative(&nodes, &rooms, b, &mut rng);
            carve_corridor(&mut grid, ra.center(), rb.center(), corridor_width, &mut rng);
        }
    }

    // Re-seal the border in case a corridor touched it.
    for x in 0..width {
        grid.set(Cell::new(x as i32, 0), CellState::Occupied);
        grid.set(Cell::new(x as i32, height as i32 - 1), CellState::Occupied);
    }
    for y in 0..height {
        grid.set(Cell::new(0, y as i32), CellState::Occupied);
        grid.set(Cell::new(width as i32 - 1, y as i32), CellState::Occupied);
    }

    if !grid.cells.contains(&CellState::Free) {
        return Err(GenerateError::NoRoomFits {
            min_room_size,
            width,
            height,
        });
    }
    Ok(GroundTruthMap { grid })
}

fn representative(
    nodes: &[(Rect, Option<(usize, usize)>)],
    rooms: &[Option<Rect>],
    mut i: usize,
    rng: &mut ChaCha8Rng,
) -> Rect {
    loop {
        match nodes[i].1 {
            None => return rooms[i].expect("every leaf has a room"),
            Some((a, b)) => i = if rng.random_bool(0.5) { a } else { b },
        }
    }
}

fn carve_rect(grid: &mut Grid, r: Rect) {
    for y in r.y..r.y + r.h {
        for x in r.x..r.x + r.w {
            grid.set(Cell::new(x as i32, y as i32), CellState::Free);
        }
    }
}

fn carve_corridor(
    grid: &mut Grid,
    (ax, ay): (usize, usize),
    (bx, by): (usize, usize),
    width: usize,
    rng: &mut ChaCha8Rng,
) {
    let clamp = |v: usize, hi: usize| v.clamp(1, hi - 1);
    let (gw, gh) = (grid.width - 1, grid.height - 1);
    let paint = |x: usize, y: usize, grid: &mut Grid| {
        for dy in 0..width {
            for dx in 0..width {
                let cx = clamp(x + dx, gw);
                let cy = clamp(y + dy, gh);
                grid.set(Cell::new(cx as i32, cy as i32), CellState::Free);
            }
        }
    };
    let horizontal_first = rng.random_bool(0.5);
    let (cx, cy) = if horizontal_first { (bx, ay) } else { (ax, by) };
    for (sx, sy, tx, ty) in [(ax, ay, cx, cy), (cx, cy, bx, by)] {
        let (x0, x1) = (sx.min(tx), sx.max(tx));
        let (y0, y1) = (sy.min(ty), sy.max(ty));
        for x in x0..=x1 {
            for y in y0..=y1 {
                paint(x, y, grid);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bfs_oracle(gt: &GroundTruthMap, start: Cell) -> Vec<Cell> {
        // Independent of free_component: explicit visited list and stack.
        let mut out = vec![start];
        let mut stack = vec![start];
        let mut visited = std::collections::HashSet::from([start]);
        while let Some(c) = stack.pop() {
            for (dx, dy) in [(0, 1), (1, 0), (0, -1), (-1, 0)] {
                let n = c.offset(dx, dy);
                if gt.get(n) == Some(CellState::Free) && visited.insert(n) {
                    out.push(n);
                    stack.push(n);
                }
            }
        }
        out.sort();
        out
    }

    #[test]
    fn cell_state_codes() {
        assert_eq!(CellState::Unknown.code(), 0);
        assert_eq!(CellState::Occupied.code(), 1);
        assert_eq!(CellState::Free.code(), 2);
        assert_eq!(CellState::from_code(2), Some(CellState::Free));
        assert_eq!(CellState::from_code(3), None);
    }

    #[test]
    fn load_two_by_two() {
        let map = load_map("2 2 0.05\n#.\n.#\n").unwrap();
        assert_eq!(map.get(Cell::new(0, 0)), Some(CellState::Occupied));
        assert_eq!(map.get(Cell::new(1, 1)), Some(CellState::Occupied));
        assert_eq!(map.get(Cell::new(1, 0)), Some(CellState::Free));
        assert_eq!(map.get(Cell::new(0, 1)), Some(CellState::Free));
        assert_eq!(map.grid().cell_size(), 0.05);
    }

    #[test]
    fn load_rejects_empty_body() {
        let err = load_map("2 2 0.05\n").unwrap_err();
        assert_eq!(err, ParseError::ZeroRows);
        assert!(err.to_string().contains("zero rows"));
    }

    #[test]
    fn load_rejects_ragged_row() {
        let err = load_map("4 2 0.05\n....\n...\n").unwrap_err();
        assert_eq!(
            err,
            ParseError::RaggedRow {
                line: 3,
                expected: 4,
                found: 3
            }
        );
    }

    #[test]
    fn load_rejects_unknown_and_junk() {
        let err = load_map("2 1 0.05\n.?\n").unwrap_err();
        assert_eq!(
            err,
            ParseError::IllegalChar {
                line: 2,
                column: 2,
                ch: '?'
            }
        );
        assert!(matches!(
            load_map("2 1 0.05\n.x\n"),
            Err(ParseError::IllegalChar { column: 2, .. })
        ));
        assert!(matches!(load_map("2 x 0.05\n..\n"), Err(ParseError::Header(_))));
        assert!(matches!(
            load_map("2 2 0.05\n..\n"),
            Err(ParseError::RowCount { expected: 2, found: 1 })
        ));
    }

    #[test]
    fn observed_snapshot_allows_unknown() {
        let obs = ObservedMap::parse("3 1 0.05\n?#.\n").unwrap();
        assert!(obs.is_unknown(Cell::new(0, 0)));
        assert_eq!(obs.to_text(), "3 1 0.05\n?#.\n");
    }

    #[test]
    fn text_round_trip() {
        let map = generate_map(3, &GenParams::default()).unwrap();
        assert_eq!(load_map(&map.to_text()).unwrap(), map);
    }

    #[test]
    fn generate_is_deterministic() {
        let p = GenParams::default();
        let a = generate_map(7, &p).unwrap();
        let b = generate_map(7, &p).unwrap();
        assert_eq!(a.to_text(), b.to_text());
        assert_ne!(a.to_text(), generate_map(8, &p).unwrap().to_text());
    }

    #[test]
    fn generate_single_component_and_sealed_border() {
        for seed in 0..30 {
            let p = GenParams {
                width: 40 + (seed as usize % 3) * 20,
                height: 30 + (seed as usize % 4) * 15,
                ..GenParams::default()
            };
            let map = generate_map(seed, &p).unwrap();
            let free: Vec<Cell> = map.free_cells().collect();
            let comp = bfs_oracle(&map, free[0]);
            assert_eq!(comp.len(), free.len(), "seed {seed}");
            for x in 0..map.width() as i32 {
                assert_eq!(map.get(Cell::new(x, 0)), Some(CellState::Occupied));
                assert_eq!(map.get(Cell::new(x, map.height() as i32 - 1)), Some(CellState::Occupied));
            }
            for y in 0..map.height() as i32 {
                assert_eq!(map.get(Cell::new(0, y)), Some(CellState::Occupied));
                assert_eq!(map.get(Cell::new(map.width() as i32 - 1, y)), Some(CellState::Occupied));
            }
        }
    }

    #[test]
    fn generate_rejects_bad_params() {
        let small = GenParams {
            width: 10,
            ..GenParams::default()
        };
        assert!(matches!(generate_map(0, &small), Err(GenerateError::TooSmall { .. })));
        let huge_room = GenParams {
            width: 20,
            height: 20,
            min_room_size: 19,
            ..GenParams::default()
        };
        assert!(matches!(
            generate_map(0, &huge_room),
            Err(GenerateError::NoRoomFits { .. })
        ));
        let empty_range = GenParams {
            room_count_range: (5, 2),
            ..GenParams::default()
        };
        assert!(matches!(generate_map(0, &empty_range), Err(GenerateError::BadParams(_))));
    }

    #[test]
    fn reachable_open_room() {
        let map = GroundTruthMap::from_rows(&["#####", "#...#", "#...#", "#...#", "#####"]).unwrap();
        let r = reachable_free_cells(&map, Cell::new(2, 2)).unwrap();
        assert_eq!(r.len(), 9);
        assert!(matches!(
            reachable_free_cells(&map, Cell::new(0, 0)),
            Err(GridError::StartNotFree(_))
        ));
    }

    #[test]
    fn reachable_excludes_sealed_pocket() {
        let map = GroundTruthMap::from_rows(&["#######", "#..#.##", "#..####", "#######"]).unwrap();
        let r = reachable_free_cells(&map, Cell::new(1, 1)).unwrap();
        assert_eq!(r.len(), 4);
        assert!(!r.contains(Cell::new(4, 1)));
    }

    #[test]
    fn reachable_matches_bfs_oracle_on_generated() {
        for seed in 0..10 {
            let map = generate_map(seed, &GenParams::default()).unwrap();
            let start = map.free_cells().nth(17).unwrap();
            let r = reachable_free_cells(&map, start).unwrap();
            let mut got: Vec<Cell> = r.iter().collect();
            got.sort();
            assert_eq!(got, bfs_oracle(&map, start));
        }
    }

    #[test]
    fn coverage_extremes_and_half() {
        let map = GroundTruthMap::from_rows(&["######", "#....#", "#....#", "######"]).unwrap();
        let start = Cell::new(1, 1);
        let mut obs = ObservedMap::unknown_like(&map);
        assert_eq!(coverage(&obs, &map, start).unwrap(), 0.0);
        // Top row of the room is 4 of 8 reachable cells.
        obs.reveal(&map, (1..5).map(|x| Cell::new(x, 1)));
        assert_eq!(coverage(&obs, &map, start).unwrap(), 0.5);
        let full = ObservedMap::fully_revealed(&map);
        assert_eq!(coverage(&full, &map, start).unwrap(), 1.0);
    }

    #[test]
    fn reveal_is_consistent_and_idempotent() {
        let map = generate_map(1, &GenParams::default()).unwrap();
        let mut obs = ObservedMap::unknown_like(&map);
        let before = obs.clone();
        obs.reveal(&map, std::iter::empty());
        assert_eq!(obs, before);
        let cells: Vec<Cell> = map.grid().cells().filter(|c| (c.x + c.y) % 3 == 0).collect();
        obs.reveal(&map, cells.iter().copied());
        let once = obs.clone();
        assert_eq!(obs.reveal(&map, cells.iter().copied()), 0);
        assert_eq!(obs, once);
        assert!(obs.is_consistent_with(&map));
    }
}
