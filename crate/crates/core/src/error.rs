use thiserror::Error;

use crate::grid::Cell;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("missing header line")]
    MissingHeader,
    #[error("line 1: malformed header: {0}")]
    Header(String),
    #[error("zero rows")]
    ZeroRows,
    #[error("line {line}: expected {expected} cells, found {found}")]
    RaggedRow {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}, column {column}: illegal character {ch:?}")]
    IllegalChar { line: usize, column: usize, ch: char },
    #[error("line {line}: more rows than the header declares")]
    ExtraRow { line: usize },
    #[error("expected {expected} rows, found {found}")]
    RowCount { expected: usize, found: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GridError {
    #[error("grid of {width}x{height} cannot hold {len} cells")]
    Shape {
        width: usize,
        height: usize,
        len: usize,
    },
    #[error("ground-truth map has an unknown cell at {0}")]
    UnknownInGroundTruth(Cell),
    #[error("start cell {0} is not free")]
    StartNotFree(Cell),
    #[error("reachable free space is empty")]
    EmptyReachable,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenerateError {
    #[error("map of {width}x{height} is below the 16x16 minimum")]
    TooSmall { width: usize, height: usize },
    #[error("a room of side {min_room_size} does not fit in {width}x{height}")]
    NoRoomFits {
        min_room_size: usize,
        width: usize,
        height: usize,
    },
    #[error("invalid generator parameters: {0}")]
    BadParams(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SenseError {
    #[error("timestep budget exhausted")]
    BudgetExhausted,
    #[error("episode already stopped")]
    Stopped,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TourError {
    #[error("skeleton graph is empty")]
    Empty,
    #[error("start cell {0} is not a graph node")]
    StartNotNode(Cell),
    #[error("skeleton graph is disconnected")]
    Disconnected,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NavError {
    #[error("no path from {from} to {goal}")]
    Unreachable { from: Cell, goal: Cell },
}

/// Anything wrong with an episode or benchmark configuration, detected
/// before the simulation starts.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("map {path}: {source}")]
    Map { path: String, source: ParseError },
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Generate(#[from] GenerateError),
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("episode {index}: {source}")]
    Episode {
        index: usize,
        source: Box<ConfigError>,
    },
}
