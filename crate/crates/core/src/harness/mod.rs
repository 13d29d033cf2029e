//! Seeded episodes, benchmark matrices and their outputs.

pub mod bench;
pub mod config;
pub mod episode;

pub use bench::{run_benchmark, summarize, BenchConfig, BenchRow, BenchTable, SizeBucket, SummaryRow};
pub use config::{EpisodeConfig, MapSource, DEFAULT_BUDGET};
pub use episode::{run_episode, run_episode_with, Episode, EpisodeResult, Selection, StepRecord, Termination};
