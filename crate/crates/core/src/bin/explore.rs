use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use frontier_explore::grid::{Cell, GenParams};
use frontier_explore::harness::{run_benchmark, run_episode_with, BenchConfig, EpisodeConfig, MapSource};
use frontier_explore::sensing::{FieldOfView, SensorConfig, DEFAULT_RANGE_CELLS};
use frontier_explore::{ConfigError, EstimatorSpec, PlannerKind};

#[derive(Parser)]
#[command(name = "explore", version, about = "Frontier exploration simulator and benchmark runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single episode.
    Run(RunArgs),
    /// Run a benchmark matrix described by a TOML file.
    Bench(BenchArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Map file in the text grid format.
    #[arg(long, conflicts_with = "gen_seed", required_unless_present = "gen_seed")]
    map: Option<PathBuf>,
    /// Generate a rooms-and-corridors map with this seed instead.
    #[arg(long)]
    gen_seed: Option<u64>,
    #[arg(long, default_value_t = 500)]
    budget: u64,
    #[arg(long, default_value = "lfe")]
    planner: PlannerKind,
    /// `oracle` or `oracle-noisy=SIGMA`.
    #[arg(long, default_value = "oracle")]
    estimator: EstimatorSpec,
    /// Field of view in degrees: 360 or 90.
    #[arg(long, default_value_t = 360)]
    fov: u32,
    /// Sensor range in cells.
    #[arg(long, default_value_t = DEFAULT_RANGE_CELLS)]
    range: u32,
    /// Timesteps per cell of travel.
    #[arg(long, default_value_t = 1.7)]
    ratio: f64,
    /// Frontiers considered by the look-ahead planner.
    #[arg(long, default_value_t = 6)]
    k: usize,
    /// Seeds the start cell (unless --start is given) and estimator noise.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Start cell as X,Y.
    #[arg(long, value_parser = parse_cell)]
    start: Option<Cell>,
    /// Write the episode result as JSON here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write one JSON record per step here.
    #[arg(long)]
    replay: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    config: PathBuf,
    /// Per-episode CSV; the JSON table with bucket means goes next to it.
    #[arg(long)]
    out: PathBuf,
    /// Overrides the configured thread count.
    #[arg(long)]
    parallelism: Option<usize>,
}

fn parse_cell(s: &str) -> Result<Cell, String> {
    let (x, y) = s.split_once(',').ok_or("expected X,Y")?;
    let p = |v: &str| v.trim().parse::<i32>().map_err(|e| e.to_string());
    Ok(Cell::new(p(x)?, p(y)?))
}

enum Failure {
    Config(ConfigError),
    Io(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e)
    }
}

fn io_err(path: &std::path::Path) -> impl Fn(std::io::Error) -> Failure + '_ {
    move |e| Failure::Io(format!("{}: {e}", path.display()))
}

fn run(args: RunArgs) -> Result<(), Failure> {
    let map = match (args.map, args.gen_seed) {
        (Some(path), _) => MapSource::File(path),
        (None, Some(seed)) => MapSource::Generated {
            seed,
            params: GenParams::default(),
        },
        (None, None) => unreachable!("clap requires one map source"),
    };
    let fov = FieldOfView::from_degrees(args.fov)
        .ok_or_else(|| ConfigError::Invalid(format!("--fov must be 360 or 90, got {}", args.fov)))?;
    let config = EpisodeConfig {
        map,
        start: args.start,
        budget: args.budget,
        planner: args.planner,
        estimator: args.estimator,
        sensor: SensorConfig {
            fov,
            range_cells: args.range,
        },
        step_ratio: args.ratio,
        k: args.k,
        seed: args.seed,
    };
    // Fail on configuration problems before creating any output file.
    config.resolve()?;
    let mut replay = match &args.replay {
        Some(path) => Some((BufWriter::new(File::create(path).map_err(io_err(path))?), path)),
        None => None,
    };
    let mut write_err = None;
    let result = run_episode_with(&config, |rec| {
        if let Some((w, path)) = replay.as_mut() {
            if let Err(e) = writeln!(w, "{}", rec.to_json_line()) {
                write_err.get_or_insert_with(|| io_err(path)(e));
            }
        }
    })?;
    if let Some(e) = write_err {
        return Err(e);
    }
    if let Some((mut w, path)) = replay {
        w.flush().map_err(io_err(path))?;
    }
    let json = serde_json::to_string_pretty(&result).expect("result serializes");
    match &args.out {
        Some(path) => std::fs::write(path, json + "\n").map_err(io_err(path))?,
        None => println!("{json}"),
    }
    eprintln!(
        "coverage {:.4} after {} steps ({:?})",
        result.coverage, result.steps, result.termination
    );
    Ok(())
}

fn bench(args: BenchArgs) -> Result<(), Failure> {
    let config = BenchConfig::load(&args.config)?;
    let matrix = config.episodes()?;
    let parallelism = args.parallelism.unwrap_or(config.parallelism);
    let table = run_benchmark(&matrix, parallelism)?;
    std::fs::write(&args.out, table.to_csv()).map_err(io_err(&args.out))?;
    let json_path = args.out.with_extension("json");
    std::fs::write(&json_path, table.to_json() + "\n").map_err(io_err(&json_path))?;
    for s in &table.summary {
        println!(
            "{:<8} {:<20} {:>3}  {:<6} n={:<4} mean coverage {:.4}",
            s.planner,
            s.estimator,
            s.fov,
            format!("{:?}", s.bucket).to_lowercase(),
            s.episodes,
            s.mean_coverage
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(a) => run(a),
        Command::Bench(a) => bench(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
