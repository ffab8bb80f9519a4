use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use lai::workloads::WorkloadKind;
use lai_bench::{dump_workload, run, BenchConfig, BenchError, EngineKind};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Toggle {
    On,
    Off,
}

/// Run a range-query workload against one indexing engine and report
/// per-query and per-case timings.
#[derive(Debug, Parser)]
#[command(name = "lai-bench", version)]
struct Cli {
    /// lai, crack, dd1r, sorted or scan
    #[arg(long, default_value = "lai", value_parser = parse_engine)]
    engine: EngineKind,

    /// random, seq_random, seq_alternate, seq_inverse, seq_overlap, zoomin,
    /// seq_zoomin, zoomout, seq_zoomout or periodic
    #[arg(long, default_value = "random", value_parser = parse_workload)]
    workload: WorkloadKind,

    /// Column size; keys are a shuffle of 0..n
    #[arg(long, default_value_t = 1_000_000)]
    n: u64,

    #[arg(long, default_value_t = 2000)]
    queries: usize,

    /// Batch size and forecast horizon
    #[arg(long, default_value_t = 200)]
    delta: usize,

    #[arg(long, value_enum, default_value = "off")]
    forecast: Toggle,

    /// Regions longer than this use the learned sort
    #[arg(long, default_value_t = lai::learned_sort::DEFAULT_TAU)]
    tau: usize,

    /// Error bound of the per-partition models
    #[arg(long, default_value_t = lai::model::DEFAULT_EPSILON)]
    epsilon: usize,

    #[arg(long, default_value_t = 1)]
    seed: u64,

    /// Maximum query width as a fraction of n
    #[arg(long, default_value_t = 0.001)]
    selectivity: f64,

    /// Queries per group in the sequential zoom workloads
    #[arg(long, default_value_t = 5)]
    zoom_group: usize,

    /// Directory for queries.csv, cases.csv, batches.csv, forecast.csv and run.txt
    #[arg(long)]
    out: Option<PathBuf>,

    /// Write the generated workload as idx,l,h CSV
    #[arg(long)]
    dump_workload: Option<PathBuf>,

    /// Compare every answer with a full scan; exit 3 on the first mismatch
    #[arg(long)]
    check_oracle: bool,
}

fn parse_engine(s: &str) -> Result<EngineKind, String> {
    s.parse()
}

fn parse_workload(s: &str) -> Result<WorkloadKind, String> {
    s.parse().map_err(|e: lai::LaiError| e.to_string())
}

impl Cli {
    fn config(&self) -> BenchConfig {
        BenchConfig {
            engine: self.engine,
            workload: self.workload,
            n: self.n,
            queries: self.queries,
            delta: self.delta,
            forecast: matches!(self.forecast, Toggle::On),
            tau: self.tau,
            epsilon: self.epsilon,
            seed: self.seed,
            selectivity: self.selectivity,
            zoom_group: self.zoom_group,
            check_oracle: self.check_oracle,
            collect_results: false,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = cli.config();
    let outcome = (|| -> Result<(), BenchError> {
        if let Some(path) = &cli.dump_workload {
            dump_workload(&config, path)?;
        }
        let report = run(&config)?;
        match &cli.out {
            Some(dir) => report.write_to(dir)?,
            None => {
                print!("{}", config.metadata());
                print!("{}", report.cases_csv());
            }
        }
        Ok(())
    })();
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ BenchError::OracleMismatch { .. }) => {
            eprintln!("lai-bench: {e}");
            ExitCode::from(3)
        }
        Err(e @ BenchError::Config(_)) => {
            eprintln!("lai-bench: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("lai-bench: {e}");
            ExitCode::FAILURE
        }
    }
}
