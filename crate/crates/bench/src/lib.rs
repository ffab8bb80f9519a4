//! Benchmark harness: builds a shuffled column, generates a workload and
//! drives one engine over it in batches, optionally with forecasting.
//!
//! Query latencies come from the engine's own stats log. Forecast computation
//! and forecast application are timed separately per batch and are not part
//! of `cumulative_ns`.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io;
use std::path::Path;
use std::str::FromStr;
use std::thread;
use std::time::Instant;

use lai::forecast::{
    apply_forecast, default_methods, predict_workload, ForecastMethod, QueryBatch, MIN_HISTORY,
};
use lai::workloads::{generate, shuffled_keys, to_csv, WorkloadKind, WorkloadSpec};
use lai::{
    naive_scan, CaseKind, CrackEngine, Dd1rEngine, Key, LaiConfig, LaiEngine, LaiError,
    RangeEngine, RangeQuery, ScanEngine, SortedEngine,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EngineKind {
    Lai,
    Crack,
    Dd1r,
    Sorted,
    Scan,
}

impl EngineKind {
    pub const ALL: [EngineKind; 5] = [
        EngineKind::Lai,
        EngineKind::Crack,
        EngineKind::Dd1r,
        EngineKind::Sorted,
        EngineKind::Scan,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EngineKind::Lai => "lai",
            EngineKind::Crack => "crack",
            EngineKind::Dd1r => "dd1r",
            EngineKind::Sorted => "sorted",
            EngineKind::Scan => "scan",
        }
    }
}

impl fmt::Display for EngineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EngineKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        EngineKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown engine `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub engine: EngineKind,
    pub workload: WorkloadKind,
    pub n: u64,
    pub queries: usize,
    /// Batch size; also the forecast horizon.
    pub delta: usize,
    pub forecast: bool,
    pub tau: usize,
    pub epsilon: usize,
    pub seed: u64,
    pub selectivity: f64,
    pub zoom_group: usize,
    pub check_oracle: bool,
    /// Keep every query's sorted result in the report.
    pub collect_results: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            engine: EngineKind::Lai,
            workload: WorkloadKind::Random,
            n: 1_000_000,
            queries: 2000,
            delta: 200,
            forecast: false,
            tau: lai::learned_sort::DEFAULT_TAU,
            epsilon: lai::model::DEFAULT_EPSILON,
            seed: 1,
            selectivity: WorkloadSpec::DEFAULT_SELECTIVITY,
            zoom_group: WorkloadSpec::DEFAULT_ZOOM_GROUP,
            check_oracle: false,
            collect_results: false,
        }
    }
}

impl BenchConfig {
    pub fn workload_spec(&self) -> WorkloadSpec {
        let mut spec = WorkloadSpec::new(self.workload, self.n, self.queries, self.seed);
        spec.selectivity = self.selectivity;
        spec.zoom_group = self.zoom_group;
        spec
    }

    /// Forecasting only applies to the learned engine.
    pub fn forecasting(&self) -> bool {
        self.forecast && self.engine == EngineKind::Lai
    }

    pub fn metadata(&self) -> String {
        format!(
            "engine={} workload={} seed={} n={} queries={} delta={} tau={} epsilon={} forecast={}\n\
             timing: cumulative_ns covers query execution only; forecast_ns and apply_ns are per batch in batches.csv\n",
            self.engine,
            self.workload,
            self.seed,
            self.n,
            self.queries,
            self.delta,
            self.tau,
            self.epsilon,
            if self.forecasting() { "on" } else { "off" },
        )
    }
}

#[derive(Debug)]
pub enum BenchError {
    Config(String),
    Engine(LaiError),
    OracleMismatch {
        query_idx: usize,
        query: RangeQuery,
        expected: usize,
        got: usize,
    },
    Io(io::Error),
}

impl fmt::Display for BenchError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BenchError::Config(msg) => write!(f, "invalid configuration: {msg}"),
            BenchError::Engine(e) => write!(f, "engine error: {e}"),
            BenchError::OracleMismatch { query_idx, query, expected, got } => write!(
                f,
                "query {query_idx} [{}, {}] disagrees with the scan oracle ({got} keys returned, {expected} expected)",
                query.low, query.high
            ),
            BenchError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for BenchError {}

impl From<LaiError> for BenchError {
    fn from(e: LaiError) -> Self {
        BenchError::Engine(e)
    }
}

impl From<io::Error> for BenchError {
    fn from(e: io::Error) -> Self {
        BenchError::Io(e)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryRecord {
    pub query_idx: usize,
    pub case: Option<CaseKind>,
    pub latency_ns: u64,
    pub cumulative_ns: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BatchRecord {
    pub batch_index: usize,
    pub first_query: usize,
    pub forecast_ns: u64,
    pub apply_ns: u64,
    pub applied_mutations: usize,
}

#[derive(Debug, Clone)]
pub struct BenchReport {
    pub config: BenchConfig,
    pub queries: Vec<QueryRecord>,
    pub batches: Vec<BatchRecord>,
    /// `batch_index,series,method,mase,chosen` rows.
    pub forecast_audit: Vec<String>,
    /// Sorted result keys per query, when requested.
    pub results: Option<Vec<Vec<Key>>>,
}

impl BenchReport {
    pub fn total_ns(&self) -> u64 {
        self.queries.last().map_or(0, |r| r.cumulative_ns)
    }

    /// Cumulative time at the end of each batch.
    pub fn batch_cumulative_ns(&self) -> Vec<u64> {
        self.batches
            .iter()
            .map(|b| {
                let end = (b.first_query + self.config.delta).min(self.queries.len());
                self.queries[end - 1].cumulative_ns
            })
            .collect()
    }

    /// Per-case `(frequency, total_time_ns)`, keyed by the CSV label.
    pub fn case_summary(&self) -> BTreeMap<&'static str, (usize, u64)> {
        let mut out = BTreeMap::new();
        for r in &self.queries {
            let slot = out.entry(case_label(r.case)).or_insert((0, 0));
            slot.0 += 1;
            slot.1 += r.latency_ns;
        }
        out
    }

    pub fn count_cases(&self, from_query: usize, pred: impl Fn(CaseKind) -> bool) -> usize {
        self.queries[from_query.min(self.queries.len())..]
            .iter()
            .filter(|r| r.case.is_some_and(&pred))
            .count()
    }

    pub fn queries_csv(&self) -> String {
        let mut out = String::from("query_idx,case,latency_ns,cumulative_ns\n");
        for r in &self.queries {
            out.push_str(&format!(
                "{},{},{},{}\n",
                r.query_idx,
                case_label(r.case),
                r.latency_ns,
                r.cumulative_ns
            ));
        }
        out
    }

    pub fn cases_csv(&self) -> String {
        let mut out = String::from("case,frequency,total_time_ns\n");
        for (case, (freq, total)) in self.case_summary() {
            out.push_str(&format!("{case},{freq},{total}\n"));
        }
        out
    }

    pub fn batches_csv(&self) -> String {
        let mut out =
            String::from("batch_index,first_query,forecast_ns,apply_ns,applied_mutations\n");
        for b in &self.batches {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                b.batch_index, b.first_query, b.forecast_ns, b.apply_ns, b.applied_mutations
            ));
        }
        out
    }

    pub fn forecast_csv(&self) -> String {
        let mut out = String::from("batch_index,series,method,mase,chosen\n");
        for row in &self.forecast_audit {
            out.push_str(row);
            out.push('\n');
        }
        out
    }

    /// Writes `queries.csv`, `cases.csv`, `batches.csv`, `run.txt` and, when
    /// forecasting, `forecast.csv` into `dir`.
    pub fn write_to(&self, dir: &Path) -> io::Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("queries.csv"), self.queries_csv())?;
        fs::write(dir.join("cases.csv"), self.cases_csv())?;
        fs::write(dir.join("batches.csv"), self.batches_csv())?;
        fs::write(dir.join("run.txt"), self.config.metadata())?;
        if self.config.forecasting() {
            fs::write(dir.join("forecast.csv"), self.forecast_csv())?;
        }
        Ok(())
    }
}

/// CSV label of a case; baselines have none.
pub fn case_label(case: Option<CaseKind>) -> &'static str {
    case.map_or("n/a", CaseKind::as_str)
}

enum Driver {
    Lai(LaiEngine),
    Other(Box<dyn RangeEngine>),
}

impl Driver {
    fn engine(&mut self) -> &mut dyn RangeEngine {
        match self {
            Driver::Lai(e) => e,
            Driver::Other(e) => e.as_mut(),
        }
    }
}

fn build_driver(config: &BenchConfig, data: Vec<Key>) -> Result<Driver, BenchError> {
    Ok(match config.engine {
        EngineKind::Lai => {
            let cfg = LaiConfig::default()
                .with_epsilon(config.epsilon)
                .with_tau(config.tau);
            Driver::Lai(LaiEngine::new(data, cfg)?)
        }
        EngineKind::Crack => Driver::Other(Box::new(CrackEngine::new(data))),
        EngineKind::Dd1r => Driver::Other(Box::new(Dd1rEngine::new(data, config.seed))),
        EngineKind::Sorted => Driver::Other(Box::new(SortedEngine::new(data))),
        EngineKind::Scan => Driver::Other(Box::new(ScanEngine::new(data))),
    })
}

pub fn validate(config: &BenchConfig) -> Result<(), BenchError> {
    if config.n == 0 {
        return Err(BenchError::Config("--n must be positive".into()));
    }
    if config.delta == 0 {
        return Err(BenchError::Config("--delta must be positive".into()));
    }
    if config.epsilon == 0 {
        return Err(BenchError::Config("--epsilon must be positive".into()));
    }
    config
        .workload_spec()
        .validate()
        .map_err(|e| BenchError::Config(e.to_string()))
}

/// Generates the dataset and workload for `config` and runs it.
pub fn run(config: &BenchConfig) -> Result<BenchReport, BenchError> {
    validate(config)?;
    let queries = generate(&config.workload_spec())?;
    run_queries(config, shuffled_keys(config.n, config.seed), &queries)
}

/// Runs `queries` over `data` in batches of `config.delta`.
///
/// With forecasting on, each batch's queries are handed to a prediction
/// thread when the batch starts. The thread is joined once the batch has
/// executed and its forecast is applied before the next batch begins.
pub fn run_queries(
    config: &BenchConfig,
    data: Vec<Key>,
    queries: &[RangeQuery],
) -> Result<BenchReport, BenchError> {
    validate(config)?;
    let oracle_data = config.check_oracle.then(|| data.clone());
    let mut driver = build_driver(config, data)?;
    let methods: Vec<Box<dyn ForecastMethod>> = default_methods();
    let max_key = config.n - 1;

    let mut batches = Vec::new();
    let mut audit = Vec::new();
    let mut results = config.collect_results.then(Vec::new);

    for (batch_index, chunk) in queries.chunks(config.delta).enumerate() {
        let first_query = batch_index * config.delta;
        let horizon = queries
            .len()
            .saturating_sub(first_query + chunk.len())
            .min(config.delta);
        let forecast_wanted = config.forecasting() && horizon > 0 && chunk.len() >= MIN_HISTORY;
        let history = QueryBatch::new(batch_index, chunk.to_vec());

        let predicted = thread::scope(|s| -> Result<_, BenchError> {
            let task = forecast_wanted.then(|| {
                s.spawn(|| {
                    let start = Instant::now();
                    let f = predict_workload(&history, &methods, horizon, max_key);
                    (f, start.elapsed().as_nanos() as u64)
                })
            });
            for (i, &q) in chunk.iter().enumerate() {
                let engine = driver.engine();
                let range = engine.run(q)?;
                if oracle_data.is_some() || results.is_some() {
                    let mut got = engine.view(range).to_vec();
                    got.sort_unstable();
                    if let Some(data) = &oracle_data {
                        let mut expected = naive_scan(data, q);
                        expected.sort_unstable();
                        if got != expected {
                            return Err(BenchError::OracleMismatch {
                                query_idx: first_query + i,
                                query: q,
                                expected: expected.len(),
                                got: got.len(),
                            });
                        }
                    }
                    if let Some(r) = results.as_mut() {
                        r.push(got);
                    }
                }
            }
            Ok(task.map(|t| t.join().expect("forecast thread panicked")))
        })?;

        let mut record = BatchRecord {
            batch_index,
            first_query,
            forecast_ns: 0,
            apply_ns: 0,
            applied_mutations: 0,
        };
        if let (Some((forecast, forecast_ns)), Driver::Lai(engine)) = (predicted, &mut driver) {
            let forecast = forecast?;
            let start = Instant::now();
            record.applied_mutations = apply_forecast(engine, &forecast)?;
            record.apply_ns = start.elapsed().as_nanos() as u64;
            record.forecast_ns = forecast_ns;
            audit.extend(forecast.audit_rows(batch_index));
        }
        batches.push(record);
    }

    let mut cumulative = 0u64;
    let records = driver
        .engine()
        .stats_log()
        .iter()
        .map(|s| {
            cumulative += s.latency_ns;
            QueryRecord {
                query_idx: s.query_index,
                case: s.case,
                latency_ns: s.latency_ns,
                cumulative_ns: cumulative,
            }
        })
        .collect();

    Ok(BenchReport {
        config: config.clone(),
        queries: records,
        batches,
        forecast_audit: audit,
        results,
    })
}

/// Writes the generated workload for `config` as `idx,l,h` CSV.
pub fn dump_workload(config: &BenchConfig, path: &Path) -> Result<(), BenchError> {
    validate(config)?;
    fs::write(path, to_csv(&generate(&config.workload_spec())?))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(engine: EngineKind, workload: WorkloadKind) -> BenchConfig {
        BenchConfig {
            engine,
            workload,
            n: 20_000,
            queries: 300,
            delta: 50,
            check_oracle: true,
            ..BenchConfig::default()
        }
    }

    #[test]
    fn every_engine_passes_the_oracle() {
        for engine in EngineKind::ALL {
            let report = run(&small(engine, WorkloadKind::Random)).unwrap();
            assert_eq!(report.queries.len(), 300);
            assert_eq!(report.batches.len(), 6);
        }
    }

    #[test]
    fn cumulative_is_monotone_and_cases_sum() {
        let report = run(&small(EngineKind::Lai, WorkloadKind::SequentialZoomIn)).unwrap();
        assert!(report
            .queries
            .windows(2)
            .all(|w| w[0].cumulative_ns <= w[1].cumulative_ns));
        let total: usize = report.case_summary().values().map(|(f, _)| f).sum();
        assert_eq!(total, 300);
        assert_eq!(report.queries_csv().lines().count(), 301);
    }

    #[test]
    fn baselines_report_no_case() {
        let report = run(&small(EngineKind::Crack, WorkloadKind::Random)).unwrap();
        assert_eq!(
            report.cases_csv(),
            format!(
                "case,frequency,total_time_ns\nn/a,300,{}\n",
                report.total_ns()
            )
        );
    }

    #[test]
    fn forecasting_changes_cases_not_results() {
        let mut cfg = small(EngineKind::Lai, WorkloadKind::SequentialZoomIn);
        cfg.collect_results = true;
        let plain = run(&cfg).unwrap();
        cfg.forecast = true;
        let fc = run(&cfg).unwrap();
        assert_eq!(plain.results, fc.results);
        assert!(fc.count_cases(50, CaseKind::is_case1) < plain.count_cases(50, CaseKind::is_case1));
        assert_eq!(fc.batches[0].first_query, 0);
        assert!(fc.batches[..5].iter().all(|b| b.forecast_ns > 0));
        assert_eq!(fc.batches[5].forecast_ns, 0);
        assert_eq!(fc.forecast_audit.len(), 5 * 8);
    }

    #[test]
    fn forecast_flag_is_ignored_for_baselines() {
        let mut cfg = small(EngineKind::Scan, WorkloadKind::SequentialZoomIn);
        cfg.forecast = true;
        let report = run(&cfg).unwrap();
        assert!(report.forecast_audit.is_empty());
        assert!(cfg.metadata().contains("forecast=off"));
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let cfg = BenchConfig {
            delta: 0,
            ..BenchConfig::default()
        };
        assert!(matches!(run(&cfg), Err(BenchError::Config(_))));
        let cfg = BenchConfig {
            selectivity: 2.0,
            ..BenchConfig::default()
        };
        assert!(matches!(run(&cfg), Err(BenchError::Config(_))));
    }

    #[test]
    fn engine_names_round_trip() {
        for e in EngineKind::ALL {
            assert_eq!(e.as_str().parse::<EngineKind>().unwrap(), e);
        }
        assert!("btree".parse::<EngineKind>().is_err());
    }
}
