use std::fs;
use std::process::Command;

fn bench() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lai-bench"))
}

#[test]
fn scan_single_query_passes_oracle() {
    let out = bench()
        .args([
            "--engine",
            "scan",
            "--queries",
            "1",
            "--n",
            "10000",
            "--check-oracle",
        ])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("engine=scan"));
    assert!(stdout.contains("n/a,1,"));
}

#[test]
fn bad_flags_are_usage_errors() {
    for args in [
        &["--engine", "btree"][..],
        &["--workload", "sideways"],
        &["--forecast", "maybe"],
        &["--bogus"],
    ] {
        let out = bench().args(args).output().unwrap();
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
    let out = bench()
        .args(["--delta", "0", "--n", "100"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn writes_all_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = bench()
        .args([
            "--engine",
            "lai",
            "--workload",
            "seq_zoomin",
            "--n",
            "100000",
            "--queries",
            "400",
            "--delta",
            "100",
        ])
        .args(["--forecast", "on", "--seed", "7", "--check-oracle", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let queries = fs::read_to_string(dir.path().join("queries.csv")).unwrap();
    let mut lines = queries.lines();
    assert_eq!(
        lines.next(),
        Some("query_idx,case,latency_ns,cumulative_ns")
    );
    let rows: Vec<Vec<String>> = lines
        .map(|l| l.split(',').map(String::from).collect())
        .collect();
    assert_eq!(rows.len(), 400);
    let cumulative: Vec<u64> = rows.iter().map(|r| r[3].parse().unwrap()).collect();
    assert!(cumulative.windows(2).all(|w| w[0] <= w[1]));

    let cases = fs::read_to_string(dir.path().join("cases.csv")).unwrap();
    let freq: usize = cases
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse::<usize>().unwrap())
        .sum();
    assert_eq!(freq, 400);

    let batches = fs::read_to_string(dir.path().join("batches.csv")).unwrap();
    assert_eq!(batches.lines().count(), 5);
    assert!(batches.starts_with("batch_index,first_query,forecast_ns,apply_ns,applied_mutations\n"));

    let audit = fs::read_to_string(dir.path().join("forecast.csv")).unwrap();
    assert!(audit.starts_with("batch_index,series,method,mase,chosen\n"));
    assert_eq!(audit.lines().count(), 1 + 3 * 8);

    let meta = fs::read_to_string(dir.path().join("run.txt")).unwrap();
    for field in [
        "engine=lai",
        "seed=7",
        "n=100000",
        "delta=100",
        "tau=6000",
        "epsilon=32",
        "forecast=on",
    ] {
        assert!(meta.contains(field), "{field}");
    }
}

#[test]
fn dump_workload_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w.csv");
    let out = bench()
        .args([
            "--engine",
            "scan",
            "--workload",
            "zoomin",
            "--n",
            "1000",
            "--queries",
            "10",
            "--dump-workload",
        ])
        .arg(&path)
        .output()
        .unwrap();
    assert!(out.status.success());
    let csv = fs::read_to_string(&path).unwrap();
    assert_eq!(csv.lines().count(), 11);
    assert!(csv.starts_with("idx,l,h\n0,0,999\n"));
}

#[test]
fn paired_runs_agree_on_results() {
    use lai::workloads::WorkloadKind;
    use lai_bench::{run, BenchConfig, EngineKind};

    for workload in [
        WorkloadKind::Periodic,
        WorkloadKind::ZoomOut,
        WorkloadKind::SequentialAlternate,
    ] {
        let mut cfg = BenchConfig {
            engine: EngineKind::Lai,
            workload,
            n: 50_000,
            queries: 400,
            delta: 100,
            collect_results: true,
            ..BenchConfig::default()
        };
        let plain = run(&cfg).unwrap();
        cfg.forecast = true;
        let fc = run(&cfg).unwrap();
        assert_eq!(plain.results, fc.results, "{workload}");
    }
}
