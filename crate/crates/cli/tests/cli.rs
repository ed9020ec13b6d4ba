use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn antgene(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_antgene"))
        .args(args)
        .env_remove("ANTGENE_THREADS")
        .output()
        .expect("spawn antgene")
}

fn summary(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "antgene failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn run_is_reproducible_apart_from_timings() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    for dir in [&a, &b] {
        stdout(&antgene(&[
            "run", "--gen", "10:7", "--seed", "3", "--out", dir.to_str().unwrap(),
        ]));
    }
    let (mut sa, mut sb) = (summary(&a), summary(&b));
    sa.as_object_mut().unwrap().remove("timings");
    sb.as_object_mut().unwrap().remove("timings");
    assert_eq!(sa, sb);
    assert_eq!(
        fs::read_to_string(a.join("tour.txt")).unwrap(),
        fs::read_to_string(b.join("tour.txt")).unwrap()
    );
    assert_eq!(sa["seed"], 3);
    assert_eq!(sa["instance"]["n"], 10);
    assert_eq!(sa["params"]["aco"]["alpha"], 1.0);
    assert!(!a.join("trace.svg").exists());

    let trace = fs::read_to_string(a.join("trace.csv")).unwrap();
    assert_eq!(
        trace.lines().next().unwrap(),
        "iteration,best_so_far,iteration_best,mean,construction_secs,update_secs,ga_secs"
    );
    assert_eq!(trace.lines().count() - 1, sa["iterations"].as_u64().unwrap() as usize);
}

#[test]
fn unit_square_file_solves_to_perimeter() {
    let tmp = tempfile::tempdir().unwrap();
    let file = tmp.path().join("square.tsp");
    fs::write(
        &file,
        "NAME : square\nTYPE : TSP\nDIMENSION : 4\nEDGE_WEIGHT_TYPE : EXPLICIT\n\
         EDGE_WEIGHT_FORMAT : FULL_MATRIX\nEDGE_WEIGHT_SECTION\n\
         0 1 2 1\n1 0 1 2\n2 1 0 1\n1 2 1 0\nEOF\n",
    )
    .unwrap();
    let out = tmp.path().join("out");
    stdout(&antgene(&[
        "run",
        "--file",
        file.to_str().unwrap(),
        "--iterations",
        "5",
        "--format",
        "json,svg",
        "--out",
        out.to_str().unwrap(),
    ]));
    let s = summary(&out);
    assert_eq!(s["best_length"], 4.0);
    assert_eq!(s["instance"]["name"], "square");
    assert!(!out.join("trace.csv").exists());
    assert!(fs::read_to_string(out.join("trace.svg")).unwrap().starts_with("<svg"));
    let tour = fs::read_to_string(out.join("tour.txt")).unwrap();
    assert_eq!(tour.lines().next().unwrap(), "TOUR 4 4");
    assert_eq!(tour.lines().count(), 5);
}

#[test]
fn oracle_check_reports_zero_gap() {
    let tmp = tempfile::tempdir().unwrap();
    stdout(&antgene(&[
        "run", "--gen", "8:2", "--oracle-check", "--out", tmp.path().to_str().unwrap(),
    ]));
    let s = summary(tmp.path());
    assert_eq!(s["oracle"]["gap"], 0.0);
    assert_eq!(s["oracle"]["optimum"], s["oracle"]["found"]);
}

#[test]
fn oracle_check_refused_for_large_instances() {
    let tmp = tempfile::tempdir().unwrap();
    let out = antgene(&[
        "run", "--gen", "30:1", "--oracle-check", "--out", tmp.path().to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    assert!(!tmp.path().join("summary.json").exists());
}

#[test]
fn invalid_parameters_fail_without_writing() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("out");
    let out = antgene(&[
        "run", "--gen", "10:1", "--delta", "1.5", "--out", dir.to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("delta"), "stderr: {err}");
    assert!(!dir.exists());
}

#[test]
fn missing_or_conflicting_instance_source_is_rejected() {
    assert!(!antgene(&["run"]).status.success());
    assert!(!antgene(&["run", "--gen", "5:1", "--file", "x.tsp"]).status.success());
    assert!(!antgene(&["run", "--file", "/nonexistent/x.tsp"]).status.success());
}

#[test]
fn thread_env_is_used_and_flag_overrides_it() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |extra: &[&str]| {
        let mut args = vec!["run", "--gen", "9:4", "--out", tmp.path().to_str().unwrap()];
        args.extend_from_slice(extra);
        let out = Command::new(env!("CARGO_BIN_EXE_antgene"))
            .args(&args)
            .env("ANTGENE_THREADS", "3")
            .output()
            .unwrap();
        stdout(&out);
        summary(tmp.path())
    };
    assert_eq!(run(&[])["params"]["threads"], 3);
    assert_eq!(run(&["--threads", "2"])["params"]["threads"], 2);
}

#[test]
fn bench_single_worker_has_unit_speedup() {
    let csv = stdout(&antgene(&[
        "bench", "--gen", "30:1", "--ants", "10", "--iterations", "3", "--thread-list", "1,2",
    ]));
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "threads,construction_secs,total_secs,speedup,best_length"
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][0], "1");
    assert_eq!(rows[0][3].parse::<f64>().unwrap(), 1.0);
    assert_eq!(rows[0][4], rows[1][4]);
}

#[test]
fn oracle_sweep_on_tiny_instances_is_exact() {
    let tmp = tempfile::tempdir().unwrap();
    let file = tmp.path().join("oracle.csv");
    let out = antgene(&[
        "oracle", "--n", "5", "--seeds", "1-4", "--iterations", "20", "--out",
        file.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let csv = fs::read_to_string(&file).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "seed,optimum,found,gap,optimal");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 4);
    for row in rows {
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(cols[3].parse::<f64>().unwrap(), 0.0, "{row}");
    }
    assert!(String::from_utf8_lossy(&out.stderr).contains("4/4"));
}

#[test]
fn oracle_refuses_more_than_sixteen_cities() {
    let out = antgene(&["oracle", "--n", "17", "--seeds", "1"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("16"));
}

#[test]
fn bridge_output_is_deterministic() {
    let a = stdout(&antgene(&["bridge", "--seed", "5", "--iterations", "30"]));
    let b = stdout(&antgene(&["bridge", "--seed", "5", "--iterations", "30"]));
    assert_eq!(a, b);
    let mut lines = a.lines();
    assert_eq!(lines.next().unwrap(), "iteration,tau_short,tau_long,short_ants,ants");
    assert_eq!(lines.next().unwrap(), "0,1,1,0,0");
    assert_eq!(a.lines().count(), 32);
}
