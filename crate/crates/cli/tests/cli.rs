use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn dynkde(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dynkde"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn simulate_writes_indexed_csv() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("s.csv");
    stdout(&dynkde(&["simulate", "--system", "beta", "--n", "50", "--seed", "4", "--out", path(&file)]));
    let text = fs::read_to_string(&file).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("i,x"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 50);
    assert!(rows[0].starts_with("1,"));
    assert!(rows[49].starts_with("50,"));

    // Same seed, same file.
    let again = stdout(&dynkde(&["simulate", "--system", "beta", "--n", "50", "--seed", "4"]));
    assert_eq!(again, text);
}

#[test]
fn simulate_fixed_start_by_hand() {
    let text = stdout(&dynkde(&[
        "simulate", "--system", "logistic", "--n", "2", "--sigma", "0", "--x0", "0.2",
    ]));
    // 4x(1 - x) evaluated twice in binary64, printed with %.17g.
    assert_eq!(text, "i,x\n1,0.64000000000000012\n2,0.92159999999999986\n");
}

#[test]
fn collapsing_orbit_exits_with_numerical_code() {
    let out = dynkde(&["simulate", "--system", "logistic", "--n", "5", "--x0", "0.5"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn estimate_on_grid_and_query_file() {
    let dir = tempfile::tempdir().unwrap();
    let sample = dir.path().join("s.csv");
    fs::write(&sample, "i,x\n1,0.25\n2,0.75\n").unwrap();
    let text = stdout(&dynkde(&[
        "estimate", "--in", path(&sample), "--kernel", "naive", "--h", "0.25", "--queries", "grid:4",
    ]));
    assert_eq!(text, "x,fhat\n0.125,1\n0.375,1\n0.625,1\n0.875,1\n");

    let queries = dir.path().join("q.csv");
    fs::write(&queries, "x\n0.5\n2\n").unwrap();
    let text = stdout(&dynkde(&[
        "estimate", "--in", path(&sample), "--kernel", "naive", "--h", "0.25", "--queries", path(&queries),
    ]));
    assert_eq!(text, "x,fhat\n0.5,2\n2,0\n");
}

#[test]
fn select_reports_curve_and_minimizer() {
    let dir = tempfile::tempdir().unwrap();
    let sample = dir.path().join("s.csv");
    stdout(&dynkde(&["simulate", "--system", "gauss", "--n", "200", "--seed", "2", "--out", path(&sample)]));
    for selector in ["lscv", "mlscv1", "mlscv2", "dkm"] {
        let text = stdout(&dynkde(&["select", "--in", path(&sample), "--selector", selector, "--grid-count", "20"]));
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "h,score");
        assert_eq!(lines.len(), 22);
        let h_star: f64 = lines[21].strip_prefix("h_star,").unwrap().parse().unwrap();
        let scores: Vec<(f64, f64)> = lines[1..21]
            .iter()
            .map(|l| {
                let (h, s) = l.split_once(',').unwrap();
                (h.parse().unwrap(), s.parse().unwrap())
            })
            .collect();
        let best = scores.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        let first = scores.iter().find(|p| p.1 == best).unwrap();
        assert_eq!(first.0, h_star, "{selector}");
    }
}

#[test]
fn baseline_requires_system() {
    let dir = tempfile::tempdir().unwrap();
    let sample = dir.path().join("s.csv");
    stdout(&dynkde(&["simulate", "--system", "gauss", "--n", "100", "--out", path(&sample)]));
    let out = dynkde(&["select", "--in", path(&sample), "--selector", "baseline"]);
    assert_eq!(out.status.code(), Some(2));
    let text = stdout(&dynkde(&[
        "select", "--in", path(&sample), "--selector", "baseline", "--system", "gauss", "--grid-count", "10",
        "--ame-m", "1000",
    ]));
    assert!(text.lines().last().unwrap().starts_with("h_star,"));
}

#[test]
fn rates_and_thresholds() {
    let text = stdout(&dynkde(&["rates", "--case", "compact", "--n", "10000"]));
    let values: Vec<f64> = text
        .lines()
        .map(|l| l.split_once(',').unwrap().1.parse().unwrap())
        .collect();
    assert!((values[0] - 0.42746).abs() < 1e-4);
    assert_eq!(values[0], values[1]);

    let text = stdout(&dynkde(&["rates", "--case", "exp", "--n", "10000", "--eta", "2", "--a", "1"]));
    assert!(text.starts_with("h_n,"));
    assert_eq!(dynkde(&["rates", "--case", "exp", "--n", "10000"]).status.code(), Some(2));
    assert_eq!(dynkde(&["rates", "--case", "compact", "--n", "2"]).status.code(), Some(2));

    assert_eq!(stdout(&dynkde(&["thresholds", "--mode", "n1", "--h", "0.5"])), "75\n");
    assert_eq!(stdout(&dynkde(&["thresholds", "--mode", "n0star", "--h", "0.5"])), "75\n");
    assert_eq!(stdout(&dynkde(&["thresholds", "--mode", "n2", "--r", "1"])), "75\n");
    let out = dynkde(&["thresholds", "--mode", "n2", "--r", "1", "--c0", "1e30"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn experiment_report_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.cfg");
    fs::write(
        &cfg,
        "systems = gauss\nsample_sizes = 100\nreplications = 2\nselectors = dkm, baseline\nmaster_seed = 3\name_m = 500\ngrid_count = 10\n",
    )
    .unwrap();
    let csv = dir.path().join("r.csv");
    stdout(&dynkde(&[
        "experiment", "--config", path(&cfg), "--out-report", path(&csv), "--threads", "1",
    ]));
    let text = fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "system,n,selector,mean_ame,std_ame");
    assert!(lines[1].starts_with("gauss,100,dkm,"));
    assert!(lines[2].starts_with("gauss,100,baseline,"));
    assert_eq!(lines.len(), 3);

    let json = dir.path().join("r.json");
    stdout(&dynkde(&[
        "experiment", "--config", path(&cfg), "--out-report", path(&json), "--format", "json",
    ]));
    let text = fs::read_to_string(&json).unwrap();
    assert!(text.contains("\"ames\""));

    let bad = dir.path().join("bad.cfg");
    fs::write(&bad, "replications = 0\n").unwrap();
    let out = dynkde(&["experiment", "--config", path(&bad), "--out-report", path(&csv)]);
    assert_eq!(out.status.code(), Some(2));
    let missing = dir.path().join("missing.cfg");
    let out = dynkde(&["experiment", "--config", path(&missing), "--out-report", path(&csv)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn curves_have_fixed_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.csv");
    stdout(&dynkde(&["curves", "--system", "gauss", "--n", "500", "--seed", "1", "--out", path(&out)]));
    let text = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "u,f_true,f_baseline,f_dkm");
    assert_eq!(lines.len(), 101);
    assert!(lines[1].starts_with("0.0050000000000000001,"));
}

#[test]
fn unknown_names_are_usage_errors() {
    assert_eq!(dynkde(&["simulate", "--system", "tent", "--n", "5"]).status.code(), Some(2));
    let out = dynkde(&["select", "--in", "x.csv", "--selector", "plugin"]);
    assert_eq!(out.status.code(), Some(2));
}
