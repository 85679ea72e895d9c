use std::process::{Command, Output};

fn sievebound(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sievebound"))
        .args(args)
        .env("SIEVEBOUND_THREADS", "2")
        .output()
        .expect("run sievebound")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn omega_query() {
    let o = sievebound(&["omega", "2.5"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let exact = (1.0 + 1.5f64.ln()) / 2.5;
    assert!((v["omega"].as_f64().unwrap() - exact).abs() < 1e-12);
    assert_eq!(v["omega_lower"], v["omega_upper"]);
}

#[test]
fn exit_codes() {
    assert_eq!(sievebound(&["nope"]).status.code(), Some(64));
    assert_eq!(
        sievebound(&["verify", "--mode", "wavy"]).status.code(),
        Some(64)
    );
    assert_eq!(sievebound(&["omega", "0.2"]).status.code(), Some(1));
    assert_eq!(
        sievebound(&["--budget", "SC=10", "verify"]).status.code(),
        Some(1)
    );
    assert_eq!(
        sievebound(&["classify", "0.46", "0.2"]).status.code(),
        Some(0)
    );
}

#[test]
fn rational_parameters() {
    let o = sievebound(&[
        "--sigma", "1/20.31", "--varpi", "1/1400", "classify", "0.30", "0.10",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("\"class\":\"A\""));
}

#[test]
fn config_file_budgets_and_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let out = dir.path().join("report.csv");
    std::fs::write(
        &cfg,
        "# quick run\nseed = 5\nbudget_scale = 0.02\ncsv = true\n\n[budgets]\nSC = 40000\n",
    )
    .unwrap();
    let o = sievebound(&[
        "verify",
        "--config",
        cfg.to_str().unwrap(),
        "--budget",
        "SC2=30000",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert!(matches!(o.status.code(), Some(0) | Some(2)));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("name,dim,estimate,std_err,samples"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 10);
    let samples = |name: &str| -> u64 {
        rows.iter().find(|r| r[0] == name).unwrap()[4]
            .parse()
            .unwrap()
    };
    // stratified runs spend their budget up to rounding
    assert!((35_000..=40_000).contains(&samples("SC")));
    assert!((25_000..=30_000).contains(&samples("SC2")));
}

#[test]
fn verify_json_report() {
    let o = sievebound(&["verify", "--budget-scale", "0.02", "--seed", "3"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["settings"]["seed"], 3);
    let total = v["total"].as_f64().unwrap();
    let sum = ["loss_a", "loss_b", "loss_c"]
        .iter()
        .map(|k| v[k]["value"].as_f64().unwrap())
        .sum::<f64>();
    assert_eq!(total, sum);
    let verdict = v["verdict"].as_bool().unwrap();
    assert_eq!(o.status.code(), Some(if verdict { 0 } else { 2 }));
}

#[test]
fn scan_reports_each_grid_point() {
    let o = sievebound(&[
        "--budget-scale",
        "0.02",
        "scan",
        "--sigma-range",
        "0.046:0.06:2",
        "--varpi-range",
        "1/1400:1/1400:1",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let lines: Vec<serde_json::Value> = stdout(&o)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0]["verdict"].is_boolean());
    assert!(lines[1]["error"].as_str().unwrap().contains("constraint"));
}

#[test]
fn witness_squarefree() {
    let o = sievebound(&["witness", "--a", "1", "--d", "2:30", "--squarefree-only"]);
    assert_eq!(o.status.code(), Some(0));
    for line in stdout(&o).lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        let d = v["d"].as_u64().unwrap();
        assert!(![4, 8, 9, 12, 16, 18, 20, 24, 25, 27, 28].contains(&d));
    }
}
