use std::process::{Command, Output};

fn slising(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_slising")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn verify_norms_passes_and_is_deterministic() {
    let a = slising(&["verify", "--suite", "norms", "--no-timing"]);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    let b = slising(&["verify", "--suite", "norms", "--no-timing"]);
    assert_eq!(a.stdout, b.stdout);
    let report: serde_json::Value = serde_json::from_str(&stdout(&a)).unwrap();
    assert_eq!(report["passed"], true);
    assert_eq!(report["checks"].as_array().unwrap().len(), 2);
}

#[test]
fn verify_cancellation_suite() {
    let o = slising(&["verify", "--suite", "cancellation"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn unknown_suite_is_an_input_error() {
    assert_eq!(slising(&["verify", "--suite", "everything"]).status.code(), Some(2));
}

#[test]
fn free_energy_table() {
    let o = slising(&["free-energy", "--beta", "0.1:0.05:0.3", "--method", "both"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "beta,value,method,error_bound");
    assert_eq!(lines.len(), 1 + 2 * 5);
    assert!(lines[1].starts_with("0.1,") && lines[1].contains("onsager"));

    let near_zero = slising(&["free-energy", "--beta", "0.000001", "--method", "onsager"]);
    let value: f64 = stdout(&near_zero).lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!((value - 2f64.ln()).abs() < 1e-6);

    let both = slising(&["free-energy", "--beta", "0.8", "--method", "both"]);
    assert_eq!(both.status.code(), Some(0));
}

#[test]
fn free_energy_refuses_the_critical_point() {
    let o = slising(&["free-energy", "--beta", "0.4407", "--method", "series"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(slising(&["free-energy", "--beta", "0.4407", "--method", "onsager"]).status.code(), Some(0));
    assert_eq!(slising(&["free-energy", "--beta", "-1"]).status.code(), Some(2));
    assert_eq!(slising(&["free-energy", "--beta", "0.5:0:1"]).status.code(), Some(2));
}

#[test]
fn plus_correlations_agree() {
    let o = slising(&["correlate", "--bc", "plus", "--u", "1,1", "--v", "2,2", "--beta", "0.7", "--sizes", "3,4,5"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["agree"], true);
    assert_eq!(report["rows"].as_array().unwrap().len(), 9);
}

#[test]
fn free_correlations_respect_the_decay_bound() {
    let o = slising(&["correlate", "--bc", "free", "--u", "0,0", "--v", "2,1", "--beta", "0.3", "--sizes", "3,4"]);
    assert_eq!(o.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["decay_ok"], true);
}

#[test]
fn correlate_rejects_bad_sites() {
    let args = |u: &'static str| ["correlate", "--bc", "plus", "--u", u, "--v", "1,1", "--beta", "0.5"];
    assert_eq!(slising(&args("9,9")).status.code(), Some(2));
    assert_eq!(slising(&args("1;1")).status.code(), Some(2));
    assert_eq!(slising(&args("1,1")).status.code(), Some(2));
}

#[test]
fn partition_backends_agree() {
    let det = slising(&["partition", "--rectangle", "3x3", "--beta", "0.5", "--backend", "det", "--no-timing"]);
    let en = slising(&["partition", "--rectangle", "3x3", "--beta", "0.5", "--backend", "enum", "--no-timing"]);
    let value = |o: &Output| -> f64 {
        let first: serde_json::Value = serde_json::from_str(stdout(o).lines().next().unwrap()).unwrap();
        first["value"].as_f64().unwrap()
    };
    assert!((value(&det) - value(&en)).abs() < 1e-12);
}

#[test]
fn partition_from_graph_file() {
    let dir = std::env::temp_dir().join(format!("slising-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("square.json");
    let graph = r#"{"vertices": [{"id": 1, "x": 0, "y": 0}, {"id": 2, "x": 2, "y": 0}, {"id": 3, "x": 2, "y": 2}, {"id": 4, "x": 0, "y": 2}],
        "edges": [{"u": 1, "v": 2}, {"u": 2, "v": 3}, {"u": 3, "v": 4}, {"u": 4, "v": 1}]}"#;
    std::fs::write(&path, graph).unwrap();
    let o = slising(&["partition", "--graph", path.to_str().unwrap(), "--beta", "0.5", "--backend", "enum"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let first: serde_json::Value = serde_json::from_str(stdout(&o).lines().next().unwrap()).unwrap();
    let x = 0.5f64.tanh();
    assert!((first["value"].as_f64().unwrap() - (1.0 + x.powi(4))).abs() < 1e-14);

    std::fs::write(&path, "{not json").unwrap();
    let bad = slising(&["partition", "--graph", path.to_str().unwrap(), "--beta", "0.5"]);
    assert_eq!(bad.status.code(), Some(2));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn enumeration_cap_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_slising"))
        .args(["partition", "--rectangle", "3x3", "--beta", "0.5", "--backend", "enum"])
        .env("SLISING_MAX_EDGES", "2")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn census_lists_loops() {
    let o = slising(&["census", "--rectangle", "2x2", "--steps", "8"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 3);
    assert_eq!(slising(&["census", "--rectangle", "2x2", "--steps", "40"]).status.code(), Some(3));
}
