use std::fs;
use std::process::{Command, Output};

fn heraldsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_heraldsim"))
        .args(args)
        .env_remove("HERALDSIM_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn parse_complex(s: &str) -> (f64, f64) {
    let s = s.trim().trim_end_matches('i');
    let split = s.rfind(['+', '-']).filter(|&k| k > 0 && !s[..k].ends_with('e')).expect("re±im");
    (s[..split].parse().unwrap(), s[split..].parse().unwrap())
}

#[test]
fn lhaf_two_by_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    // lhaf [[a, b], [b, c]] = b + a c
    fs::write(&path, r#"{"base": [[[2,0],[3,0]],[[3,0],[5,0]]]}"#).unwrap();
    let out = heraldsim(&["lhaf", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout(&out).trim(), "13+0i");
}

#[test]
fn lhaf_empty_is_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    fs::write(&path, r#"{"base": []}"#).unwrap();
    let out = heraldsim(&["lhaf", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "1+0i");
}

#[test]
fn lhaf_oracle_agrees_with_repeated_rows() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    let n = 3;
    let mut rows = Vec::new();
    for i in 0..n {
        let row: Vec<String> =
            (0..n).map(|j| format!("[{}, {}]", 0.1 * (1 + i + j) as f64, 0.05 * (i * j) as f64 - 0.1)).collect();
        rows.push(format!("[{}]", row.join(",")));
    }
    fs::write(
        &path,
        format!(r#"{{"base": [{}], "loops": [0.3, [0.1, 0.2], -0.4], "reps": [2, 1, 3]}}"#, rows.join(",")),
    )
    .unwrap();
    let p = path.to_str().unwrap();
    let fast = heraldsim(&["lhaf", p]);
    let slow = heraldsim(&["lhaf", p, "--oracle"]);
    assert!(fast.status.success() && slow.status.success());
    let (a, b) = (parse_complex(&stdout(&fast)), parse_complex(&stdout(&slow)));
    let scale = a.0.hypot(a.1).max(1e-12);
    assert!((a.0 - b.0).hypot(a.1 - b.1) < 1e-10 * scale, "{a:?} vs {b:?}");
}

#[test]
fn lhaf_rejects_asymmetric_and_malformed() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    fs::write(&path, r#"{"base": [[1, 2], [3, 4]]}"#).unwrap();
    assert_eq!(heraldsim(&["lhaf", path.to_str().unwrap()]).status.code(), Some(2));
    fs::write(&path, r#"{"base": [[1, 2]]}"#).unwrap();
    assert_eq!(heraldsim(&["lhaf", path.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(heraldsim(&["lhaf", "/nonexistent/m.json"]).status.code(), Some(2));
}

#[test]
fn run_fock_preset() {
    let out = heraldsim(&["run", "--preset", "fock", "--m", "1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let p = v["probability"].as_f64().unwrap();
    assert!((p - 0.2436).abs() < 5e-4, "p = {p}");
    assert!(v["fidelity"].as_f64().unwrap() > 1.0 - 1e-9);
    assert!(v["loss_mapping"].as_str().unwrap().contains("eta1"));
}

#[test]
fn run_cubic_preset() {
    let out = heraldsim(&["run", "--preset", "cubic"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!((v["probability"].as_f64().unwrap() - 0.02).abs() < 2e-3);
    assert!(v["fidelity"].as_f64().unwrap() >= 0.99);
    assert!((v["wln"].as_f64().unwrap() - 0.224).abs() < 5e-3);
}

#[test]
fn run_from_circuit_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    fs::write(
        &path,
        r#"{"modes": 2,
            "ops": [{"type": "two_mode_squeeze", "i": 1, "j": 2, "zeta": [1.0, 0.0]},
                    {"type": "loss", "mode": 1, "eta": "eta1"}],
            "herald": [1],
            "target": {"kind": "fock", "n": 1}}"#,
    )
    .unwrap();
    let out = heraldsim(&["run", path.to_str().unwrap(), "--eta1", "0.9", "--format", "csv"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("eta1,eta2,p,F,wln,d_used,seconds"));
    assert!(lines.next().unwrap().starts_with("0.9,1,"));
}

#[test]
fn invalid_eta_is_an_input_error() {
    let out = heraldsim(&["run", "--preset", "fock", "--eta1", "1.2"]);
    assert_eq!(out.status.code(), Some(2));
    let out = heraldsim(&["sweep", "--preset", "fock", "--eta2", "0.5:1.2:3"]);
    assert_eq!(out.status.code(), Some(2));
    let out = heraldsim(&["run", "--preset", "fock", "--rel-tol", "2"]);
    assert_eq!(out.status.code(), Some(2));
    let out = heraldsim(&["sweep", "--preset", "fock", "--threads", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_grid_rows_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("s.csv");
    let prefix = dir.path().join("map");
    let out = heraldsim(&[
        "sweep",
        "--preset",
        "fock",
        "--eta1",
        "0.8:1:2",
        "--eta2",
        "0.5:1:2",
        "--out",
        csv.to_str().unwrap(),
        "--svg",
        prefix.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "eta1,eta2,p,F,wln,d_used,seconds");
    assert_eq!(lines.len(), 5);
    let cells: Vec<Vec<&str>> = lines[1..].iter().map(|l| l.split(',').collect()).collect();
    assert_eq!((cells[0][0], cells[0][1]), ("0.8", "0.5"));
    assert_eq!((cells[1][0], cells[1][1]), ("0.8", "1"));
    assert_eq!((cells[3][0], cells[3][1]), ("1", "1"));
    // the heralding probability does not depend on loss in the heralded mode
    assert_eq!(cells[0][2], cells[1][2]);
    assert_eq!(cells[2][2], cells[3][2]);
    for name in ["p", "F", "wln"] {
        let svg = fs::read_to_string(dir.path().join(format!("map-{name}.svg"))).unwrap();
        assert_eq!(svg.matches("<title>").count(), 4);
    }
}

#[test]
fn sweep_without_timing_is_reproducible() {
    let args = ["sweep", "--preset", "fock", "--r", "0.7", "--eta1", "0.6:1:3", "--eta2", "0.9", "--no-timing"];
    let a = heraldsim(&args);
    let b = heraldsim(&[&args[..], &["--threads", "1"]].concat());
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).lines().skip(1).all(|l| l.ends_with(",0")));
}

#[test]
fn cost_counts() {
    let out = heraldsim(&["cost", "--n", "1,2,20", "--d", "4", "--format", "csv"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let get = |k: &str| {
        text.lines().find_map(|l| l.strip_prefix(&format!("{k},"))).unwrap_or_else(|| panic!("{k} missing")).to_string()
    };
    assert!((get("G").parse::<f64>().unwrap() - 5.01).abs() < 0.01);
    assert!((get("A").parse::<f64>().unwrap() - 8.67).abs() < 0.01);
    // Fock brute force: d^{2ℓ} = 4^6 lattice points
    assert!(get("t''").parse::<f64>().unwrap() >= 4096.0);

    let out = heraldsim(&["cost", "--n", "1,1", "--m", "1,1", "--format", "json"]);
    let rows: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let t = rows.as_array().unwrap().iter().find(|r| r["name"] == "t").unwrap();
    assert!(t["value"].as_f64().unwrap() > 0.0);
}

#[test]
fn unwritable_output_is_an_input_error() {
    let out = heraldsim(&["sweep", "--preset", "fock", "--out", "/nonexistent/dir/out.csv"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_circuit_is_an_input_error() {
    assert_eq!(heraldsim(&["run"]).status.code(), Some(2));
}

#[test]
fn unconverged_cutoff_is_a_numerical_error() {
    let out = heraldsim(&["run", "--preset", "cat", "--d-max", "4"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn cost_small_cases() {
    let out = heraldsim(&["cost", "--n", "1,1,1", "--m", "1,1,1", "--format", "csv"]);
    assert!(stdout(&out).lines().any(|l| l == "t,256"), "{}", stdout(&out));
    let out = heraldsim(&["cost", "--n", "0", "--d", "2", "--format", "csv"]);
    assert!(stdout(&out).lines().any(|l| l == "t'',64"), "{}", stdout(&out));
}
