use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

const WORKED: &str = r#"{
  "points": [{"id": "u1", "weight": 1}, {"id": "u2", "weight": 2}, {"id": "u3", "weight": 1}],
  "chain": [["u1"], ["u1", "u2"], ["u1", "u2", "u3"]],
  "functions": {"f": [4, 1, 2], "g": [1, 3, 2], "h": [3, 2, 2]}
}"#;

fn scratch(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("downcore-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_downcore")).args(args).env_remove("DOWNCORE_SEED").output().unwrap()
}

fn run_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_downcore"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn non_nested_chain_is_a_validation_error() {
    let bad = WORKED.replace(r#"[["u1"], ["u1", "u2"]"#, r#"[["u1"], ["u2"]"#);
    let path = scratch("bad.json", &bad);
    let out = run(&["validate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("NotNested"));
}

#[test]
fn validate_reports_atoms_and_gamma() {
    let path = scratch("ok.json", WORKED);
    let out = run(&["validate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["gamma"], serde_json::json!([0.0, 1.0, 3.0, 4.0]));
    assert_eq!(v["atoms"].as_array().unwrap().len(), 3);
}

#[test]
fn restrict_drops_points_outside_the_chain() {
    let partial = WORKED.replace(r#", ["u1", "u2", "u3"]"#, "");
    let path = scratch("partial.json", &partial);
    assert_eq!(run(&["level", path.to_str().unwrap()]).status.code(), Some(1));
    let out = run(&["--restrict", "level", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["ids"], serde_json::json!(["u1", "u2"]));
}

#[test]
fn full_check_passes() {
    let out = run(&["check", "--suite", "all", "--seed", "7", "--cases", "200"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json(&out)["passed"], true);
}

#[test]
fn check_output_is_deterministic_and_seed_falls_back_to_env() {
    let a = run(&["check", "--suite", "level", "--seed", "3", "--cases", "40"]);
    let b = run(&["--sequential", "check", "--suite", "level", "--seed", "3", "--cases", "40"]);
    assert_eq!(a.stdout, b.stdout);
    let c = Command::new(env!("CARGO_BIN_EXE_downcore"))
        .args(["check", "--suite", "level", "--cases", "40"])
        .env("DOWNCORE_SEED", "3")
        .output()
        .unwrap();
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn kfunc_curve_from_stdin() {
    let out = run_stdin(&["kfunc", "--couple", "l1-dinf", "--t", "0:4:17"], WORKED);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,value"));
    let rows: Vec<(f64, f64)> = lines
        .map(|l| {
            let (t, v) = l.split_once(',').unwrap();
            (t.parse().unwrap(), v.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 17);
    assert!(rows.windows(2).all(|w| w[1].1 >= w[0].1));
    assert!((rows[8].1 - 16.0 / 3.0).abs() < 1e-12);
}

#[test]
fn kfunc_oracle_agrees_with_fast_path() {
    let path = scratch("k.json", WORKED);
    let p = path.to_str().unwrap();
    for couple in ["l1-linf", "l1-dinf", "tl1-linf"] {
        let fast = run(&["kfunc", p, "--couple", couple, "--t", "0:3:4", "--format", "json"]);
        let slow = run(&["oracle", "kfunc", p, "--couple", couple, "--t", "0:3:4", "--format", "json", "--grid", "48"]);
        let (fast, slow) = (json(&fast), json(&slow));
        for (a, b) in fast["values"].as_array().unwrap().iter().zip(slow["values"].as_array().unwrap()) {
            assert!((a.as_f64().unwrap() - b.as_f64().unwrap()).abs() < 0.2, "{couple}: {a} vs {b}");
        }
    }
}

#[test]
fn worked_instance_outputs() {
    let path = scratch("w.json", WORKED);
    let p = path.to_str().unwrap();
    let level = json(&run(&["level", p]));
    assert_eq!(level["level"][0], 4.0);
    assert!((level["level"][1].as_f64().unwrap() - 4.0 / 3.0).abs() < 1e-15);

    let inf = json(&run(&["down-norm", p, "--p", "inf"]));
    assert_eq!(inf["norm"], 4.0);
    assert_eq!(inf["witness"]["points"], serde_json::json!(["u1"]));
    let two = json(&run(&["down-norm", p, "--p", "2"]));
    assert!((two["norm"].as_f64().unwrap() - 8.0 / 3f64.sqrt()).abs() < 1e-14);
    assert_eq!(two["witness"]["kind"], "level");
    let oracle = json(&run(&["down-norm", p, "--p", "2", "--method", "oracle"]));
    assert!((oracle["norm"].as_f64().unwrap() - 8.0 / 3f64.sqrt()).abs() < 1e-4);

    let d = json(&run(&["decompose", p, "--gamma", "5"]));
    assert_eq!(d["d"], serde_json::json!([1.0, 0.5, 0.0]));
    let past = json(&run(&["decompose", p, "--gamma", "12"]));
    assert_eq!(past["b_gamma"], serde_json::Value::Null);

    let tilde = json(&run(&["--function", "g", "tilde-norm", p, "--p", "1"]));
    assert_eq!(tilde["norm"], 11.0);
    assert_eq!(tilde["majorant"], serde_json::json!([3.0, 3.0, 2.0]));

    let not_decreasing = run(&["oracle", "level-sup", p, "--g", "g"]);
    assert_eq!(not_decreasing.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&not_decreasing.stderr).contains("GNotDecreasing"));
    let sup = json(&run(&["--function", "f", "oracle", "level-sup", p, "--g", "h"]));
    assert!((sup["sup"].as_f64().unwrap() - sup["level_pairing"].as_f64().unwrap()).abs() < 1e-9);
}

#[test]
fn transfer_round_trip() {
    let path = scratch("t.json", WORKED);
    let p = path.to_str().unwrap();
    let r = run(&["transfer", "r", p]);
    assert_eq!(r.status.code(), Some(0));
    let step = scratch("step.json", &stdout(&r));
    let q = json(&run(&["transfer", "q", p, "--step", step.to_str().unwrap()]));
    assert_eq!(q["values"], serde_json::json!([4.0, 1.0, 2.0]));
    let wrong = scratch("wrong.json", r#"{"positions": [1, 2, 4], "masses": [1, 1, 2], "values": [1, 1, 1]}"#);
    assert_eq!(run(&["transfer", "q", p, "--step", wrong.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn usage_and_input_errors() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(64));
    assert_eq!(run(&["kfunc", "--couple", "nope", "--t", "0:1:2"]).status.code(), Some(64));
    assert_eq!(run(&["check", "--suite", "nope"]).status.code(), Some(64));
    assert_eq!(run(&["down-norm", "--p", "0.5"]).status.code(), Some(64));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    let broken = scratch("broken.json", "{\"points\": [");
    assert_eq!(run(&["level", broken.to_str().unwrap()]).status.code(), Some(65));
    assert_eq!(run(&["level", "/nonexistent/instance.json"]).status.code(), Some(66));
}

#[test]
fn same_input_gives_identical_bytes() {
    let path = scratch("d.json", WORKED);
    let p = path.to_str().unwrap();
    for args in [vec!["level", p], vec!["kfunc", p, "--couple", "tl1-linf", "--t", "0:5:11"]] {
        assert_eq!(run(&args).stdout, run(&args).stdout);
    }
}
