use std::path::PathBuf;
use std::process::{Command, Output};

use sdplift::lift::json;
use sdplift::sdp::{sdpa, solve};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sdplift"))
        .args(args)
        .env_remove("SDPLIFT_TOL_GAP")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json_out(args: &[&str]) -> (serde_json::Value, i32) {
    let mut a = vec!["--json"];
    a.extend_from_slice(args);
    let o = run(&a);
    (serde_json::from_slice(&o.stdout).unwrap_or(serde_json::Value::Null), o.status.code().unwrap())
}

#[test]
fn check_reports() {
    let (v, code) = json_out(&["check", fixture("example3.json").to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(v["all_certified"], true);
    assert_eq!(v["partition"], serde_json::json!([[1, 2]]));

    let (v, code) = json_out(&["check", fixture("example1_printed.json").to_str().unwrap()]);
    assert_eq!(code, 0);
    let c = &v["constraints"][0];
    assert_eq!(c["status"], "refuted");
    let w: Vec<f64> = serde_json::from_value(c["witness"].clone()).unwrap();
    assert!(w[0].abs() < 1e-3 && (w[1] - 1.0).abs() < 1e-3);

    let o = run(&["check", fixture("example5_2.json").to_str().unwrap()]);
    let text = stdout(&o);
    assert!(text.contains("not-concave"));
    assert!(text.contains("curvature"));
}

#[test]
fn lift_sizes_and_refusal() {
    let (v, code) = json_out(&["lift", fixture("example1.json").to_str().unwrap(), "-o", "/dev/null"]);
    assert_eq!(code, 0);
    assert_eq!(v["pencil_dims"], serde_json::json!([6]));
    assert_eq!(v["aux_count"], 12);

    let (v, _) = json_out(&["lift", fixture("example4_2_2.json").to_str().unwrap(), "--mode", "sparse", "-o", "/dev/null"]);
    assert_eq!(v["pencil_dims"], serde_json::json!([3, 3]));

    let o = run(&["lift", fixture("example1_printed.json").to_str().unwrap(), "--mode", "sparse"]);
    assert_eq!(o.status.code(), Some(3));
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("forced.json");
    let o = run(&["lift", fixture("example1_printed.json").to_str().unwrap(), "--mode", "sparse", "--force", "-o", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains("warnings"));
    assert!(json::from_json(&text).is_ok());
}

#[test]
fn written_lifts_resolve() {
    let dir = tempfile::tempdir().unwrap();
    let js = dir.path().join("e3.json");
    let dat = dir.path().join("e3.dat-s");
    let p = fixture("example3.json");
    assert!(run(&["lift", p.to_str().unwrap(), "--mode", "sparse", "-o", js.to_str().unwrap()]).status.success());
    assert!(run(&["lift", p.to_str().unwrap(), "--mode", "sparse", "--out", "sdpa", "--objective=-1,0", "-o", dat.to_str().unwrap()])
        .status
        .success());
    let (v, code) = json_out(&["optimize", p.to_str().unwrap(), "--mode", "sparse", "--objective=-1,0"]);
    assert_eq!(code, 0);
    let value = v["value"].as_f64().unwrap();
    let rep = json::from_json(&std::fs::read_to_string(&js).unwrap()).unwrap();
    assert!((rep.minimize(&[-1.0, 0.0]).unwrap().value - value).abs() <= 1e-12);
    let r = solve(&sdpa::read(&std::fs::read_to_string(&dat).unwrap()).unwrap()).unwrap();
    assert!((-r.value - value).abs() <= 1e-9);
}

#[test]
fn verify_and_curvature_exit_codes() {
    let (v, code) = json_out(&["verify", fixture("example1.json").to_str().unwrap(), "--samples", "40", "--seed", "3"]);
    assert_eq!(code, 0);
    assert_eq!(v["pass"], true);
    let (v, code) = json_out(&["verify", fixture("disk.json").to_str().unwrap(), "--samples", "20", "--box=-2:2,-2:2"]);
    assert_eq!(code, 0);
    assert_eq!(v["box"], serde_json::json!([[-2.0, 2.0], [-2.0, 2.0]]));

    let (v, _) = json_out(&["curvature", fixture("flat.json").to_str().unwrap(), "--samples", "16"]);
    assert_eq!(v["verdict"], "curvature-failure");
    let (v, _) = json_out(&["curvature", fixture("example5_3.json").to_str().unwrap()]);
    assert_eq!(v["verdict"], "positively-curved-on-samples");
}

#[test]
fn verify_failure_exits_four() {
    // a non-concave constraint: the dense relaxation is strictly larger than the set
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    std::fs::write(&p, r#"{"variables":["x1","x2"],"constraints":["1 - x1^4 - x2^4 + 3/2*x1^2*x2^2 >= 0"],"box":[[-2,2],[-2,2]]}"#).unwrap();
    let o = run(&["verify", p.to_str().unwrap(), "--samples", "40"]);
    assert_eq!(o.status.code(), Some(4), "{}", stdout(&o));
}

#[test]
fn deterministic_and_parse_errors() {
    let args = ["--json", "verify", fixture("example4_2_2.json").to_str().unwrap().to_string().leak(), "--samples", "20", "--seed", "9"];
    assert_eq!(run(&args).stdout, run(&args).stdout);

    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    std::fs::write(&p, r#"{"variables":["x"],"constraints":["1 - x^^2 >= 0"]}"#).unwrap();
    let o = run(&["check", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
    assert_eq!(run(&["optimize", fixture("example1.json").to_str().unwrap(), "--objective", "1"]).status.code(), Some(2));
    assert_eq!(run(&["verify", fixture("example1.json").to_str().unwrap(), "--box", "1:0,0:1"]).status.code(), Some(2));
}

#[test]
fn tolerance_env_var() {
    let o = Command::new(env!("CARGO_BIN_EXE_sdplift"))
        .args(["--json", "optimize", fixture("example1.json").to_str().unwrap(), "--objective", "1,0"])
        .env("SDPLIFT_TOL_GAP", "1e-3")
        .output()
        .unwrap();
    let loose: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let (tight, _) = json_out(&["optimize", fixture("example1.json").to_str().unwrap(), "--objective", "1,0"]);
    assert!(loose["iterations"].as_u64().unwrap() < tight["iterations"].as_u64().unwrap());
    assert!((loose["value"].as_f64().unwrap() + 1.0).abs() < 1e-2);
}
