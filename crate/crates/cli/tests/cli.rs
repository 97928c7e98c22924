use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn run(args: &[&str], stdin: Option<&str>) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_normpair"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    if let Some(text) = stdin {
        child
            .stdin
            .take()
            .unwrap()
            .write_all(text.as_bytes())
            .unwrap();
    }
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

fn generate(dir: &Path, name: &str, args: &[&str]) -> String {
    let o = run(args, None);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let path = dir.join(name);
    std::fs::write(&path, &o.stdout).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn width_of_bigons() {
    let pair = stdout(&run(&["generate", "fixture", "--name", "bigons"], None));
    let o = run(&["width", "-"], Some(&pair));
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["width"], 2);
    assert_eq!(v["path"].as_array().unwrap().len(), 3);
}

#[test]
fn reports_start_with_schema_version() {
    let pair = stdout(&run(
        &["generate", "fixture", "--name", "two-circles"],
        None,
    ));
    for cmd in ["validate", "width", "analyze", "account"] {
        let o = run(&[cmd, "-"], Some(&pair));
        assert_eq!(o.status.code(), Some(0), "{cmd}");
        let text = stdout(&o);
        let first_key = text.lines().nth(1).unwrap().trim();
        assert_eq!(first_key, "\"schema_version\": 1,", "{cmd}");
        assert_eq!(json(&o)["command"], cmd);
    }
}

#[test]
fn default_torus_has_width_five() {
    let dir = tempfile::tempdir().unwrap();
    let pair = generate(dir.path(), "torus.json", &["generate", "torus"]);
    let o = run(&["analyze", &pair], None);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["surface"], "torus");
    assert_eq!(v["width"], 5);
    for l in v["loops"].as_array().unwrap() {
        assert_eq!(l["contractible"], false);
    }
}

#[test]
fn output_is_deterministic_across_jobs() {
    let dir = tempfile::tempdir().unwrap();
    let pair = generate(dir.path(), "t.json", &["generate", "torus", "--m", "6"]);
    let a = stdout(&run(&["analyze", &pair, "--jobs", "1"], None));
    let b = stdout(&run(&["analyze", &pair, "--jobs", "4"], None));
    assert_eq!(a, b);
    let p1 = stdout(&run(
        &["generate", "polytope", "--n", "9", "--seed", "3"],
        None,
    ));
    let p2 = stdout(&run(
        &["generate", "polytope", "--n", "9", "--seed", "3"],
        None,
    ));
    assert_eq!(p1, p2);
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("w.json");
    let pair = stdout(&run(&["generate", "fixture", "--name", "bigons"], None));
    let o = run(&["width", "-", "--out", out.to_str().unwrap()], Some(&pair));
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(v["width"], 2);
}

#[test]
fn malformed_input_exits_two() {
    assert_eq!(run(&["width", "-"], Some("{")).status.code(), Some(2));
    assert_eq!(
        run(&["width", "/nonexistent/pair.json"], None)
            .status
            .code(),
        Some(2)
    );
    assert_eq!(run(&["frobnicate"], None).status.code(), Some(2));
    assert_eq!(
        run(&["generate", "torus", "--m", "1"], None).status.code(),
        Some(2)
    );
}

#[test]
fn validation_failures_exit_one() {
    let bigons = stdout(&run(&["generate", "fixture", "--name", "bigons"], None));
    // Bigons are not strongly normal, so accounting refuses them.
    assert_eq!(run(&["account", "-"], Some(&bigons)).status.code(), Some(1));
    let o = run(&["account", "-", "--unchecked"], Some(&bigons));
    assert_eq!(json(&o)["identity_holds"], true);
    let mut v: Value = serde_json::from_str(&bigons).unwrap();
    v["contacts"] = serde_json::json!([{"plus_vertex": 0, "minus_edge": 1}]);
    let o = run(&["width", "-"], Some(&v.to_string()));
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("degenerate"));
}

#[test]
fn prismatoid_of_cube_and_octahedron() {
    let dir = tempfile::tempdir().unwrap();
    let cube = dir.path().join("cube.json");
    let octa = dir.path().join("octa.json");
    let pts = |v: &[[i64; 3]]| serde_json::json!({ "vertices": v }).to_string();
    let mut c = Vec::new();
    for x in [-1, 1] {
        for y in [-1, 1] {
            for z in [-1, 1] {
                c.push([x, y, z]);
            }
        }
    }
    std::fs::write(&cube, pts(&c)).unwrap();
    std::fs::write(
        &octa,
        pts(&[
            [1, 0, 0],
            [-1, 0, 0],
            [0, 1, 0],
            [0, -1, 0],
            [0, 0, 1],
            [0, 0, -1],
        ]),
    )
    .unwrap();
    let (c, o) = (cube.to_str().unwrap(), octa.to_str().unwrap());
    let out = run(&["prismatoid", "--plus", c, "--minus", o], None);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["width"], 4);
    let same = run(&["prismatoid", "--plus", c, "--minus", c], None);
    assert_eq!(json(&same)["candidates"], serde_json::json!([2]));
    let lifted = run(&["lift", "--plus", c, "--minus", o], None);
    assert_eq!(lifted.status.code(), Some(0));
    let q4 = dir.path().join("q4.json");
    std::fs::write(&q4, &lifted.stdout).unwrap();
    let again = run(&["prismatoid", "--prismatoid", q4.to_str().unwrap()], None);
    assert_eq!(json(&again)["width"], 4);
}

#[test]
fn exports() {
    let pair = stdout(&run(
        &["generate", "fixture", "--name", "two-circles"],
        None,
    ));
    let dot = stdout(&run(&["export", "-", "--format", "dot"], Some(&pair)));
    assert!(dot.starts_with("graph") || dot.contains("graph "));
    assert!(dot.contains("shape=square") && dot.contains("shape=point"));
    let o = run(&["export", "-", "--format", "json"], Some(&pair));
    assert_eq!(o.status.code(), Some(0));
    json(&o);
}
