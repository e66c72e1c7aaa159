use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

use s1graph::morphisms::counterexample_pair;
use s1graph::rational::qi;
use s1graph::surgery::minimal_cp2;

fn dir(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("s1graph-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn fixtures(name: &str) -> (PathBuf, PathBuf, PathBuf) {
    let d = dir(name);
    let (m, n) = counterexample_pair();
    let cp2 = minimal_cp2(2, 1, &qi(1)).unwrap();
    let paths = (d.join("m.json"), d.join("n.json"), d.join("cp2.json"));
    std::fs::write(&paths.0, m.to_json_string()).unwrap();
    std::fs::write(&paths.1, n.to_json_string()).unwrap();
    std::fs::write(&paths.2, cp2.to_json_string()).unwrap();
    paths
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_s1graph")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn s(p: &PathBuf) -> &str {
    p.to_str().unwrap()
}

#[test]
fn weak_iso_names_the_partial_flip() {
    let (m, n, _) = fixtures("weak");
    let o = run(&["weak-iso", s(&m), s(&n)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "isomorphic via: partial_flip(chain 2)");
}

#[test]
fn obstruct_reports_weight_multisets() {
    let (m, n, _) = fixtures("obstruct");
    let o = run(&["obstruct", s(&m), s(&n)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "equivariant diffeomorphism obstructed: weight multisets");
}

#[test]
fn not_isomorphic_exits_one() {
    let (m, _, cp2) = fixtures("noniso");
    let o = run(&["weak-iso", s(&m), s(&cp2)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("not isomorphic"));
}

#[test]
fn validate_prints_extremal_values() {
    let (_, _, cp2) = fixtures("validate");
    let o = run(&["validate", s(&cp2)]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("e_min=-1/2"), "{out}");
    assert!(out.contains("e_max=-1/2"), "{out}");
}

#[test]
fn invalid_graph_exits_one() {
    let d = dir("invalid");
    let p = d.join("bad.json");
    std::fs::write(&p, r#"{"genus":0,"min":{"fat":false,"height":"0"},"max":{"fat":false,"height":"1"},"chains":[{"edges":[{"m":1,"len":"1"}]}]}"#).unwrap();
    assert_eq!(run(&["validate", s(&p)]).status.code(), Some(1));
    let missing = d.join("missing.json");
    assert_eq!(run(&["dull", s(&missing)]).status.code(), Some(1));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(run(&["intersect"]).status.code(), Some(2));
}

#[test]
fn output_is_deterministic() {
    let (m, n, _) = fixtures("determinism");
    for args in [vec!["report", s(&m)], vec!["--machine", "weak-iso", s(&m), s(&n)], vec!["bounds", s(&n)]] {
        assert_eq!(stdout(&run(&args)), stdout(&run(&args)));
    }
}

#[test]
fn machine_output_is_json() {
    let (m, n, cp2) = fixtures("machine");
    for args in [
        vec!["--machine", "presentation", s(&cp2)],
        vec!["--machine", "reduce", s(&m)],
        vec!["--machine", "bounds", s(&cp2)],
        vec!["--machine", "obstruct", s(&m), s(&n)],
        vec!["--machine", "flip", s(&m), "--kind", "full"],
    ] {
        let o = run(&args);
        let v: Value = serde_json::from_str(&stdout(&o)).unwrap_or_else(|e| panic!("{args:?}: {e}"));
        assert!(v.is_object(), "{args:?}");
    }
}

#[test]
fn recover_round_trip_through_files() {
    let (m, _, _) = fixtures("recover");
    let d = dir("recover-out");
    let xi = d.join("xi.json");
    let o = run(&["--machine", "xi", "--omega", s(&m)]);
    assert_eq!(o.status.code(), Some(0));
    std::fs::write(&xi, o.stdout).unwrap();
    let back = run(&["--machine", "recover", s(&xi)]);
    assert_eq!(back.status.code(), Some(0));
    let g = s1graph::graph_model::parse_graph(&stdout(&back)).unwrap();
    assert_eq!(g, counterexample_pair().0.normalized().0);
}

#[test]
fn fiber_classification() {
    let o = run(&["fiber", "--p", "0", "--q", "1", "--genus", "2", "--parity", "0"]);
    assert_eq!(stdout(&o).trim(), "fiber");
    let o = run(&["fiber", "--p", "-1", "--q", "0", "--genus", "2", "--parity", "0"]);
    assert_eq!(stdout(&o).trim(), "neither: ω(A) is not positive");
}

#[test]
fn quiet_prints_nothing() {
    let (m, n, _) = fixtures("quiet");
    let o = run(&["--quiet", "weak-iso", s(&m), s(&n)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
}
