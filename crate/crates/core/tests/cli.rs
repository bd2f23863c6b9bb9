use std::process::Command;

use graph_ot::graph::cycle_with_chord;
use graph_ot::io::{format_density, format_edge_list, read_document};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_graph-ot"))
}

#[test]
fn solve_from_files_writes_a_document() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("g.csv");
    let mu = dir.path().join("mu.txt");
    let nu = dir.path().join("nu.txt");
    let out = dir.path().join("run.json");
    std::fs::write(&graph, format_edge_list(&cycle_with_chord())).unwrap();
    std::fs::write(&mu, "2\n1\n1\n1\n1\n").unwrap();
    std::fs::write(&nu, format_density(&[0.2; 5])).unwrap();

    let status = bin()
        .args(["solve", "--graph"])
        .arg(&graph)
        .arg("--mu")
        .arg(&mu)
        .arg("--nu")
        .arg(&nu)
        .args(["--normalize", "--steps", "16", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(0), "{}", String::from_utf8_lossy(&status.stderr));
    let doc = read_document(&out).unwrap();
    let solve = doc.solve.unwrap();
    assert!(solve.converged);
    let traj = doc.trajectory.unwrap();
    assert_eq!(traj.densities[0], vec![1.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0]);
    assert_eq!(traj.densities[16], vec![0.2; 5]);
    assert_eq!(doc.graph.unwrap().edges, 6);
}

#[test]
fn unnormalized_file_without_flag_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let mu = dir.path().join("mu.txt");
    std::fs::write(&mu, "2\n1\n1\n1\n1\n").unwrap();
    let out = bin().args(["solve", "--complete", "5", "--mu"]).arg(&mu).arg("--nu-uniform").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "InvalidDensity");
}

#[test]
fn exit_codes() {
    let missing = bin().args(["solve", "--mu-uniform", "--nu-uniform"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(2));
    let bad_flag = bin().args(["solve", "--no-such-flag"]).output().unwrap();
    assert_eq!(bad_flag.status.code(), Some(2));
    let stalled = bin()
        .args(["solve", "--dumbbell", "3", "3", "--mu-random", "1", "--nu-random", "2", "--max-iter", "1"])
        .output()
        .unwrap();
    assert_eq!(stalled.status.code(), Some(3));
}

#[test]
fn stdout_document_is_deterministic() {
    let run = || {
        let out = bin().args(["tree-compare", "--steps", "16", "--seed", "4"]).output().unwrap();
        assert_eq!(out.status.code(), Some(0));
        let mut doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        // timings are the only nondeterministic fields
        strip_times(&mut doc);
        doc
    };
    let a = run();
    assert_eq!(a, run());
    assert!(a["extras"]["max_estimator_gap"].as_f64().unwrap() < 1e-6);
}

fn strip_times(v: &mut serde_json::Value) {
    match v {
        serde_json::Value::Object(map) => {
            map.retain(|k, _| !k.contains("time"));
            map.values_mut().for_each(strip_times);
        }
        serde_json::Value::Array(items) => items.iter_mut().for_each(strip_times),
        _ => {}
    }
}

#[test]
fn check_cfl_scenario_reports_margins() {
    let out = bin()
        .args(["check-cfl", "--complete", "5", "--mu-random", "3", "--nu-uniform", "--theta", "upwind", "--steps", "8"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(doc["extras"].is_object());
}
