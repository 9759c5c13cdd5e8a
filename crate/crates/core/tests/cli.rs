use std::fs;
use std::path::Path;

use halftheta::cli::{run, EXIT_FLAVOR, EXIT_INVALID, EXIT_OK, EXIT_PARSE};
use halftheta::graph::{format_points, parse_graph, random_general_position};
use halftheta::router::parse_trace;

fn go(args: &[&str]) -> i32 {
    run(std::iter::once("halftheta").chain(args.iter().copied()))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_points(dir: &Path, n: usize, seed: u64) -> std::path::PathBuf {
    let path = dir.join("points.txt");
    fs::write(&path, format_points(&random_general_position(n, seed, &[0.0]))).unwrap();
    path
}

#[test]
fn build_route_render_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let pts = write_points(dir.path(), 30, 5);
    let graph = dir.path().join("g.txt");
    assert_eq!(go(&["build", "--points", s(&pts), "--graph", "half6", "-o", s(&graph)]), EXIT_OK);
    let g = parse_graph(&fs::read_to_string(&graph).unwrap()).unwrap();
    assert_eq!(g.len(), 30);
    assert!(g.edge_count() <= 3 * 30 - 6);
    assert!(halftheta::harness::crossing_edges(&g).is_empty());

    let trace = dir.path().join("t.txt");
    for algo in ["stateless", "stateful"] {
        assert_eq!(
            go(&["route", "--graph", s(&graph), "--from", "3", "--to", "17", "--algo", algo, "--trace", s(&trace)]),
            EXIT_OK
        );
        let t = parse_trace(&fs::read_to_string(&trace).unwrap()).unwrap();
        assert!(t.total <= t.bound * (1.0 + 1e-9));
        assert_eq!(t.steps.first().unwrap().0, 3);
        assert_eq!(t.steps.last().unwrap().1, 17);
    }

    let svg = dir.path().join("g.svg");
    assert_eq!(
        go(&["export-svg", "--graph", s(&graph), "--trace", s(&trace), "--triangle", "3", "17", "-o", s(&svg)]),
        EXIT_OK
    );
    let text = fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<svg"));
    assert_eq!(text.matches("class=\"vertex\"").count(), 30);
    assert_eq!(text.matches("class=\"edge\"").count(), g.edge_count());
    assert!(text.contains("class=\"trace\""));
    assert!(text.contains("<polygon"));
    // Rendering is deterministic.
    let again = dir.path().join("g2.svg");
    go(&["export-svg", "--graph", s(&graph), "--trace", s(&trace), "--triangle", "3", "17", "-o", s(&again)]);
    assert_eq!(text, fs::read_to_string(&again).unwrap());
}

#[test]
fn bounded_degree_pipeline_writes_hints() {
    let dir = tempfile::tempdir().unwrap();
    let pts = write_points(dir.path(), 40, 9);
    let g9 = dir.path().join("g9.txt");
    assert_eq!(go(&["build", "--points", s(&pts), "--graph", "g9", "-o", s(&g9)]), EXIT_OK);
    assert!(dir.path().join("g9.txt.hints").exists());
    let g = parse_graph(&fs::read_to_string(&g9).unwrap()).unwrap();
    assert!(g.max_degree() <= 9);
    let trace = dir.path().join("t.txt");
    assert_eq!(
        go(&["route", "--graph", s(&g9), "--from", "0", "--to", "39", "--algo", "g9", "--trace", s(&trace)]),
        EXIT_OK
    );

    let g12 = dir.path().join("g12.txt");
    assert_eq!(go(&["build", "--points", s(&pts), "--graph", "g12", "-o", s(&g12)]), EXIT_OK);
    assert_eq!(
        go(&["route", "--graph", s(&g12), "--from", "5", "--to", "6", "--algo", "g12", "--trace", s(&trace)]),
        EXIT_OK
    );
}

#[test]
fn exit_codes_for_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let pts = write_points(dir.path(), 20, 1);
    let graph = dir.path().join("g.txt");
    let trace = dir.path().join("t.txt");
    assert_eq!(go(&["build", "--points", s(&pts), "--graph", "half6", "-o", s(&graph)]), EXIT_OK);

    // Router and graph flavors disagree.
    assert_eq!(
        go(&["route", "--graph", s(&graph), "--from", "0", "--to", "1", "--algo", "g12", "--trace", s(&trace)]),
        EXIT_FLAVOR
    );
    // Out-of-range vertex.
    assert_eq!(
        go(&["route", "--graph", s(&graph), "--from", "0", "--to", "20", "--algo", "stateless", "--trace", s(&trace)]),
        EXIT_INVALID
    );
    // Two points on a horizontal line break general position.
    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "0 0\n0.5 0\n0.3 0.9\n").unwrap();
    assert_eq!(go(&["build", "--points", s(&bad), "--graph", "half6", "-o", s(&graph)]), EXIT_INVALID);
    // Unparsable and missing files.
    fs::write(&bad, "0 zero\n").unwrap();
    assert_eq!(go(&["build", "--points", s(&bad), "--graph", "half6", "-o", s(&graph)]), EXIT_PARSE);
    let missing = dir.path().join("missing.txt");
    assert_eq!(go(&["build", "--points", s(&missing), "--graph", "half6", "-o", s(&graph)]), EXIT_PARSE);
    assert_eq!(go(&["frobnicate"]), EXIT_PARSE);
    assert_eq!(go(&["build", "--points", s(&pts), "--graph", "half7", "-o", s(&graph)]), EXIT_PARSE);
}

#[test]
fn verify_and_lowerbound_commands() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.tsv");
    assert_eq!(
        go(&["verify", "--check", "spanning", "--trials", "3", "--n", "25", "--seed", "4", "--report", s(&report)]),
        EXIT_OK
    );
    assert!(fs::read_to_string(&report).unwrap().contains("# max_ratio="));
    for check in ["routing", "potential", "degree", "planarity", "triangulation", "g9-spanner"] {
        assert_eq!(go(&["verify", "--check", check, "--trials", "2", "--n", "25"]), EXIT_OK, "{check}");
    }
    assert_eq!(go(&["verify", "--check", "routing", "--algo", "g9", "--trials", "2", "--n", "25"]), EXIT_OK);

    let pos = dir.path().join("pos.txt");
    assert_eq!(go(&["lowerbound", "--mode", "positive", "--alpha", "0.2", "--epsilon", "1e-4", "-o", s(&pos)]), EXIT_OK);
    assert!(dir.path().join("pos.txt.manifest").exists());
    let neg = dir.path().join("neg");
    assert_eq!(go(&["lowerbound", "--mode", "negative", "--alpha", "0", "--epsilon", "1e-4", "-o", s(&neg)]), EXIT_OK);
    assert!(dir.path().join("neg-a.txt").exists() && dir.path().join("neg-b.txt").exists());
    assert_eq!(
        go(&["lowerbound", "--mode", "negative", "--alpha", "0", "--epsilon", "1e-4", "--k", "2", "-o", s(&neg)]),
        EXIT_INVALID
    );
}
