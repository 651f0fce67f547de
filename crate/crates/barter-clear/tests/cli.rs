//! End-to-end tests of the command-line interface, run in-process against
//! injected streams, plus one smoke test of the real binary.

use std::path::Path;
use std::process::Command;

use barter_clear::cli::{self, EXIT_GUARD, EXIT_INPUT, EXIT_OK, EXIT_USAGE};
use barter_clear::clearing::parse_solution;
use barter_clear::instance::{parse_instance, serialize_duals, serialize_instance, DualVector};

fn run(args: &[&str]) -> (i32, String, String) {
    let mut stdout = Vec::new();
    let mut stderr = Vec::new();
    let argv = std::iter::once("barter-clear").chain(args.iter().copied());
    let code = cli::run(argv, &mut stdout, &mut stderr);
    (
        code,
        String::from_utf8(stdout).expect("utf-8 stdout"),
        String::from_utf8(stderr).expect("utf-8 stderr"),
    )
}

fn write_counterexample(dir: &Path) -> (String, String) {
    let instance_path = dir.join("ce_instance.json");
    let duals_path = dir.join("ce_duals.json");
    let (instance, duals) = barter_clear::instance::counterexample_instance();
    std::fs::write(&instance_path, serialize_instance(&instance).unwrap()).unwrap();
    std::fs::write(&duals_path, serialize_duals(&duals).unwrap()).unwrap();
    (
        instance_path.to_str().unwrap().to_string(),
        duals_path.to_str().unwrap().to_string(),
    )
}

#[test]
fn counterexample_reports_the_divergence() {
    let dir = tempfile::tempdir().unwrap();
    let out_instance = dir.path().join("instance.json");
    let out_duals = dir.path().join("duals.json");
    let (code, stdout, stderr) = run(&[
        "counterexample",
        "--out-instance",
        out_instance.to_str().unwrap(),
        "--out-duals",
        out_duals.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK, "stderr: {stderr}");
    assert!(stdout.contains("heuristic chain pricing (K=5): found=false"));
    assert!(stdout.contains("exact chain pricing (K=5): found=true"));
    assert!(stdout.contains("chain [0, 5, 2, 3, 4, 1], reduced weight -1"));
    // The written fixture re-parses and matches the library fixture.
    let text = std::fs::read_to_string(&out_instance).unwrap();
    let parsed = parse_instance(&text).unwrap();
    let (expected, _) = barter_clear::instance::counterexample_instance();
    assert_eq!(parsed, expected);
    let duals = barter_clear::instance::parse_duals(
        &std::fs::read_to_string(&out_duals).unwrap(),
    )
    .unwrap();
    assert_eq!(duals, DualVector::zeros(&expected));
}

#[test]
fn price_with_no_altruists_finds_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let instance_path = dir.path().join("pairs_only.json");
    let duals_path = dir.path().join("duals.json");
    std::fs::write(
        &instance_path,
        r#"{"L": 3, "K": 4,
            "vertices": [{"id": 0, "kind": "pair"}, {"id": 1, "kind": "pair"}],
            "edges": [{"src": 0, "dst": 1, "w": 1.0}, {"src": 1, "dst": 0, "w": 1.0}]}"#,
    )
    .unwrap();
    std::fs::write(&duals_path, r#"{"delta": {"0": 0.0, "1": 0.0}}"#).unwrap();
    let (code, stdout, _) = run(&[
        "price",
        instance_path.to_str().unwrap(),
        "--duals",
        duals_path.to_str().unwrap(),
        "--algo",
        "exact",
    ]);
    assert_eq!(code, EXIT_OK);
    assert!(stdout.contains("\"found\": false"));
    assert!(stdout.contains("\"witness\": null"));
}

#[test]
fn price_runs_every_algorithm_on_the_counterexample() {
    let dir = tempfile::tempdir().unwrap();
    let (instance_path, duals_path) = write_counterexample(dir.path());
    for (algo, needle) in [
        ("heuristic", "\"found\": false"),
        ("exact", "\"found\": true"),
        ("cycle", "\"found\": false"),
        ("oracle", "\"neg_chains\""),
    ] {
        let (code, stdout, stderr) = run(&[
            "price",
            &instance_path,
            "--duals",
            &duals_path,
            "--algo",
            algo,
        ]);
        assert_eq!(code, EXIT_OK, "algo {algo}: {stderr}");
        assert!(stdout.contains(needle), "algo {algo} output: {stdout}");
    }
    // Best mode reports the minimum-weight chain.
    let (code, stdout, _) = run(&[
        "price", &instance_path, "--duals", &duals_path, "--algo", "exact", "--best",
    ]);
    assert_eq!(code, EXIT_OK);
    assert!(stdout.contains("\"reduced_weight\": -1.0"));
}

#[test]
fn solve_objective_matches_recomputed_column_weights() {
    let dir = tempfile::tempdir().unwrap();
    let (instance_path, _) = write_counterexample(dir.path());
    for flags in [&[][..], &["--brute-force"][..]] {
        let mut args = vec!["solve", instance_path.as_str()];
        args.extend_from_slice(flags);
        let (code, stdout, stderr) = run(&args);
        assert_eq!(code, EXIT_OK, "{stderr}");
        let doc = parse_solution(&stdout).unwrap();
        // Recompute every column's weight from the instance file itself.
        let instance =
            parse_instance(&std::fs::read_to_string(&instance_path).unwrap()).unwrap();
        let mut total = 0.0;
        for column in &doc.columns {
            let mut weight = 0.0;
            let ids = &column.vertices;
            let arcs: Vec<(usize, usize)> = match column.kind.as_str() {
                "chain" => ids.windows(2).map(|w| (w[0], w[1])).collect(),
                "cycle" => (0..ids.len())
                    .map(|i| (ids[i], ids[(i + 1) % ids.len()]))
                    .collect(),
                other => panic!("unexpected kind {other}"),
            };
            for (u, v) in arcs {
                weight += instance
                    .edge_between(
                        barter_clear::instance::VertexId(u),
                        barter_clear::instance::VertexId(v),
                    )
                    .expect("solution edge exists")
                    .weight;
            }
            assert!((weight - column.weight).abs() <= 1e-9);
            total += weight;
        }
        assert!((total - doc.objective).abs() <= 1e-9);
    }
}

#[test]
fn gen_output_reparses_and_respects_flags() {
    let (code, stdout, _) = run(&[
        "gen", "--pairs", "5", "--altruists", "1", "--density", "1.0", "--seed", "7",
        "--L", "3", "--K", "4", "--wmin", "1", "--wmax", "1",
    ]);
    assert_eq!(code, EXIT_OK);
    let instance = parse_instance(&stdout).unwrap();
    assert_eq!(instance.num_pairs(), 5);
    assert_eq!(instance.num_altruists(), 1);
    assert_eq!(instance.edges().len(), 25);
}

#[test]
fn reduce_emits_a_valid_instance_document() {
    let dir = tempfile::tempdir().unwrap();
    let digraph_path = dir.path().join("h.json");
    std::fs::write(&digraph_path, r#"{"n": 3, "arcs": [[0, 1], [1, 2]]}"#).unwrap();
    let duals_out = dir.path().join("zeros.json");

    let (code, stdout, _) = run(&[
        "reduce",
        digraph_path.to_str().unwrap(),
        "--duals-out",
        duals_out.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK);
    let instance = parse_instance(&stdout).unwrap();
    assert_eq!(instance.num_altruists(), 1);
    assert_eq!(instance.chain_cap(), 3);
    let duals =
        barter_clear::instance::parse_duals(&std::fs::read_to_string(&duals_out).unwrap())
            .unwrap();
    assert!(duals.iter().all(|(_, x)| x == 0.0));

    let (code, stdout, _) = run(&["reduce", digraph_path.to_str().unwrap(), "--general", "--L", "3"]);
    assert_eq!(code, EXIT_OK);
    let general = parse_instance(&stdout).unwrap();
    assert_eq!(general.cycle_cap(), 3);
    assert_eq!(general.chain_cap(), 1 + 2 * 3);
}

#[test]
fn bench_emits_deterministic_csv() {
    let args = [
        "bench", "--trials", "5", "--seed", "11", "--pairs", "5", "--altruists", "1",
        "--density", "0.5", "--L", "3", "--K", "4",
    ];
    let (code, first, _) = run(&args);
    assert_eq!(code, EXIT_OK);
    let (_, second, _) = run(&args);
    assert_eq!(first, second, "bench output must be byte-identical");
    let mut lines = first.lines();
    assert_eq!(
        lines.next().unwrap(),
        "trial,pairs,altruists,density,L,K,heuristic_found,exact_found,agree,\
         heuristic_false_negative,heuristic_labels,exact_nodes"
    );
    assert_eq!(lines.count(), 5);
    // Timings add two columns and are allowed to differ between runs.
    let mut with_timings = args.to_vec();
    with_timings.push("--timings");
    let (code, timed, _) = run(&with_timings);
    assert_eq!(code, EXIT_OK);
    assert!(timed.lines().next().unwrap().ends_with(",heuristic_micros,exact_micros"));
}

#[test]
fn exit_codes_distinguish_failure_classes() {
    // Usage error: unknown flag.
    let (code, _, stderr) = run(&["solve", "--no-such-flag"]);
    assert_eq!(code, EXIT_USAGE, "{stderr}");
    // Usage error: unknown subcommand.
    let (code, _, _) = run(&["frobnicate"]);
    assert_eq!(code, EXIT_USAGE);
    // Input error: missing file.
    let (code, _, stderr) = run(&["solve", "/nonexistent/instance.json"]);
    assert_eq!(code, EXIT_INPUT);
    assert!(stderr.contains("cannot read"));
    // Input error: invalid document.
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"L": 1, "K": 0}"#).unwrap();
    let (code, _, stderr) = run(&["solve", bad.to_str().unwrap()]);
    assert_eq!(code, EXIT_INPUT);
    assert!(stderr.contains("invalid instance"));
    // Guard refusal: too many pairs for branch and price.
    let (code, big, _) = run(&[
        "gen", "--pairs", "13", "--altruists", "0", "--density", "0.2", "--seed", "1",
        "--L", "3", "--K", "4",
    ]);
    assert_eq!(code, EXIT_OK);
    let big_path = dir.path().join("big.json");
    std::fs::write(&big_path, big).unwrap();
    let (code, _, stderr) = run(&["solve", big_path.to_str().unwrap()]);
    assert_eq!(code, EXIT_GUARD);
    assert!(stderr.contains("too large"));
    // Help goes to stdout with exit 0.
    let (code, stdout, _) = run(&["--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(stdout.contains("Usage"));
}

#[test]
fn real_binary_smoke_test() {
    let exe = env!("CARGO_BIN_EXE_barter-clear");
    let dir = tempfile::tempdir().unwrap();
    let output = Command::new(exe)
        .current_dir(dir.path())
        .arg("counterexample")
        .output()
        .expect("binary runs");
    assert!(output.status.success());
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.contains("heuristic chain pricing (K=5): found=false"));
    assert!(dir.path().join("counterexample_instance.json").exists());
    assert!(dir.path().join("counterexample_duals.json").exists());
}
