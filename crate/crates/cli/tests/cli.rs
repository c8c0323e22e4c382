//! End-to-end checks of the binary: exit codes, report schemas, CSV
//! sweeps, determinism.

use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_participation"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, contents: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path.to_string_lossy().into_owned()
}

fn parse_stdout(output: &Output) -> Value {
    assert!(
        output.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
    serde_json::from_slice(&output.stdout).expect("report is valid JSON")
}

const EXAMPLE_ONE: &str = r#"{
  "schema_version": 1,
  "game": {
    "n": 4, "k": 2,
    "q": ["1/2", "1/2", "1/4", "1/4"],
    "alpha": "1", "r": "5",
    "variant": "basic"
  },
  "enumerate": { "check_lattice": true, "strong_coalitions": 4 },
  "simulate": {
    "profile": "all_in",
    "trials": 100000,
    "seed": 42,
    "dynamics": { "initial": "all_in", "order": "round_robin", "max_rounds": 50 }
  }
}"#;

#[test]
fn enumerate_example_one_reports_three_equilibria() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "ex1.json", EXAMPLE_ONE);
    let output = run(&["enumerate", "--config", &config]);
    let report = parse_stdout(&output);

    let equilibria = report["equilibria"].as_array().unwrap();
    assert_eq!(equilibria.len(), 3);
    let contributor_sets: Vec<Vec<u64>> = equilibria
        .iter()
        .map(|e| {
            e["composition"]["contributors"]
                .as_array()
                .unwrap()
                .iter()
                .map(|v| v.as_u64().unwrap())
                .collect()
        })
        .collect();
    assert!(contributor_sets.contains(&vec![]));
    assert!(contributor_sets.contains(&vec![0, 1]));
    assert!(contributor_sets.contains(&vec![0, 1, 2, 3]));
    for entry in equilibria {
        assert_eq!(entry["verified_by"], "both");
        for margin in entry["margins"].as_array().unwrap() {
            let value: participation::numeric::Rational =
                margin["margin"].as_str().unwrap().parse().unwrap();
            assert!(!value.is_negative());
        }
    }
    assert_eq!(report["brute_force"], "completed");
    assert_eq!(report["lattice"]["closed"], true);
    assert_eq!(report["structure"]["finder"], "asymmetric_threshold");
    assert_eq!(report["tool_version"], env!("CARGO_PKG_VERSION"));

    // Only all-in survives coalition deviations: from all-out any k
    // players gain by joining, and from the rich-only profile the two poor
    // players gain by joining together.
    let strong_entries = report["strong_equilibria"].as_array().unwrap();
    for entry in strong_entries {
        let contributors = entry["profile"]
            .as_array()
            .unwrap()
            .iter()
            .filter(|a| *a == "contribute")
            .count();
        assert_eq!(entry["strong"].as_bool().unwrap(), contributors == 4);
    }
}

#[test]
fn enumerate_example_two_reports_two_equilibria() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "ex2.json",
        r#"{
          "schema_version": 1,
          "game": {
            "n": 4, "k": 2,
            "q": ["1/3", "1/3", "1/4", "1/4"],
            "alpha": "1", "r": "8",
            "variant": "basic"
          }
        }"#,
    );
    let output = run(&["enumerate", "--config", &config]);
    let report = parse_stdout(&output);
    assert_eq!(report["equilibria"].as_array().unwrap().len(), 2);
}

#[test]
fn enumerate_large_retraction_game_skips_brute_force_with_note() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "n60.json",
        r#"{
          "schema_version": 1,
          "game": {
            "n": 60, "k": 13, "q": "0.3",
            "alpha": "0.05", "beta": "0.1", "r": "1",
            "variant": "retraction"
          }
        }"#,
    );
    let output = run(&["enumerate", "--config", &config]);
    let report = parse_stdout(&output);
    let brute = report["brute_force"].as_str().unwrap();
    assert!(brute.contains("guard exceeded"), "{brute}");
    let window = report["structure"]["window"].as_array().unwrap();
    assert_eq!(window.len(), 1);
    assert_eq!(window[0]["lambda"], 48);
    // Mixed equilibrium with 48 contributors plus the trivial profile.
    let lambdas: Vec<u64> = report["equilibria"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["class"]["contributors"].as_u64().unwrap())
        .collect();
    assert_eq!(lambdas, vec![0, 48]);
    for entry in report["equilibria"].as_array().unwrap() {
        assert_eq!(entry["verified_by"], "structure");
    }
}

#[test]
fn unknown_fields_are_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "bogus.json",
        r#"{
          "schema_version": 1,
          "game": { "n": 4, "k": 2, "q": "1/2", "alpha": "1", "r": "5",
                    "variant": "basic", "bogus": 1 }
        }"#,
    );
    let output = run(&["enumerate", "--config", &config]);
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("bogus"), "{stderr}");
    assert!(stderr.contains("game"), "{stderr}");
}

#[test]
fn missing_beta_for_retraction_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "nobeta.json",
        r#"{
          "schema_version": 1,
          "game": { "n": 6, "k": 2, "q": "1/2", "alpha": "1", "r": "5",
                    "variant": "retraction" }
        }"#,
    );
    let output = run(&["calibrate", "--config", &config]);
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("beta"));
}

#[test]
fn invalid_game_is_a_config_error_with_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "badk.json",
        r#"{
          "schema_version": 1,
          "game": { "n": 4, "k": 5, "q": "1/2", "alpha": "1", "r": "5",
                    "variant": "basic" }
        }"#,
    );
    let output = run(&["enumerate", "--config", &config]);
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("threshold exceeds population"));
}

#[test]
fn guard_exceeded_without_structure_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    // Universal payments with v > 0 has no structural characterization.
    let config = write_config(
        dir.path(),
        "big.json",
        r#"{
          "schema_version": 1,
          "game": { "n": 13, "k": 2, "q": "1/2", "alpha": "1", "r": "3", "v": "1",
                    "variant": "universal_basic" }
        }"#,
    );
    let output = run(&["enumerate", "--config", &config]);
    assert_eq!(output.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&output.stderr).contains("guard"));
}

#[test]
fn calibrate_reports_exact_fraction_and_decimal() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "cal.json",
        r#"{
          "schema_version": 1,
          "game": { "n": 4, "k": 2, "q": "0.5", "alpha": "1", "r": "1",
                    "variant": "basic" },
          "calibrate": { "target": "all_in", "compare_universal": true }
        }"#,
    );
    let output = run(&["calibrate", "--config", &config]);
    let report = parse_stdout(&output);
    assert_eq!(report["feasible"], true);
    assert_eq!(report["r_min"]["exact"], "16/7");
    assert_eq!(report["r_min"]["decimal"], "2.28571428571");
    assert_eq!(report["calibration"]["binding_constraint"], "participation");
    let comparison = &report["comparison"];
    assert_eq!(comparison["tracked_expected_expenditure"]["exact"], "32/7");
    assert_eq!(comparison["universal_expenditure"]["exact"], "64/11");
    assert_eq!(comparison["verdict"], "universal expenditure strictly higher");
}

#[test]
fn calibrate_reports_infeasible_mixed_targets() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "inf.json",
        r#"{
          "schema_version": 1,
          "game": { "n": 10, "k": 3, "q": "2/5", "alpha": "100", "beta": "0.001", "r": "1",
                    "variant": "retraction" },
          "calibrate": { "target": { "mixed": { "lambda": 7 } } }
        }"#,
    );
    let output = run(&["calibrate", "--config", &config]);
    let report = parse_stdout(&output);
    assert_eq!(report["feasible"], false);
    assert!(report["infeasible_reason"].as_str().unwrap().contains("lambda"));
}

#[test]
fn sweep_flips_all_in_exactly_at_the_boundary_reward() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "sweep_r.json",
        r#"{
          "schema_version": 1,
          "game": { "n": 4, "k": 2, "q": "0.5", "alpha": "1", "r": "1",
                    "variant": "basic" },
          "sweep": { "parameter": "r", "start": "2", "stop": "2.6", "step": "1/14" }
        }"#,
    );
    let output = run(&["sweep", "--config", &config]);
    assert!(output.status.success());
    let text = String::from_utf8(output.stdout).unwrap();
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 9);
    // Columns: parameter, value_exact, value_decimal, equilibria, all_out,
    // all_in, window_lambdas, mixed_lambdas.
    for row in &rows {
        let value: participation::numeric::Rational = row[1].parse().unwrap();
        let expected = value >= "16/7".parse().unwrap();
        assert_eq!(&row[5], if expected { "true" } else { "false" }, "at r = {}", &row[1]);
        assert_eq!(&row[4], "true");
    }
    assert!(rows.iter().any(|row| &row[1] == "16/7"));
}

#[test]
fn sweep_beta_moves_the_lambda_window() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "sweep_b.json",
        r#"{
          "schema_version": 1,
          "game": { "n": 60, "k": 13, "q": "0.3",
                    "alpha": "0.05", "beta": "0.1", "r": "1",
                    "variant": "retraction" },
          "sweep": { "parameter": "beta", "start": "0.03", "stop": "0.14", "step": "0.01" }
        }"#,
    );
    let out_path = dir.path().join("sweep.csv");
    let output =
        run(&["sweep", "--config", &config, "--out", out_path.to_str().unwrap()]);
    assert!(output.status.success());
    let text = std::fs::read_to_string(&out_path).unwrap();
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 12);
    // Below the feasible range: no window; inside: window shrinks toward
    // smaller lambda as beta grows; above: empty again.
    assert_eq!(&rows[0][6], "");
    assert_eq!(&rows[11][6], "");
    let window_at = |i: usize| rows[i][6].split(';').next().unwrap().parse::<u64>().unwrap();
    assert!(window_at(2) > window_at(7), "{} vs {}", rows[2][6].to_owned(), rows[7][6].to_owned());
    let with_window = rows.iter().filter(|r| !r[6].is_empty()).count();
    assert!(with_window >= 8);
}

#[test]
fn single_point_sweep_yields_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "sweep_one.json",
        r#"{
          "schema_version": 1,
          "game": { "n": 4, "k": 2, "q": "0.5", "alpha": "1", "r": "3",
                    "variant": "basic" },
          "sweep": { "parameter": "k", "start": "2", "stop": "2", "step": "1" }
        }"#,
    );
    let output = run(&["sweep", "--config", &config]);
    assert!(output.status.success());
    let text = String::from_utf8(output.stdout).unwrap();
    assert_eq!(text.lines().count(), 2);
}

#[test]
fn inverted_sweep_range_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "sweep_bad.json",
        r#"{
          "schema_version": 1,
          "game": { "n": 4, "k": 2, "q": "0.5", "alpha": "1", "r": "3",
                    "variant": "basic" },
          "sweep": { "parameter": "r", "start": "3", "stop": "1", "step": "0.5" }
        }"#,
    );
    let output = run(&["sweep", "--config", &config]);
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("empty or inverted"));
}

#[test]
fn simulate_is_deterministic_and_tracks_analytic_values() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "sim.json", EXAMPLE_ONE);
    let first = run(&["simulate", "--config", &config]);
    let second = run(&["simulate", "--config", &config]);
    assert_eq!(first.stdout, second.stdout);
    let report = parse_stdout(&first);

    let empirical = report["simulation"]["empirical_progress_rate"].as_f64().unwrap();
    let analytic: participation::numeric::Rational = report
        ["analytic_progress_probability"]["exact"]
        .as_str()
        .unwrap()
        .parse()
        .unwrap();
    let p = analytic.to_f64();
    let se = (p * (1.0 - p) / 100_000.0).sqrt();
    assert!((empirical - p).abs() <= 4.0 * se);

    for (player, exact) in
        report["analytic_expected_utilities"].as_array().unwrap().iter().enumerate()
    {
        let exact: participation::numeric::Rational =
            exact["exact"].as_str().unwrap().parse().unwrap();
        let mean = report["simulation"]["per_player_mean_utility"][player].as_f64().unwrap();
        let se = report["simulation"]["standard_errors"][player].as_f64().unwrap();
        assert!((mean - exact.to_f64()).abs() <= 4.0 * se);
    }

    let dynamics = &report["dynamics"];
    assert_eq!(dynamics["terminal"], "fixed_point");
    assert_eq!(dynamics["final_profile_is_equilibrium"], true);

    // A different seed changes the sample.
    let other = run(&["simulate", "--config", &config, "--seed", "43"]);
    assert_ne!(first.stdout, other.stdout);
}

#[test]
fn reports_reparse_under_their_schema() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "ex1.json", EXAMPLE_ONE);
    for command in ["enumerate", "simulate"] {
        let output = run(&[command, "--config", &config]);
        assert!(output.status.success());
        let value: Value = serde_json::from_slice(&output.stdout).unwrap();
        // The embedded config must round-trip exactly.
        let embedded = serde_json::to_string(&value["config"]).unwrap();
        let original: Value = serde_json::from_str(EXAMPLE_ONE).unwrap();
        let embedded: Value = serde_json::from_str(&embedded).unwrap();
        assert_eq!(embedded, original);
    }
}

#[test]
fn float_mode_flag_loosens_equilibrium_checks() {
    let dir = tempfile::tempdir().unwrap();
    // q * tail * r misses alpha by 0.001: exact mode drops all-in, float
    // mode with a coarse epsilon keeps it.
    let config = write_config(
        dir.path(),
        "float.json",
        r#"{
          "schema_version": 1,
          "game": { "n": 3, "k": 2, "q": "1/2", "alpha": "1", "r": "2.664",
                    "variant": "basic" }
        }"#,
    );
    let exact = parse_stdout(&run(&["enumerate", "--config", &config]));
    assert_eq!(exact["equilibria"].as_array().unwrap().len(), 1);
    let float = parse_stdout(&run(&[
        "enumerate",
        "--config",
        &config,
        "--mode",
        "float",
        "--epsilon",
        "0.01",
    ]));
    assert_eq!(float["equilibria"].as_array().unwrap().len(), 2);
}
