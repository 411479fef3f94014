use std::process::Command;

use fqre::dataset::fixture;
use serde_json::Value;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("fqre").chain(args.iter().copied());
    let status = fqre_cli::run(argv, &mut out, &mut err);
    (status, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn run_json(args: &[&str]) -> (i32, Value) {
    let mut full = args.to_vec();
    full.extend(["--format", "json"]);
    let (status, out, err) = run(&full);
    let value = serde_json::from_str(&out).unwrap_or_else(|e| panic!("{e}: {out} {err}"));
    (status, value)
}

fn keys(v: &Value) -> Vec<&str> {
    v.as_object().unwrap().keys().map(String::as_str).collect()
}

fn reals(v: &Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

#[test]
fn symmetric_pennies_solve_is_uniform() {
    let (status, v) = run_json(&["solve", "--fixture", "gh-mp-sym", "--lambda", "1.0"]);
    assert_eq!(status, 0);
    assert_eq!(
        keys(&v),
        ["command", "game", "source", "lambda", "players", "strategies", "focal", "delta", "profile", "residual", "iterations", "converged"]
    );
    for p in v["profile"].as_array().unwrap() {
        assert_eq!(reals(p), [0.5, 0.5]);
    }
    assert_eq!(v["converged"], true);
}

#[test]
fn traveler_focal_range_at_small_transfer() {
    let (status, v) = run_json(&["focal", "--fixture", "traveler", "--T", "5"]);
    assert_eq!(status, 0);
    let expected: Vec<String> = (240..=300).map(|n| n.to_string()).collect();
    for p in v["players"].as_array().unwrap() {
        let focal: Vec<&str> = p["regret_focal"].as_array().unwrap().iter().map(|s| s.as_str().unwrap()).collect();
        assert_eq!(focal, expected);
        assert_eq!(
            keys(p),
            ["player", "strategies", "regrets", "mean_regret", "regret_focal", "hurwicz", "observations"]
        );
    }
    let (_, table, _) = run(&["focal", "--fixture", "traveler", "--T", "5"]);
    assert!(table.contains("regret-averse focal set (beta 1.000): 240..300"));
}

#[test]
fn calibrates_the_second_asymmetric_pennies_game() {
    let (status, v) = run_json(&["calibrate", "--fixture", "gh-mp-asym2", "--focal-row", "D"]);
    assert_eq!(status, 0);
    let result = &v["result"];
    assert!((result["lambda"].as_f64().unwrap() - 0.41).abs() <= 0.01);
    assert!((result["deltas"][0].as_f64().unwrap() - 5.4).abs() <= 0.1);
    assert_eq!(result["feasible"], true);
    assert_eq!(v["focal"][0], serde_json::json!(["D"]));
}

#[test]
fn infeasible_calibration_exits_with_one() {
    let (status, v) = run_json(&["calibrate", "--fixture", "m1", "--policy", "zero"]);
    assert_eq!(status, 1);
    assert_eq!(v["result"]["feasible"], false);
}

#[test]
fn usage_errors_exit_with_two_and_name_the_source() {
    let (status, _, err) = run(&["solve", "--fixture", "no-such-game"]);
    assert_eq!(status, 2);
    assert!(err.contains("no-such-game"));
    let (status, _, err) = run(&["solve", "--file", "/definitely/missing.json"]);
    assert_eq!(status, 2);
    assert!(err.contains("/definitely/missing.json"));
    assert_eq!(run(&["solve"]).0, 2);
    assert_eq!(run(&["solve", "--fixture", "m1", "--file", "x.json"]).0, 2);
    assert_eq!(run(&["solve", "--fixture", "m1", "--focal-row", "Q"]).0, 2);
    assert_eq!(run(&["solve", "--fixture", "m1", "--lambda", "-1"]).0, 2);
    assert_eq!(run(&["falsify", "--pq", "0.1,0.2", "--pq", "0.3,0.4", "--pq", "0.5,0.6"]).0, 2);
    assert_eq!(run(&["calibrate", "--fixture", "falsify-g1"]).0, 2);
    assert_eq!(run(&["frobnicate"]).0, 2);
    let (status, out, _) = run(&["--help"]);
    assert_eq!(status, 0);
    assert!(out.contains("calibrate"));
}

#[test]
fn json_output_is_byte_identical_across_runs() {
    for args in [
        &["solve", "--fixture", "gh-mp-asym1", "--lambda", "0.7", "--focal-row", "regret", "--delta", "1.5"][..],
        &["trace", "--fixture", "m1", "--lambda", "1.5", "--steps", "9"],
        &["identify", "--fixture", "ad-g5"],
        &["reproduce", "--criterion", "1"],
    ] {
        let mut full = args.to_vec();
        full.extend(["--format", "json"]);
        let first = run(&full);
        assert_eq!(first, run(&full), "{args:?}");
        let v: Value = serde_json::from_str(&first.1).unwrap();
        assert_eq!(v["command"], args[0]);
    }
}

#[test]
fn reals_carry_at_most_twelve_significant_digits() {
    let (_, out, _) = run(&["solve", "--fixture", "gh-mp-asym1", "--lambda", "0.37", "--format", "json"]);
    for token in out.split(|c: char| !(c.is_ascii_digit() || c == '.' || c == 'e' || c == '-')) {
        let mantissa = token.split('e').next().unwrap();
        let digits = mantissa.trim_start_matches('-').trim_start_matches(['0', '.']).replace('.', "");
        assert!(digits.len() <= 12, "{token}");
    }
}

#[test]
fn explicit_labels_override_construction() {
    let (_, regret) = run_json(&["solve", "--fixture", "gh-mp-asym1", "--focal-row", "regret"]);
    assert_eq!(regret["focal"][0], serde_json::json!(["U"]));
    let (_, labels) = run_json(&["solve", "--fixture", "gh-mp-asym1", "--focal-row", "D"]);
    assert_eq!(labels["focal"][0], serde_json::json!(["D"]));
    let (_, hurwicz) = run_json(&["solve", "--fixture", "gh-mp-asym1", "--focal-row", "hurwicz", "--alpha", "1"]);
    assert_eq!(hurwicz["focal"][0], serde_json::json!(["U"]));
}

#[test]
fn falsify_runs_pair_and_quad_tests() {
    let (status, v) = run_json(&["falsify", "--pq", "0.4,0.5", "--pq", "0.5,0.5"]);
    assert_eq!(status, 0);
    assert_eq!(v["verdict"]["rejected"], true);
    let quad = ["falsify", "--pq", "0.1,0.5", "--pq", "0.2,0.5", "--pq", "0.3,0.6", "--pq", "0.4,0.7"];
    let (_, v) = run_json(&quad);
    assert_eq!(v["verdict"]["rejected"], true);
    assert_eq!(reals(&v["verdict"]["p"]), [0.1, 0.2, 0.3, 0.4]);
}

#[test]
fn identify_reports_the_up_strategy_of_m1_as_focal() {
    let (status, v) = run_json(&["identify", "--fixture", "m1"]);
    assert_eq!(status, 0);
    assert_eq!(v["identification"]["players"][0]["focal"], serde_json::json!(["U"]));
    assert_eq!(v["cross_player"], Value::Null);
}

#[test]
fn files_validate_and_outputs_land_on_disk() {
    let dir = tempfile::tempdir().unwrap();
    let game = dir.path().join("m1.json");
    fixture("m1").unwrap().to_game_file().save(&game).unwrap();
    let game = game.to_str().unwrap();

    let (status, v) = run_json(&["validate", "--file", game]);
    assert_eq!(status, 0);
    assert_eq!(v["valid"], true);
    assert_eq!(v["profiles"], 4);

    let out = dir.path().join("fit.json");
    let (status, stdout, _) = run(&["calibrate", "--file", game, "--format", "json", "--out", out.to_str().unwrap()]);
    assert_eq!(status, 0);
    assert!(stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["command"], "calibrate");

    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, "{\"name\": 3}").unwrap();
    let (status, _, err) = run(&["validate", "--file", broken.to_str().unwrap()]);
    assert_eq!(status, 2);
    assert!(err.contains("broken.json"));
}

#[test]
fn crra_exponent_changes_the_game() {
    let (_, plain) = run_json(&["solve", "--fixture", "gh-mp-asym1", "--lambda", "0.5"]);
    let (_, bent) = run_json(&["solve", "--fixture", "gh-mp-asym1", "--lambda", "0.5", "--gamma", "0.5"]);
    assert_ne!(plain["profile"], bent["profile"]);
    assert_eq!(run(&["solve", "--fixture", "gh-mp-asym1", "--gamma", "-1"]).0, 2);
}

#[test]
fn catalog_lists_fixtures() {
    let (status, v) = run_json(&["catalog"]);
    assert_eq!(status, 0);
    let names: Vec<&str> = v["fixtures"].as_array().unwrap().iter().map(|f| f["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"gh-mp-asym2") && names.contains(&"traveler"));
}

#[test]
fn tolerance_comes_from_the_environment() {
    let bin = env!("CARGO_BIN_EXE_fqre");
    let solve = |tolerance: &str| {
        Command::new(bin)
            .args(["solve", "--fixture", "gh-mp-asym1", "--lambda", "0.8", "--format", "json"])
            .env(fqre_cli::TOLERANCE_ENV, tolerance)
            .output()
            .unwrap()
    };
    let loose = solve("1e-3");
    assert!(loose.status.success());
    let v: Value = serde_json::from_slice(&loose.stdout).unwrap();
    let residual = v["residual"].as_f64().unwrap();
    assert!(residual <= 1e-3 && residual > 1e-10, "{residual}");
    assert_eq!(solve("lots").status.code(), Some(2));
}
