use std::path::{Path, PathBuf};
use std::process::Command;

use gsc_cli::{run_cli, EXIT_OK, EXIT_SOLVER, EXIT_USAGE, EXIT_VALIDATION};
use gsc_core::io::{load_panel, load_result, save_covariates, save_panel};
use gsc_core::{distance, CovariatePanel, ObjectPoint, SpaceDescriptor};
use serde_json::Value;
use tempfile::TempDir;

fn run(args: &[&str]) -> i32 {
    run_cli(std::iter::once("gsc").chain(args.iter().copied()))
}

fn p(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn simulate(dir: &TempDir, name: &str, scenario: &str, extra: &[&str]) -> PathBuf {
    let out = p(dir, name);
    let mut args = vec!["simulate", "--scenario", scenario, "--seed", "1", "--out", s(&out)];
    args.extend_from_slice(extra);
    assert_eq!(run(&args), EXIT_OK, "simulate {scenario}");
    out
}

#[test]
fn network_gsc_recovers_counterfactual() {
    let dir = TempDir::new().unwrap();
    let panel = simulate(&dir, "net.json", "network", &[]);
    let out = p(&dir, "r.json");
    let plot = p(&dir, "plot.tsv");
    let code = run(&[
        "gsc", "--panel", s(&panel), "--out", s(&out), "--placebo", "--plot-series", s(&plot),
    ]);
    assert_eq!(code, EXIT_OK);
    let r = load_result(&out).unwrap();
    assert_eq!(r.method, "gsc");
    assert!(r.effects[0].length <= 1e-6, "{}", r.effects[0].length);
    assert!(r.pre_fit.iter().all(|d| *d <= 1e-6));
    assert_eq!(r.placebo.len(), 1);
    assert_eq!(r.placebo[0].statistics.len(), 21);

    let tsv = std::fs::read_to_string(&plot).unwrap();
    let rows: Vec<Vec<&str>> = tsv.lines().skip(1).map(|l| l.split('\t').collect()).collect();
    let count = |stat: &str| rows.iter().filter(|r| r[2] == stat).count();
    assert_eq!(count("pre_fit_distance"), 19);
    assert_eq!(count("effect_length"), 1);
    assert_eq!(count("placebo_statistic"), 21);
}

#[test]
fn missing_panel_exits_with_validation_code() {
    let dir = TempDir::new().unwrap();
    let missing = p(&dir, "missing.json");
    assert_eq!(run(&["gsc", "--panel", s(&missing), "--out", s(&p(&dir, "r.json"))]), EXIT_VALIDATION);

    let out = Command::new(env!("CARGO_BIN_EXE_gsc"))
        .args(["gsc", "--panel", s(&missing), "--out", "unused.json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_VALIDATION));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.json"));
}

#[test]
fn malformed_panel_is_rejected() {
    let dir = TempDir::new().unwrap();
    let panel = simulate(&dir, "w.json", "scalar", &[]);
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(&panel).unwrap()).unwrap();
    v["t0"] = Value::from(20);
    std::fs::write(&panel, v.to_string()).unwrap();
    assert_eq!(run(&["validate", "--panel", s(&panel)]), EXIT_VALIDATION);
}

#[test]
fn per_time_matches_pooled_with_one_post_period() {
    let dir = TempDir::new().unwrap();
    let panel = simulate(&dir, "w.json", "robustness_s2", &["--effect-size", "0.5"]);
    let pooled = p(&dir, "pooled.json");
    let per_time = p(&dir, "per.json");
    assert_eq!(run(&["gsdid", "--panel", s(&panel), "--out", s(&pooled), "--placebo"]), EXIT_OK);
    assert_eq!(run(&["gsdid", "--panel", s(&panel), "--out", s(&per_time), "--per-time"]), EXIT_OK);
    let (a, b) = (load_result(&pooled).unwrap(), load_result(&per_time).unwrap());
    assert_eq!(b.effects.len(), 1);
    assert_eq!(a.effects[0].start, b.effects[0].start);
    assert_eq!(a.effects[0].end, b.effects[0].end);
    assert_eq!(a.effects[0].length, b.effects[0].length);
    assert_eq!(a.unit_weights.values, b.unit_weights.values);
    assert_eq!(a.time_weights[0].values, b.time_weights[0].values);
    assert_eq!(a.placebo[0].statistics.len(), 21);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    for (scenario, extra) in [("scalar", vec![]), ("sphere", vec!["--controls", "5"])] {
        let a = simulate(&dir, "a.json", scenario, &extra);
        let b = simulate(&dir, "b.json", scenario, &extra);
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
        let (ra, rb) = (p(&dir, "ra.json"), p(&dir, "rb.json"));
        for out in [&ra, &rb] {
            assert_eq!(run(&["gsc", "--panel", s(&a), "--out", s(out), "--seed", "3", "--placebo"]), EXIT_OK);
        }
        assert_eq!(std::fs::read(&ra).unwrap(), std::fs::read(&rb).unwrap(), "{scenario}");

        // the echoed config reproduces the result
        let r = load_result(&ra).unwrap();
        let tol = format!("{:e}", r.config.tol_kkt);
        let max_iter = r.config.max_iter.to_string();
        let seed = r.config.seed.to_string();
        let rc = p(&dir, "rc.json");
        let args = [
            "gsc", "--panel", s(&a), "--out", s(&rc), "--placebo", "--tol", &tol, "--max-iter",
            &max_iter, "--seed", &seed,
        ];
        assert_eq!(run(&args), EXIT_OK);
        assert_eq!(std::fs::read(&ra).unwrap(), std::fs::read(&rc).unwrap());
    }
}

#[test]
fn augmented_gsc_uses_embedded_or_separate_covariates() {
    let dir = TempDir::new().unwrap();
    let covs = p(&dir, "z.json");
    let panel = simulate(&dir, "w.json", "covariate_offset", &["--covariates-out", s(&covs)]);
    let truth = load_panel(&panel).unwrap();
    assert!(truth.covariates.is_some());

    let embedded = p(&dir, "a1.json");
    let separate = p(&dir, "a2.json");
    assert_eq!(run(&["agsc", "--panel", s(&panel), "--out", s(&embedded)]), EXIT_OK);
    assert_eq!(
        run(&["agsc", "--panel", s(&panel), "--covariates", s(&covs), "--out", s(&separate)]),
        EXIT_OK
    );
    let (a, b) = (load_result(&embedded).unwrap(), load_result(&separate).unwrap());
    assert_eq!(a.method, "agsc");
    assert_eq!(a.effects, b.effects);
    // effect_size 0: the corrected synthetic equals the observed outcome
    assert!(a.effects[0].length <= 1e-8, "{}", a.effects[0].length);

    let matched = p(&dir, "g.json");
    assert_eq!(
        run(&["gsc", "--panel", s(&panel), "--covariates", s(&covs), "--out", s(&matched)]),
        EXIT_OK
    );
    assert_eq!(load_result(&matched).unwrap().unit_weights.values.len(), 20);
}

#[test]
fn agsc_without_covariates_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let panel = simulate(&dir, "w.json", "scalar", &[]);
    assert_eq!(run(&["agsc", "--panel", s(&panel), "--out", s(&p(&dir, "r.json"))]), EXIT_USAGE);
}

#[test]
fn singular_covariates_are_a_solver_failure() {
    let dir = TempDir::new().unwrap();
    let panel = simulate(&dir, "w.json", "scalar", &["--controls", "4"]);
    let scalar = SpaceDescriptor::scalar().into_shared();
    let z = ObjectPoint::new(&scalar, vec![1.0]).unwrap();
    let covs = CovariatePanel::new(vec![scalar], vec![vec![vec![z]]; 5]).unwrap();
    let path = p(&dir, "z.json");
    save_covariates(&covs, &path).unwrap();
    let code = run(&["agsc", "--panel", s(&panel), "--covariates", s(&path), "--out", s(&p(&dir, "r.json"))]);
    assert_eq!(code, EXIT_SOLVER);
}

#[test]
fn validate_reports_panel_and_rejects_covariate_mismatch() {
    let dir = TempDir::new().unwrap();
    for scenario in ["network", "spd", "sphere", "robustness_s3"] {
        let panel = simulate(&dir, "w.json", scenario, &["--controls", "6"]);
        assert_eq!(run(&["validate", "--panel", s(&panel)]), EXIT_OK, "{scenario}");
    }
    let panel = simulate(&dir, "w.json", "covariate_offset", &[]);
    let mut file = load_panel(&panel).unwrap();
    let scalar = SpaceDescriptor::scalar().into_shared();
    let z = ObjectPoint::new(&scalar, vec![0.0]).unwrap();
    file.covariates = Some(CovariatePanel::new(vec![scalar.clone()], vec![vec![vec![z]]; 3]).unwrap());
    save_panel(&file, &panel).unwrap();
    assert_eq!(run(&["validate", "--panel", s(&panel)]), EXIT_VALIDATION);
}

#[test]
fn frechet_mean_accepts_list_and_file() {
    let dir = TempDir::new().unwrap();
    let panel = simulate(&dir, "w.json", "spd", &["--controls", "3", "--periods", "4", "--t0", "3"]);
    let list = p(&dir, "m1.json");
    assert_eq!(
        run(&["frechet-mean", "--panel", s(&panel), "--weights", "0.2,0.3,0.5", "--out", s(&list)]),
        EXIT_OK
    );
    let wfile = p(&dir, "w1.json");
    std::fs::write(&wfile, "[0.2, 0.3, 0.5]").unwrap();
    let from_file = p(&dir, "m2.json");
    assert_eq!(
        run(&["frechet-mean", "--panel", s(&panel), "--weights", s(&wfile), "--out", s(&from_file)]),
        EXIT_OK
    );
    assert_eq!(std::fs::read(&list).unwrap(), std::fs::read(&from_file).unwrap());
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&list).unwrap()).unwrap();
    assert_eq!(doc["means"].as_array().unwrap().len(), 4);
    assert_eq!(doc["units"].as_array().unwrap().len(), 3);

    // a vertex on the treated unit returns its observed outcomes
    let all = p(&dir, "m3.json");
    assert_eq!(
        run(&["frechet-mean", "--panel", s(&panel), "--weights", "1,0,0,0", "--out", s(&all)]),
        EXIT_OK
    );
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&all).unwrap()).unwrap();
    let file = load_panel(&panel).unwrap();
    let space = file.panel.space().clone();
    for t in 0..4 {
        let m = gsc_core::io::decode_point(&space, &doc["means"][t], "means").unwrap();
        assert!(distance(&m, file.panel.outcome(0, t)).unwrap() <= 1e-10);
    }

    assert_eq!(run(&["frechet-mean", "--panel", s(&panel), "--weights", "0.5,0.5"]), EXIT_VALIDATION);
    assert_eq!(run(&["frechet-mean", "--panel", s(&panel), "--weights", "a,b,c"]), EXIT_VALIDATION);
    assert_eq!(run(&["frechet-mean", "--panel", s(&panel), "--weights", "0.5,0.6,0.1"]), EXIT_VALIDATION);
}

#[test]
fn usage_errors_and_flags() {
    let dir = TempDir::new().unwrap();
    assert_eq!(run(&["--help"]), EXIT_OK);
    assert_eq!(run(&["gsc", "--bogus"]), EXIT_USAGE);
    assert_eq!(run(&[]), EXIT_USAGE);
    assert_eq!(run(&["simulate", "--scenario", "nope", "--out", s(&p(&dir, "x.json"))]), EXIT_USAGE);
    assert_eq!(run(&["validate", "--panel", "x", "--repair", "maybe"]), EXIT_USAGE);
    assert_eq!(
        run(&["simulate", "--scenario", "network", "--out", s(&p(&dir, "x.json")), "--t0", "20"]),
        EXIT_VALIDATION
    );

    let panel = simulate(&dir, "w.json", "scalar", &["--effect-size", "1"]);
    let out = p(&dir, "r.json");
    assert_eq!(run(&["gsc", "--panel", s(&panel), "--out", s(&out), "--tol=-1"]), EXIT_VALIDATION);
    assert_eq!(run(&["gsc", "--panel", s(&panel), "--out", s(&out), "--repair", "off"]), EXIT_OK);
    let r = load_result(&out).unwrap();
    assert!(!r.config.repair);
    assert!(r.effects[0].length > 0.0);
}
