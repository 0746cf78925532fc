use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn uimc(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_uimc"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str], cwd: &Path) -> String {
    let out = uimc(args, cwd);
    assert!(
        out.status.success(),
        "uimc {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn assert_schema_valid(summary: &Value) {
    let schema_path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("summary.schema.json");
    let schema = read_json(&schema_path);
    let validator = jsonschema::validator_for(&schema).expect("schema compiles");
    let errors: Vec<String> = validator.iter_errors(summary).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "summary violates the schema: {errors:?}");
}

fn method<'a>(summary: &'a Value, name: &str) -> &'a Value {
    summary["methods"]
        .as_array()
        .unwrap()
        .iter()
        .find(|m| m["method"] == name)
        .unwrap_or_else(|| panic!("no {name} in summary"))
}

#[test]
fn synth_writes_views_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&["synth", "--out", "a", "--data-seed", "4"], d);
    ok(&["synth", "--out", "b", "--data-seed", "4"], d);
    for name in ["view0.csv", "view1.csv", "view2.csv", "labels.txt", "manifest.json"] {
        let a = fs::read(d.join("a").join(name)).unwrap();
        assert_eq!(a, fs::read(d.join("b").join(name)).unwrap(), "{name} differs");
    }
    for v in 0..3 {
        let text = fs::read_to_string(d.join(format!("a/view{v}.csv"))).unwrap();
        assert_eq!(text.lines().count(), 150);
    }
    ok(&["synth", "--out", "c", "--data-seed", "5"], d);
    assert_ne!(
        fs::read(d.join("a/view0.csv")).unwrap(),
        fs::read(d.join("c/view0.csv")).unwrap()
    );
}

#[test]
fn synth_rejects_too_few_instances() {
    let dir = tempfile::tempdir().unwrap();
    let out = uimc(&["synth", "--out", "x", "--m", "10", "--c", "3"], dir.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("m >= 5c"));
}

#[test]
fn noiseless_data_is_separable_for_concat() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&["synth", "--out", "data", "--noise", "0", "--separation", "8"], d);
    ok(
        &[
            "run",
            "--manifest",
            "data/manifest.json",
            "--methods",
            "concat",
            "--out",
            "res",
        ],
        d,
    );
    let summary = read_json(&d.join("res/summary.json"));
    assert_eq!(method(&summary, "concat")["acc"]["mean"], 1.0);
}

#[test]
fn mask_multiplier_scheme() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&["synth", "--out", "data"], d);
    ok(
        &[
            "mask",
            "--manifest",
            "data/manifest.json",
            "--out",
            "masked",
            "--multipliers",
            "0.2,1.0,1.8",
            "--per",
            "0.1",
        ],
        d,
    );
    let mask = read_json(&d.join("masked/mask.json"));
    let counts: Vec<usize> = mask["presented"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p.as_array().unwrap().len())
        .collect();
    // rates 0.02, 0.10, 0.18 of 150 instances
    assert_eq!(counts, [147, 135, 123]);
    let rows = fs::read_to_string(d.join("masked/view2.csv")).unwrap().lines().count();
    assert_eq!(rows, 123);
}

#[test]
fn clamped_rate_empties_a_view_that_uimc_drops() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&["synth", "--out", "data"], d);
    let out = uimc(
        &[
            "mask",
            "--manifest",
            "data/manifest.json",
            "--out",
            "masked",
            "--multipliers",
            "0,1,1.8",
            "--per",
            "0.6",
        ],
        d,
    );
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("clamped"));
    ok(
        &[
            "run",
            "--manifest",
            "masked/manifest.json",
            "--methods",
            "uimc,concat",
            "--out",
            "res",
        ],
        d,
    );
    let summary = read_json(&d.join("res/summary.json"));
    assert_schema_valid(&summary);
    assert_eq!(summary["missing_rates"][2], 1.0);
    let uimc_run = summary["runs"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["method"] == "uimc")
        .unwrap();
    assert_eq!(uimc_run["final_weights"][2], 0.0);
    let weights = fs::read_to_string(d.join("res/weight_trace.csv")).unwrap();
    for line in weights.lines().skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        if cells[2] == "2" {
            assert_eq!(cells[3], "0.0");
        }
    }
}

#[test]
fn repeated_runs_report_mean_and_std() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(
        &[
            "run",
            "--synthetic",
            "--rates",
            "0,0.3,0.6",
            "--methods",
            "uimc,concat",
            "--repeat",
            "3",
            "--seed",
            "7",
            "--out",
            "res",
        ],
        d,
    );
    let summary = read_json(&d.join("res/summary.json"));
    assert_schema_valid(&summary);
    let runs = summary["runs"].as_array().unwrap();
    assert_eq!(runs.len(), 6);
    for r in runs {
        let run = r["run"].as_u64().unwrap();
        assert_eq!(r["seed"].as_u64().unwrap(), 7 + run);
    }
    for name in ["uimc", "concat"] {
        let m = method(&summary, name);
        assert_eq!(m["runs"], 3);
        let accs: Vec<f64> = runs
            .iter()
            .filter(|r| r["method"] == name)
            .map(|r| r["scores"]["acc"].as_f64().unwrap())
            .collect();
        let mean = accs.iter().sum::<f64>() / 3.0;
        let std = (accs.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / 3.0).sqrt();
        assert!((m["acc"]["mean"].as_f64().unwrap() - mean).abs() < 1e-12);
        assert!((m["acc"]["std"].as_f64().unwrap() - std).abs() < 1e-12);
    }

    let objective = fs::read_to_string(d.join("res/objective_trace.csv")).unwrap();
    assert_eq!(objective.lines().next().unwrap(), "run,iteration,objective");
    let weights = fs::read_to_string(d.join("res/weight_trace.csv")).unwrap();
    assert_eq!(weights.lines().next().unwrap(), "run,iteration,view,weight");
    let timings = fs::read_to_string(d.join("res/timings.csv")).unwrap();
    assert_eq!(timings.lines().count(), 7);
}

#[test]
fn single_run_equals_its_average() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(
        &[
            "run",
            "--synthetic",
            "--rates",
            "0.1,0.2,0.3",
            "--methods",
            "bsv",
            "--out",
            "res",
        ],
        d,
    );
    let summary = read_json(&d.join("res/summary.json"));
    let run = &summary["runs"][0];
    let m = method(&summary, "bsv");
    for metric in ["acc", "nmi", "purity"] {
        assert_eq!(m[metric]["mean"], run["scores"][metric]);
        assert_eq!(m[metric]["std"], 0.0);
    }
    assert_eq!(run["selection"], "truth");
}

#[test]
fn unlabelled_bsv_is_flagged() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&["synth", "--out", "data"], d);
    let manifest_path = d.join("data/manifest.json");
    let mut manifest = read_json(&manifest_path);
    manifest.as_object_mut().unwrap().remove("labels");
    fs::write(&manifest_path, manifest.to_string()).unwrap();
    ok(
        &[
            "run",
            "--manifest",
            "data/manifest.json",
            "--methods",
            "bsv,concat",
            "--out",
            "res",
        ],
        d,
    );
    let summary = read_json(&d.join("res/summary.json"));
    assert_schema_valid(&summary);
    assert_eq!(summary["labelled"], false);
    let bsv = method(&summary, "bsv");
    assert_eq!(bsv["flagged_objective_selection"], true);
    assert!(bsv["acc"].is_null());
    assert_eq!(summary["runs"][0]["selection"], "objective");
    assert!(summary["runs"][0]["scores"].is_null());
}

#[test]
fn whole_pipeline_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let args = |out: &'static str| {
        vec![
            "run",
            "--synthetic",
            "--multipliers",
            "0.2,1,1.8",
            "--per",
            "0.3",
            "--repeat",
            "2",
            "--out",
            out,
        ]
    };
    ok(&args("a"), d);
    ok(&args("b"), d);
    let a = fs::read(d.join("a/summary.json")).unwrap();
    assert_eq!(a, fs::read(d.join("b/summary.json")).unwrap());
    assert_schema_valid(&serde_json::from_slice(&a).unwrap());
    for name in ["objective_trace.csv", "weight_trace.csv"] {
        assert_eq!(
            fs::read(d.join("a").join(name)).unwrap(),
            fs::read(d.join("b").join(name)).unwrap()
        );
    }
}

#[test]
fn flags_override_the_experiment_file() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(
        d.join("exp.toml"),
        "methods = [\"concat\"]\nrepeat = 3\nseed = 2\nout = \"from_file\"\n\n[synthetic]\nm = 60\n\n[mask]\nrates = [0.0, 0.2, 0.4]\nseed = 1\n",
    )
    .unwrap();
    ok(&["run", "--spec", "exp.toml", "--repeat", "1", "--out", "from_flag"], d);
    assert!(!d.join("from_file").exists());
    let summary = read_json(&d.join("from_flag/summary.json"));
    assert_eq!(summary["m"], 60);
    assert_eq!(summary["runs"].as_array().unwrap().len(), 1);
    assert_eq!(summary["runs"][0]["seed"], 2);
    assert_eq!(summary["missing_rates"][2], 0.4);
}

#[test]
fn solver_config_and_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("solver.json"), r#"{"max_iters": 3}"#).unwrap();
    ok(
        &[
            "run",
            "--synthetic",
            "--m",
            "60",
            "--solver-config",
            "solver.json",
            "--methods",
            "uimc",
            "--sweep",
            "eta=0.1,1",
            "--out",
            "res",
        ],
        d,
    );
    let summary = read_json(&d.join("res/summary.json"));
    assert!(summary["runs"][0]["iters_run"].as_u64().unwrap() <= 3);
    let sweep = fs::read_to_string(d.join("res/sweep.csv")).unwrap();
    let lines: Vec<&str> = sweep.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("eta,0.1,1,"));
    assert_eq!(read_json(&d.join("res/solver_config.json"))["max_iters"], 3);
}

#[test]
fn eval_scores_label_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("pred.txt"), "1\n1\n0\n0\n").unwrap();
    fs::write(d.join("truth.txt"), "0\n0\n1\n1\n").unwrap();
    let stdout = ok(
        &[
            "eval",
            "--predicted",
            "pred.txt",
            "--truth",
            "truth.txt",
            "--out",
            "scores.json",
        ],
        d,
    );
    let scores: Value = serde_json::from_str(stdout.trim()).unwrap();
    assert_eq!(scores["acc"], 1.0);
    assert_eq!(read_json(&d.join("scores.json")), scores);
}

#[test]
fn failures_exit_nonzero_with_a_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for args in [
        vec!["run", "--out", "x"],
        vec!["run", "--manifest", "missing.json", "--out", "x"],
        vec!["run", "--synthetic", "--repeat", "0", "--out", "x"],
        vec!["run", "--synthetic", "--sweep", "nope=1", "--out", "x"],
        vec!["eval", "--predicted", "a.txt", "--truth", "b.txt"],
        vec!["mask", "--manifest", "m.json", "--out", "x"],
    ] {
        let out = uimc(&args, d);
        assert!(!out.status.success(), "{args:?} succeeded");
        assert!(String::from_utf8_lossy(&out.stderr).contains("error"), "{args:?}");
    }
}
