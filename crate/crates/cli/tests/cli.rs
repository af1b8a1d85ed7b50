use std::path::Path;
use std::process::{Command, Output};

fn mrb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mrb")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = mrb(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

fn json(p: &Path) -> serde_json::Value {
    serde_json::from_str(&read(p)).unwrap()
}

const SMALL: &[&str] = &["--n", "4", "--depths", "0,2,4,8", "--circuits-per-depth", "6", "--shots", "40"];

#[test]
fn design_writes_one_file_per_circuit() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d");
    let o = out.to_str().unwrap();
    ok(&["design", "--seed", "1", "--circuits-per-depth", "30", "--depths", "0,2,4", "--out", o]);
    assert_eq!(std::fs::read_dir(out.join("circuits")).unwrap().count(), 90);
    assert_eq!(json(&out.join("design.json"))["schema"], "mrb-design/1");

    let again = dir.path().join("d2");
    ok(&["design", "--seed", "1", "--circuits-per-depth", "30", "--depths", "0,2,4", "--out", again.to_str().unwrap()]);
    for name in ["design.json", "config.json", "circuits/d004_k029.txt"] {
        assert_eq!(read(&out.join(name)), read(&again.join(name)), "{name}");
    }
}

#[test]
fn odd_depth_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = mrb(&["design", "--seed", "1", "--depths", "0,3", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("even"));
}

#[test]
fn missing_seed_and_bad_flags_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    assert_eq!(mrb(&["design", "--out", d]).status.code(), Some(1));
    assert_eq!(mrb(&["design", "--seed", "x", "--out", d]).status.code(), Some(1));
    assert_eq!(mrb(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(mrb(&["--help"]).status.code(), Some(0));
}

#[test]
fn help_documents_defaults() {
    let out = ok(&["design", "--help"]);
    let text = String::from_utf8_lossy(&out.stdout);
    for s in ["--circuits-per-depth", "[default: 30]", "[default: 0,2,4,8,16,32,64]", "--config"] {
        assert!(text.contains(s), "{s} missing from help");
    }
}

#[test]
fn noiseless_simulation_hits_target() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let mut args = vec!["design", "--seed", "5", "--out", d];
    args.extend(SMALL);
    ok(&args);
    ok(&["simulate", "--design", d, "--model", "noiseless"]);
    let res = json(&dir.path().join("results.json"));
    assert_eq!(res["schema"], "mrb-results/1");
    for r in res["records"].as_array().unwrap() {
        let target = r["target"].as_str().unwrap();
        assert_eq!(r["counts"][target], 40);
        assert_eq!(r["counts"].as_object().unwrap().len(), 1);
    }
}

#[test]
fn missing_circuit_file_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let mut args = vec!["design", "--seed", "5", "--out", d];
    args.extend(SMALL);
    ok(&args);
    std::fs::remove_file(dir.path().join("circuits/d002_k003.txt")).unwrap();
    let out = mrb(&["simulate", "--design", d]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("d002_k003.txt"));
}

#[test]
fn staged_pipeline_matches_run() {
    let dir = tempfile::tempdir().unwrap();
    let staged = dir.path().join("staged");
    let s = staged.to_str().unwrap();
    let mut common = vec!["--seed", "11", "--epsilon-layers", "40", "--epsilon-samples", "200", "--bootstrap", "100"];
    common.extend(SMALL);

    let mut a = vec!["design", "--out", s];
    a.extend(&common);
    ok(&a);
    ok(&["simulate", "--design", s]);
    ok(&["epsilon", "--design", s]);
    ok(&["analyze", "--results", staged.join("results.json").to_str().unwrap(), "--epsilon", staged.join("epsilon.json").to_str().unwrap(), "--seed", "11", "--bootstrap", "100"]);

    let whole = dir.path().join("whole");
    let mut r = vec!["run", "--out", whole.to_str().unwrap()];
    r.extend(&common);
    let out = ok(&r);
    assert!(String::from_utf8_lossy(&out.stdout).contains("delta_rel"));

    for name in ["design.json", "results.json", "model.json", "epsilon.json", "report.json", "decay.csv"] {
        assert_eq!(read(&staged.join(name)), read(&whole.join(name)), "{name}");
    }
    assert_eq!(json(&whole.join("report.json"))["schema"], "mrb-report/1");
    assert!(read(&whole.join("decay.csv")).starts_with("d,mean,stderr,count\n"));
}

#[test]
fn model1_polarization_decays() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    ok(&["design", "--seed", "8", "--n", "4", "--depths", "0,8,16,32,64", "--out", d]);
    ok(&["simulate", "--design", d, "--model", "model1"]);
    ok(&["analyze", "--results", dir.path().join("results.json").to_str().unwrap()]);
    let report = json(&dir.path().join("report.json"));
    let means: Vec<f64> = report["depths"].as_array().unwrap().iter().map(|d| d["mean"].as_f64().unwrap()).collect();
    assert!(means.windows(2).all(|w| w[1] < w[0]), "{means:?}");
}

#[test]
fn run_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("campaign.json");
    std::fs::write(
        &cfg,
        r#"{"seed": 3, "n": 2, "depths": [0, 2, 4], "circuits_per_depth": 5, "shots": 30,
            "model": {"kind": "random"}, "epsilon_layers": 20, "epsilon_samples": 100, "bootstrap": 100}"#,
    )
    .unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    // the file wins over the conflicting flag
    ok(&["run", "--config", cfg.to_str().unwrap(), "--n", "8", "--out", a.to_str().unwrap()]);
    ok(&["--jobs", "1", "run", "--config", cfg.to_str().unwrap(), "--out", b.to_str().unwrap()]);
    for name in ["config.json", "design.json", "model.json", "results.json", "epsilon.json", "report.json"] {
        assert_eq!(read(&a.join(name)), read(&b.join(name)), "{name}");
    }
    assert_eq!(json(&a.join("design.json"))["n"], 2);
}

#[test]
fn analyze_accepts_hardware_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut csv = String::from("id,d,target,outcome,count\n");
    for (d, good) in [(0, 95), (2, 90), (4, 85), (8, 76)] {
        for k in 0..6 {
            let g = good + k % 3;
            csv += &format!("d{d}_k{k},{d},01,01,{g}\nd{d}_k{k},{d},01,11,{}\nd{d}_k{k},{d},01,10,{}\n", (100 - g) / 2, 100 - g - (100 - g) / 2);
        }
    }
    let path = dir.path().join("hw.csv");
    std::fs::write(&path, csv).unwrap();
    let out = ok(&["analyze", "--results", path.to_str().unwrap(), "--epsilon-omega", "0.01"]);
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("n = 2"));
    let report = json(&dir.path().join("report.json"));
    assert!(report["fit"]["p"].as_f64().unwrap() < 1.0);
    assert!(report["delta_rel"].is_number());
}

#[test]
fn validate_passes() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("v.json");
    ok(&["validate", "--shots", "20000", "--out", p.to_str().unwrap()]);
    let v = json(&p);
    assert_eq!(v["schema"], "mrb-validation/1");
    assert_eq!(v["passed"], true);
}

#[test]
fn sweep_writes_table() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = ok(&[
        "sweep", "--preset", "fig2b", "--ns", "1,2", "--seed", "4", "--depths", "0,2,4,8", "--circuits-per-depth", "5",
        "--shots", "30", "--epsilon-layers", "20", "--epsilon-samples", "100", "--bootstrap", "100", "--out", d,
    ]);
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 5);
    assert_eq!(json(&dir.path().join("sweep.json"))["schema"], "mrb-sweep/1");
    assert_eq!(mrb(&["sweep", "--preset", "fig9", "--seed", "1", "--out", d]).status.code(), Some(1));
}
