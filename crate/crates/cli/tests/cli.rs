use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn hyperbolize(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hyperbolize"))
        .args(args)
        .env_remove("HYPERBOLIZE_RUN_DIR")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn sample_space(dir: &Path, n: &str) -> std::path::PathBuf {
    let out = dir.join("sample");
    let o = hyperbolize(&[
        "--out", p(&out), "sample", "--family", "half_plane", "--n", n, "--n-boundary", "6", "--seed", "1",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    out.join("space.json")
}

#[test]
fn metric_writes_matrix_validation_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let space = sample_space(dir.path(), "20");
    let out = dir.path().join("metric");
    let o = hyperbolize(&["--out", p(&out), "metric", "--space", p(&space), "--kind", "h"]);
    assert_eq!(code(&o), 0);
    let csv = fs::read_to_string(out.join("metric.csv")).unwrap();
    assert_eq!(csv.lines().count(), 21);
    let v: Value = serde_json::from_str(&fs::read_to_string(out.join("validation.json")).unwrap()).unwrap();
    assert_eq!(v["total_violations"], 0);
    let m: Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["command"], "metric");
    assert_eq!(m["exit_code"], 0);
    let hash = m["inputs"][p(&space)].as_str().unwrap();
    assert_eq!(hash.len(), 64);
    assert!(m["tolerances"]["metric_axiom"].is_number());
}

#[test]
fn delta_of_collinear_points_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("line.csv");
    fs::write(&m, "label,a,b,c,d\na,0,1,3,6\nb,1,0,2,5\nc,3,2,0,3\nd,6,5,3,0\n").unwrap();
    let out = dir.path().join("delta");
    let o = hyperbolize(&["--out", p(&out), "delta", "--matrix", p(&m)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&fs::read_to_string(out.join("delta.json")).unwrap()).unwrap();
    assert_eq!(v["delta"].as_f64(), Some(0.0));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    assert_eq!(code(&hyperbolize(&["delta", "--frobnicate"])), 2);
    assert_eq!(code(&hyperbolize(&["no-such-command"])), 2);
    assert_eq!(code(&hyperbolize(&["--help"])), 0);
}

#[test]
fn malformed_inputs_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "label,role,x,y\np,interior,0,oops\n").unwrap();
    let out = dir.path().join("run");
    let o = hyperbolize(&["--out", p(&out), "validate", "--space", p(&bad)]);
    assert_eq!(code(&o), 2);
    let m: Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["exit_code"], 2);

    let asym = dir.path().join("asym.csv");
    fs::write(&asym, "label,a,b\na,0,1\nb,2,0\n").unwrap();
    assert_eq!(code(&hyperbolize(&["--out", p(&out), "delta", "--matrix", p(&asym)])), 2);

    let missing = dir.path().join("missing.json");
    assert_eq!(code(&hyperbolize(&["--out", p(&out), "metric", "--space", p(&missing)])), 2);
}

#[test]
fn failed_check_exits_one_and_names_it() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("tri.csv");
    fs::write(&m, "label,a,b,c\na,0,1,5\nb,1,0,1\nc,5,1,0\n").unwrap();
    let o = hyperbolize(&["--out", p(&dir.path().join("run")), "validate", "--matrix", p(&m)]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("Triangle"));
}

#[test]
fn bounded_space_is_refused_by_theorem1() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s");
    let o = hyperbolize(&[
        "--out", p(&out), "sample", "--family", "cusp_domain", "--n", "40", "--n-boundary", "6", "--seed", "2",
    ]);
    assert_eq!(code(&o), 0);
    let o = hyperbolize(&["--out", p(&dir.path().join("t")), "theorem1", "--space", p(&out.join("space.json"))]);
    assert_eq!(code(&o), 2);
}

#[test]
fn boundary_and_theorem_commands_pass_on_a_half_plane_sample() {
    let dir = tempfile::tempdir().unwrap();
    let space = sample_space(dir.path(), "30");
    for (name, extra) in [
        ("busemann", vec![]),
        ("boundary", vec!["--base", "visual"]),
        ("boundary", vec!["--base", "hamenstadt"]),
        ("theorem1", vec!["--budget", "20000"]),
        ("corollary1", vec!["--budget", "20000"]),
    ] {
        let out = dir.path().join(format!("{name}{}", extra.len()));
        let mut args = vec!["--out", p(&out), name, "--space", p(&space)];
        args.extend(extra.iter().copied());
        let o = hyperbolize(&args);
        assert_eq!(code(&o), 0, "{name}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(out.join("manifest.json").exists());
    }
}

#[test]
fn qs_report_writes_scatter() {
    let dir = tempfile::tempdir().unwrap();
    let space = sample_space(dir.path(), "15");
    let mut mats = Vec::new();
    for kind in ["h", "j"] {
        let out = dir.path().join(kind);
        assert_eq!(code(&hyperbolize(&["--out", p(&out), "metric", "--space", p(&space), "--kind", kind])), 0);
        mats.push(out.join("metric.csv"));
    }
    let out = dir.path().join("qs");
    let o = hyperbolize(&["--out", p(&out), "qs-report", "--a", p(&mats[0]), "--b", p(&mats[1])]);
    assert_eq!(code(&o), 0);
    let scatter = fs::read_to_string(out.join("qs_scatter.csv")).unwrap();
    assert!(scatter.starts_with("t,ratio,branch"));
    assert!(scatter.lines().count() > 100);
}

#[test]
fn check_all_passes_on_the_reference_configuration() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("all");
    let o = hyperbolize(&[
        "--out", p(&out), "check-all", "--family", "half_plane", "--n", "200", "--seed", "7",
    ]);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(code(&o), 0, "{stdout}");
    assert!(stdout.contains("13 of 13 criteria passed"));
}

#[test]
fn reports_do_not_depend_on_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let space = sample_space(dir.path(), "25");
    let mut reports = Vec::new();
    for threads in ["1", "4"] {
        let out = dir.path().join(format!("t{threads}"));
        let o = hyperbolize(&[
            "--threads", threads, "--out", p(&out), "theorem1", "--space", p(&space), "--budget", "20000",
        ]);
        assert_eq!(code(&o), 0);
        reports.push((
            fs::read(out.join("theorem1.json")).unwrap(),
            fs::read(out.join("theorem1_scatter.csv")).unwrap(),
        ));
        let out = dir.path().join(format!("c{threads}"));
        let o = hyperbolize(&["--threads", threads, "--out", p(&out), "check-all", "--only", "1,5,13"]);
        assert_eq!(code(&o), 0);
        reports.push((fs::read(out.join("check_all.json")).unwrap(), Vec::new()));
    }
    assert!(reports[0] == reports[2], "theorem1 report differs between thread counts");
    assert!(reports[1] == reports[3], "check-all report differs between thread counts");
}

#[test]
fn graph_metric_commands_run_on_a_graded_sample() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g");
    let o = hyperbolize(&[
        "--out", p(&out), "sample", "--family", "half_plane", "--n", "3000", "--n-boundary", "8", "--graded",
        "--resolution", "0.08", "--depth", "6", "--seed", "3",
    ]);
    assert_eq!(code(&o), 0);
    let space = out.join("space.json");
    let t2 = dir.path().join("t2");
    let o = hyperbolize(&["--out", p(&t2), "theorem2", "--space", p(&space)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r: Value = serde_json::from_str(&fs::read_to_string(t2.join("theorem2.json")).unwrap()).unwrap();
    assert_eq!(r["passed"], true);
    let o = hyperbolize(&[
        "--out", p(&dir.path().join("c2")), "corollary2", "--space", p(&space), "--epsilon-visual", "0.01",
        "--epsilon-hamenstadt", "0.02",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}
