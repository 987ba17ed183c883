use std::path::Path;
use std::process::Command;

fn tempo(args: &[&str], dir: &Path) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_tempo"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str], dir: &Path) -> String {
    let out = tempo(args, dir);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

const GRID: &str = r#"{
  "nWnt": [100], "nLRP6_lr": [0, 1], "kRaftInternal": [0.002, 0.3], "kLrpEndo": [0.02]
}"#;

#[test]
fn simulate_convert_cluster_render() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("grid.json"), GRID).unwrap();
    ok(&["simulate", "--grid", "grid.json", "--seed", "7", "--out", "scan.json"], d);
    assert!(ok(&["validate", "--input", "scan.json"], d).starts_with("ok: 4 runs"));

    ok(&["convert", "--input", "scan.json", "--output", "scan.csv"], d);
    ok(&["convert", "--input", "scan.csv", "--output", "wide.csv", "--to", "wide-csv"], d);
    ok(&["convert", "--input", "wide.csv", "--format", "wide-csv", "--output", "back.json"], d);
    assert_eq!(
        std::fs::read(d.join("scan.json")).unwrap(),
        std::fs::read(d.join("back.json")).unwrap()
    );

    ok(&["cluster", "--scan", "scan.csv", "--k", "2", "--k-for", "lrp6Dim=1", "--out", "model.json"], d);
    let model: serde_json::Value = serde_json::from_slice(&std::fs::read(d.join("model.json")).unwrap()).unwrap();
    assert_eq!(model["observables"][0]["clusters"].as_array().unwrap().len(), 1);
    assert_eq!(model["observables"][3]["clusters"].as_array().unwrap().len(), 2);

    std::fs::write(d.join("sel.json"), r#"{"brushes": {"nLRP6_lr": {"lo": 1, "hi": 1}}}"#).unwrap();
    ok(
        &[
            "render", "--scan", "scan.json", "--clusters", "model.json", "--selection", "sel.json", "--out", "plot.svg",
            "--width", "800", "--height", "400",
        ],
        d,
    );
    let svg = std::fs::read_to_string(d.join("plot.svg")).unwrap();
    assert!(svg.contains(r#"viewBox="0 0 800 400""#));
    assert_eq!(svg.matches("<polyline class=\"run active\"").count(), 2);

    ok(&["render", "--scan", "scan.json", "--clusters", "model.json", "--axis-order", "bCat_nuc,nWnt", "--out", "two.svg"], d);
    let svg = std::fs::read_to_string(d.join("two.svg")).unwrap();
    assert_eq!(svg.matches("class=\"axis\"").count(), 2);
}

#[test]
fn failures_exit_non_zero() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("bad.csv"), "run_id,a,observable,t,value\nr,1,y,0,x\n").unwrap();
    let out = tempo(&["validate", "--input", "bad.csv"], d);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("row 2"), "{}", String::from_utf8_lossy(&out.stderr));

    std::fs::write(d.join("dup.csv"), "run_id,a,observable,t,value\nr,1,y,0,1\nr,1,y,1,1\ns,1,y,0,1\n").unwrap();
    let out = tempo(&["validate", "--input", "dup.csv"], d);
    assert!(!out.status.success());

    let out = tempo(&["convert", "--input", "missing.json", "--output", "x.json"], d);
    assert!(!out.status.success());
    let out = tempo(&["cluster", "--scan", "bad.csv", "--k-for", "oops", "--out", "m.json"], d);
    assert!(!out.status.success());
}
