use std::path::Path;
use std::process::{Command, Output};

fn mrflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mrflow"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn pyramid_run_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = mrflow(&[
        "pyramid",
        "--width",
        "64",
        "--height",
        "48",
        "--levels",
        "3",
        "--out-dir",
        out,
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("oracle_match=true"), "{text}");
    assert!(text.contains("dims=64x48"), "{text}");
    for name in [
        "bilateral-pyramid.pgm",
        "bilateral-pyramid.dot",
        "bilateral-pyramid.structure.txt",
        "bilateral-pyramid.directives.txt",
        "bilateral-pyramid.graph.json",
        "bilateral-pyramid.report.json",
    ] {
        assert!(dir.path().join(name).is_file(), "{name} missing");
    }
    let img = mrflow::io::load_image(&dir.path().join("bilateral-pyramid.pgm")).unwrap();
    assert_eq!(img.dims(), (64, 48));
}

#[test]
fn pyramid_reads_input_image() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("in.pgm");
    let img =
        mrflow::GridImage::from_fn(32, 32, mrflow::ElementKind::U8, |x, y| ((x * 7 + y * 3) % 256) as f32).unwrap();
    mrflow::io::save_image(&path, &img).unwrap();
    let o = mrflow(&[
        "pyramid",
        "--width",
        "32",
        "--height",
        "32",
        "--levels",
        "2",
        "--radius",
        "2",
        "--interp",
        "bilinear",
        "--input",
        path.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("oracle_match=true"));
}

#[test]
fn multigrid_reports_residual() {
    let o = mrflow(&["multigrid", "--size", "33", "--levels", "3", "--cycles", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("study=multigrid-poisson"), "{text}");
    assert!(text.contains("relative_residual="), "{text}");
}

#[test]
fn compile_then_simulate() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = mrflow(&[
        "compile",
        "pyramid",
        "--width",
        "32",
        "--height",
        "32",
        "--levels",
        "2",
        "--out-dir",
        out,
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let graph = dir.path().join("bilateral-pyramid.graph.json");
    assert!(graph.is_file());
    assert!(!dir.path().join("bilateral-pyramid.report.json").exists());

    let report = dir.path().join("report.json");
    let csv = dir.path().join("firings.csv");
    let o = mrflow(&[
        "simulate",
        graph.to_str().unwrap(),
        "--min-depths",
        "--clock-mhz",
        "100",
        "--out",
        report.to_str().unwrap(),
        "--firings",
        csv.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert!(v["makespan_cycles"].as_u64().unwrap() >= 32 * 32);
    assert!(v["deadlock"].is_null());
    assert!(v["fps"].as_f64().unwrap() > 0.0);
    assert!(std::fs::read_to_string(&csv)
        .unwrap()
        .starts_with("cycle,process,produced"));
}

#[test]
fn deadlock_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert!(mrflow(&[
        "compile",
        "pyramid",
        "--width",
        "32",
        "--height",
        "32",
        "--levels",
        "2",
        "--out-dir",
        out
    ])
    .status
    .success());
    let graph = Path::new(out).join("bilateral-pyramid.graph.json");
    let o = mrflow(&["simulate", graph.to_str().unwrap(), "--capacity", "1"]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("Deadlock"), "{err}");
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(!v["deadlock"]["channels"].as_array().unwrap().is_empty());
}

#[test]
fn bad_config_is_an_error() {
    let o = mrflow(&["pyramid", "--width", "8", "--height", "8", "--levels", "5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("config"));
    let o = mrflow(&["simulate", "/nonexistent/graph.json"]);
    assert_eq!(o.status.code(), Some(2));
}
