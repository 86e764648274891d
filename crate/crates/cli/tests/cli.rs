use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn slepkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_slepkit"))
        .args(args)
        .env_remove("SLEPKIT_THREADS")
        .output()
        .unwrap()
}

fn ok(args: &[&str]) {
    let out = slepkit(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn meta(path: &Path, key: &str) -> String {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")).map(str::to_string))
        .unwrap()
}

#[test]
fn cap_writes_every_eigenvalue_in_order() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cap");
    ok(&["cap", "--L", "32", "--theta-deg", "40", "--out", out.to_str().unwrap()]);
    let rows = csv_rows(&out.join("eigenvalues.csv"));
    assert_eq!(rows.len(), 1024);
    let lam: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(lam.windows(2).all(|w| w[0] >= w[1]));
    let n: usize = meta(&out.join("meta.txt"), "N_keep").parse().unwrap();
    assert!(out.join(format!("vector_{n}.csv")).exists());
    assert!(!out.join(format!("vector_{}.csv", n + 1)).exists());
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let boundary = data("south_america.txt");
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        ok(&["--threads", "1", "region", "--L", "16", "--boundary", boundary.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        outputs.push(out);
    }
    for name in ["eigenvalues.csv", "spectral_1.csv", "reduced_3.csv", "meta.txt"] {
        assert_eq!(fs::read(outputs[0].join(name)).unwrap(), fs::read(outputs[1].join(name)).unwrap(), "{name}");
    }
}

#[test]
fn compare_south_america() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cmp");
    let boundary = data("south_america.txt");
    ok(&["compare", "--L", "32", "--boundary", boundary.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let rows = csv_rows(&out.join("comparison.csv"));
    assert_eq!(rows.len(), 90);
    assert_eq!(rows[0].len(), 8);
    assert!(out.join("fast/meta.txt").exists() && out.join("reference/meta.txt").exists());
}

#[test]
fn region_australia_meta() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("aus");
    let boundary = data("australia.txt");
    ok(&["region", "--L", "64", "--boundary", boundary.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let m = out.join("meta.txt");
    let n: usize = meta(&m, "N_keep").parse().unwrap();
    assert!((100..=106).contains(&n), "{n}");
    assert_eq!(meta(&m, "method"), "reduced");
    assert_eq!(csv_rows(&out.join("eigenvalues.csv")).len(), n);
}

#[test]
fn eval_samples_stored_functions() {
    let dir = tempfile::tempdir().unwrap();
    let cap = dir.path().join("cap");
    let ev = dir.path().join("eval");
    ok(&["cap", "--L", "6", "--theta-deg", "30", "--keep", "4", "--out", cap.to_str().unwrap()]);
    ok(&["eval", "--input", cap.to_str().unwrap(), "--out", ev.to_str().unwrap()]);
    let (rows, cols, samples) = slepkit::io::read_samples_bin(&ev.join("samples.bin")).unwrap();
    assert_eq!(rows, 4);
    assert_eq!(csv_rows(&ev.join("grid.csv")).len(), cols);
    assert_eq!(samples.len(), rows * cols);
}

#[test]
fn bench_reports_both_phases() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bench");
    let boundary = data("australia.txt");
    ok(&["bench", "--L", "8,12", "--boundary", boundary.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let rows = csv_rows(&out.join("bench.csv"));
    assert_eq!(rows.len(), 8);
    assert!(rows.iter().all(|r| r[3].parse::<f64>().unwrap() >= 0.0));
    assert_eq!((rows[0][1].as_str(), rows[0][2].as_str()), ("fast", "matrix"));
    assert_eq!((rows[3][1].as_str(), rows[3][2].as_str()), ("conventional", "eig"));
}

#[test]
fn exit_codes() {
    assert_eq!(slepkit(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(slepkit(&["cap", "--L", "8", "--out", "x", "--bogus"]).status.code(), Some(2));
    assert_eq!(slepkit(&["cap", "--L", "1", "--theta-deg", "10", "--out", "x"]).status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "0 0\n0 10\n10 5\n\n1 1\noops\n").unwrap();
    let out = slepkit(&["region", "--L", "8", "--boundary", bad.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.txt:6:"), "{err}");

    let aus = data("australia.txt");
    let out = slepkit(&[
        "reference", "--L", "40", "--memory-limit-l", "32", "--boundary", aus.to_str().unwrap(), "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn help_documents_flags() {
    let out = slepkit(&["region", "--help"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    for flag in ["--L", "--boundary", "--out", "--grid-res", "--keep", "--threads", "--memory-limit-l"] {
        assert!(text.contains(flag), "{flag}");
    }
}
