//! End-to-end checks of the `ddpce` binary: exit codes, output files, and
//! rerun determinism.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn ddpce(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ddpce"))
        .args(args)
        .output()
        .expect("failed to launch ddpce")
}

fn write_config(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("experiment.cfg");
    fs::write(
        &path,
        "\
model = poly_d3
dim.1 = uniform(-1, 1)
dim.2 = uniform(-1, 1)
dim.3 = uniform(-1, 1)
train_size = 80
ref_size = 4000
degree = 2
alphas = 0, 0.5, 1.0
alpha_direction = inverse
schemes = ols
seed_train = 21
seed_ref = 22
",
    )
    .unwrap();
    path
}

#[test]
fn run_writes_reports_and_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");

    let run_a = ddpce(&["run", "--config", cfg.to_str().unwrap(), "--out", out_a.to_str().unwrap()]);
    assert!(run_a.status.success(), "stderr: {}", String::from_utf8_lossy(&run_a.stderr));
    let run_b = ddpce(&["run", "--config", cfg.to_str().unwrap(), "--out", out_b.to_str().unwrap()]);
    assert!(run_b.status.success());

    for file in ["table.csv", "curves.csv", "meta.txt"] {
        let a = fs::read(out_a.join(file)).unwrap();
        let b = fs::read(out_b.join(file)).unwrap();
        assert!(!a.is_empty(), "{file} is empty");
        assert_eq!(a, b, "{file} differs between reruns");
    }
    let table = fs::read_to_string(out_a.join("table.csv")).unwrap();
    assert!(table.starts_with("case,p5_dev,p95_dev,mean_dev,std_dev,score_lr\n"));
    assert_eq!(table.lines().count(), 1 + 4); // ols + three alphas
}

#[test]
fn seed_override_changes_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    assert!(ddpce(&["run", "--config", cfg.to_str().unwrap(), "--out", out_a.to_str().unwrap()])
        .status
        .success());
    assert!(ddpce(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_b.to_str().unwrap(),
        "--seed-override",
        "999",
    ])
    .status
    .success());
    let a = fs::read(out_a.join("table.csv")).unwrap();
    let b = fs::read(out_b.join("table.csv")).unwrap();
    assert_ne!(a, b, "seed override had no effect");
}

#[test]
fn sample_basis_fit_chain() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    let samples = dir.path().join("samples.csv");
    let basis = dir.path().join("basis.txt");
    let model = dir.path().join("model.txt");

    let out = ddpce(&[
        "sample",
        "--config",
        cfg.to_str().unwrap(),
        "--count",
        "120",
        "--seed",
        "5",
        "--out",
        samples.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&samples).unwrap();
    assert!(text.starts_with("x1,x2,x3\n"));
    assert_eq!(text.lines().count(), 121);

    let out = ddpce(&[
        "basis",
        "--input",
        samples.to_str().unwrap(),
        "--degree",
        "2",
        "--out",
        basis.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(fs::read_to_string(&basis).unwrap().starts_with("ddpce-basis 1\n"));

    // Attach a response column so `fit` has something to regress on.
    let with_y: String = {
        let mut lines = text.lines();
        let header = format!("{},y\n", lines.next().unwrap());
        let mut body = String::new();
        for line in lines {
            let x1: f64 = line.split(',').next().unwrap().parse().unwrap();
            body.push_str(&format!("{line},{}\n", 1.0 + 2.0 * x1));
        }
        header + &body
    };
    let samples_y = dir.path().join("samples_y.csv");
    fs::write(&samples_y, with_y).unwrap();

    let out = ddpce(&[
        "fit",
        "--input",
        samples_y.to_str().unwrap(),
        "--degree",
        "2",
        "--scheme",
        "alpha:-1",
        "--out",
        model.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&model).unwrap();
    assert!(text.starts_with("ddpce-model 1\n"));
    assert!(text.contains("scheme tempered -1"));
}

#[test]
fn errors_exit_nonzero_with_an_error_line() {
    let out = ddpce(&["run", "--config", "/nonexistent/experiment.cfg", "--out", "/tmp/x"]);
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.starts_with("error: "), "stderr was: {stderr}");

    // Fitting data without a y column is a configuration error.
    let dir = tempfile::tempdir().unwrap();
    let samples = dir.path().join("noy.csv");
    fs::write(&samples, "x1\n0.0\n0.5\n1.0\n").unwrap();
    let out = ddpce(&[
        "fit",
        "--input",
        samples.to_str().unwrap(),
        "--degree",
        "1",
        "--out",
        dir.path().join("m.txt").to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error: "));
}
