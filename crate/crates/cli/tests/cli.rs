use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_saddle-bench"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str], out: &Path) -> Output {
    bin().args(args).env("SADDLE_OUT_DIR", out).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn verify_lemma2_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["verify", "--suite", "lemma2", "--samples", "10000", "--seed", "7"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("violations 0"));
}

#[test]
fn verify_other_suites() {
    let dir = tempfile::tempdir().unwrap();
    for suite in ["lemma1", "argmax_lipschitz"] {
        let o = run(&["verify", "--suite", suite, "--samples", "500", "--seed", "3"], dir.path());
        assert_eq!(o.status.code(), Some(0), "{suite}");
    }
}

#[test]
fn predict_b1() {
    let dir = tempfile::tempdir().unwrap();
    for file in ["b1.json", "b1_spec.json"] {
        let spec = configs().join(file);
        let o = run(&["predict", "--spec", spec.to_str().unwrap()], dir.path());
        assert_eq!(o.status.code(), Some(0));
        assert!(stdout(&o).lines().any(|l| l == "outer base 2"), "{}", stdout(&o));
    }
}

#[test]
fn solve_mirror_prox_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let inst = configs().join("b1.json");
    let o = run(
        &["solve", "--engine", "mirror_prox", "--instance", inst.to_str().unwrap(), "--eps", "1e-8", "--run-id", "mp"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = std::fs::read_to_string(dir.path().join("summary_mp.csv")).unwrap();
    let mut lines = summary.lines();
    assert_eq!(
        lines.next().unwrap(),
        "run_id,engine,n,m,cond,mu_x,mu_y,eps,gap,calls_grad_r,calls_grad_h,calls_gradx_F,calls_grady_F,calls_prox_r,calls_prox_h,matvecs,wall_ms,converged"
    );
    assert!(lines.next().unwrap().ends_with(",true"));
    let history = std::fs::read_to_string(dir.path().join("history_mp.csv")).unwrap();
    let mut rows = history.lines();
    assert_eq!(rows.next().unwrap(), "iter,gap,calls_gradx_F,calls_grady_F,wall_ms");
    let parsed: Vec<Vec<f64>> = rows
        .map(|r| r.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert!(!parsed.is_empty());
    for w in parsed.windows(2) {
        assert!(w[1][0] > w[0][0]);
        assert!(w[1][2] >= w[0][2] && w[1][3] >= w[0][3]);
    }
}

#[test]
fn solve_from_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("solve_b1.json");
    let o = run(&["solve", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(dir.path().join("summary_b1-mirror-prox.csv").exists());
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"family\": \"nope\"}").unwrap();
    let o = run(&["solve", "--instance", bad.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["solve", "--instance", "/nonexistent.json"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let inst = configs().join("b1.json");
    let o = run(&["solve", "--instance", inst.to_str().unwrap(), "--engine", "warp"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["solve", "--instance", inst.to_str().unwrap(), "--eps", "-1"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["frobnicate"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_is_byte_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = configs().join("sweep_small.json");
    for d in [&a, &b] {
        let o = run(&["sweep", "--config", cfg.to_str().unwrap(), "--out", d.path().to_str().unwrap()], d.path());
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let mut names: Vec<_> = std::fs::read_dir(a.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert_eq!(names.len(), 1 + 24);
    for n in names {
        let x = std::fs::read(a.path().join(&n)).unwrap();
        let y = std::fs::read(b.path().join(&n)).unwrap();
        assert_eq!(x, y, "{n:?} differs");
    }
    let summary = std::fs::read_to_string(a.path().join("small_summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 25);
    assert!(summary.lines().skip(1).all(|l| l.ends_with(",true")));
}
