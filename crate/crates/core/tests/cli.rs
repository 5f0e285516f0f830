use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use philab::cli::report::parse_rows;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn philab(args: &[&str], workers: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_philab"));
    cmd.args(args).env_remove("PHILAB_WORKERS");
    if let Some(w) = workers {
        cmd.env("PHILAB_WORKERS", w);
    }
    cmd.output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn shipped_checks_pass() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("checks.csv");
    let config = configs().join("checks.conf");
    let run = philab(&["run", config.to_str().unwrap(), "--out", out.to_str().unwrap()], None);
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    let rows = parse_rows(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let summaries: Vec<_> = rows.iter().filter(|r| r.schedule_value.is_none()).collect();
    assert_eq!(summaries.len(), 13);
    assert!(summaries.iter().all(|r| r.pass));
}

#[test]
fn broken_scaling_fails_and_expect_fail_negates() {
    let config = configs().join("broken_scaling.conf");
    let config = config.to_str().unwrap();
    assert_eq!(philab(&["run", config], None).status.code(), Some(1));
    assert_eq!(philab(&["run", config, "--expect-fail"], None).status.code(), Some(0));
    let dir = tempfile::tempdir().unwrap();
    let passing = write(dir.path(), "p.conf", "[l]\nkind = lemma22\nphi = gamma(1,1)\n");
    assert_eq!(philab(&["run", &passing, "--expect-fail"], None).status.code(), Some(1));
}

#[test]
fn stdout_report_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "s.conf", "[sub]\nkind = subordination\nphi = gamma(1,1)\nmu = indep-frechet(1,1)\ny = 1, 1\n");
    let run = philab(&["run", &config, "--set", "sub.reps=5000", "--seed", "3"], None);
    assert_eq!(run.status.code(), Some(0));
    let text = String::from_utf8(run.stdout).unwrap();
    assert!(text.starts_with("experiment,schedule_value,distance,residual,tolerance,pass\n"));
    let rows = parse_rows(&text).unwrap();
    assert_eq!(rows[0].schedule_value, Some(5000.0));
    // residual is the absolute error against 1/3
    assert!(rows[0].residual.unwrap() < 0.02);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(dir.path(), "g.conf", "[l]\nkind = lemma22\nphi = gamma(1,1)\n");
    let code = |args: &[&str], workers| philab(args, workers).status.code();

    assert_eq!(code(&["run", &good], None), Some(0));
    assert_eq!(code(&["run", &good], Some("2")), Some(0));
    assert_eq!(code(&["run", &good], Some("0")), Some(2));
    assert_eq!(code(&["run", &good], Some("many")), Some(2));
    assert_eq!(code(&["run", &good, "--set", "phi=gamma(-1,1)"], None), Some(2));
    assert_eq!(code(&["run", &good, "--set", "colour=red"], None), Some(2));
    assert_eq!(code(&["run", dir.path().join("absent.conf").to_str().unwrap()], None), Some(2));
    assert_eq!(code(&["frobnicate"], None), Some(2));

    let missing = write(dir.path(), "m.conf", "[s]\nkind = sum-limit\nphi = gamma(1,1)\nsummand = cauchy\n");
    assert_eq!(code(&["run", &missing], None), Some(2));
    let logistic = write(dir.path(), "x.conf", "[x]\nkind = max-limit\nphi = gamma(1,1)\nmu = logistic(1,0.5)\n");
    assert_eq!(code(&["run", &logistic], None), Some(2));

    let heavy = write(dir.path(), "h.conf", "[h]\nkind = max-limit\nphi = positive-stable(0.5)\nmu = indep-frechet(1,1)\nreps = 100\n");
    let run = philab(&["run", &heavy], None);
    assert_eq!(run.status.code(), Some(3));
    assert!(!run.stderr.is_empty());

    let unwritable = dir.path().join("no/such/dir/out.csv");
    assert_eq!(code(&["run", &good, "--out", unwritable.to_str().unwrap()], None), Some(4));
}

#[test]
fn corrupted_structure_reports_rectangle() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "c.conf", "[c]\nkind = mid-check\nmu = indep-frechet(1,1)\ncorrupt = true\n");
    let run = philab(&["run", &config], None);
    assert_eq!(run.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&run.stderr).contains("worst rectangle"));
}

#[test]
fn list_experiments_names_every_kind() {
    let run = philab(&["list-experiments"], None);
    assert_eq!(run.status.code(), Some(0));
    let text = String::from_utf8(run.stdout).unwrap();
    for kind in [
        "lemma22", "nas-sum", "sum-limit", "sum-attraction", "nas-max", "max-limit", "max-attraction", "subordination", "mid-check",
        "semigroup",
    ] {
        assert!(text.lines().any(|l| l.starts_with(kind)), "{kind}");
    }
}
