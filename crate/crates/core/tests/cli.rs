use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_condibeam"))
}

fn config_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("condibeam-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, contents).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn run_config(experiment: &str, cfg: &Path, extra: &[&str]) -> Output {
    let mut args = vec![experiment, "--config", cfg.to_str().unwrap()];
    args.extend_from_slice(extra);
    run(&args)
}

#[test]
fn successful_run_exits_zero() {
    let out = run_config("y-matrix", &config_path("y_matrix.toml"), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\"experiment\": \"y-matrix\""));
    assert!(text.contains("oracle_rel_diff"));
    assert!(!text.contains("duration_ms"));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let cfg = config_path("scheme_a.toml");
    let a = run_config("scheme-a", &cfg, &[]);
    let b = run_config("scheme-a", &cfg, &[]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn config_is_echoed_verbatim() {
    let raw = "# echo check\nexperiment = \"prob-scan\"\nn_max = 4\ncutoff = 16\n";
    let cfg = scratch("echo.toml", raw);
    let out = run_config("prob-scan", &cfg, &[]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let escaped = serde_json::to_string(raw).unwrap();
    assert!(text.contains(&format!("\"config\": {escaped}")));
}

#[test]
fn csv_output_has_axis_header() {
    let out = run_config("quadrature-grid", &config_path("chi_quadrature.toml"), &["--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# axis1 x -6 6 121"));
    assert!(lines.next().unwrap().starts_with("# axis2 phi 0 "));
    assert_eq!(lines.next(), Some("# kind quadrature"));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 121 * 61);
}

#[test]
fn out_flag_writes_file() {
    let dest = std::env::temp_dir().join(format!("condibeam-cli-out-{}.json", std::process::id()));
    let out = run_config("povm-demo", &config_path("povm_demo.toml"), &["--out", dest.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&dest).unwrap();
    assert!(text.contains("\"experiment\": \"povm-demo\""));
    std::fs::remove_file(dest).ok();
}

#[test]
fn unknown_key_is_a_config_error() {
    let cfg = scratch("unknown.toml", "experiment = \"y-matrix\"\ncutof = 10\n");
    let out = run_config("y-matrix", &cfg, &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cutof"));
}

#[test]
fn unknown_experiment_and_missing_config_exit_two() {
    assert_eq!(run(&["no-such-experiment", "--config", "x.toml"]).status.code(), Some(2));
    assert_eq!(run(&["y-matrix"]).status.code(), Some(2));
    assert_eq!(run(&["--bogus-flag"]).status.code(), Some(2));
    let cfg = config_path("y_matrix.toml");
    assert_eq!(run_config("y-matrix", &cfg, &["--format", "xml"]).status.code(), Some(2));
}

#[test]
fn truncation_failure_is_a_domain_error() {
    let cfg = scratch("domain.toml", "experiment = \"scheme-b\"\nn = 2\nbeta = \"6+0i\"\ncutoff = 8\n");
    let out = run_config("scheme-b", &cfg, &[]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn selftest_passes_and_mutation_fails() {
    let ok = run(&["selftest"]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("selftest passed"));

    let bad = run(&["selftest", "--mutate", "flip-sign"]);
    assert_eq!(bad.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&bad.stdout).contains("first failing property `closed-form-vs-oracle`"));
}
