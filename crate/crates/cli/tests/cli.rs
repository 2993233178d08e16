use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn gplab(root: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gplab"))
        .args(args)
        .env("GPLAB_OUTPUT_ROOT", root)
        .current_dir(root)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SMALL_RUN: &str = r#"
scenario = "mixture"
equation = "quintic"
mu = "defocusing"
seed = 11
diagnostics = ["mass", "energy_k1", "quasinorm_s1"]

[grid]
points = 64
halfwidth = 8.0

[initial]
kind = "random-smooth"
count = 2

[integrator]
dt = 0.002
t_end = 0.1
sample_every = 0.01

[checks]
max_mass_drift = 1e-10
max_energy_drift = 1e-4
"#;

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn described_defaults_run_and_pass() {
    let dir = tempfile::tempdir().unwrap();
    let out = gplab(dir.path(), &["describe"]);
    assert!(out.status.success());
    let cfg = write_config(dir.path(), "defaults.toml", &stdout(&out));
    let run = gplab(dir.path(), &["run", &cfg]);
    assert_eq!(run.status.code(), Some(0), "{}", stderr(&run));
    let csv = fs::read_to_string(dir.path().join("defaults/trajectory.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "t,mass,energy_k1,virial_k1");
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("defaults/report.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], true);
}

#[test]
fn csv_output_is_bit_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "small.toml", SMALL_RUN);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for root in [&a, &b] {
        fs::create_dir_all(root).unwrap();
        let out = gplab(root, &["run", &cfg]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    }
    let first = fs::read(a.join("small/trajectory.csv")).unwrap();
    assert_eq!(first, fs::read(b.join("small/trajectory.csv")).unwrap());
    assert_eq!(fs::read(a.join("small/report.json")).unwrap(), fs::read(b.join("small/report.json")).unwrap());

    // a different seed draws a different state
    let other = write_config(dir.path(), "other.toml", &SMALL_RUN.replace("seed = 11", "seed = 12"));
    assert!(gplab(&a, &["run", &other]).status.success());
    assert_ne!(first, fs::read(a.join("other/trajectory.csv")).unwrap());
}

#[test]
fn values_are_written_at_full_precision() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "small.toml", SMALL_RUN);
    assert!(gplab(dir.path(), &["run", &cfg]).status.success());
    let csv = fs::read_to_string(dir.path().join("small/trajectory.csv")).unwrap();
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row.len(), 4);
    for cell in row {
        let mantissa = cell.split('e').next().unwrap().trim_start_matches('-');
        assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17, "{cell}");
    }
}

#[test]
fn empty_diagnostics_give_only_the_time_column() {
    let dir = tempfile::tempdir().unwrap();
    let text = SMALL_RUN
        .replace(r#"diagnostics = ["mass", "energy_k1", "quasinorm_s1"]"#, "diagnostics = []")
        .replace("max_mass_drift = 1e-10\nmax_energy_drift = 1e-4\n", "");
    let cfg = write_config(dir.path(), "bare.toml", &text);
    let out = gplab(dir.path(), &["run", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("bare/trajectory.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "t");
    assert_eq!(lines.len(), 12);
    assert!(lines.iter().all(|l| !l.contains(',')));
}

#[test]
fn failed_invariants_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "strict.toml", &SMALL_RUN.replace("max_energy_drift = 1e-4", "max_energy_drift = 1e-30"));
    let out = gplab(dir.path(), &["run", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("FAIL energy_k1 relative drift"));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("strict/report.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], false);
}

#[test]
fn config_errors_exit_with_two_and_locate_the_problem() {
    let dir = tempfile::tempdir().unwrap();
    let typo = write_config(dir.path(), "typo.toml", &SMALL_RUN.replace("sample_every", "sample_evry"));
    let out = gplab(dir.path(), &["run", &typo]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("sample_evry") && err.contains("line"), "{err}");

    let negative = write_config(dir.path(), "neg.toml", &SMALL_RUN.replace("dt = 0.002", "dt = -0.002"));
    let out = gplab(dir.path(), &["run", &negative]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("integrator.dt"));

    let missing = gplab(dir.path(), &["run", "does-not-exist.toml"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn output_root_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().join("elsewhere");
    let cfg = write_config(dir.path(), "small.toml", SMALL_RUN);
    let out = Command::new(env!("CARGO_BIN_EXE_gplab"))
        .args(["run", &cfg])
        .env("GPLAB_OUTPUT_ROOT", &root)
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(root.join("small/trajectory.csv").exists());
}

#[test]
fn verify_runs_selected_checks() {
    let dir = tempfile::tempdir().unwrap();
    let out = gplab(dir.path(), &["verify", "collision-diagonal", "kinetic-forms"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("overall: PASS (2/2 checks passed)"), "{text}");
}

#[test]
fn verify_rejects_unknown_checks() {
    let dir = tempfile::tempdir().unwrap();
    let out = gplab(dir.path(), &["verify", "not-a-check"]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("not-a-check") && err.contains("duhamel-residual") && err.contains("conservation"));
}

#[test]
fn conservation_of_a_cubic_mixture_at_order_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = gplab(dir.path(), &["verify", "conservation", "--equation", "cubic", "--k", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let text = stdout(&out);
    let line = text.lines().find(|l| l.contains("cubic max relative drift")).expect("drift printed");
    let fields: Vec<&str> = line.split_whitespace().collect();
    let drift: f64 = fields[fields.len() - 3].parse().unwrap();
    assert!(drift <= 1e-6);
}

#[test]
fn quintic_collapse_in_one_dimension_respects_the_rate_bound() {
    let dir = tempfile::tempdir().unwrap();
    let out = gplab(dir.path(), &["blowup", "--equation", "quintic", "--dimension", "1"]);
    assert_eq!(out.status.code(), Some(0), "{}{}", stdout(&out), stderr(&out));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("blowup-quintic-1d/report.json")).unwrap()).unwrap();
    let rep = &report["blowup"];
    assert_eq!(rep["verdict"], true);
    assert!(rep["t_star"].as_f64().unwrap() <= 1.05 * rep["t_bound"].as_f64().unwrap());
}

#[test]
fn subcritical_blowup_requests_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = gplab(dir.path(), &["blowup", "--equation", "cubic", "--dimension", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("does not blow up"));
}

#[test]
fn truncated_runs_write_plots_and_norm_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "trunc.toml",
        r#"
scenario = "truncated-hierarchy"
equation = "cubic"
mu = "focusing"
seed = 1
diagnostics = ["mass", "trace_norm_k1"]
[grid]
points = 16
halfwidth = 6.0
[initial]
kind = "random-smooth"
count = 2
[integrator]
dt = 0.01
t_end = 0.1
sample_every = 0.02
[checks]
max_mass_drift = 1e-10
max_symmetry_defect = 1e-8
[plot]
svg = true
"#,
    );
    let out = gplab(dir.path(), &["run", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let svg = fs::read_to_string(dir.path().join("trunc/trace_norm_k1.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("polyline"));

    let out = gplab(dir.path(), &["norms", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let table = fs::read_to_string(dir.path().join("trunc-norms/levels.csv")).unwrap();
    assert_eq!(table.lines().next().unwrap(), "k,hs_norm_s0,hs_norm_s1,hs_norm_s2");
    assert_eq!(table.lines().count(), 9);
}
