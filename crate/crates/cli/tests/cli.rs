//! End-to-end checks of the binary: exit codes, artifact layout, determinism
//! of results.csv (wall-clock column excluded), plot-data extraction.

use std::path::Path;
use std::process::Command;

fn tdls() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tdls"))
}

fn write_config(dir: &Path, text: &str) -> std::path::PathBuf {
    let path = dir.join("config.toml");
    std::fs::write(&path, text).unwrap();
    path
}

const SWEEP_TIME: &str = r#"
seed = 3
c0 = 1.0

[geometry]
d = 2
n = 8
rho = 0.275

[geometry.scatterer]
kind = "disk"
radius = 0.275
q = -0.5

[scheme]
method = "bdf2"
m_list = [4, 8, 16]
t_final = 1.0
lambda = "auto"

[solver]
tol = 1e-10

[incident]
a = 4.0
b = 1.4
t0 = 0.6
"#;

const KERNEL_SELFTEST: &str = r#"
seed = 11

[geometry]
d = 2
rho = 0.275

[geometry.scatterer]
kind = "disk"
radius = 0.275
q = -0.5

[kernel_selftest]
samples = 12
tol = 1e-10
"#;

fn read_results(dir: &Path) -> Vec<Vec<String>> {
    let text = std::fs::read_to_string(dir.join("results.csv")).unwrap();
    text.lines()
        .filter(|l| !l.trim_start().starts_with('#') && !l.trim().is_empty())
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn kernel_selftest_succeeds_and_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), KERNEL_SELFTEST);
    let out1 = tmp.path().join("run1");
    let out2 = tmp.path().join("run2");
    for out in [&out1, &out2] {
        let status = tdls()
            .args(["kernel-selftest", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(out)
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0));
    }
    // no wall column in this mode: whole files must match byte for byte
    let a = std::fs::read(out1.join("results.csv")).unwrap();
    let b = std::fs::read(out2.join("results.csv")).unwrap();
    assert_eq!(a, b);
    // all sampled coefficients agree with the quadrature oracle
    let rows = read_results(&out1);
    let header = &rows[0];
    let rel_ix = header.iter().position(|c| c == "rel_err").unwrap();
    assert_eq!(rows.len(), 13); // header + 12 samples
    for row in &rows[1..] {
        let rel: f64 = row[rel_ix].parse().unwrap();
        assert!(rel <= 1e-8, "{rel}");
    }
    assert!(out1.join("manifest.json").is_file());
    assert!(out1.join("config_echo.toml").is_file());
}

#[test]
fn sweep_time_runs_and_results_are_stable() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SWEEP_TIME);
    let out1 = tmp.path().join("s1");
    let out2 = tmp.path().join("s2");
    for out in [&out1, &out2] {
        let status = tdls()
            .args(["sweep-time", "--config"])
            .arg(&cfg)
            .arg("--workers")
            .arg("2")
            .arg("--out")
            .arg(out)
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0));
    }
    let r1 = read_results(&out1);
    let r2 = read_results(&out2);
    assert_eq!(r1.len(), r2.len());
    let wall_ix = r1[0].iter().position(|c| c == "wall_s").unwrap();
    for (a, b) in r1.iter().zip(&r2) {
        for (i, (x, y)) in a.iter().zip(b).enumerate() {
            if i != wall_ix {
                assert_eq!(x, y, "column {i} differs");
            }
        }
    }
    // two non-reference rows; the first has no observed order
    assert_eq!(r1.len(), 3);
    let ord_ix = r1[0].iter().position(|c| c == "observed_order").unwrap();
    assert!(r1[1][ord_ix].is_empty());
    assert!(!r1[2][ord_ix].is_empty());
    // plot data: one file for the fixed N with two data lines
    let dat = std::fs::read_to_string(out1.join("sweep_time_N8.dat")).unwrap();
    let data_lines: Vec<&str> = dat
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .collect();
    assert_eq!(data_lines.len(), 2);
    for line in data_lines {
        for field in line.split_whitespace() {
            let v: f64 = field.parse().unwrap();
            assert!(v.is_finite() && v > 0.0);
        }
    }
}

#[test]
fn single_freq_reports_oracle_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"
c0 = 1.0

[geometry]
d = 2
n = 16
rho = 0.275

[geometry.scatterer]
kind = "disk"
radius = 0.275
q = -0.5

[solver]
tol = 1e-11

[single_freq]
s = [2.0, 3.0]
"#,
    );
    let out = tmp.path().join("out");
    let status = tdls()
        .args(["single-freq", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let rows = read_results(&out);
    let err_ix = rows[0].iter().position(|c| c == "error").unwrap();
    let err: f64 = rows[1][err_ix].parse().unwrap();
    assert!(err > 0.0 && err < 0.5, "oracle error {err}");
}

#[test]
fn config_errors_exit_1() {
    let tmp = tempfile::tempdir().unwrap();
    // unparseable
    let bad = write_config(tmp.path(), "not toml ][");
    let status = tdls()
        .args(["cq-run", "--config"])
        .arg(&bad)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
    // parseable but wrong for the mode (sweep-space without n_list)
    let cfg = write_config(tmp.path(), SWEEP_TIME);
    let status = tdls()
        .args(["sweep-space", "--config"])
        .arg(&cfg)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
    // missing file
    let status = tdls()
        .args(["cq-run", "--config"])
        .arg(tmp.path().join("nope.toml"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
}

#[test]
fn solver_failure_exits_2_with_marker() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"
c0 = 1.0

[geometry]
d = 2
n = 8
rho = 0.275

[geometry.scatterer]
kind = "disk"
radius = 0.275
q = -0.5

[scheme]
method = "bdf2"
m = 8
t_final = 1.0

[solver]
tol = 1e-12
max_iter = 1
restart = 1

[incident]
a = 4.0
b = 1.4
t0 = 0.6
"#,
    );
    let out = tmp.path().join("out");
    let status = tdls()
        .args(["cq-run", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    let text = std::fs::read_to_string(out.join("results.csv")).unwrap();
    assert!(text.lines().any(|l| l.starts_with("FAILED,")), "{text}");
}

#[test]
fn cq_run_writes_frames_with_stride() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"
c0 = 1.0

[geometry]
d = 2
n = 8
rho = 0.275

[geometry.scatterer]
kind = "disk"
radius = 0.275
q = -0.5

[scheme]
method = "bdf2"
m = 8
t_final = 1.0

[solver]
tol = 1e-10

[incident]
a = 4.0
b = 1.4
t0 = 0.6

[cq_run]
frame_stride = 4
"#,
    );
    let out = tmp.path().join("out");
    let status = tdls()
        .args(["cq-run", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    // frames 0, 4, 8 written; 9 manifest rows (M+1)
    for i in [0usize, 4, 8] {
        assert!(out.join(format!("frames/frame_{i:05}.csv")).is_file());
    }
    assert!(!out.join("frames/frame_00001.csv").exists());
    let rows = read_results(&out);
    assert_eq!(rows.len(), 10);
    let manifest = std::fs::read_to_string(out.join("manifest.json")).unwrap();
    assert!(manifest.contains("roundoff_amplification"));
    assert!(manifest.contains("stability"));
}

#[test]
fn mollified_scatterer_accepted_in_cq_modes() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"
c0 = 1.0

[geometry]
d = 2
n = 16
rho = 0.275

[geometry.scatterer]
kind = "mollified-disk"
radius = 0.25
q = -0.5
ramp_width = 0.08

[scheme]
method = "bdf1"
m = 6
t_final = 1.0

[solver]
tol = 1e-9

[incident]
a = 4.0
b = 1.4
t0 = 0.6

[cq_run]
frame_stride = 0
"#,
    );
    let out = tmp.path().join("out");
    let status = tdls()
        .args(["cq-run", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    // stride 0 disables frame files
    assert!(!out.join("frames").exists());
    // but the mollified disk cannot feed the single-frequency oracle mode
    let status = tdls()
        .args(["single-freq", "--config"])
        .arg(&cfg)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
}
