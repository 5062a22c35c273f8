use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn epigvf(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_epigvf"))
        .args(args)
        .arg("--out-dir")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn csv_rows(path: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| {
            l.split(',')
                .map(|v| v.parse().unwrap_or(f64::NAN))
                .collect()
        })
        .collect()
}

#[test]
fn transform_four_point_circle() {
    let dir = tempfile::tempdir().unwrap();
    let out = epigvf(&["transform", "--synth", "circle:4"], dir.path());
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let rows = csv_rows(&dir.path().join("spectrum.csv"));
    assert_eq!(rows.len(), 4);
    for r in rows {
        let want = if r[0] == 1.0 { 1.0 } else { 0.0 };
        assert!((r[3] - want).abs() < 1e-12, "{r:?}");
    }
    assert!(String::from_utf8_lossy(&out.stdout).contains("N = 4"));
    assert!(dir.path().join("config.toml").exists());
}

#[test]
fn transform_reads_csv_input() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("path.csv");
    fs::write(&input, "x,y\n1,0\n0,1\n-1,0\n0,-1\n").unwrap();
    let out = epigvf(
        &["transform", "--input", input.to_str().unwrap()],
        dir.path(),
    );
    assert!(out.status.success());
    assert_eq!(csv_rows(&dir.path().join("spectrum.csv")).len(), 4);
}

#[test]
fn missing_file_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("no_such_path.csv");
    let out = epigvf(
        &["transform", "--input", missing.to_str().unwrap()],
        dir.path(),
    );
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("no_such_path.csv"));
}

#[test]
fn parse_error_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("bad.csv");
    fs::write(&input, "x,y\n1,0\n0,abc\n").unwrap();
    let out = epigvf(
        &["transform", "--input", input.to_str().unwrap()],
        dir.path(),
    );
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.csv") && err.contains("line 3"), "{err}");
}

#[test]
fn full_reconstruction_passes_through_samples() {
    let dir = tempfile::tempdir().unwrap();
    let out = epigvf(
        &[
            "reconstruct",
            "--synth",
            "lissajous:758:3,2,2,2",
            "--m-list",
            "10,20,40,100,full",
        ],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for name in ["m10", "m20", "m40", "m100", "full"] {
        assert!(dir
            .path()
            .join(format!("reconstruction_{name}.csv"))
            .exists());
    }
    // Compare against the synthetic samples themselves.
    let lis = |i: usize| {
        let t = std::f64::consts::TAU * i as f64 / 758.0;
        (2.0 * (3.0 * t).cos(), 2.0 * (2.0 * t).sin())
    };
    let rows = csv_rows(&dir.path().join("reconstruction_full.csv"));
    assert_eq!(rows.len(), 758);
    for (i, r) in rows.iter().enumerate() {
        let (x, y) = lis(i);
        assert!((r[1] - x).hypot(r[2] - y) < 1e-6, "row {i}");
    }
}

#[test]
fn single_term_reconstruction_is_finite() {
    let dir = tempfile::tempdir().unwrap();
    let out = epigvf(
        &[
            "reconstruct",
            "--synth",
            "ellipse:64",
            "--m-list",
            "1",
            "--theta-samples",
            "50",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let rows = csv_rows(&dir.path().join("reconstruction_m1.csv"));
    assert_eq!(rows.len(), 50);
    assert!(rows.iter().flatten().all(|v| v.is_finite()));
}

#[test]
fn window_out_of_range_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = epigvf(
        &["reconstruct", "--synth", "circle:8", "--m-list", "9"],
        dir.path(),
    );
    assert!(!out.status.success());
}

#[test]
fn simulate_writes_every_step() {
    let dir = tempfile::tempdir().unwrap();
    let out = epigvf(
        &[
            "simulate",
            "--synth",
            "lissajous:758:3,2,2,2",
            "--sigma1",
            "0.1",
            "--sigma2",
            "0.15",
            "--seed",
            "7",
            "--window-m",
            "100",
            "--x0",
            "-1",
            "--y0",
            "2",
            "--duration",
            "20",
            "--dt",
            "0.01",
        ],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let rows = csv_rows(&dir.path().join("trajectory.csv"));
    assert_eq!(rows.len(), 2001);
    assert!((rows.last().unwrap()[0] - 20.0).abs() < 1e-9);
    let summary = fs::read_to_string(dir.path().join("summary.txt")).unwrap();
    assert!(summary.contains("convergence_time") && summary.contains("final_V1"));
}

#[test]
fn on_path_start_stays_on_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = epigvf(
        &[
            "simulate",
            "--synth",
            "circle:32",
            "--x0",
            "1",
            "--y0",
            "0",
            "--duration",
            "5",
            "--dt",
            "0.01",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let rows = csv_rows(&dir.path().join("trajectory.csv"));
    assert!(rows.iter().all(|r| r[7] < 1e-8));
}

#[test]
fn huge_step_fails_with_step_index() {
    let dir = tempfile::tempdir().unwrap();
    let out = epigvf(
        &["simulate", "--synth", "circle:32", "--dt", "10"],
        dir.path(),
    );
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("step"));
}

#[test]
fn noise_free_full_window_certifies() {
    let dir = tempfile::tempdir().unwrap();
    let out = epigvf(
        &[
            "certify",
            "--synth",
            "circle:32",
            "--runs",
            "2",
            "--duration",
            "10",
            "--dt",
            "0.01",
            "--x0",
            "1.5",
            "--y0",
            "0",
        ],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = fs::read_to_string(dir.path().join("report.txt")).unwrap();
    assert!(text.contains("pass = true"), "{text}");
    assert!(text.contains("delta = 0.0000000000000000e0"), "{text}");
    let json = fs::read_to_string(dir.path().join("report.json")).unwrap();
    assert!(json.contains("\"pass\": true"));
    assert_eq!(csv_rows(&dir.path().join("sweep.csv")).len(), 32);
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = [
        "certify",
        "--synth",
        "ellipse:48",
        "--sigma1",
        "0.05",
        "--sigma2",
        "0.05",
        "--seed",
        "11",
        "--window-auto",
        "--runs",
        "3",
        "--duration",
        "4",
        "--dt",
        "0.01",
    ];
    assert!(epigvf(&args, a.path()).status.success());
    assert!(epigvf(&args, b.path()).status.success());
    for f in ["report.txt", "report.json", "sweep.csv"] {
        assert_eq!(
            fs::read(a.path().join(f)).unwrap(),
            fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn config_file_wins_over_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "synth = \"circle:8\"\nwindow = 3\n").unwrap();
    let out = epigvf(
        &[
            "sweep",
            "--synth",
            "circle:16",
            "--config",
            cfg.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(csv_rows(&dir.path().join("sweep.csv")).len(), 8);
    let echoed = fs::read_to_string(dir.path().join("config.toml")).unwrap();
    assert!(
        echoed.contains("synth = \"circle:8\"") && echoed.contains("window = 3"),
        "{echoed}"
    );
}

#[test]
fn sweep_without_noise_needs_every_harmonic() {
    let dir = tempfile::tempdir().unwrap();
    let out = epigvf(
        &["sweep", "--synth", "lissajous:64:3,2,1,1", "--m-max", "10"],
        dir.path(),
    );
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    let m_star: usize = stdout
        .lines()
        .find_map(|l| l.strip_prefix("m_star = "))
        .unwrap()
        .parse()
        .unwrap();
    // Harmonics reach |k| = 3, first covered at m = 6.
    assert!(m_star >= 6, "{stdout}");
    assert_eq!(csv_rows(&dir.path().join("sweep.csv")).len(), 10);
}

#[test]
fn noisy_delta_is_flagged_as_estimate() {
    let dir = tempfile::tempdir().unwrap();
    let out = epigvf(
        &[
            "certify",
            "--synth",
            "circle:32",
            "--sigma1",
            "0.05",
            "--sigma2",
            "0.05",
            "--window-m",
            "4",
            "--runs",
            "1",
            "--duration",
            "2",
            "--dt",
            "0.01",
            "--delta-noisy",
        ],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = fs::read_to_string(dir.path().join("report.txt")).unwrap();
    assert!(text.contains("delta_source = noisy_estimate"), "{text}");
}
