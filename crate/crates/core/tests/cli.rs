use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn squidchain(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_squidchain"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn parse_csv(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header = rdr.headers().unwrap().iter().map(str::to_owned).collect();
    let rows = rdr
        .records()
        .map(|r| r.unwrap().iter().map(|v| v.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

#[test]
fn sweep_to_stdout() {
    let o = squidchain(&[
        "--preset",
        "c1",
        "sweep",
        "--f-start",
        "1 MHz",
        "--f-stop",
        "100 MHz",
        "--points",
        "5",
    ]);
    assert!(o.status.success());
    let (header, rows) = parse_csv(&stdout(&o));
    assert_eq!(header, ["f_Hz", "eta", "epsilon_uc_hbar"]);
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[0][0], 1e6);
    assert_eq!(rows[4][0], 1e8);
    for r in &rows {
        assert!((r[1] - 3.7030).abs() < 1e-3);
        assert!((r[2] - 5.2368).abs() < 1e-3);
    }
}

#[test]
fn sweep_is_deterministic() {
    let args = ["--preset", "32x2", "sweep", "--points", "40"];
    assert_eq!(squidchain(&args).stdout, squidchain(&args).stdout);
}

#[test]
fn low_bandwidth_cryo_rf_curve_matches_golden() {
    let o = squidchain(&[
        "--preset",
        "48x3,cryorf",
        "sweep",
        "--f-start",
        "5 MHz",
        "--f-stop",
        "50 MHz",
        "--points",
        "10",
    ]);
    assert!(o.status.success());
    let golden = fs::read_to_string(
        Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/48x3_cryorf_5_50MHz.csv"),
    )
    .unwrap();
    let (gh, grows) = parse_csv(&golden);
    let (h, rows) = parse_csv(&stdout(&o));
    assert_eq!(h, gh);
    assert_eq!(rows.len(), grows.len());
    for (r, g) in rows.iter().zip(&grows) {
        for (a, b) in r.iter().zip(g) {
            assert!((a / b - 1.0).abs() < 1e-8, "{a} vs {b}");
        }
    }
}

#[test]
fn sweep_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    let o = squidchain(&[
        "--preset",
        "16x1",
        "sweep",
        "--points",
        "3",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("f_Hz,eta,epsilon_uc_hbar\n"));
    assert!(text.ends_with('\n'));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn unwritable_output_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("missing/out.csv");
    let o = squidchain(&["sweep", "--points", "3", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing"));
}

#[test]
fn missing_config_is_io_error() {
    let o = squidchain(&["--config", "/nonexistent/chain.toml", "sweep"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        "[first_stage]\nLsq = 200\n",
        "[coupling]\nkappa = 0.1\nextra = 1\n",
        "[second_stage]\npreset = \"48x3\"\n[[preamp]]\npreset = \"rt300\"\nf_lo = \"0 Hz\"\n[sweep]\nf_start = \"1 MHz\"\nf_stop = \"400 MHz\"\n",
        "[sweep\n",
    ];
    for (i, text) in cases.iter().enumerate() {
        let path = dir.path().join(format!("c{i}.toml"));
        fs::write(&path, text).unwrap();
        let o = squidchain(&["--config", path.to_str().unwrap(), "sweep"]);
        assert_eq!(
            o.status.code(),
            Some(2),
            "case {i}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
    assert_eq!(
        squidchain(&["--preset", "nope", "sweep"]).status.code(),
        Some(2)
    );
}

#[test]
fn parse_error_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    fs::write(&path, "[coupling]\nLin = 100\n").unwrap();
    let o = squidchain(&["--config", path.to_str().unwrap(), "report"]);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 2, column 7"), "{err}");
}

#[test]
fn config_file_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("chain.toml");
    fs::write(
        &path,
        r#"
[first_stage]
preset = "c1"
[second_stage]
preset = "48x3"
[[preamp]]
preset = "cryorf"
[sweep]
f_start = "5 MHz"
f_stop = "50 MHz"
points = 4
outputs = ["epsilon_uc", "t_min_complex"]
"#,
    )
    .unwrap();
    let o = squidchain(&["--config", path.to_str().unwrap(), "sweep"]);
    assert!(o.status.success());
    let (header, rows) = parse_csv(&stdout(&o));
    assert_eq!(header, ["f_Hz", "epsilon_uc_hbar", "t_min_complex_K"]);
    assert_eq!(rows.len(), 4);
    assert!(rows.windows(2).all(|w| w[1][1] > w[0][1]));
}

#[test]
fn match_reports_couplings() {
    let o = squidchain(&[
        "--preset", "c1", "match", "--q", "1e6", "--t-res", "0 K", "--points", "3",
    ]);
    assert!(o.status.success());
    let (header, rows) = parse_csv(&stdout(&o));
    assert_eq!(header, ["f_Hz", "kappa_g_on_res", "kappa_g_scan"]);
    for r in rows {
        assert!((r[1] * r[1] * 1e6 - 4.0 / 11f64.sqrt()).abs() < 1e-6);
        assert!((r[2] * r[2] * 1e6 - 4.40).abs() < 0.01);
    }
}

#[test]
fn match_records_unreachable_coupling() {
    let o = squidchain(&["--preset", "48x3", "match", "--q", "1", "--points", "3"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.lines().next().unwrap().ends_with(",error"));
    assert!(text.contains("exceeds 1"));
}

#[test]
fn report_prints_aligned_summary() {
    let o = squidchain(&["--preset", "48x3,cryorf", "report", "--freq", "30 MHz"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("48x3 at 1 K"));
    assert!(text.contains("cryogenic RF"));
    let eta_line = text.lines().find(|l| l.starts_with("eta ")).unwrap();
    assert_eq!(eta_line.find(|c: char| c.is_ascii_digit()), Some(28));
}

#[test]
fn validate_lists_every_check() {
    let o = squidchain(&["validate"]);
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().filter(|l| l.starts_with('[')).collect();
    assert_eq!(lines.len(), 11);
    let failed = lines.iter().filter(|l| l.starts_with("[FAIL]")).count();
    let expected = if failed == 0 { Some(0) } else { Some(1) };
    assert_eq!(o.status.code(), expected);
}
