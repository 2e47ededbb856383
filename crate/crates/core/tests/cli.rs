use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use spdc::matrix::DetValue;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spdc"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn spdc")
}

fn fields(report: &str) -> HashMap<String, String> {
    report
        .lines()
        .filter_map(|l| l.split_once(' '))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn run_reports_fixture_determinant() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.txt");
    let m8 = fixture("m8.txt");
    let out = run(&["run", p(&m8), "--servers", "2", "--method", "Q3", "--out", p(&report)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let f = fields(&fs::read_to_string(&report).unwrap());
    assert_eq!(f["status"], "ok");
    assert_eq!(f["auth_verdict"], "1");
    let want: f64 = fs::read_to_string(fixture("m8.det")).unwrap().trim().parse().unwrap();
    let sign: i8 = f["det_sign"].parse().unwrap();
    let logm: f64 = f["det_log_magnitude"].parse().unwrap();
    assert!(DetValue::from_sign_log(sign, logm).approx_eq(&DetValue::from_f64(want), 1e-6));
    let v: f64 = f["det_value"].parse().unwrap();
    assert!((v - want).abs() <= 1e-6 * want.abs());
}

#[test]
fn tampered_run_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.txt");
    let out = run(&[
        "run",
        p(&fixture("m8.txt")),
        "--servers",
        "3",
        "--fault",
        "server=2,block=U_22,rel=1e-2",
        "--out",
        p(&report),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let f = fields(&fs::read_to_string(&report).unwrap());
    assert_eq!(f["status"], "tampered");
}

#[test]
fn bad_matrix_files_exit_1() {
    let out = run(&["run", p(&fixture("nonsquare.txt"))]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("square"));

    let out = run(&["run", p(&fixture("malformed.txt"))]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3, column 3"), "{err}");

    let out = run(&["run", "/definitely/not/here.txt"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn usage_errors() {
    assert_ne!(run(&["run"]).status.code(), Some(0));
    assert_ne!(run(&["frobnicate"]).status.code(), Some(0));
    let bad_fault = run(&["run", p(&fixture("m8.txt")), "--fault", "server=2,block=X_11"]);
    assert_ne!(bad_fault.status.code(), Some(0));
}

#[test]
fn reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for i in 0..2 {
        let (r, t, m) = (
            dir.path().join(format!("r{i}")),
            dir.path().join(format!("t{i}")),
            dir.path().join(format!("m{i}")),
        );
        let out = run(&[
            "run",
            p(&fixture("m8.txt")),
            "--servers",
            "3",
            "--mode",
            "EWM",
            "--seed",
            "17",
            "--out",
            p(&r),
            "--trace-out",
            p(&t),
            "--metrics-out",
            p(&m),
        ]);
        assert_eq!(out.status.code(), Some(0));
        files.push([r, t, m].map(|f| fs::read(f).unwrap()));
    }
    assert_eq!(files[0], files[1]);
}

#[test]
fn bench_columns() {
    let out = run(&["bench", "--sizes", "8,16,32", "--servers", "2", "--method", "Q3"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = String::from_utf8(out.stdout).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).unwrap();
    let rows: Vec<Vec<u64>> = lines
        .map(|l| {
            l.split(',')
                .enumerate()
                .filter(|(i, _)| *i != col("method"))
                .map(|(_, v)| v.parse().unwrap())
                .collect()
        })
        .collect();
    assert_eq!(rows.len(), 3);
    // method column removed, so indices after it shift by one
    let idx = |name: &str| col(name) - usize::from(col(name) > col("method"));
    for (row, n) in rows.iter().zip([8u64, 16, 32]) {
        assert_eq!(row[idx("n")], n);
        assert_eq!(row[idx("cipher_flops")], n * n);
        assert!(row[idx("decipher_flops")] <= 2 * n);
        assert!(row[idx("auth_flops")] <= 2 * n * (n + 1));
        assert_eq!(row[idx("verdict")], 1);
    }
}

#[test]
fn bench_critical_path_decreases() {
    let out = run(&["bench", "--sizes", "48", "--servers", "2,3,4", "--method", "Q2"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = String::from_utf8(out.stdout).unwrap();
    let cp: Vec<u64> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(5).unwrap().parse().unwrap())
        .collect();
    assert_eq!(cp.len(), 3);
    assert!(cp[0] > cp[1] && cp[1] > cp[2], "{cp:?}");
}

#[test]
fn trace_command_accepts_export_and_rejects_forgery() {
    let dir = tempfile::tempdir().unwrap();
    for format in ["text", "csv"] {
        let t = dir.path().join(format!("trace.{format}"));
        let out = run(&[
            "run",
            p(&fixture("m8.txt")),
            "--servers",
            "4",
            "--trace-out",
            p(&t),
            "--trace-format",
            format,
        ]);
        assert_eq!(out.status.code(), Some(0));
        let ok = run(&["trace", p(&t)]);
        assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stdout));

        // Re-route one server-to-server hop to a non-neighbour.
        let text = fs::read_to_string(&t).unwrap();
        let forged = if format == "text" {
            text.replacen(" S1 S2 ", " S1 S3 ", 1)
        } else {
            text.replacen(",S1,S2,", ",S1,S3,", 1)
        };
        assert_ne!(forged, text);
        let f = dir.path().join(format!("forged.{format}"));
        fs::write(&f, forged).unwrap();
        let bad = run(&["trace", p(&f)]);
        assert_eq!(bad.status.code(), Some(2));
        assert!(String::from_utf8_lossy(&bad.stdout).contains("violation"));
    }
}

#[test]
fn verify_passes() {
    let out = run(&["verify", "--seed", "3"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert!(text.lines().all(|l| l.starts_with("PASS")));
}
