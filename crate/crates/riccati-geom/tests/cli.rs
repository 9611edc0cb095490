use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use riccati_geom::report::Results;
use riccati_geom::{cmd_stabilize, cmd_verify, cmd_zeros, Options, Problem, Report};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_riccati-geom"))
        .args(args)
        .env_remove("RICCATI_GEOM_TOL")
        .output()
        .expect("binary runs")
}

fn path(name: &str) -> String {
    fixture(name).display().to_string()
}

#[test]
fn exit_codes() {
    assert_eq!(bin(&["verify", &path("example1.json")]).status.code(), Some(0));
    // the family contains GCARE solutions that violate the kernel constraint
    assert_eq!(bin(&["verify", &path("example2.json")]).status.code(), Some(1));
    assert_eq!(bin(&["verify", &path("example2.json"), "--candidate", "t=0"]).status.code(), Some(0));
    // stabilizing needs a constrained solution
    assert_eq!(bin(&["stabilize", &path("example2.json"), "--candidate", "t=1"]).status.code(), Some(1));
    assert_eq!(bin(&["zeros", &path("example2.json"), "--candidate", "nope"]).status.code(), Some(2));
    assert_eq!(bin(&["check", "/nonexistent/problem.json"]).status.code(), Some(2));
    assert_eq!(bin(&["check", &path("example1.json"), "--tol", "-1"]).status.code(), Some(2));
    assert_eq!(bin(&["stabilize", &path("example3.json"), "--candidate", "X1", "--targets", "x"]).status.code(), Some(2));
}

#[test]
fn malformed_file_reports_location() {
    let dir = std::env::temp_dir().join(format!("riccati-geom-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.json");
    std::fs::write(&bad, "{\n  \"n\": 2,\n  \"m\": ,\n}").unwrap();
    let out = bin(&["check", &bad.display().to_string()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 3"), "{err}");
    let mismatch = dir.join("mismatch.json");
    std::fs::write(
        &mismatch,
        r#"{"n": 2, "m": 1, "A": [[0, 1]], "B": [[0], [1]], "Q": [[1, 0], [0, 0]], "S": [[0], [0]], "R": [[0]]}"#,
    )
    .unwrap();
    let out = bin(&["check", &mismatch.display().to_string()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("schema error"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn json_output_is_deterministic_and_round_trips() {
    let runs = [
        vec!["check", "example3.json"],
        vec!["verify", "example3.json"],
        vec!["zeros", "example1.json"],
        vec!["stabilize", "example3.json", "--candidate", "X1"],
        vec!["simulate", "example2.json", "--candidate", "t=0", "--with-l", "--steps", "5"],
        vec!["solve", "example1.json", "--targets", "33/4"],
    ];
    for args in runs {
        let mut full: Vec<String> = args.iter().map(|s| s.to_string()).collect();
        full[1] = path(args[1]);
        full.extend(["--format".to_string(), "json".to_string()]);
        let refs: Vec<&str> = full.iter().map(String::as_str).collect();
        let a = bin(&refs);
        let b = bin(&refs);
        assert_eq!(a.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&a.stderr));
        assert_eq!(a.stdout, b.stdout, "{args:?} is not byte-identical");
        let text = String::from_utf8(a.stdout).unwrap();
        let report = Report::from_json(&text).unwrap();
        assert_eq!(report.to_json(), text);
        assert_eq!(Report::from_json(&report.to_json()).unwrap(), report);
    }
}

#[test]
fn tolerance_precedence() {
    let p = Problem::load(&fixture("example1.json")).unwrap();
    let mut opts = Options {
        env_tol: Some(1e-6),
        ..Options::default()
    };
    assert_eq!(cmd_verify(&p, &opts).unwrap().provenance.tol, 1e-6);
    opts.tol = Some(1e-9);
    assert_eq!(cmd_verify(&p, &opts).unwrap().provenance.tol, 1e-9);
    let out = Command::new(env!("CARGO_BIN_EXE_riccati-geom"))
        .args(["check", &path("example1.json"), "--format", "json"])
        .env("RICCATI_GEOM_TOL", "1e-7")
        .output()
        .unwrap();
    let r = Report::from_json(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(r.provenance.tol, 1e-7);
}

#[test]
fn example1_rank_narrative() {
    let p = Problem::load(&fixture("example1.json")).unwrap();
    let r = cmd_zeros(&p, &Options::default()).unwrap();
    assert!(r.passed);
    let Results::Zeros(z) = r.results else { panic!() };
    assert_eq!(z.normal_rank, 5);
    let ranks: Vec<(f64, usize)> = z.rank_table.iter().map(|row| (row.s.re, row.rank)).collect();
    assert_eq!(ranks.len(), 4);
    for (s, rank) in ranks {
        let expected = if (s.abs() - 33.0 / 4.0).abs() < 1e-9 { 4 } else { 5 };
        assert!((s.abs() - 33.0 / 4.0).abs() < 1e-9 || (s.abs() - 6.0).abs() < 1e-9);
        assert_eq!(rank, expected, "s = {s}");
    }
}

#[test]
fn example3_closed_loop() {
    let p = Problem::load(&fixture("example3.json")).unwrap();
    let opts = Options {
        candidate: Some("X1".into()),
        ..Options::default()
    };
    let r = cmd_stabilize(&p, &opts).unwrap();
    assert!(r.passed);
    let Results::Stabilize(s) = r.results else { panic!() };
    let mut re: Vec<f64> = s.closed_loop.iter().map(|z| z.re).collect();
    re.sort_by(f64::total_cmp);
    for (got, want) in re.iter().zip([-3.0, -2.0, -1.0]) {
        assert!((got - want).abs() < 1e-8);
    }
    assert!(s.closed_loop.iter().all(|z| z.im.abs() < 1e-8));
}
