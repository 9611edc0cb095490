//! Reports for the shipped fixtures compared with the versions kept under
//! `fixtures/golden`. Set `UPDATE_GOLDEN=1` to rewrite them.

use std::path::{Path, PathBuf};

use riccati_geom::commands::{cmd_check, cmd_simulate, cmd_stabilize, cmd_verify, cmd_zeros, Options};
use riccati_geom::{Problem, Report};
use serde_json::Value;

fn dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

/// Numbers agree to `1e-9` relative; everything else exactly.
fn close(a: &Value, b: &Value, at: &str) -> Result<(), String> {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => {
            let (x, y) = (x.as_f64().unwrap(), y.as_f64().unwrap());
            if (x - y).abs() <= 1e-9 * (1.0 + x.abs().max(y.abs())) {
                Ok(())
            } else {
                Err(format!("{at}: {x} vs {y}"))
            }
        }
        (Value::Array(x), Value::Array(y)) if x.len() == y.len() => {
            for (k, (u, v)) in x.iter().zip(y).enumerate() {
                close(u, v, &format!("{at}[{k}]"))?;
            }
            Ok(())
        }
        (Value::Object(x), Value::Object(y)) if x.len() == y.len() => {
            for (k, u) in x {
                let v = y.get(k).ok_or_else(|| format!("{at}.{k} missing"))?;
                // version moves independently of the numbers
                if k != "version" {
                    close(u, v, &format!("{at}.{k}"))?;
                }
            }
            Ok(())
        }
        _ if a == b => Ok(()),
        _ => Err(format!("{at}: {a} vs {b}")),
    }
}

fn golden(name: &str, report: Report) {
    let path = dir().join("golden").join(format!("{name}.json"));
    let text = report.to_json();
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, &text).unwrap();
        return;
    }
    let stored = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let a: Value = serde_json::from_str(&text).unwrap();
    let b: Value = serde_json::from_str(&stored).unwrap();
    if let Err(e) = close(&a, &b, name) {
        panic!("{name} differs from its golden report: {e}");
    }
}

fn load(name: &str) -> Problem {
    Problem::load(&dir().join(format!("{name}.json"))).unwrap()
}

fn with_candidate(label: &str) -> Options {
    Options {
        candidate: Some(label.into()),
        ..Options::default()
    }
}

#[test]
fn example1_reports() {
    let p = load("example1");
    golden("example1_check", cmd_check(&p, &Options::default()).unwrap());
    golden("example1_verify", cmd_verify(&p, &Options::default()).unwrap());
    golden("example1_zeros", cmd_zeros(&p, &Options::default()).unwrap());
}

#[test]
fn example2_reports() {
    let p = load("example2");
    golden("example2_verify", cmd_verify(&p, &Options::default()).unwrap());
    golden("example2_stabilize", cmd_stabilize(&p, &with_candidate("t=0")).unwrap());
    let mut opts = with_candidate("t=0");
    opts.with_l = true;
    opts.steps = Some(11);
    golden("example2_simulate", cmd_simulate(&p, &opts).unwrap());
}

#[test]
fn remark_reports() {
    let p = load("remark");
    golden("remark_stabilize", cmd_stabilize(&p, &Options::default()).unwrap());
}

#[test]
fn example3_reports() {
    let p = load("example3");
    golden("example3_verify", cmd_verify(&p, &Options::default()).unwrap());
    golden("example3_zeros", cmd_zeros(&p, &with_candidate("X1")).unwrap());
    golden("example3_stabilize", cmd_stabilize(&p, &with_candidate("X1")).unwrap());
}
