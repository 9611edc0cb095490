//! Human-readable rendering of reports.

use std::fmt::Write;

use crate::number::ComplexDisplay;
use crate::report::{Report, Results, Rows, C};

fn z(c: &C) -> String {
    ComplexDisplay((*c).into()).to_string()
}

fn list(cs: &[C]) -> String {
    let parts: Vec<String> = cs.iter().map(z).collect();
    format!("{{{}}}", parts.join(", "))
}

fn cell(x: f64) -> String {
    if x.abs() < 1e6 {
        format!("{:>12.6}", x + 0.0)
    } else {
        format!("{x:>12.4e}")
    }
}

fn matrix(out: &mut String, name: &str, m: &Rows) {
    if m.is_empty() || m[0].is_empty() {
        let _ = writeln!(out, "  {name} = []");
        return;
    }
    let _ = writeln!(out, "  {name} =");
    for row in m {
        let cells: Vec<String> = row.iter().map(|&x| cell(x)).collect();
        let _ = writeln!(out, "    [{}]", cells.join(" "));
    }
}

pub fn render(r: &Report) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} {}  (tol {:e}, seed {:#x}, version {})",
        r.command, r.problem, r.provenance.tol, r.provenance.seed, r.provenance.version
    );
    match &r.results {
        Results::Check(c) => {
            let _ = writeln!(out, "  n = {}, m = {}, rank R = {}, rank Pi = {}", c.n, c.m, c.rank_r, c.rank_pi);
        }
        Results::Verify(v) => {
            for c in &v.candidates {
                let _ = writeln!(
                    out,
                    "  candidate {}: {} (residual {:.3e}, constraint {:.3e}), spectrum of A_X {}, dim ker X = {}",
                    c.label,
                    c.status,
                    c.residual_norm,
                    c.constraint_defect,
                    list(&c.spectrum_a_x),
                    c.kernel_dim
                );
                if let Some(b) = &c.r0_basis {
                    matrix(&mut out, "R0 basis", b);
                }
            }
        }
        Results::Zeros(zr) => {
            let _ = writeln!(
                out,
                "  candidate {}: zeros {}, normal rank {}, dim R0 = {}, m1 = {}, infinite multiplicity {}",
                zr.candidate,
                list(&zr.zeros),
                zr.normal_rank,
                zr.r0_dim,
                zr.m1,
                zr.infinite_multiplicity
            );
            for row in &zr.rank_table {
                let _ = writeln!(
                    out,
                    "    s = {:<24} rank {}{}",
                    z(&row.s),
                    row.rank,
                    if row.is_zero { "  (zero)" } else { "" }
                );
            }
        }
        Results::Stabilize(s) => {
            let _ = writeln!(
                out,
                "  candidate {}: targets {}, assigned {}, untouched {}, closed loop {}{}",
                s.candidate,
                list(&s.targets),
                list(&s.assigned),
                list(&s.untouched),
                list(&s.closed_loop),
                if s.hurwitz { " (Hurwitz)" } else { "" }
            );
            matrix(&mut out, "K", &s.k);
            matrix(&mut out, "L", &s.l);
        }
        Results::Simulate(s) => {
            let _ = writeln!(
                out,
                "  candidate {}{}, horizon {}, {} steps",
                s.candidate,
                if s.with_l { " with L" } else { "" },
                s.horizon,
                s.steps
            );
            matrix(&mut out, "gain", &s.gain);
            for run in &s.runs {
                let _ = writeln!(
                    out,
                    "  x0 = {:?}: cost {} ({}), x0' X x0 = {}{}",
                    run.x0,
                    run.cost,
                    run.cost_method,
                    run.value_function,
                    if run.certified { "" } else { "  (not certified)" }
                );
                for (t, x) in run.times.iter().zip(&run.states) {
                    let cells: Vec<String> = x.iter().map(|&v| cell(v)).collect();
                    let _ = writeln!(out, "    t = {t:>8.4}  [{}]", cells.join(" "));
                }
            }
        }
        Results::Solve(s) => {
            matrix(&mut out, "X", &s.x);
            let _ = writeln!(out, "  spectrum of Gamma_X {}", list(&s.gamma_spectrum));
        }
    }
    for c in &r.checks {
        let _ = writeln!(
            out,
            "  [{}] {}: {} (defect {:.3e}, threshold {:.3e})",
            if c.passed { "pass" } else { "FAIL" },
            c.subject,
            c.name,
            c.defect,
            c.threshold
        );
    }
    let _ = writeln!(out, "{}", if r.passed { "PASS" } else { "FAIL" });
    out
}
