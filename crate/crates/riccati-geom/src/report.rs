//! Reports produced by the commands, in a form that serializes to JSON and
//! reads back to equal values.

use riccati_geom_core::{Check, Complex64, Matrix, Spectrum, Subspace};
use serde::{Deserialize, Serialize};

/// Non-finite values are written as the strings `"inf"`, `"-inf"`, `"nan"`.
mod real {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Number(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else if x.is_nan() {
            s.serialize_str("nan")
        } else if *x > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Number(x) => Ok(x),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                _ => Err(serde::de::Error::custom(format!("not a number: {t}"))),
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct C {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for C {
    fn from(z: Complex64) -> Self {
        C { re: z.re, im: z.im }
    }
}

impl From<C> for Complex64 {
    fn from(z: C) -> Self {
        Complex64::new(z.re, z.im)
    }
}

pub type Rows = Vec<Vec<f64>>;

pub fn rows(m: &Matrix) -> Rows {
    // `+ 0.0` turns -0 into 0
    (0..m.rows()).map(|i| m.row(i).iter().map(|x| x + 0.0).collect()).collect()
}

pub fn spectrum(s: &Spectrum) -> Vec<C> {
    s.iter().map(|&z| z.into()).collect()
}

/// Orthonormal basis, one column per basis vector.
pub fn basis(s: &Subspace) -> Rows {
    rows(s.basis())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tol: f64,
    pub seed: u64,
    pub version: String,
}

/// One pass/fail line with the measurement behind it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    /// Candidate label, or `problem`.
    pub subject: String,
    pub name: String,
    pub passed: bool,
    #[serde(with = "real")]
    pub defect: f64,
    #[serde(with = "real")]
    pub threshold: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub problem: String,
    pub provenance: Provenance,
    pub passed: bool,
    pub checks: Vec<CheckRecord>,
    pub results: Results,
}

impl Report {
    pub fn new(command: &str, problem: &str, provenance: Provenance, checks: Vec<CheckRecord>, results: Results) -> Self {
        Report {
            command: command.to_string(),
            problem: problem.to_string(),
            provenance,
            passed: checks.iter().all(|c| c.passed),
            checks,
            results,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> serde_json::Result<Report> {
        serde_json::from_str(text)
    }

    pub fn check(&self, subject: &str, name: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.subject == subject && c.name == name)
    }
}

/// Collects checks for one subject.
pub struct Checks<'a> {
    pub subject: &'a str,
    pub out: &'a mut Vec<CheckRecord>,
}

impl Checks<'_> {
    pub fn push(&mut self, name: &str, c: Check) {
        self.out.push(CheckRecord {
            subject: self.subject.to_string(),
            name: name.to_string(),
            passed: c.passed,
            defect: c.defect,
            threshold: c.threshold,
        });
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Results {
    Check(CheckResults),
    Verify(VerifyResults),
    Zeros(ZerosResults),
    Stabilize(StabilizeResults),
    Simulate(SimulateResults),
    Solve(SolveResults),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResults {
    pub n: usize,
    pub m: usize,
    pub rank_r: usize,
    pub rank_pi: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub label: String,
    /// `cgcare`, `gcare_only` or `failed`.
    pub status: String,
    pub residual_norm: f64,
    pub constraint_defect: f64,
    pub scale: f64,
    pub k_x: Rows,
    pub a_x: Rows,
    pub spectrum_a_x: Vec<C>,
    pub kernel_dim: usize,
    /// Basis of `R0,X`, present for CGCARE solutions.
    pub r0_basis: Option<Rows>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyResults {
    pub candidates: Vec<CandidateRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankRow {
    pub s: C,
    pub rank: usize,
    pub is_zero: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZerosResults {
    pub candidate: String,
    pub zeros: Vec<C>,
    pub normal_rank: usize,
    pub r0_dim: usize,
    pub m1: usize,
    pub infinite_multiplicity: usize,
    pub gamma: Rows,
    pub rank_table: Vec<RankRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilizeResults {
    pub candidate: String,
    pub targets: Vec<C>,
    pub r0_basis: Rows,
    pub xi_hat: Rows,
    pub omega_hat: Rows,
    pub h1: Rows,
    pub h2: Rows,
    pub k: Rows,
    pub xi: Rows,
    pub omega: Rows,
    pub l: Rows,
    pub assigned: Vec<C>,
    pub untouched: Vec<C>,
    pub closed_loop: Vec<C>,
    pub hurwitz: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Run {
    pub x0: Vec<f64>,
    pub times: Vec<f64>,
    pub states: Rows,
    /// `inf` when the cost diverges.
    #[serde(with = "real")]
    pub cost: f64,
    /// `lyapunov`, `quadrature` or `divergent`.
    pub cost_method: String,
    #[serde(with = "real")]
    pub tail_bound: f64,
    pub value_function: f64,
    pub x_is_psd: bool,
    pub certified: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulateResults {
    pub candidate: String,
    pub with_l: bool,
    pub gain: Rows,
    pub horizon: f64,
    pub steps: usize,
    pub runs: Vec<Run>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveResults {
    pub x: Rows,
    pub gamma_spectrum: Vec<C>,
    pub residual_norm: f64,
    pub constraint_defect: f64,
}
