//! Problem files: the data of a Popov triple plus optional candidate
//! solutions, initial states, eigenvalue targets and settings.

use std::path::Path;

use riccati_geom_core::{Matrix, PopovTriple, Spectrum};
use serde::{Deserialize, Serialize};

use crate::number::{parse_complex, Entry};

/// On-disk layout. Matrices are arrays of rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub name: String,
    pub n: usize,
    pub m: usize,
    #[serde(rename = "A")]
    pub a: Vec<Vec<Entry>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<Entry>>,
    #[serde(rename = "Q")]
    pub q: Vec<Vec<Entry>>,
    #[serde(rename = "S")]
    pub s: Vec<Vec<Entry>>,
    #[serde(rename = "R")]
    pub r: Vec<Vec<Entry>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub candidates: Vec<CandidateFile>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub x0: Vec<Vec<Entry>>,
    /// Complex entries as `"a+bi"` strings or plain numbers.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub targets: Option<Vec<Entry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CandidateFile {
    pub label: String,
    #[serde(rename = "X")]
    pub x: Vec<Vec<Entry>>,
}

#[derive(Clone, Debug)]
pub struct Candidate {
    pub label: String,
    pub x: Matrix,
}

/// A validated problem.
#[derive(Clone, Debug)]
pub struct Problem {
    pub name: String,
    pub sigma: PopovTriple,
    pub candidates: Vec<Candidate>,
    pub x0: Vec<Vec<f64>>,
    pub targets: Option<Spectrum>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, thiserror::Error)]
pub enum ProblemError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed problem file at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("no candidate labelled {label:?} (available: {available})")]
    Lookup { label: String, available: String },
}

impl Problem {
    pub fn load(path: &Path) -> Result<Problem, ProblemError> {
        let text = std::fs::read_to_string(path).map_err(|source| ProblemError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut p = Problem::from_json(&text)?;
        if p.name.is_empty() {
            p.name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
        }
        Ok(p)
    }

    pub fn from_json(text: &str) -> Result<Problem, ProblemError> {
        let file: ProblemFile = serde_json::from_str(text).map_err(|e| ProblemError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        file.validate()
    }

    pub fn candidate(&self, label: &str) -> Result<&Candidate, ProblemError> {
        self.candidates
            .iter()
            .find(|c| c.label == label)
            .ok_or_else(|| ProblemError::Lookup {
                label: label.to_string(),
                available: self.labels(),
            })
    }

    fn labels(&self) -> String {
        if self.candidates.is_empty() {
            return "none".to_string();
        }
        self.candidates.iter().map(|c| c.label.as_str()).collect::<Vec<_>>().join(", ")
    }

    /// The labelled candidate, or the only one when no label is given.
    pub fn pick(&self, label: Option<&str>) -> Result<&Candidate, ProblemError> {
        match label {
            Some(l) => self.candidate(l),
            None if self.candidates.len() == 1 => Ok(&self.candidates[0]),
            None => Err(ProblemError::Lookup {
                label: String::new(),
                available: self.labels(),
            }),
        }
    }
}

fn matrix(name: &str, rows: &[Vec<Entry>], shape: (usize, usize)) -> Result<Matrix, ProblemError> {
    if rows.len() != shape.0 {
        return Err(ProblemError::Schema(format!(
            "{name} has {} rows, expected {}",
            rows.len(),
            shape.0
        )));
    }
    let mut m = Matrix::zeros(shape.0, shape.1);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != shape.1 {
            return Err(ProblemError::Schema(format!(
                "{name} row {i} has {} entries, expected {}",
                row.len(),
                shape.1
            )));
        }
        for (j, e) in row.iter().enumerate() {
            let v = e
                .value()
                .map_err(|err| ProblemError::Schema(format!("{name}[{i}][{j}]: {err}")))?;
            if !v.is_finite() {
                return Err(ProblemError::Schema(format!("{name}[{i}][{j}] is not finite")));
            }
            m[(i, j)] = v;
        }
    }
    Ok(m)
}

fn vector(name: &str, entries: &[Entry], n: usize) -> Result<Vec<f64>, ProblemError> {
    let rows: Vec<Vec<Entry>> = vec![entries.to_vec()];
    Ok(matrix(name, &rows, (1, n))?.row(0).to_vec())
}

impl ProblemFile {
    pub fn validate(&self) -> Result<Problem, ProblemError> {
        let (n, m) = (self.n, self.m);
        if n == 0 {
            return Err(ProblemError::Schema("n must be positive".into()));
        }
        let a = matrix("A", &self.a, (n, n))?;
        let b = matrix("B", &self.b, (n, m))?;
        let q = matrix("Q", &self.q, (n, n))?;
        let s = matrix("S", &self.s, (n, m))?;
        let r = matrix("R", &self.r, (m, m))?;
        let sigma = PopovTriple::new(a, b, q, s, r).map_err(|e| ProblemError::Schema(e.to_string()))?;

        let mut candidates: Vec<Candidate> = Vec::with_capacity(self.candidates.len());
        for c in &self.candidates {
            if candidates.iter().any(|d| d.label == c.label) {
                return Err(ProblemError::Schema(format!("duplicate candidate label {:?}", c.label)));
            }
            let x = matrix(&format!("candidate {:?}", c.label), &c.x, (n, n))?;
            candidates.push(Candidate {
                label: c.label.clone(),
                x,
            });
        }
        let x0 = self
            .x0
            .iter()
            .enumerate()
            .map(|(k, v)| vector(&format!("x0[{k}]"), v, n))
            .collect::<Result<Vec<_>, _>>()?;
        let targets = match &self.targets {
            None => None,
            Some(ts) => {
                let mut vals = Vec::with_capacity(ts.len());
                for (k, t) in ts.iter().enumerate() {
                    let z = match t {
                        Entry::Number(x) => riccati_geom_core::Complex64::new(*x, 0.0),
                        Entry::Text(s) => {
                            parse_complex(s).map_err(|e| ProblemError::Schema(format!("targets[{k}]: {e}")))?
                        }
                    };
                    vals.push(z);
                }
                Some(Spectrum::new(vals))
            }
        };
        if let Some(t) = self.tol {
            if !(t.is_finite() && t > 0.0) {
                return Err(ProblemError::Schema("tol must be positive".into()));
            }
        }
        Ok(Problem {
            name: self.name.clone(),
            sigma,
            candidates,
            x0,
            targets,
            tol: self.tol,
            seed: self.seed,
        })
    }
}
