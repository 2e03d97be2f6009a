//! On-disk formats.
//!
//! Problem file (JSON, `version` = [`FORMAT_VERSION`]):
//!
//! ```text
//! {
//!   "version": 1,
//!   "C": { "kind": "ball", "center": [..], "radius": 1.0 },
//!   "A": [[row], [row], ...],          // or a list of matrices for multiple sets
//!   "Q": { "kind": ... },              // or a list of sets, one per matrix
//!   "witness": [..],                   // optional
//!   "infeasibility_margin": 1.0        // optional
//! }
//! ```
//!
//! Trace CSV header: `k,step_norm_x,step_norm_u,residual_C,residual_Q,objective,lagrangian`.
//! Absent quantities are empty fields; `+∞` is written as `inf`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::linops::LinearMap;
use crate::objectives::ProblemInstance;
use crate::sets::SetSpec;
use crate::solvers::IterateTrace;

pub const FORMAT_VERSION: u32 = 1;

pub const TRACE_CSV_HEADER: &str = "k,step_norm_x,step_norm_u,residual_C,residual_Q,objective,lagrangian";

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T> OneOrMany<T> {
    fn into_vec(self) -> Vec<T> {
        match self {
            Self::One(t) => vec![t],
            Self::Many(v) => v,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemFile {
    version: u32,
    #[serde(rename = "C")]
    c: SetSpec,
    #[serde(rename = "A")]
    a: OneOrMany<Vec<Vec<f64>>>,
    #[serde(rename = "Q")]
    q: OneOrMany<SetSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    witness: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    infeasibility_margin: Option<f64>,
}

fn format_err(path: impl Into<String>, message: impl ToString) -> Error {
    Error::Format {
        path: path.into(),
        message: message.to_string(),
    }
}

/// Canonical JSON text of a problem.
pub fn problem_to_json(problem: &ProblemInstance) -> Result<String> {
    let file = ProblemFile {
        version: FORMAT_VERSION,
        c: problem.set_c.clone(),
        a: if problem.is_multiset() {
            OneOrMany::Many(problem.maps.iter().map(LinearMap::to_rows).collect())
        } else {
            OneOrMany::One(problem.maps[0].to_rows())
        },
        q: if problem.is_multiset() {
            OneOrMany::Many(problem.sets_q.clone())
        } else {
            OneOrMany::One(problem.sets_q[0].clone())
        },
        witness: problem.witness.clone(),
        infeasibility_margin: problem.infeasibility_margin,
    };
    Ok(serde_json::to_string_pretty(&file)?)
}

/// Parses and validates a problem, reporting the offending field on failure.
pub fn problem_from_json(text: &str) -> Result<ProblemInstance> {
    let value: serde_json::Value = serde_json::from_str(text)
        .map_err(|e| format_err(format!("line {}, column {}", e.line(), e.column()), e))?;
    match value.get("version").and_then(serde_json::Value::as_u64) {
        Some(v) if v == u64::from(FORMAT_VERSION) => {}
        Some(v) => {
            return Err(format_err(
                "version",
                format!("unsupported schema version {v}, expected {FORMAT_VERSION}"),
            ))
        }
        None => return Err(format_err("version", "missing or not an integer")),
    }
    let file: ProblemFile = serde_json::from_value(value).map_err(|e| format_err("$", e))?;

    file.c.validate().map_err(|e| format_err("C", e))?;
    let matrices = file.a.into_vec();
    let sets = file.q.into_vec();
    if matrices.len() != sets.len() {
        return Err(format_err(
            "Q",
            format!("{} matrices but {} Q sets", matrices.len(), sets.len()),
        ));
    }
    let mut maps = Vec::with_capacity(matrices.len());
    for (j, (rows, q)) in matrices.iter().zip(&sets).enumerate() {
        let a = LinearMap::from_rows(rows).map_err(|e| format_err(format!("A[{j}]"), e))?;
        q.validate().map_err(|e| format_err(format!("Q[{j}]"), e))?;
        if a.cols() != file.c.dim() {
            return Err(format_err(
                format!("A[{j}]"),
                format!("{} columns but C has dimension {}", a.cols(), file.c.dim()),
            ));
        }
        if a.rows() != q.dim() {
            return Err(format_err(
                format!("Q[{j}]"),
                format!("dimension {} but A[{j}] has {} rows", q.dim(), a.rows()),
            ));
        }
        maps.push(a);
    }
    let problem = ProblemInstance {
        set_c: file.c,
        maps,
        sets_q: sets,
        witness: file.witness,
        infeasibility_margin: file.infeasibility_margin,
    };
    problem.validate().map_err(|e| {
        let field = match &e {
            Error::InvalidProblem(m) if m.contains("witness") => "witness",
            Error::DimensionMismatch { .. } => "witness",
            Error::InvalidProblem(m) if m.contains("margin") => "infeasibility_margin",
            _ => "$",
        };
        format_err(field, e)
    })?;
    Ok(problem)
}

pub fn save_problem(path: impl AsRef<Path>, problem: &ProblemInstance) -> Result<()> {
    fs::write(path, problem_to_json(problem)? + "\n")?;
    Ok(())
}

pub fn load_problem(path: impl AsRef<Path>) -> Result<ProblemInstance> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    problem_from_json(&text).map_err(|e| match e {
        Error::Format { path: field, message } => Error::Format {
            path: format!("{}: {field}", path.display()),
            message,
        },
        other => other,
    })
}

/// Hex SHA-256 of the canonical problem JSON.
pub fn problem_digest(problem: &ProblemInstance) -> Result<String> {
    let json = problem_to_json(problem)?;
    Ok(hex::encode(Sha256::digest(json.as_bytes())))
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn trace_to_csv(trace: &IterateTrace) -> String {
    let mut out = String::with_capacity(64 * (trace.records.len() + 1));
    out.push_str(TRACE_CSV_HEADER);
    out.push('\n');
    for r in &trace.records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.k,
            r.step_norm_x,
            opt(r.step_norm_u),
            r.residual_c,
            r.residual_q,
            r.objective.value,
            opt(r.lagrangian)
        );
    }
    out
}

pub fn write_trace_csv(path: impl AsRef<Path>, trace: &IterateTrace) -> Result<()> {
    fs::write(path, trace_to_csv(trace))?;
    Ok(())
}

pub fn save_trace_json(path: impl AsRef<Path>, trace: &IterateTrace) -> Result<()> {
    fs::write(path, serde_json::to_string(trace)? + "\n")?;
    Ok(())
}

pub fn load_trace_json(path: impl AsRef<Path>) -> Result<IterateTrace> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| {
        format_err(
            format!("{}: line {}, column {}", path.display(), e.line(), e.column()),
            e,
        )
    })
}

/// One row of a trace CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub k: usize,
    pub step_norm_x: f64,
    pub step_norm_u: Option<f64>,
    pub residual_c: f64,
    pub residual_q: f64,
    pub objective: f64,
    pub lagrangian: Option<f64>,
}

pub fn parse_trace_csv(text: &str) -> Result<Vec<CsvRow>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == TRACE_CSV_HEADER => {}
        _ => return Err(format_err("line 1", format!("expected header {TRACE_CSV_HEADER:?}"))),
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let at = |col: &str| format!("line {}, column {col}", i + 1);
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(format_err(at("*"), format!("expected 7 fields, got {}", fields.len())));
        }
        let num = |idx: usize, name: &str| -> Result<f64> {
            fields[idx]
                .parse::<f64>()
                .map_err(|e| format_err(at(name), format!("{:?}: {e}", fields[idx])))
        };
        let opt_num = |idx: usize, name: &str| -> Result<Option<f64>> {
            if fields[idx].is_empty() {
                Ok(None)
            } else {
                num(idx, name).map(Some)
            }
        };
        rows.push(CsvRow {
            k: fields[0]
                .parse()
                .map_err(|e| format_err(at("k"), format!("{:?}: {e}", fields[0])))?,
            step_norm_x: num(1, "step_norm_x")?,
            step_norm_u: opt_num(2, "step_norm_u")?,
            residual_c: num(3, "residual_C")?,
            residual_q: num(4, "residual_Q")?,
            objective: num(5, "objective")?,
            lagrangian: opt_num(6, "lagrangian")?,
        });
    }
    Ok(rows)
}
