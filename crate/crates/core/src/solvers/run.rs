use serde::{Deserialize, Serialize};

use super::config::{Algorithm, SolverConfig};
use super::steps::{IterateState, Stepper};
use crate::error::{check_len, Error, Result};
use crate::objectives::{
    eval_augmented_lagrangian, eval_f1_penalized, eval_f2_sf4, eval_sf3, residuals, Model,
    ObjectiveValue, ProblemInstance,
};
use crate::problems::problem_digest;
use crate::vecops::dist;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    ResidualTol,
    StepTol,
    MaxIter,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::ResidualTol => "residual_tol",
            Self::StepTol => "step_tol",
            Self::MaxIter => "max_iter",
        }
    }
}

/// One iterate and the quantities evaluated at it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub k: usize,
    pub x: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<Vec<f64>>,
    /// The algorithm's model objective at `(x^k, u^k)`.
    pub objective: ObjectiveValue,
    /// `‖x^k − x^{k−1}‖`, zero at `k = 0`.
    pub step_norm_x: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_norm_u: Option<f64>,
    pub residual_c: f64,
    pub residual_q: f64,
    /// `L_ρ(x^k, u^k, y^k)` for multiplier-based algorithms.
    #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_extended_real")]
    pub lagrangian: Option<f64>,
}

mod opt_extended_real {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Wrap(#[serde(with = "crate::objectives::extended_real")] f64);

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        v.map(Wrap).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        Ok(Option::<Wrap>::deserialize(d)?.map(|w| w.0))
    }
}

impl TraceRecord {
    pub fn state(&self) -> IterateState {
        IterateState {
            x: self.x.clone(),
            u: self.u.clone(),
            y: self.y.clone(),
            k: self.k,
        }
    }
}

/// A complete solver run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterateTrace {
    pub algorithm: Algorithm,
    pub config: SolverConfig,
    /// SHA-256 of the canonical problem JSON.
    pub problem_digest: String,
    pub records: Vec<TraceRecord>,
    pub termination: Termination,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl IterateTrace {
    pub fn last(&self) -> &TraceRecord {
        self.records.last().expect("a trace has at least one record")
    }

    /// Number of steps taken.
    pub fn iterations(&self) -> usize {
        self.last().k
    }

    pub fn final_max_residual(&self) -> f64 {
        let r = self.last();
        r.residual_c.max(r.residual_q)
    }
}

/// Starting point of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialPoint {
    pub x0: Vec<f64>,
    pub u0: Option<Vec<f64>>,
    pub y0: Option<Vec<f64>>,
}

impl InitialPoint {
    /// `x0` plus whatever else the algorithm needs: `u0 = Ax0`, `y0 = 0`.
    pub fn default_for(algorithm: Algorithm, problem: &ProblemInstance, x0: Vec<f64>) -> Result<Self> {
        let (mut u0, mut y0) = (None, None);
        if algorithm.needs_initial_u() {
            u0 = Some(problem.a()?.apply(&x0)?);
        }
        if algorithm.is_lagrangian() {
            y0 = Some(vec![0.0; problem.a()?.rows()]);
        }
        Ok(Self { x0, u0, y0 })
    }
}

/// Evaluates the quantities recorded for `state`.
pub fn make_record(
    stepper: &Stepper<'_>,
    state: &IterateState,
    previous: Option<&IterateState>,
) -> Result<TraceRecord> {
    let problem = stepper.problem();
    let cfg = stepper.config();
    let objective = match cfg.algorithm {
        Algorithm::PadmmSf1 | Algorithm::PgSf1p | Algorithm::AmSf1p | Algorithm::CqSf1p => {
            eval_f1_penalized(problem, &state.x, state.u.as_deref().expect("u in state"), cfg.lambda)?
        }
        Algorithm::PgSf3 | Algorithm::CqMultiset => eval_sf3(problem, &state.x)?,
        Algorithm::WpadmmSf4(_) => eval_f2_sf4(problem, &state.x)?,
    };
    let lagrangian = match (cfg.algorithm, &state.u, &state.y) {
        (Algorithm::PadmmSf1, Some(u), Some(y)) => {
            Some(eval_augmented_lagrangian(problem, &state.x, u, y, cfg.rho, Model::Sf1)?)
        }
        (Algorithm::WpadmmSf4(_), Some(u), Some(y)) => {
            Some(eval_augmented_lagrangian(problem, &state.x, u, y, cfg.rho, Model::Sf4)?)
        }
        _ => None,
    };
    let (residual_c, residual_q) = residuals(problem, &state.x)?;
    let step_norm_x = previous.map_or(0.0, |p| dist(&p.x, &state.x));
    let step_norm_u = match (previous, &state.u) {
        (Some(p), Some(u)) => Some(dist(p.u.as_deref().unwrap_or(u), u)),
        (None, Some(_)) => Some(0.0),
        _ => None,
    };
    Ok(TraceRecord {
        k: state.k,
        x: state.x.clone(),
        u: state.u.clone(),
        y: state.y.clone(),
        objective,
        step_norm_x,
        step_norm_u,
        residual_c,
        residual_q,
        lagrangian,
    })
}

/// Builds the iteration-0 state. AM and CQ start from `u = P_Q(Ax0)`.
pub fn initial_state(stepper: &Stepper<'_>, init: &InitialPoint) -> Result<IterateState> {
    let problem = stepper.problem();
    let algorithm = stepper.config().algorithm;
    check_len("x0", problem.n(), init.x0.len())?;
    let mut state = IterateState::new(init.x0.clone());
    match algorithm {
        Algorithm::AmSf1p | Algorithm::CqSf1p => {
            if init.u0.is_some() || init.y0.is_some() {
                return Err(Error::InvalidConfig(format!(
                    "{algorithm} derives u from x0; do not pass u0 or y0"
                )));
            }
            let a = problem.a()?;
            state.u = Some(problem.q()?.project(&a.apply(&init.x0)?)?);
        }
        _ => {
            let m = problem.maps[0].rows();
            match (&init.u0, algorithm.needs_initial_u()) {
                (Some(u), true) => {
                    check_len("u0", m, u.len())?;
                    state.u = Some(u.clone());
                }
                (None, true) => return Err(Error::InvalidConfig(format!("{algorithm} needs u0"))),
                (Some(_), false) => {
                    return Err(Error::InvalidConfig(format!("{algorithm} takes no u0")))
                }
                (None, false) => {}
            }
            match (&init.y0, algorithm.is_lagrangian()) {
                (Some(y), true) => {
                    check_len("y0", m, y.len())?;
                    state.y = Some(y.clone());
                }
                (None, true) => return Err(Error::InvalidConfig(format!("{algorithm} needs y0"))),
                (Some(_), false) => {
                    return Err(Error::InvalidConfig(format!("{algorithm} takes no y0")))
                }
                (None, false) => {}
            }
        }
    }
    Ok(state)
}

/// Runs the configured algorithm from `init`.
///
/// Stops when both residuals are at most `residual_tol`, when a step moves
/// every block by at most `step_tol`, or after `max_iter` steps. Identical
/// inputs give bit-identical traces.
pub fn run(problem: &ProblemInstance, config: &SolverConfig, init: &InitialPoint) -> Result<IterateTrace> {
    let stepper = Stepper::new(problem, config)?;
    run_with(&stepper, init)
}

pub fn run_with(stepper: &Stepper<'_>, init: &InitialPoint) -> Result<IterateTrace> {
    let cfg = stepper.config();
    let mut state = initial_state(stepper, init)?;
    let mut records = vec![make_record(stepper, &state, None)?];
    let converged = |r: &TraceRecord| r.residual_c <= cfg.residual_tol && r.residual_q <= cfg.residual_tol;
    let mut termination = Termination::MaxIter;
    if converged(&records[0]) {
        termination = Termination::ResidualTol;
    } else {
        for _ in 0..cfg.max_iter {
            let next = stepper.step(&state)?;
            let rec = make_record(stepper, &next, Some(&state))?;
            let stalled = rec.step_norm_x <= cfg.step_tol
                && rec.step_norm_u.map_or(true, |d| d <= cfg.step_tol)
                && match (&state.y, &next.y) {
                    (Some(a), Some(b)) => dist(a, b) <= cfg.step_tol,
                    _ => true,
                };
            let done = converged(&rec);
            records.push(rec);
            state = next;
            if done {
                termination = Termination::ResidualTol;
                break;
            }
            if stalled {
                termination = Termination::StepTol;
                break;
            }
        }
    }
    let mut warnings = stepper.warnings().to_vec();
    if cfg.algorithm.is_experimental() {
        warnings.push("experimental: convergence Unknown".into());
    }
    Ok(IterateTrace {
        algorithm: cfg.algorithm,
        config: cfg.clone(),
        problem_digest: problem_digest(stepper.problem())?,
        records,
        termination,
        warnings,
    })
}
