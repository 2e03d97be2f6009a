//! Problem instances and the model objectives evaluated along solver runs.
//!
//! Conventions: the penalized objective is
//! `F₁(x, u) = δ_C(x) + δ_Q(u) + (λ/2)‖Ax − u‖²`, the distance model is
//! `F₂(x) = (1/2)d_C²(x) + δ_Q(Ax)` and both augmented Lagrangians carry the
//! multiplier term `⟨y, Ax − u⟩ + (ρ/2)‖Ax − u‖²`. The distance term always has
//! the factor 1/2, matching the `x − P_C(x)` gradient used by the updates.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::linops::LinearMap;
use crate::sets::{SetSpec, MEMBERSHIP_TOL};
use crate::vecops::{dot, norm, norm_sq, sub};

/// Residual bound a stored consistency witness must meet.
pub const WITNESS_TOL: f64 = 1e-9;

/// `x ∈ C` with `A_j x ∈ Q_j` for every `j`; a single-set problem has one `(A, Q)` pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    pub set_c: SetSpec,
    pub maps: Vec<LinearMap>,
    pub sets_q: Vec<SetSpec>,
    /// A known solution, if the instance was built consistent.
    pub witness: Option<Vec<f64>>,
    /// Certified lower bound on `d(A(C), Q)` for instances built inconsistent.
    pub infeasibility_margin: Option<f64>,
}

impl ProblemInstance {
    pub fn single(set_c: SetSpec, map: LinearMap, set_q: SetSpec) -> Result<Self> {
        Self::multiset(set_c, vec![map], vec![set_q])
    }

    pub fn multiset(set_c: SetSpec, maps: Vec<LinearMap>, sets_q: Vec<SetSpec>) -> Result<Self> {
        let p = Self {
            set_c,
            maps,
            sets_q,
            witness: None,
            infeasibility_margin: None,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_witness(mut self, witness: Vec<f64>) -> Result<Self> {
        self.witness = Some(witness);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        self.set_c.validate()?;
        if self.maps.is_empty() {
            return Err(Error::InvalidProblem("at least one (A, Q) pair is required".into()));
        }
        if self.maps.len() != self.sets_q.len() {
            return Err(Error::InvalidProblem(format!(
                "{} maps but {} Q sets",
                self.maps.len(),
                self.sets_q.len()
            )));
        }
        let n = self.set_c.dim();
        for (j, (a, q)) in self.maps.iter().zip(&self.sets_q).enumerate() {
            q.validate()?;
            if a.cols() != n {
                return Err(Error::InvalidProblem(format!(
                    "A[{j}] has {} columns but C has dimension {n}",
                    a.cols()
                )));
            }
            if a.rows() != q.dim() {
                return Err(Error::InvalidProblem(format!(
                    "A[{j}] has {} rows but Q[{j}] has dimension {}",
                    a.rows(),
                    q.dim()
                )));
            }
        }
        if let Some(w) = &self.witness {
            check_len("witness", n, w.len())?;
            let (rc, rq) = residuals(self, w)?;
            if rc > WITNESS_TOL || rq > WITNESS_TOL {
                return Err(Error::InvalidProblem(format!(
                    "witness residuals ({rc:e}, {rq:e}) exceed {WITNESS_TOL:e}"
                )));
            }
        }
        if let Some(m) = self.infeasibility_margin {
            if !(m > 0.0) {
                return Err(Error::InvalidProblem(format!(
                    "infeasibility margin must be positive, got {m}"
                )));
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.set_c.dim()
    }

    pub fn r(&self) -> usize {
        self.maps.len()
    }

    pub fn is_multiset(&self) -> bool {
        self.maps.len() > 1
    }

    /// The map of a single-set problem.
    pub fn a(&self) -> Result<&LinearMap> {
        self.require_single()?;
        Ok(&self.maps[0])
    }

    /// The Q set of a single-set problem.
    pub fn q(&self) -> Result<&SetSpec> {
        self.require_single()?;
        Ok(&self.sets_q[0])
    }

    fn require_single(&self) -> Result<()> {
        if self.is_multiset() {
            Err(Error::InvalidProblem(format!(
                "operation needs a single-set problem, got r = {}",
                self.r()
            )))
        } else {
            Ok(())
        }
    }

    /// Lower bound on `max(d_C(x), d_Q(Ax))` over all `x`, for inconsistent instances.
    ///
    /// If `d(A(C), Q) ≥ δ` then `max(a, δ − ‖A‖a)` is minimized at `a = δ/(1 + ‖A‖)`.
    pub fn residual_floor(&self) -> Result<Option<f64>> {
        let Some(delta) = self.infeasibility_margin else {
            return Ok(None);
        };
        let mut op = 0.0f64;
        for a in &self.maps {
            op = op.max(a.spectral_summary(crate::linops::DEFAULT_SPECTRAL_TOL)?.operator_norm);
        }
        Ok(Some(delta / (1.0 + op)))
    }
}

/// An objective value together with the residual terms it is built from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveValue {
    /// `+∞` exactly when an indicator term is violated beyond [`MEMBERSHIP_TOL`].
    #[serde(with = "extended_real")]
    pub value: f64,
    /// The smooth part: `(λ/2)‖Ax − u‖²` or the half-squared distance terms.
    pub coupling: f64,
    pub feasibility_x: f64,
    pub feasibility_u: f64,
    /// `‖Ax − u‖`, zero for models without a split variable.
    pub constraint_gap: f64,
}

pub(crate) mod extended_real {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_str("inf")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Str(s) if s == "inf" => Ok(f64::INFINITY),
            Repr::Str(s) => Err(serde::de::Error::custom(format!("expected number or \"inf\", got {s:?}"))),
        }
    }
}

/// Which split model an augmented Lagrangian is built on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Model {
    /// `δ_C(x) + δ_Q(u)` with `Ax = u`.
    Sf1,
    /// `(1/2)d_C²(x) + δ_Q(u)` with `Ax = u`.
    Sf4,
}

fn indicator_sum(dx: f64, du: f64) -> f64 {
    if dx <= MEMBERSHIP_TOL && du <= MEMBERSHIP_TOL {
        0.0
    } else {
        f64::INFINITY
    }
}

/// `F₁(x, u) = δ_C(x) + δ_Q(u) + (λ/2)‖Ax − u‖²`.
pub fn eval_f1_penalized(
    problem: &ProblemInstance,
    x: &[f64],
    u: &[f64],
    lambda: f64,
) -> Result<ObjectiveValue> {
    let a = problem.a()?;
    let q = problem.q()?;
    check_len("eval_f1_penalized: u", a.rows(), u.len())?;
    let ax = a.apply(x)?;
    let gap = sub(&ax, u);
    let coupling = 0.5 * lambda * norm_sq(&gap);
    let feasibility_x = problem.set_c.distance(x)?;
    let feasibility_u = q.distance(u)?;
    Ok(ObjectiveValue {
        value: indicator_sum(feasibility_x, feasibility_u) + coupling,
        coupling,
        feasibility_x,
        feasibility_u,
        constraint_gap: norm(&gap),
    })
}

/// `δ_C(x) + Σ_j (1/2)d_{Q_j}²(A_j x)`; `feasibility_u` is the largest `d_{Q_j}(A_j x)`.
pub fn eval_sf3(problem: &ProblemInstance, x: &[f64]) -> Result<ObjectiveValue> {
    let feasibility_x = problem.set_c.distance(x)?;
    let mut coupling = 0.0;
    let mut worst = 0.0f64;
    for (a, q) in problem.maps.iter().zip(&problem.sets_q) {
        let d = q.distance(&a.apply(x)?)?;
        coupling += 0.5 * d * d;
        worst = worst.max(d);
    }
    Ok(ObjectiveValue {
        value: indicator_sum(feasibility_x, 0.0) + coupling,
        coupling,
        feasibility_x,
        feasibility_u: worst,
        constraint_gap: 0.0,
    })
}

/// `F₂(x) = (1/2)d_C²(x) + δ_Q(Ax)`.
pub fn eval_f2_sf4(problem: &ProblemInstance, x: &[f64]) -> Result<ObjectiveValue> {
    let a = problem.a()?;
    let q = problem.q()?;
    let feasibility_x = problem.set_c.distance(x)?;
    let feasibility_u = q.distance(&a.apply(x)?)?;
    let coupling = 0.5 * feasibility_x * feasibility_x;
    Ok(ObjectiveValue {
        value: indicator_sum(0.0, feasibility_u) + coupling,
        coupling,
        feasibility_x,
        feasibility_u,
        constraint_gap: 0.0,
    })
}

/// Augmented Lagrangian of the split model.
pub fn eval_augmented_lagrangian(
    problem: &ProblemInstance,
    x: &[f64],
    u: &[f64],
    y: &[f64],
    rho: f64,
    model: Model,
) -> Result<f64> {
    let a = problem.a()?;
    let q = problem.q()?;
    check_len("eval_augmented_lagrangian: u", a.rows(), u.len())?;
    check_len("eval_augmented_lagrangian: y", a.rows(), y.len())?;
    let gap = sub(&a.apply(x)?, u);
    let dx = problem.set_c.distance(x)?;
    let du = q.distance(u)?;
    let base = match model {
        Model::Sf1 => indicator_sum(dx, du),
        Model::Sf4 => indicator_sum(0.0, du) + 0.5 * dx * dx,
    };
    Ok(base + dot(y, &gap) + 0.5 * rho * norm_sq(&gap))
}

/// `(d_C(x), max_j d_{Q_j}(A_j x))`.
pub fn residuals(problem: &ProblemInstance, x: &[f64]) -> Result<(f64, f64)> {
    let rc = problem.set_c.distance(x)?;
    let mut rq = 0.0f64;
    for (a, q) in problem.maps.iter().zip(&problem.sets_q) {
        rq = rq.max(q.distance(&a.apply(x)?)?);
    }
    Ok((rc, rq))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ball(c: [f64; 2], r: f64) -> SetSpec {
        SetSpec::ball(c.to_vec(), r).unwrap()
    }

    fn id_problem(c: SetSpec, q: SetSpec) -> ProblemInstance {
        ProblemInstance::single(c, LinearMap::identity(2), q).unwrap()
    }

    #[test]
    fn f1_examples() {
        let p = id_problem(ball([0.0, 0.0], 2.0), ball([0.0, 0.0], 2.0));
        let v = eval_f1_penalized(&p, &[1.0, 0.0], &[0.0, 0.0], 2.0).unwrap();
        assert_eq!(v.value, 1.0);
        assert_eq!(v.constraint_gap, 1.0);

        let v = eval_f1_penalized(&p, &[3.0, 0.0], &[0.0, 0.0], 2.0).unwrap();
        assert!(v.value.is_infinite());
        assert!(v.feasibility_x > 0.0);

        let v = eval_f1_penalized(&p, &[0.5, 0.5], &[0.5, 0.5], 2.0).unwrap();
        assert_eq!(v.value, 0.0);
    }

    #[test]
    fn sf3_examples() {
        let p = id_problem(ball([0.0, 0.0], 10.0), ball([0.0, 0.0], 1.0));
        assert_eq!(eval_sf3(&p, &[2.0, 0.0]).unwrap().value, 0.5);
        assert_eq!(eval_sf3(&p, &[0.5, 0.0]).unwrap().value, 0.0);

        let multi = ProblemInstance::multiset(
            ball([0.0, 0.0], 10.0),
            vec![LinearMap::identity(2), LinearMap::identity(2)],
            vec![ball([0.0, 0.0], 1.0), ball([1.0, 0.0], 1.0)],
        )
        .unwrap();
        assert_eq!(eval_sf3(&multi, &[0.5, 0.0]).unwrap().value, 0.0);
        // d_1 = 1, d_2 = 0
        assert_eq!(eval_sf3(&multi, &[2.0, 0.0]).unwrap().value, 0.5);
    }

    #[test]
    fn f2_examples() {
        let wide = SetSpec::boxed(vec![-100.0; 2], vec![100.0; 2]).unwrap();
        let p = id_problem(ball([0.0, 0.0], 1.0), wide);
        assert_eq!(eval_f2_sf4(&p, &[2.0, 0.0]).unwrap().value, 0.5);
        assert_eq!(eval_f2_sf4(&p, &[0.5, 0.0]).unwrap().value, 0.0);
        let p = id_problem(ball([0.0, 0.0], 1.0), ball([0.0, 0.0], 1.0));
        assert!(eval_f2_sf4(&p, &[2.0, 0.0]).unwrap().value.is_infinite());
    }

    #[test]
    fn lagrangian_examples() {
        let p = id_problem(ball([0.0, 0.0], 1.0), ball([0.0, 0.0], 3.0));
        let l = eval_augmented_lagrangian(&p, &[0.5, 0.0], &[0.5, 0.0], &[0.0, 0.0], 2.0, Model::Sf1)
            .unwrap();
        assert_eq!(l, 0.0);
        let l = eval_augmented_lagrangian(&p, &[2.0, 0.0], &[2.0, 0.0], &[0.0, 0.0], 1.0, Model::Sf4)
            .unwrap();
        assert_eq!(l, 0.5);
        let l = eval_augmented_lagrangian(&p, &[0.5, 0.0], &[0.0, 0.0], &[1.0, 0.0], 2.0, Model::Sf1)
            .unwrap();
        assert_eq!(l, 0.75);
    }

    #[test]
    fn residual_examples() {
        let p = id_problem(ball([0.0, 0.0], 1.0), ball([0.0, 0.0], 1.0));
        assert_eq!(residuals(&p, &[2.0, 0.0]).unwrap(), (1.0, 1.0));
        let p = p.with_witness(vec![0.1, 0.2]).unwrap();
        assert_eq!(residuals(&p, p.witness.as_ref().unwrap()).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn bad_witness_rejected() {
        let p = id_problem(ball([0.0, 0.0], 1.0), ball([0.0, 0.0], 1.0));
        assert!(p.with_witness(vec![2.0, 0.0]).is_err());
    }

    #[test]
    fn dimension_chain_checked() {
        let e = ProblemInstance::single(
            ball([0.0, 0.0], 1.0),
            LinearMap::identity(3),
            SetSpec::ball(vec![0.0; 3], 1.0).unwrap(),
        )
        .unwrap_err();
        assert!(e.to_string().contains("columns"));
    }

    #[test]
    fn single_set_evaluators_reject_multiset() {
        let multi = ProblemInstance::multiset(
            ball([0.0, 0.0], 10.0),
            vec![LinearMap::identity(2), LinearMap::identity(2)],
            vec![ball([0.0, 0.0], 1.0), ball([1.0, 0.0], 1.0)],
        )
        .unwrap();
        assert!(eval_f2_sf4(&multi, &[0.0, 0.0]).is_err());
    }
}
