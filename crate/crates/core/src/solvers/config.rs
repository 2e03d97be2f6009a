use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linops::{check_table_requirements, SpectralSummary, DEFAULT_SPECTRAL_TOL};
use crate::objectives::ProblemInstance;

/// Proximal weight `N` of the weighted proximal ADMM.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NMode {
    /// `N = τI`: exact `x`-subproblem (proximal ADMM).
    ProxIdentity,
    /// `N = τI − ρAᵀA`: one explicit gradient-type step (linearized proximal ADMM).
    Linearized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    /// Proximal ADMM on the split indicator model.
    PadmmSf1,
    /// Parallel projected gradient on the penalized model.
    PgSf1p,
    /// Alternating minimization on the penalized model.
    AmSf1p,
    /// Semi-alternating projected gradient on the penalized model (the CQ algorithm).
    CqSf1p,
    /// Projected gradient on `min_{x∈C} (1/2)d_Q²(Ax)`.
    PgSf3,
    /// Weighted proximal ADMM on the distance model.
    WpadmmSf4(NMode),
    /// Simultaneous CQ for multiple `(A_j, Q_j)` pairs.
    CqMultiset,
}

impl Algorithm {
    pub const ALL: [Algorithm; 8] = [
        Algorithm::PadmmSf1,
        Algorithm::PgSf1p,
        Algorithm::AmSf1p,
        Algorithm::CqSf1p,
        Algorithm::PgSf3,
        Algorithm::WpadmmSf4(NMode::ProxIdentity),
        Algorithm::WpadmmSf4(NMode::Linearized),
        Algorithm::CqMultiset,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::PadmmSf1 => "padmm-sf1",
            Self::PgSf1p => "pg-sf1p",
            Self::AmSf1p => "am-sf1p",
            Self::CqSf1p => "cq",
            Self::PgSf3 => "pg-sf3",
            Self::WpadmmSf4(NMode::ProxIdentity) => "wpadmm-prox",
            Self::WpadmmSf4(NMode::Linearized) => "wpadmm-lin",
            Self::CqMultiset => "cq-multiset",
        }
    }

    /// Carries a multiplier `y`.
    pub fn is_lagrangian(self) -> bool {
        matches!(self, Self::PadmmSf1 | Self::WpadmmSf4(_))
    }

    /// Carries a split variable `u` in its state.
    pub fn has_split_variable(self) -> bool {
        !matches!(self, Self::PgSf3 | Self::CqMultiset)
    }

    /// Needs `u0` supplied by the caller (AM and CQ derive theirs from `x0`).
    pub fn needs_initial_u(self) -> bool {
        matches!(self, Self::PadmmSf1 | Self::PgSf1p | Self::WpadmmSf4(_))
    }

    /// No global convergence theory is known in the non-convex setting.
    pub fn is_experimental(self) -> bool {
        self == Self::PadmmSf1
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Self::ALL.iter().map(|a| a.name()).collect();
                Error::InvalidConfig(format!("unknown algorithm {s:?}; expected one of {}", names.join(", ")))
            })
    }
}

impl Serialize for Algorithm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for Algorithm {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Every scalar the algorithms leave to the user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub algorithm: Algorithm,
    /// Penalty `λ` of the penalized model.
    pub lambda: f64,
    /// Augmented-Lagrangian penalty `ρ`.
    pub rho: f64,
    /// Step / proximal parameter `τ`.
    pub tau: f64,
    /// `u`-proximal weight of the proximal ADMM on the indicator model.
    pub tau1: f64,
    /// `x`-proximal weight of the proximal ADMM on the indicator model.
    pub tau2: f64,
    pub max_iter: usize,
    pub residual_tol: f64,
    pub step_tol: f64,
    pub inner_tol: f64,
    pub inner_max_iter: usize,
    /// Run even when a requirement on `A`, a step-size bound or a convexity
    /// assumption fails. Violations are recorded as trace warnings.
    pub override_requirements: bool,
    /// Allow the iterative backends for `x`-subproblems that have no closed form.
    pub inner_solver: bool,
}

/// Spectral data the default parameters and step-size bounds are built from.
#[derive(Debug, Clone, Copy)]
pub struct ProblemSpectrum {
    /// `λ_max(AᵀA)` of a single-set problem, or of `A_1` for a multiset one.
    pub lambda_max: f64,
    /// `Σ_j λ_max(A_jᵀA_j)`.
    pub lambda_max_sum: f64,
    pub summary: SpectralSummary,
}

impl ProblemSpectrum {
    pub fn of(problem: &ProblemInstance) -> Result<Self> {
        let summaries = problem
            .maps
            .iter()
            .map(|a| a.spectral_summary(DEFAULT_SPECTRAL_TOL))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            lambda_max: summaries[0].gram_lambda_max,
            lambda_max_sum: summaries.iter().map(|s| s.gram_lambda_max).sum(),
            summary: summaries[0],
        })
    }
}

const DEFAULT_MARGIN: f64 = 1.01;

impl SolverConfig {
    /// Defaults derived from the spectrum of `A`:
    /// `λ = 1`, `ρ = 10·max(1, λ_max)`, `τ` one percent above the relevant
    /// step-size bound, `τ₁ = τ₂ = 1`.
    pub fn defaults(algorithm: Algorithm, problem: &ProblemInstance) -> Result<Self> {
        let spec = ProblemSpectrum::of(problem)?;
        Ok(Self::defaults_with(algorithm, &spec))
    }

    pub fn defaults_with(algorithm: Algorithm, spec: &ProblemSpectrum) -> Self {
        let lambda = 1.0;
        let lmax = spec.lambda_max.max(1e-12);
        let rho = 10.0 * lmax.max(1.0);
        let tau = match algorithm {
            Algorithm::CqSf1p => DEFAULT_MARGIN * lambda * lmax,
            Algorithm::PgSf1p => DEFAULT_MARGIN * lambda * (lmax + 1.0),
            Algorithm::PgSf3 => DEFAULT_MARGIN * lmax,
            Algorithm::CqMultiset => DEFAULT_MARGIN * spec.lambda_max_sum.max(1e-12),
            Algorithm::WpadmmSf4(NMode::Linearized) => (DEFAULT_MARGIN * rho * lmax).max(1.0),
            Algorithm::WpadmmSf4(NMode::ProxIdentity) | Algorithm::PadmmSf1 | Algorithm::AmSf1p => 1.0,
        };
        Self {
            algorithm,
            lambda,
            rho,
            tau,
            tau1: 1.0,
            tau2: 1.0,
            max_iter: 10_000,
            residual_tol: 1e-8,
            step_tol: 1e-14,
            inner_tol: 1e-12,
            inner_max_iter: 10_000,
            override_requirements: false,
            inner_solver: true,
        }
    }

    /// Collects every failed requirement for running this configuration on `problem`.
    ///
    /// Malformed parameters are always an error. Failed requirements are an
    /// error unless `override_requirements` is set, in which case they are
    /// returned as warnings.
    pub fn check(&self, problem: &ProblemInstance, spec: &ProblemSpectrum) -> Result<Vec<String>> {
        self.check_parameters(problem)?;
        let violations = self.requirement_violations(problem, spec);
        if violations.is_empty() || self.override_requirements {
            Ok(violations)
        } else {
            Err(Error::Requirement(violations.join("; ")))
        }
    }

    fn check_parameters(&self, problem: &ProblemInstance) -> Result<()> {
        let bad = |what: &str, v: f64| Err(Error::InvalidConfig(format!("{what} must be positive, got {v}")));
        for (what, v) in [
            ("lambda", self.lambda),
            ("rho", self.rho),
            ("tau", self.tau),
            ("residual_tol", self.residual_tol),
            ("inner_tol", self.inner_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(what, v);
            }
        }
        for (what, v) in [("tau1", self.tau1), ("tau2", self.tau2), ("step_tol", self.step_tol)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!("{what} must be nonnegative, got {v}")));
            }
        }
        if self.max_iter == 0 || self.inner_max_iter == 0 {
            return Err(Error::InvalidConfig("iteration limits must be positive".into()));
        }
        if problem.is_multiset() && self.algorithm != Algorithm::CqMultiset {
            return Err(Error::InvalidConfig(format!(
                "{} needs a single-set problem, got r = {}",
                self.algorithm,
                problem.r()
            )));
        }
        Ok(())
    }

    fn requirement_violations(&self, problem: &ProblemInstance, spec: &ProblemSpectrum) -> Vec<String> {
        let mut out = Vec::new();
        let lmax = spec.lambda_max;
        match self.algorithm {
            Algorithm::CqSf1p if self.tau <= self.lambda * lmax => out.push(format!(
                "τ > λ·λ_max(AᵀA) fails: τ = {}, λ·λ_max = {}",
                self.tau,
                self.lambda * lmax
            )),
            Algorithm::PgSf1p if self.tau < self.lambda * (lmax + 1.0) => out.push(format!(
                "τ ≥ λ(λ_max(AᵀA) + 1) fails: τ = {}, bound = {}",
                self.tau,
                self.lambda * (lmax + 1.0)
            )),
            Algorithm::PgSf3 if self.tau <= lmax => out.push(format!(
                "τ > λ_max(AᵀA) fails: τ = {}, λ_max = {lmax}",
                self.tau
            )),
            Algorithm::CqMultiset if self.tau <= spec.lambda_max_sum => out.push(format!(
                "τ > Σ_j λ_max(A_jᵀA_j) fails: τ = {}, sum = {}",
                self.tau, spec.lambda_max_sum
            )),
            Algorithm::WpadmmSf4(NMode::Linearized) if self.tau <= self.rho * lmax => out.push(format!(
                "N = τI − ρAᵀA ≻ 0 fails: τ = {}, ρ·λ_max = {}",
                self.tau,
                self.rho * lmax
            )),
            _ => {}
        }
        let q_convex = problem.sets_q.iter().all(|q| q.is_convex());
        match self.algorithm {
            Algorithm::AmSf1p | Algorithm::PgSf3 | Algorithm::CqMultiset if !q_convex => {
                out.push(format!("{} assumes every Q set is convex", self.algorithm))
            }
            Algorithm::WpadmmSf4(_) if !problem.set_c.is_convex() => {
                out.push(format!("{} assumes C is convex", self.algorithm))
            }
            _ => {}
        }
        let report = check_table_requirements(&spec.summary, self.algorithm);
        out.extend(
            report
                .violations()
                .map(|c| format!("{} fails ({})", c.requirement, c.detail)),
        );
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linops::LinearMap;
    use crate::sets::SetSpec;

    fn problem(a: LinearMap) -> ProblemInstance {
        let n = a.cols();
        let m = a.rows();
        ProblemInstance::single(
            SetSpec::ball(vec![0.0; n], 1.0).unwrap(),
            a,
            SetSpec::ball(vec![0.0; m], 1.0).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        assert!("nope".parse::<Algorithm>().is_err());
    }

    #[test]
    fn defaults_satisfy_bounds() {
        let p = problem(LinearMap::diagonal(&[3.0, 1.0]));
        for a in Algorithm::ALL {
            if a == Algorithm::WpadmmSf4(NMode::Linearized) {
                continue; // κ = 9 violates the table
            }
            let cfg = SolverConfig::defaults(a, &p).unwrap();
            let spec = ProblemSpectrum::of(&p).unwrap();
            assert!(cfg.check(&p, &spec).unwrap().is_empty(), "{a}");
        }
    }

    #[test]
    fn cq_step_bound_enforced_unless_overridden() {
        let p = problem(LinearMap::diagonal(&[3.0, 1.0]));
        let spec = ProblemSpectrum::of(&p).unwrap();
        let mut cfg = SolverConfig::defaults(Algorithm::CqSf1p, &p).unwrap();
        cfg.lambda = 2.0;
        cfg.tau = 10.0; // > λ_max = 9 but < λ·λ_max = 18
        assert!(matches!(cfg.check(&p, &spec), Err(Error::Requirement(_))));
        cfg.override_requirements = true;
        assert_eq!(cfg.check(&p, &spec).unwrap().len(), 1);
    }

    #[test]
    fn kappa_requirement_for_linearized() {
        let p = problem(LinearMap::diagonal(&[3.0, 1.0]));
        let cfg = SolverConfig::defaults(Algorithm::WpadmmSf4(NMode::Linearized), &p).unwrap();
        let spec = ProblemSpectrum::of(&p).unwrap();
        let err = cfg.check(&p, &spec).unwrap_err().to_string();
        assert!(err.contains("κ(AᵀA) < 2"), "{err}");
    }

    #[test]
    fn bad_parameters_are_errors_even_with_override() {
        let p = problem(LinearMap::identity(2));
        let spec = ProblemSpectrum::of(&p).unwrap();
        let mut cfg = SolverConfig::defaults(Algorithm::CqSf1p, &p).unwrap();
        cfg.override_requirements = true;
        cfg.lambda = -1.0;
        assert!(matches!(cfg.check(&p, &spec), Err(Error::InvalidConfig(_))));
    }
}
