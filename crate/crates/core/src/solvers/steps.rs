//! One-iteration update rules. Each rule maps a state to the next state and
//! touches nothing else, so a run can be replayed step by step.

use serde::{Deserialize, Serialize};

use super::config::{Algorithm, NMode, ProblemSpectrum, SolverConfig};
use super::inner::{Backend, ConstrainedQuadratic, DistanceBackend, DistanceQuadratic};
use crate::error::{check_len, Error, Result};
use crate::linops::LinearMap;
use crate::objectives::ProblemInstance;
use crate::sets::SetSpec;
use crate::vecops::{add, axpy, scale, sub};

/// `(x^k, u^k, y^k)` at iteration `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterateState {
    pub x: Vec<f64>,
    pub u: Option<Vec<f64>>,
    pub y: Option<Vec<f64>>,
    pub k: usize,
}

impl IterateState {
    pub fn new(x: Vec<f64>) -> Self {
        Self {
            x,
            u: None,
            y: None,
            k: 0,
        }
    }

    pub fn with_u(mut self, u: Vec<f64>) -> Self {
        self.u = Some(u);
        self
    }

    pub fn with_y(mut self, y: Vec<f64>) -> Self {
        self.y = Some(y);
        self
    }

    fn u(&self, algorithm: Algorithm) -> Result<&[f64]> {
        self.u
            .as_deref()
            .ok_or_else(|| Error::InvalidConfig(format!("{algorithm} state needs u")))
    }

    fn y(&self, algorithm: Algorithm) -> Result<&[f64]> {
        self.y
            .as_deref()
            .ok_or_else(|| Error::InvalidConfig(format!("{algorithm} state needs y")))
    }
}

/// A configuration checked against a problem, with everything that only
/// depends on `(problem, config)` computed once.
pub struct Stepper<'a> {
    problem: &'a ProblemInstance,
    config: SolverConfig,
    spectrum: ProblemSpectrum,
    warnings: Vec<String>,
    x_backend: Option<Backend>,
    distance: Option<DistanceBackend>,
}

impl<'a> Stepper<'a> {
    pub fn new(problem: &'a ProblemInstance, config: &SolverConfig) -> Result<Self> {
        let spectrum = ProblemSpectrum::of(problem)?;
        Self::with_spectrum(problem, config, spectrum)
    }

    pub fn with_spectrum(
        problem: &'a ProblemInstance,
        config: &SolverConfig,
        spectrum: ProblemSpectrum,
    ) -> Result<Self> {
        let warnings = config.check(problem, &spectrum)?;
        let allow = config.inner_solver;
        let (x_backend, distance) = match config.algorithm {
            Algorithm::PadmmSf1 => (
                Some(Backend::select("proximal ADMM x-update", &problem.maps[0], &problem.set_c, allow)?),
                None,
            ),
            Algorithm::AmSf1p => (
                Some(Backend::select(
                    "alternating minimization x-update",
                    &problem.maps[0],
                    &problem.set_c,
                    allow,
                )?),
                None,
            ),
            Algorithm::WpadmmSf4(NMode::ProxIdentity) => {
                let b = Backend::select(
                    "weighted proximal ADMM x-update",
                    &problem.maps[0],
                    &problem.set_c,
                    allow,
                )?;
                let d = DistanceBackend::build(&b, &problem.maps[0], config.rho, config.tau)?;
                (Some(b), Some(d))
            }
            _ => (None, None),
        };
        Ok(Self {
            problem,
            config: config.clone(),
            spectrum,
            warnings,
            x_backend,
            distance,
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn problem(&self) -> &ProblemInstance {
        self.problem
    }

    pub fn spectrum(&self) -> &ProblemSpectrum {
        &self.spectrum
    }

    /// Requirement violations tolerated because of `override_requirements`.
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// True when an `x`-update is solved iteratively, so results are exact
    /// only up to `inner_tol`.
    pub fn uses_inner_iterations(&self) -> bool {
        matches!(self.x_backend, Some(Backend::Iterative))
    }

    fn a(&self) -> &LinearMap {
        &self.problem.maps[0]
    }

    fn q(&self) -> &SetSpec {
        &self.problem.sets_q[0]
    }

    fn c(&self) -> &SetSpec {
        &self.problem.set_c
    }

    pub fn step(&self, state: &IterateState) -> Result<IterateState> {
        check_len("state x", self.problem.n(), state.x.len())?;
        match self.config.algorithm {
            Algorithm::PadmmSf1 => self.padmm_sf1(state),
            Algorithm::PgSf1p => self.pg_sf1p(state),
            Algorithm::AmSf1p => self.am_sf1p(state),
            Algorithm::CqSf1p => self.cq_sf1p(state),
            Algorithm::PgSf3 => self.pg_sf3(state),
            Algorithm::WpadmmSf4(_) => self.wpadmm_sf4(state),
            Algorithm::CqMultiset => self.cq_multiset(state),
        }
    }

    /// Proximal ADMM on the indicator model: `u`, then `x`, then `y`.
    fn padmm_sf1(&self, s: &IterateState) -> Result<IterateState> {
        let cfg = &self.config;
        let (a, rho) = (self.a(), cfg.rho);
        let u = s.u(cfg.algorithm)?;
        let y = s.y(cfg.algorithm)?;
        let ax = a.apply(&s.x)?;
        // argmin_u δ_Q(u) + ⟨y, Ax − u⟩ + (ρ/2)‖Ax − u‖² + (τ₁/2)‖u − u^k‖²
        let w: Vec<f64> = ax
            .iter()
            .zip(y)
            .zip(u)
            .map(|((axi, yi), ui)| (rho * axi + yi + cfg.tau1 * ui) / (rho + cfg.tau1))
            .collect();
        let u_next = self.q().project(&w)?;
        // argmin_x δ_C(x) + ⟨y, Ax − u⁺⟩ + (ρ/2)‖Ax − u⁺‖² + (τ₂/2)‖x − x^k‖²
        let rhs = add(
            &a.apply_adjoint(&sub(&scale(&u_next, rho), y))?,
            &scale(&s.x, cfg.tau2),
        );
        let x_next = self.constrained_quadratic("proximal ADMM x-update", rho, cfg.tau2).solve(&rhs, &s.x)?;
        let y_next = self.multiplier_update(y, &x_next, &u_next)?;
        Ok(IterateState {
            x: x_next,
            u: Some(u_next),
            y: Some(y_next),
            k: s.k + 1,
        })
    }

    /// Parallel projected gradient on the penalized model; both blocks read `(x^k, u^k)`.
    fn pg_sf1p(&self, s: &IterateState) -> Result<IterateState> {
        let cfg = &self.config;
        let a = self.a();
        let u = s.u(cfg.algorithm)?;
        let t = cfg.lambda / cfg.tau;
        let ax = a.apply(&s.x)?;
        let u_next = self.q().project(&axpy(u, -t, &sub(u, &ax)))?;
        let x_next = self.c().project(&axpy(&s.x, -t, &a.apply_adjoint(&sub(&ax, u))?))?;
        Ok(IterateState {
            x: x_next,
            u: Some(u_next),
            y: None,
            k: s.k + 1,
        })
    }

    /// Alternating minimization, `x` first then `u = P_Q(Ax)`.
    fn am_sf1p(&self, s: &IterateState) -> Result<IterateState> {
        let cfg = &self.config;
        let a = self.a();
        let u = s.u(cfg.algorithm)?;
        let rhs = scale(&a.apply_adjoint(u)?, cfg.lambda);
        let x_next = self
            .constrained_quadratic("alternating minimization x-update", cfg.lambda, 0.0)
            .solve(&rhs, &s.x)?;
        let u_next = self.q().project(&a.apply(&x_next)?)?;
        Ok(IterateState {
            x: x_next,
            u: Some(u_next),
            y: None,
            k: s.k + 1,
        })
    }

    /// `u⁺ = P_Q(Ax)`, `x⁺ = P_C(x − (λ/τ)Aᵀ(Ax − u⁺))`.
    fn cq_sf1p(&self, s: &IterateState) -> Result<IterateState> {
        let cfg = &self.config;
        let a = self.a();
        let ax = a.apply(&s.x)?;
        let u_next = self.q().project(&ax)?;
        let g = a.apply_adjoint(&sub(&ax, &u_next))?;
        let x_next = self.c().project(&axpy(&s.x, -(cfg.lambda / cfg.tau), &g))?;
        Ok(IterateState {
            x: x_next,
            u: Some(u_next),
            y: None,
            k: s.k + 1,
        })
    }

    fn pg_sf3(&self, s: &IterateState) -> Result<IterateState> {
        self.simultaneous_cq(s)
    }

    fn cq_multiset(&self, s: &IterateState) -> Result<IterateState> {
        self.simultaneous_cq(s)
    }

    /// `x⁺ = P_C(x − (1/τ)Σ_j A_jᵀ(A_j x − P_{Q_j}(A_j x)))`.
    fn simultaneous_cq(&self, s: &IterateState) -> Result<IterateState> {
        let mut g = vec![0.0; s.x.len()];
        for (a, q) in self.problem.maps.iter().zip(&self.problem.sets_q) {
            let ax = a.apply(&s.x)?;
            let r = sub(&ax, &q.project(&ax)?);
            for (gi, v) in g.iter_mut().zip(a.apply_adjoint(&r)?) {
                *gi += v;
            }
        }
        let x_next = self.c().project(&axpy(&s.x, -(1.0 / self.config.tau), &g))?;
        Ok(IterateState {
            x: x_next,
            u: None,
            y: None,
            k: s.k + 1,
        })
    }

    /// Weighted proximal ADMM on the distance model: `u`, then `x`, then `y`.
    fn wpadmm_sf4(&self, s: &IterateState) -> Result<IterateState> {
        let cfg = &self.config;
        let (a, rho, tau) = (self.a(), cfg.rho, cfg.tau);
        let y = s.y(cfg.algorithm)?;
        s.u(cfg.algorithm)?;
        let ax = a.apply(&s.x)?;
        let u_next = self.q().project(&axpy(&ax, 1.0 / rho, y))?;
        let x_next = match cfg.algorithm {
            Algorithm::WpadmmSf4(NMode::Linearized) => {
                // x⁺ = x − (1/τ)[(x − P_C(x)) + Aᵀy + ρAᵀ(Ax − u⁺)]
                let pc = self.c().project(&s.x)?;
                let dual = axpy(y, rho, &sub(&ax, &u_next));
                let grad = add(&sub(&s.x, &pc), &a.apply_adjoint(&dual)?);
                axpy(&s.x, -1.0 / tau, &grad)
            }
            _ => {
                // argmin_x (1/2)d_C²(x) + ⟨y, Ax − u⁺⟩ + (ρ/2)‖Ax − u⁺‖² + (τ/2)‖x − x^k‖²
                let rhs = add(
                    &a.apply_adjoint(&sub(&scale(&u_next, rho), y))?,
                    &scale(&s.x, tau),
                );
                self.distance_quadratic().solve(&rhs, &s.x)?
            }
        };
        let y_next = self.multiplier_update(y, &x_next, &u_next)?;
        Ok(IterateState {
            x: x_next,
            u: Some(u_next),
            y: Some(y_next),
            k: s.k + 1,
        })
    }

    fn multiplier_update(&self, y: &[f64], x: &[f64], u: &[f64]) -> Result<Vec<f64>> {
        let gap = sub(&self.a().apply(x)?, u);
        Ok(axpy(y, self.config.rho, &gap))
    }

    fn constrained_quadratic(&self, subproblem: &'static str, alpha: f64, beta: f64) -> ConstrainedQuadratic<'_> {
        ConstrainedQuadratic {
            subproblem,
            a: self.a(),
            c: self.c(),
            alpha,
            beta,
            gram_lambda_max: self.spectrum.lambda_max,
            backend: self.x_backend.as_ref().expect("backend selected for this algorithm"),
            tol: self.config.inner_tol,
            max_iter: self.config.inner_max_iter,
        }
    }

    fn distance_quadratic(&self) -> DistanceQuadratic<'_> {
        DistanceQuadratic {
            c: self.c(),
            rho: self.config.rho,
            tau: self.config.tau,
            kind: self.distance.as_ref().expect("distance backend selected"),
            tol: self.config.inner_tol,
            max_iter: self.config.inner_max_iter,
        }
    }
}

fn checked<'a>(problem: &'a ProblemInstance, config: &SolverConfig, expected: Algorithm) -> Result<Stepper<'a>> {
    let same = match (config.algorithm, expected) {
        (Algorithm::WpadmmSf4(_), Algorithm::WpadmmSf4(_)) => true,
        (a, b) => a == b,
    };
    if !same {
        return Err(Error::InvalidConfig(format!(
            "configuration is for {}, not {expected}",
            config.algorithm
        )));
    }
    Stepper::new(problem, config)
}

/// One proximal ADMM iteration on the indicator model.
pub fn step_padmm_sf1(state: &IterateState, problem: &ProblemInstance, config: &SolverConfig) -> Result<IterateState> {
    checked(problem, config, Algorithm::PadmmSf1)?.step(state)
}

/// One parallel projected-gradient iteration on the penalized model.
pub fn step_pg_sf1p(state: &IterateState, problem: &ProblemInstance, config: &SolverConfig) -> Result<IterateState> {
    checked(problem, config, Algorithm::PgSf1p)?.step(state)
}

/// One alternating-minimization iteration on the penalized model.
pub fn step_am_sf1p(state: &IterateState, problem: &ProblemInstance, config: &SolverConfig) -> Result<IterateState> {
    checked(problem, config, Algorithm::AmSf1p)?.step(state)
}

/// One CQ iteration in its penalized-model form.
pub fn step_cq_sf1p(state: &IterateState, problem: &ProblemInstance, config: &SolverConfig) -> Result<IterateState> {
    checked(problem, config, Algorithm::CqSf1p)?.step(state)
}

/// One projected-gradient iteration on `min_{x∈C} (1/2)d_Q²(Ax)`.
pub fn step_pg_sf3(state: &IterateState, problem: &ProblemInstance, config: &SolverConfig) -> Result<IterateState> {
    checked(problem, config, Algorithm::PgSf3)?.step(state)
}

/// One weighted proximal ADMM iteration (either `N` mode).
pub fn step_wpadmm_sf4(state: &IterateState, problem: &ProblemInstance, config: &SolverConfig) -> Result<IterateState> {
    checked(problem, config, Algorithm::WpadmmSf4(NMode::ProxIdentity))?.step(state)
}

/// One simultaneous multiple-sets CQ iteration.
pub fn step_cq_multiset(state: &IterateState, problem: &ProblemInstance, config: &SolverConfig) -> Result<IterateState> {
    checked(problem, config, Algorithm::CqMultiset)?.step(state)
}
