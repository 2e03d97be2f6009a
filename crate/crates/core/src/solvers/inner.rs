//! Exact solvers for the `x`-subproblems that have no projection closed form.
//!
//! Two subproblem shapes occur:
//!
//! * constrained quadratic `min_{x∈C} (1/2)xᵀ(αAᵀA + βI)x − ⟨b, x⟩`
//!   (proximal ADMM on the indicator model, alternating minimization);
//! * distance-regularized quadratic
//!   `min_x (1/2)d_C²(x) + (1/2)xᵀ(ρAᵀA + τI)x − ⟨b, x⟩` (proximal ADMM on the
//!   distance model with `N = τI`).
//!
//! When `AᵀA = c²I` both collapse to one projection, valid for any closed `C`.
//! Otherwise `C` must be convex and an iterative scheme is used: projected
//! gradient for the first shape, and for the second the fixed-point iteration
//! `x ← M⁻¹(P_C(x) + b)` with `M = ρAᵀA + (1 + τ)I`, a contraction with factor
//! at most `1/(1 + τ)`.

use nalgebra::{Cholesky, DVector, Dyn};

use crate::error::{Error, Result};
use crate::linops::LinearMap;
use crate::sets::SetSpec;
use crate::vecops::{axpy, dist, scale};

const ORTHOGONAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub(crate) enum Backend {
    /// `AᵀA = c²I`, stores `c²`.
    Orthogonal(f64),
    Iterative,
}

impl Backend {
    pub fn select(
        subproblem: &'static str,
        a: &LinearMap,
        c: &SetSpec,
        allow_iterative: bool,
    ) -> Result<Self> {
        if let Some(c2) = a.orthogonal_scale(ORTHOGONAL_TOL) {
            return Ok(Self::Orthogonal(c2));
        }
        if !allow_iterative {
            return Err(Error::Unsolvable {
                subproblem,
                reason: "AᵀA is not a multiple of the identity and the inner solver is disabled".into(),
            });
        }
        if !c.is_convex() {
            return Err(Error::Unsolvable {
                subproblem,
                reason: format!(
                    "AᵀA is not a multiple of the identity and C ({}) is non-convex",
                    c.kind()
                ),
            });
        }
        Ok(Self::Iterative)
    }
}

/// `min_{x∈C} (1/2)xᵀ(αAᵀA + βI)x − ⟨b, x⟩`.
pub(crate) struct ConstrainedQuadratic<'a> {
    pub subproblem: &'static str,
    pub a: &'a LinearMap,
    pub c: &'a SetSpec,
    pub alpha: f64,
    pub beta: f64,
    /// `λ_max(AᵀA)`, used for the projected-gradient step `1/L`.
    pub gram_lambda_max: f64,
    pub backend: &'a Backend,
    pub tol: f64,
    pub max_iter: usize,
}

impl ConstrainedQuadratic<'_> {
    pub fn solve(&self, b: &[f64], start: &[f64]) -> Result<Vec<f64>> {
        match self.backend {
            Backend::Orthogonal(c2) => {
                let h = self.alpha * c2 + self.beta;
                self.c.project(&scale(b, 1.0 / h))
            }
            Backend::Iterative => {
                let lipschitz = self.alpha * self.gram_lambda_max + self.beta;
                let step = 1.0 / lipschitz;
                let mut x = self.c.project(start)?;
                let mut last = f64::INFINITY;
                for _ in 0..self.max_iter {
                    let ata_x = self.a.apply_adjoint(&self.a.apply(&x)?)?;
                    let grad: Vec<f64> = ata_x
                        .iter()
                        .zip(&x)
                        .zip(b)
                        .map(|((g, xi), bi)| self.alpha * g + self.beta * xi - bi)
                        .collect();
                    let next = self.c.project(&axpy(&x, -step, &grad))?;
                    last = dist(&next, &x);
                    x = next;
                    if last <= self.tol {
                        return Ok(x);
                    }
                }
                Err(Error::InnerSolver {
                    subproblem: self.subproblem,
                    iterations: self.max_iter,
                    last_step: last,
                })
            }
        }
    }
}

/// `min_x (1/2)d_C²(x) + (1/2)xᵀ(ρAᵀA + τI)x − ⟨b, x⟩`.
pub(crate) struct DistanceQuadratic<'a> {
    pub c: &'a SetSpec,
    pub rho: f64,
    pub tau: f64,
    pub kind: &'a DistanceBackend,
    pub tol: f64,
    pub max_iter: usize,
}

pub(crate) enum DistanceBackend {
    Orthogonal(f64),
    /// Cholesky factor of `M = ρAᵀA + (1 + τ)I`, computed once per run.
    FixedPoint(Cholesky<f64, Dyn>),
}

impl DistanceBackend {
    pub fn build(backend: &Backend, a: &LinearMap, rho: f64, tau: f64) -> Result<Self> {
        match backend {
            Backend::Orthogonal(c2) => Ok(Self::Orthogonal(*c2)),
            Backend::Iterative => {
                let n = a.cols();
                let m = a.gram() * rho + nalgebra::DMatrix::<f64>::identity(n, n) * (1.0 + tau);
                Cholesky::new(m)
                    .map(Self::FixedPoint)
                    .ok_or_else(|| Error::Unsolvable {
                        subproblem: "weighted proximal ADMM x-update",
                        reason: "ρAᵀA + (1 + τ)I is not positive definite".into(),
                    })
            }
        }
    }
}

impl DistanceQuadratic<'_> {
    pub fn solve(&self, b: &[f64], start: &[f64]) -> Result<Vec<f64>> {
        match self.kind {
            DistanceBackend::Orthogonal(c2) => {
                // min (1/2)d_C²(x) + (β/2)‖x − v‖² has x = (βv + P_C(v)) / (1 + β).
                let beta = self.rho * c2 + self.tau;
                let v = scale(b, 1.0 / beta);
                let p = self.c.project(&v)?;
                Ok(v
                    .iter()
                    .zip(&p)
                    .map(|(vi, pi)| (beta * vi + pi) / (1.0 + beta))
                    .collect())
            }
            DistanceBackend::FixedPoint(chol) => {
                let mut x = start.to_vec();
                let mut last = f64::INFINITY;
                for _ in 0..self.max_iter {
                    let p = self.c.project(&x)?;
                    let rhs = DVector::from_iterator(x.len(), p.iter().zip(b).map(|(pi, bi)| pi + bi));
                    let next: Vec<f64> = chol.solve(&rhs).iter().copied().collect();
                    last = dist(&next, &x);
                    x = next;
                    if last <= self.tol {
                        return Ok(x);
                    }
                }
                Err(Error::InnerSolver {
                    subproblem: "weighted proximal ADMM x-update",
                    iterations: self.max_iter,
                    last_step: last,
                })
            }
        }
    }
}
