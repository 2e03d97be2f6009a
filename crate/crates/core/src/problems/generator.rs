//! Seeded instance generator with controlled consistency and spectrum.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linops::LinearMap;
use crate::objectives::ProblemInstance;
use crate::sets::SetSpec;
use crate::solvers::{Algorithm, NMode};
use crate::vecops::{add, dot, norm, scale, sub};

/// Catalog families the generator can draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SetFamily {
    Whole,
    Box,
    Ball,
    Halfspace,
    Hyperplane,
    Affine,
    Simplex,
    Sparsity,
    Sphere,
    Finite,
    /// Union of boxes.
    Union,
}

impl SetFamily {
    pub const ALL: [SetFamily; 11] = [
        Self::Whole,
        Self::Box,
        Self::Ball,
        Self::Halfspace,
        Self::Hyperplane,
        Self::Affine,
        Self::Simplex,
        Self::Sparsity,
        Self::Sphere,
        Self::Finite,
        Self::Union,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Whole => "whole",
            Self::Box => "box",
            Self::Ball => "ball",
            Self::Halfspace => "halfspace",
            Self::Hyperplane => "hyperplane",
            Self::Affine => "affine",
            Self::Simplex => "simplex",
            Self::Sparsity => "sparsity",
            Self::Sphere => "sphere",
            Self::Finite => "finite",
            Self::Union => "union",
        }
    }

    fn translatable(self) -> bool {
        !matches!(self, Self::Simplex | Self::Sparsity)
    }
}

impl fmt::Display for SetFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SetFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|f| f.name() == s).ok_or_else(|| {
            let names: Vec<_> = Self::ALL.iter().map(|f| f.name()).collect();
            Error::Generator(format!("unknown set family {s:?}; expected one of {}", names.join(", ")))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub n: usize,
    /// Row count of each `A_j`; one entry for a single-set problem.
    pub m: Vec<usize>,
    pub set_c: SetFamily,
    pub set_q: SetFamily,
    pub consistent: bool,
    pub seed: u64,
    /// Singular values of every `A_j`, `min(m_j, n)` of them.
    pub spectrum: Option<Vec<f64>>,
    pub enforce_requirements_for: Option<Algorithm>,
    /// `s` for sparsity families; defaults to `max(1, dim / 4)`.
    pub sparsity: Option<usize>,
    /// Separation `d(A_j(C), Q_j)` for inconsistent instances.
    pub margin: f64,
}

impl GeneratorSpec {
    pub fn new(n: usize, m: usize, set_c: SetFamily, set_q: SetFamily, seed: u64) -> Self {
        Self {
            n,
            m: vec![m],
            set_c,
            set_q,
            consistent: true,
            seed,
            spectrum: None,
            enforce_requirements_for: None,
            sparsity: None,
            margin: 1.0,
        }
    }
}

/// Singular values used when none are requested: evenly spaced from 1 down to 1/2.
pub fn default_spectrum(k: usize) -> Vec<f64> {
    if k == 1 {
        return vec![1.0];
    }
    (0..k).map(|i| 1.0 - 0.5 * i as f64 / (k - 1) as f64).collect()
}

fn gaussian_vec(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

fn unit_vec(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let g = gaussian_vec(rng, d);
        let nrm = norm(&g);
        if nrm > 1e-8 {
            return scale(&g, 1.0 / nrm);
        }
    }
}

/// Orthogonal `d x d` matrix from modified Gram-Schmidt on a Gaussian matrix.
pub fn random_orthogonal(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<f64> {
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(d);
    while cols.len() < d {
        let mut v = gaussian_vec(rng, d);
        for c in &cols {
            let proj = dot(&v, c);
            for (vi, ci) in v.iter_mut().zip(c) {
                *vi -= proj * ci;
            }
        }
        let nrm = norm(&v);
        if nrm > 1e-8 {
            cols.push(scale(&v, 1.0 / nrm));
        }
    }
    DMatrix::from_fn(d, d, |i, j| cols[j][i])
}

fn build_map(rng: &mut ChaCha8Rng, m: usize, n: usize, sigma: &[f64]) -> Result<LinearMap> {
    let u = random_orthogonal(rng, m);
    let v = random_orthogonal(rng, n);
    let mut a = DMatrix::<f64>::zeros(m, n);
    for (i, s) in sigma.iter().enumerate() {
        a += u.column(i) * v.column(i).transpose() * *s;
    }
    LinearMap::from_dmatrix(&a)
}

fn requirement_spectrum(
    mut sigma: Vec<f64>,
    m: usize,
    n: usize,
    algorithm: Option<Algorithm>,
) -> Result<Vec<f64>> {
    let need_row_rank = matches!(algorithm, Some(Algorithm::WpadmmSf4(_)));
    if need_row_rank {
        if m > n {
            return Err(Error::Generator(format!(
                "AAᵀ ≻ 0 needs m <= n, got m = {m}, n = {n}"
            )));
        }
        if sigma.iter().any(|s| *s <= 0.0) {
            return Err(Error::Generator("AAᵀ ≻ 0 needs positive singular values".into()));
        }
    }
    if algorithm == Some(Algorithm::WpadmmSf4(NMode::Linearized)) {
        if m != n {
            return Err(Error::Generator(format!(
                "AAᵀ ≻ 0 with κ(AᵀA) < 2 needs a square A, got {m}x{n}"
            )));
        }
        let max = sigma.iter().copied().fold(0.0, f64::max);
        let min = sigma.iter().copied().fold(f64::INFINITY, f64::min);
        if (max / min).powi(2) >= 2.0 {
            // squeeze into [max/1.3, max], κ = 1.69
            let lo = max / 1.3;
            for s in &mut sigma {
                *s = lo + (max - lo) * (*s - min) / (max - min);
            }
        }
    }
    Ok(sigma)
}

fn sparsity_level(spec: &GeneratorSpec, dim: usize) -> Result<usize> {
    let s = spec.sparsity.unwrap_or((dim / 4).max(1));
    if s == 0 || s > dim {
        return Err(Error::Generator(format!("sparsity {s} out of range for dimension {dim}")));
    }
    Ok(s)
}

fn sparse_vec(rng: &mut ChaCha8Rng, d: usize, s: usize) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..d).collect();
    idx.shuffle(rng);
    let mut v = vec![0.0; d];
    for &i in idx.iter().take(s) {
        let mag: f64 = rng.random_range(0.5..1.5);
        v[i] = if rng.random::<bool>() { mag } else { -mag };
    }
    v
}

fn random_box(rng: &mut ChaCha8Rng, center: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let w: Vec<f64> = center.iter().map(|_| rng.random_range(0.5..1.5)).collect();
    (sub(center, &w), add(center, &w))
}

/// A set of the family together with one of its members (interior when there is one).
fn sample_with_member(
    family: SetFamily,
    d: usize,
    s: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(SetSpec, Vec<f64>)> {
    let out = match family {
        SetFamily::Whole => (SetSpec::Whole { dimension: d }, gaussian_vec(rng, d)),
        SetFamily::Ball => {
            let center = gaussian_vec(rng, d);
            let radius = 1.0 + rng.random::<f64>();
            let t = 0.9 * rng.random::<f64>();
            let p = add(&center, &scale(&unit_vec(rng, d), t * radius));
            (SetSpec::Ball { center, radius }, p)
        }
        SetFamily::Box => {
            let center = gaussian_vec(rng, d);
            let (lower, upper) = random_box(rng, &center);
            let p: Vec<f64> = lower
                .iter()
                .zip(&upper)
                .map(|(l, u)| {
                    let t: f64 = rng.random_range(0.05..0.95);
                    l + t * (u - l)
                })
                .collect();
            (SetSpec::Box { lower, upper }, p)
        }
        SetFamily::Halfspace => {
            let normal = unit_vec(rng, d);
            let p = gaussian_vec(rng, d);
            let offset = dot(&normal, &p) + rng.random_range(0.1..1.0);
            (SetSpec::Halfspace { normal, offset }, p)
        }
        SetFamily::Hyperplane => {
            let normal = unit_vec(rng, d);
            let p = gaussian_vec(rng, d);
            let offset = dot(&normal, &p);
            (SetSpec::Hyperplane { normal, offset }, p)
        }
        SetFamily::Affine => {
            let k = (d / 2).max(1);
            let q = random_orthogonal(rng, d);
            let basis: Vec<Vec<f64>> = (0..k).map(|j| q.column(j).iter().copied().collect()).collect();
            let anchor = gaussian_vec(rng, d);
            let mut p = anchor.clone();
            for b in &basis {
                let c: f64 = rng.sample(StandardNormal);
                for (pi, bi) in p.iter_mut().zip(b) {
                    *pi += c * bi;
                }
            }
            (SetSpec::AffineSubspace { basis, anchor }, p)
        }
        SetFamily::Simplex => {
            let sc = 1.0 + rng.random::<f64>();
            let g: Vec<f64> = (0..d).map(|_| rng.random_range(0.1..1.0)).collect();
            let total: f64 = g.iter().sum();
            let p = scale(&g, sc / total);
            (SetSpec::Simplex { dimension: d, scale: sc }, p)
        }
        SetFamily::Sparsity => (SetSpec::SparsityBall { dimension: d, s }, sparse_vec(rng, d, s)),
        SetFamily::Sphere => {
            let center = gaussian_vec(rng, d);
            let radius = 1.0 + rng.random::<f64>();
            let p = add(&center, &scale(&unit_vec(rng, d), radius));
            (SetSpec::Sphere { center, radius }, p)
        }
        SetFamily::Finite => {
            let points: Vec<Vec<f64>> = (0..5).map(|_| scale(&gaussian_vec(rng, d), 2.0)).collect();
            let i = rng.random_range(0..points.len());
            let p = points[i].clone();
            (SetSpec::FiniteSet { points }, p)
        }
        SetFamily::Union => {
            let members: Vec<SetSpec> = (0..3)
                .map(|_| {
                    let center = scale(&gaussian_vec(rng, d), 3.0);
                    let (lower, upper) = random_box(rng, &center);
                    SetSpec::Box { lower, upper }
                })
                .collect();
            let i = rng.random_range(0..members.len());
            let p = match &members[i] {
                SetSpec::Box { lower, upper } => lower
                    .iter()
                    .zip(upper)
                    .map(|(l, u)| l + rng.random_range(0.05..0.95) * (u - l))
                    .collect(),
                _ => unreachable!(),
            };
            (SetSpec::UnionOfConvex { members }, p)
        }
    };
    Ok(out)
}

fn translate(set: &SetSpec, shift: &[f64]) -> SetSpec {
    match set {
        SetSpec::Whole { .. } => set.clone(),
        SetSpec::Box { lower, upper } => SetSpec::Box {
            lower: add(lower, shift),
            upper: add(upper, shift),
        },
        SetSpec::Ball { center, radius } => SetSpec::Ball {
            center: add(center, shift),
            radius: *radius,
        },
        SetSpec::Sphere { center, radius } => SetSpec::Sphere {
            center: add(center, shift),
            radius: *radius,
        },
        SetSpec::Halfspace { normal, offset } => SetSpec::Halfspace {
            normal: normal.clone(),
            offset: offset + dot(normal, shift),
        },
        SetSpec::Hyperplane { normal, offset } => SetSpec::Hyperplane {
            normal: normal.clone(),
            offset: offset + dot(normal, shift),
        },
        SetSpec::AffineSubspace { basis, anchor } => SetSpec::AffineSubspace {
            basis: basis.clone(),
            anchor: add(anchor, shift),
        },
        SetSpec::FiniteSet { points } => SetSpec::FiniteSet {
            points: points.iter().map(|p| add(p, shift)).collect(),
        },
        SetSpec::UnionOfConvex { members } => SetSpec::UnionOfConvex {
            members: members.iter().map(|m| translate(m, shift)).collect(),
        },
        SetSpec::Simplex { .. } | SetSpec::SparsityBall { .. } => {
            unreachable!("family is not translatable")
        }
    }
}

/// A set of the family translated so that `target` is a member.
fn build_containing(
    family: SetFamily,
    target: &[f64],
    s: usize,
    rng: &mut ChaCha8Rng,
    role: &str,
) -> Result<SetSpec> {
    if !family.translatable() {
        return Err(Error::Generator(format!(
            "{role} family {family} cannot be translated onto a prescribed point"
        )));
    }
    let (set, p) = sample_with_member(family, target.len(), s, rng)?;
    let placed = translate(&set, &sub(target, &p));
    // snap the designated member exactly onto the target
    Ok(match placed {
        SetSpec::FiniteSet { mut points } => {
            let i = points
                .iter()
                .enumerate()
                .min_by(|a, b| crate::vecops::dist(a.1, target).total_cmp(&crate::vecops::dist(b.1, target)))
                .map(|(i, _)| i)
                .unwrap_or(0);
            points[i] = target.to_vec();
            SetSpec::FiniteSet { points }
        }
        other => other,
    })
}

/// Center and bounding radius of a ball or box.
fn bounding_ball(set: &SetSpec) -> Option<(Vec<f64>, f64)> {
    match set {
        SetSpec::Ball { center, radius } => Some((center.clone(), *radius)),
        SetSpec::Box { lower, upper } => {
            let c: Vec<f64> = lower.iter().zip(upper).map(|(l, u)| 0.5 * (l + u)).collect();
            let half = scale(&sub(upper, lower), 0.5);
            Some((c, norm(&half)))
        }
        _ => None,
    }
}

/// Draws an instance. Identical specs give bit-identical instances.
pub fn generate(spec: &GeneratorSpec) -> Result<ProblemInstance> {
    if spec.n == 0 || spec.m.is_empty() || spec.m.contains(&0) {
        return Err(Error::Generator("dimensions must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.n;

    let mut maps = Vec::with_capacity(spec.m.len());
    for &m in &spec.m {
        let k = m.min(n);
        let sigma = match &spec.spectrum {
            Some(s) if s.len() != k => {
                return Err(Error::Generator(format!(
                    "spectrum has {} values, expected min(m, n) = {k}",
                    s.len()
                )))
            }
            Some(s) if s.iter().any(|v| !(v.is_finite() && *v >= 0.0)) => {
                return Err(Error::Generator("singular values must be finite and nonnegative".into()))
            }
            Some(s) => s.clone(),
            None => default_spectrum(k),
        };
        let sigma = requirement_spectrum(sigma, m, n, spec.enforce_requirements_for)?;
        maps.push(build_map(&mut rng, m, n, &sigma)?);
    }

    let s_c = sparsity_level(spec, n)?;
    let problem = if spec.consistent {
        let (set_c, sets_q, witness) = if spec.set_q == SetFamily::Sparsity {
            if maps.len() > 1 {
                return Err(Error::Generator(
                    "sparsity Q sets are only generated for single-set problems".into(),
                ));
            }
            let a = &maps[0];
            let m = a.rows();
            if m > n {
                return Err(Error::Generator(format!(
                    "sparsity Q needs m <= n to plant a solution, got m = {m}, n = {n}"
                )));
            }
            let s_q = sparsity_level(spec, m)?;
            let y_star = sparse_vec(&mut rng, m, s_q);
            // minimum-norm preimage x* = Aᵀ(AAᵀ)⁻¹y*
            let chol = nalgebra::Cholesky::new(a.row_gram())
                .ok_or_else(|| Error::Generator("AAᵀ is singular; cannot plant a sparse image".into()))?;
            let z = chol.solve(&DVector::from_vec(y_star.clone()));
            let x_star = a.apply_adjoint(z.as_slice())?;
            let set_c = build_containing(spec.set_c, &x_star, s_c, &mut rng, "C")?;
            (set_c, vec![SetSpec::SparsityBall { dimension: m, s: s_q }], x_star)
        } else {
            let (set_c, x_star) = sample_with_member(spec.set_c, n, s_c, &mut rng)?;
            let mut sets_q = Vec::with_capacity(maps.len());
            for a in &maps {
                let s_q = sparsity_level(spec, a.rows())?;
                sets_q.push(build_containing(spec.set_q, &a.apply(&x_star)?, s_q, &mut rng, "Q")?);
            }
            (set_c, sets_q, x_star)
        };
        ProblemInstance::multiset(set_c, maps, sets_q)?.with_witness(witness)?
    } else {
        let ok = |f: SetFamily| matches!(f, SetFamily::Ball | SetFamily::Box);
        if !ok(spec.set_c) || !ok(spec.set_q) {
            return Err(Error::Generator(format!(
                "inconsistent instances need ball/box families, got C = {}, Q = {}",
                spec.set_c, spec.set_q
            )));
        }
        if !(spec.margin > 0.0 && spec.margin.is_finite()) {
            return Err(Error::Generator(format!("margin must be positive, got {}", spec.margin)));
        }
        let (set_c, _) = sample_with_member(spec.set_c, n, s_c, &mut rng)?;
        let (c_center, c_radius) = bounding_ball(&set_c).expect("ball or box");
        let mut sets_q = Vec::with_capacity(maps.len());
        for a in &maps {
            let m = a.rows();
            let op = a.spectral_summary(crate::linops::DEFAULT_SPECTRAL_TOL)?.operator_norm;
            let image_center = a.apply(&c_center)?;
            let (q, _) = sample_with_member(spec.set_q, m, 1, &mut rng)?;
            let (q_center, q_radius) = bounding_ball(&q).expect("ball or box");
            // A(C) ⊆ B(Ac, ‖A‖r_C) and Q ⊆ B(c_Q, r_Q): separate the two balls by the margin.
            let gap = op * c_radius + q_radius + spec.margin;
            let target = add(&image_center, &scale(&unit_vec(&mut rng, m), gap));
            sets_q.push(translate(&q, &sub(&target, &q_center)));
        }
        let mut p = ProblemInstance::multiset(set_c, maps, sets_q)?;
        p.infeasibility_margin = Some(spec.margin);
        p.validate()?;
        p
    };
    Ok(problem)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::residuals;

    #[test]
    fn orthogonal_factor_is_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let q = random_orthogonal(&mut rng, 6);
        let err = (q.transpose() * &q - DMatrix::<f64>::identity(6, 6)).abs().max();
        assert!(err < 1e-12);
    }

    #[test]
    fn consistent_witness_has_zero_residuals() {
        for (c, q) in [
            (SetFamily::Ball, SetFamily::Box),
            (SetFamily::Sparsity, SetFamily::Union),
            (SetFamily::Finite, SetFamily::Finite),
            (SetFamily::Simplex, SetFamily::Sphere),
            (SetFamily::Box, SetFamily::Sparsity),
            (SetFamily::Affine, SetFamily::Halfspace),
        ] {
            let mut spec = GeneratorSpec::new(8, 6, c, q, 11);
            spec.sparsity = Some(2);
            let p = generate(&spec).unwrap();
            let (rc, rq) = residuals(&p, p.witness.as_ref().unwrap()).unwrap();
            assert!(rc <= 1e-9 && rq <= 1e-9, "{c}/{q}: ({rc}, {rq})");
        }
    }

    #[test]
    fn same_seed_same_instance() {
        let spec = GeneratorSpec::new(5, 4, SetFamily::Ball, SetFamily::Finite, 42);
        assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
        let mut other = spec.clone();
        other.seed = 43;
        assert_ne!(generate(&spec).unwrap(), generate(&other).unwrap());
    }

    #[test]
    fn linearized_requirements_rescale_spectrum() {
        let mut spec = GeneratorSpec::new(2, 2, SetFamily::Ball, SetFamily::Finite, 1);
        spec.spectrum = Some(vec![1.2, 1.0]);
        spec.enforce_requirements_for = Some(Algorithm::WpadmmSf4(NMode::Linearized));
        let p = generate(&spec).unwrap();
        let s = p.maps[0].spectral_summary(1e-12).unwrap();
        assert!((s.gram_condition - 1.44).abs() < 1e-10);

        spec.spectrum = Some(vec![3.0, 1.0]);
        let p = generate(&spec).unwrap();
        let s = p.maps[0].spectral_summary(1e-12).unwrap();
        assert!(s.gram_condition < 2.0);

        let mut rect = GeneratorSpec::new(3, 2, SetFamily::Ball, SetFamily::Finite, 1);
        rect.enforce_requirements_for = Some(Algorithm::WpadmmSf4(NMode::Linearized));
        assert!(generate(&rect).is_err());
    }

    #[test]
    fn inconsistent_needs_ball_or_box() {
        let mut spec = GeneratorSpec::new(3, 3, SetFamily::Sphere, SetFamily::Ball, 1);
        spec.consistent = false;
        assert!(generate(&spec).is_err());
        spec.set_c = SetFamily::Ball;
        let p = generate(&spec).unwrap();
        assert_eq!(p.infeasibility_margin, Some(1.0));
        assert!(p.witness.is_none());
    }

    #[test]
    fn spectrum_length_checked() {
        let mut spec = GeneratorSpec::new(3, 2, SetFamily::Ball, SetFamily::Ball, 1);
        spec.spectrum = Some(vec![1.0, 1.0, 1.0]);
        assert!(generate(&spec).is_err());
    }
}
