//! Catalog of projectable sets.
//!
//! Every variant has an exact nearest-point map. For the non-convex variants
//! the projection may be set-valued; a single element is selected with
//! fixed tie-breaking rules so that runs replay bit-for-bit:
//!
//! * `SparsityBall` keeps the `s` largest magnitudes, lowest index first on ties.
//! * `Sphere` maps its center to `center + radius * e_1`.
//! * `FiniteSet` and `UnionOfConvex` pick the nearest candidate of lowest index.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::vecops::{dist, dot, norm_sq};

/// Absolute membership tolerance shared by the indicator evaluations.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

const ORTHONORMAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SetSpec {
    /// All of `R^dimension`.
    Whole { dimension: usize },
    Box { lower: Vec<f64>, upper: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
    /// `{u : <normal, u> <= offset}`
    Halfspace { normal: Vec<f64>, offset: f64 },
    /// `{u : <normal, u> = offset}`
    Hyperplane { normal: Vec<f64>, offset: f64 },
    /// `anchor + span(basis)`; basis vectors must be orthonormal.
    AffineSubspace { basis: Vec<Vec<f64>>, anchor: Vec<f64> },
    /// `{u >= 0 : sum(u) = scale}`
    Simplex { dimension: usize, scale: f64 },
    /// `{u : ||u||_0 <= s}`
    SparsityBall { dimension: usize, s: usize },
    Sphere { center: Vec<f64>, radius: f64 },
    FiniteSet { points: Vec<Vec<f64>> },
    /// Finite union of convex catalog sets (no nesting).
    UnionOfConvex { members: Vec<SetSpec> },
}

impl SetSpec {
    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        Self::Ball { center, radius }.validated()
    }

    pub fn boxed(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        Self::Box { lower, upper }.validated()
    }

    pub fn sparsity(dimension: usize, s: usize) -> Result<Self> {
        Self::SparsityBall { dimension, s }.validated()
    }

    pub fn finite(points: Vec<Vec<f64>>) -> Result<Self> {
        Self::FiniteSet { points }.validated()
    }

    pub fn union(members: Vec<SetSpec>) -> Result<Self> {
        Self::UnionOfConvex { members }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Whole { .. } => "whole",
            Self::Box { .. } => "box",
            Self::Ball { .. } => "ball",
            Self::Halfspace { .. } => "halfspace",
            Self::Hyperplane { .. } => "hyperplane",
            Self::AffineSubspace { .. } => "affine_subspace",
            Self::Simplex { .. } => "simplex",
            Self::SparsityBall { .. } => "sparsity_ball",
            Self::Sphere { .. } => "sphere",
            Self::FiniteSet { .. } => "finite_set",
            Self::UnionOfConvex { .. } => "union_of_convex",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Whole { dimension }
            | Self::Simplex { dimension, .. }
            | Self::SparsityBall { dimension, .. } => *dimension,
            Self::Box { lower, .. } => lower.len(),
            Self::Ball { center, .. } | Self::Sphere { center, .. } => center.len(),
            Self::Halfspace { normal, .. } | Self::Hyperplane { normal, .. } => normal.len(),
            Self::AffineSubspace { anchor, .. } => anchor.len(),
            Self::FiniteSet { points } => points.first().map_or(0, Vec::len),
            Self::UnionOfConvex { members } => members.first().map_or(0, SetSpec::dim),
        }
    }

    pub fn is_convex(&self) -> bool {
        !matches!(
            self,
            Self::SparsityBall { .. }
                | Self::Sphere { .. }
                | Self::FiniteSet { .. }
                | Self::UnionOfConvex { .. }
        )
    }

    /// Checks the structural invariants of the variant.
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidSet(format!("{}: {msg}", self.kind())));
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        match self {
            Self::FiniteSet { points } if points.is_empty() => {
                return fail("point list must be nonempty".into())
            }
            Self::UnionOfConvex { members } if members.is_empty() => {
                return fail("member list must be nonempty".into())
            }
            _ => {}
        }
        if self.dim() == 0 {
            return fail("dimension must be positive".into());
        }
        match self {
            Self::Whole { .. } => {}
            Self::Box { lower, upper } => {
                if lower.len() != upper.len() {
                    return fail(format!(
                        "lower has length {}, upper has length {}",
                        lower.len(),
                        upper.len()
                    ));
                }
                if lower.iter().chain(upper).any(|v| v.is_nan()) {
                    return fail("bounds must not be NaN".into());
                }
                if let Some(i) = lower.iter().zip(upper).position(|(l, u)| l > u) {
                    return fail(format!(
                        "lower <= upper violated at index {i} ({} > {})",
                        lower[i], upper[i]
                    ));
                }
            }
            Self::Ball { center, radius } | Self::Sphere { center, radius } => {
                if !finite(center) {
                    return fail("center must be finite".into());
                }
                if !(radius.is_finite() && *radius > 0.0) {
                    return fail(format!("radius must be positive and finite, got {radius}"));
                }
            }
            Self::Halfspace { normal, offset } | Self::Hyperplane { normal, offset } => {
                if !finite(normal) || !offset.is_finite() {
                    return fail("normal and offset must be finite".into());
                }
                if norm_sq(normal) == 0.0 {
                    return fail("normal must be nonzero".into());
                }
            }
            Self::AffineSubspace { basis, anchor } => {
                if !finite(anchor) {
                    return fail("anchor must be finite".into());
                }
                for (i, b) in basis.iter().enumerate() {
                    if b.len() != anchor.len() {
                        return fail(format!(
                            "basis vector {i} has length {}, anchor has length {}",
                            b.len(),
                            anchor.len()
                        ));
                    }
                    for (j, c) in basis.iter().enumerate().take(i + 1) {
                        let target = if i == j { 1.0 } else { 0.0 };
                        if (dot(b, c) - target).abs() > ORTHONORMAL_TOL {
                            return fail(format!("basis vectors {j} and {i} are not orthonormal"));
                        }
                    }
                }
            }
            Self::Simplex { scale, .. } => {
                if !(scale.is_finite() && *scale > 0.0) {
                    return fail(format!("scale must be positive and finite, got {scale}"));
                }
            }
            Self::SparsityBall { dimension, s } => {
                if *s == 0 || s > dimension {
                    return fail(format!("need 1 <= s <= {dimension}, got s = {s}"));
                }
            }
            Self::FiniteSet { points } => {
                let d = points[0].len();
                for (i, p) in points.iter().enumerate() {
                    if p.len() != d {
                        return fail(format!("point {i} has length {}, expected {d}", p.len()));
                    }
                    if !finite(p) {
                        return fail(format!("point {i} is not finite"));
                    }
                }
            }
            Self::UnionOfConvex { members } => {
                let d = members[0].dim();
                for (i, m) in members.iter().enumerate() {
                    if !m.is_convex() {
                        return fail(format!("member {i} ({}) is not a convex variant", m.kind()));
                    }
                    if m.dim() != d {
                        return fail(format!("member {i} has dimension {}, expected {d}", m.dim()));
                    }
                    m.validate()?;
                }
            }
        }
        Ok(())
    }

    /// One element of the nearest-point set `P_D(u)`.
    pub fn project(&self, u: &[f64]) -> Result<Vec<f64>> {
        check_len("project", self.dim(), u.len())?;
        Ok(self.project_unchecked(u))
    }

    fn project_unchecked(&self, u: &[f64]) -> Vec<f64> {
        match self {
            Self::Whole { .. } => u.to_vec(),
            Self::Box { lower, upper } => u
                .iter()
                .zip(lower.iter().zip(upper))
                .map(|(v, (l, h))| v.max(*l).min(*h))
                .collect(),
            Self::Ball { center, radius } => {
                let d = dist(u, center);
                if d <= *radius {
                    u.to_vec()
                } else {
                    let t = radius / d;
                    center.iter().zip(u).map(|(c, v)| c + t * (v - c)).collect()
                }
            }
            Self::Halfspace { normal, offset } => {
                let excess = dot(normal, u) - offset;
                if excess <= 0.0 {
                    u.to_vec()
                } else {
                    shift_along(u, normal, excess)
                }
            }
            Self::Hyperplane { normal, offset } => shift_along(u, normal, dot(normal, u) - offset),
            Self::AffineSubspace { basis, anchor } => {
                let rel: Vec<f64> = u.iter().zip(anchor).map(|(v, a)| v - a).collect();
                let mut out = anchor.clone();
                for b in basis {
                    let c = dot(b, &rel);
                    for (o, bi) in out.iter_mut().zip(b) {
                        *o += c * bi;
                    }
                }
                out
            }
            Self::Simplex { scale, .. } => project_simplex(u, *scale),
            Self::SparsityBall { s, .. } => hard_threshold(u, *s),
            Self::Sphere { center, radius } => {
                let d = dist(u, center);
                if d == 0.0 {
                    let mut out = center.clone();
                    out[0] += radius;
                    out
                } else {
                    let t = radius / d;
                    center.iter().zip(u).map(|(c, v)| c + t * (v - c)).collect()
                }
            }
            Self::FiniteSet { points } => nearest(points.iter().cloned(), u),
            Self::UnionOfConvex { members } => {
                nearest(members.iter().map(|m| m.project_unchecked(u)), u)
            }
        }
    }

    /// Euclidean distance from `u` to the set.
    pub fn distance(&self, u: &[f64]) -> Result<f64> {
        let p = self.project(u)?;
        Ok(dist(u, &p))
    }

    /// `distance(u) <= tol`.
    pub fn is_member(&self, u: &[f64], tol: f64) -> Result<bool> {
        Ok(self.distance(u)? <= tol)
    }

    /// Indicator function: `0` on the set (within `tol`), `+∞` off it.
    pub fn indicator(&self, u: &[f64], tol: f64) -> Result<f64> {
        Ok(if self.is_member(u, tol)? {
            0.0
        } else {
            f64::INFINITY
        })
    }

    /// Gradient `u - P_D(u)` of `(1/2) d_D²`, defined for convex variants only.
    pub fn half_sq_distance_gradient(&self, u: &[f64]) -> Result<Vec<f64>> {
        if !self.is_convex() {
            return Err(Error::NonConvexGradient(self.kind()));
        }
        let p = self.project(u)?;
        Ok(u.iter().zip(&p).map(|(a, b)| a - b).collect())
    }
}

fn shift_along(u: &[f64], normal: &[f64], excess: f64) -> Vec<f64> {
    let t = excess / norm_sq(normal);
    u.iter().zip(normal).map(|(v, a)| v - t * a).collect()
}

fn nearest(candidates: impl Iterator<Item = Vec<f64>>, u: &[f64]) -> Vec<f64> {
    let mut best: Option<(f64, Vec<f64>)> = None;
    for c in candidates {
        let d = dist(&c, u);
        // strict comparison keeps the lowest index on ties
        if best.as_ref().map_or(true, |(bd, _)| d < *bd) {
            best = Some((d, c));
        }
    }
    best.expect("nonempty candidate list").1
}

/// Keeps the `s` entries of largest magnitude; ties go to the lowest index.
pub fn hard_threshold(u: &[f64], s: usize) -> Vec<f64> {
    let mut order: Vec<usize> = (0..u.len()).collect();
    order.sort_by(|&i, &j| u[j].abs().total_cmp(&u[i].abs()).then(i.cmp(&j)));
    let mut out = vec![0.0; u.len()];
    for &i in order.iter().take(s) {
        out[i] = u[i];
    }
    out
}

/// Euclidean projection onto `{x >= 0 : sum(x) = scale}` by sorting.
pub fn project_simplex(u: &[f64], scale: f64) -> Vec<f64> {
    let mut sorted = u.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, v) in sorted.iter().enumerate() {
        cumsum += v;
        let t = (cumsum - scale) / (j + 1) as f64;
        if v - t > 0.0 {
            theta = t;
        }
    }
    u.iter().map(|v| (v - theta).max(0.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_ball2() -> SetSpec {
        SetSpec::ball(vec![0.0, 0.0], 1.0).unwrap()
    }

    #[test]
    fn projection_examples() {
        assert_eq!(unit_ball2().project(&[2.0, 0.0]).unwrap(), vec![1.0, 0.0]);
        let b = SetSpec::boxed(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        assert_eq!(b.project(&[2.0, -1.0]).unwrap(), vec![1.0, 0.0]);
        let sp = SetSpec::sparsity(2, 1).unwrap();
        assert_eq!(sp.project(&[3.0, -4.0]).unwrap(), vec![0.0, -4.0]);
        let sphere = SetSpec::Sphere {
            center: vec![0.0, 0.0],
            radius: 1.0,
        };
        assert_eq!(sphere.project(&[0.0, 0.0]).unwrap(), vec![1.0, 0.0]);
    }

    #[test]
    fn sparsity_ties_keep_lowest_index() {
        assert_eq!(hard_threshold(&[1.0, -1.0, 1.0], 2), vec![1.0, -1.0, 0.0]);
    }

    #[test]
    fn finite_set_ties_keep_lowest_index() {
        let f = SetSpec::finite(vec![vec![1.0, 0.0], vec![-1.0, 0.0]]).unwrap();
        assert_eq!(f.project(&[0.0, 0.0]).unwrap(), vec![1.0, 0.0]);
    }

    #[test]
    fn distance_examples() {
        assert_eq!(unit_ball2().distance(&[2.0, 0.0]).unwrap(), 1.0);
        assert_eq!(unit_ball2().distance(&[0.3, 0.4]).unwrap(), 0.0);
        let u = SetSpec::union(vec![
            unit_ball2(),
            SetSpec::ball(vec![4.0, 0.0], 1.0).unwrap(),
        ])
        .unwrap();
        assert_eq!(u.distance(&[2.0, 0.0]).unwrap(), 1.0);
        assert_eq!(u.project(&[2.0, 0.0]).unwrap(), vec![1.0, 0.0]);
    }

    #[test]
    fn membership_examples() {
        let b = SetSpec::boxed(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        assert!(b.is_member(&[0.5, 0.5], 0.0).unwrap());
        assert!(unit_ball2().is_member(&[1.0 + 1e-12, 0.0], 1e-9).unwrap());
        let sp = SetSpec::sparsity(3, 1).unwrap();
        assert!(!sp.is_member(&[1.0, 1.0, 0.0], 1e-9).unwrap());
    }

    #[test]
    fn gradient_examples() {
        assert_eq!(
            unit_ball2().half_sq_distance_gradient(&[2.0, 0.0]).unwrap(),
            vec![1.0, 0.0]
        );
        assert_eq!(
            unit_ball2().half_sq_distance_gradient(&[0.1, 0.2]).unwrap(),
            vec![0.0, 0.0]
        );
        let h = SetSpec::Hyperplane {
            normal: vec![0.0, 1.0],
            offset: 0.0,
        };
        assert_eq!(h.half_sq_distance_gradient(&[3.0, 2.0]).unwrap(), vec![0.0, 2.0]);
        let err = SetSpec::sparsity(2, 1)
            .unwrap()
            .half_sq_distance_gradient(&[1.0, 1.0])
            .unwrap_err();
        assert!(err.to_string().contains("non-convex"));
    }

    #[test]
    fn validation_errors() {
        assert!(SetSpec::finite(vec![]).is_err());
        let e = SetSpec::boxed(vec![0.0, 2.0], vec![1.0, 1.0]).unwrap_err();
        assert!(e.to_string().contains("lower <= upper"));
        assert!(SetSpec::sparsity(3, 0).is_err());
        assert!(SetSpec::sparsity(3, 4).is_err());
        assert!(SetSpec::ball(vec![0.0], -1.0).is_err());
        let nested = SetSpec::union(vec![SetSpec::finite(vec![vec![0.0]]).unwrap()]);
        assert!(nested.is_err());
        let bad_basis = SetSpec::AffineSubspace {
            basis: vec![vec![1.0, 1.0]],
            anchor: vec![0.0, 0.0],
        };
        assert!(bad_basis.validate().is_err());
    }

    #[test]
    fn dimension_mismatch() {
        assert!(unit_ball2().project(&[1.0, 2.0, 3.0]).is_err());
        assert!(unit_ball2().distance(&[1.0]).is_err());
    }

    #[test]
    fn simplex_projection() {
        let p = project_simplex(&[0.5, 0.5, 0.5], 1.0);
        for v in &p {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
        assert_eq!(project_simplex(&[5.0, 0.0], 1.0), vec![1.0, 0.0]);
        let p = project_simplex(&[0.2, -3.0, 0.9, 0.1], 2.0);
        assert!((p.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        assert!(p.iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn affine_and_halfspace() {
        let a = SetSpec::AffineSubspace {
            basis: vec![vec![1.0, 0.0, 0.0]],
            anchor: vec![0.0, 1.0, 1.0],
        };
        assert_eq!(a.project(&[5.0, 3.0, -2.0]).unwrap(), vec![5.0, 1.0, 1.0]);
        let h = SetSpec::Halfspace {
            normal: vec![1.0, 1.0],
            offset: 1.0,
        };
        assert_eq!(h.project(&[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
        assert_eq!(h.project(&[2.0, 2.0]).unwrap(), vec![0.5, 0.5]);
    }

    #[test]
    fn convexity_flags() {
        assert!(unit_ball2().is_convex());
        assert!(SetSpec::Whole { dimension: 2 }.is_convex());
        assert!(!SetSpec::sparsity(2, 1).unwrap().is_convex());
        assert!(!SetSpec::finite(vec![vec![0.0]]).unwrap().is_convex());
    }

    #[test]
    fn json_is_tagged_by_kind() {
        let j = serde_json::to_value(unit_ball2()).unwrap();
        assert_eq!(j["kind"], "ball");
        let back: SetSpec = serde_json::from_value(j).unwrap();
        assert_eq!(back, unit_ball2());
    }
}
