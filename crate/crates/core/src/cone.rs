//! Open convex cones with vertex at the origin.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, norm, normalized};
use crate::rng;

/// How a cone was specified.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConeKind {
    FullSpace,
    HalfSpace {
        normal: Vec<f64>,
    },
    /// `{x : a_i·x > 0 for all i}` with unit inward normals `a_i`.
    Polyhedral {
        normals: Vec<Vec<f64>>,
    },
    /// Planar sector of opening `opening` centred on the ray at angle `axis`.
    Sector2D {
        opening: f64,
        axis: f64,
    },
}

/// An open convex cone `Σ ⊂ R^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvexCone {
    dim: usize,
    kind: ConeKind,
    normals: Vec<Vec<f64>>,
}

impl ConvexCone {
    pub fn full_space(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidCone(format!(
                "dimension must be at least 2, got {dim}"
            )));
        }
        Ok(ConvexCone {
            dim,
            kind: ConeKind::FullSpace,
            normals: Vec::new(),
        })
    }

    pub fn half_space(normal: &[f64]) -> Result<Self> {
        let dim = normal.len();
        if dim < 2 {
            return Err(Error::InvalidCone(format!(
                "dimension must be at least 2, got {dim}"
            )));
        }
        if !(norm(normal) > 0.0) || normal.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidCone(
                "half-space normal must be finite and nonzero".into(),
            ));
        }
        let a = normalized(normal);
        Ok(ConvexCone {
            dim,
            kind: ConeKind::HalfSpace { normal: a.clone() },
            normals: vec![a],
        })
    }

    /// Intersection of the open half-spaces `a_i·x > 0`.
    ///
    /// Rejects cones with empty interior, detected by a deterministic
    /// feasibility search over candidate directions.
    pub fn polyhedral(normals: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = normals.first() else {
            return Err(Error::InvalidCone(
                "polyhedral cone needs at least one normal".into(),
            ));
        };
        let dim = first.len();
        if dim < 2 {
            return Err(Error::InvalidCone(format!(
                "dimension must be at least 2, got {dim}"
            )));
        }
        let mut unit = Vec::with_capacity(normals.len());
        for a in &normals {
            if a.len() != dim {
                return Err(Error::InvalidCone(
                    "normals have inconsistent dimensions".into(),
                ));
            }
            if !(norm(a) > 0.0) || a.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidCone(
                    "normals must be finite and nonzero".into(),
                ));
            }
            unit.push(normalized(a));
        }
        let cone = ConvexCone {
            dim,
            kind: ConeKind::Polyhedral {
                normals: unit.clone(),
            },
            normals: unit,
        };
        if cone.find_interior_direction().is_none() {
            return Err(Error::InvalidCone("cone has empty interior".into()));
        }
        Ok(cone)
    }

    /// The positive orthant `(0, ∞)^n`.
    pub fn orthant(dim: usize) -> Result<Self> {
        let normals = (0..dim)
            .map(|i| {
                let mut e = vec![0.0; dim];
                e[i] = 1.0;
                e
            })
            .collect();
        Self::polyhedral(normals)
    }

    /// Planar sector `{axis - opening/2 < θ < axis + opening/2}`; convexity
    /// requires `opening ≤ π`.
    pub fn sector(opening: f64, axis: f64) -> Result<Self> {
        if !(opening > 0.0) || !opening.is_finite() {
            return Err(Error::InvalidCone(format!(
                "sector opening must be positive, got {opening}"
            )));
        }
        if opening > PI + 1e-12 {
            return Err(Error::InvalidCone(format!(
                "sector opening {opening} exceeds π; the cone would not be convex"
            )));
        }
        let lo = axis - 0.5 * opening;
        let hi = axis + 0.5 * opening;
        let a1 = vec![-lo.sin(), lo.cos()];
        let a2 = vec![hi.sin(), -hi.cos()];
        Ok(ConvexCone {
            dim: 2,
            kind: ConeKind::Sector2D { opening, axis },
            normals: vec![a1, a2],
        })
    }

    pub fn from_kind(kind: ConeKind, dim: Option<usize>) -> Result<Self> {
        match kind {
            ConeKind::FullSpace => Self::full_space(dim.unwrap_or(2)),
            ConeKind::HalfSpace { normal } => Self::half_space(&normal),
            ConeKind::Polyhedral { normals } => Self::polyhedral(normals),
            ConeKind::Sector2D { opening, axis } => Self::sector(opening, axis),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &ConeKind {
        &self.kind
    }

    /// Unit inward normals of the supporting half-spaces (empty for `R^n`).
    pub fn normals(&self) -> &[Vec<f64>] {
        &self.normals
    }

    pub fn is_full_space(&self) -> bool {
        self.normals.is_empty()
    }

    /// Open-cone membership.
    pub fn contains(&self, x: &[f64]) -> bool {
        self.normals.iter().all(|a| dot(a, x) > 0.0)
    }

    /// Membership in the closed cone up to an absolute slack.
    pub fn contains_closed(&self, x: &[f64], slack: f64) -> bool {
        self.normals.iter().all(|a| dot(a, x) >= -slack)
    }

    /// `dist(x, ∂Σ)` for `x ∈ Σ`; `+∞` for the whole space.
    pub fn distance_to_boundary(&self, x: &[f64]) -> f64 {
        self.normals
            .iter()
            .map(|a| dot(a, x))
            .fold(f64::INFINITY, f64::min)
    }

    fn find_interior_direction(&self) -> Option<Vec<f64>> {
        let sum: Vec<f64> = (0..self.dim)
            .map(|k| self.normals.iter().map(|a| a[k]).sum())
            .collect();
        if norm(&sum) > 1e-12 && self.contains(&sum) {
            return Some(normalized(&sum));
        }
        let mut best: Option<(f64, Vec<f64>)> = None;
        for d in crate::sphere::directions(self.dim.min(4), 16384) {
            if d.len() != self.dim {
                break;
            }
            let m = self.distance_to_boundary(&d);
            if m > 0.0 && best.as_ref().map_or(true, |(b, _)| m > *b) {
                best = Some((m, d));
            }
        }
        if best.is_none() && self.dim > 4 {
            let mut r = rng::stream(0x5eed, 0);
            for _ in 0..200_000 {
                let d = rng::unit_vector(&mut r, self.dim);
                if self.contains(&d) {
                    return Some(d);
                }
            }
        }
        best.map(|(_, d)| d)
    }

    /// A unit direction well inside the cone.
    pub fn interior_direction(&self) -> Vec<f64> {
        self.find_interior_direction()
            .expect("constructed cones have nonempty interior")
    }

    /// Angular interval `[lo, hi]` of the planar cap `S^1 ∩ Σ`, `hi - lo ≤ 2π`.
    pub fn arc(&self) -> Option<(f64, f64)> {
        if self.dim != 2 {
            return None;
        }
        if self.normals.is_empty() {
            return Some((0.0, 2.0 * PI));
        }
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        let reference = crate::sphere::angle_of(&self.interior_direction());
        for a in &self.normals {
            // {θ : a·u(θ) > 0} is the open arc of half-width π/2 around angle(a)
            let mut c = crate::sphere::angle_of(a);
            while c - reference > PI {
                c -= 2.0 * PI;
            }
            while reference - c > PI {
                c += 2.0 * PI;
            }
            lo = lo.max(c - 0.5 * PI);
            hi = hi.min(c + 0.5 * PI);
        }
        Some((lo, hi))
    }

    /// Uniform direction in the cap, at angular margin `margin` from `∂Σ`
    /// (measured as `dist(u, ∂Σ) ≥ margin` for the unit vector `u`).
    pub fn sample_direction<R: Rng>(&self, rng: &mut R, margin: f64) -> Vec<f64> {
        if let Some((lo, hi)) = self.arc() {
            loop {
                let t = rng.gen_range(lo..hi);
                let u = vec![t.cos(), t.sin()];
                if self.distance_to_boundary(&u) >= margin {
                    return u;
                }
            }
        }
        loop {
            let u = rng::unit_vector(rng, self.dim);
            if self.distance_to_boundary(&u) >= margin {
                return u;
            }
        }
    }

    /// Fraction of `S^{n-1}` covered by the cap, exact where a closed form
    /// is available and otherwise estimated from the deterministic direction set.
    pub fn cap_fraction(&self) -> f64 {
        if let Some((lo, hi)) = self.arc() {
            return (hi - lo) / (2.0 * PI);
        }
        match &self.kind {
            ConeKind::FullSpace => 1.0,
            ConeKind::HalfSpace { .. } => 0.5,
            _ => {
                let ds = crate::sphere::directions(self.dim, 1 << 16);
                ds.iter().filter(|d| self.contains(d)).count() as f64 / ds.len() as f64
            }
        }
    }

    /// Whether `other ⊂ self`, checked on the generators of `other`'s cap.
    pub fn contains_cone(&self, other: &ConvexCone) -> bool {
        let ds = crate::sphere::directions(self.dim.min(4), 8192);
        ds.iter()
            .filter(|d| other.contains(d))
            .all(|d| self.contains_closed(d, 1e-12))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orthant_membership_is_scale_invariant() {
        let c = ConvexCone::orthant(3).unwrap();
        let x = [0.2, 0.5, 1.0];
        for t in [1e-3, 1.0, 7.5, 1e4] {
            assert!(c.contains(&[t * x[0], t * x[1], t * x[2]]));
        }
        assert!(!c.contains(&[0.0, 1.0, 1.0]));
        assert!((c.distance_to_boundary(&x) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn reflex_sector_rejected() {
        assert!(ConvexCone::sector(1.5 * PI, 0.0).is_err());
        assert!(ConvexCone::sector(PI, 0.5 * PI).is_ok());
    }

    #[test]
    fn empty_polyhedral_rejected() {
        let r = ConvexCone::polyhedral(vec![vec![1.0, 0.0], vec![-1.0, 0.0]]);
        assert!(matches!(r, Err(Error::InvalidCone(_))));
    }

    #[test]
    fn sector_arc_and_normals() {
        let c = ConvexCone::sector(0.5 * PI, 0.25 * PI).unwrap();
        let (lo, hi) = c.arc().unwrap();
        assert!(lo.abs() < 1e-12 && (hi - 0.5 * PI).abs() < 1e-12);
        assert!(c.contains(&[1.0, 1.0]));
        assert!(!c.contains(&[-1.0, 1.0]));
        let q = ConvexCone::orthant(2).unwrap();
        let (lo2, hi2) = q.arc().unwrap();
        assert!((lo2 - lo).abs() < 1e-12 && (hi2 - hi).abs() < 1e-12);
    }

    #[test]
    fn half_plane_arc() {
        let c = ConvexCone::half_space(&[0.0, 1.0]).unwrap();
        let (lo, hi) = c.arc().unwrap();
        assert!(lo.abs() < 1e-12 && (hi - PI).abs() < 1e-12);
        assert!((c.cap_fraction() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn sampled_directions_respect_margin() {
        let c = ConvexCone::orthant(3).unwrap();
        let mut r = rng::stream(1, 0);
        for _ in 0..500 {
            let u = c.sample_direction(&mut r, 1e-3);
            assert!(c.distance_to_boundary(&u) >= 1e-3);
        }
    }
}
