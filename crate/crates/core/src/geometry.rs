//! Convex feasible sets with closed-form Euclidean projection.
//!
//! Three set variants are supported: all of `R^d`, a Euclidean ball, and an
//! axis-aligned box. Each has an exact projection (identity, radial scaling,
//! coordinatewise clamp), which is all the update rule and the displacement
//! operator need. Every value here is immutable after construction and every
//! operation is a pure function.

use std::ops::Index;

use crate::error::{Error, Result};

/// Absolute tolerance on constraint violation when deciding set membership.
/// Projections land within rounding error of boundaries, so exact membership
/// tests would reject their own output.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// A point in `R^d`, `d >= 1`, with all coordinates finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    coords: Vec<f64>,
}

impl Point {
    /// Builds a point, rejecting empty or non-finite coordinate vectors.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidParameter {
                name: "coords",
                reason: "dimension must be at least 1".into(),
            });
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinitePoint);
        }
        Ok(Self { coords })
    }

    pub fn from_slice(coords: &[f64]) -> Result<Self> {
        Self::new(coords.to_vec())
    }

    /// One-dimensional point.
    pub fn scalar(value: f64) -> Result<Self> {
        Self::new(vec![value])
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be at least 1");
        Self {
            coords: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn add(&self, other: &Point) -> Point {
        assert_eq!(self.dim(), other.dim(), "point dimensions differ");
        Point {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Point) -> Point {
        assert_eq!(self.dim(), other.dim(), "point dimensions differ");
        Point {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, k: f64) -> Point {
        Point {
            coords: self.coords.iter().map(|a| a * k).collect(),
        }
    }

    pub fn dot(&self, other: &Point) -> f64 {
        assert_eq!(self.dim(), other.dim(), "point dimensions differ");
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn dist(&self, other: &Point) -> f64 {
        self.sub(other).norm()
    }

    pub fn inf_norm(&self) -> f64 {
        self.coords.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.coords.iter().all(|c| c.is_finite())
    }
}

impl Index<usize> for Point {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.coords[i]
    }
}

/// A convex feasible domain. Convexity holds by construction for each variant.
#[derive(Debug, Clone, PartialEq)]
pub enum FeasibleSet {
    AllSpace { dim: usize },
    Ball { center: Point, radius: f64 },
    Box { lower: Point, upper: Point },
}

impl FeasibleSet {
    pub fn all_space(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter {
                name: "dim",
                reason: "dimension must be at least 1".into(),
            });
        }
        Ok(Self::AllSpace { dim })
    }

    pub fn ball(center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "radius",
                reason: format!("must be positive and finite, got {radius}"),
            });
        }
        Ok(Self::Ball { center, radius })
    }

    /// Axis-aligned box; `lower < upper` must hold coordinatewise.
    pub fn axis_box(lower: Point, upper: Point) -> Result<Self> {
        if lower.dim() != upper.dim() {
            return Err(Error::DimensionMismatch {
                expected: lower.dim(),
                actual: upper.dim(),
            });
        }
        if !lower
            .coords()
            .iter()
            .zip(upper.coords())
            .all(|(l, u)| l < u)
        {
            return Err(Error::InvalidParameter {
                name: "bounds",
                reason: "lower must be strictly below upper in every coordinate".into(),
            });
        }
        Ok(Self::Box { lower, upper })
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::AllSpace { dim } => *dim,
            Self::Ball { center, .. } => center.dim(),
            Self::Box { lower, .. } => lower.dim(),
        }
    }

    fn check_dim(&self, x: &Point) -> Result<()> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: x.dim(),
            });
        }
        Ok(())
    }

    /// Euclidean nearest point of the set to `x`. Idempotent, and the
    /// identity on members of the set.
    pub fn project(&self, x: &Point) -> Result<Point> {
        self.check_dim(x)?;
        Ok(match self {
            Self::AllSpace { .. } => x.clone(),
            Self::Ball { center, radius } => {
                let offset = x.sub(center);
                let dist = offset.norm();
                if dist <= *radius {
                    x.clone()
                } else {
                    center.add(&offset.scale(radius / dist))
                }
            }
            Self::Box { lower, upper } => Point {
                coords: x
                    .coords()
                    .iter()
                    .zip(lower.coords())
                    .zip(upper.coords())
                    .map(|((&c, &l), &u)| c.clamp(l, u))
                    .collect(),
            },
        })
    }

    /// Worst constraint violation of `x`: zero inside the set, positive
    /// outside (Euclidean excess for balls, coordinate excess for boxes).
    pub fn violation(&self, x: &Point) -> f64 {
        assert_eq!(self.dim(), x.dim(), "point dimension differs from set");
        match self {
            Self::AllSpace { .. } => 0.0,
            Self::Ball { center, radius } => (x.dist(center) - radius).max(0.0),
            Self::Box { lower, upper } => x
                .coords()
                .iter()
                .zip(lower.coords())
                .zip(upper.coords())
                .map(|((&c, &l), &u)| (l - c).max(c - u).max(0.0))
                .fold(0.0, f64::max),
        }
    }

    /// Membership within [`MEMBERSHIP_TOL`].
    pub fn contains(&self, x: &Point) -> bool {
        self.violation(x) <= MEMBERSHIP_TOL
    }

    /// The feasible perturbation of `x` induced by direction `u`:
    /// `project(x + u) - x`. Equals `u` exactly whenever `x + u` is feasible.
    /// `x` itself must lie in the set (within tolerance).
    pub fn displacement(&self, x: &Point, u: &Point) -> Result<Point> {
        self.check_dim(x)?;
        self.check_dim(u)?;
        let violation = self.violation(x);
        if violation > MEMBERSHIP_TOL {
            return Err(Error::OutsideSet { violation });
        }
        Ok(self.project(&x.add(u))?.sub(x))
    }

    /// `sup ||x - y||` over the set; `+inf` for all-space.
    pub fn diameter(&self) -> f64 {
        match self {
            Self::AllSpace { .. } => f64::INFINITY,
            Self::Ball { radius, .. } => 2.0 * radius,
            Self::Box { lower, upper } => upper.dist(lower),
        }
    }

    pub fn is_bounded(&self) -> bool {
        self.diameter().is_finite()
    }

    /// True iff the closed ball of radius `margin` around `x` lies in the set
    /// (within [`MEMBERSHIP_TOL`]). All-space always passes.
    pub fn is_interior(&self, x: &Point, margin: f64) -> bool {
        assert_eq!(self.dim(), x.dim(), "point dimension differs from set");
        assert!(margin >= 0.0, "margin must be nonnegative");
        match self {
            Self::AllSpace { .. } => true,
            Self::Ball { center, radius } => x.dist(center) + margin <= radius + MEMBERSHIP_TOL,
            Self::Box { lower, upper } => x
                .coords()
                .iter()
                .zip(lower.coords())
                .zip(upper.coords())
                .all(|((&c, &l), &u)| {
                    c - margin >= l - MEMBERSHIP_TOL && c + margin <= u + MEMBERSHIP_TOL
                }),
        }
    }
}
