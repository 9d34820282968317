//! Simple closed convex sets with closed-form Euclidean projections.
//!
//! Stationarity with respect to a set is always measured through the
//! projection fixed point `||x - P_Q(x - v)||`, which vanishes exactly when
//! `-v` lies in the normal cone of `Q` at `x`. Normal cones are never built.

use thiserror::Error;

use crate::linalg::{dist, norm};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SetError {
    #[error("dimension mismatch: set has dimension {expected}, point has {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid set parameters: {0}")]
    InvalidParameters(String),
    #[error("point is not in the set (distance {0:e})")]
    NotInSet(f64),
}

/// Tolerance on membership used by [`SimpleSet::stationarity_residual`].
pub const MEMBERSHIP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum SimpleSet {
    WholeSpace,
    /// Coordinatewise bounds; infinite bounds allowed.
    Box { lower: Vec<f64>, upper: Vec<f64> },
    EuclideanBall { center: Vec<f64>, radius: f64 },
    /// `{u >= 0, sum u = scale}`
    Simplex { scale: f64 },
    /// `{u >= 0, sum u <= scale}`
    SimplexCap { scale: f64 },
    NonnegOrthant,
}

impl SimpleSet {
    pub fn new_box(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, SetError> {
        if lower.len() != upper.len() {
            return Err(SetError::InvalidParameters("box bound lengths differ".into()));
        }
        if lower.iter().zip(&upper).any(|(l, u)| l.is_nan() || u.is_nan() || l > u || *l == f64::INFINITY || *u == f64::NEG_INFINITY) {
            return Err(SetError::InvalidParameters("box requires lower <= upper".into()));
        }
        Ok(SimpleSet::Box { lower, upper })
    }

    pub fn new_ball(center: Vec<f64>, radius: f64) -> Result<Self, SetError> {
        if !(radius > 0.0) || !radius.is_finite() || center.iter().any(|c| !c.is_finite()) {
            return Err(SetError::InvalidParameters("ball requires a finite center and radius > 0".into()));
        }
        Ok(SimpleSet::EuclideanBall { center, radius })
    }

    pub fn new_simplex(scale: f64) -> Result<Self, SetError> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(SetError::InvalidParameters("simplex requires scale > 0".into()));
        }
        Ok(SimpleSet::Simplex { scale })
    }

    pub fn new_simplex_cap(scale: f64) -> Result<Self, SetError> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(SetError::InvalidParameters("capped simplex requires scale > 0".into()));
        }
        Ok(SimpleSet::SimplexCap { scale })
    }

    /// Fixed dimension of the set, if it has one.
    pub fn dimension(&self) -> Option<usize> {
        match self {
            SimpleSet::Box { lower, .. } => Some(lower.len()),
            SimpleSet::EuclideanBall { center, .. } => Some(center.len()),
            _ => None,
        }
    }

    pub fn variant_name(&self) -> &'static str {
        match self {
            SimpleSet::WholeSpace => "whole",
            SimpleSet::Box { .. } => "box",
            SimpleSet::EuclideanBall { .. } => "ball",
            SimpleSet::Simplex { .. } => "simplex",
            SimpleSet::SimplexCap { .. } => "simplex_cap",
            SimpleSet::NonnegOrthant => "nonneg",
        }
    }

    pub fn check_dimension(&self, n: usize) -> Result<(), SetError> {
        match self.dimension() {
            Some(d) if d != n => Err(SetError::DimensionMismatch { expected: d, got: n }),
            _ => Ok(()),
        }
    }

    /// Euclidean projection of `z` onto the set.
    pub fn project(&self, z: &[f64]) -> Result<Vec<f64>, SetError> {
        self.check_dimension(z.len())?;
        let mut out = z.to_vec();
        self.project_in_place(&mut out);
        Ok(out)
    }

    pub(crate) fn project_in_place(&self, z: &mut [f64]) {
        match self {
            SimpleSet::WholeSpace => {}
            SimpleSet::Box { lower, upper } => {
                for ((v, l), u) in z.iter_mut().zip(lower).zip(upper) {
                    *v = v.clamp(*l, *u);
                }
            }
            SimpleSet::EuclideanBall { center, radius } => {
                let d = dist(z, center);
                // points within roundoff of the sphere are members
                if d > radius * (1.0 + 4.0 * f64::EPSILON) {
                    let t = radius / d;
                    for (v, c) in z.iter_mut().zip(center) {
                        *v = c + t * (*v - c);
                    }
                }
            }
            SimpleSet::Simplex { scale } => project_simplex(z, *scale),
            SimpleSet::SimplexCap { scale } => {
                let pos_sum: f64 = z.iter().map(|v| v.max(0.0)).sum();
                if pos_sum <= *scale {
                    for v in z.iter_mut() {
                        *v = v.max(0.0);
                    }
                } else {
                    project_simplex(z, *scale);
                }
            }
            SimpleSet::NonnegOrthant => {
                for v in z.iter_mut() {
                    *v = v.max(0.0);
                }
            }
        }
    }

    /// `dist(x, Q) <= tol`.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        match self.project(x) {
            Ok(p) => dist(x, &p) <= tol,
            Err(_) => false,
        }
    }

    /// `||x - P_Q(x - v)||`; zero iff `-v` is in the normal cone at `x`.
    pub fn stationarity_residual(&self, x: &[f64], v: &[f64]) -> Result<f64, SetError> {
        self.check_dimension(x.len())?;
        if x.len() != v.len() {
            return Err(SetError::DimensionMismatch {
                expected: x.len(),
                got: v.len(),
            });
        }
        let px = self.project(x)?;
        let d = dist(x, &px);
        if d > MEMBERSHIP_TOL {
            return Err(SetError::NotInSet(d));
        }
        Ok(self.stationarity_residual_unchecked(x, v))
    }

    pub(crate) fn stationarity_residual_unchecked(&self, x: &[f64], v: &[f64]) -> f64 {
        if matches!(self, SimpleSet::WholeSpace) {
            return norm(v);
        }
        let mut z: Vec<f64> = x.iter().zip(v).map(|(a, b)| a - b).collect();
        self.project_in_place(&mut z);
        dist(x, &z)
    }
}

/// Projection onto `{u >= 0, sum u = scale}` by the sorted threshold rule.
fn project_simplex(z: &mut [f64], scale: f64) {
    if z.is_empty() {
        return;
    }
    let sum: f64 = z.iter().sum();
    if z.iter().all(|v| *v >= 0.0) && (sum - scale).abs() <= 4.0 * f64::EPSILON * scale * z.len() as f64 {
        return;
    }
    let mut sorted: Vec<f64> = z.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut tau = 0.0;
    for (j, &s) in sorted.iter().enumerate() {
        cumsum += s;
        let t = (cumsum - scale) / (j + 1) as f64;
        if s - t > 0.0 {
            tau = t;
        }
    }
    for v in z.iter_mut() {
        *v = (*v - tau).max(0.0);
    }
    // tau cancels against large entries; restore the sum on the support
    let (count, sum) = z.iter().filter(|v| **v > 0.0).fold((0usize, 0.0), |(c, s), v| (c + 1, s + v));
    if count > 0 {
        let shift = (scale - sum) / count as f64;
        for v in z.iter_mut().filter(|v| **v > 0.0) {
            *v = (*v + shift).max(0.0);
        }
    }
}
