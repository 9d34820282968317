//! Smooth functions with gradient Lipschitz constants, and nonlinear
//! programs `min f(x) s.t. f_i(x) <= 0, x in Q` assembled from them.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::poly::{AxisBox, PolyError, Polynomial};
use crate::sets::{SetError, SimpleSet};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProblemError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Set(#[from] SetError),
    #[error("gradient Lipschitz constant must be positive and finite, got {0}")]
    BadLipschitz(f64),
    #[error("function has dimension {got}, problem has dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// A black-box differentiable function of `dimension()` variables.
pub trait ScalarField: Send + Sync + fmt::Debug {
    fn dimension(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64]) -> Vec<f64>;
}

#[derive(Debug, Clone, PartialEq)]
struct PolyField {
    poly: Polynomial,
    grad: Vec<Polynomial>,
}

#[derive(Debug, Clone)]
enum Repr {
    Poly(Arc<PolyField>),
    Custom(Arc<dyn ScalarField>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Polynomial,
    Builtin,
}

/// A C^2 function together with a Lipschitz constant of its gradient.
#[derive(Debug, Clone)]
pub struct SmoothFunction {
    repr: Repr,
    lipschitz_grad: f64,
}

fn check_lipschitz(l: f64) -> Result<f64, ProblemError> {
    if l > 0.0 && l.is_finite() {
        Ok(l)
    } else {
        Err(ProblemError::BadLipschitz(l))
    }
}

impl SmoothFunction {
    /// Wraps a polynomial, computing its constant on `trust_box`.
    pub fn from_polynomial(poly: Polynomial, trust_box: &AxisBox) -> Result<Self, ProblemError> {
        let l = poly.lipschitz_grad_bound(trust_box)?;
        Self::from_polynomial_with_lipschitz(poly, l)
    }

    pub fn from_polynomial_with_lipschitz(poly: Polynomial, lipschitz_grad: f64) -> Result<Self, ProblemError> {
        let grad = poly.gradient();
        Ok(SmoothFunction {
            repr: Repr::Poly(Arc::new(PolyField { poly, grad })),
            lipschitz_grad: check_lipschitz(lipschitz_grad)?,
        })
    }

    pub fn custom(field: Arc<dyn ScalarField>, lipschitz_grad: f64) -> Result<Self, ProblemError> {
        Ok(SmoothFunction {
            repr: Repr::Custom(field),
            lipschitz_grad: check_lipschitz(lipschitz_grad)?,
        })
    }

    /// Same function with a different constant.
    pub fn with_lipschitz(&self, lipschitz_grad: f64) -> Result<Self, ProblemError> {
        Ok(SmoothFunction {
            repr: self.repr.clone(),
            lipschitz_grad: check_lipschitz(lipschitz_grad)?,
        })
    }

    pub fn dimension(&self) -> usize {
        match &self.repr {
            Repr::Poly(p) => p.poly.dimension(),
            Repr::Custom(c) => c.dimension(),
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dimension());
        match &self.repr {
            Repr::Poly(p) => p.poly.eval_unchecked(x),
            Repr::Custom(c) => c.value(x),
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.dimension());
        match &self.repr {
            Repr::Poly(p) => p.grad.iter().map(|g| g.eval_unchecked(x)).collect(),
            Repr::Custom(c) => c.gradient(x),
        }
    }

    pub fn lipschitz_grad(&self) -> f64 {
        self.lipschitz_grad
    }

    pub fn provenance(&self) -> Provenance {
        match self.repr {
            Repr::Poly(_) => Provenance::Polynomial,
            Repr::Custom(_) => Provenance::Builtin,
        }
    }

    pub fn polynomial(&self) -> Option<&Polynomial> {
        match &self.repr {
            Repr::Poly(p) => Some(&p.poly),
            Repr::Custom(_) => None,
        }
    }
}

impl PartialEq for SmoothFunction {
    fn eq(&self, other: &Self) -> bool {
        let same_repr = match (&self.repr, &other.repr) {
            (Repr::Poly(a), Repr::Poly(b)) => a == b,
            (Repr::Custom(a), Repr::Custom(b)) => Arc::ptr_eq(a, b),
            _ => false,
        };
        same_repr && self.lipschitz_grad == other.lipschitz_grad
    }
}

/// Largest relative error between the gradient of `f` at `x` and central
/// differences with step `h`. Errors are taken relative to `max(1, |g_i|)`.
pub fn finite_diff_check(f: &SmoothFunction, x: &[f64], h: f64) -> f64 {
    assert!(h > 0.0, "finite difference step must be positive");
    let g = f.gradient(x);
    let mut xp = x.to_vec();
    let mut worst = 0.0_f64;
    for i in 0..x.len() {
        xp[i] = x[i] + h;
        let fp = f.value(&xp);
        xp[i] = x[i] - h;
        let fm = f.value(&xp);
        xp[i] = x[i];
        let fd = (fp - fm) / (2.0 * h);
        worst = worst.max((g[i] - fd).abs() / g[i].abs().max(1.0));
    }
    worst
}

/// `min f(x) s.t. f_i(x) <= 0 (i = 1..m), x in Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct NlpProblem {
    pub name: String,
    dimension: usize,
    pub objective: SmoothFunction,
    pub constraints: Vec<SmoothFunction>,
    pub simple_set: SimpleSet,
}

impl NlpProblem {
    pub fn new(
        name: impl Into<String>,
        objective: SmoothFunction,
        constraints: Vec<SmoothFunction>,
        simple_set: SimpleSet,
    ) -> Result<Self, ProblemError> {
        let dimension = objective.dimension();
        for c in &constraints {
            if c.dimension() != dimension {
                return Err(ProblemError::DimensionMismatch {
                    expected: dimension,
                    got: c.dimension(),
                });
            }
        }
        simple_set.check_dimension(dimension)?;
        Ok(NlpProblem {
            name: name.into(),
            dimension,
            objective,
            constraints,
            simple_set,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn constraint_values(&self, x: &[f64]) -> Vec<f64> {
        self.constraints.iter().map(|c| c.value(x)).collect()
    }

    /// `max(0, max_i f_i(x))`
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        self.constraints.iter().fold(0.0_f64, |m, c| m.max(c.value(x)))
    }
}
