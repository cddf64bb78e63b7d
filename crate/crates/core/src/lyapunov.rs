//! Lyapunov function candidates: quadratic, the two-state power form, or user closures.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use nalgebra::DMatrix;

use crate::error::{invalid, Result};
use crate::math::{self, abs, pow, signed_pow};

type Eval = dyn Fn(&[f64]) -> f64 + Send + Sync;
type Grad = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

#[derive(Clone)]
pub enum LyapunovFunction {
    /// `V(x) = xᵀPx`, `P` symmetric positive definite.
    Quadratic { p: DMatrix<f64>, lambda_min: f64 },
    /// `V(x) = k2/(2α)·|x1|^{2α} + ½x2²` on `R²`.
    Power { k2: f64, alpha: f64 },
    Custom { dim: usize, value: Arc<Eval>, gradient: Option<Arc<Grad>> },
}

/// One candidate per flow index.
pub type LyapunovSet = Vec<LyapunovFunction>;

impl fmt::Debug for LyapunovFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Quadratic { p, .. } => f.debug_struct("Quadratic").field("p", p).finish(),
            Self::Power { k2, alpha } => {
                f.debug_struct("Power").field("k2", k2).field("alpha", alpha).finish()
            }
            Self::Custom { dim, gradient, .. } => f
                .debug_struct("Custom")
                .field("dim", dim)
                .field("has_gradient", &gradient.is_some())
                .finish(),
        }
    }
}

impl LyapunovFunction {
    /// Quadratic form from a row-major `n×n` matrix. Rejects asymmetric or
    /// non-positive-definite `P`.
    pub fn quadratic(n: usize, row_major: &[f64]) -> Result<Self> {
        if n == 0 || row_major.len() != n * n {
            return Err(invalid(alloc::format!(
                "quadratic Lyapunov function: expected {} entries, got {}",
                n * n,
                row_major.len()
            )));
        }
        let p = DMatrix::from_row_slice(n, n, row_major);
        let scale = p.amax().max(1.0);
        for i in 0..n {
            for j in 0..i {
                if abs(p[(i, j)] - p[(j, i)]) > 1e-12 * scale {
                    return Err(invalid(alloc::format!(
                        "quadratic Lyapunov function: P is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        let lambda_min = p.clone().symmetric_eigenvalues().min();
        if !(lambda_min > 0.0) {
            return Err(invalid(alloc::format!(
                "quadratic Lyapunov function: P is not positive definite (min eigenvalue {lambda_min})"
            )));
        }
        Ok(Self::Quadratic { p, lambda_min })
    }

    pub fn power(k2: f64, alpha: f64) -> Result<Self> {
        if !(k2 > 0.0) || !(alpha > 0.5 && alpha <= 1.0) {
            return Err(invalid("power Lyapunov function: need k2 > 0 and 0.5 < alpha <= 1"));
        }
        Ok(Self::Power { k2, alpha })
    }

    pub fn custom<V>(dim: usize, value: V) -> Self
    where
        V: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self::Custom { dim, value: Arc::new(value), gradient: None }
    }

    pub fn with_gradient<G>(self, gradient: G) -> Self
    where
        G: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        match self {
            Self::Custom { dim, value, .. } => {
                Self::Custom { dim, value, gradient: Some(Arc::new(gradient)) }
            }
            other => other,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Quadratic { p, .. } => p.nrows(),
            Self::Power { .. } => 2,
            Self::Custom { dim, .. } => *dim,
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            Self::Quadratic { p, .. } => {
                let n = p.nrows();
                let mut acc = 0.0;
                for i in 0..n {
                    let mut row = 0.0;
                    for j in 0..n {
                        row += p[(i, j)] * x[j];
                    }
                    acc += x[i] * row;
                }
                acc
            }
            Self::Power { k2, alpha } => {
                k2 / (2.0 * alpha) * pow(abs(x[0]), 2.0 * alpha) + 0.5 * x[1] * x[1]
            }
            Self::Custom { value, .. } => value(x),
        }
    }

    /// `∇V(x)`, or `None` for a custom function without a gradient.
    pub fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        match self {
            Self::Quadratic { p, .. } => {
                let n = p.nrows();
                Some((0..n).map(|i| 2.0 * (0..n).map(|j| p[(i, j)] * x[j]).sum::<f64>()).collect())
            }
            Self::Power { k2, alpha } => {
                Some(alloc::vec![k2 * signed_pow(x[0], 2.0 * alpha - 1.0), x[1]])
            }
            Self::Custom { gradient, .. } => gradient.as_ref().map(|g| g(x)),
        }
    }

    pub fn has_gradient(&self) -> bool {
        !matches!(self, Self::Custom { gradient: None, .. })
    }

    /// Smallest eigenvalue of `P` for the quadratic kind.
    pub fn lambda_min(&self) -> Option<f64> {
        match self {
            Self::Quadratic { lambda_min, .. } => Some(*lambda_min),
            _ => None,
        }
    }

    /// Positive-definiteness: eigenvalue sign for the quadratic kind, otherwise
    /// `V(0) = 0` and `V > 0` on spheres of the given radii.
    pub fn is_positive_definite(&self, radii: &[f64], directions: usize) -> bool {
        if let Self::Quadratic { lambda_min, .. } = self {
            return *lambda_min > 0.0;
        }
        let n = self.dim();
        if self.value(&alloc::vec![0.0; n]) != 0.0 {
            return false;
        }
        let dirs = math::sphere_directions(n, directions);
        radii.iter().all(|&r| {
            dirs.iter().all(|u| {
                let x: Vec<f64> = u.iter().map(|v| v * r).collect();
                self.value(&x) > 0.0
            })
        })
    }
}

/// Default radii used when a positive-definiteness check needs sampling.
pub const PD_RADII: [f64; 6] = [1e-3, 1e-2, 0.1, 1.0, 10.0, 100.0];
