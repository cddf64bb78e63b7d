//! Comparison functions of class GK / GK∞ and grid-sampled membership checks.
//!
//! A GK function is strictly increasing on `[0, ∞)`, vanishes at the origin and is right
//! continuous there. Membership cannot be decided symbolically for an arbitrary closure, so
//! [`check_gk`] certifies it on a caller-supplied grid.

use alloc::sync::Arc;
use core::fmt;

use crate::error::{invalid, Result};
use crate::math;

type ScalarMap = dyn Fn(f64) -> f64 + Send + Sync;

/// A comparison function `α : [0, ∞) → [0, ∞)`.
#[derive(Clone)]
pub struct GkFunction {
    eval: Arc<ScalarMap>,
    unbounded: bool,
}

impl fmt::Debug for GkFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GkFunction")
            .field("alpha(1)", &self.eval(1.0))
            .field("unbounded", &self.unbounded)
            .finish()
    }
}

impl GkFunction {
    /// Wraps an evaluator. `unbounded` records the GK∞ claim; it is checked, not trusted.
    pub fn new<F>(f: F, unbounded: bool) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self { eval: Arc::new(f), unbounded }
    }

    /// `r ↦ a·r^b`. With `a = 0` this is the zero function.
    pub fn power_law(a: f64, b: f64) -> Self {
        Self::new(
            move |r| if a == 0.0 || r <= 0.0 { 0.0 } else { a * math::pow(r, b) },
            a > 0.0 && b > 0.0,
        )
    }

    pub fn zero() -> Self {
        Self::new(|_| 0.0, false)
    }

    pub fn identity() -> Self {
        Self::new(|r| r, true)
    }

    #[inline]
    pub fn eval(&self, r: f64) -> f64 {
        (self.eval)(r)
    }

    pub fn claims_unbounded(&self) -> bool {
        self.unbounded
    }

    /// `r ↦ self(inner(r))`.
    pub fn compose(&self, inner: &GkFunction) -> GkFunction {
        let (f, g) = (self.eval.clone(), inner.eval.clone());
        GkFunction::new(move |r| f(g(r)), self.unbounded && inner.unbounded)
    }

    /// Pointwise sum.
    pub fn add(&self, other: &GkFunction) -> GkFunction {
        let (f, g) = (self.eval.clone(), other.eval.clone());
        GkFunction::new(move |r| f(r) + g(r), self.unbounded || other.unbounded)
    }

    /// Pointwise multiple `k·α`, `k ≥ 0`.
    pub fn scale(&self, k: f64) -> GkFunction {
        let f = self.eval.clone();
        GkFunction::new(move |r| k * f(r), self.unbounded && k > 0.0)
    }

    /// True when the function is identically zero on `grid`. The zero function is not GK,
    /// but it is the admissible degenerate bound for conditions that never accumulate.
    pub fn vanishes_on(&self, grid: &[f64]) -> bool {
        grid.iter().all(|&r| self.eval(r) == 0.0)
    }
}

/// First point at which a GK check failed.
#[derive(Debug, Clone, PartialEq)]
pub enum GkViolation {
    NonZeroAtOrigin { value: f64 },
    NotIncreasing { index: usize, r_lo: f64, r_hi: f64, f_lo: f64, f_hi: f64 },
    Negative { r: f64, value: f64 },
    Bounded { largest: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GkCheck {
    pub ok: bool,
    pub violation: Option<GkViolation>,
}

/// Checks `f(0) = 0` and strict increase on an ascending grid that starts at 0.
///
/// When the function claims GK∞ the check also requires it to keep growing far out:
/// `f(10^300) ≥ 1.01·f(10^150)`, which rejects saturating functions and accepts any
/// power law or logarithm.
pub fn check_gk(f: &GkFunction, grid: &[f64]) -> Result<GkCheck> {
    if grid.is_empty() {
        return Err(invalid("check_gk: empty grid"));
    }
    if grid[0] != 0.0 {
        return Err(invalid("check_gk: grid must start at 0"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) || grid.iter().any(|r| !r.is_finite()) {
        return Err(invalid("check_gk: grid must be finite and strictly ascending"));
    }
    let fail = |v| Ok(GkCheck { ok: false, violation: Some(v) });
    let f0 = f.eval(0.0);
    if f0 != 0.0 {
        return fail(GkViolation::NonZeroAtOrigin { value: f0 });
    }
    let values: alloc::vec::Vec<f64> = grid.iter().map(|&r| f.eval(r)).collect();
    for (k, (&r, &v)) in grid.iter().zip(&values).enumerate().skip(1) {
        if !(v >= 0.0) {
            return fail(GkViolation::Negative { r, value: v });
        }
        if !(v > values[k - 1]) {
            return fail(GkViolation::NotIncreasing {
                index: k,
                r_lo: grid[k - 1],
                r_hi: r,
                f_lo: values[k - 1],
                f_hi: v,
            });
        }
    }
    if f.claims_unbounded() {
        let mid = f.eval(1e150);
        let largest = f.eval(1e300);
        if !(largest >= 1.01 * mid && largest > f.eval(1.0)) {
            return fail(GkViolation::Bounded { largest });
        }
    }
    Ok(GkCheck { ok: true, violation: None })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_passes() {
        let sq = GkFunction::power_law(1.0, 2.0);
        assert!(check_gk(&sq, &[0.0, 1.0, 2.0, 3.0]).unwrap().ok);
    }

    #[test]
    fn dip_near_zero_fails() {
        // r² − r: values 0, −0.1875, −0.25
        let f = GkFunction::new(|r| r * r - r, false);
        let check = check_gk(&f, &[0.0, 0.25, 0.5]).unwrap();
        assert!(!check.ok);
        assert!(matches!(check.violation, Some(GkViolation::Negative { .. })));
    }

    #[test]
    fn constant_zero_fails() {
        let check = check_gk(&GkFunction::zero(), &[0.0, 1.0, 2.0]).unwrap();
        assert!(!check.ok);
        assert!(matches!(check.violation, Some(GkViolation::NotIncreasing { index: 1, .. })));
    }

    #[test]
    fn empty_grid_is_an_error() {
        assert!(check_gk(&GkFunction::identity(), &[]).is_err());
    }

    #[test]
    fn nonzero_origin_fails() {
        let f = GkFunction::new(|r| r + 1.0, false);
        assert_eq!(
            check_gk(&f, &[0.0, 1.0]).unwrap().violation,
            Some(GkViolation::NonZeroAtOrigin { value: 1.0 })
        );
    }

    #[test]
    fn false_unbounded_claim_is_caught() {
        let f = GkFunction::new(|r| r / (1.0 + r), true);
        assert!(!check_gk(&f, &[0.0, 1.0, 2.0]).unwrap().ok);
    }

    #[test]
    fn compositions() {
        let grid: alloc::vec::Vec<f64> = (0..40).map(|k| k as f64 * 0.25).collect();
        let sq = GkFunction::power_law(1.0, 2.0);
        let cube = GkFunction::power_law(1.0, 3.0);
        let six = sq.compose(&cube);
        for &r in &grid {
            assert!((six.eval(r) - r.powi(6)).abs() <= 1e-9 * (1.0 + r.powi(6)));
        }
        assert!(check_gk(&six, &grid).unwrap().ok);

        let id = GkFunction::identity().compose(&GkFunction::identity());
        assert_eq!(id.eval(3.5), 3.5);

        let g = GkFunction::new(|r| r + r * r, true);
        assert_eq!(sq.compose(&g).eval(2.0), 36.0);
        assert!(check_gk(&sq.add(&g), &grid).unwrap().ok);
    }
}
