//! The elementary power inequalities behind the activation-time bound.
//!
//! For `a_i ≥ b_i ≥ 0` and `0 < r < 1`, `Σ(a_i^r − b_i^r) ≤ Σ(a_i − b_i)^r`, which follows
//! from the sum-power sandwich `(Σz)^r ≤ Σz^r ≤ M^{1−r}(Σz)^r`.

use crate::error::{invalid, Result};
use crate::math::pow;

/// Absolute slack used for every inequality check in the crate.
pub const INEQUALITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerGap {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Evaluates both sides of `Σ(a_i^r − b_i^r) ≤ Σ(a_i − b_i)^r`.
pub fn power_gap_inequality(a: &[f64], b: &[f64], r: f64) -> Result<PowerGap> {
    if a.len() != b.len() {
        return Err(invalid("power_gap_inequality: length mismatch"));
    }
    if !(r > 0.0 && r < 1.0) {
        return Err(invalid("power_gap_inequality: exponent must lie in (0, 1)"));
    }
    if let Some(i) = a.iter().zip(b).position(|(&ai, &bi)| !(ai >= bi && bi >= 0.0)) {
        return Err(invalid(alloc::format!(
            "power_gap_inequality: need a_i >= b_i >= 0, violated at index {i}"
        )));
    }
    let lhs = a.iter().zip(b).map(|(&ai, &bi)| pow(ai, r) - pow(bi, r)).sum::<f64>();
    let rhs = a.iter().zip(b).map(|(&ai, &bi)| pow(ai - bi, r)).sum::<f64>();
    Ok(PowerGap { lhs, rhs, holds: lhs <= rhs + INEQUALITY_TOL })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sandwich {
    pub low: f64,
    pub mid: f64,
    pub high: f64,
    pub holds: bool,
}

/// Evaluates `(Σz)^r ≤ Σz^r ≤ M^{1−r}(Σz)^r` for `0 < r ≤ 1`.
pub fn sum_power_sandwich(z: &[f64], r: f64) -> Result<Sandwich> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(invalid("sum_power_sandwich: exponent must lie in (0, 1]"));
    }
    if z.iter().any(|&v| !(v >= 0.0)) {
        return Err(invalid("sum_power_sandwich: entries must be nonnegative"));
    }
    let total: f64 = z.iter().sum();
    let low = pow(total, r);
    let mid = z.iter().map(|&v| pow(v, r)).sum::<f64>();
    let high = pow(z.len() as f64, 1.0 - r) * low;
    let tol = INEQUALITY_TOL * (1.0 + high);
    Ok(Sandwich { low, mid, high, holds: low <= mid + tol && mid <= high + tol })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_lists_give_zero() {
        let g = power_gap_inequality(&[3.0, 1.0], &[3.0, 1.0], 0.4).unwrap();
        assert_eq!((g.lhs, g.rhs, g.holds), (0.0, 0.0, true));
    }

    #[test]
    fn square_root_example() {
        let g = power_gap_inequality(&[4.0, 9.0], &[1.0, 4.0], 0.5).unwrap();
        assert!((g.lhs - 2.0).abs() < 1e-15);
        assert!((g.rhs - (3f64.sqrt() + 5f64.sqrt())).abs() < 1e-12);
        assert!(g.holds);
    }

    #[test]
    fn boundary_equality() {
        let g = power_gap_inequality(&[1.0], &[0.0], 0.5).unwrap();
        assert_eq!((g.lhs, g.rhs), (1.0, 1.0));
        assert!(g.holds);
    }

    #[test]
    fn misordered_is_rejected() {
        assert!(power_gap_inequality(&[1.0], &[2.0], 0.5).is_err());
        assert!(power_gap_inequality(&[1.0], &[0.5], 1.0).is_err());
    }

    #[test]
    fn sandwich_examples() {
        let s = sum_power_sandwich(&[1.0, 1.0], 0.5).unwrap();
        assert!((s.low - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(s.mid, 2.0);
        assert!((s.high - 2.0).abs() < 1e-15);
        assert!(s.holds);

        let s = sum_power_sandwich(&[5.0], 0.7).unwrap();
        let v = 5f64.powf(0.7);
        assert!((s.low - v).abs() < 1e-14 && (s.mid - v).abs() < 1e-14 && (s.high - v).abs() < 1e-14);

        let s = sum_power_sandwich(&[0.0, 0.0, 0.0], 0.3).unwrap();
        assert_eq!((s.low, s.mid, s.high), (0.0, 0.0, 0.0));
        assert!(sum_power_sandwich(&[-1.0], 0.3).is_err());
    }
}
