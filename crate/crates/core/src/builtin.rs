//! Ready-made vector fields and jump maps.

use alloc::vec::Vec;

use crate::error::{invalid, Result};
use crate::math::signed_pow;
use crate::system::{field, Field, HybridSystem, Region};

/// Parameters of the five-mode planar hybrid example.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarExample {
    pub alpha: f64,
    pub k1: f64,
    pub k2: f64,
    /// Exponent in the second component of the finite-time mode. `2α − 1` makes
    /// `V = k2/(2α)|x1|^{2α} + ½x2²` decrease along it.
    pub second_exponent: f64,
    pub jump_factor: f64,
}

impl Default for PlanarExample {
    fn default() -> Self {
        let alpha = 0.98;
        Self { alpha, k1: 20.0, k2: 10.0, second_exponent: 2.0 * alpha - 1.0, jump_factor: -1.1 }
    }
}

/// The five flows; the fifth is the finite-time stable one.
pub fn planar_example_flows(p: &PlanarExample) -> Vec<Field> {
    let PlanarExample { alpha, k1, k2, second_exponent, .. } = *p;
    alloc::vec![
        field(|x: &[f64], o: &mut [f64]| {
            o[0] = 0.01 * x[0] * x[0] + x[1];
            o[1] = -0.01 * x[0] * x[0] * x[0] + x[1];
        }),
        field(|x: &[f64], o: &mut [f64]| {
            o[0] = 0.01 * x[0] - x[1];
            o[1] = -x[0] * x[0] + 0.01 * x[1];
        }),
        field(|x: &[f64], o: &mut [f64]| {
            o[0] = -x[0] - x[1];
            o[1] = x[0] - x[1];
        }),
        field(|x: &[f64], o: &mut [f64]| {
            o[0] = 0.01 * x[0] * x[0] + 0.01 * x[0] * x[1];
            o[1] = -0.01 * x[0] * x[0] * x[0] + x[1] * x[1];
        }),
        field(move |x: &[f64], o: &mut [f64]| {
            o[0] = x[1] - k1 * signed_pow(x[0], alpha);
            o[1] = -k2 * signed_pow(x[0], second_exponent);
        }),
    ]
}

pub fn planar_example(p: &PlanarExample) -> Result<HybridSystem> {
    HybridSystem::new(
        2,
        planar_example_flows(p),
        alloc::vec![scale_jump(p.jump_factor)],
        Region::All,
        Region::All,
    )
}

/// `g(x) = factor·x`.
pub fn scale_jump(factor: f64) -> Field {
    field(move |x: &[f64], o: &mut [f64]| {
        for (oi, xi) in o.iter_mut().zip(x) {
            *oi = factor * xi;
        }
    })
}

/// `ẋ = Ax`, `A` row-major `n×n`.
pub fn linear_flow(n: usize, a: &[f64]) -> Result<Field> {
    if a.len() != n * n {
        return Err(invalid("linear flow: matrix has the wrong number of entries"));
    }
    let a = a.to_vec();
    Ok(field(move |x: &[f64], o: &mut [f64]| {
        for i in 0..n {
            o[i] = (0..n).map(|j| a[i * n + j] * x[j]).sum();
        }
    }))
}

/// `ẋ_i = −gain·sign(x_i)|x_i|^p`, componentwise.
pub fn power_decay(gain: f64, p: f64) -> Field {
    field(move |x: &[f64], o: &mut [f64]| {
        for (oi, xi) in o.iter_mut().zip(x) {
            *oi = -gain * signed_pow(*xi, p);
        }
    })
}

/// `ẋ_i = −gains_i·sign(x_i)|x_i|^p`.
pub fn power_decay_diag(gains: &[f64], p: f64) -> Field {
    let gains = gains.to_vec();
    field(move |x: &[f64], o: &mut [f64]| {
        for ((oi, xi), g) in o.iter_mut().zip(x).zip(&gains) {
            *oi = -g * signed_pow(*xi, p);
        }
    })
}
