//! Finite-time output feedback for switched single-input single-output linear plants in
//! which exactly one mode is controllable and observable.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Error, Result};
use crate::math::{abs, signed_pow, signed_pow_linear_zone};
use crate::system::{field, HybridSystem};

fn config(msg: impl Into<alloc::string::String>) -> Error {
    Error::Configuration(msg.into())
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearSwitchedPlant {
    n: usize,
    a: Vec<DMatrix<f64>>,
    b: Vec<DVector<f64>>,
    c: Vec<DVector<f64>>,
    sigma0: usize,
}

impl LinearSwitchedPlant {
    /// Matrices row-major: `a[i]` has `n²` entries, `b[i]` and `c[i]` have `n`.
    pub fn new(n: usize, a: &[Vec<f64>], b: &[Vec<f64>], c: &[Vec<f64>], sigma0: usize) -> Result<Self> {
        if n == 0 || a.is_empty() {
            return Err(invalid("linear plant: need n >= 1 and at least one mode"));
        }
        if b.len() != a.len() || c.len() != a.len() {
            return Err(invalid("linear plant: A, B and C lists have different lengths"));
        }
        if sigma0 >= a.len() {
            return Err(invalid("linear plant: sigma0 out of range"));
        }
        for (i, ((ai, bi), ci)) in a.iter().zip(b).zip(c).enumerate() {
            if ai.len() != n * n || bi.len() != n || ci.len() != n {
                return Err(invalid(alloc::format!("linear plant: mode {} has inconsistent dimensions", i + 1)));
            }
        }
        Ok(Self {
            n,
            a: a.iter().map(|m| DMatrix::from_row_slice(n, n, m)).collect(),
            b: b.iter().map(|v| DVector::from_column_slice(v)).collect(),
            c: c.iter().map(|v| DVector::from_column_slice(v)).collect(),
            sigma0,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn n_modes(&self) -> usize {
        self.a.len()
    }

    pub fn sigma0(&self) -> usize {
        self.sigma0
    }

    /// `A_{σ0}` is the upper shift matrix, `B_{σ0} = e_n`, `C_{σ0} = e_1ᵀ`.
    pub fn check_canonical(&self) -> Result<()> {
        let n = self.n;
        let s = self.sigma0;
        for i in 0..n {
            for j in 0..n {
                let want = if j == i + 1 { 1.0 } else { 0.0 };
                if self.a[s][(i, j)] != want {
                    return Err(config(alloc::format!(
                        "mode {}: A is not the shift matrix at ({}, {})",
                        s + 1,
                        i + 1,
                        j + 1
                    )));
                }
            }
            if self.b[s][i] != if i == n - 1 { 1.0 } else { 0.0 } {
                return Err(config(alloc::format!("mode {}: B is not the last unit vector", s + 1)));
            }
            if self.c[s][i] != if i == 0 { 1.0 } else { 0.0 } {
                return Err(config(alloc::format!("mode {}: C is not the first unit row", s + 1)));
            }
        }
        Ok(())
    }
}

fn rank(m: &DMatrix<f64>) -> usize {
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    let tol = 1e-10 * max * m.nrows().max(m.ncols()) as f64;
    sv.iter().filter(|&&s| s > tol).count()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModeRank {
    pub controllable: bool,
    pub observable: bool,
}

/// Rank tests of `[B, AB, …]` and `[C; CA; …]` for every mode. Fails when `σ0` does
/// not pass both.
pub fn ctrb_obsv_check(plant: &LinearSwitchedPlant) -> Result<Vec<ModeRank>> {
    let n = plant.n;
    let report: Vec<ModeRank> = (0..plant.n_modes())
        .map(|i| {
            let a = &plant.a[i];
            let mut ctrb = DMatrix::zeros(n, n);
            let mut obsv = DMatrix::zeros(n, n);
            let mut col = plant.b[i].clone();
            let mut row = plant.c[i].clone();
            for k in 0..n {
                ctrb.set_column(k, &col);
                obsv.set_row(k, &row.transpose());
                col = a * col;
                row = a.transpose() * row;
            }
            ModeRank { controllable: rank(&ctrb) == n, observable: rank(&obsv) == n }
        })
        .collect();
    let s = report[plant.sigma0];
    if !(s.controllable && s.observable) {
        return Err(config(alloc::format!(
            "mode {} must be controllable and observable (controllable: {}, observable: {})",
            plant.sigma0 + 1,
            s.controllable,
            s.observable
        )));
    }
    Ok(report)
}

/// Companion matrix of `sⁿ + c₁sⁿ⁻¹ + … + cₙ`, given `[1, c₁, …, cₙ]`.
pub fn companion_matrix(coeffs: &[f64]) -> Result<DMatrix<f64>> {
    check_poly(coeffs)?;
    let n = coeffs.len() - 1;
    let mut m = DMatrix::zeros(n, n);
    for j in 0..n {
        m[(0, j)] = -coeffs[j + 1];
    }
    for i in 1..n {
        m[(i, i - 1)] = 1.0;
    }
    Ok(m)
}

fn check_poly(coeffs: &[f64]) -> Result<()> {
    if coeffs.len() < 2 {
        return Err(invalid("polynomial must have degree at least 1"));
    }
    if coeffs[0] != 1.0 {
        return Err(invalid("polynomial must be monic (leading coefficient 1)"));
    }
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(invalid("polynomial coefficients must be finite"));
    }
    Ok(())
}

fn is_hurwitz_matrix(m: DMatrix<f64>) -> bool {
    m.complex_eigenvalues().iter().all(|z| z.re < 0.0)
}

/// True iff every root of the monic polynomial (coefficients in descending order) has a
/// negative real part, by the eigenvalues of its companion matrix.
pub fn is_hurwitz_poly(coeffs: &[f64]) -> Result<bool> {
    Ok(is_hurwitz_matrix(companion_matrix(coeffs)?))
}

/// Routh table test: strict Hurwitz iff every first-column entry is positive.
pub fn routh_hurwitz(coeffs: &[f64]) -> Result<bool> {
    check_poly(coeffs)?;
    let n = coeffs.len() - 1;
    let width = n / 2 + 1;
    let row = |start: usize| -> Vec<f64> {
        (0..width).map(|k| coeffs.get(start + 2 * k).copied().unwrap_or(0.0)).collect()
    };
    let mut prev = row(0);
    let mut cur = row(1);
    for _ in 1..n {
        if !(cur[0] > 0.0) {
            return Ok(false);
        }
        let next: Vec<f64> = (0..width)
            .map(|j| {
                let p = prev.get(j + 1).copied().unwrap_or(0.0);
                let c = cur.get(j + 1).copied().unwrap_or(0.0);
                (cur[0] * p - prev[0] * c) / cur[0]
            })
            .collect();
        prev = core::mem::replace(&mut cur, next);
    }
    Ok(cur[0] > 0.0)
}

/// Observer injection `g_i(y) = l_i·sign(y)|y|^{α_i}`, `α_i = iα − (i − 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObserverConfig {
    pub l: Vec<f64>,
    pub alpha: f64,
    exponents: Vec<f64>,
}

impl ObserverConfig {
    /// Requires `1 − 1/n < α < 1` (any `α ∈ (0, 1)` for `n = 1`) and `Ā` Hurwitz.
    pub fn new(l: Vec<f64>, alpha: f64) -> Result<Self> {
        let n = l.len();
        if n == 0 {
            return Err(invalid("observer: empty gain vector"));
        }
        let lo = 1.0 - 1.0 / n as f64;
        if !(alpha > lo && alpha < 1.0) {
            return Err(invalid(alloc::format!("observer: alpha must lie in ({lo}, 1)")));
        }
        let exponents = observer_exponents(n, alpha);
        let cfg = Self { l, alpha, exponents };
        if !is_hurwitz_matrix(cfg.a_bar()) {
            return Err(config("observer: the gain matrix with first column -l is not Hurwitz"));
        }
        Ok(cfg)
    }

    pub fn n(&self) -> usize {
        self.l.len()
    }

    pub fn exponents(&self) -> &[f64] {
        &self.exponents
    }

    /// `Ā = [−l | [I_{n−1}; 0ᵀ]]`.
    pub fn a_bar(&self) -> DMatrix<f64> {
        let n = self.n();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, 0)] = -self.l[i];
            if i + 1 < n {
                m[(i, i + 1)] = 1.0;
            }
        }
        m
    }

    /// Eigenvalues of `Ā` as `(re, im)`.
    pub fn a_bar_eigenvalues(&self) -> Vec<(f64, f64)> {
        self.a_bar().complex_eigenvalues().iter().map(|z| (z.re, z.im)).collect()
    }
}

pub fn observer_exponents(n: usize, alpha: f64) -> Vec<f64> {
    (1..=n).map(|i| i as f64 * alpha - (i as f64 - 1.0)).collect()
}

/// Controller `u = −Σ k_i·sign(x̂_i)|x̂_i|^{β_i}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ControllerConfig {
    pub k: Vec<f64>,
    pub beta: f64,
    /// Below this magnitude each fractional power is replaced by its chord through 0.
    pub linear_zone: f64,
    exponents: Vec<f64>,
}

impl ControllerConfig {
    pub fn new(k: Vec<f64>, beta: f64, linear_zone: f64) -> Result<Self> {
        let n = k.len();
        if n == 0 {
            return Err(invalid("controller: empty gain vector"));
        }
        if !(beta > 0.0 && beta < 1.0) {
            return Err(invalid("controller: beta must lie in (0, 1)"));
        }
        if !(linear_zone >= 0.0) {
            return Err(invalid("controller: linear zone must be nonnegative"));
        }
        let exponents = controller_exponents(n, beta)?;
        let mut poly = alloc::vec![1.0];
        poly.extend(k.iter().rev());
        if !is_hurwitz_poly(&poly)? {
            return Err(config("controller: s^n + k_n s^(n-1) + ... + k_1 is not Hurwitz"));
        }
        Ok(Self { k, beta, linear_zone, exponents })
    }

    pub fn exponents(&self) -> &[f64] {
        &self.exponents
    }
}

/// `β_n = β`, `β_{j−1} = β_j·β_{j+1}/(2β_{j+1} − β_j)` with `β_{n+1} = 1`.
pub fn controller_exponents(n: usize, beta: f64) -> Result<Vec<f64>> {
    let mut b = alloc::vec![0.0; n + 2];
    b[n + 1] = 1.0;
    b[n] = beta;
    for j in (2..=n).rev() {
        let den = 2.0 * b[j + 1] - b[j];
        if !(den > 0.0) {
            return Err(invalid(alloc::format!("controller: exponent recursion breaks down at index {j}")));
        }
        b[j - 1] = b[j] * b[j + 1] / den;
    }
    let out: Vec<f64> = b[1..=n].to_vec();
    if out.iter().any(|&v| !(v > 0.0 && v <= 1.0)) {
        return Err(invalid("controller: exponents leave (0, 1]"));
    }
    Ok(out)
}

/// Observer injection vector; zero unless the active mode is `σ0`.
pub fn observer_step_term(cfg: &ObserverConfig, y_err: f64, active_is_sigma0: bool) -> Vec<f64> {
    if !active_is_sigma0 {
        return alloc::vec![0.0; cfg.n()];
    }
    cfg.l.iter().zip(&cfg.exponents).map(|(l, a)| l * signed_pow(y_err, *a)).collect()
}

/// Control input; zero unless the active mode is `σ0`.
pub fn control_input(cfg: &ControllerConfig, x_hat: &[f64], active_is_sigma0: bool) -> f64 {
    if !active_is_sigma0 {
        return 0.0;
    }
    -cfg.k
        .iter()
        .zip(&cfg.exponents)
        .zip(x_hat)
        .map(|((k, b), x)| k * signed_pow_linear_zone(*x, *b, cfg.linear_zone))
        .sum::<f64>()
}

fn mat_vec(a: &DMatrix<f64>, x: &[f64], out: &mut [f64]) {
    let n = a.nrows();
    for i in 0..n {
        out[i] = (0..n).map(|j| a[(i, j)] * x[j]).sum();
    }
}

fn dot_vec(c: &DVector<f64>, x: &[f64]) -> f64 {
    c.iter().zip(x).map(|(a, b)| a * b).sum()
}

fn check_stack(plant: &LinearSwitchedPlant, obs: &ObserverConfig) -> Result<()> {
    if obs.n() != plant.n {
        return Err(invalid("observer and plant dimensions differ"));
    }
    plant.check_canonical()?;
    ctrb_obsv_check(plant)?;
    Ok(())
}

/// Closed loop over the stacked state `(x, x̂)` of dimension `2n`:
/// `ẋ = A_σx + B_σu`, `x̂̇ = A_σx̂ + B_σu + g_σ(C_σx − C_σx̂)`.
///
/// `fts_mode` is the finite-time mode of the switching signal that will drive the loop;
/// it must be `σ0`.
pub fn assemble_closed_loop(
    plant: &LinearSwitchedPlant,
    obs: &ObserverConfig,
    ctrl: &ControllerConfig,
    fts_mode: usize,
) -> Result<HybridSystem> {
    check_stack(plant, obs)?;
    if ctrl.k.len() != plant.n {
        return Err(invalid("controller and plant dimensions differ"));
    }
    if fts_mode != plant.sigma0 {
        return Err(config(alloc::format!(
            "the FTS mode of the switching signal ({}) must be the controllable and observable mode ({})",
            fts_mode + 1,
            plant.sigma0 + 1
        )));
    }
    let n = plant.n;
    let flows = (0..plant.n_modes())
        .map(|i| {
            let a = plant.a[i].clone();
            let b = plant.b[i].clone();
            let c = plant.c[i].clone();
            let (obs, ctrl) = (obs.clone(), ctrl.clone());
            let active = i == plant.sigma0;
            field(move |z: &[f64], out: &mut [f64]| {
                let (x, xh) = z.split_at(n);
                let u = control_input(&ctrl, xh, active);
                let g = observer_step_term(&obs, dot_vec(&c, x) - dot_vec(&c, xh), active);
                let (ox, oh) = out.split_at_mut(n);
                mat_vec(&a, x, ox);
                mat_vec(&a, xh, oh);
                for r in 0..n {
                    ox[r] += b[r] * u;
                    oh[r] += b[r] * u + g[r];
                }
            })
        })
        .collect();
    HybridSystem::switched(2 * n, flows)
}

/// Estimation-error dynamics `ė = A_σe − g_σ(C_σe)`.
pub fn error_system(plant: &LinearSwitchedPlant, obs: &ObserverConfig) -> Result<HybridSystem> {
    check_stack(plant, obs)?;
    let n = plant.n;
    let flows = (0..plant.n_modes())
        .map(|i| {
            let a = plant.a[i].clone();
            let c = plant.c[i].clone();
            let obs = obs.clone();
            let active = i == plant.sigma0;
            field(move |e: &[f64], out: &mut [f64]| {
                mat_vec(&a, e, out);
                let g = observer_step_term(&obs, dot_vec(&c, e), active);
                for r in 0..n {
                    out[r] -= g[r];
                }
            })
        })
        .collect();
    HybridSystem::switched(n, flows)
}

/// Error field of the distinguished mode: `ė_i = e_{i+1} − l_i·sign(e_1)|e_1|^{α_i}`.
pub fn observer_error_field(obs: &ObserverConfig, e: &[f64]) -> Vec<f64> {
    let n = obs.n();
    let g = observer_step_term(obs, e[0], true);
    (0..n).map(|i| if i + 1 < n { e[i + 1] } else { 0.0 } - g[i]).collect()
}

/// Dilation weights `r_i = 1 + (i − 1)(α − 1)` of the error field; its degree is `α − 1`.
pub fn dilation_weights(obs: &ObserverConfig) -> Vec<f64> {
    (0..obs.n()).map(|i| 1.0 + i as f64 * (obs.alpha - 1.0)).collect()
}

/// Largest relative mismatch of `F_i(Λe) = λ^{d + r_i}·F_i(e)` at one point.
pub fn homogeneity_defect(obs: &ObserverConfig, e: &[f64], lambda: f64) -> f64 {
    let r = dilation_weights(obs);
    let d = obs.alpha - 1.0;
    let scaled: Vec<f64> = e.iter().zip(&r).map(|(v, w)| libm::pow(lambda, *w) * v).collect();
    let lhs = observer_error_field(obs, &scaled);
    let rhs = observer_error_field(obs, e);
    lhs.iter()
        .zip(&rhs)
        .zip(&r)
        .map(|((a, b), w)| {
            let want = libm::pow(lambda, d + w) * b;
            abs(a - want) / (1e-300 + abs(*a).max(abs(want)))
        })
        .fold(0.0, f64::max)
}
