//! State-dependent switching law built from multiple Lyapunov functions and offset
//! functions `μ_ij`, with a dwell-time gate on the FTS mode.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use nalgebra::DMatrix;

use crate::error::{invalid, Result};
use crate::lyapunov::LyapunovSet;
use crate::math::{abs, dot, norm};
use crate::policy::Projection;
use crate::system::HybridSystem;

type Scalar = dyn Fn(&[f64]) -> f64 + Send + Sync;
type Grad = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

/// One offset function `μ_ij`.
#[derive(Clone)]
pub enum MuFunction {
    Zero,
    /// `−‖x‖²`
    NegNormSquared,
    /// `xᵀQx` with `Q` symmetric.
    Quadratic(DMatrix<f64>),
    Custom { value: Arc<Scalar>, gradient: Option<Arc<Grad>> },
}

impl fmt::Debug for MuFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MuFunction::Zero => f.write_str("Zero"),
            MuFunction::NegNormSquared => f.write_str("NegNormSquared"),
            MuFunction::Quadratic(q) => f.debug_tuple("Quadratic").field(q).finish(),
            MuFunction::Custom { gradient, .. } => {
                f.debug_struct("Custom").field("has_gradient", &gradient.is_some()).finish()
            }
        }
    }
}

impl MuFunction {
    pub fn quadratic(n: usize, row_major: &[f64]) -> Result<Self> {
        if row_major.len() != n * n {
            return Err(invalid("mu: quadratic matrix has the wrong number of entries"));
        }
        let q = DMatrix::from_row_slice(n, n, row_major);
        Ok(MuFunction::Quadratic((&q + q.transpose()) * 0.5))
    }

    pub fn custom<V, G>(value: V, gradient: Option<G>) -> Self
    where
        V: Fn(&[f64]) -> f64 + Send + Sync + 'static,
        G: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        MuFunction::Custom {
            value: Arc::new(value),
            gradient: gradient.map(|g| Arc::new(g) as Arc<Grad>),
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            MuFunction::Zero => 0.0,
            MuFunction::NegNormSquared => -dot(x, x),
            MuFunction::Quadratic(q) => quad(q, x),
            MuFunction::Custom { value, .. } => value(x),
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        match self {
            MuFunction::Zero => Some(alloc::vec![0.0; x.len()]),
            MuFunction::NegNormSquared => Some(x.iter().map(|v| -2.0 * v).collect()),
            MuFunction::Quadratic(q) => {
                let n = q.nrows();
                Some((0..n).map(|i| 2.0 * (0..n).map(|j| q[(i, j)] * x[j]).sum::<f64>()).collect())
            }
            MuFunction::Custom { gradient, .. } => gradient.as_ref().map(|g| g(x)),
        }
    }

    fn is_zero(&self) -> bool {
        matches!(self, MuFunction::Zero)
    }
}

fn quad(q: &DMatrix<f64>, x: &[f64]) -> f64 {
    let n = q.nrows();
    (0..n).map(|i| x[i] * (0..n).map(|j| q[(i, j)] * x[j]).sum::<f64>()).sum()
}

/// `N×N` table of offsets, row-major.
#[derive(Debug, Clone)]
pub struct MuTable {
    n: usize,
    entries: Vec<MuFunction>,
}

impl MuTable {
    pub fn new(n: usize, entries: Vec<MuFunction>) -> Result<Self> {
        if n == 0 || entries.len() != n * n {
            return Err(invalid(alloc::format!("mu table: expected {} entries", n * n)));
        }
        Ok(Self { n, entries })
    }

    pub fn zeros(n: usize) -> Self {
        Self { n, entries: alloc::vec![MuFunction::Zero; n * n] }
    }

    /// `μ_ij = rows[i]` for every `j ≠ i`, `μ_ii = 0`.
    pub fn by_row(rows: Vec<MuFunction>) -> Result<Self> {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * n);
        for (i, r) in rows.iter().enumerate() {
            for j in 0..n {
                entries.push(if i == j { MuFunction::Zero } else { r.clone() });
            }
        }
        Self::new(n, entries)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &MuFunction {
        &self.entries[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, mu: MuFunction) {
        self.entries[i * self.n + j] = mu;
    }

    pub fn value(&self, i: usize, j: usize, x: &[f64]) -> f64 {
        self.get(i, j).value(x)
    }

    /// `max |μ_ij(x)|` over the samples and all pairs.
    pub fn max_abs_on(&self, samples: &[Vec<f64>]) -> f64 {
        samples
            .iter()
            .flat_map(|x| self.entries.iter().map(move |m| abs(m.value(x))))
            .fold(0.0, f64::max)
    }
}

/// Outcome of [`check_mu_table`].
#[derive(Debug, Clone, PartialEq)]
pub struct MuCheck {
    pub ok: bool,
    pub origin_ok: bool,
    pub diagonal_ok: bool,
    pub triangle_violations: usize,
    /// `(i, j, k, x, lhs, rhs)` of the first triangle violation.
    pub first_violation: Option<(usize, usize, usize, Vec<f64>, f64, f64)>,
}

/// Checks `μ_ij(0) = 0`, `μ_ii ≡ 0` and `μ_ij + μ_jk ≤ min{0, μ_ik}` at every sample.
pub fn check_mu_table(table: &MuTable, dim: usize, samples: &[Vec<f64>]) -> MuCheck {
    const TOL: f64 = 1e-9;
    let n = table.n;
    let zero = alloc::vec![0.0; dim];
    let origin_ok = table.entries.iter().all(|m| m.value(&zero) == 0.0);
    let mut diagonal_ok = (0..n).all(|i| table.get(i, i).is_zero());
    let mut violations = 0;
    let mut first = None;
    let mut vals = alloc::vec![0.0; n * n];
    for x in samples {
        for (v, m) in vals.iter_mut().zip(&table.entries) {
            *v = m.value(x);
        }
        for i in 0..n {
            if vals[i * n + i] != 0.0 {
                diagonal_ok = false;
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let lhs = vals[i * n + j] + vals[j * n + k];
                    let rhs = vals[i * n + k].min(0.0);
                    if lhs > rhs + TOL * (1.0 + abs(rhs)) {
                        violations += 1;
                        if first.is_none() {
                            first = Some((i, j, k, x.clone(), lhs, rhs));
                        }
                    }
                }
            }
        }
    }
    MuCheck {
        ok: origin_ok && diagonal_ok && violations == 0,
        origin_ok,
        diagonal_ok,
        triangle_violations: violations,
        first_violation: first,
    }
}

/// The switching law with dwell time `t_d` on the FTS mode `F`.
#[derive(Debug, Clone)]
pub struct SwitchLaw {
    mu: MuTable,
    lyapunov: LyapunovSet,
    fts_mode: usize,
    dwell: f64,
    surface_tol: f64,
    projection: Projection,
}

impl SwitchLaw {
    pub fn new(
        mu: MuTable,
        lyapunov: LyapunovSet,
        fts_mode: usize,
        dwell: f64,
        surface_tol: f64,
    ) -> Result<Self> {
        if mu.n() != lyapunov.len() {
            return Err(invalid("switch law: mu table and Lyapunov set sizes differ"));
        }
        if fts_mode >= mu.n() {
            return Err(invalid("switch law: FTS mode out of range"));
        }
        if !(dwell > 0.0) {
            return Err(invalid("switch law: dwell time must be positive"));
        }
        if !(surface_tol >= 0.0) {
            return Err(invalid("switch law: surface tolerance must be nonnegative"));
        }
        let dim = lyapunov[0].dim();
        if lyapunov.iter().any(|v| v.dim() != dim) {
            return Err(invalid("switch law: Lyapunov functions have different dimensions"));
        }
        Ok(Self { mu, lyapunov, fts_mode, dwell, surface_tol, projection: Projection::Identity })
    }

    /// The law evaluates `V_i` and `μ_ij` on `projection(x)`.
    pub fn with_projection(mut self, projection: Projection) -> Self {
        self.projection = projection;
        self
    }

    /// `10⁻⁶ + 10⁻²·dt·max_speed`.
    pub fn default_surface_tol(dt: f64, max_speed: f64) -> f64 {
        1e-6 + 1e-2 * dt * max_speed
    }

    pub fn n_modes(&self) -> usize {
        self.mu.n()
    }

    pub fn fts_mode(&self) -> usize {
        self.fts_mode
    }

    pub fn dwell(&self) -> f64 {
        self.dwell
    }

    pub fn surface_tol(&self) -> f64 {
        self.surface_tol
    }

    pub fn projection(&self) -> Projection {
        self.projection
    }

    pub fn mu(&self) -> &MuTable {
        &self.mu
    }

    pub fn lyapunov(&self) -> &LyapunovSet {
        &self.lyapunov
    }

    /// `V_i(z) − V_j(z) + μ_ij(z)` at `z = projection(x)`.
    pub fn surface_value(&self, i: usize, j: usize, x: &[f64]) -> f64 {
        let z = self.projection.apply(x);
        self.s_proj(i, j, &z)
    }

    fn s_proj(&self, i: usize, j: usize, z: &[f64]) -> f64 {
        self.lyapunov[i].value(z) - self.lyapunov[j].value(z) + self.mu.value(i, j, z)
    }

    pub fn in_omega_i(&self, i: usize, x: &[f64]) -> bool {
        let z = self.projection.apply(x);
        (0..self.n_modes()).all(|j| self.s_proj(i, j, &z) <= 0.0)
    }

    pub fn on_omega_ij(&self, i: usize, j: usize, x: &[f64]) -> bool {
        abs(self.surface_value(i, j, x)) <= self.surface_tol
    }

    /// Mode after the grid point at which the state is `x`.
    ///
    /// Mode `j` is a candidate when `V_i − V_j + μ_ij ≥ −surface_tol`, i.e. the state sits
    /// on the band around `Ω_ij` or has already stepped past it. Leaving `F` requires
    /// `elapsed ≥ t_d`. Among candidates `F` wins, then the lowest index.
    pub fn next_mode(&self, current: usize, x: &[f64], elapsed: f64) -> usize {
        if current == self.fts_mode && elapsed < self.dwell {
            return current;
        }
        let z = self.projection.apply(x);
        let hit = |j: usize| j != current && self.s_proj(current, j, &z) >= -self.surface_tol;
        if current != self.fts_mode && hit(self.fts_mode) {
            return self.fts_mode;
        }
        (0..self.n_modes()).find(|&j| hit(j)).unwrap_or(current)
    }

    /// `∇_x s_ij` at `x`, or `None` if some gradient is unavailable.
    pub fn surface_normal(&self, i: usize, j: usize, x: &[f64]) -> Option<Vec<f64>> {
        let z = self.projection.apply(x);
        let gi = self.lyapunov[i].gradient(&z)?;
        let gj = self.lyapunov[j].gradient(&z)?;
        let gm = self.mu.get(i, j).gradient(&z)?;
        let g: Vec<f64> = (0..z.len()).map(|k| gi[k] - gj[k] + gm[k]).collect();
        Some(self.projection.pullback(&g, x.len()))
    }

    fn lyapunov_gradient_x(&self, i: usize, x: &[f64]) -> Option<Vec<f64>> {
        let z = self.projection.apply(x);
        Some(self.projection.pullback(&self.lyapunov[i].gradient(&z)?, x.len()))
    }

    fn mu_gradient_x(&self, i: usize, j: usize, x: &[f64]) -> Option<Vec<f64>> {
        let z = self.projection.apply(x);
        Some(self.projection.pullback(&self.mu.get(i, j).gradient(&z)?, x.len()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurfaceCrossing {
    Transversal,
    Sliding,
    Tangent,
}

/// Classifies the flows of modes `i` and `j` at a point of `Ω_ij`.
pub fn sliding_check(
    law: &SwitchLaw,
    sys: &HybridSystem,
    i: usize,
    j: usize,
    x: &[f64],
) -> Result<SurfaceCrossing> {
    if i == j || i >= law.n_modes() || j >= law.n_modes() {
        return Err(invalid("sliding_check: need two distinct valid modes"));
    }
    if !law.on_omega_ij(i, j, x) {
        return Err(invalid("sliding_check: state is not on the switching surface"));
    }
    classify_crossing(law, sys, i, j, x)
}

/// [`sliding_check`] without the on-surface precondition.
pub(crate) fn classify_crossing(
    law: &SwitchLaw,
    sys: &HybridSystem,
    i: usize,
    j: usize,
    x: &[f64],
) -> Result<SurfaceCrossing> {
    let n = law
        .surface_normal(i, j, x)
        .ok_or_else(|| invalid("sliding_check: gradient of V or mu is unavailable"))?;
    let fi = sys.flow_vec(i, x);
    let fj = sys.flow_vec(j, x);
    let (di, dj) = (dot(&n, &fi), dot(&n, &fj));
    let nn = norm(&n);
    let tol = |f: &[f64]| 1e-9 * nn * norm(f) + 1e-15;
    Ok(if abs(di) <= tol(&fi) || abs(dj) <= tol(&fj) {
        SurfaceCrossing::Tangent
    } else if di > 0.0 && dj < 0.0 {
        SurfaceCrossing::Sliding
    } else {
        SurfaceCrossing::Transversal
    })
}

/// Per-pair multipliers `β_ij(x)`; missing entries are zero.
#[derive(Clone)]
pub struct BetaTable {
    n: usize,
    entries: Vec<Option<Arc<Scalar>>>,
}

impl fmt::Debug for BetaTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BetaTable").field("n", &self.n).finish()
    }
}

impl BetaTable {
    pub fn zeros(n: usize) -> Self {
        Self { n, entries: alloc::vec![None; n * n] }
    }

    /// Constant multipliers from a row-major `n×n` array.
    pub fn constant(n: usize, row_major: &[f64]) -> Result<Self> {
        if row_major.len() != n * n {
            return Err(invalid("beta table: wrong number of entries"));
        }
        let mut t = Self::zeros(n);
        for (k, &b) in row_major.iter().enumerate() {
            if b != 0.0 {
                t.entries[k] = Some(Arc::new(move |_: &[f64]| b));
            }
        }
        Ok(t)
    }

    pub fn set<F>(&mut self, i: usize, j: usize, f: F)
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        self.entries[i * self.n + j] = Some(Arc::new(f));
    }

    pub fn value(&self, i: usize, j: usize, x: &[f64]) -> f64 {
        self.entries[i * self.n + j].as_ref().map_or(0.0, |f| f(x))
    }
}

/// First failing sample of one condition.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub i: usize,
    pub j: Option<usize>,
    pub x: Vec<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionCheck {
    pub ok: bool,
    pub violations: usize,
    pub first: Option<Violation>,
}

impl ConditionCheck {
    fn new() -> Self {
        Self { ok: true, violations: 0, first: None }
    }

    fn record(&mut self, v: Violation) {
        self.ok = false;
        self.violations += 1;
        if self.first.is_none() {
            self.first = Some(v);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LawConditionsReport {
    /// `β_ij(x) ≤ 0`.
    pub beta_sign: ConditionCheck,
    /// `∇V_i·f_i + Σ_j β_ij·(V_i − V_j + μ_ij) ≤ 0`.
    pub decrease: ConditionCheck,
    /// `∇μ_ij·f_i ≤ 0`.
    pub mu_flow: ConditionCheck,
    pub mu_table: MuCheck,
    pub pass: bool,
}

/// Sample-wise check of the switching-law side conditions.
pub fn check_law_conditions(
    law: &SwitchLaw,
    sys: &HybridSystem,
    beta: &BetaTable,
    samples: &[Vec<f64>],
) -> Result<LawConditionsReport> {
    let n = law.n_modes();
    if samples.is_empty() {
        return Err(invalid("check_law_conditions: no samples"));
    }
    if sys.n_flows() != n || beta.n != n {
        return Err(invalid("check_law_conditions: mode counts of system, law and beta table differ"));
    }
    let mut beta_sign = ConditionCheck::new();
    let mut decrease = ConditionCheck::new();
    let mut mu_flow = ConditionCheck::new();
    for x in samples {
        if x.len() != sys.dim() {
            return Err(invalid("check_law_conditions: sample dimension mismatch"));
        }
        for i in 0..n {
            let fi = sys.flow_vec(i, x);
            let gv = law
                .lyapunov_gradient_x(i, x)
                .ok_or_else(|| invalid("check_law_conditions: missing Lyapunov gradient"))?;
            let mut lhs = dot(&gv, &fi);
            let mut scale = abs(lhs);
            for j in 0..n {
                let b = beta.value(i, j, x);
                if b > 0.0 {
                    beta_sign.record(Violation { i, j: Some(j), x: x.clone(), value: b });
                }
                let term = b * law.surface_value(i, j, x);
                lhs += term;
                scale += abs(term);
                if i != j {
                    let gm = law
                        .mu_gradient_x(i, j, x)
                        .ok_or_else(|| invalid("check_law_conditions: missing mu gradient"))?;
                    let d = dot(&gm, &fi);
                    if d > 1e-9 * (1.0 + norm(&gm) * norm(&fi)) {
                        mu_flow.record(Violation { i, j: Some(j), x: x.clone(), value: d });
                    }
                }
            }
            if lhs > 1e-9 * (1.0 + scale) {
                decrease.record(Violation { i, j: None, x: x.clone(), value: lhs });
            }
        }
    }
    let z: Vec<Vec<f64>> = samples.iter().map(|x| law.projection.apply(x)).collect();
    let mu_table = check_mu_table(&law.mu, law.lyapunov[0].dim(), &z);
    let pass = beta_sign.ok && decrease.ok && mu_flow.ok && mu_table.ok;
    Ok(LawConditionsReport { beta_sign, decrease, mu_flow, mu_table, pass })
}
