//! Trajectory-level checks of the multiple-Lyapunov-function finite-time certificate.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::gk::{check_gk, GkFunction};
use crate::inequality::INEQUALITY_TOL;
use crate::lyapunov::{LyapunovFunction, LyapunovSet, PD_RADII};
use crate::math::{self, ln, norm, pow, sqrt};
use crate::policy::{largest_jump_free_piece, Projection};
use crate::simulator::{check_dwell, DwellCheck, HybridTrajectory};

/// Terms of one accumulated condition and the maximum over all prefix sums.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionSum {
    pub terms: Vec<f64>,
    pub total: f64,
    /// `max_p Σ_{k<p} terms[k]`, the empty prefix included.
    pub prefix_max: f64,
}

impl ConditionSum {
    pub fn from_terms(terms: Vec<f64>) -> Self {
        let mut acc = 0.0;
        let mut best = 0.0f64;
        for &t in &terms {
            acc += t;
            best = best.max(acc);
        }
        Self { terms, total: acc, prefix_max: best }
    }
}

fn check_set(traj: &HybridTrajectory, set: &LyapunovSet, projection: Projection) -> Result<()> {
    if traj.is_empty() {
        return Err(invalid("empty trajectory"));
    }
    projection.validate(traj.dim())?;
    let d = projection.output_dim(traj.dim());
    for iv in traj.mode_intervals() {
        match set.get(iv.mode) {
            None => {
                return Err(invalid(alloc::format!("no Lyapunov function for active mode {}", iv.mode + 1)))
            }
            Some(v) if v.dim() != d => {
                return Err(invalid(alloc::format!(
                    "Lyapunov function {} expects dimension {}, state projects to {d}",
                    iv.mode + 1,
                    v.dim()
                )))
            }
            _ => {}
        }
    }
    Ok(())
}

struct Eval<'a> {
    set: &'a LyapunovSet,
    projection: Projection,
    buf: Vec<f64>,
}

impl Eval<'_> {
    fn v(&mut self, i: usize, x: &[f64]) -> f64 {
        self.projection.apply_into(x, &mut self.buf);
        self.set[i].value(&self.buf)
    }
}

fn evaluator(set: &LyapunovSet, projection: Projection) -> Eval<'_> {
    Eval { set, projection, buf: Vec::new() }
}

/// Sample index holding `x(t_{k+1})` (pre-jump) at the end of interval `k`.
fn end_sample(traj: &HybridTrajectory, k: usize) -> usize {
    let ivs = traj.mode_intervals();
    if k + 1 < ivs.len() {
        ivs[k + 1].start_sample
    } else {
        traj.len() - 1
    }
}

/// `Σ_k [V_{i^{k+1}}(x(t_{k+1})) − V_{i^k}(x(t_{k+1}))]` over flow switches.
pub fn condition_i_sum(
    traj: &HybridTrajectory,
    set: &LyapunovSet,
    projection: Projection,
) -> Result<ConditionSum> {
    check_set(traj, set, projection)?;
    let mut ev = evaluator(set, projection);
    let ivs = traj.mode_intervals();
    let terms = ivs
        .windows(2)
        .map(|w| {
            let x = traj.x(w[1].start_sample);
            ev.v(w[1].mode, x) - ev.v(w[0].mode, x)
        })
        .collect();
    Ok(ConditionSum::from_terms(terms))
}

/// `Σ_k [V_{i^k}(x(t_{k+1})) − V_{i^k}(x(t_k))]` with the jump increments inside each
/// interval removed, so flow growth and jump growth are counted once each.
pub fn condition_ii_sum(
    traj: &HybridTrajectory,
    set: &LyapunovSet,
    projection: Projection,
) -> Result<ConditionSum> {
    check_set(traj, set, projection)?;
    let mut ev = evaluator(set, projection);
    let ivs = traj.mode_intervals();
    let events = traj.jump_events();
    let terms = ivs
        .iter()
        .enumerate()
        .map(|(k, iv)| {
            let (s, e) = (iv.start_sample, end_sample(traj, k));
            let mut term = ev.v(iv.mode, traj.x(e)) - ev.v(iv.mode, traj.x(s));
            for je in events.iter().filter(|je| je.sample > s && je.sample <= e) {
                term -= ev.v(iv.mode, &je.x_after) - ev.v(iv.mode, &je.x_before);
            }
            term
        })
        .collect();
    Ok(ConditionSum::from_terms(terms))
}

/// `Σ_{t ∈ J_i} [V_i(x⁺(t)) − V_i(x(t))]` over jumps taken while mode `i` is active.
pub fn condition_iii_sum(
    traj: &HybridTrajectory,
    set: &LyapunovSet,
    mode: usize,
    projection: Projection,
) -> Result<ConditionSum> {
    check_set(traj, set, projection)?;
    if mode >= set.len() {
        return Err(invalid("condition_iii_sum: mode out of range"));
    }
    let mut ev = evaluator(set, projection);
    let terms = traj
        .jump_events()
        .iter()
        .filter(|je| je.mode == mode)
        .map(|je| ev.v(mode, &je.x_after) - ev.v(mode, &je.x_before))
        .collect();
    Ok(ConditionSum::from_terms(terms))
}

/// `(V, dV/dt)` pairs on the jump-free pieces of `mode`.
pub fn decay_samples(
    traj: &HybridTrajectory,
    mode: usize,
    v: &LyapunovFunction,
    projection: Projection,
) -> Vec<(f64, f64)> {
    let dt = traj.dt();
    let eps = 1e-9 * dt;
    let mut buf = Vec::new();
    let mut out = Vec::new();
    for (k, iv) in traj.mode_intervals().iter().enumerate() {
        if iv.mode != mode {
            continue;
        }
        let last = end_sample(traj, k);
        let (a, b) = iv.jump_free;
        // Runs of consecutive samples inside [a, b] sharing one jump counter.
        let mut run: Vec<(f64, f64)> = Vec::new();
        let mut run_j = usize::MAX;
        // Only interior samples: one-sided differences carry an O(dt) Euler bias of the
        // wrong sign for the decay inequality.
        let flush = |run: &mut Vec<(f64, f64)>, out: &mut Vec<(f64, f64)>| {
            for q in 1..run.len().saturating_sub(1) {
                let d = (run[q + 1].1 - run[q - 1].1) / (run[q + 1].0 - run[q - 1].0);
                out.push((run[q].1, d));
            }
            run.clear();
        };
        for s in iv.start_sample..=last {
            let smp = traj.sample(s);
            if smp.t < a - eps || smp.t > b + eps {
                continue;
            }
            if smp.j != run_j {
                flush(&mut run, &mut out);
                run_j = smp.j;
            }
            projection.apply_into(smp.x, &mut buf);
            run.push((smp.t, v.value(&buf)));
        }
        flush(&mut run, &mut out);
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    pub c_hat: f64,
    pub beta_hat: f64,
    /// Worst `c·V^β − slack − (−dV/dt)` over the fitted samples; `≤ 0` means the
    /// inequality holds everywhere for the fitted constants.
    pub residual: f64,
    pub samples_used: usize,
    /// `β̂ < 1` with margin; false flags exponential rather than finite-time decay.
    pub finite_time: bool,
}

/// Slack used for the sampled decay inequality.
pub fn decay_slack(v: f64) -> f64 {
    1e-6 + 1e-3 * v
}

/// Least-squares fit of `log(−dV/dt) = log c + β·log V` on the jump-free pieces of `mode`.
pub fn fit_decay(
    traj: &HybridTrajectory,
    mode: usize,
    v: &LyapunovFunction,
    projection: Projection,
) -> Result<DecayFit> {
    let pairs = decay_samples(traj, mode, v, projection);
    if pairs.len() < 10 {
        return Err(invalid(alloc::format!(
            "fit_decay: mode {} has too few jump-free samples ({})",
            mode + 1,
            pairs.len()
        )));
    }
    let v_max = pairs.iter().map(|p| p.0).fold(0.0, f64::max);
    let kept: Vec<(f64, f64)> =
        pairs.into_iter().filter(|&(vv, d)| vv > 1e-9 * v_max && d < 0.0).collect();
    let not_fts = |reason: &str| Error::NotFiniteTime { mode: mode + 1, reason: String::from(reason) };
    if kept.len() < 2 {
        return Err(not_fts("the Lyapunov function does not decrease on its jump-free pieces"));
    }
    let xs: Vec<f64> = kept.iter().map(|p| ln(p.0)).collect();
    let ys: Vec<f64> = kept.iter().map(|p| ln(-p.1)).collect();
    let (a, b) = math::linear_fit(&xs, &ys).ok_or_else(|| not_fts("decay samples are degenerate"))?;
    let c_hat = libm::exp(a);
    let residual = kept
        .iter()
        .map(|&(vv, d)| c_hat * pow(vv, b) - decay_slack(vv) + d)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(DecayFit {
        c_hat,
        beta_hat: b,
        residual,
        samples_used: kept.len(),
        finite_time: b < 1.0 - 1e-3,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayCheck {
    pub holds: bool,
    pub worst_residual: f64,
    pub violations: usize,
    pub checked: usize,
}

/// Sample-wise `−dV/dt ≥ c·V^β − 10⁻⁶ − 10⁻³·V` on the jump-free pieces of `mode`.
pub fn check_decay(
    traj: &HybridTrajectory,
    mode: usize,
    v: &LyapunovFunction,
    projection: Projection,
    c: f64,
    beta: f64,
) -> DecayCheck {
    let pairs = decay_samples(traj, mode, v, projection);
    let mut worst = f64::NEG_INFINITY;
    let mut violations = 0;
    for &(vv, d) in &pairs {
        let r = c * pow(vv.max(0.0), beta) - decay_slack(vv) + d;
        worst = worst.max(r);
        if r > 0.0 {
            violations += 1;
        }
    }
    DecayCheck { holds: violations == 0, worst_residual: worst, violations, checked: pairs.len() }
}

fn check_rate(c: f64, beta: f64) -> Result<()> {
    if !(c > 0.0) {
        return Err(invalid("decay rate c must be positive"));
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(invalid("decay exponent beta must lie in (0, 1)"));
    }
    Ok(())
}

/// `V0^{1−β}/(c(1−β))`: time for `V̇ = −cV^β` to reach zero from `V0`.
pub fn settling_time_scalar(v0: f64, c: f64, beta: f64) -> f64 {
    pow(v0.max(0.0), 1.0 - beta) / (c * (1.0 - beta))
}

/// Sum `α = α₀ + α₁ + α₂ + N_f·α₃` and `ᾱ = α₁ + α₂ + N_f·α₃` at `r`.
fn alpha_sums(r: f64, alpha: &[GkFunction; 4], n_f: usize, with_jumps: bool) -> (f64, f64) {
    let a3 = if with_jumps { n_f as f64 * alpha[3].eval(r) } else { 0.0 };
    let bar = alpha[1].eval(r) + alpha[2].eval(r) + a3;
    (alpha[0].eval(r) + bar, bar)
}

/// Required cumulative jump-free activation of the FTS mode.
pub fn gamma_budget(x0_norm: f64, alpha: &[GkFunction; 4], n_f: usize, c: f64, beta: f64) -> Result<f64> {
    check_rate(c, beta)?;
    let (a, bar) = alpha_sums(x0_norm, alpha, n_f, true);
    Ok(settling_time_scalar(a, c, beta) + settling_time_scalar(bar, c, beta))
}

/// The jump-free variant: `α = α₀ + α₁ + α₂`, `ᾱ = α₁ + α₂`.
pub fn gamma_budget_jump_free(x0_norm: f64, alpha: &[GkFunction; 4], c: f64, beta: f64) -> Result<f64> {
    check_rate(c, beta)?;
    let (a, bar) = alpha_sums(x0_norm, alpha, 0, false);
    Ok(settling_time_scalar(a, c, beta) + settling_time_scalar(bar, c, beta))
}

/// `M·α(‖x₀‖)^{1−β}/(c(1−β))`, the bound summed over `M` activations when each starts
/// below `α(‖x₀‖)`, with `α` the class-GK bound from uniform stability.
pub fn repeated_activation_budget(x0_norm: f64, alpha: &GkFunction, m: usize, c: f64, beta: f64) -> Result<f64> {
    check_rate(c, beta)?;
    if m == 0 {
        return Err(invalid("repeated_activation_budget: need at least one activation"));
    }
    Ok(m as f64 * settling_time_scalar(alpha.eval(x0_norm), c, beta))
}

/// Radius of the smallest ball containing every sublevel set `{V_i ≤ level}`.
pub fn enclosing_radius(set: &LyapunovSet, level: f64) -> Result<f64> {
    if set.is_empty() || !(level >= 0.0) {
        return Err(invalid("enclosing_radius: need a nonempty set and a nonnegative level"));
    }
    let mut r = 0.0f64;
    for (i, v) in set.iter().enumerate() {
        if !v.is_positive_definite(&PD_RADII, 64) {
            return Err(invalid(alloc::format!("enclosing_radius: V{} is not positive definite", i + 1)));
        }
        let ri = match v.lambda_min() {
            Some(lm) => sqrt(level / lm),
            None => math::sphere_directions(v.dim(), 256)
                .iter()
                .map(|u| radial_crossing(v, u, level))
                .fold(0.0, f64::max),
        };
        r = r.max(ri);
    }
    Ok(r)
}

/// Largest level whose sublevel sets all lie inside the ball of radius `eps`.
pub fn level_for_radius(set: &LyapunovSet, eps: f64) -> Result<f64> {
    if set.is_empty() || !(eps >= 0.0) {
        return Err(invalid("level_for_radius: need a nonempty set and a nonnegative radius"));
    }
    let mut c = f64::INFINITY;
    for (i, v) in set.iter().enumerate() {
        if !v.is_positive_definite(&PD_RADII, 64) {
            return Err(invalid(alloc::format!("level_for_radius: V{} is not positive definite", i + 1)));
        }
        let ci = match v.lambda_min() {
            Some(lm) => lm * eps * eps,
            None => math::sphere_directions(v.dim(), 256)
                .iter()
                .map(|u| v.value(&u.iter().map(|w| w * eps).collect::<Vec<_>>()))
                .fold(f64::INFINITY, f64::min),
        };
        c = c.min(ci);
    }
    Ok(c)
}

/// Smallest `r ≥ 0` with `V(r·u) ≥ level`, by bracketing and bisection.
fn radial_crossing(v: &LyapunovFunction, u: &[f64], level: f64) -> f64 {
    let at = |r: f64| v.value(&u.iter().map(|w| w * r).collect::<Vec<_>>());
    if level <= 0.0 {
        return 0.0;
    }
    let mut hi = 1.0;
    while at(hi) < level && hi < 1e150 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if at(mid) < level {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * hi {
            break;
        }
    }
    hi
}

/// Fits `a·r^b` through `(r, value)` pairs in log space and raises `a` until the curve
/// lies on or above every point. Nonpositive values are ignored.
pub fn fit_power_envelope(rs: &[f64], values: &[f64]) -> Option<(f64, f64)> {
    let pts: Vec<(f64, f64)> =
        rs.iter().zip(values).filter(|(r, v)| **r > 0.0 && **v > 0.0).map(|(r, v)| (*r, *v)).collect();
    let b = match pts.len() {
        0 => return None,
        1 => 2.0,
        _ => {
            let xs: Vec<f64> = pts.iter().map(|p| ln(p.0)).collect();
            let ys: Vec<f64> = pts.iter().map(|p| ln(p.1)).collect();
            math::linear_fit(&xs, &ys).map_or(2.0, |f| f.1)
        }
    };
    let a = pts.iter().map(|&(r, v)| v / pow(r, b)).fold(0.0, f64::max);
    Some((a, b))
}

/// Everything the certificate needs besides the trajectory.
#[derive(Debug, Clone)]
pub struct CertificateInputs {
    pub lyapunov: LyapunovSet,
    pub fts_mode: usize,
    pub c: f64,
    pub beta: f64,
    /// `α₀` (sup-bound on `V_i`), then the bounds of conditions (i), (ii), (iii).
    pub alpha: [GkFunction; 4],
    pub dwell_time: f64,
    /// Part of the simulated state the Lyapunov functions act on.
    pub projection: Projection,
}

/// Grid used to check the declared `α` functions.
pub fn default_gk_grid() -> Vec<f64> {
    let mut g = alloc::vec![0.0];
    g.extend((0..=80).map(|k| pow(10.0, -4.0 + k as f64 * 0.1)));
    g
}

impl CertificateInputs {
    pub fn validate(&self) -> Result<()> {
        check_rate(self.c, self.beta)?;
        if self.fts_mode >= self.lyapunov.len() {
            return Err(invalid("certificate: FTS mode out of range"));
        }
        if !(self.dwell_time > 0.0) {
            return Err(invalid("certificate: dwell time must be positive"));
        }
        let grid = default_gk_grid();
        for (l, a) in self.alpha.iter().enumerate() {
            // α₁..α₃ may be identically zero when the corresponding sum never grows.
            if l > 0 && a.vanishes_on(&grid) {
                continue;
            }
            let chk = check_gk(a, &grid)?;
            if !chk.ok {
                return Err(invalid(alloc::format!("certificate: alpha{l} is not class GK: {:?}", chk.violation)));
            }
        }
        Ok(())
    }
}

/// One line of the report: `{bound, achieved, pass}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionVerdict {
    pub bound: f64,
    pub achieved: f64,
    pub pass: bool,
}

fn at_most(achieved: f64, bound: f64) -> ConditionVerdict {
    ConditionVerdict { bound, achieved, pass: achieved <= bound + INEQUALITY_TOL * (1.0 + bound.abs()) }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertificatePath {
    /// Hybrid system with jumps.
    Hybrid,
    /// Jump-free trajectory: the switched-system bound `ᾱ = α₁ + α₂`.
    JumpFree,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertificateReport {
    pub path: CertificatePath,
    pub x0_norm: f64,
    pub cond_i: ConditionVerdict,
    pub cond_ii: ConditionVerdict,
    /// Worst mode of condition (iii); per-mode details in `cond_iii_modes`.
    pub cond_iii: ConditionVerdict,
    pub cond_iii_modes: Vec<ConditionVerdict>,
    /// Sampled decay inequality for the declared `(c, β)`.
    pub cond_iv: ConditionVerdict,
    pub decay_fit: Option<DecayFit>,
    pub decay_check: DecayCheck,
    /// `{bound: γ, achieved: realized + scheduled jump-free F time}`.
    pub cond_v: ConditionVerdict,
    pub gamma: f64,
    pub achieved_realized: f64,
    pub achieved_total: f64,
    pub activation_count: usize,
    pub dwell: DwellCheck,
    /// `V_{i^p}(x(t_p)) ≤ α(‖x₀‖)` at every switch instant.
    pub ls_chain_ok: bool,
    pub ls_chain_max: f64,
    pub alpha_total: f64,
    pub certified: bool,
}

/// Checks conditions (i)-(v) and the dwell assumption along `traj`.
pub fn certify(traj: &HybridTrajectory, inputs: &CertificateInputs) -> Result<CertificateReport> {
    inputs.validate()?;
    let set = &inputs.lyapunov;
    let proj = inputs.projection;
    check_set(traj, set, proj)?;
    if set.len() != traj.n_flows() {
        return Err(invalid("certify: need one Lyapunov function per flow mode"));
    }
    let f = inputs.fts_mode;
    let r0 = norm(&proj.apply(traj.initial_state()));
    let a = &inputs.alpha;
    let path = if traj.jump_events().is_empty() { CertificatePath::JumpFree } else { CertificatePath::Hybrid };
    let n_f = traj.n_flows();

    let s1 = condition_i_sum(traj, set, proj)?;
    let s2 = condition_ii_sum(traj, set, proj)?;
    let cond_i = at_most(s1.prefix_max, a[1].eval(r0));
    let cond_ii = at_most(s2.prefix_max, a[2].eval(r0));
    let mut cond_iii_modes = Vec::with_capacity(n_f);
    for i in 0..n_f {
        let s3 = condition_iii_sum(traj, set, i, proj)?;
        cond_iii_modes.push(at_most(s3.prefix_max, a[3].eval(r0)));
    }
    let cond_iii = cond_iii_modes
        .iter()
        .cloned()
        .reduce(|w, c| if c.achieved - c.bound > w.achieved - w.bound { c } else { w })
        .unwrap();
    let cond_iii = ConditionVerdict { pass: cond_iii_modes.iter().all(|c| c.pass), ..cond_iii };

    let decay_fit = match fit_decay(traj, f, &set[f], proj) {
        Ok(fit) => Some(fit),
        Err(Error::InvalidInput(_)) => None,
        Err(e) => return Err(e),
    };
    let decay_check = check_decay(traj, f, &set[f], proj, inputs.c, inputs.beta);
    let cond_iv = ConditionVerdict {
        bound: 0.0,
        achieved: decay_check.worst_residual,
        pass: decay_check.holds && decay_check.checked > 0,
    };

    let (gamma, (alpha_total, _)) = match path {
        CertificatePath::Hybrid => {
            (gamma_budget(r0, a, n_f, inputs.c, inputs.beta)?, alpha_sums(r0, a, n_f, true))
        }
        CertificatePath::JumpFree => {
            (gamma_budget_jump_free(r0, a, inputs.c, inputs.beta)?, alpha_sums(r0, a, n_f, false))
        }
    };
    let (achieved_realized, achieved_total) = achieved_fts_time(traj, f);
    let cond_v = ConditionVerdict {
        bound: gamma,
        achieved: achieved_total,
        pass: achieved_total >= gamma - INEQUALITY_TOL,
    };
    let activation_count = traj.mode_intervals().iter().filter(|iv| iv.mode == f).count();
    let dwell = check_dwell(traj, f, inputs.dwell_time);

    let mut ev = evaluator(set, proj);
    let ls_chain_max = traj
        .mode_intervals()
        .iter()
        .map(|iv| ev.v(iv.mode, traj.x(iv.start_sample)))
        .fold(0.0, f64::max);
    let ls_chain_ok = ls_chain_max <= alpha_total + INEQUALITY_TOL * (1.0 + alpha_total);

    let certified = cond_i.pass && cond_ii.pass && cond_iii.pass && cond_iv.pass && cond_v.pass && dwell.ok;
    Ok(CertificateReport {
        path,
        x0_norm: r0,
        cond_i,
        cond_ii,
        cond_iii,
        cond_iii_modes,
        cond_iv,
        decay_fit,
        decay_check,
        cond_v,
        gamma,
        achieved_realized,
        achieved_total,
        activation_count,
        dwell,
        ls_chain_ok,
        ls_chain_max,
        alpha_total,
        certified,
    })
}

/// `(realized, realized + scheduled)` cumulative jump-free activation of `mode`.
///
/// When the run stopped early the activation in progress continues into the scheduled
/// tail; it is measured as one piece.
pub fn achieved_fts_time(traj: &HybridTrajectory, mode: usize) -> (f64, f64) {
    let ivs = traj.mode_intervals();
    let realized: f64 = ivs.iter().filter(|iv| iv.mode == mode).map(|iv| iv.jump_free_len()).sum();
    let Some(tail) = traj.tail() else {
        return (realized, realized);
    };
    let mut total = realized;
    let intervals: Vec<(f64, f64, usize)> = tail.intervals().collect();
    let mut skip_first = false;
    if let (Some(last), Some(&(_, end, m))) = (ivs.last(), intervals.first()) {
        if last.mode == mode && m == mode {
            let times = traj.jump_events().iter().map(|e| e.t).chain(tail.jumps().iter().map(|j| j.0));
            let merged = largest_jump_free_piece(last.start, end, times).1;
            total += merged - last.jump_free_len();
            skip_first = true;
        }
    }
    for (s, e, m) in intervals.into_iter().skip(usize::from(skip_first)) {
        if m == mode {
            total += largest_jump_free_piece(s, e, tail.jumps().iter().map(|j| j.0)).1;
        }
    }
    (realized, total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prefix_max_includes_empty_prefix() {
        assert_eq!(ConditionSum::from_terms(alloc::vec![-1.0]).prefix_max, 0.0);
        let s = ConditionSum::from_terms(alloc::vec![1.0, 2.0, -5.0]);
        assert_eq!((s.prefix_max, s.total), (3.0, -2.0));
        assert_eq!(ConditionSum::from_terms(Vec::new()).prefix_max, 0.0);
    }

    fn alphas(a0: GkFunction, a1: GkFunction) -> [GkFunction; 4] {
        [a0, a1, GkFunction::zero(), GkFunction::zero()]
    }

    #[test]
    fn gamma_examples() {
        let sq = GkFunction::power_law(1.0, 2.0);
        let z = GkFunction::zero();
        assert_eq!(gamma_budget(0.0, &alphas(sq.clone(), z.clone()), 5, 1.0, 0.5).unwrap(), 0.0);
        assert!((gamma_budget(2.0, &alphas(sq.clone(), z.clone()), 5, 1.0, 0.5).unwrap() - 4.0).abs() < 1e-12);
        assert!((gamma_budget(2.0, &alphas(z.clone(), sq.clone()), 1, 1.0, 0.5).unwrap() - 8.0).abs() < 1e-12);
        assert!(gamma_budget(2.0, &alphas(sq.clone(), z.clone()), 1, 1.0, 1.0).is_err());
        assert!(gamma_budget(2.0, &alphas(sq.clone(), z), 1, 0.0, 0.5).is_err());
    }

    #[test]
    fn repeated_activation_examples() {
        let sq = GkFunction::power_law(1.0, 2.0);
        assert!((repeated_activation_budget(2.0, &sq, 3, 1.0, 0.5).unwrap() - 12.0).abs() < 1e-12);
        assert_eq!(repeated_activation_budget(2.0, &sq, 1, 1.0, 0.5).unwrap(), settling_time_scalar(4.0, 1.0, 0.5));
        assert_eq!(repeated_activation_budget(0.0, &sq, 3, 1.0, 0.5).unwrap(), 0.0);
        assert!(repeated_activation_budget(2.0, &sq, 0, 1.0, 0.5).is_err());
    }

    #[test]
    fn settling_examples() {
        assert_eq!(settling_time_scalar(0.0, 1.0, 0.5), 0.0);
        assert_eq!(settling_time_scalar(1.0, 1.0, 0.5), 2.0);
        assert_eq!(settling_time_scalar(4.0, 2.0, 0.5), 2.0);
    }

    #[test]
    fn radius_examples() {
        let id = LyapunovFunction::quadratic(2, &[1.0, 0.0, 0.0, 1.0]).unwrap();
        let d13 = LyapunovFunction::quadratic(2, &[1.0, 0.0, 0.0, 3.0]).unwrap();
        assert_eq!(enclosing_radius(&alloc::vec![id.clone()], 1.0).unwrap(), 1.0);
        assert!((enclosing_radius(&alloc::vec![d13.clone()], 3.0).unwrap() - 3f64.sqrt()).abs() < 1e-15);
        let both = alloc::vec![id, d13];
        assert!((enclosing_radius(&both, 3.0).unwrap() - 3f64.sqrt()).abs() < 1e-15);
        assert!((level_for_radius(&both, 3f64.sqrt()).unwrap() - 3.0).abs() < 1e-12);

        let custom = LyapunovFunction::custom(2, |x| x[0] * x[0] + 3.0 * x[1] * x[1]);
        let r = enclosing_radius(&alloc::vec![custom.clone()], 3.0).unwrap();
        assert!((r - 3f64.sqrt()).abs() < 1e-9);
        let bad = LyapunovFunction::custom(2, |x| x[0] * x[0]);
        assert!(enclosing_radius(&alloc::vec![bad], 1.0).is_err());
    }

    #[test]
    fn envelope_lies_above_points() {
        let rs = [1.0, 2.0, 5.0, 10.0];
        let vs = [1.1, 3.9, 26.0, 99.0];
        let (a, b) = fit_power_envelope(&rs, &vs).unwrap();
        assert!((b - 2.0).abs() < 0.1);
        for (r, v) in rs.iter().zip(vs) {
            assert!(a * r.powf(b) >= v * (1.0 - 1e-12));
        }
        assert!(fit_power_envelope(&[1.0], &[0.0]).is_none());
    }
}
