//! TOML scenario files and their translation into core objects.
//!
//! Mode, jump and row indices are 1-based in files and 0-based everywhere in the core.

use std::path::Path;

use fts_core::builtin::{self, PlanarExample};
use fts_core::linplant::{
    assemble_closed_loop, ControllerConfig, LinearSwitchedPlant, ObserverConfig,
};
use fts_core::policy::{Phase, PhasedSchedule};
use fts_core::{
    CertificateInputs, GkFunction, HybridSystem, LyapunovFunction, LyapunovSet, MuFunction, MuTable,
    Projection, Region, SimConfig, SwitchLaw, SwitchingPolicy, TimeTable,
};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    pub sim: SimSpec,
    pub system: SystemSpec,
    pub policy: PolicySpec,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub lyapunov: Vec<LyapunovSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monitor: Option<MonitorSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSpec {
    pub dt: f64,
    pub t_end: f64,
    #[serde(default = "default_stop_norm")]
    pub stop_norm: f64,
    #[serde(default = "default_zeno_window")]
    pub zeno_window: f64,
    #[serde(default = "default_zeno_max")]
    pub zeno_max_jumps: usize,
    pub x0: Vec<f64>,
    /// Initial estimate; only for the output-feedback system.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xhat0: Option<Vec<f64>>,
}

fn default_stop_norm() -> f64 {
    1e-10
}
fn default_zeno_window() -> f64 {
    1.0
}
fn default_zeno_max() -> usize {
    1000
}

impl SimSpec {
    pub fn config(&self) -> SimConfig {
        SimConfig {
            dt: self.dt,
            t_end: self.t_end,
            stop_norm: self.stop_norm,
            zeno_window: self.zeno_window,
            zeno_max_jumps: self.zeno_max_jumps,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SystemSpec {
    Nonlinear {
        dim: usize,
        flows: Vec<FlowSpec>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        jumps: Vec<JumpSpec>,
    },
    LinearOutputFeedback(LinearSpec),
}

/// Named vector fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum FlowSpec {
    /// One of the five modes of the planar hybrid example.
    PlanarExample {
        mode: usize,
        #[serde(default = "default_alpha")]
        alpha: f64,
        #[serde(default = "default_k1")]
        k1: f64,
        #[serde(default = "default_k2")]
        k2: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        second_exponent: Option<f64>,
    },
    /// `ẋ = Ax`, row-major.
    Linear { a: Vec<f64> },
    /// `ẋ_i = −gain·sign(x_i)|x_i|^exponent`.
    PowerDecay { gain: f64, exponent: f64 },
    /// `ẋ_i = −gains_i·sign(x_i)|x_i|^exponent`.
    PowerDecayDiag { gains: Vec<f64>, exponent: f64 },
    Zero,
}

fn default_alpha() -> f64 {
    0.98
}
fn default_k1() -> f64 {
    20.0
}
fn default_k2() -> f64 {
    10.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum JumpSpec {
    /// `g(x) = factor·x`.
    Scale { factor: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearSpec {
    pub n: usize,
    pub sigma0: usize,
    /// Per mode, row-major.
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
    pub c: Vec<Vec<f64>>,
    pub observer: ObserverSpec,
    pub controller: ControllerSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObserverSpec {
    pub l: Vec<f64>,
    pub alpha: f64,
    /// Eigenvalues `[re, im]` the gain matrix is expected to have; checked on load.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub expected_eigenvalues: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerSpec {
    pub k: Vec<f64>,
    pub beta: f64,
    /// Defaults to `10·stop_norm`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linear_zone: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PolicySpec {
    /// Explicit `[t, mode]` segments and `[t, jump]` events.
    Table {
        segments: Vec<(f64, usize)>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        jumps: Vec<(f64, usize)>,
    },
    /// Fixed-length segments: `prefix` once, then `cycle` repeated.
    Phased {
        segment: f64,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        prefix: Vec<PhaseSpec>,
        cycle: Vec<PhaseSpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        jump_period: Option<f64>,
        #[serde(default)]
        jump_offset: f64,
        #[serde(default = "one")]
        jump_index: usize,
        /// Cap on the jump-free activation of one mode; later activations are
        /// handed to `replacement`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        truncate: Option<TruncateSpec>,
    },
    SwitchLaw(LawSpec),
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseSpec {
    pub modes: Vec<usize>,
    #[serde(default = "one")]
    pub repeat: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncateSpec {
    pub mode: usize,
    pub budget: f64,
    pub replacement: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LawSpec {
    pub initial_mode: usize,
    pub fts_mode: usize,
    pub dwell: f64,
    /// Defaults to `10⁻⁶ + 10⁻²·dt·‖f(x0)‖` maximized over modes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub surface_tol: Option<f64>,
    /// `μ_ij` for all `j ≠ i` by row `i`.
    pub mu_rows: Vec<MuSpec>,
    /// Individual `μ_ij` overriding `mu_rows`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub mu_entries: Vec<MuEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MuSpec {
    Zero,
    NegNormSquared,
    /// `xᵀQx`, row-major.
    Quadratic { q: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MuEntry {
    pub i: usize,
    pub j: usize,
    pub mu: MuSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum LyapunovSpec {
    /// `xᵀPx`, row-major.
    Quadratic { p: Vec<f64> },
    /// `k2/(2α)|x1|^{2α} + ½x2²`.
    Power { k2: f64, alpha: f64 },
}

/// `α(r) = Σ a·r^b`; an empty list is the zero function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerTerm {
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateSpec {
    pub fts_mode: usize,
    pub c: f64,
    pub beta: f64,
    pub dwell: f64,
    pub alpha0: Vec<PowerTerm>,
    #[serde(default)]
    pub alpha1: Vec<PowerTerm>,
    #[serde(default)]
    pub alpha2: Vec<PowerTerm>,
    #[serde(default)]
    pub alpha3: Vec<PowerTerm>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionSpec {
    Identity,
    /// Plant state of a stacked `(x, x̂)` state.
    Plant,
    /// Estimation error `x − x̂`.
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonitorSpec {
    /// What the Lyapunov functions act on.
    pub projection: ProjectionSpec,
}

pub fn gk_from_terms(terms: &[PowerTerm]) -> GkFunction {
    terms.iter().fold(GkFunction::zero(), |acc, t| acc.add(&GkFunction::power_law(t.a, t.b)))
}

fn to_mu(spec: &MuSpec, n: usize) -> Result<MuFunction, CliError> {
    Ok(match spec {
        MuSpec::Zero => MuFunction::Zero,
        MuSpec::NegNormSquared => MuFunction::NegNormSquared,
        MuSpec::Quadratic { q } => MuFunction::quadratic(n, q)?,
    })
}

fn index(what: &str, one_based: usize, count: usize) -> Result<usize, CliError> {
    if one_based == 0 || one_based > count {
        return Err(CliError::Scenario(format!("{what} {one_based} is out of range 1..={count}")));
    }
    Ok(one_based - 1)
}

/// A scenario turned into core objects, ready to simulate.
#[derive(Debug, Clone)]
pub struct Built {
    pub system: HybridSystem,
    pub policy: SwitchingPolicy,
    pub x0: Vec<f64>,
    pub cfg: SimConfig,
    pub lyapunov: LyapunovSet,
    pub projection: Projection,
    pub certificate: Option<CertificateInputs>,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.display().to_string(), e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Parse(e.to_string()))
    }

    fn n_modes(&self) -> usize {
        match &self.system {
            SystemSpec::Nonlinear { flows, .. } => flows.len(),
            SystemSpec::LinearOutputFeedback(l) => l.a.len(),
        }
    }

    /// Full simulated state `x0` (stacked with `x̂0` for output feedback).
    pub fn initial_state(&self) -> Vec<f64> {
        let mut x = self.sim.x0.clone();
        if let SystemSpec::LinearOutputFeedback(_) = self.system {
            x.extend(self.sim.xhat0.clone().unwrap_or_else(|| vec![0.0; self.sim.x0.len()]));
        }
        x
    }

    pub fn projection(&self) -> Projection {
        let n = self.sim.x0.len();
        let default = match self.system {
            SystemSpec::LinearOutputFeedback(_) => ProjectionSpec::Error,
            SystemSpec::Nonlinear { .. } => ProjectionSpec::Identity,
        };
        match self.monitor.as_ref().map_or(default, |m| m.projection) {
            ProjectionSpec::Identity => Projection::Identity,
            ProjectionSpec::Plant => Projection::Head(n),
            ProjectionSpec::Error => Projection::Difference(n),
        }
    }

    fn build_system(&self) -> Result<HybridSystem, CliError> {
        match &self.system {
            SystemSpec::Nonlinear { dim, flows, jumps } => {
                let mut fields = Vec::with_capacity(flows.len());
                for f in flows {
                    fields.push(match f {
                        FlowSpec::PlanarExample { mode, alpha, k1, k2, second_exponent } => {
                            if *dim != 2 {
                                return Err(CliError::Scenario("planar_example flows need dim = 2".into()));
                            }
                            let p = PlanarExample {
                                alpha: *alpha,
                                k1: *k1,
                                k2: *k2,
                                second_exponent: second_exponent.unwrap_or(2.0 * alpha - 1.0),
                                jump_factor: -1.1,
                            };
                            let m = index("planar_example mode", *mode, 5)?;
                            builtin::planar_example_flows(&p).swap_remove(m)
                        }
                        FlowSpec::Linear { a } => builtin::linear_flow(*dim, a)?,
                        FlowSpec::PowerDecay { gain, exponent } => builtin::power_decay(*gain, *exponent),
                        FlowSpec::PowerDecayDiag { gains, exponent } => {
                            if gains.len() != *dim {
                                return Err(CliError::Scenario(format!("power_decay_diag needs {dim} gains")));
                            }
                            builtin::power_decay_diag(gains, *exponent)
                        }
                        FlowSpec::Zero => fts_core::system::field(|_: &[f64], o: &mut [f64]| o.fill(0.0)),
                    });
                }
                let maps = jumps
                    .iter()
                    .map(|j| match j {
                        JumpSpec::Scale { factor } => builtin::scale_jump(*factor),
                    })
                    .collect::<Vec<_>>();
                let jump_set = if maps.is_empty() { Region::Empty } else { Region::All };
                Ok(HybridSystem::new(*dim, fields, maps, Region::All, jump_set)?)
            }
            SystemSpec::LinearOutputFeedback(l) => {
                let sigma0 = index("sigma0", l.sigma0, l.a.len())?;
                let plant = LinearSwitchedPlant::new(l.n, &l.a, &l.b, &l.c, sigma0)?;
                let obs = ObserverConfig::new(l.observer.l.clone(), l.observer.alpha)?;
                check_eigenvalues(&obs, &l.observer.expected_eigenvalues)?;
                let zone = l.controller.linear_zone.unwrap_or(10.0 * self.sim.stop_norm);
                let ctrl = ControllerConfig::new(l.controller.k.clone(), l.controller.beta, zone)?;
                let fts = match (&self.policy, &self.certificate) {
                    (PolicySpec::SwitchLaw(law), _) => law.fts_mode,
                    (_, Some(c)) => c.fts_mode,
                    _ => l.sigma0,
                };
                Ok(assemble_closed_loop(&plant, &obs, &ctrl, index("FTS mode", fts, l.a.len())?)?)
            }
        }
    }

    fn build_lyapunov(&self, dim: usize) -> Result<LyapunovSet, CliError> {
        self.lyapunov
            .iter()
            .map(|v| {
                Ok(match v {
                    LyapunovSpec::Quadratic { p } => LyapunovFunction::quadratic(dim, p)?,
                    LyapunovSpec::Power { k2, alpha } => LyapunovFunction::power(*k2, *alpha)?,
                })
            })
            .collect()
    }

    fn build_policy(&self, system: &HybridSystem, lyapunov: &LyapunovSet, x0: &[f64]) -> Result<SwitchingPolicy, CliError> {
        let n_modes = self.n_modes();
        let n_jumps = system.n_jumps();
        let t_end = self.sim.t_end;
        match &self.policy {
            PolicySpec::Table { segments, jumps } => {
                let segs = segments
                    .iter()
                    .map(|&(t, m)| Ok((t, index("mode", m, n_modes)?)))
                    .collect::<Result<Vec<_>, CliError>>()?;
                let js = jumps
                    .iter()
                    .map(|&(t, g)| Ok((t, index("jump", g, n_jumps)?)))
                    .collect::<Result<Vec<_>, CliError>>()?;
                Ok(SwitchingPolicy::TimeTable(TimeTable::new(segs, js, t_end)?))
            }
            PolicySpec::Phased { segment, prefix, cycle, jump_period, jump_offset, jump_index, truncate } => {
                let phases = |ps: &[PhaseSpec]| -> Result<Vec<Phase>, CliError> {
                    ps.iter()
                        .map(|p| {
                            Ok(Phase {
                                modes: p
                                    .modes
                                    .iter()
                                    .map(|&m| index("mode", m, n_modes))
                                    .collect::<Result<_, _>>()?,
                                repeat: p.repeat,
                            })
                        })
                        .collect()
                };
                let jump_index = if jump_period.is_some() { index("jump", *jump_index, n_jumps)? } else { 0 };
                let sched = PhasedSchedule {
                    segment: *segment,
                    prefix: phases(prefix)?,
                    cycle: phases(cycle)?,
                    jump_period: *jump_period,
                    jump_offset: *jump_offset,
                    jump_index,
                };
                let mut table = sched.build(t_end)?;
                if let Some(t) = truncate {
                    table = table.truncate_mode(
                        index("truncated mode", t.mode, n_modes)?,
                        t.budget,
                        index("replacement mode", t.replacement, n_modes)?,
                    )?;
                }
                Ok(SwitchingPolicy::TimeTable(table))
            }
            PolicySpec::SwitchLaw(l) => {
                let mut mu = MuTable::by_row(
                    l.mu_rows.iter().map(|m| to_mu(m, lyapunov_dim(lyapunov))).collect::<Result<_, _>>()?,
                )?;
                if mu.n() != n_modes {
                    return Err(CliError::Scenario(format!("mu_rows has {} rows, system has {n_modes} modes", mu.n())));
                }
                for e in &l.mu_entries {
                    mu.set(index("mu row", e.i, n_modes)?, index("mu column", e.j, n_modes)?, to_mu(&e.mu, lyapunov_dim(lyapunov))?);
                }
                let tol = match l.surface_tol {
                    Some(t) => t,
                    None => {
                        let speed = (0..system.n_flows())
                            .map(|i| fts_core::math::norm(&system.flow_vec(i, x0)))
                            .fold(0.0, f64::max);
                        SwitchLaw::default_surface_tol(self.sim.dt, speed)
                    }
                };
                let law = SwitchLaw::new(mu, lyapunov.clone(), index("FTS mode", l.fts_mode, n_modes)?, l.dwell, tol)?
                    .with_projection(self.projection());
                Ok(SwitchingPolicy::StateLaw { law, initial_mode: index("initial mode", l.initial_mode, n_modes)? })
            }
        }
    }

    pub fn build(&self) -> Result<Built, CliError> {
        let system = self.build_system()?;
        let x0 = self.initial_state();
        if x0.len() != system.dim() {
            return Err(CliError::Scenario(format!(
                "initial state has {} entries, the system has dimension {}",
                x0.len(),
                system.dim()
            )));
        }
        let projection = self.projection();
        projection.validate(system.dim())?;
        let lyapunov = self.build_lyapunov(projection.output_dim(system.dim()))?;
        if !lyapunov.is_empty() && lyapunov.len() != system.n_flows() {
            return Err(CliError::Scenario(format!(
                "{} Lyapunov functions for {} modes",
                lyapunov.len(),
                system.n_flows()
            )));
        }
        let policy = self.build_policy(&system, &lyapunov, &x0)?;
        let certificate = match &self.certificate {
            None => None,
            Some(c) => {
                if lyapunov.is_empty() {
                    return Err(CliError::Scenario("certificate given without Lyapunov functions".into()));
                }
                let inputs = CertificateInputs {
                    lyapunov: lyapunov.clone(),
                    fts_mode: index("certificate FTS mode", c.fts_mode, system.n_flows())?,
                    c: c.c,
                    beta: c.beta,
                    alpha: [
                        gk_from_terms(&c.alpha0),
                        gk_from_terms(&c.alpha1),
                        gk_from_terms(&c.alpha2),
                        gk_from_terms(&c.alpha3),
                    ],
                    dwell_time: c.dwell,
                    projection,
                };
                inputs.validate()?;
                Some(inputs)
            }
        };
        let cfg = self.sim.config();
        cfg.validate()?;
        Ok(Built { system, policy, x0, cfg, lyapunov, projection, certificate })
    }
}

fn lyapunov_dim(set: &LyapunovSet) -> usize {
    set.first().map_or(1, |v| v.dim())
}

fn check_eigenvalues(obs: &ObserverConfig, expected: &[[f64; 2]]) -> Result<(), CliError> {
    if expected.is_empty() {
        return Ok(());
    }
    let mut got = obs.a_bar_eigenvalues();
    let mut want: Vec<(f64, f64)> = expected.iter().map(|e| (e[0], e[1])).collect();
    let key = |a: &(f64, f64), b: &(f64, f64)| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1));
    got.sort_by(key);
    want.sort_by(key);
    let close = got.len() == want.len()
        && got.iter().zip(&want).all(|(g, w)| (g.0 - w.0).abs() <= 1e-6 * (1.0 + w.0.abs()) && (g.1 - w.1).abs() <= 1e-6 * (1.0 + w.1.abs()));
    if close {
        Ok(())
    } else {
        Err(CliError::Scenario(format!("observer eigenvalues {got:?} differ from the declared {want:?}")))
    }
}
