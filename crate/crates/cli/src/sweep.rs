//! Many runs of one scenario over a set of initial conditions.

use std::path::{Path, PathBuf};

use fts_core::math;
use fts_core::monitor::fit_power_envelope;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::output::{fmt_num, write_text};
use crate::run::{execute, RunOptions};
use crate::scenario::{gk_from_terms, Scenario};
use crate::CliError;

/// Sweep description; `scenario` is relative to the sweep file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFile {
    pub scenario: PathBuf,
    /// Explicit initial conditions.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub x0: Vec<Vec<f64>>,
    /// Norms along the direction of the scenario's `x0`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub norms: Vec<f64>,
    /// Fit `a·r^b` envelopes over the observed condition sums.
    #[serde(default)]
    pub envelopes: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub run: usize,
    pub x0_norm: f64,
    pub gamma: Option<f64>,
    pub achieved: Option<f64>,
    pub converged: bool,
    pub t_conv: Option<f64>,
    pub exit_code: i32,
    /// Prefix maxima of conditions (i), (ii) and the worst mode of (iii).
    pub sums: Option<[f64; 3]>,
    pub certified: Option<bool>,
}

/// `a·r^b` fitted over the sweep next to the declared bound at the largest norm.
#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    pub condition: &'static str,
    pub a: f64,
    pub b: f64,
    pub observed_max: f64,
    pub declared_at_max_norm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub envelopes: Vec<Envelope>,
}

impl SweepFile {
    pub fn load(path: &Path) -> Result<(Self, Scenario), CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.display().to_string(), e))?;
        let sweep: SweepFile = toml::from_str(&text).map_err(|e| CliError::Parse(e.to_string()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let scenario = Scenario::load(&base.join(&sweep.scenario))?;
        Ok((sweep, scenario))
    }

    pub fn initial_conditions(&self, scenario: &Scenario) -> Result<Vec<Vec<f64>>, CliError> {
        let mut out = self.x0.clone();
        if !self.norms.is_empty() {
            let r = math::norm(&scenario.sim.x0);
            if r <= 0.0 || !r.is_finite() {
                return Err(CliError::Scenario("norm sweep needs a nonzero scenario x0".into()));
            }
            for &n in &self.norms {
                out.push(scenario.sim.x0.iter().map(|v| v * n / r).collect());
            }
        }
        if out.is_empty() {
            return Err(CliError::Scenario("sweep has no initial conditions".into()));
        }
        Ok(out)
    }
}

/// Runs every initial condition, concurrently, each into `report_dir/run_NNNN`.
pub fn run_sweep(
    sweep: &SweepFile,
    scenario: &Scenario,
    base: &RunOptions,
    report_dir: Option<&Path>,
) -> Result<SweepResult, CliError> {
    let x0s = sweep.initial_conditions(scenario)?;
    let rows: Vec<SweepRow> = x0s
        .par_iter()
        .enumerate()
        .map(|(k, x0)| {
            let opts = RunOptions {
                x0: Some(x0.clone()),
                report_dir: report_dir.map(|d| d.join(format!("run_{:04}", k + 1))),
                ..base.clone()
            };
            let x0_norm = math::norm(x0);
            match execute(scenario, &opts) {
                Ok(o) => {
                    let cert = o.certificate.as_ref();
                    SweepRow {
                        run: k + 1,
                        x0_norm: cert.map_or(x0_norm, |c| c.x0_norm),
                        gamma: cert.map(|c| c.gamma),
                        achieved: cert.map(|c| c.achieved_total),
                        converged: o.report.converged,
                        t_conv: o.report.converged.then_some(o.report.t_stop),
                        exit_code: o.exit_code,
                        sums: cert.map(|c| [c.cond_i.achieved, c.cond_ii.achieved, c.cond_iii.achieved]),
                        certified: cert.map(|c| c.certified),
                    }
                }
                Err(e) => SweepRow {
                    run: k + 1,
                    x0_norm,
                    gamma: None,
                    achieved: None,
                    converged: false,
                    t_conv: None,
                    exit_code: e.exit_code(),
                    sums: None,
                    certified: None,
                },
            }
        })
        .collect();

    let envelopes = if sweep.envelopes { fit_envelopes(&rows, scenario) } else { Vec::new() };
    let result = SweepResult { rows, envelopes };
    if let Some(dir) = report_dir {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(dir.display().to_string(), e))?;
        write_sweep_csv(&dir.join("sweep.csv"), &result.rows)?;
        if sweep.envelopes {
            write_text(&dir.join("envelopes.txt"), &envelope_text(&result.envelopes))?;
        }
    }
    Ok(result)
}

fn fit_envelopes(rows: &[SweepRow], scenario: &Scenario) -> Vec<Envelope> {
    let declared = scenario.certificate.as_ref().map(|c| {
        [gk_from_terms(&c.alpha1), gk_from_terms(&c.alpha2), gk_from_terms(&c.alpha3)]
    });
    let pts: Vec<(f64, [f64; 3])> = rows.iter().filter_map(|r| r.sums.map(|s| (r.x0_norm, s))).collect();
    let r_max = pts.iter().map(|p| p.0).fold(0.0, f64::max);
    let names = ["condition_i", "condition_ii", "condition_iii"];
    let mut out = Vec::new();
    for (l, name) in names.into_iter().enumerate() {
        let rs: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let vs: Vec<f64> = pts.iter().map(|p| p.1[l]).collect();
        if let Some((a, b)) = fit_power_envelope(&rs, &vs) {
            out.push(Envelope {
                condition: name,
                a,
                b,
                observed_max: vs.iter().cloned().fold(0.0, f64::max),
                declared_at_max_norm: declared.as_ref().map(|d| d[l].eval(r_max)),
            });
        }
    }
    out
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_num).unwrap_or_default()
}

fn write_sweep_csv(path: &Path, rows: &[SweepRow]) -> Result<(), CliError> {
    let file = std::fs::File::create(path).map_err(|e| CliError::Io(path.display().to_string(), e))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record([
        "run", "x0_norm", "gamma", "achieved_fts_time", "converged", "t_conv", "exit_code", "cond_i", "cond_ii",
        "cond_iii", "certified",
    ])?;
    for r in rows {
        let s = r.sums.map(|s| s.map(fmt_num)).unwrap_or_default();
        w.write_record([
            r.run.to_string(),
            fmt_num(r.x0_norm),
            opt(r.gamma),
            opt(r.achieved),
            r.converged.to_string(),
            opt(r.t_conv),
            r.exit_code.to_string(),
            s[0].clone(),
            s[1].clone(),
            s[2].clone(),
            r.certified.map(|c| c.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush().map_err(|e| CliError::Io(path.display().to_string(), e))?;
    Ok(())
}

pub fn envelope_text(envs: &[Envelope]) -> String {
    let mut out = String::new();
    for e in envs {
        out.push_str(&format!(
            "{}: a = {}, b = {}, observed_max = {}, declared_at_max_norm = {}\n",
            e.condition,
            fmt_num(e.a),
            fmt_num(e.b),
            fmt_num(e.observed_max),
            opt(e.declared_at_max_norm)
        ));
    }
    out
}
