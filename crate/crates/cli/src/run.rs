//! One scenario run: simulate, certify, write artifacts, pick an exit code.

use std::fs;
use std::path::PathBuf;

use fts_core::{certify, math, simulate, CertificateReport, HybridTrajectory};

use crate::output::{self, CertificateDoc, ReportDoc};
use crate::scenario::{Scenario, SystemSpec};
use crate::{exit, CliError};

/// Command-line overrides applied on top of the scenario file.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    /// Plant state, or the full stacked state for output feedback.
    pub x0: Option<Vec<f64>>,
    pub stop_norm: Option<f64>,
    /// Fail with exit 4 unless the certificate passes.
    pub certify: bool,
    pub report_dir: Option<PathBuf>,
}

impl RunOptions {
    pub fn apply(&self, scenario: &Scenario) -> Result<Scenario, CliError> {
        let mut s = scenario.clone();
        if let Some(dt) = self.dt {
            s.sim.dt = dt;
        }
        if let Some(t) = self.t_end {
            s.sim.t_end = t;
        }
        if let Some(r) = self.stop_norm {
            s.sim.stop_norm = r;
        }
        if let Some(x0) = &self.x0 {
            let n = s.sim.x0.len();
            match (&s.system, x0.len()) {
                (_, m) if m == n => s.sim.x0 = x0.clone(),
                (SystemSpec::LinearOutputFeedback(_), m) if m == 2 * n => {
                    s.sim.x0 = x0[..n].to_vec();
                    s.sim.xhat0 = Some(x0[n..].to_vec());
                }
                (_, m) => return Err(CliError::Scenario(format!("--x0 has {m} entries, expected {n}"))),
            }
        }
        if self.certify && s.certificate.is_none() {
            return Err(CliError::Scenario("--certify needs a [certificate] section".into()));
        }
        Ok(s)
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    /// Complete trajectory, or everything recorded before a divergence.
    pub trajectory: Option<HybridTrajectory>,
    pub certificate: Option<CertificateReport>,
    pub report: ReportDoc,
    pub exit_code: i32,
}

/// Parses a comma-separated vector such as `7.07,7.07`.
pub fn parse_vector(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| CliError::Parse(format!("bad number {t:?} in --x0: {e}"))))
        .collect()
}

/// Simulates and (when the scenario has one) certifies. Simulation failures are part of
/// the outcome; only setup and output problems are returned as errors.
pub fn execute(scenario: &Scenario, opts: &RunOptions) -> Result<RunOutcome, CliError> {
    let scenario = opts.apply(scenario)?;
    let built = scenario.build()?;
    let (trajectory, error) = match simulate(&built.system, &built.policy, &built.x0, &built.cfg) {
        Ok(t) => (Some(t), None),
        Err(fts_core::Error::Diverged { t, partial }) => {
            (Some(*partial), Some((exit::SIMULATION, format!("trajectory diverged at t = {}", output::fmt_num(t)))))
        }
        Err(e) => {
            let e = CliError::from(e);
            (None, Some((e.exit_code(), e.to_string())))
        }
    };

    let mut cert_error = None;
    let certificate = match (&built.certificate, &trajectory) {
        (Some(inputs), Some(traj)) => match certify(traj, inputs) {
            Ok(r) => Some(r),
            Err(e) => {
                let e = CliError::from(e);
                cert_error = Some((e.exit_code(), e.to_string()));
                None
            }
        },
        _ => None,
    };

    let (converged, t_stop, samples, jumps, final_norm) = match &trajectory {
        Some(t) => (
            t.converged() && error.is_none(),
            t.t_stop(),
            t.len(),
            t.jump_events().len(),
            math::norm(t.final_state()),
        ),
        None => (false, 0.0, 0, 0, f64::NAN),
    };
    let exit_code = if let Some((code, _)) = &error {
        *code
    } else if let Some((code, _)) = &cert_error {
        if opts.certify { *code } else { exit::OK }
    } else if opts.certify && !certificate.as_ref().is_some_and(|c| c.certified) {
        exit::CERTIFICATE
    } else {
        exit::OK
    };
    let status = match (&error, converged) {
        (Some(_), _) => "failed",
        (None, true) => "converged",
        (None, false) => "horizon",
    };
    let report = ReportDoc {
        scenario: scenario.name.clone(),
        status: status.into(),
        converged,
        t_stop,
        samples,
        jumps,
        final_norm,
        error: error.or(cert_error).map(|e| e.1),
        certificate: match (&certificate, &built.certificate) {
            (Some(r), Some(inputs)) => Some(CertificateDoc::new(r, inputs.dwell_time)),
            _ => None,
        },
    };

    let outcome = RunOutcome { trajectory, certificate, report, exit_code };
    if let Some(dir) = &opts.report_dir {
        write_artifacts(dir, &outcome, &built)?;
    }
    Ok(outcome)
}

fn write_artifacts(dir: &std::path::Path, outcome: &RunOutcome, built: &crate::Built) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(dir.display().to_string(), e))?;
    if let Some(traj) = &outcome.trajectory {
        output::write_trajectory(&dir.join("trajectory.csv"), traj)?;
        output::write_jumps(&dir.join("jumps.csv"), traj)?;
        if !built.lyapunov.is_empty() {
            output::write_lyapunov(&dir.join("lyapunov.csv"), traj, &built.lyapunov, built.projection)?;
        }
    }
    output::write_text(&dir.join("report.txt"), &output::report_text(&outcome.report))?;
    output::write_text(&dir.join("report.json"), &output::report_json(&outcome.report)?)?;
    Ok(())
}
