//! Artifact writers. Every number goes through [`fmt_num`].

use std::fs;
use std::io::Write;
use std::path::Path;

use fts_core::monitor::{CertificatePath, CertificateReport, ConditionVerdict};
use fts_core::{HybridTrajectory, LyapunovSet, Projection};
use serde::Serialize;

use crate::CliError;

/// `%.12g`: 12 significant digits, trailing zeros trimmed.
pub fn fmt_num(v: f64) -> String {
    if !v.is_finite() {
        return if v.is_nan() { "nan".into() } else if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.11e}");
    let (mant, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim(&format!("{v:.decimals$}")).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim(mant), exp.abs())
    }
}

fn trim(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |e| CliError::Io(path.display().to_string(), e)
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>, CliError> {
    let file = fs::File::create(path).map_err(io_err(path))?;
    Ok(csv::Writer::from_writer(file))
}

/// `t,j,mode,x1..xn`; modes 1-based, jump instants appear twice.
pub fn write_trajectory(path: &Path, traj: &HybridTrajectory) -> Result<(), CliError> {
    let mut w = csv_writer(path)?;
    let mut header = vec!["t".to_string(), "j".into(), "mode".into()];
    header.extend((1..=traj.dim()).map(|i| format!("x{i}")));
    w.write_record(&header)?;
    for s in traj.samples() {
        let mut row = vec![fmt_num(s.t), s.j.to_string(), (s.mode + 1).to_string()];
        row.extend(s.x.iter().map(|&v| fmt_num(v)));
        w.write_record(&row)?;
    }
    w.flush().map_err(io_err(path))?;
    Ok(())
}

/// `t,jump_index,x_before1..,x_after1..`.
pub fn write_jumps(path: &Path, traj: &HybridTrajectory) -> Result<(), CliError> {
    let mut w = csv_writer(path)?;
    let n = traj.dim();
    let mut header = vec!["t".to_string(), "jump_index".into()];
    header.extend((1..=n).map(|i| format!("x_before{i}")));
    header.extend((1..=n).map(|i| format!("x_after{i}")));
    w.write_record(&header)?;
    for e in traj.jump_events() {
        let mut row = vec![fmt_num(e.t), (e.jump_index + 1).to_string()];
        row.extend(e.x_before.iter().chain(&e.x_after).map(|&v| fmt_num(v)));
        w.write_record(&row)?;
    }
    w.flush().map_err(io_err(path))?;
    Ok(())
}

/// `t,j,mode,V1..VN` evaluated on the projected state.
pub fn write_lyapunov(path: &Path, traj: &HybridTrajectory, set: &LyapunovSet, proj: Projection) -> Result<(), CliError> {
    let mut w = csv_writer(path)?;
    let mut header = vec!["t".to_string(), "j".into(), "mode".into()];
    header.extend((1..=set.len()).map(|i| format!("V{i}")));
    w.write_record(&header)?;
    let mut z = Vec::new();
    for s in traj.samples() {
        proj.apply_into(s.x, &mut z);
        let mut row = vec![fmt_num(s.t), s.j.to_string(), (s.mode + 1).to_string()];
        row.extend(set.iter().map(|v| fmt_num(v.value(&z))));
        w.write_record(&row)?;
    }
    w.flush().map_err(io_err(path))?;
    Ok(())
}

/// Run summary; the certificate part is present when one was evaluated.
#[derive(Debug, Clone, Serialize)]
pub struct ReportDoc {
    pub scenario: String,
    pub status: String,
    pub converged: bool,
    pub t_stop: f64,
    pub samples: usize,
    pub jumps: usize,
    pub final_norm: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateDoc>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub bound: f64,
    pub achieved: f64,
    pub pass: bool,
}

impl From<&ConditionVerdict> for Verdict {
    fn from(v: &ConditionVerdict) -> Self {
        Verdict { bound: v.bound, achieved: v.achieved, pass: v.pass }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificateDoc {
    pub path: String,
    pub x0_norm: f64,
    pub conditions: Conditions,
    pub cond_iii_per_mode: Vec<Verdict>,
    pub gamma: f64,
    pub achieved_realized: f64,
    pub achieved_total: f64,
    pub activation_count: usize,
    pub activation_cap: f64,
    pub dwell: Verdict,
    pub dwell_checked: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fitted_c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fitted_beta: Option<f64>,
    pub decay_violations: usize,
    pub decay_samples: usize,
    pub ls_chain_ok: bool,
    pub ls_chain_max: f64,
    pub alpha_total: f64,
    pub certified: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Conditions {
    pub i: Verdict,
    pub ii: Verdict,
    pub iii: Verdict,
    pub iv: Verdict,
    pub v: Verdict,
}

impl CertificateDoc {
    pub fn new(r: &CertificateReport, dwell_time: f64) -> Self {
        let shortest = r.dwell.first_violation.map_or(dwell_time, |v| v.1);
        CertificateDoc {
            path: match r.path {
                CertificatePath::Hybrid => "hybrid".into(),
                CertificatePath::JumpFree => "jump-free".into(),
            },
            x0_norm: r.x0_norm,
            conditions: Conditions {
                i: (&r.cond_i).into(),
                ii: (&r.cond_ii).into(),
                iii: (&r.cond_iii).into(),
                iv: (&r.cond_iv).into(),
                v: (&r.cond_v).into(),
            },
            cond_iii_per_mode: r.cond_iii_modes.iter().map(Verdict::from).collect(),
            gamma: r.gamma,
            achieved_realized: r.achieved_realized,
            achieved_total: r.achieved_total,
            activation_count: r.activation_count,
            activation_cap: r.gamma / dwell_time,
            dwell: Verdict { bound: dwell_time, achieved: shortest, pass: r.dwell.ok },
            dwell_checked: r.dwell.checked,
            fitted_c: r.decay_fit.as_ref().map(|f| f.c_hat),
            fitted_beta: r.decay_fit.as_ref().map(|f| f.beta_hat),
            decay_violations: r.decay_check.violations,
            decay_samples: r.decay_check.checked,
            ls_chain_ok: r.ls_chain_ok,
            ls_chain_max: r.ls_chain_max,
            alpha_total: r.alpha_total,
            certified: r.certified,
        }
    }
}

/// `key: value` lines.
pub fn report_text(doc: &ReportDoc) -> String {
    let mut out = String::new();
    let mut line = |k: &str, v: String| out.push_str(&format!("{k}: {v}\n"));
    line("scenario", doc.scenario.clone());
    line("status", doc.status.clone());
    line("converged", doc.converged.to_string());
    line("t_stop", fmt_num(doc.t_stop));
    line("samples", doc.samples.to_string());
    line("jumps", doc.jumps.to_string());
    line("final_norm", fmt_num(doc.final_norm));
    if let Some(e) = &doc.error {
        line("error", e.clone());
    }
    if let Some(c) = &doc.certificate {
        line("certificate.path", c.path.clone());
        line("certificate.x0_norm", fmt_num(c.x0_norm));
        let mut verdict = |name: &str, v: &Verdict| {
            line(&format!("{name}.bound"), fmt_num(v.bound));
            line(&format!("{name}.achieved"), fmt_num(v.achieved));
            line(&format!("{name}.pass"), v.pass.to_string());
        };
        verdict("condition_i", &c.conditions.i);
        verdict("condition_ii", &c.conditions.ii);
        verdict("condition_iii", &c.conditions.iii);
        verdict("condition_iv", &c.conditions.iv);
        verdict("condition_v", &c.conditions.v);
        verdict("dwell", &c.dwell);
        for (i, v) in c.cond_iii_per_mode.iter().enumerate() {
            verdict(&format!("condition_iii.mode{}", i + 1), v);
        }
        line("gamma", fmt_num(c.gamma));
        line("achieved_realized", fmt_num(c.achieved_realized));
        line("achieved_total", fmt_num(c.achieved_total));
        line("activation_count", c.activation_count.to_string());
        line("activation_cap", fmt_num(c.activation_cap));
        line("dwell_checked", c.dwell_checked.to_string());
        if let (Some(cc), Some(b)) = (c.fitted_c, c.fitted_beta) {
            line("fitted_c", fmt_num(cc));
            line("fitted_beta", fmt_num(b));
        }
        line("decay_violations", c.decay_violations.to_string());
        line("decay_samples", c.decay_samples.to_string());
        line("ls_chain_ok", c.ls_chain_ok.to_string());
        line("ls_chain_max", fmt_num(c.ls_chain_max));
        line("alpha_total", fmt_num(c.alpha_total));
        line("certified", c.certified.to_string());
    }
    out
}

/// JSON with every float rounded through [`fmt_num`].
pub fn report_json(doc: &ReportDoc) -> Result<String, CliError> {
    let mut v = serde_json::to_value(doc)?;
    round_floats(&mut v);
    Ok(serde_json::to_string_pretty(&v)?)
}

fn round_floats(v: &mut serde_json::Value) {
    use serde_json::Value;
    match v {
        Value::Number(n) if n.is_f64() => {
            let s = fmt_num(n.as_f64().unwrap());
            if let Ok(num) = s.parse::<serde_json::Number>() {
                *v = Value::Number(num);
            }
        }
        Value::Array(a) => a.iter_mut().for_each(round_floats),
        Value::Object(o) => o.values_mut().for_each(round_floats),
        _ => {}
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    let mut f = fs::File::create(path).map_err(io_err(path))?;
    f.write_all(text.as_bytes()).map_err(io_err(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_num(0.1 + 0.2), "0.3");
        assert_eq!(fmt_num(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_num(123456.0), "123456");
        assert_eq!(fmt_num(1e-10), "1e-10");
        assert_eq!(fmt_num(-2.5e13), "-2.5e+13");
        assert_eq!(fmt_num(0.0), "0");
        assert_eq!(fmt_num(545.27), "545.27");
        assert_eq!(fmt_num(f64::NAN), "nan");
    }
}
