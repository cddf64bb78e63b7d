//! One test per acceptance criterion. Each prints a single `criterion N: PASS|FAIL` line.

use std::path::{Path, PathBuf};
use std::time::Instant;

use fts_core::inequality::{power_gap_inequality, sum_power_sandwich};
use fts_core::linplant::{companion_matrix, is_hurwitz_poly};
use fts_core::monitor::{condition_i_sum, condition_ii_sum, fit_decay, settling_time_scalar};
use fts_core::switchlaw::{check_mu_table, check_law_conditions, BetaTable};
use fts_core::{simulate, HybridSystem, MuFunction, MuTable, Projection, SimConfig, SwitchingPolicy, TimeTable};
use fts_cli::scenario::{PolicySpec, TruncateSpec};
use fts_cli::{exit, execute, RunOptions, Scenario};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn scenario(name: &str) -> Scenario {
    let p: PathBuf = Path::new(env!("CARGO_MANIFEST_DIR")).join("../cli/scenarios").join(name);
    Scenario::load(&p).unwrap()
}

fn verdict(n: usize, ok: bool, detail: String) {
    println!("criterion {n}: {} ({detail})", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {n} failed: {detail}");
}

/// Uniform sample in the ball of radius `r`.
fn in_ball(rng: &mut StdRng, dim: usize, r: f64) -> Vec<f64> {
    loop {
        let x: Vec<f64> = (0..dim).map(|_| rng.gen_range(-r..r)).collect();
        if x.iter().map(|v| v * v).sum::<f64>() <= r * r {
            return x;
        }
    }
}

#[test]
fn criterion_01_example1_reaches_tolerance_within_120s() {
    let s = scenario("example1.toml");
    let start = Instant::now();
    let out = execute(&s, &RunOptions::default()).unwrap();
    let wall = start.elapsed().as_secs_f64();
    let tr = out.trajectory.unwrap();
    let t_hit = tr.first_time_below(1e-10, Projection::Identity);
    let ok = t_hit.is_some_and(|t| t <= 120.0) && wall <= 60.0;
    verdict(1, ok, format!("norm <= 1e-10 first at t = {t_hit:?} s, wall clock {wall:.2} s"));
}

#[test]
fn criterion_02_truncated_fts_budget_fails_and_does_not_converge() {
    let mut s = scenario("example1.toml");
    let gamma = {
        let base = execute(&s, &RunOptions { t_end: Some(1.0), ..RunOptions::default() }).unwrap();
        base.certificate.unwrap().gamma
    };
    if let PolicySpec::Phased { truncate, .. } = &mut s.policy {
        *truncate = Some(TruncateSpec { mode: 5, budget: 0.5 * gamma, replacement: 1 });
    } else {
        panic!("example 1 uses a phased schedule");
    }
    let out = execute(&s, &RunOptions::default()).unwrap();
    let cert = out.certificate.expect("certificate evaluated on the recorded trajectory");
    let converged = out.report.converged;
    let ok = !cert.cond_v.pass && !converged;
    verdict(
        2,
        ok,
        format!(
            "gamma {:.3}, achieved {:.3}, condition (v) pass = {}, converged = {converged}, status {} (exit {})",
            cert.gamma, cert.achieved_total, cert.cond_v.pass, out.report.status, out.exit_code
        ),
    );
}

#[test]
fn criterion_03_example2_error_settles_before_state() {
    let s = scenario("example2.toml");
    assert_eq!(s.sim.t_end, 200.0);
    let out = execute(&s, &RunOptions::default()).unwrap();
    let tr = out.trajectory.unwrap();
    let n = s.sim.x0.len();
    let te = tr.first_time_below(1e-8, Projection::Difference(n));
    let tx = tr.first_time_below(1e-8, Projection::Head(n));
    let ok = matches!((te, tx), (Some(e), Some(x)) if e < x && x <= 200.0);
    verdict(3, ok, format!("|x - xhat| <= 1e-8 at {te:?} s, |x| <= 1e-8 at {tx:?} s"));
}

#[test]
fn criterion_04_power_gap_suite() {
    let mut rng = StdRng::seed_from_u64(4);
    let mut violations = 0;
    for _ in 0..10_000 {
        let k = rng.gen_range(1..=20);
        let a: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..100.0)).collect();
        let b: Vec<f64> = a.iter().map(|&ai| ai * rng.gen_range(0.0..=1.0)).collect();
        let r = rng.gen_range(0.001..0.999);
        if !power_gap_inequality(&a, &b, r).unwrap().holds {
            violations += 1;
        }
    }
    verdict(4, violations == 0, format!("{violations} violations in 10^4 samples"));
}

#[test]
fn criterion_05_sandwich_suite() {
    let mut rng = StdRng::seed_from_u64(5);
    let mut violations = 0;
    for _ in 0..10_000 {
        let m = rng.gen_range(1..=20);
        let z: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..1000.0)).collect();
        let r = rng.gen_range(0.001..=1.0);
        if !sum_power_sandwich(&z, r).unwrap().holds {
            violations += 1;
        }
    }
    verdict(5, violations == 0, format!("{violations} violations in 10^4 samples"));
}

#[test]
fn criterion_06_decay_fit_and_settling_time() {
    let s = scenario("scalar_fts.toml");
    assert_eq!(s.sim.dt, 1e-4);
    let built = s.build().unwrap();
    let tr = simulate(&built.system, &built.policy, &built.x0, &built.cfg).unwrap();
    let fit = fit_decay(&tr, 0, &built.lyapunov[0], Projection::Identity).unwrap();
    let c_ok = (fit.c_hat - 2.0).abs() <= 0.02 * 2.0;
    let b_ok = (fit.beta_hat - 0.75).abs() <= 0.02 * 0.75;

    // V' = -V^{1/2} from V = 1, integrated directly
    let predicted = settling_time_scalar(1.0, 1.0, 0.5);
    let sys = HybridSystem::switched(1, vec![fts_core::builtin::power_decay(1.0, 0.5)]).unwrap();
    let cfg = SimConfig { dt: 1e-4, t_end: 5.0, stop_norm: 0.0, ..SimConfig::default() };
    let tt = TimeTable::new(vec![(0.0, 0)], vec![], 5.0).unwrap();
    let v = simulate(&sys, &SwitchingPolicy::TimeTable(tt), &[1.0], &cfg).unwrap();
    let crossing = (1..v.len()).find(|&k| v.x(k)[0] <= 0.0 || v.x(k)[0] > v.x(k - 1)[0]).map(|k| v.t(k));
    let t_ok = crossing.is_some_and(|t| (t - predicted).abs() <= 0.02 * predicted);
    verdict(
        6,
        c_ok && b_ok && t_ok && (predicted - 2.0).abs() < 1e-12,
        format!("c = {:.5}, beta = {:.5}, predicted {predicted}, simulated zero crossing {crossing:?}", fit.c_hat, fit.beta_hat),
    );
}

#[test]
fn criterion_07_output_feedback_mu_table() {
    let neg = MuFunction::NegNormSquared;
    // -|x|² for rows 1, 2, 4 and 0 for rows 3, 5; the diagonal is 0
    let table = MuTable::by_row(vec![neg.clone(), neg.clone(), MuFunction::Zero, neg, MuFunction::Zero]).unwrap();
    let mut rng = StdRng::seed_from_u64(7);
    let samples: Vec<Vec<f64>> = (0..10_000).map(|_| in_ball(&mut rng, 2, 10.0)).collect();
    let chk = check_mu_table(&table, 2, &samples);
    verdict(
        7,
        chk.ok,
        format!("origin {}, diagonal {}, {} triangle violations", chk.origin_ok, chk.diagonal_ok, chk.triangle_violations),
    );
}

#[test]
fn criterion_08_law_and_monitor_agree() {
    let s = scenario("two_mode_law.toml");
    let built = s.build().unwrap();
    let SwitchingPolicy::StateLaw { law, .. } = &built.policy else { panic!("switch-law scenario") };
    let mut rng = StdRng::seed_from_u64(8);
    let samples: Vec<Vec<f64>> = (0..2_000).map(|_| in_ball(&mut rng, 2, 5.0)).collect();
    let thm = check_law_conditions(law, &built.system, &BetaTable::zeros(2), &samples).unwrap();
    let tr = simulate(&built.system, &built.policy, &built.x0, &built.cfg).unwrap();
    let s1 = condition_i_sum(&tr, &built.lyapunov, Projection::Identity).unwrap();
    let s2 = condition_ii_sum(&tr, &built.lyapunov, Projection::Identity).unwrap();
    let mu_max = law.mu().max_abs_on(&samples);
    let ok = thm.pass && tr.mode_intervals().len() >= 2 && s2.prefix_max <= 1e-6 && s1.prefix_max <= mu_max + 1e-6;
    verdict(
        8,
        ok,
        format!(
            "side conditions {}, {} activations, (i) prefix max {:.3e}, (ii) prefix max {:.3e}, max |mu| {mu_max}",
            thm.pass,
            tr.mode_intervals().len(),
            s1.prefix_max,
            s2.prefix_max
        ),
    );
}

type C = (f64, f64);

fn cmul(a: C, b: C) -> C {
    (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)
}

fn cdiv(a: C, b: C) -> C {
    let d = b.0 * b.0 + b.1 * b.1;
    ((a.0 * b.0 + a.1 * b.1) / d, (a.1 * b.0 - a.0 * b.1) / d)
}

/// Roots of a monic polynomial (highest degree first) by simultaneous iteration.
fn durand_kerner(p: &[f64]) -> Vec<C> {
    let n = p.len() - 1;
    let eval = |z: C| p.iter().fold((0.0, 0.0), |acc, &c| {
        let m = cmul(acc, z);
        (m.0 + c, m.1)
    });
    let radius = 1.0 + p[1..].iter().map(|c| c.abs()).fold(0.0, f64::max);
    let mut z: Vec<C> = (0..n)
        .map(|k| {
            let th = 0.4 + 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            (radius * th.cos(), radius * th.sin())
        })
        .collect();
    for _ in 0..2000 {
        let mut moved = 0.0f64;
        for i in 0..n {
            let mut den = (1.0, 0.0);
            for j in 0..n {
                if i != j {
                    den = cmul(den, (z[i].0 - z[j].0, z[i].1 - z[j].1));
                }
            }
            let step = cdiv(eval(z[i]), den);
            z[i] = (z[i].0 - step.0, z[i].1 - step.1);
            moved = moved.max(step.0.hypot(step.1));
        }
        if moved < 1e-14 {
            break;
        }
    }
    z
}

#[test]
fn criterion_09_hurwitz_oracle() {
    let mut rng = StdRng::seed_from_u64(9);
    let mut disagreements = Vec::new();
    let mut hurwitz = 0;
    for trial in 0..1000 {
        let deg = rng.gen_range(1..=6);
        let p: Vec<f64> = if trial % 2 == 0 {
            std::iter::once(1.0).chain((0..deg).map(|_| rng.gen_range(-2.0..10.0))).collect()
        } else {
            // expand roots drawn mostly from the left half plane
            let mut p = vec![1.0];
            let mut left = deg;
            while left > 0 {
                let re = rng.gen_range(-5.0..0.5);
                if left >= 2 && rng.gen_bool(0.5) {
                    let im: f64 = rng.gen_range(0.1..5.0);
                    let (b, c) = (-2.0 * re, re * re + im * im);
                    p = poly_mul(&p, &[1.0, b, c]);
                    left -= 2;
                } else {
                    p = poly_mul(&p, &[1.0, -re]);
                    left -= 1;
                }
            }
            p
        };
        let roots = durand_kerner(&p);
        let oracle = roots.iter().all(|r| r.0 < 0.0);
        let margin = roots.iter().map(|r| r.0.abs()).fold(f64::INFINITY, f64::min);
        let got = is_hurwitz_poly(&p).unwrap();
        // the companion matrix is the object whose eigenvalues decide
        assert_eq!(companion_matrix(&p).unwrap().nrows(), p.len() - 1);
        if got != oracle && margin > 1e-9 {
            disagreements.push(p.clone());
        }
        hurwitz += usize::from(got);
    }
    let quad = is_hurwitz_poly(&[1.0, 10.0, 20.0]).unwrap();
    verdict(
        9,
        disagreements.is_empty() && quad,
        format!("{} disagreements in 10^3 polynomials ({hurwitz} Hurwitz), s^2 + 10s + 20 Hurwitz = {quad}", disagreements.len()),
    );
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

#[test]
fn criterion_10_dwell_and_budget_on_certified_runs() {
    let runs: Vec<(&str, Option<Vec<f64>>)> = vec![
        ("scalar_hybrid.toml", None),
        ("scalar_hybrid.toml", Some(vec![0.5])),
        ("scalar_hybrid.toml", Some(vec![-0.8])),
        ("scalar_fts.toml", None),
        ("example1.toml", None),
    ];
    let mut certified = 0;
    let mut failures = Vec::new();
    for (name, x0) in runs {
        let s = scenario(name);
        let out = execute(&s, &RunOptions { x0: x0.clone(), ..RunOptions::default() }).unwrap();
        let Some(cert) = out.certificate.filter(|c| c.certified) else { continue };
        certified += 1;
        let inputs = s.build().unwrap().certificate.unwrap();
        let tr = out.trajectory.unwrap();
        let t_d = inputs.dwell_time;
        if cert.activation_count as f64 > cert.gamma / t_d {
            failures.push(format!("{name} {x0:?}: M = {} > gamma/t_d", cert.activation_count));
        }
        let ivs = tr.mode_intervals();
        for iv in &ivs[..ivs.len() - 1] {
            if iv.mode == inputs.fts_mode && iv.jump_free_len() < t_d - tr.dt() - 1e-12 {
                failures.push(format!("{name} {x0:?}: jump-free piece {} < t_d - dt", iv.jump_free_len()));
            }
        }
        if out.exit_code != exit::OK {
            failures.push(format!("{name}: exit {}", out.exit_code));
        }
    }
    verdict(10, certified > 0 && failures.is_empty(), format!("{certified} certified runs, failures {failures:?}"));
}
