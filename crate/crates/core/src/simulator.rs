//! Fixed-step explicit Euler simulation of hybrid systems with mode and jump bookkeeping.

use alloc::boxed::Box;
use alloc::collections::VecDeque;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::math::norm;
use crate::policy::{largest_jump_free_piece, Projection, SwitchingPolicy, TimeTable};
use crate::switchlaw::{classify_crossing, SurfaceCrossing};
use crate::system::HybridSystem;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub dt: f64,
    pub t_end: f64,
    pub stop_norm: f64,
    pub zeno_window: f64,
    pub zeno_max_jumps: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self { dt: 1e-3, t_end: 10.0, stop_norm: 1e-10, zeno_window: 1.0, zeno_max_jumps: 1000 }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(invalid("sim config: dt must be positive"));
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return Err(invalid("sim config: t_end must be finite and nonnegative"));
        }
        if !(self.stop_norm >= 0.0) {
            return Err(invalid("sim config: stop_norm must be nonnegative"));
        }
        if !(self.zeno_window > 0.0) || self.zeno_max_jumps == 0 {
            return Err(invalid("sim config: zeno guard needs a positive window and at least one jump"));
        }
        Ok(())
    }

    /// Grid index at which an event scheduled at `t` fires: the first grid point `≥ t`.
    pub fn fire_index(&self, t: f64) -> u64 {
        let k = libm::ceil(t / self.dt - 1e-9);
        if k <= 0.0 {
            0
        } else {
            k as u64
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// `‖x‖ ≤ stop_norm`.
    Converged,
    /// `t_end` reached.
    Horizon,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JumpEvent {
    pub t: f64,
    pub jump_index: usize,
    /// Flow mode active when the jump happened.
    pub mode: usize,
    pub x_before: Vec<f64>,
    pub x_after: Vec<f64>,
    /// Index of the post-jump sample.
    pub sample: usize,
}

/// One activation `T_{i_k} = [start, end)` of a flow mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeInterval {
    pub mode: usize,
    pub start: f64,
    pub end: f64,
    /// First sample of the interval and one past the last.
    pub start_sample: usize,
    pub end_sample: usize,
    /// Largest sub-interval with no jump in its interior, `(start, end)`.
    pub jump_free: (f64, f64),
}

impl ModeInterval {
    pub fn len(&self) -> f64 {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn jump_free_len(&self) -> f64 {
        self.jump_free.1 - self.jump_free.0
    }
}

/// A borrowed sample `(t, j, mode, x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample<'a> {
    pub t: f64,
    pub j: usize,
    pub mode: usize,
    pub x: &'a [f64],
}

#[derive(Debug, Clone, PartialEq)]
pub struct HybridTrajectory {
    dim: usize,
    n_flows: usize,
    dt: f64,
    t_end: f64,
    times: Vec<f64>,
    js: Vec<usize>,
    modes: Vec<usize>,
    states: Vec<f64>,
    jumps: Vec<JumpEvent>,
    intervals: Vec<ModeInterval>,
    stop: StopReason,
    tail: Option<TimeTable>,
}

impl HybridTrajectory {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_flows(&self) -> usize {
        self.n_flows
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Requested horizon.
    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn sample(&self, k: usize) -> Sample<'_> {
        Sample { t: self.times[k], j: self.js[k], mode: self.modes[k], x: self.x(k) }
    }

    pub fn samples(&self) -> impl Iterator<Item = Sample<'_>> + '_ {
        (0..self.len()).map(move |k| self.sample(k))
    }

    pub fn t(&self, k: usize) -> f64 {
        self.times[k]
    }

    pub fn x(&self, k: usize) -> &[f64] {
        &self.states[k * self.dim..(k + 1) * self.dim]
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn jump_events(&self) -> &[JumpEvent] {
        &self.jumps
    }

    pub fn mode_intervals(&self) -> &[ModeInterval] {
        &self.intervals
    }

    pub fn stop_reason(&self) -> StopReason {
        self.stop
    }

    pub fn converged(&self) -> bool {
        self.stop == StopReason::Converged
    }

    /// Time of the last sample.
    pub fn t_stop(&self) -> f64 {
        *self.times.last().unwrap_or(&0.0)
    }

    pub fn initial_state(&self) -> &[f64] {
        self.x(0)
    }

    pub fn final_state(&self) -> &[f64] {
        self.x(self.len() - 1)
    }

    /// Remaining schedule from the stop time to the horizon, when the run stopped early.
    pub fn tail(&self) -> Option<&TimeTable> {
        self.tail.as_ref()
    }

    /// First sample time at which `‖projection(x)‖ ≤ threshold`.
    pub fn first_time_below(&self, threshold: f64, projection: Projection) -> Option<f64> {
        let mut buf = Vec::with_capacity(self.dim);
        (0..self.len()).find_map(|k| {
            projection.apply_into(self.x(k), &mut buf);
            (norm(&buf) <= threshold).then(|| self.times[k])
        })
    }
}

/// Bookkeeping of one mode over a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeTimeline {
    pub intervals: Vec<(f64, f64)>,
    pub jump_times: Vec<f64>,
    pub jump_free: Vec<(f64, f64)>,
    pub cumulative_jump_free: f64,
}

pub fn mode_timeline(traj: &HybridTrajectory, mode: usize) -> Result<ModeTimeline> {
    if traj.is_empty() {
        return Err(invalid("mode_timeline: empty trajectory"));
    }
    if mode >= traj.n_flows {
        return Err(invalid(alloc::format!("mode_timeline: mode {} out of range", mode + 1)));
    }
    let ivs: Vec<&ModeInterval> = traj.intervals.iter().filter(|iv| iv.mode == mode).collect();
    Ok(ModeTimeline {
        intervals: ivs.iter().map(|iv| (iv.start, iv.end)).collect(),
        jump_times: traj.jumps.iter().filter(|e| e.mode == mode).map(|e| e.t).collect(),
        jump_free: ivs.iter().map(|iv| iv.jump_free).collect(),
        cumulative_jump_free: ivs.iter().map(|iv| iv.jump_free_len()).sum(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DwellCheck {
    pub ok: bool,
    pub never_active: bool,
    /// `(1-based activation number, jump-free length)` of the first short activation.
    pub first_violation: Option<(usize, f64)>,
    /// Completed activations of the mode that were checked.
    pub checked: usize,
}

/// Every completed jump-free activation of `mode` must last at least `t_d − dt`.
///
/// An activation still running when the simulation stopped is not checked.
pub fn check_dwell(traj: &HybridTrajectory, mode: usize, t_d: f64) -> DwellCheck {
    let last = traj.intervals.len().saturating_sub(1);
    let mut out = DwellCheck { ok: true, never_active: true, first_violation: None, checked: 0 };
    let mut number = 0;
    for (k, iv) in traj.intervals.iter().enumerate() {
        if iv.mode != mode {
            continue;
        }
        out.never_active = false;
        number += 1;
        if k == last {
            continue;
        }
        out.checked += 1;
        let len = iv.jump_free_len();
        if len < t_d - traj.dt - 1e-12 && out.first_violation.is_none() {
            out.ok = false;
            out.first_violation = Some((number, len));
        }
    }
    out
}

struct Recorder {
    dim: usize,
    times: Vec<f64>,
    js: Vec<usize>,
    modes: Vec<usize>,
    states: Vec<f64>,
    jumps: Vec<JumpEvent>,
    /// `(mode, start grid index, start sample)`.
    open: Vec<(usize, u64, usize)>,
}

impl Recorder {
    fn push(&mut self, t: f64, j: usize, mode: usize, x: &[f64]) {
        self.times.push(t);
        self.js.push(j);
        self.modes.push(mode);
        self.states.extend_from_slice(x);
    }

    fn switch_mode(&mut self, mode: usize, k: u64) {
        let sample = self.times.len();
        if let Some(last) = self.open.last_mut() {
            if last.1 == k {
                // Zero-length activation: overwrite, and fold into the previous one if equal.
                self.open.pop();
                if self.open.last().map(|l| l.0) == Some(mode) {
                    return;
                }
                self.open.push((mode, k, sample));
                return;
            }
            if last.0 == mode {
                return;
            }
        }
        self.open.push((mode, k, sample));
    }

    fn finish(
        self,
        n_flows: usize,
        cfg: &SimConfig,
        stop: StopReason,
        tail: Option<TimeTable>,
    ) -> HybridTrajectory {
        let t_stop = *self.times.last().unwrap_or(&0.0);
        let n_samples = self.times.len();
        let jump_times: Vec<f64> = self.jumps.iter().map(|e| e.t).collect();
        let intervals = self
            .open
            .iter()
            .enumerate()
            .map(|(idx, &(mode, k0, s0))| {
                let start = k0 as f64 * cfg.dt;
                let (end, end_sample) = match self.open.get(idx + 1) {
                    Some(&(_, k1, s1)) => (k1 as f64 * cfg.dt, s1),
                    None => (t_stop, n_samples),
                };
                let jf = largest_jump_free_piece(start, end, jump_times.iter().copied());
                ModeInterval {
                    mode,
                    start,
                    end,
                    start_sample: s0,
                    end_sample,
                    jump_free: (jf.0, jf.0 + jf.1),
                }
            })
            .collect();
        HybridTrajectory {
            dim: self.dim,
            n_flows,
            dt: cfg.dt,
            t_end: cfg.t_end,
            times: self.times,
            js: self.js,
            modes: self.modes,
            states: self.states,
            jumps: self.jumps,
            intervals,
            stop,
            tail,
        }
    }
}

/// Simulates `sys` under `policy` from `x0`.
///
/// Per grid point `t_k = k·dt`: apply any flow switch due, record the sample, apply any
/// scheduled jump (recording the post-jump sample with `j + 1`), stop if
/// `‖x‖ ≤ stop_norm` or `t_k ≥ t_end`, otherwise take one Euler step.
pub fn simulate(
    sys: &HybridSystem,
    policy: &SwitchingPolicy,
    x0: &[f64],
    cfg: &SimConfig,
) -> Result<HybridTrajectory> {
    cfg.validate()?;
    let n = sys.dim();
    if x0.len() != n {
        return Err(invalid(alloc::format!("simulate: x0 has {} entries, system has {n}", x0.len())));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(invalid("simulate: x0 is not finite"));
    }
    let initial_mode = match policy {
        SwitchingPolicy::TimeTable(tt) => {
            if tt.max_mode() >= sys.n_flows() {
                return Err(invalid("simulate: time table references an unknown flow mode"));
            }
            if tt.max_jump_index().is_some_and(|j| j >= sys.n_jumps()) {
                return Err(invalid("simulate: time table references an unknown jump map"));
            }
            if tt.start() > 0.0 {
                return Err(invalid("simulate: time table must start at t = 0"));
            }
            tt.mode_at(0.0)
        }
        SwitchingPolicy::StateLaw { law, initial_mode } => {
            if law.n_modes() != sys.n_flows() || *initial_mode >= sys.n_flows() {
                return Err(invalid("simulate: switch law and system disagree on the modes"));
            }
            law.projection().validate(n)?;
            *initial_mode
        }
    };

    let k_end = cfg.fire_index(cfg.t_end);
    let mut rec = Recorder {
        dim: n,
        times: Vec::new(),
        js: Vec::new(),
        modes: Vec::new(),
        states: Vec::new(),
        jumps: Vec::new(),
        open: Vec::new(),
    };
    let mut x = x0.to_vec();
    let mut dx = alloc::vec![0.0; n];
    let mut xn = alloc::vec![0.0; n];
    let mut mode = initial_mode;
    let mut j = 0usize;
    let mut k_enter = 0u64;
    let mut next_segment = 1usize;
    let mut next_jump = 0usize;
    let mut recent: VecDeque<f64> = VecDeque::new();
    rec.switch_mode(mode, 0);

    let tail_of = |t: f64, mode: usize| -> Option<TimeTable> {
        match policy {
            SwitchingPolicy::TimeTable(tt) => Some(tt.tail(t, cfg.t_end)),
            SwitchingPolicy::StateLaw { .. } => {
                TimeTable::new(alloc::vec![(t, mode)], Vec::new(), cfg.t_end.max(t)).ok()
            }
        }
    };

    let mut k: u64 = 0;
    loop {
        let t = k as f64 * cfg.dt;

        // Flow switch.
        match policy {
            SwitchingPolicy::TimeTable(tt) => {
                let segs = tt.segments();
                while next_segment < segs.len() && cfg.fire_index(segs[next_segment].0) <= k {
                    mode = segs[next_segment].1;
                    next_segment += 1;
                }
                rec.switch_mode(mode, k);
            }
            SwitchingPolicy::StateLaw { law, .. } => {
                if k > 0 {
                    let elapsed = (k - k_enter) as f64 * cfg.dt;
                    let next = law.next_mode(mode, &x, elapsed);
                    if next != mode {
                        if classify_crossing(law, sys, mode, next, &x)? == SurfaceCrossing::Sliding {
                            return Err(Error::Sliding { t, from: mode + 1, to: next + 1 });
                        }
                        mode = next;
                        k_enter = k;
                        rec.switch_mode(mode, k);
                    }
                }
            }
        }

        rec.push(t, j, mode, &x);

        // Jumps: scheduled ones first, then any forced by leaving the flow set.
        let mut apply_jump = |g: usize, x: &mut Vec<f64>, j: &mut usize, rec: &mut Recorder| -> Result<()> {
            while recent.front().is_some_and(|&s| s <= t - cfg.zeno_window) {
                recent.pop_front();
            }
            recent.push_back(t);
            if recent.len() > cfg.zeno_max_jumps {
                return Err(Error::Zeno { t, jumps: recent.len(), window: cfg.zeno_window });
            }
            sys.jump(g, x, &mut xn);
            let before = core::mem::replace(x, xn.clone());
            *j += 1;
            rec.push(t, *j, mode, x);
            rec.jumps.push(JumpEvent {
                t,
                jump_index: g,
                mode,
                x_before: before,
                x_after: x.clone(),
                sample: rec.times.len() - 1,
            });
            Ok(())
        };
        if let SwitchingPolicy::TimeTable(tt) = policy {
            let jumps = tt.jumps();
            while next_jump < jumps.len() && cfg.fire_index(jumps[next_jump].0) <= k {
                let g = jumps[next_jump].1;
                next_jump += 1;
                if sys.jump_set().contains(&x) {
                    apply_jump(g, &mut x, &mut j, &mut rec)?;
                }
            }
        }
        while !sys.flow_set().contains(&x) {
            if sys.n_jumps() > 0 && sys.jump_set().contains(&x) {
                apply_jump(0, &mut x, &mut j, &mut rec)?;
            } else {
                return Err(Error::OutsideDomain { t });
            }
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(diverged(rec, sys, cfg, t, tail_of(t, mode)));
        }

        if norm(&x) <= cfg.stop_norm {
            let tail = tail_of(t, mode);
            return Ok(rec.finish(sys.n_flows(), cfg, StopReason::Converged, tail));
        }
        if k >= k_end {
            return Ok(rec.finish(sys.n_flows(), cfg, StopReason::Horizon, None));
        }

        sys.flow(mode, &x, &mut dx);
        for (xi, di) in x.iter_mut().zip(&dx) {
            *xi += cfg.dt * di;
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(diverged(rec, sys, cfg, t, tail_of(t, mode)));
        }
        k += 1;
    }
}

fn diverged(
    rec: Recorder,
    sys: &HybridSystem,
    cfg: &SimConfig,
    t: f64,
    tail: Option<TimeTable>,
) -> Error {
    let partial = rec.finish(sys.n_flows(), cfg, StopReason::Horizon, tail);
    Error::Diverged { t, partial: Box::new(partial) }
}
