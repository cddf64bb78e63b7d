//! Switching signals: explicit time tables or the state-dependent switching law.

use alloc::vec::Vec;

use crate::error::{invalid, Result};
use crate::switchlaw::SwitchLaw;

/// Piecewise-constant, right-continuous schedule of flow modes plus scheduled jumps.
///
/// `segments[k] = (t_k, mode)` means `mode` is active on `[t_k, t_{k+1})`; the last
/// segment runs to the horizon. Consecutive segments have distinct modes.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeTable {
    segments: Vec<(f64, usize)>,
    jumps: Vec<(f64, usize)>,
    horizon: f64,
}

impl TimeTable {
    pub fn new(segments: Vec<(f64, usize)>, jumps: Vec<(f64, usize)>, horizon: f64) -> Result<Self> {
        if segments.is_empty() {
            return Err(invalid("time table: no segments"));
        }
        if !segments.iter().chain(&jumps).all(|(t, _)| t.is_finite()) || !horizon.is_finite() {
            return Err(invalid("time table: non-finite time"));
        }
        for w in segments.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(invalid(alloc::format!(
                    "time table: segment start {} does not follow {}",
                    w[1].0,
                    w[0].0
                )));
            }
            if w[1].1 == w[0].1 {
                return Err(invalid(alloc::format!(
                    "time table: not minimal, mode {} repeats at t = {}",
                    w[1].1 + 1,
                    w[1].0
                )));
            }
        }
        for w in jumps.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(invalid(alloc::format!(
                    "time table: jumps at {} and {} are not strictly increasing",
                    w[0].0,
                    w[1].0
                )));
            }
        }
        if let Some(&(t, _)) = jumps.first() {
            if t < segments[0].0 {
                return Err(invalid("time table: jump before the first segment"));
            }
        }
        if horizon < segments.last().unwrap().0 {
            return Err(invalid("time table: horizon precedes the last segment"));
        }
        Ok(Self { segments, jumps, horizon })
    }

    /// Builds a minimal table from a possibly non-minimal list by merging repeats.
    pub fn merged(segments: Vec<(f64, usize)>, jumps: Vec<(f64, usize)>, horizon: f64) -> Result<Self> {
        let mut out: Vec<(f64, usize)> = Vec::with_capacity(segments.len());
        for s in segments {
            if out.last().map(|l| l.1) != Some(s.1) {
                out.push(s);
            }
        }
        Self::new(out, jumps, horizon)
    }

    pub fn segments(&self) -> &[(f64, usize)] {
        &self.segments
    }

    pub fn jumps(&self) -> &[(f64, usize)] {
        &self.jumps
    }

    pub fn start(&self) -> f64 {
        self.segments[0].0
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn max_mode(&self) -> usize {
        self.segments.iter().map(|s| s.1).max().unwrap_or(0)
    }

    pub fn max_jump_index(&self) -> Option<usize> {
        self.jumps.iter().map(|j| j.1).max()
    }

    /// Active mode at `t` (right-continuous).
    pub fn mode_at(&self, t: f64) -> usize {
        let k = self.segments.partition_point(|s| s.0 <= t);
        self.segments[k.saturating_sub(1)].1
    }

    /// Segment intervals `[start, end)` with their modes, the last closed by the horizon.
    pub fn intervals(&self) -> impl Iterator<Item = (f64, f64, usize)> + '_ {
        self.segments.iter().enumerate().map(move |(k, &(t, m))| {
            let end = self.segments.get(k + 1).map_or(self.horizon, |s| s.0);
            (t, end, m)
        })
    }

    /// Sum over activations of `mode` of the largest jump-free piece of each activation.
    pub fn jump_free_time(&self, mode: usize) -> f64 {
        self.intervals()
            .filter(|iv| iv.2 == mode)
            .map(|(s, e, _)| largest_jump_free_piece(s, e, self.jumps.iter().map(|j| j.0)).1)
            .sum()
    }

    /// The part of the schedule on `[from, to)`; the last segment is extended to `to`
    /// if the table ends earlier.
    pub fn tail(&self, from: f64, to: f64) -> TimeTable {
        let to = to.max(from);
        let mut segments = alloc::vec![(from, self.mode_at(from))];
        segments.extend(self.segments.iter().copied().filter(|s| s.0 > from && s.0 < to));
        let jumps = self.jumps.iter().copied().filter(|j| j.0 >= from && j.0 < to).collect();
        TimeTable { segments, jumps, horizon: to }
    }

    /// Caps the jump-free activation of `mode` at `budget`: activations are kept in order
    /// while they fit, every later activation is replaced by `replacement`.
    pub fn truncate_mode(&self, mode: usize, budget: f64, replacement: usize) -> Result<TimeTable> {
        if replacement == mode {
            return Err(invalid("truncate_mode: replacement must differ from the truncated mode"));
        }
        if !(budget >= 0.0) {
            return Err(invalid("truncate_mode: budget must be nonnegative"));
        }
        let mut used = 0.0;
        let segments: Vec<(f64, usize)> = self
            .intervals()
            .map(|(s, e, m)| {
                if m != mode {
                    return (s, m);
                }
                let piece = largest_jump_free_piece(s, e, self.jumps.iter().map(|j| j.0)).1;
                if used + piece <= budget + 1e-12 {
                    used += piece;
                    (s, m)
                } else {
                    used = f64::INFINITY;
                    (s, replacement)
                }
            })
            .collect();
        Self::merged(segments, self.jumps.clone(), self.horizon)
    }
}

/// Largest connected piece of `[start, end)` whose interior holds none of `jump_times`.
/// Returns `(piece_start, length)`.
pub fn largest_jump_free_piece(start: f64, end: f64, jump_times: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut cuts: Vec<f64> = alloc::vec![start];
    cuts.extend(jump_times.filter(|&t| t > start && t < end));
    cuts.push(end);
    let mut best = (start, 0.0);
    for w in cuts.windows(2) {
        let len = w[1] - w[0];
        if len > best.1 {
            best = (w[0], len);
        }
    }
    best
}

/// A block of a phased schedule: `modes` repeated `repeat` times.
#[derive(Debug, Clone, PartialEq)]
pub struct Phase {
    pub modes: Vec<usize>,
    pub repeat: usize,
}

/// Schedule built from fixed-length segments: a prefix played once, then a cycle repeated
/// to the horizon, plus periodic jumps.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasedSchedule {
    pub segment: f64,
    pub prefix: Vec<Phase>,
    pub cycle: Vec<Phase>,
    /// Jump period and offset of the first jump; `None` disables jumps.
    pub jump_period: Option<f64>,
    pub jump_offset: f64,
    pub jump_index: usize,
}

impl PhasedSchedule {
    pub fn round_robin(modes: Vec<usize>, segment: f64) -> Self {
        Self {
            segment,
            prefix: Vec::new(),
            cycle: alloc::vec![Phase { modes, repeat: 1 }],
            jump_period: None,
            jump_offset: 0.0,
            jump_index: 0,
        }
    }

    pub fn build(&self, horizon: f64) -> Result<TimeTable> {
        if !(self.segment > 0.0) || !(horizon > 0.0) {
            return Err(invalid("phased schedule: segment length and horizon must be positive"));
        }
        let expand = |phases: &[Phase]| -> Vec<usize> {
            phases.iter().flat_map(|p| (0..p.repeat).flat_map(move |_| p.modes.iter().copied())).collect()
        };
        let prefix = expand(&self.prefix);
        let cycle = expand(&self.cycle);
        if cycle.is_empty() {
            return Err(invalid("phased schedule: the cycle is empty"));
        }
        let count = libm::ceil(horizon / self.segment - 1e-9) as usize;
        let segments = (0..count.max(1))
            .map(|k| {
                let m = if k < prefix.len() { prefix[k] } else { cycle[(k - prefix.len()) % cycle.len()] };
                (k as f64 * self.segment, m)
            })
            .collect();
        let mut jumps = Vec::new();
        if let Some(p) = self.jump_period {
            if !(p > 0.0) || !(self.jump_offset >= 0.0) {
                return Err(invalid("phased schedule: jump period must be positive, offset nonnegative"));
            }
            let mut k = 0usize;
            loop {
                let t = self.jump_offset + k as f64 * p;
                if t >= horizon {
                    break;
                }
                jumps.push((t, self.jump_index));
                k += 1;
            }
        }
        TimeTable::merged(segments, jumps, horizon)
    }
}

/// What part of the simulated state the Lyapunov functions and the switching law see.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Projection {
    #[default]
    Identity,
    /// The first `n` components.
    Head(usize),
    /// `x[..n] − x[n..2n]`, the estimation error of a stacked `(x, x̂)` state.
    Difference(usize),
}

impl Projection {
    pub fn apply_into(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        match *self {
            Projection::Identity => out.extend_from_slice(x),
            Projection::Head(n) => out.extend_from_slice(&x[..n]),
            Projection::Difference(n) => out.extend((0..n).map(|i| x[i] - x[n + i])),
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = Vec::new();
        self.apply_into(x, &mut out);
        out
    }

    /// Gradient with respect to the full state of `h(P(x))`, given `∇h` at `P(x)`.
    pub fn pullback(&self, grad: &[f64], full: usize) -> Vec<f64> {
        let mut out = alloc::vec![0.0; full];
        match *self {
            Projection::Identity => out.copy_from_slice(grad),
            Projection::Head(n) => out[..n].copy_from_slice(&grad[..n]),
            Projection::Difference(n) => {
                for i in 0..n {
                    out[i] = grad[i];
                    out[n + i] = -grad[i];
                }
            }
        }
        out
    }

    /// Dimension of the projected state for a full state of dimension `full`.
    pub fn output_dim(&self, full: usize) -> usize {
        match *self {
            Projection::Identity => full,
            Projection::Head(n) | Projection::Difference(n) => n,
        }
    }

    pub fn validate(&self, full: usize) -> Result<()> {
        let ok = match *self {
            Projection::Identity => true,
            Projection::Head(n) => n >= 1 && n <= full,
            Projection::Difference(n) => n >= 1 && 2 * n <= full,
        };
        if ok {
            Ok(())
        } else {
            Err(invalid(alloc::format!("projection {self:?} does not fit a {full}-dimensional state")))
        }
    }
}

/// The switching signal driving a simulation.
#[derive(Debug, Clone)]
pub enum SwitchingPolicy {
    TimeTable(TimeTable),
    /// Jump-free state feedback switching; starts in `initial_mode`.
    StateLaw { law: SwitchLaw, initial_mode: usize },
}
