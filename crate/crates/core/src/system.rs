//! Hybrid systems: flows on a flow set, jump maps on a jump set.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{invalid, Result};

/// A map `R^n → R^n` writing into `out`. Used for both flows and jump maps.
pub trait VectorField: Send + Sync {
    fn eval(&self, x: &[f64], out: &mut [f64]);
}

impl<F> VectorField for F
where
    F: Fn(&[f64], &mut [f64]) + Send + Sync,
{
    fn eval(&self, x: &[f64], out: &mut [f64]) {
        self(x, out)
    }
}

pub type Field = Arc<dyn VectorField>;

/// Wraps a closure as a shared field.
pub fn field<F>(f: F) -> Field
where
    F: Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
{
    Arc::new(f)
}

pub type Predicate = Arc<dyn Fn(&[f64]) -> bool + Send + Sync>;

/// A state predicate (flow set or jump set).
#[derive(Clone)]
pub enum Region {
    All,
    Empty,
    Custom(Predicate),
}

impl Region {
    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Region::All => true,
            Region::Empty => false,
            Region::Custom(p) => p(x),
        }
    }
}

impl fmt::Debug for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Region::All => f.write_str("All"),
            Region::Empty => f.write_str("Empty"),
            Region::Custom(_) => f.write_str("Custom"),
        }
    }
}

/// Tolerance for the equilibrium check `f_i(0) = 0`, `g_j(0) = 0`.
pub const ORIGIN_TOL: f64 = 1e-12;

#[derive(Clone)]
pub struct HybridSystem {
    dim: usize,
    flows: Vec<Field>,
    jumps: Vec<Field>,
    flow_set: Region,
    jump_set: Region,
}

impl fmt::Debug for HybridSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HybridSystem")
            .field("dim", &self.dim)
            .field("flows", &self.flows.len())
            .field("jumps", &self.jumps.len())
            .field("flow_set", &self.flow_set)
            .field("jump_set", &self.jump_set)
            .finish()
    }
}

impl HybridSystem {
    /// Builds the system and checks that the origin is an equilibrium of every flow and
    /// a fixed point of every jump map.
    pub fn new(
        dim: usize,
        flows: Vec<Field>,
        jumps: Vec<Field>,
        flow_set: Region,
        jump_set: Region,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("hybrid system: dimension must be at least 1"));
        }
        if flows.is_empty() {
            return Err(invalid("hybrid system: at least one flow is required"));
        }
        let zero = alloc::vec![0.0; dim];
        let mut out = alloc::vec![0.0; dim];
        for (i, f) in flows.iter().enumerate() {
            f.eval(&zero, &mut out);
            if out.iter().any(|v| !(v.abs() <= ORIGIN_TOL)) {
                return Err(invalid(alloc::format!("flow {} does not vanish at the origin", i + 1)));
            }
        }
        for (j, g) in jumps.iter().enumerate() {
            g.eval(&zero, &mut out);
            if out.iter().any(|v| !(v.abs() <= ORIGIN_TOL)) {
                return Err(invalid(alloc::format!("jump map {} does not fix the origin", j + 1)));
            }
        }
        let jump_set = if jumps.is_empty() { Region::Empty } else { jump_set };
        Ok(Self { dim, flows, jumps, flow_set, jump_set })
    }

    /// Jump-free switched system: `C = R^n`, `D = ∅`.
    pub fn switched(dim: usize, flows: Vec<Field>) -> Result<Self> {
        Self::new(dim, flows, Vec::new(), Region::All, Region::Empty)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_flows(&self) -> usize {
        self.flows.len()
    }

    pub fn n_jumps(&self) -> usize {
        self.jumps.len()
    }

    pub fn flow_set(&self) -> &Region {
        &self.flow_set
    }

    pub fn jump_set(&self) -> &Region {
        &self.jump_set
    }

    /// `out = f_i(x)`. Panics if `i` is out of range.
    pub fn flow(&self, i: usize, x: &[f64], out: &mut [f64]) {
        self.flows[i].eval(x, out)
    }

    /// `out = g_j(x)`. Panics if `j` is out of range.
    pub fn jump(&self, j: usize, x: &[f64], out: &mut [f64]) {
        self.jumps[j].eval(x, out)
    }

    pub fn flow_vec(&self, i: usize, x: &[f64]) -> Vec<f64> {
        let mut out = alloc::vec![0.0; self.dim];
        self.flow(i, x, &mut out);
        out
    }

    pub fn jump_vec(&self, j: usize, x: &[f64]) -> Vec<f64> {
        let mut out = alloc::vec![0.0; self.dim];
        self.jump(j, x, &mut out);
        out
    }
}
