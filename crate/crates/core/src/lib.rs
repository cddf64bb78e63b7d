//! Simulation and certification of finite-time stability for switched and hybrid
//! systems whose individual modes may be unstable.
//!
//! The crate is `no_std` (with `alloc`); enable the `std` feature when linking into a
//! standard binary.

#![cfg_attr(not(feature = "std"), no_std)]
// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod builtin;
pub mod error;
pub mod gk;
pub mod inequality;
pub mod linplant;
pub mod lyapunov;
pub mod math;
pub mod monitor;
pub mod policy;
pub mod simulator;
pub mod switchlaw;
pub mod system;

pub use error::{Error, Result};
pub use gk::{check_gk, GkFunction};
pub use lyapunov::{LyapunovFunction, LyapunovSet};
pub use monitor::{certify, CertificateInputs, CertificateReport};
pub use policy::{PhasedSchedule, Projection, SwitchingPolicy, TimeTable};
pub use simulator::{simulate, HybridTrajectory, SimConfig};
pub use switchlaw::{MuFunction, MuTable, SwitchLaw};
pub use system::{HybridSystem, Region};
