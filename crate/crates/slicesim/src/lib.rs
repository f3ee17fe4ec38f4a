//! Performance toolkit for sliced multi-path erasure networks.
//!
//! A network is a pool of parallel erasure links partitioned into disjoint
//! slices, each serving one application with either an un-coded
//! selective-repeat ARQ protocol or a coded RLNC protocol. The crate provides:
//!
//! - [`analytic`]: closed-form expected delivery delay and goodput for both
//!   protocols, plus the full delay and missing-degrees-of-freedom
//!   distributions behind them.
//! - [`sim`]: a deterministic, seeded, time-slotted simulator measuring
//!   delivery delay, in-order delivery delay, goodput, and completion time.
//! - [`planner`]: minimum-resource computation per application requirement and
//!   feasible partition search over a shared link pool.
//! - [`presets`]: canned scenarios with reference values and tolerances for
//!   one-command reproduction runs.

pub mod analytic;
pub mod planner;
pub mod presets;
pub mod sim;

mod error;

pub use error::{ConfigError, SimError};
