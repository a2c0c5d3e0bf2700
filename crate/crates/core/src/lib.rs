//! Decentralized routing between two parallel queues whose controllers
//! signal to each other only through their routing actions.
//!
//! * [`model`]: queue dynamics, primitive randomness and holding costs.
//! * [`belief`]: the common-information filter (beliefs, support bounds,
//!   thresholds).
//! * [`policy`]: the threshold policy `ĝ`, the no-routing policy `g₀` and
//!   the mean-threshold policy `g̃`.
//! * [`exact`]: exact finite-horizon costs by enumeration and the
//!   centralized dynamic program.
//! * [`steady`]: average-cost analysis through stationary distributions.
//! * [`coupling`]: pathwise coupling of `ĝ` against uncontrolled queues.
//! * [`harness`]: Monte Carlo runs, traces, configuration and reports.

pub mod belief;
pub mod coupling;
pub mod error;
pub mod exact;
pub mod harness;
pub mod model;
pub mod policy;
pub mod steady;

pub use belief::{CommonInfo, Interval, Pmf, SupportBounds, Threshold};
pub use error::{Error, Result};
pub use model::{Convention, CostFn, CostModel, ModelParams, Primitives, SystemState};
pub use policy::{Policy, PolicyKind};
