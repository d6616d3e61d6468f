//! Gateway diversity for Q/V-band satellite feeder links.
//!
//! Two gateways share one feeder uplink; only one transmits in any slot.
//! The crate evaluates how often the link is in outage and how often the
//! active gateway changes under spatially correlated lognormal rain fading,
//! for modified switch-and-stay (MSSC), switch-and-stay (SSC), selection
//! (SC), single-gateway and maximum-ratio (MRC) operation.
//!
//! * [`channel_model`] - fading statistics and correlated sampling.
//! * [`analytic`] - integrated outage probabilities, uplink and end-to-end.
//! * [`switching`] - per-slot scheme rules and the six-state Markov chain.
//! * [`simulation`] - Monte Carlo harness used as an independent oracle.
//! * [`link_budget`] - clear-sky SNR from link-budget entries.

pub mod analytic;
pub mod channel_model;
pub mod error;
pub mod link_budget;
pub mod quadrature;
pub mod simulation;
pub mod switching;

pub use error::{Error, Result};

/// Version of this library.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
