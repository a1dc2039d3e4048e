//! Analysis and simulation of a roadside RF energy-harvesting device (EHD)
//! that scavenges energy from passing vehicles' transmissions and relays
//! data packets to a remote access point.
//!
//! The device alternates between a harvest phase (while the nearest vehicle
//! is within a tunable harvest distance) and a transmit phase. The crate
//! computes, for Poisson and platooning (fixed-spacing) traffic:
//!
//! * the distribution of the energy harvested per cycle ([`energy_cdf`]),
//! * the steady state of the quantized battery Markov chain ([`battery_chain`]),
//! * throughput, incident RF power density and energy efficiency ([`metrics`]),
//! * the per-cycle black-out (stale-data) probability ([`blackout`]),
//! * a slot-level Monte Carlo simulator used as ground truth ([`simulator`]),
//! * parameter sweeps and figure-style experiment recipes ([`sweep`]).
//!
//! All analysis entry points are pure functions of an immutable [`scenario::Scenario`];
//! the simulator is deterministic given its seed.

pub mod battery_chain;
pub mod blackout;
pub mod energy_cdf;
pub mod error;
pub mod metrics;
pub mod numerics;
pub mod scenario;
pub mod simulator;
pub mod sweep;

pub use error::{Error, Result};
pub use scenario::{FadingModel, Scenario, ScenarioParams, TrafficModel};
