//! Individual-based piecewise-deterministic models of consumers whose energy
//! drifts deterministically between births and death, with allometric rates.
//!
//! The entry points are [`rates`] (parameters, flow, regime checks),
//! [`pdmp`] (single-individual trajectories), [`operator`] (the next-generation
//! kernel on a grid), [`population`] (branching simulation with
//! Ulam-Harris labels) and [`stats`] (Monte Carlo estimates and tests).

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod ode;
pub mod operator;
pub mod pdmp;
pub mod population;
pub mod quad;
pub mod rates;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
pub use pdmp::{simulate_trajectory, Caps, Trajectory};
pub use rates::{classify_regime, AllometricParams, RegimeReport, Verdict};
pub use rng::PathStreams;
pub use stats::{estimate_m_mc, EstimateResult};
