//! Resonant Jaynes-Cummings atom + cavity under repeated ground-state
//! occupancy measurement.
//!
//! The measurement enters the master equation as a double-commutator
//! dissipator with the projector onto `|g', n>`. The crate integrates that
//! equation on the truncated Fock space and on the reduced `{|+>_n, |->_n}`
//! block, evaluates the closed-form coherence `rho_pm(t)` in all three
//! damping regimes, and sweeps the measurement coupling to show that the
//! decoherence rate peaks at `kappa = 4R`.
//!
//! Units: hbar = 1, frequencies in rad/us, times in us.

pub mod analytic;
pub mod cli;
pub mod config;
pub mod cxmat;
pub mod dynamics;
mod error;
pub mod experiments;
pub mod hilbert;

pub use error::{Error, Result};
