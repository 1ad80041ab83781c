//! Force-noise spectra of a hybrid atom–optomechanical force sensor with
//! coherent quantum noise cancellation (CQNC) and squeezed-vacuum injection.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`]: physical parameters, steady state, unit conversions and
//!   validity checks.
//! * [`response`]: complex susceptibilities and the auxiliary functions
//!   built on them.
//! * [`spectra`]: closed-form force-noise spectra and reference limits, all
//!   in dimensionless units of `ħ m ω_m γ_m` per Hz.
//! * [`optimal`]: analytic optima over squeezing, detuning and drive power,
//!   plus derivative-free numeric minimizers used to cross-check them.
//! * [`oracle`]: a brute-force frequency-domain solution of the full
//!   six-variable linearized Langevin system.
//! * [`bench`]: configuration, figure presets, sweeps and CSV/JSON output.

pub mod bench;
pub mod error;
pub mod model;
pub mod optimal;
pub mod oracle;
pub mod response;
pub mod spectra;

pub use error::{Error, Result};
