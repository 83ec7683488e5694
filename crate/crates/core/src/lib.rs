//! Density-matrix simulation of Grover search under total depolarizing noise,
//! together with two quantum-switch mitigation protocols and the brute-force
//! verification suite that cross-checks every closed form in the crate.
//!
//! Module map:
//! - [`qmath`]: dense complex-matrix kernel, Pauli operator basis, block traces.
//! - [`channels`]: depolarizing channels as explicit Kraus sets.
//! - [`grover`]: Grover operator, ideal and noisy success probabilities.
//! - [`qswitch`]: the switch superchannel and coherent-basis measurement.
//! - [`framework1`]: switch + post-selection after every iteration.
//! - [`framework2`]: a register of switches measured once at the end.
//! - [`verify`]: independent Kraus-sum verifier and report generation.

pub mod channels;
pub mod error;
pub mod framework1;
pub mod framework2;
pub mod grover;
pub mod qmath;
pub mod qswitch;
pub mod verify;

pub use error::{Error, Result};
