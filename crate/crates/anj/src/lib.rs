//! Analysis toolkit for a wireless-powered full-duplex cooperative jammer.
//!
//! A friendly jammer with no power supply harvests energy from the source's
//! RF signals, banks it in a discretized hybrid store, and spends it on
//! null-space artificial noise whenever the stored energy and the main
//! channel both allow. This crate provides:
//!
//! - [`specfun`]: the Marcum Q / exponential-integral / incomplete-gamma
//!   kernel the closed forms are built from,
//! - [`channels`]: fading distributions, samplers and the eavesdropper
//!   SINR law,
//! - [`energy_chain`]: the finite-state battery chains (full- and
//!   half-duplex), their stationary distributions, and the
//!   infinite-capacity bound,
//! - [`secrecy`]: closed-form secrecy outage / non-zero secrecy capacity
//!   and the optimal jamming-power search,
//! - [`mc_sim`]: a block-level Monte Carlo simulator that independently
//!   validates every closed form.

pub mod channels;
pub mod energy_chain;
pub mod error;
pub mod mc_sim;
pub mod secrecy;
pub mod specfun;

pub use error::{Error, Result};
