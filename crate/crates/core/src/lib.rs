//! Core library for a deterministic indoor optical wireless link simulator.
//!
//! The modeled system is a room whose ceiling carries a grid of narrow-beam
//! optical transceivers, one per floor cell. Mobile nodes are tracked by
//! ultrasonic time-of-flight trilateration, their whereabouts are managed
//! with a reporting-cell location strategy, and point-to-point sessions are
//! secured with a password-authenticated Diffie-Hellman key agreement.
//!
//! Modules:
//! - [`coverage`] — Gaussian-beam power budget and optical cell dimensioning.
//! - [`positioning`] — ultrasonic trilateration via the radical-axis
//!   construction.
//! - [`location_mgmt`] — reporting-cell location updates and bounded search.
//! - [`key_agreement`] — password-authenticated Diffie-Hellman handshake over
//!   arbitrary-precision integers.
//! - [`sim`] — the discrete-tick world simulation, configuration, and trace
//!   emission.
//!
//! All randomness is injected (seeded generators or explicit RNG handles), so
//! every API in this crate is deterministic given its inputs.

pub mod coverage;
pub mod key_agreement;
pub mod location_mgmt;
pub mod positioning;
pub mod sim;

pub use positioning::Point2D;
