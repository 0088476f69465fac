//! Spacecraft operations simulator.
//!
//! Models the physical and operational environment of one or many
//! spacecraft: Keplerian orbits, eclipses, line-of-sight and ground-station
//! visibility, a single-node thermal model, battery state of charge and
//! Poisson-distributed single event effects. An activity runtime interleaves
//! user workloads with physics updates and constraint checks, either as a fast
//! numerical simulation or paced by the wall clock.
//!
//! Module map:
//! - [`body`], [`epoch`], [`actor`]: shared domain types.
//! - [`astro`]: two-body propagation, Sun ephemeris, eclipse and visibility geometry.
//! - [`thermal`], [`power`], [`radiation`]: per-actor physical models.
//! - [`comms`]: communication windows, transmission times, actor serialization.
//! - [`runtime`]: the simulation engine and its CSV event log.
//! - [`scenarios`]: configuration files and the built-in scenarios.

pub mod actor;
pub mod astro;
pub mod body;
pub mod comms;
pub mod epoch;
mod error;
pub mod power;
pub mod radiation;
pub mod runtime;
pub mod scenarios;
pub mod thermal;
pub(crate) mod vec3;

pub use actor::{Actor, ActorKind, GeodeticPosition};
pub use body::CentralBody;
pub use epoch::Epoch;
pub use error::{Error, Result};
