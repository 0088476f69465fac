//! The simulation engine.
//!
//! A [`Simulation`] owns a set of actors and one master clock. User work is
//! expressed as [`Activity`] values whose action is called in bounded slices;
//! between slices the engine advances every physical model and evaluates the
//! activity's constraint. Time can also be advanced directly with
//! [`Simulation::advance_time`], optionally stopping at the first step where
//! an interrupt condition holds.

mod activity;
mod engine;
mod log;

pub use activity::{Activity, ActivityOutcome, Progress, View};
pub use engine::{Mode, Profile, Simulation, SimulationConfig};
pub use log::{read_log, EventKind, EventLog, LogRecord, LOG_HEADER};
