//! Astrodynamics: two-body propagation, the Sun's geocentric position,
//! eclipse and line-of-sight geometry, and ground-station elevation.
//!
//! All positions are expressed in a single inertial equatorial frame
//! centered on the central body (J2000 axes).

mod geometry;
mod orbit;
mod station;
mod sun;

pub use geometry::{is_in_eclipse, line_of_sight, line_of_sight_with_margin};
pub use orbit::{solve_kepler, OrbitState, StateVector, KEPLER_MAX_ITERATIONS, KEPLER_TOLERANCE};
pub use station::{
    geodetic_to_body_fixed, greenwich_sidereal_angle, ground_station_elevation,
    station_inertial_position, WGS84_A, WGS84_F,
};
pub use sun::{sun_direction, sun_position, AU_M};
