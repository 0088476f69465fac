//! Low-precision analytic solar ephemeris.
//!
//! Mean longitude and mean anomaly are linear in time; the ecliptic
//! longitude adds a two-term equation of center, general precession is
//! removed to refer it to the J2000 equinox, and the result is rotated into
//! the equatorial frame by the J2000 mean obliquity. Direction error stays
//! below 0.02° from 1930 to 2100.

use super::orbit::StateVector;
use crate::epoch::Epoch;
use crate::vec3::{self, Vec3};

/// Astronomical unit in meters.
pub const AU_M: f64 = 149_597_870_700.0;

const J2000_OBLIQUITY_DEG: f64 = 23.439_291;
/// General precession in longitude, 1.396971° per Julian century.
const PRECESSION_DEG_PER_DAY: f64 = 1.396_971 / 36_525.0;

fn position_at(days: f64) -> Vec3 {
    let mean_longitude = (280.460 + 0.985_647_4 * days).to_radians();
    let mean_anomaly = (357.528 + 0.985_600_3 * days).to_radians();
    let ecliptic_longitude = mean_longitude
        + 1.915_f64.to_radians() * mean_anomaly.sin()
        + 0.020_f64.to_radians() * (2.0 * mean_anomaly).sin();
    let ecliptic_longitude = ecliptic_longitude - PRECESSION_DEG_PER_DAY.to_radians() * days;
    let obliquity = J2000_OBLIQUITY_DEG.to_radians();
    let distance_au =
        1.000_14 - 0.016_71 * mean_anomaly.cos() - 0.000_14 * (2.0 * mean_anomaly).cos();
    let r = distance_au * AU_M;
    let (sl, cl) = ecliptic_longitude.sin_cos();
    let (se, ce) = obliquity.sin_cos();
    [r * cl, r * ce * sl, r * se * sl]
}

/// Geocentric position (and finite-difference velocity) of the Sun.
pub fn sun_position(t: Epoch) -> StateVector {
    const H: f64 = 60.0;
    let days = t.days_since_j2000();
    let position = position_at(days);
    let ahead = position_at(days + H / 86_400.0);
    let behind = position_at(days - H / 86_400.0);
    StateVector {
        position,
        velocity: vec3::scale(vec3::sub(ahead, behind), 0.5 / H),
    }
}

/// Unit vector from the central body toward the Sun.
pub fn sun_direction(t: Epoch) -> Vec3 {
    let p = position_at(t.days_since_j2000());
    vec3::scale(p, 1.0 / vec3::norm(p))
}
