//! Ground-station geometry on the rotating Earth.

use crate::actor::{Actor, GeodeticPosition};
use crate::body::EARTH_ROTATION_RATE;
use crate::epoch::Epoch;
use crate::vec3::{self, Vec3};
use crate::{Error, Result};

/// WGS84 equatorial radius, meters.
pub const WGS84_A: f64 = 6_378_137.0;
/// WGS84 flattening.
pub const WGS84_F: f64 = 1.0 / 298.257_223_563;

const GMST_AT_J2000_DEG: f64 = 280.46;

/// Angle between the inertial x-axis and the Greenwich meridian, linear in time.
pub fn greenwich_sidereal_angle(t: Epoch) -> f64 {
    GMST_AT_J2000_DEG.to_radians() + EARTH_ROTATION_RATE * t.j2000_seconds()
}

/// Body-fixed cartesian position of a geodetic point on the WGS84 ellipsoid.
pub fn geodetic_to_body_fixed(site: &GeodeticPosition) -> Vec3 {
    let e2 = WGS84_F * (2.0 - WGS84_F);
    let (sp, cp) = site.latitude_deg.to_radians().sin_cos();
    let (sl, cl) = site.longitude_deg.to_radians().sin_cos();
    let n = WGS84_A / (1.0 - e2 * sp * sp).sqrt();
    let h = site.elevation_m;
    [(n + h) * cp * cl, (n + h) * cp * sl, (n * (1.0 - e2) + h) * sp]
}

fn rotate_z(v: Vec3, angle: f64) -> Vec3 {
    let (s, c) = angle.sin_cos();
    [c * v[0] - s * v[1], s * v[0] + c * v[1], v[2]]
}

/// Inertial position of a ground site at `t`.
pub fn station_inertial_position(site: &GeodeticPosition, t: Epoch) -> Vec3 {
    rotate_z(geodetic_to_body_fixed(site), greenwich_sidereal_angle(t))
}

pub(crate) fn site_elevation_deg(site: &GeodeticPosition, sc_position: Vec3, t: Epoch) -> f64 {
    let theta = greenwich_sidereal_angle(t);
    let (sp, cp) = site.latitude_deg.to_radians().sin_cos();
    let lon = site.longitude_deg.to_radians() + theta;
    let zenith = [cp * lon.cos(), cp * lon.sin(), sp];
    let station = rotate_z(geodetic_to_body_fixed(site), theta);
    let los = vec3::sub(sc_position, station);
    let sin_el = (vec3::dot(zenith, los) / vec3::norm(los)).clamp(-1.0, 1.0);
    sin_el.asin().to_degrees()
}

/// Elevation of a spacecraft above a ground station's local horizon, degrees.
pub fn ground_station_elevation(station: &Actor, sc_position: Vec3, t: Epoch) -> Result<f64> {
    let site = station.geodetic_position().ok_or_else(|| Error::KindMismatch {
        id: station.id().to_owned(),
        kind: station.kind().name(),
        expected: "ground station",
    })?;
    Ok(site_elevation_deg(site, sc_position, t))
}
