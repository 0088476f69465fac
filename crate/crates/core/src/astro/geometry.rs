//! Shadow and occlusion tests against the central body's sphere.

use crate::body::CentralBody;
use crate::vec3::{self, Vec3};

/// Cylindrical-umbra eclipse test.
///
/// The spacecraft is shadowed when it lies on the night side of the body
/// and within one body radius of the anti-Sun axis.
pub fn is_in_eclipse(sc_position: Vec3, sun_position: Vec3, body: &CentralBody) -> bool {
    let sun_dir = vec3::scale(sun_position, 1.0 / vec3::norm(sun_position));
    let along = vec3::dot(sc_position, sun_dir);
    if along >= 0.0 {
        return false;
    }
    let perpendicular = vec3::sub(sc_position, vec3::scale(sun_dir, along));
    vec3::norm(perpendicular) < body.radius_m
}

/// Whether the segment between two points clears the body's sphere.
pub fn line_of_sight(p1: Vec3, p2: Vec3, body: &CentralBody) -> bool {
    line_of_sight_with_margin(p1, p2, body, 0.0)
}

/// [`line_of_sight`] against a sphere enlarged by `margin_m` (e.g. an
/// atmosphere grazing height).
pub fn line_of_sight_with_margin(p1: Vec3, p2: Vec3, body: &CentralBody, margin_m: f64) -> bool {
    // canonical endpoint order keeps the result bit-identical under swapping
    let (a, b) = if p1.partial_cmp(&p2) == Some(std::cmp::Ordering::Greater) {
        (p2, p1)
    } else {
        (p1, p2)
    };
    let d = vec3::sub(b, a);
    let len2 = vec3::dot(d, d);
    let t = if len2 > 0.0 {
        (-vec3::dot(a, d) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let closest = vec3::add(a, vec3::scale(d, t));
    vec3::norm(closest) >= body.radius_m + margin_m
}
