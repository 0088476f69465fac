use std::f64::consts::TAU;

use crate::astro::OrbitState;
use crate::body::CentralBody;
use crate::epoch::Epoch;
use crate::{Error, Result};

/// Circular orbits in `planes` planes equally spaced in RAAN, with the
/// satellites of each plane equally spaced in true anomaly. Plane-major order.
pub fn generate_walker(
    total: usize,
    planes: usize,
    altitude_m: f64,
    inclination_deg: f64,
    body: &CentralBody,
    epoch: Epoch,
) -> Result<Vec<OrbitState>> {
    if planes == 0 || total == 0 || total % planes != 0 {
        return Err(Error::invalid(
            "walker",
            format!("{total} satellites cannot be split evenly into {planes} planes"),
        ));
    }
    let per_plane = total / planes;
    let mut out = Vec::with_capacity(total);
    for p in 0..planes {
        let raan = TAU * p as f64 / planes as f64;
        for s in 0..per_plane {
            let nu = TAU * s as f64 / per_plane as f64;
            out.push(OrbitState::circular(
                altitude_m,
                inclination_deg.to_radians(),
                raan,
                nu,
                epoch,
                body.clone(),
            )?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vec3;

    fn walker(total: usize, planes: usize) -> Result<Vec<OrbitState>> {
        generate_walker(total, planes, 550e3, 10.0, &CentralBody::earth(), Epoch::J2000)
    }

    #[test]
    fn sixteen_in_four_planes() {
        let w = walker(16, 4).unwrap();
        assert_eq!(w.len(), 16);
        for (k, o) in w.iter().enumerate() {
            let (p, s) = (k / 4, k % 4);
            assert!((o.raan.to_degrees() - 90.0 * p as f64).abs() < 1e-9);
            assert!((o.true_anomaly.to_degrees() - 90.0 * s as f64).abs() < 1e-9);
            assert_eq!(o.eccentricity, 0.0);
            assert_eq!(o.semi_major_axis, 6_378_137.0 + 550e3);
            assert!((o.inclination.to_degrees() - 10.0).abs() < 1e-12);
        }
    }

    #[test]
    fn single_satellite() {
        let w = walker(1, 1).unwrap();
        assert_eq!(w.len(), 1);
        assert_eq!((w[0].raan, w[0].true_anomaly), (0.0, 0.0));
    }

    #[test]
    fn indivisible_counts_rejected() {
        assert!(walker(10, 4).is_err());
        assert!(walker(4, 0).is_err());
    }

    #[test]
    fn in_plane_separation_is_constant() {
        let w = walker(16, 4).unwrap();
        let angle = |a: [f64; 3], b: [f64; 3]| (vec3::dot(a, b) / (vec3::norm(a) * vec3::norm(b))).clamp(-1.0, 1.0).acos();
        for k in 0..10 {
            let t = Epoch::J2000 + 997.0 * k as f64;
            for plane in 0..4 {
                let p0 = w[plane * 4].propagate(t).unwrap().position;
                let p1 = w[plane * 4 + 1].propagate(t).unwrap().position;
                assert!((angle(p0, p1).to_degrees() - 90.0).abs() < 1e-6);
            }
        }
    }
}
