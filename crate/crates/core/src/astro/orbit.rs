use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::body::CentralBody;
use crate::epoch::Epoch;
use crate::vec3::{self, Vec3};
use crate::{Error, Result};

pub const KEPLER_TOLERANCE: f64 = 1e-12;
pub const KEPLER_MAX_ITERATIONS: u32 = 50;

/// Position and velocity in the central body's inertial frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    pub position: Vec3,
    pub velocity: Vec3,
}

impl StateVector {
    pub fn radius(&self) -> f64 {
        vec3::norm(self.position)
    }

    pub fn speed(&self) -> f64 {
        vec3::norm(self.velocity)
    }

    /// Specific orbital energy v²/2 − μ/r.
    pub fn specific_energy(&self, mu: f64) -> f64 {
        0.5 * vec3::dot(self.velocity, self.velocity) - mu / self.radius()
    }

    /// Magnitude of the specific angular momentum r × v.
    pub fn angular_momentum(&self) -> f64 {
        vec3::norm(vec3::cross(self.position, self.velocity))
    }
}

/// Classical Keplerian elements of an elliptical orbit plus the epoch at
/// which `true_anomaly` holds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitState {
    pub semi_major_axis: f64,
    pub eccentricity: f64,
    pub inclination: f64,
    pub raan: f64,
    pub argument_of_periapsis: f64,
    pub true_anomaly: f64,
    pub epoch: Epoch,
    pub central_body: CentralBody,
}

fn wrap_angle(x: f64) -> f64 {
    let w = x.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if w >= TAU {
        0.0
    } else {
        w
    }
}

impl OrbitState {
    /// Builds and validates an orbit. Angles are in radians and normalized
    /// to `[0, 2π)`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        semi_major_axis: f64,
        eccentricity: f64,
        inclination: f64,
        raan: f64,
        argument_of_periapsis: f64,
        true_anomaly: f64,
        epoch: Epoch,
        central_body: CentralBody,
    ) -> Result<Self> {
        let orbit = Self {
            semi_major_axis,
            eccentricity,
            inclination: wrap_angle(inclination),
            raan: wrap_angle(raan),
            argument_of_periapsis: wrap_angle(argument_of_periapsis),
            true_anomaly: wrap_angle(true_anomaly),
            epoch,
            central_body,
        };
        orbit.validate()?;
        Ok(orbit)
    }

    /// Circular orbit at `altitude_m` above the body's equatorial radius.
    pub fn circular(
        altitude_m: f64,
        inclination: f64,
        raan: f64,
        true_anomaly: f64,
        epoch: Epoch,
        central_body: CentralBody,
    ) -> Result<Self> {
        let a = central_body.equatorial_radius_m + altitude_m;
        Self::new(a, 0.0, inclination, raan, 0.0, true_anomaly, epoch, central_body)
    }

    pub fn validate(&self) -> Result<()> {
        self.central_body.validate()?;
        if !(self.semi_major_axis > 0.0) || !self.semi_major_axis.is_finite() {
            return Err(Error::invalid("orbit", "semi-major axis must be positive"));
        }
        if !(0.0..1.0).contains(&self.eccentricity) {
            return Err(Error::invalid(
                "orbit",
                format!("eccentricity {} outside [0, 1)", self.eccentricity),
            ));
        }
        for (name, v) in [
            ("inclination", self.inclination),
            ("raan", self.raan),
            ("argument of periapsis", self.argument_of_periapsis),
            ("true anomaly", self.true_anomaly),
        ] {
            if !(0.0..TAU).contains(&v) {
                return Err(Error::invalid("orbit", format!("{name} {v} not in [0, 2π)")));
            }
        }
        Ok(())
    }

    pub fn mean_motion(&self) -> f64 {
        (self.central_body.mu / self.semi_major_axis.powi(3)).sqrt()
    }

    pub fn period(&self) -> f64 {
        TAU / self.mean_motion()
    }

    /// Specific orbital energy −μ/(2a).
    pub fn specific_energy(&self) -> f64 {
        -self.central_body.mu / (2.0 * self.semi_major_axis)
    }

    /// Specific angular momentum √(μ a (1 − e²)).
    pub fn angular_momentum(&self) -> f64 {
        (self.central_body.mu * self.semi_major_axis * (1.0 - self.eccentricity.powi(2))).sqrt()
    }

    fn mean_anomaly_at_epoch(&self) -> f64 {
        let e = self.eccentricity;
        let half = 0.5 * self.true_anomaly;
        let ecc_anomaly = 2.0 * ((1.0 - e).sqrt() * half.sin()).atan2((1.0 + e).sqrt() * half.cos());
        ecc_anomaly - e * ecc_anomaly.sin()
    }

    /// Exact two-body state at `t` (past or future).
    pub fn propagate(&self, t: Epoch) -> Result<StateVector> {
        let e = self.eccentricity;
        let a = self.semi_major_axis;
        let mu = self.central_body.mu;
        let mean = wrap_angle(self.mean_anomaly_at_epoch() + self.mean_motion() * (t - self.epoch));
        let ecc = solve_kepler(mean, e)?;
        let (sin_e, cos_e) = ecc.sin_cos();
        let b = (1.0 - e * e).sqrt();
        let r = a * (1.0 - e * cos_e);
        let pos_pf = [a * (cos_e - e), a * b * sin_e];
        let k = (mu * a).sqrt() / r;
        let vel_pf = [-k * sin_e, k * b * cos_e];

        let (so, co) = self.raan.sin_cos();
        let (sw, cw) = self.argument_of_periapsis.sin_cos();
        let (si, ci) = self.inclination.sin_cos();
        // perifocal P and Q axes in the inertial frame
        let p = [co * cw - so * sw * ci, so * cw + co * sw * ci, sw * si];
        let q = [-co * sw - so * cw * ci, -so * sw + co * cw * ci, cw * si];
        let combine = |u: [f64; 2]| vec3::add(vec3::scale(p, u[0]), vec3::scale(q, u[1]));
        Ok(StateVector {
            position: combine(pos_pf),
            velocity: combine(vel_pf),
        })
    }
}

/// Solves Kepler's equation `M = E − e sin E` for the eccentric anomaly by
/// Newton–Raphson.
pub fn solve_kepler(mean_anomaly: f64, eccentricity: f64) -> Result<f64> {
    let m = mean_anomaly;
    let e = eccentricity;
    let mut ecc = if e < 0.8 { m } else { PI };
    let mut step = f64::INFINITY;
    for _ in 0..KEPLER_MAX_ITERATIONS {
        let f = ecc - e * ecc.sin() - m;
        let fp = 1.0 - e * ecc.cos();
        step = f / fp;
        ecc -= step;
        if step.abs() < KEPLER_TOLERANCE {
            return Ok(ecc);
        }
    }
    Err(Error::KeplerNonConvergence {
        mean_anomaly: m,
        eccentricity: e,
        last_step: step.abs(),
        iterations: KEPLER_MAX_ITERATIONS,
    })
}
