//! Central bodies that actors orbit or sit on.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Mean sidereal day in seconds.
pub const SIDEREAL_DAY_S: f64 = 86164.0905;

/// Earth rotation rate, one revolution per [`SIDEREAL_DAY_S`].
pub const EARTH_ROTATION_RATE: f64 = std::f64::consts::TAU / SIDEREAL_DAY_S;

/// A spherical central body together with the constants the thermal model
/// needs for its infrared emission and albedo.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentralBody {
    pub name: String,
    /// Sphere radius used for occlusion and infrared flux, meters.
    pub radius_m: f64,
    /// Equatorial radius that orbit altitudes are measured from, meters.
    pub equatorial_radius_m: f64,
    /// Gravitational parameter, m³/s².
    pub mu: f64,
    /// Rotation rate about +z, rad/s.
    pub rotation_rate: f64,
    #[serde(rename = "surface_temperature_K")]
    pub surface_temperature_k: f64,
    pub infrared_emissivity: f64,
    pub solar_reflectance: f64,
}

impl CentralBody {
    /// Earth with volumetric mean radius and a 288 K, ε = 0.6, ρ = 0.3 surface.
    pub fn earth() -> Self {
        Self {
            name: "earth".to_owned(),
            radius_m: 6_371_000.0,
            equatorial_radius_m: 6_378_137.0,
            mu: 3.986_004_418e14,
            rotation_rate: EARTH_ROTATION_RATE,
            surface_temperature_k: 288.0,
            infrared_emissivity: 0.6,
            solar_reflectance: 0.3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius_m > 0.0) || !(self.equatorial_radius_m > 0.0) {
            return Err(Error::invalid("central body", "radius must be positive"));
        }
        if !(self.mu > 0.0) {
            return Err(Error::invalid(
                "central body",
                "gravitational parameter must be positive",
            ));
        }
        if !(0.0..=1.0).contains(&self.infrared_emissivity)
            || !(0.0..=1.0).contains(&self.solar_reflectance)
        {
            return Err(Error::invalid(
                "central body",
                "emissivity and reflectance must lie in [0, 1]",
            ));
        }
        if !(self.surface_temperature_k >= 0.0) {
            return Err(Error::invalid(
                "central body",
                "surface temperature must be non-negative",
            ));
        }
        Ok(())
    }
}

impl Default for CentralBody {
    fn default() -> Self {
        Self::earth()
    }
}
