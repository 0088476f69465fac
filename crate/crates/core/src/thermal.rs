//! Single-node spacecraft thermal model.
//!
//! The spacecraft is one isothermal lump of mass `m` and specific heat `c`
//! exchanging heat with the Sun, the central body's albedo and infrared
//! emission, its own electronics, and deep space:
//!
//! ```text
//! m c dT/dt = Q_solar + Q_albedo + Q_ir + Q_activity − Q_diss
//! ```
//!
//! Solar and albedo terms apply only while sunlit. The equation is stepped
//! with explicit Euler and the temperature is clamped at 0 K.

use serde::{Deserialize, Serialize};

use crate::body::CentralBody;
use crate::{Error, Result};

/// Stefan–Boltzmann constant, W·m⁻²·K⁻⁴.
pub const STEFAN_BOLTZMANN: f64 = 5.670_374_419e-8;

/// Constant thermal parameters of a spacecraft.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalProperties {
    pub mass_kg: f64,
    /// Specific heat capacity, J·kg⁻¹·K⁻¹.
    pub thermal_capacity: f64,
    pub solar_absorptance: f64,
    pub infrared_absorptance: f64,
    pub area_facing_sun_m2: f64,
    pub area_facing_albedo_m2: f64,
    pub area_facing_body_m2: f64,
    pub emissive_area_m2: f64,
    /// Fraction of consumed electrical power that ends up as heat.
    pub power_to_heat_ratio: f64,
    /// Solar irradiance at the spacecraft, W·m⁻².
    pub solar_irradiance: f64,
}

impl ThermalProperties {
    pub fn validate(&self) -> Result<()> {
        if !(self.mass_kg > 0.0) || !(self.thermal_capacity > 0.0) {
            return Err(Error::invalid(
                "thermal properties",
                "mass and thermal capacity must be positive",
            ));
        }
        let areas = [
            self.area_facing_sun_m2,
            self.area_facing_albedo_m2,
            self.area_facing_body_m2,
            self.emissive_area_m2,
        ];
        if areas.iter().any(|a| !(*a >= 0.0)) {
            return Err(Error::invalid("thermal properties", "areas must be non-negative"));
        }
        let ratios = [
            self.solar_absorptance,
            self.infrared_absorptance,
            self.power_to_heat_ratio,
        ];
        if ratios.iter().any(|r| !(0.0..=1.0).contains(r)) {
            return Err(Error::invalid(
                "thermal properties",
                "absorptances and power-to-heat ratio must lie in [0, 1]",
            ));
        }
        if !(self.solar_irradiance >= 0.0) {
            return Err(Error::invalid(
                "thermal properties",
                "solar irradiance must be non-negative",
            ));
        }
        Ok(())
    }

    /// Heat capacity of the whole spacecraft, J/K.
    pub fn heat_capacity(&self) -> f64 {
        self.mass_kg * self.thermal_capacity
    }
}

/// Current temperature together with the constants that drive it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalState {
    pub temperature_k: f64,
    pub properties: ThermalProperties,
}

impl ThermalState {
    pub fn new(temperature_k: f64, properties: ThermalProperties) -> Result<Self> {
        properties.validate()?;
        if !(temperature_k >= 0.0) {
            return Err(Error::invalid("thermal state", "temperature must be >= 0 K"));
        }
        Ok(Self {
            temperature_k,
            properties,
        })
    }
}

/// The five heat flows of one step, watts.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HeatFluxes {
    pub solar: f64,
    pub albedo: f64,
    pub infrared: f64,
    pub activity: f64,
    pub dissipation: f64,
}

impl HeatFluxes {
    /// Net heat flow into the spacecraft.
    pub fn net(&self) -> f64 {
        self.solar + self.albedo + self.infrared + self.activity - self.dissipation
    }
}

pub fn heat_fluxes(
    state: &ThermalState,
    sunlit: bool,
    distance_to_body_center_m: f64,
    activity_power_w: f64,
    body: &CentralBody,
) -> HeatFluxes {
    let p = &state.properties;
    let (solar, albedo) = if sunlit {
        (
            p.solar_absorptance * p.solar_irradiance * p.area_facing_sun_m2,
            0.5 * p.solar_absorptance * body.solar_reflectance * p.solar_irradiance * p.area_facing_albedo_m2,
        )
    } else {
        (0.0, 0.0)
    };
    let infrared = body.radius_m.powi(2)
        * p.infrared_absorptance
        * body.infrared_emissivity
        * STEFAN_BOLTZMANN
        * body.surface_temperature_k.powi(4)
        * p.area_facing_body_m2
        / distance_to_body_center_m.powi(2);
    let activity = p.power_to_heat_ratio * activity_power_w;
    let dissipation =
        p.infrared_absorptance * p.emissive_area_m2 * STEFAN_BOLTZMANN * state.temperature_k.powi(4);
    HeatFluxes {
        solar,
        albedo,
        infrared,
        activity,
        dissipation,
    }
}

/// One explicit Euler step of `dt` seconds.
pub fn step_temperature(state: &ThermalState, fluxes: &HeatFluxes, dt: f64) -> ThermalState {
    let dtemp = dt * fluxes.net() / state.properties.heat_capacity();
    ThermalState {
        temperature_k: (state.temperature_k + dtemp).max(0.0),
        properties: state.properties,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Constellation satellite: 50 kg, unit absorptances, 2/2/2/4 m² areas.
    fn constellation_sat(temperature_k: f64) -> ThermalState {
        ThermalState::new(
            temperature_k,
            ThermalProperties {
                mass_kg: 50.0,
                thermal_capacity: 1000.0,
                solar_absorptance: 1.0,
                infrared_absorptance: 1.0,
                area_facing_sun_m2: 2.0,
                area_facing_albedo_m2: 2.0,
                area_facing_body_m2: 2.0,
                emissive_area_m2: 4.0,
                power_to_heat_ratio: 0.5,
                solar_irradiance: 1360.0,
            },
        )
        .unwrap()
    }

    const R_ORBIT: f64 = 6_928_137.0;

    #[test]
    fn eclipse_with_cold_idle_spacecraft_only_sees_infrared() {
        let f = heat_fluxes(&constellation_sat(0.0), false, R_ORBIT, 0.0, &CentralBody::earth());
        assert_eq!(f.solar, 0.0);
        assert_eq!(f.albedo, 0.0);
        assert_eq!(f.activity, 0.0);
        assert_eq!(f.dissipation, 0.0);
        assert!(f.infrared > 0.0);
    }

    #[test]
    fn sunlit_fluxes_at_constellation_parameters() {
        let f = heat_fluxes(&constellation_sat(273.15), true, R_ORBIT, 100.0, &CentralBody::earth());
        assert!((f.solar - 2720.0).abs() < 1e-9);
        assert!((f.albedo - 408.0).abs() < 1e-9);
        assert!((f.activity - 50.0).abs() < 1e-12);
        // single-expression oracle: 6371000²·1·0.6·σ·288⁴·2 / 6928137²
        let expected_ir = 6_371_000.0_f64.powi(2) * 0.6 * 5.670_374_419e-8 * 288.0_f64.powi(4) * 2.0
            / R_ORBIT.powi(2);
        assert!((expected_ir - 395.863).abs() < 1e-3, "{expected_ir}");
        assert!((f.infrared - expected_ir).abs() < 1e-9);
    }

    #[test]
    fn zero_net_flux_keeps_temperature() {
        let s = constellation_sat(300.0);
        let next = step_temperature(&s, &HeatFluxes::default(), 10.0);
        assert_eq!(next.temperature_k, 300.0);
    }

    #[test]
    fn radiative_equilibrium() {
        // 300 W absorbed, ε = 1, A_b = 4 m²: T_eq = (300 / (4σ))^¼
        let mut s = constellation_sat(150.0);
        s.properties.mass_kg = 1.0;
        let t_eq = (300.0 / (4.0 * STEFAN_BOLTZMANN)).powf(0.25);
        assert!((t_eq - 190.7).abs() < 0.05, "{t_eq}");
        for _ in 0..200_000 {
            let mut f = heat_fluxes(&s, false, R_ORBIT, 0.0, &CentralBody::earth());
            f.infrared = 300.0;
            s = step_temperature(&s, &f, 1.0);
        }
        assert!((s.temperature_k - t_eq).abs() < 0.1);
    }

    #[test]
    fn full_sun_processing_heats_up_initially() {
        let s = constellation_sat(273.15);
        let f = heat_fluxes(&s, true, R_ORBIT, 100.0, &CentralBody::earth());
        assert!(f.net() > 0.0);
        assert!(step_temperature(&s, &f, 1.0).temperature_k > 273.15);
    }

    #[test]
    fn rejects_invalid_properties() {
        let mut p = constellation_sat(0.0).properties;
        p.mass_kg = 0.0;
        assert!(p.validate().is_err());
        let mut p = constellation_sat(0.0).properties;
        p.power_to_heat_ratio = 1.1;
        assert!(p.validate().is_err());
        let mut p = constellation_sat(0.0).properties;
        p.emissive_area_m2 = -1.0;
        assert!(p.validate().is_err());
        assert!(ThermalState::new(-1.0, constellation_sat(0.0).properties).is_err());
    }

    proptest! {
        #[test]
        fn temperature_never_negative(
            t0 in 0.0f64..1000.0,
            steps in prop::collection::vec((any::<bool>(), 0.0f64..1e4, 0.1f64..100.0), 1..50),
        ) {
            let mut s = constellation_sat(t0);
            s.properties.mass_kg = 0.01;
            for (sunlit, power, dt) in steps {
                let f = heat_fluxes(&s, sunlit, R_ORBIT, power, &CentralBody::earth());
                s = step_temperature(&s, &f, dt);
                prop_assert!(s.temperature_k >= 0.0);
            }
        }

        #[test]
        fn ratio_irrelevant_without_activity(kappa in 0.0f64..=1.0, sunlit in any::<bool>()) {
            let mut a = constellation_sat(280.0);
            let b = a;
            a.properties.power_to_heat_ratio = kappa;
            let fa = heat_fluxes(&a, sunlit, R_ORBIT, 0.0, &CentralBody::earth());
            let fb = heat_fluxes(&b, sunlit, R_ORBIT, 0.0, &CentralBody::earth());
            prop_assert_eq!(fa, fb);
        }

        #[test]
        fn approach_to_equilibrium_is_monotone(q_in in 100.0f64..3000.0, offset in -50.0f64..50.0) {
            let mut s = constellation_sat(0.0);
            let t_eq = (q_in / (4.0 * STEFAN_BOLTZMANN)).powf(0.25);
            s.temperature_k = t_eq + offset;
            let mut gap = (s.temperature_k - t_eq).abs();
            for _ in 0..2000 {
                let mut f = heat_fluxes(&s, false, R_ORBIT, 0.0, &CentralBody::earth());
                f.infrared = q_in;
                s = step_temperature(&s, &f, 1.0);
                let g = (s.temperature_k - t_eq).abs();
                prop_assert!(g <= gap + 1e-12);
                gap = g;
            }
        }
    }
}
