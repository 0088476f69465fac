//! Battery state-of-charge accounting.
//!
//! Solar panels add energy at a constant rate whenever the spacecraft is
//! sunlit; activities draw energy at their constant power. The level is
//! clamped to `[0, capacity]`.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Battery {
    pub capacity_j: f64,
    pub level_j: f64,
    pub charging_rate_w: f64,
}

impl Battery {
    pub fn new(capacity_j: f64, level_j: f64, charging_rate_w: f64) -> Result<Self> {
        let b = Self {
            capacity_j,
            level_j,
            charging_rate_w,
        };
        b.validate()?;
        Ok(b)
    }

    /// Battery initialised at a given state of charge.
    pub fn with_state_of_charge(capacity_j: f64, soc: f64, charging_rate_w: f64) -> Result<Self> {
        Self::new(capacity_j, soc * capacity_j, charging_rate_w)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.capacity_j > 0.0) {
            return Err(Error::invalid("battery", "capacity must be positive"));
        }
        if !(0.0..=self.capacity_j).contains(&self.level_j) {
            return Err(Error::invalid(
                "battery",
                format!("level {} J outside [0, {}]", self.level_j, self.capacity_j),
            ));
        }
        if !(self.charging_rate_w >= 0.0) {
            return Err(Error::invalid("battery", "charging rate must be non-negative"));
        }
        Ok(())
    }

    pub fn state_of_charge(&self) -> f64 {
        self.level_j / self.capacity_j
    }
}

/// Charges at the constant panel rate if sunlit; no-op in eclipse.
pub fn charge(battery: &Battery, sunlit: bool, dt: f64) -> Battery {
    let mut b = *battery;
    if sunlit {
        b.level_j = (b.level_j + b.charging_rate_w * dt).min(b.capacity_j);
    }
    b
}

/// Draws `activity_power_w` for `dt` seconds. The flag reports whether the
/// level had to be clamped at zero.
pub fn discharge(battery: &Battery, activity_power_w: f64, dt: f64) -> (Battery, bool) {
    let mut b = *battery;
    let level = b.level_j - activity_power_w * dt;
    let depleted = level < 0.0;
    b.level_j = level.max(0.0);
    (b, depleted)
}
