//! Simulation time as seconds since J2000 (2000-01-01T12:00:00).

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Sub};

use chrono::{DateTime, NaiveDate, Utc};
use serde::{Deserialize, Serialize};

/// Seconds since the J2000 reference epoch.
///
/// UTC inputs are mapped onto this scale without leap-second or TT
/// corrections; the offset is a constant ~69 s and irrelevant at the
/// fidelity of the models here.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Epoch(f64);

pub const SECONDS_PER_DAY: f64 = 86_400.0;

impl Epoch {
    pub const J2000: Epoch = Epoch(0.0);

    pub const fn from_j2000_seconds(s: f64) -> Self {
        Epoch(s)
    }

    pub const fn j2000_seconds(self) -> f64 {
        self.0
    }

    pub fn days_since_j2000(self) -> f64 {
        self.0 / SECONDS_PER_DAY
    }

    pub fn from_utc(t: DateTime<Utc>) -> Self {
        let reference = NaiveDate::from_ymd_opt(2000, 1, 1)
            .and_then(|d| d.and_hms_opt(12, 0, 0))
            .expect("valid reference date")
            .and_utc();
        let delta = t - reference;
        let whole = delta.num_seconds() as f64;
        let frac = (delta - chrono::Duration::seconds(delta.num_seconds()))
            .num_nanoseconds()
            .unwrap_or(0) as f64
            * 1e-9;
        Epoch(whole + frac)
    }

    /// Parses an RFC 3339 timestamp such as `2022-10-27T12:30:00Z`.
    pub fn parse_rfc3339(s: &str) -> Result<Self, chrono::ParseError> {
        Ok(Self::from_utc(DateTime::parse_from_rfc3339(s)?.with_timezone(&Utc)))
    }
}

impl Eq for Epoch {}

impl PartialOrd for Epoch {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Epoch {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl Add<f64> for Epoch {
    type Output = Epoch;
    fn add(self, rhs: f64) -> Epoch {
        Epoch(self.0 + rhs)
    }
}

impl AddAssign<f64> for Epoch {
    fn add_assign(&mut self, rhs: f64) {
        self.0 += rhs;
    }
}

impl Sub for Epoch {
    type Output = f64;
    fn sub(self, rhs: Epoch) -> f64 {
        self.0 - rhs.0
    }
}

impl Sub<f64> for Epoch {
    type Output = Epoch;
    fn sub(self, rhs: f64) -> Epoch {
        Epoch(self.0 - rhs)
    }
}

impl fmt::Display for Epoch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}
