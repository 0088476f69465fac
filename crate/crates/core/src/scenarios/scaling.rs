use std::time::{Duration, Instant};

use crate::Result;

use super::config::{ScenarioConfig, ScenarioKind, WalkerSpec};
use super::constellation::run_constellation;

pub const SCALING_DURATION_S: f64 = 3600.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingRow {
    pub satellites: usize,
    /// Fastest of the repeats.
    pub wall_s: f64,
    pub per_satellite_s: f64,
}

/// Times a short constellation run at each size. Sizes keep the plane count
/// of `base` and add satellites per plane.
pub fn run_scaling(base: &ScenarioConfig, sizes: &[usize], repeats: usize) -> Result<Vec<ScalingRow>> {
    let walker = base.walker.unwrap_or(WalkerSpec {
        total_satellites: 16,
        planes: 4,
        altitude_m: 550e3,
        inclination_deg: 10.0,
    });
    let mut configs = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let mut config = base.clone();
        config.kind = ScenarioKind::Constellation;
        config.duration_s = Some(SCALING_DURATION_S);
        config.log = None;
        config.spacecraft.clear();
        config.walker = Some(WalkerSpec {
            total_satellites: n,
            ..walker
        });
        config.validate()?;
        configs.push(config);
    }
    // repeats cycle through all sizes so slow drift in host speed hits each size alike
    let mut best = vec![Duration::MAX; sizes.len()];
    for _ in 0..repeats.max(1) {
        for (config, best) in configs.iter().zip(&mut best) {
            let start = Instant::now();
            run_constellation(config)?;
            *best = (*best).min(start.elapsed());
        }
    }
    let rows = sizes
        .iter()
        .zip(best)
        .map(|(&n, best)| {
            let wall_s = best.as_secs_f64();
            ScalingRow {
                satellites: n,
                wall_s,
                per_satellite_s: wall_s / n as f64,
            }
        })
        .collect();
    Ok(rows)
}

/// Largest relative spread of per-satellite cost, `max / min - 1`.
pub fn per_satellite_spread(rows: &[ScalingRow]) -> f64 {
    let costs = rows.iter().map(|r| r.per_satellite_s);
    let max = costs.clone().fold(f64::NEG_INFINITY, f64::max);
    let min = costs.fold(f64::INFINITY, f64::min);
    max / min - 1.0
}
