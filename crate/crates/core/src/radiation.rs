//! Single event effects as independent Poisson processes: bit flips in
//! data, interruptions of the running activity, and permanent device
//! failure.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Event rates in events per second plus the scenario seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiationConfig {
    pub data_corruption_rate: f64,
    pub interruption_rate: f64,
    pub failure_rate: f64,
    pub seed: u64,
}

impl RadiationConfig {
    pub fn validate(&self) -> Result<()> {
        let rates = [
            self.data_corruption_rate,
            self.interruption_rate,
            self.failure_rate,
        ];
        if rates.iter().any(|r| !(*r >= 0.0) || !r.is_finite()) {
            return Err(Error::invalid("radiation config", "rates must be finite and >= 0"));
        }
        Ok(())
    }
}

/// Evolving radiation state of one actor.
#[derive(Debug, Clone)]
pub struct RadiationState {
    pub failed: bool,
    pub cumulative_bitflips: u64,
    rng: ChaCha8Rng,
}

impl RadiationState {
    pub fn from_seed(seed: u64) -> Self {
        Self {
            failed: false,
            cumulative_bitflips: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Generator seeded from `scenario_seed ^ fnv1a(actor_id)` so that an
    /// actor's stream does not depend on the order actors are created in.
    pub fn for_actor(scenario_seed: u64, actor_id: &str) -> Self {
        Self::from_seed(scenario_seed ^ fnv1a(actor_id.as_bytes()))
    }

    pub fn rng_mut(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

/// Radiation configuration and state attached to an actor.
#[derive(Debug, Clone)]
pub struct RadiationModel {
    pub config: RadiationConfig,
    pub state: RadiationState,
}

impl RadiationModel {
    pub fn new(config: RadiationConfig, actor_id: &str) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            state: RadiationState::for_actor(config.seed, actor_id),
        })
    }
}

impl PartialEq for RadiationModel {
    fn eq(&self, other: &Self) -> bool {
        self.config == other.config
            && self.state.failed == other.state.failed
            && self.state.cumulative_bitflips == other.state.cumulative_bitflips
    }
}

/// Events drawn for one interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RadiationEvents {
    pub bitflips: u64,
    pub interrupted: bool,
    pub failed_now: bool,
}

pub(crate) fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Draws a Poisson(λ) count: CDF inversion below λ = 10, rounded normal
/// approximation above.
pub fn sample_poisson<R: Rng + ?Sized>(rng: &mut R, lambda: f64) -> u64 {
    if lambda <= 0.0 {
        // still consume one draw so the stream position is rate-independent
        let _: f64 = rng.random();
        return 0;
    }
    if lambda < 10.0 {
        let u: f64 = rng.random();
        let mut k = 0u64;
        let mut p = (-lambda).exp();
        let mut cdf = p;
        while u > cdf {
            k += 1;
            p *= lambda / k as f64;
            cdf += p;
            if p == 0.0 {
                break;
            }
        }
        k
    } else {
        let z: f64 = rng.sample(StandardNormal);
        (lambda + lambda.sqrt() * z).round().max(0.0) as u64
    }
}

/// Samples all three processes over `dt` seconds, in the fixed order
/// corruption, interruption, failure. With all rates zero no numbers are
/// drawn.
pub fn sample_events(
    state: &mut RadiationState,
    config: &RadiationConfig,
    dt: f64,
) -> Result<RadiationEvents> {
    if state.failed {
        return Err(Error::DeviceFailed);
    }
    if config.data_corruption_rate == 0.0 && config.interruption_rate == 0.0 && config.failure_rate == 0.0 {
        // an inert model draws nothing
        return Ok(RadiationEvents::default());
    }
    let bitflips = sample_poisson(&mut state.rng, config.data_corruption_rate * dt);
    let interrupted = sample_poisson(&mut state.rng, config.interruption_rate * dt) >= 1;
    let failed_now = sample_poisson(&mut state.rng, config.failure_rate * dt) >= 1;
    state.cumulative_bitflips += bitflips;
    state.failed = failed_now;
    Ok(RadiationEvents {
        bitflips,
        interrupted,
        failed_now,
    })
}

/// Flips `bitflips` uniformly chosen bit positions (with replacement).
pub fn corrupt_buffer<R: Rng + ?Sized>(buffer: &[u8], bitflips: u64, rng: &mut R) -> Result<Vec<u8>> {
    let mut out = buffer.to_vec();
    if bitflips == 0 {
        return Ok(out);
    }
    if buffer.is_empty() {
        return Err(Error::invalid("corrupt_buffer", "cannot flip bits of an empty buffer"));
    }
    let n_bits = buffer.len() as u64 * 8;
    for _ in 0..bitflips {
        let pos = rng.random_range(0..n_bits);
        out[(pos / 8) as usize] ^= 1 << (pos % 8);
    }
    Ok(out)
}
