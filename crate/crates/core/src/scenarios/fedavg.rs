//! Two counter-rotating satellites learning a two-circles classifier by
//! local SGD and federated averaging during their brief mutual windows.

use std::cell::Cell;
use std::rc::Rc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::actor::Actor;
use crate::comms::{self, LinkBudget, Window};
use crate::epoch::Epoch;
use crate::power::Battery;
use crate::radiation::fnv1a;
use crate::runtime::{Activity, ActivityOutcome, EventLog, Progress, Simulation, View};
use crate::{Error, Result};

use super::config::{ScenarioConfig, ScenarioKind};

const HIDDEN: usize = 10;
pub const PARAMETER_COUNT: usize = 2 * HIDDEN + HIDDEN + HIDDEN + 1;
/// Parameters travel as 32-bit floats.
pub const MODEL_BITS: u64 = PARAMETER_COUNT as u64 * 32;

pub const STANDBY: &str = "standby";
pub const SHARING: &str = "sharing";
pub const TRAINING: &str = "training";

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// 2-10-1 dense network, sigmoid on both layers.
#[derive(Debug, Clone, PartialEq)]
pub struct TinyNet {
    pub w1: [[f64; HIDDEN]; 2],
    pub b1: [f64; HIDDEN],
    pub w2: [f64; HIDDEN],
    pub b2: f64,
}

pub type Sample = ([f64; 2], f64);

impl TinyNet {
    /// Weights uniform in [-1, 1], biases zero.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let mut net = Self::from_params(&[0.0; PARAMETER_COUNT]);
        for row in &mut net.w1 {
            for w in row {
                *w = rng.random_range(-1.0..=1.0);
            }
        }
        for w in &mut net.w2 {
            *w = rng.random_range(-1.0..=1.0);
        }
        net
    }

    pub fn params(&self) -> Vec<f64> {
        let mut p = Vec::with_capacity(PARAMETER_COUNT);
        p.extend(self.w1.iter().flatten());
        p.extend(self.b1);
        p.extend(self.w2);
        p.push(self.b2);
        p
    }

    pub fn from_params(p: &[f64]) -> Self {
        assert_eq!(p.len(), PARAMETER_COUNT, "parameter count");
        let mut net = Self {
            w1: [[0.0; HIDDEN]; 2],
            b1: [0.0; HIDDEN],
            w2: [0.0; HIDDEN],
            b2: p[PARAMETER_COUNT - 1],
        };
        net.w1[0].copy_from_slice(&p[..HIDDEN]);
        net.w1[1].copy_from_slice(&p[HIDDEN..2 * HIDDEN]);
        net.b1.copy_from_slice(&p[2 * HIDDEN..3 * HIDDEN]);
        net.w2.copy_from_slice(&p[3 * HIDDEN..4 * HIDDEN]);
        net
    }

    /// Little-endian f32 encoding, `MODEL_BITS / 8` bytes.
    pub fn to_bytes(&self) -> Vec<u8> {
        self.params().iter().flat_map(|&x| (x as f32).to_le_bytes()).collect()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() != PARAMETER_COUNT * 4 {
            return Err(Error::invalid("model", format!("expected {} bytes, got {}", PARAMETER_COUNT * 4, bytes.len())));
        }
        let p: Vec<f64> = bytes
            .chunks_exact(4)
            .map(|c| f64::from(f32::from_le_bytes([c[0], c[1], c[2], c[3]])))
            .collect();
        Ok(Self::from_params(&p))
    }

    fn hidden(&self, x: [f64; 2]) -> [f64; HIDDEN] {
        std::array::from_fn(|j| sigmoid(x[0] * self.w1[0][j] + x[1] * self.w1[1][j] + self.b1[j]))
    }

    /// Probability of the outer class.
    pub fn predict(&self, x: [f64; 2]) -> f64 {
        let h = self.hidden(x);
        sigmoid(h.iter().zip(&self.w2).map(|(a, b)| a * b).sum::<f64>() + self.b2)
    }

    pub fn accuracy(&self, data: &[Sample]) -> f64 {
        let correct = data
            .iter()
            .filter(|(x, y)| (self.predict(*x) > 0.5) == (*y > 0.5))
            .count();
        correct as f64 / data.len() as f64
    }

    /// Mean binary cross-entropy.
    pub fn loss(&self, data: &[Sample]) -> f64 {
        let eps = 1e-12;
        data.iter()
            .map(|(x, y)| {
                let p = self.predict(*x).clamp(eps, 1.0 - eps);
                -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
            })
            .sum::<f64>()
            / data.len() as f64
    }

    /// One pass of shuffled mini-batch SGD on binary cross-entropy.
    pub fn train_epoch<R: Rng + ?Sized>(&mut self, data: &[Sample], learning_rate: f64, batch_size: usize, rng: &mut R) {
        let mut order: Vec<usize> = (0..data.len()).collect();
        order.shuffle(rng);
        for batch in order.chunks(batch_size.max(1)) {
            let mut g_w1 = [[0.0; HIDDEN]; 2];
            let mut g_b1 = [0.0; HIDDEN];
            let mut g_w2 = [0.0; HIDDEN];
            let mut g_b2 = 0.0;
            let scale = 1.0 / batch.len() as f64;
            for &i in batch {
                let (x, y) = data[i];
                let h = self.hidden(x);
                let o = sigmoid(h.iter().zip(&self.w2).map(|(a, b)| a * b).sum::<f64>() + self.b2);
                // sigmoid output with cross-entropy: dL/dz = o - y
                let d = (o - y) * scale;
                g_b2 += d;
                for j in 0..HIDDEN {
                    g_w2[j] += d * h[j];
                    let dh = d * self.w2[j] * h[j] * (1.0 - h[j]);
                    g_b1[j] += dh;
                    g_w1[0][j] += dh * x[0];
                    g_w1[1][j] += dh * x[1];
                }
            }
            for j in 0..HIDDEN {
                self.w1[0][j] -= learning_rate * g_w1[0][j];
                self.w1[1][j] -= learning_rate * g_w1[1][j];
                self.b1[j] -= learning_rate * g_b1[j];
                self.w2[j] -= learning_rate * g_w2[j];
            }
            self.b2 -= learning_rate * g_b2;
        }
    }
}

/// Elementwise parameter mean.
pub fn federated_average(models: &[TinyNet]) -> TinyNet {
    let n = models.len() as f64;
    let mut sum = vec![0.0; PARAMETER_COUNT];
    for m in models {
        for (s, p) in sum.iter_mut().zip(m.params()) {
            *s += p;
        }
    }
    TinyNet::from_params(&sum.iter().map(|s| s / n).collect::<Vec<_>>())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CirclesDataset {
    pub train: Vec<Sample>,
    pub test: Vec<Sample>,
    /// Training samples with first feature above the threshold.
    pub partition_1: Vec<Sample>,
    /// Training samples with first feature below minus the threshold.
    pub partition_2: Vec<Sample>,
}

fn circles(n: usize, inner_radius: f64, noise: f64, rng: &mut ChaCha8Rng) -> Vec<Sample> {
    let normal = Normal::new(0.0, noise).expect("finite noise");
    (0..n)
        .map(|k| {
            // alternate classes for an exact split; label 1 is the outer circle
            let y = (k % 2) as f64;
            let r = if y > 0.5 { 1.0 } else { inner_radius } + normal.sample(rng);
            let theta = rng.random_range(0.0..std::f64::consts::TAU);
            ([r * theta.cos(), r * theta.sin()], y)
        })
        .collect()
}

/// Two concentric noisy circles (outer radius 1) with the training set split
/// between the satellites by the sign and size of the first feature.
pub fn make_circles_dataset(
    n_train: usize,
    n_test: usize,
    inner_radius: f64,
    noise: f64,
    partition_threshold: f64,
    seed: u64,
) -> CirclesDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let train = circles(n_train, inner_radius, noise, &mut rng);
    let test = circles(n_test, inner_radius, noise, &mut rng);
    let partition_1 = train.iter().copied().filter(|(x, _)| x[0] > partition_threshold).collect();
    let partition_2 = train.iter().copied().filter(|(x, _)| x[0] < -partition_threshold).collect();
    CirclesDataset {
        train,
        test,
        partition_1,
        partition_2,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FedAvgParams {
    pub revolutions: u32,
    /// Revolutions at the start during which the satellites do not talk.
    pub silent_revolutions: u32,
    pub communication: bool,
    pub battery_capacity_j: f64,
    pub initial_soc_min: f64,
    pub initial_soc_max: f64,
    pub charging_rate_w: f64,
    pub link_rate_bps: f64,
    pub standby_power_w: f64,
    pub sharing_power_w: f64,
    pub training_power_w: f64,
    /// Below this SoC the satellite stands by.
    pub standby_soc: f64,
    /// Model time of one training epoch; also the decision period.
    pub epoch_duration_s: f64,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub inner_radius: f64,
    pub noise: f64,
    pub partition_threshold: f64,
}

impl Default for FedAvgParams {
    fn default() -> Self {
        Self {
            revolutions: 30,
            silent_revolutions: 10,
            communication: true,
            battery_capacity_j: 1e5,
            initial_soc_min: 0.6,
            initial_soc_max: 0.8,
            charging_rate_w: 50.0,
            link_rate_bps: 1e6,
            standby_power_w: 2.0,
            sharing_power_w: 100.0,
            training_power_w: 100.0,
            standby_soc: 0.5,
            epoch_duration_s: 30.0,
            learning_rate: 0.1,
            batch_size: 32,
            n_train: 4166,
            n_test: 3300,
            inner_radius: 0.5,
            noise: 0.05,
            partition_threshold: 0.5,
        }
    }
}

impl FedAvgParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |r: &str| Err(Error::invalid("fedavg params", r.to_owned()));
        if self.revolutions == 0 {
            return bad("revolutions must be positive");
        }
        if !(0.0 <= self.initial_soc_min && self.initial_soc_min <= self.initial_soc_max && self.initial_soc_max <= 1.0) {
            return bad("initial SoC range must satisfy 0 <= min <= max <= 1");
        }
        if !(self.epoch_duration_s > 0.0) || !(self.learning_rate > 0.0) || self.batch_size == 0 {
            return bad("epoch duration, learning rate and batch size must be positive");
        }
        if self.n_train == 0 || self.n_test == 0 || !(self.noise >= 0.0) {
            return bad("dataset sizes must be positive and noise non-negative");
        }
        LinkBudget::new(self.link_rate_bps)?;
        Battery::new(self.battery_capacity_j, 0.0, self.charging_rate_w)?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exchange {
    /// Seconds since the scenario start.
    pub time_s: f64,
    pub accuracy_before: [f64; 2],
    pub accuracy_after: [f64; 2],
    pub transfer_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    pub time_s: f64,
    pub satellite: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FedAvgSummary {
    pub satellite_ids: [String; 2],
    pub period_s: f64,
    pub final_accuracy: [f64; 2],
    pub epochs_trained: [u64; 2],
    pub exchanges: Vec<Exchange>,
    pub epochs: Vec<EpochRecord>,
    /// Mutual visibility windows over the whole run.
    pub windows: Vec<Window>,
}

pub struct FedAvgRun {
    pub log: EventLog,
    pub summary: FedAvgSummary,
}

fn until(deadline: Rc<Cell<Epoch>>) -> impl FnMut(&View<'_>) -> Progress {
    move |view| {
        let remaining = deadline.get() - view.now();
        if remaining <= view.slice_budget() {
            Progress::Done(remaining.max(0.0))
        } else {
            Progress::Continue
        }
    }
}

struct Node {
    id: String,
    sim: Simulation,
    deadline: Rc<Cell<Epoch>>,
    model: TinyNet,
    rng: ChaCha8Rng,
}

impl Node {
    fn run(&mut self, activity: &str, duration: f64) -> Result<ActivityOutcome> {
        self.deadline.set(self.sim.now() + duration);
        self.sim.perform_activity(&self.id, activity)
    }

    fn soc(&self) -> f64 {
        self.sim.actor(&self.id).and_then(Actor::state_of_charge).unwrap_or(0.0)
    }

    fn actor(&self) -> &Actor {
        self.sim.actor(&self.id).expect("registered")
    }
}

/// Runs the learning scenario. Both satellites decide on a common tick of
/// one epoch duration; they exchange models once per mutual window when
/// both have enough charge, and otherwise train or stand by.
pub fn run_fedavg(config: &ScenarioConfig) -> Result<FedAvgRun> {
    if config.kind != ScenarioKind::Fedavg {
        return Err(Error::invalid("scenario", "not a fedavg config"));
    }
    config.validate()?;
    let p = &config.fedavg;
    let t0 = config.start_epoch()?;
    let sats = config.spacecraft_actors()?;
    if sats.len() != 2 {
        return Err(Error::invalid("fedavg", "exactly two spacecraft are required"));
    }
    let period = sats[0].orbit().expect("spacecraft").period();
    let duration = config.duration_s.unwrap_or(p.revolutions as f64 * period);
    let end = t0 + duration;
    let comm_start = t0 + p.silent_revolutions as f64 * period;
    let link = LinkBudget::new(p.link_rate_bps)?;
    let transfer_s = comms::transmission_duration(MODEL_BITS, link);
    let windows = comms::find_windows(&sats[0], &sats[1], t0, end)?;
    let data = make_circles_dataset(p.n_train, p.n_test, p.inner_radius, p.noise, p.partition_threshold, config.seed);

    let mut init_rng = ChaCha8Rng::seed_from_u64(config.seed);
    let initial_model = TinyNet::random(&mut init_rng);
    let mut nodes = Vec::with_capacity(2);
    for mut sat in sats {
        let soc = init_rng.random_range(p.initial_soc_min..=p.initial_soc_max);
        sat.set_battery(Battery::with_state_of_charge(p.battery_capacity_j, soc, p.charging_rate_w)?)?;
        let id = sat.id().to_owned();
        let mut sim = Simulation::new(config.simulation_config(), t0)?;
        sim.add_actor(sat)?;
        let deadline = Rc::new(Cell::new(t0));
        sim.register_activity(&id, Activity::new(STANDBY, p.standby_power_w, until(deadline.clone())))?;
        sim.register_activity(&id, Activity::new(SHARING, p.sharing_power_w, until(deadline.clone())))?;
        sim.register_activity(&id, Activity::new(TRAINING, p.training_power_w, until(deadline.clone())))?;
        let rng = ChaCha8Rng::seed_from_u64(config.seed ^ fnv1a(id.as_bytes()));
        nodes.push(Node {
            id,
            sim,
            deadline,
            model: initial_model.clone(),
            rng,
        });
    }
    let partitions = [&data.partition_1, &data.partition_2];
    let mut exchanges = Vec::new();
    let mut epochs = Vec::new();
    let mut epochs_trained = [0u64; 2];
    let mut shared_this_window = false;

    while nodes[0].sim.now() < end {
        let now = nodes[0].sim.now();
        debug_assert_eq!(now, nodes[1].sim.now());
        let los = p.communication && now >= comm_start && comms::is_visible(nodes[0].actor(), nodes[1].actor(), now)?;
        if !los {
            shared_this_window = false;
        }
        let available = nodes.iter().all(|n| n.soc() >= p.standby_soc);
        if los && !shared_this_window && available {
            let before = [nodes[0].model.accuracy(&data.test), nodes[1].model.accuracy(&data.test)];
            for n in nodes.iter_mut() {
                n.run(SHARING, transfer_s)?;
            }
            let received: Vec<TinyNet> = nodes
                .iter()
                .map(|n| TinyNet::from_bytes(&n.model.to_bytes()))
                .collect::<Result<_>>()?;
            let merged = federated_average(&received);
            for n in nodes.iter_mut() {
                n.model = merged.clone();
            }
            let acc = merged.accuracy(&data.test);
            exchanges.push(Exchange {
                time_s: now - t0,
                accuracy_before: before,
                accuracy_after: [acc; 2],
                transfer_s,
            });
            shared_this_window = true;
            continue;
        }
        let tick = p.epoch_duration_s.min(end - now);
        for (k, n) in nodes.iter_mut().enumerate() {
            if n.soc() < p.standby_soc {
                n.run(STANDBY, tick)?;
            } else if n.run(TRAINING, tick)? == ActivityOutcome::Completed && tick >= p.epoch_duration_s {
                n.model.train_epoch(partitions[k], p.learning_rate, p.batch_size, &mut n.rng);
                epochs_trained[k] += 1;
                epochs.push(EpochRecord {
                    time_s: n.sim.now() - t0,
                    satellite: k,
                    accuracy: n.model.accuracy(&data.test),
                });
            }
        }
    }
    let final_accuracy = [nodes[0].model.accuracy(&data.test), nodes[1].model.accuracy(&data.test)];
    let satellite_ids = [nodes[0].id.clone(), nodes[1].id.clone()];
    let log = EventLog::merge(nodes.iter_mut().map(|n| n.sim.take_log()));
    Ok(FedAvgRun {
        log,
        summary: FedAvgSummary {
            satellite_ids,
            period_s: period,
            final_accuracy,
            epochs_trained,
            exchanges,
            epochs,
            windows,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forty_one_parameters_in_1312_bits() {
        let net = TinyNet::random(&mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(net.params().len(), 41);
        assert_eq!(MODEL_BITS, 1312);
        assert_eq!(net.to_bytes().len() * 8, 1312);
    }

    #[test]
    fn bytes_round_trip_at_f32_precision() {
        let net = TinyNet::random(&mut ChaCha8Rng::seed_from_u64(2));
        let back = TinyNet::from_bytes(&net.to_bytes()).unwrap();
        for (a, b) in net.params().iter().zip(back.params()) {
            assert_eq!(*a as f32, b as f32);
        }
        assert!(TinyNet::from_bytes(&[0; 10]).is_err());
    }

    #[test]
    fn averaging_identical_models_is_identity() {
        let net = TinyNet::random(&mut ChaCha8Rng::seed_from_u64(3));
        assert_eq!(federated_average(&[net.clone(), net.clone()]), net);
    }

    #[test]
    fn averaging_is_elementwise_mean() {
        let a = TinyNet::from_params(&[1.0; PARAMETER_COUNT]);
        let b = TinyNet::from_params(&[3.0; PARAMETER_COUNT]);
        assert_eq!(federated_average(&[a, b]).params(), vec![2.0; PARAMETER_COUNT]);
    }

    #[test]
    fn partitions_follow_the_rule() {
        let d = make_circles_dataset(4166, 3300, 0.5, 0.05, 0.5, 0);
        assert_eq!((d.train.len(), d.test.len()), (4166, 3300));
        assert!(!d.partition_1.is_empty() && !d.partition_2.is_empty());
        assert!(d.partition_1.iter().all(|(x, _)| x[0] > 0.5));
        assert!(d.partition_2.iter().all(|(x, _)| x[0] < -0.5));
        let test_quadrants = d.test.iter().filter(|(x, _)| x[0].abs() < 0.5).count();
        assert!(test_quadrants > 0);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let net = TinyNet::random(&mut rng);
        let data = vec![([0.3, -0.7], 1.0), ([0.1, 0.2], 0.0)];
        let lr = 1e-6;
        let mut stepped = net.clone();
        // full batch so the update is exactly -lr * gradient
        stepped.train_epoch(&data, lr, data.len(), &mut rng);
        let p0 = net.params();
        let p1 = stepped.params();
        for i in [0, 5, 22, 35, 40] {
            let grad = (p0[i] - p1[i]) / lr;
            let h = 1e-6;
            let mut plus = p0.clone();
            plus[i] += h;
            let mut minus = p0.clone();
            minus[i] -= h;
            let fd = (TinyNet::from_params(&plus).loss(&data) - TinyNet::from_params(&minus).loss(&data)) / (2.0 * h);
            assert!((grad - fd).abs() < 1e-5, "param {i}: {grad} vs {fd}");
        }
    }
}
