use std::collections::HashMap;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::actor::Actor;
use crate::astro::{is_in_eclipse, sun_position};
use crate::comms;
use crate::epoch::Epoch;
use crate::power;
use crate::radiation::sample_events;
use crate::thermal;
use crate::vec3;
use crate::{Error, Result};

use super::activity::{Activity, ActivityOutcome, Progress, View};
use super::log::{EventKind, EventLog, LogRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Simulated,
    RealTime,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimulationConfig {
    /// Physics integration step, seconds.
    pub physics_dt: f64,
    /// Model (or wall, in real time) seconds between constraint checks.
    pub constraint_check_interval: f64,
    pub mode: Mode,
    pub seed: u64,
    /// Spacing of snapshot rows in the log; `None` disables snapshots.
    pub snapshot_interval: Option<f64>,
    /// Collect per-component timings in [`Profile`].
    pub profile: bool,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            physics_dt: 1.0,
            constraint_check_interval: 1.0,
            mode: Mode::Simulated,
            seed: 0,
            snapshot_interval: Some(1.0),
            profile: false,
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.physics_dt > 0.0) || !(self.constraint_check_interval > 0.0) {
            return Err(Error::invalid(
                "simulation config",
                "physics_dt and constraint_check_interval must be positive",
            ));
        }
        if let Some(s) = self.snapshot_interval {
            if !(s > 0.0) {
                return Err(Error::invalid("simulation config", "snapshot interval must be positive"));
            }
        }
        Ok(())
    }
}

/// Cumulative wall time spent in each part of the loop.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Profile {
    pub activity: Duration,
    pub constraint: Duration,
    /// Orbit propagation, Sun position and eclipse test.
    pub geometry: Duration,
    pub thermal: Duration,
    pub power: Duration,
    pub radiation: Duration,
    pub logging: Duration,
    pub model_updates: u64,
    pub constraint_checks: u64,
}

impl Profile {
    /// Everything the engine itself spent, excluding user code.
    pub fn model_update_total(&self) -> Duration {
        self.geometry + self.thermal + self.power + self.radiation + self.logging
    }
}

struct Slot {
    actor: Actor,
    activities: HashMap<String, Activity>,
    running: Option<String>,
    power_draw_w: f64,
    eclipse: bool,
    pending_interrupt: bool,
    snapshots: bool,
}

struct WatchedLink {
    a: usize,
    b: usize,
    open: bool,
}

type Observer = Box<dyn FnMut(&Simulation)>;

/// One simulation instance: actors, their activities, a clock, and a log.
pub struct Simulation {
    config: SimulationConfig,
    clock: Epoch,
    slots: Vec<Slot>,
    index: HashMap<String, usize>,
    links: Vec<WatchedLink>,
    log: EventLog,
    profile: Profile,
    next_snapshot: Option<Epoch>,
    observer: Option<Observer>,
}

macro_rules! timed {
    ($enabled:expr, $acc:expr, $body:expr) => {{
        if $enabled {
            let start = Instant::now();
            let out = $body;
            $acc += start.elapsed();
            out
        } else {
            $body
        }
    }};
}

impl Simulation {
    pub fn new(config: SimulationConfig, start: Epoch) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            clock: start,
            slots: Vec::new(),
            index: HashMap::new(),
            links: Vec::new(),
            log: EventLog::new(),
            profile: Profile::default(),
            next_snapshot: config.snapshot_interval.map(|dt| start + dt),
            observer: None,
        })
    }

    pub fn config(&self) -> &SimulationConfig {
        &self.config
    }

    pub fn now(&self) -> Epoch {
        self.clock
    }

    pub fn log(&self) -> &EventLog {
        &self.log
    }

    pub fn take_log(&mut self) -> EventLog {
        std::mem::take(&mut self.log)
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    pub fn reset_profile(&mut self) {
        self.profile = Profile::default();
    }

    /// Registers an actor. Its local time is moved to the simulation clock.
    pub fn add_actor(&mut self, mut actor: Actor) -> Result<()> {
        if self.index.contains_key(actor.id()) {
            return Err(Error::DuplicateActor(actor.id().to_owned()));
        }
        if actor.local_time() > self.clock {
            return Err(Error::invalid(
                "actor registration",
                format!("`{}` is ahead of the simulation clock", actor.id()),
            ));
        }
        actor.set_local_time(self.clock)?;
        let eclipse = self.eclipse_of(&actor, sun_position(self.clock).position)?;
        self.index.insert(actor.id().to_owned(), self.slots.len());
        self.slots.push(Slot {
            actor,
            activities: HashMap::new(),
            running: None,
            power_draw_w: 0.0,
            eclipse,
            pending_interrupt: false,
            snapshots: true,
        });
        Ok(())
    }

    pub fn actor(&self, id: &str) -> Option<&Actor> {
        self.index.get(id).map(|&i| &self.slots[i].actor)
    }

    pub fn actor_mut(&mut self, id: &str) -> Option<&mut Actor> {
        self.index.get(id).map(|&i| &mut self.slots[i].actor)
    }

    pub fn actors(&self) -> impl Iterator<Item = &Actor> {
        self.slots.iter().map(|s| &s.actor)
    }

    fn slot_index(&self, id: &str) -> Result<usize> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownActor(id.to_owned()))
    }

    /// Eclipse flag computed at the start of the last physics step.
    pub fn in_eclipse(&self, id: &str) -> Result<bool> {
        Ok(self.slots[self.slot_index(id)?].eclipse)
    }

    /// Stops writing periodic snapshot rows for `id`; events are still logged.
    pub fn disable_snapshots(&mut self, id: &str) -> Result<()> {
        let i = self.slot_index(id)?;
        self.slots[i].snapshots = false;
        Ok(())
    }

    /// Name of the activity currently running on `id`.
    pub fn running_activity(&self, id: &str) -> Result<Option<&str>> {
        Ok(self.slots[self.slot_index(id)?].running.as_deref())
    }

    /// Calls `observer` after every physics step.
    pub fn set_observer(&mut self, observer: impl FnMut(&Simulation) + 'static) {
        self.observer = Some(Box::new(observer));
    }

    /// Logs `window_open` / `window_close` events whenever visibility
    /// between `a` and `b` changes.
    pub fn watch_link(&mut self, a: &str, b: &str) -> Result<()> {
        let (ia, ib) = (self.slot_index(a)?, self.slot_index(b)?);
        let open = comms::is_visible(&self.slots[ia].actor, &self.slots[ib].actor, self.clock)?;
        if open {
            self.push_event(ia, EventKind::WindowOpen, Some(b.to_owned()));
        }
        self.links.push(WatchedLink { a: ia, b: ib, open });
        Ok(())
    }

    pub fn register_activity(&mut self, actor_id: &str, activity: Activity) -> Result<()> {
        if !(activity.power_w >= 0.0) || !activity.power_w.is_finite() {
            return Err(Error::invalid("activity", "power consumption must be >= 0"));
        }
        let i = self.slot_index(actor_id)?;
        let slot = &mut self.slots[i];
        let taken = slot.activities.contains_key(&activity.name) || slot.running.as_deref() == Some(activity.name.as_str());
        if taken {
            return Err(Error::DuplicateActivity {
                actor: actor_id.to_owned(),
                activity: activity.name,
            });
        }
        slot.activities.insert(activity.name.clone(), activity);
        Ok(())
    }

    fn eclipse_of(&self, actor: &Actor, sun: vec3::Vec3) -> Result<bool> {
        match actor.orbit() {
            Some(o) => Ok(is_in_eclipse(o.propagate(self.clock)?.position, sun, &o.central_body)),
            None => Ok(false),
        }
    }

    fn push_event(&mut self, i: usize, event: EventKind, payload: Option<String>) {
        let slot = &self.slots[i];
        let a = &slot.actor;
        self.log.push(LogRecord {
            time: self.clock,
            actor_id: a.id().to_owned(),
            position: None,
            temperature_k: a.temperature_k(),
            state_of_charge: a.state_of_charge(),
            in_eclipse: a.is_spacecraft().then_some(slot.eclipse),
            current_activity: slot.running.clone(),
            event,
            payload,
        });
    }

    fn snapshot_all(&mut self) -> Result<()> {
        for i in 0..self.slots.len() {
            let slot = &self.slots[i];
            if !slot.snapshots {
                continue;
            }
            let a = &slot.actor;
            let position = a.position_at(self.clock)?;
            self.log.push(LogRecord {
                time: self.clock,
                actor_id: a.id().to_owned(),
                position: Some(position),
                temperature_k: a.temperature_k(),
                state_of_charge: a.state_of_charge(),
                in_eclipse: a.is_spacecraft().then_some(slot.eclipse),
                current_activity: slot.running.clone(),
                event: EventKind::Snapshot,
                payload: None,
            });
        }
        Ok(())
    }

    fn maybe_snapshot(&mut self) -> Result<()> {
        let (Some(next), Some(interval)) = (self.next_snapshot, self.config.snapshot_interval) else {
            return Ok(());
        };
        // tolerance absorbs accumulated rounding of fractional steps
        if self.clock + 1e-9 >= next {
            let prof = self.config.profile;
            let mut spent = Duration::ZERO;
            timed!(prof, spent, self.snapshot_all())?;
            self.profile.logging += spent;
            let mut n = next;
            while n <= self.clock + 1e-9 {
                n += interval;
            }
            self.next_snapshot = Some(n);
        }
        Ok(())
    }

    /// One physics step of `dt` seconds for every actor, in the fixed order
    /// positions, eclipse, thermal, power (charge then discharge), radiation.
    fn physics_step(&mut self, dt: f64) -> Result<()> {
        let prof = self.config.profile;
        let t = self.clock;
        let mut p = self.profile;
        let sun = timed!(prof, p.geometry, sun_position(t).position);
        let mut events: Vec<(usize, EventKind, Option<String>)> = Vec::new();
        for (i, slot) in self.slots.iter_mut().enumerate() {
            let Some(orbit) = slot.actor.orbit() else { continue };
            let body = orbit.central_body.clone();
            let (position, eclipse) = timed!(prof, p.geometry, {
                let pos = orbit.propagate(t)?.position;
                (pos, is_in_eclipse(pos, sun, &body))
            });
            slot.eclipse = eclipse;
            let power_draw = slot.power_draw_w;
            if let Some(th) = slot.actor.thermal_mut() {
                timed!(prof, p.thermal, {
                    let f = thermal::heat_fluxes(th, !eclipse, vec3::norm(position), power_draw, &body);
                    *th = thermal::step_temperature(th, &f, dt);
                });
            }
            if let Some(b) = slot.actor.battery_mut() {
                timed!(prof, p.power, {
                    let charged = power::charge(b, !eclipse, dt);
                    *b = power::discharge(&charged, power_draw, dt).0;
                });
            }
            if let Some(rad) = slot.actor.radiation_mut() {
                if !rad.state.failed {
                    let ev = timed!(prof, p.radiation, sample_events(&mut rad.state, &rad.config, dt))?;
                    if ev.bitflips > 0 {
                        events.push((i, EventKind::RadiationBitflip, Some(ev.bitflips.to_string())));
                    }
                    if ev.interrupted {
                        if slot.running.is_some() {
                            slot.pending_interrupt = true;
                        }
                        events.push((i, EventKind::RadiationInterrupt, None));
                    }
                    if ev.failed_now {
                        events.push((i, EventKind::DeviceFailure, None));
                    }
                }
            }
        }
        p.model_updates += 1;
        self.profile = p;
        self.clock = t + dt;
        for slot in &mut self.slots {
            slot.actor.set_local_time(self.clock)?;
        }
        for (i, kind, payload) in events {
            self.push_event(i, kind, payload);
        }
        self.update_links()?;
        self.maybe_snapshot()?;
        if let Some(mut obs) = self.observer.take() {
            obs(self);
            self.observer = Some(obs);
        }
        Ok(())
    }

    fn update_links(&mut self) -> Result<()> {
        for k in 0..self.links.len() {
            let WatchedLink { a, b, open } = self.links[k];
            let now_open = comms::is_visible(&self.slots[a].actor, &self.slots[b].actor, self.clock)?;
            if now_open != open {
                self.links[k].open = now_open;
                let kind = if now_open { EventKind::WindowOpen } else { EventKind::WindowClose };
                let peer = self.slots[b].actor.id().to_owned();
                self.push_event(a, kind, Some(peer));
            }
        }
        Ok(())
    }

    /// Advances all models by `duration` seconds in `physics_dt` steps, the
    /// last one possibly shorter.
    fn advance_physics(&mut self, duration: f64) -> Result<()> {
        let mut remaining = duration;
        while remaining > 1e-12 {
            let dt = remaining.min(self.config.physics_dt);
            self.physics_step(dt)?;
            remaining -= dt;
        }
        Ok(())
    }

    /// Steps every actor in lockstep for up to `duration` seconds, stopping
    /// after the first step at which one of `conditions` holds. A condition
    /// already true on entry fires after zero steps.
    ///
    /// Returns the elapsed time and the index of the condition that fired.
    pub fn advance_time(
        &mut self,
        duration: f64,
        conditions: &mut [&mut dyn FnMut(&Simulation) -> bool],
    ) -> Result<(f64, Option<usize>)> {
        if !(duration > 0.0) {
            return Err(Error::invalid("advance_time", "duration must be positive"));
        }
        let start = self.clock;
        let end = start + duration;
        let fired = |sim: &Simulation, conds: &mut [&mut dyn FnMut(&Simulation) -> bool]| {
            conds.iter_mut().position(|c| c(sim))
        };
        if let Some(k) = fired(self, conditions) {
            return Ok((0.0, Some(k)));
        }
        let mut n = 0u64;
        loop {
            n += 1;
            // step boundaries from the start epoch avoid summing rounding errors
            let target = (start + n as f64 * self.config.physics_dt).min(end);
            let dt = target - self.clock;
            if dt <= 0.0 {
                break;
            }
            self.physics_step(dt)?;
            if let Some(k) = fired(self, conditions) {
                return Ok((self.clock - start, Some(k)));
            }
            if target >= end {
                break;
            }
        }
        Ok((self.clock - start, None))
    }

    fn begin_activity(&mut self, actor_id: &str, name: &str) -> Result<(usize, Activity)> {
        let i = self.slot_index(actor_id)?;
        let slot = &mut self.slots[i];
        if let Some(running) = &slot.running {
            return Err(Error::ActivityRunning {
                actor: actor_id.to_owned(),
                running: running.clone(),
            });
        }
        if slot.actor.has_failed() {
            return Err(Error::DeviceFailed);
        }
        let activity = slot.activities.remove(name).ok_or_else(|| Error::UnknownActivity {
            actor: actor_id.to_owned(),
            activity: name.to_owned(),
        })?;
        slot.running = Some(activity.name.clone());
        slot.power_draw_w = activity.power_w;
        slot.pending_interrupt = false;
        self.push_event(i, EventKind::ActivityStart, None);
        Ok((i, activity))
    }

    fn finish_activity(&mut self, i: usize, mut activity: Activity, outcome: ActivityOutcome) -> ActivityOutcome {
        let kind = match outcome {
            ActivityOutcome::Completed => EventKind::ActivityEnd,
            _ => EventKind::Interrupted,
        };
        self.push_event(i, kind, Some(outcome.to_string()));
        let slot = &mut self.slots[i];
        slot.running = None;
        slot.power_draw_w = 0.0;
        slot.pending_interrupt = false;
        if let Some(hook) = activity.on_termination.as_mut() {
            let view = View {
                sim: self,
                actor: &self.slots[i].actor,
                budget_s: 0.0,
            };
            hook(outcome, &view);
        }
        self.slots[i].activities.insert(activity.name.clone(), activity);
        outcome
    }

    /// Interruption reasons that stem from the physics step just taken.
    fn physics_outcome(&self, i: usize) -> Option<ActivityOutcome> {
        let slot = &self.slots[i];
        if slot.actor.has_failed() {
            Some(ActivityOutcome::Aborted)
        } else if slot.pending_interrupt {
            Some(ActivityOutcome::RadiationInterrupted)
        } else {
            None
        }
    }

    fn check_constraint(&mut self, i: usize, activity: &mut Activity) -> bool {
        let prof = self.config.profile;
        let Some(c) = activity.constraint.as_mut() else {
            return true;
        };
        let mut spent = Duration::ZERO;
        let ok = timed!(prof, spent, {
            let view = View {
                sim: self,
                actor: &self.slots[i].actor,
                budget_s: 0.0,
            };
            c(&view)
        });
        self.profile.constraint += spent;
        self.profile.constraint_checks += 1;
        ok
    }

    /// Runs a registered activity to its end and reports why it stopped.
    ///
    /// In simulated mode each action slice is worth one constraint-check
    /// interval of model time (less if the action finishes early). In
    /// real-time mode this delegates to [`Simulation::run_real_time`].
    pub fn perform_activity(&mut self, actor_id: &str, name: &str) -> Result<ActivityOutcome> {
        if self.config.mode == Mode::RealTime {
            return self.run_real_time(actor_id, name);
        }
        let (i, mut activity) = self.begin_activity(actor_id, name)?;
        let interval = self.config.constraint_check_interval;
        let prof = self.config.profile;
        let outcome = loop {
            let mut spent = Duration::ZERO;
            let progress = timed!(prof, spent, {
                let view = View {
                    sim: self,
                    actor: &self.slots[i].actor,
                    budget_s: interval,
                };
                (activity.action)(&view)
            });
            self.profile.activity += spent;
            let consumed = match progress {
                Progress::Continue => interval,
                Progress::Done(used) => used.clamp(0.0, interval),
                Progress::Abort => 0.0,
            };
            if let Err(e) = self.advance_physics(consumed) {
                self.finish_activity(i, activity, ActivityOutcome::Aborted);
                return Err(e);
            }
            if let Some(o) = self.physics_outcome(i) {
                break o;
            }
            match progress {
                Progress::Done(_) => break ActivityOutcome::Completed,
                Progress::Abort => break ActivityOutcome::Aborted,
                Progress::Continue => {}
            }
            if !self.check_constraint(i, &mut activity) {
                break ActivityOutcome::ConstraintViolated;
            }
        };
        Ok(self.finish_activity(i, activity, outcome))
    }

    /// Runs an activity with model time slaved to the host's monotonic
    /// clock. Physics advances by the measured wall interval since the
    /// previous update; updates and constraint checks happen once per
    /// `constraint_check_interval` of wall time.
    pub fn run_real_time(&mut self, actor_id: &str, name: &str) -> Result<ActivityOutcome> {
        if self.config.mode != Mode::RealTime {
            return Err(Error::WrongMode("run_real_time requires real-time mode"));
        }
        let (i, mut activity) = self.begin_activity(actor_id, name)?;
        let interval = Duration::from_secs_f64(self.config.constraint_check_interval);
        let prof = self.config.profile;
        let mut last_update = Instant::now();
        let outcome = loop {
            let slice_start = Instant::now();
            let progress = {
                let view = View {
                    sim: self,
                    actor: &self.slots[i].actor,
                    budget_s: self.config.constraint_check_interval,
                };
                (activity.action)(&view)
            };
            let now = Instant::now();
            if prof {
                self.profile.activity += now - slice_start;
            }
            let finished = !matches!(progress, Progress::Continue);
            if !finished && now - last_update < interval {
                continue;
            }
            let wall_dt = (now - last_update).as_secs_f64();
            last_update = now;
            if let Err(e) = self.advance_physics(wall_dt) {
                self.finish_activity(i, activity, ActivityOutcome::Aborted);
                return Err(e);
            }
            if let Some(o) = self.physics_outcome(i) {
                break o;
            }
            match progress {
                Progress::Done(_) => break ActivityOutcome::Completed,
                Progress::Abort => break ActivityOutcome::Aborted,
                Progress::Continue => {}
            }
            if !self.check_constraint(i, &mut activity) {
                break ActivityOutcome::ConstraintViolated;
            }
        };
        Ok(self.finish_activity(i, activity, outcome))
    }
}
