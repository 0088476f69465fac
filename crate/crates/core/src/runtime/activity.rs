use std::fmt;

use crate::actor::Actor;
use crate::comms;
use crate::epoch::Epoch;
use crate::{Error, Result};

use super::engine::Simulation;

/// What an action slice reports back to the engine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Progress {
    /// More work remains; the slice used its whole budget.
    Continue,
    /// Work finished after the given model seconds of this slice's budget.
    Done(f64),
    /// The action gave up.
    Abort,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ActivityOutcome {
    Completed,
    ConstraintViolated,
    RadiationInterrupted,
    Aborted,
}

impl fmt::Display for ActivityOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ActivityOutcome::Completed => "completed",
            ActivityOutcome::ConstraintViolated => "constraint violated",
            ActivityOutcome::RadiationInterrupted => "radiation interrupted",
            ActivityOutcome::Aborted => "aborted",
        };
        f.write_str(s)
    }
}

/// Read-only view of the simulation from one actor's perspective, handed to
/// actions, constraints and termination hooks.
#[derive(Clone, Copy)]
pub struct View<'a> {
    pub(super) sim: &'a Simulation,
    pub(super) actor: &'a Actor,
    pub(super) budget_s: f64,
}

impl<'a> View<'a> {
    pub fn actor(&self) -> &'a Actor {
        self.actor
    }

    pub fn simulation(&self) -> &'a Simulation {
        self.sim
    }

    pub fn now(&self) -> Epoch {
        self.sim.now()
    }

    /// Model seconds the current slice may use.
    pub fn slice_budget(&self) -> f64 {
        self.budget_s
    }

    pub fn in_eclipse(&self) -> bool {
        self.sim.in_eclipse(self.actor.id()).unwrap_or(false)
    }

    /// Visibility between this actor and another registered actor, now.
    pub fn is_visible_to(&self, other: &str) -> Result<bool> {
        let other = self
            .sim
            .actor(other)
            .ok_or_else(|| Error::UnknownActor(other.to_owned()))?;
        comms::is_visible(self.actor, other, self.now())
    }
}

pub type Action = Box<dyn FnMut(&View<'_>) -> Progress>;
pub type Constraint = Box<dyn FnMut(&View<'_>) -> bool>;
pub type TerminationHook = Box<dyn FnMut(ActivityOutcome, &View<'_>)>;

/// A user workload registered on an actor.
pub struct Activity {
    pub(super) name: String,
    pub(super) power_w: f64,
    pub(super) action: Action,
    pub(super) constraint: Option<Constraint>,
    pub(super) on_termination: Option<TerminationHook>,
}

impl Activity {
    /// `action` is called repeatedly; each call may use at most the
    /// slice budget of model time and must then return.
    pub fn new(
        name: impl Into<String>,
        power_w: f64,
        action: impl FnMut(&View<'_>) -> Progress + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            power_w,
            action: Box::new(action),
            constraint: None,
            on_termination: None,
        }
    }

    /// Runs for `duration_s` of model time doing nothing else.
    pub fn timed(name: impl Into<String>, power_w: f64, duration_s: f64) -> Self {
        let mut remaining = duration_s;
        Self::new(name, power_w, move |view: &View<'_>| {
            let budget = view.slice_budget();
            if remaining <= budget {
                let used = remaining;
                remaining = 0.0;
                Progress::Done(used)
            } else {
                remaining -= budget;
                Progress::Continue
            }
        })
    }

    /// The activity keeps running only while `constraint` holds.
    pub fn with_constraint(mut self, constraint: impl FnMut(&View<'_>) -> bool + 'static) -> Self {
        self.constraint = Some(Box::new(constraint));
        self
    }

    pub fn on_termination(mut self, hook: impl FnMut(ActivityOutcome, &View<'_>) + 'static) -> Self {
        self.on_termination = Some(Box::new(hook));
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn power_w(&self) -> f64 {
        self.power_w
    }
}

impl fmt::Debug for Activity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Activity")
            .field("name", &self.name)
            .field("power_w", &self.power_w)
            .field("constraint", &self.constraint.is_some())
            .finish()
    }
}
