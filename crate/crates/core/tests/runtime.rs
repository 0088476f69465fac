use std::cell::{Cell, RefCell};
use std::rc::Rc;
use std::time::{Duration, Instant};

use proptest::prelude::*;
use spacesim::astro::OrbitState;
use spacesim::comms;
use spacesim::power::Battery;
use spacesim::radiation::RadiationConfig;
use spacesim::runtime::{Activity, ActivityOutcome, EventKind, Mode, Progress, Simulation, SimulationConfig};
use spacesim::{Actor, CentralBody, Epoch, Error};

fn t0() -> Epoch {
    Epoch::parse_rfc3339("2022-10-27T12:30:00Z").unwrap()
}

fn leo(id: &str, nu: f64) -> Actor {
    let orbit = OrbitState::circular(550e3, 0.0, 0.0, nu, t0(), CentralBody::earth()).unwrap();
    Actor::spacecraft(id, t0(), orbit).unwrap()
}

fn powered(id: &str) -> Actor {
    let mut a = leo(id, 0.0);
    a.set_battery(Battery::new(1e9, 5e8, 50.0).unwrap()).unwrap();
    a
}

fn sim(config: SimulationConfig) -> Simulation {
    Simulation::new(config, t0()).unwrap()
}

#[test]
fn register_then_perform_completes() {
    let mut s = sim(SimulationConfig::default());
    s.add_actor(powered("sat")).unwrap();
    s.register_activity("sat", Activity::timed("work", 10.0, 30.0)).unwrap();
    assert_eq!(s.perform_activity("sat", "work").unwrap(), ActivityOutcome::Completed);
    assert!((s.now() - t0() - 30.0).abs() < 1e-9);
    // activity is available again afterwards
    assert_eq!(s.perform_activity("sat", "work").unwrap(), ActivityOutcome::Completed);
}

#[test]
fn immediate_completion_drains_nothing_beyond_elapsed() {
    let mut s = sim(SimulationConfig::default());
    s.add_actor(powered("sat")).unwrap();
    s.register_activity("sat", Activity::new("noop", 100.0, |_| Progress::Done(0.0))).unwrap();
    let before = s.actor("sat").unwrap().battery().unwrap().level_j;
    assert_eq!(s.perform_activity("sat", "noop").unwrap(), ActivityOutcome::Completed);
    assert_eq!(s.now(), t0());
    assert_eq!(s.actor("sat").unwrap().battery().unwrap().level_j, before);
}

#[test]
fn registration_errors() {
    let mut s = sim(SimulationConfig::default());
    s.add_actor(powered("sat")).unwrap();
    assert!(matches!(s.add_actor(powered("sat")), Err(Error::DuplicateActor(_))));
    s.register_activity("sat", Activity::timed("a", 1.0, 1.0)).unwrap();
    assert!(matches!(
        s.register_activity("sat", Activity::timed("a", 1.0, 1.0)),
        Err(Error::DuplicateActivity { .. })
    ));
    assert!(s.register_activity("sat", Activity::timed("b", -1.0, 1.0)).is_err());
    assert!(matches!(
        s.register_activity("ghost", Activity::timed("c", 1.0, 1.0)),
        Err(Error::UnknownActor(_))
    ));
    assert!(matches!(s.perform_activity("sat", "missing"), Err(Error::UnknownActivity { .. })));
}

#[test]
fn invalid_config_rejected() {
    let bad = SimulationConfig { physics_dt: 0.0, ..Default::default() };
    assert!(Simulation::new(bad, t0()).is_err());
    let bad = SimulationConfig { constraint_check_interval: -1.0, ..Default::default() };
    assert!(Simulation::new(bad, t0()).is_err());
}

#[test]
fn energy_bookkeeping_is_exact() {
    let config = SimulationConfig { physics_dt: 1.0, constraint_check_interval: 7.0, ..Default::default() };
    let mut s = sim(config);
    s.add_actor(powered("sat")).unwrap();
    let sunlit = Rc::new(Cell::new(0.0));
    let last = Rc::new(Cell::new(t0()));
    {
        let (sunlit, last) = (sunlit.clone(), last.clone());
        s.set_observer(move |sim| {
            let dt = sim.now() - last.get();
            last.set(sim.now());
            if !sim.in_eclipse("sat").unwrap() {
                sunlit.set(sunlit.get() + dt);
            }
        });
    }
    // long enough to cross an eclipse boundary
    s.register_activity("sat", Activity::timed("work", 80.0, 4000.5)).unwrap();
    let start = s.actor("sat").unwrap().battery().unwrap().level_j;
    assert_eq!(s.perform_activity("sat", "work").unwrap(), ActivityOutcome::Completed);
    let end = s.actor("sat").unwrap().battery().unwrap().level_j;
    let elapsed = s.now() - t0();
    assert!((elapsed - 4000.5).abs() < 1e-9);
    assert!(sunlit.get() > 0.0 && sunlit.get() < elapsed);
    let expected = 80.0 * elapsed - 50.0 * sunlit.get();
    assert!((start - end - expected).abs() < 1e-6, "{} vs {}", start - end, expected);
}

#[test]
fn constraint_violation_interrupts() {
    let mut s = sim(SimulationConfig::default());
    s.add_actor(powered("sat")).unwrap();
    let deadline = t0() + 42.0;
    let act = Activity::timed("work", 1.0, 1000.0).with_constraint(move |v| v.now() < deadline);
    s.register_activity("sat", act).unwrap();
    assert_eq!(s.perform_activity("sat", "work").unwrap(), ActivityOutcome::ConstraintViolated);
    assert!((s.now() - deadline).abs() < 1e-9);
    let kinds: Vec<_> = s.log().iter().filter(|r| r.event != EventKind::Snapshot).map(|r| r.event).collect();
    assert_eq!(kinds, vec![EventKind::ActivityStart, EventKind::Interrupted]);
}

#[test]
fn huge_interruption_rate_interrupts_in_first_interval() {
    let mut s = sim(SimulationConfig::default());
    let mut a = powered("sat");
    a.set_radiation(RadiationConfig { data_corruption_rate: 0.0, interruption_rate: 1e6, failure_rate: 0.0, seed: 1 })
        .unwrap();
    s.add_actor(a).unwrap();
    s.register_activity("sat", Activity::timed("work", 1.0, 100.0)).unwrap();
    assert_eq!(s.perform_activity("sat", "work").unwrap(), ActivityOutcome::RadiationInterrupted);
    assert!(s.now() - t0() <= 1.0 + 1e-9);
}

#[test]
fn failed_device_aborts_and_rejects_new_work() {
    let mut s = sim(SimulationConfig::default());
    let mut a = powered("sat");
    a.set_radiation(RadiationConfig { data_corruption_rate: 0.0, interruption_rate: 0.0, failure_rate: 1e6, seed: 1 })
        .unwrap();
    s.add_actor(a).unwrap();
    s.register_activity("sat", Activity::timed("work", 1.0, 100.0)).unwrap();
    assert_eq!(s.perform_activity("sat", "work").unwrap(), ActivityOutcome::Aborted);
    assert!(s.actor("sat").unwrap().has_failed());
    assert!(matches!(s.perform_activity("sat", "work"), Err(Error::DeviceFailed)));
    assert!(s.log().iter().any(|r| r.event == EventKind::DeviceFailure));
}

#[test]
fn termination_hook_runs_once_per_outcome() {
    let cases: Vec<(Box<dyn Fn() -> Activity>, ActivityOutcome)> = vec![
        (Box::new(|| Activity::timed("a", 1.0, 5.0)), ActivityOutcome::Completed),
        (Box::new(|| Activity::timed("a", 1.0, 50.0).with_constraint(|_| false)), ActivityOutcome::ConstraintViolated),
        (Box::new(|| Activity::new("a", 1.0, |_| Progress::Abort)), ActivityOutcome::Aborted),
    ];
    for (make, expected) in cases {
        let mut s = sim(SimulationConfig::default());
        s.add_actor(powered("sat")).unwrap();
        let seen = Rc::new(RefCell::new(Vec::new()));
        let hook_seen = seen.clone();
        let act = make().on_termination(move |o, _| hook_seen.borrow_mut().push(o));
        s.register_activity("sat", act).unwrap();
        assert_eq!(s.perform_activity("sat", "a").unwrap(), expected);
        assert_eq!(*seen.borrow(), vec![expected]);
    }
}

#[test]
fn advance_time_without_conditions_runs_full_duration() {
    let mut s = sim(SimulationConfig::default());
    s.add_actor(powered("sat")).unwrap();
    let (elapsed, fired) = s.advance_time(600.0, &mut []).unwrap();
    assert_eq!(elapsed, 600.0);
    assert_eq!(fired, None);
    assert_eq!(s.actor("sat").unwrap().local_time(), t0() + 600.0);
    assert!(s.advance_time(0.0, &mut []).is_err());
}

#[test]
fn advance_time_condition_true_at_entry_fires_immediately() {
    let mut s = sim(SimulationConfig::default());
    s.add_actor(powered("sat")).unwrap();
    let mut always = |_: &Simulation| true;
    let (elapsed, fired) = s.advance_time(600.0, &mut [&mut always]).unwrap();
    assert_eq!((elapsed, fired), (0.0, Some(0)));
}

#[test]
fn advance_time_stops_at_first_window() {
    let orbit = OrbitState::new(
        6_378_137.0 + 786e3,
        0.0,
        98.57f64.to_radians(),
        10.1f64.to_radians(),
        0.0,
        0.0,
        t0(),
        CentralBody::earth(),
    )
    .unwrap();
    let sat = Actor::spacecraft("sat", t0(), orbit).unwrap();
    let gs = Actor::ground_station("gs", t0(), 27.7629, -15.6338, 205.1, 5.0).unwrap();
    let mut brute = None;
    for k in 0..86_400 {
        let t = t0() + k as f64;
        if comms::is_visible(&sat, &gs, t).unwrap() {
            brute = Some(k as f64);
            break;
        }
    }
    let brute = brute.expect("a pass within a day");
    let mut s = sim(SimulationConfig::default());
    s.add_actor(sat).unwrap();
    s.add_actor(gs).unwrap();
    let mut open = |sim: &Simulation| {
        comms::is_visible(sim.actor("sat").unwrap(), sim.actor("gs").unwrap(), sim.now()).unwrap()
    };
    let mut never = |_: &Simulation| false;
    let (elapsed, fired) = s.advance_time(86_400.0, &mut [&mut never, &mut open]).unwrap();
    assert_eq!(fired, Some(1));
    assert!((elapsed - brute).abs() <= 1.0, "{elapsed} vs {brute}");
}

#[test]
fn watched_link_logs_window_events() {
    let mut s = sim(SimulationConfig { snapshot_interval: None, ..Default::default() });
    s.add_actor(leo("a", 0.0)).unwrap();
    s.add_actor(leo("b", std::f64::consts::PI)).unwrap();
    let b = s.actor("b").unwrap().clone();
    let mut b2 = b.clone();
    b2.set_orbit(
        OrbitState::new(
            b.orbit().unwrap().semi_major_axis,
            0.0,
            std::f64::consts::PI,
            0.0,
            0.0,
            std::f64::consts::PI,
            t0(),
            CentralBody::earth(),
        )
        .unwrap(),
    )
    .unwrap();
    *s.actor_mut("b").unwrap() = b2;
    s.watch_link("a", "b").unwrap();
    s.advance_time(6000.0, &mut []).unwrap();
    let opens = s.log().iter().filter(|r| r.event == EventKind::WindowOpen).count();
    let closes = s.log().iter().filter(|r| r.event == EventKind::WindowClose).count();
    assert_eq!((opens, closes), (2, 2));
}

#[test]
fn simulated_logs_are_deterministic() {
    let run = || {
        let mut s = sim(SimulationConfig { seed: 7, ..Default::default() });
        let mut a = powered("sat");
        a.set_radiation(RadiationConfig { data_corruption_rate: 0.01, interruption_rate: 0.001, failure_rate: 0.0, seed: 7 })
            .unwrap();
        s.add_actor(a).unwrap();
        s.register_activity("sat", Activity::timed("work", 10.0, 500.0)).unwrap();
        let _ = s.perform_activity("sat", "work").unwrap();
        s.advance_time(300.0, &mut []).unwrap();
        s.log().to_csv_bytes()
    };
    assert_eq!(run(), run());
}

#[test]
fn real_time_requires_real_time_mode() {
    let mut s = sim(SimulationConfig::default());
    s.add_actor(powered("sat")).unwrap();
    s.register_activity("sat", Activity::timed("a", 1.0, 1.0)).unwrap();
    assert!(matches!(s.run_real_time("sat", "a"), Err(Error::WrongMode(_))));
}

#[test]
fn real_time_follows_wall_clock() {
    let interval = 0.1;
    let config = SimulationConfig { mode: Mode::RealTime, constraint_check_interval: interval, ..Default::default() };
    let mut s = sim(config);
    s.add_actor(powered("sat")).unwrap();
    let mut start = None::<Instant>;
    let act = Activity::new("idle", 1.0, move |_| {
        let t = *start.get_or_insert_with(Instant::now);
        if t.elapsed() >= Duration::from_secs(1) {
            Progress::Done(0.0)
        } else {
            std::thread::sleep(Duration::from_millis(2));
            Progress::Continue
        }
    });
    s.register_activity("sat", act).unwrap();
    assert_eq!(s.perform_activity("sat", "idle").unwrap(), ActivityOutcome::Completed);
    let advanced = s.actor("sat").unwrap().local_time() - t0();
    assert!((advanced - 1.0).abs() <= interval, "{advanced}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn constraint_check_count(duration in 1.0f64..300.0, interval in 0.2f64..20.0) {
        let config = SimulationConfig { constraint_check_interval: interval, snapshot_interval: None, ..Default::default() };
        let mut s = sim(config);
        s.add_actor(powered("sat")).unwrap();
        let count = Rc::new(Cell::new(0u64));
        let c = count.clone();
        let act = Activity::timed("w", 1.0, duration).with_constraint(move |_| { c.set(c.get() + 1); true });
        s.register_activity("sat", act).unwrap();
        prop_assert_eq!(s.perform_activity("sat", "w").unwrap(), ActivityOutcome::Completed);
        let expected = (duration / interval).ceil();
        prop_assert!((count.get() as f64 - expected).abs() <= 1.0, "{} vs {}", count.get(), expected);
    }

    #[test]
    fn local_time_never_decreases(steps in proptest::collection::vec(0.5f64..50.0, 1..10)) {
        let mut s = sim(SimulationConfig { snapshot_interval: None, ..Default::default() });
        s.add_actor(powered("sat")).unwrap();
        let mut last = s.actor("sat").unwrap().local_time();
        for d in steps {
            s.advance_time(d, &mut []).unwrap();
            let now = s.actor("sat").unwrap().local_time();
            prop_assert!(now >= last);
            last = now;
        }
    }
}
