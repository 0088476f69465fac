use crate::runtime::EventLog;
use crate::{Error, Result};

use super::config::ScenarioConfig;
use crate::runtime::Simulation;

/// Runs every configured actor for `duration_s` with no activities,
/// logging snapshots and window events between each spacecraft and every
/// other actor.
pub fn run_custom(config: &ScenarioConfig) -> Result<EventLog> {
    config.validate()?;
    let duration = config
        .duration_s
        .ok_or_else(|| Error::invalid("scenario config", "duration_s is required"))?;
    let mut sim = Simulation::new(config.simulation_config(), config.start_epoch()?)?;
    let actors = config.all_actors()?;
    let ids: Vec<(String, bool)> = actors.iter().map(|a| (a.id().to_owned(), a.is_spacecraft())).collect();
    for a in actors {
        sim.add_actor(a)?;
    }
    for (i, (a, a_sc)) in ids.iter().enumerate() {
        for (b, b_sc) in &ids[i + 1..] {
            if *a_sc || *b_sc {
                sim.watch_link(a, b)?;
            }
        }
    }
    sim.advance_time(duration, &mut [])?;
    Ok(sim.take_log())
}
