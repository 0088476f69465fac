//! Communication windows, transmission times, and actor exchange.
//!
//! Links are limited purely by visibility: two spacecraft can talk when the
//! central body's sphere does not block the segment between them, and a
//! spacecraft can talk to a ground station while it is above the station's
//! minimum elevation. Data rates are constant per device.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::actor::{Actor, ActorKind, GeodeticPosition};
use crate::astro::{self, OrbitState};
use crate::body::CentralBody;
use crate::epoch::Epoch;
use crate::power::Battery;
use crate::radiation::{RadiationConfig, RadiationModel, RadiationState};
use crate::thermal::{ThermalProperties, ThermalState};
use crate::{Error, Result};

/// Coarse scan step of [`find_windows`], seconds.
pub const WINDOW_SCAN_STEP_S: f64 = 10.0;
/// Boundary resolution of [`find_windows`], seconds.
pub const WINDOW_RESOLUTION_S: f64 = 0.1;

/// A maximal interval of continuous visibility.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub start: Epoch,
    pub end: Epoch,
    pub from_actor: String,
    pub to_actor: String,
}

impl Window {
    pub fn duration(&self) -> f64 {
        self.end - self.start
    }
}

/// Constant-rate link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    pub data_rate_bps: f64,
}

impl LinkBudget {
    pub fn new(data_rate_bps: f64) -> Result<Self> {
        if !(data_rate_bps > 0.0) || !data_rate_bps.is_finite() {
            return Err(Error::invalid("link budget", "data rate must be positive"));
        }
        Ok(Self { data_rate_bps })
    }
}

/// Seconds needed to move `bits` over `link`.
pub fn transmission_duration(bits: u64, link: LinkBudget) -> f64 {
    bits as f64 / link.data_rate_bps
}

fn body_of<'a>(a: &'a Actor, b: &'a Actor) -> &'a CentralBody {
    a.orbit()
        .or_else(|| b.orbit())
        .map(|o| &o.central_body)
        .expect("at least one spacecraft in a supported pair")
}

/// Whether `a` and `b` can communicate at `t`.
pub fn is_visible(a: &Actor, b: &Actor, t: Epoch) -> Result<bool> {
    is_visible_with_margin(a, b, t, 0.0)
}

/// [`is_visible`] with the occluding sphere for spacecraft pairs enlarged by
/// `margin_m`.
pub fn is_visible_with_margin(a: &Actor, b: &Actor, t: Epoch, margin_m: f64) -> Result<bool> {
    match (a.kind(), b.kind()) {
        (ActorKind::GroundStation, ActorKind::GroundStation) => {
            Err(Error::UnsupportedPair(a.id().to_owned(), b.id().to_owned()))
        }
        (ActorKind::Spacecraft, ActorKind::Spacecraft) => {
            let body = body_of(a, b);
            Ok(astro::line_of_sight_with_margin(
                a.position_at(t)?,
                b.position_at(t)?,
                body,
                margin_m,
            ))
        }
        (ActorKind::GroundStation, ActorKind::Spacecraft) => station_sees(a, b, t),
        (ActorKind::Spacecraft, ActorKind::GroundStation) => station_sees(b, a, t),
    }
}

fn station_sees(station: &Actor, sc: &Actor, t: Epoch) -> Result<bool> {
    let elevation = astro::ground_station_elevation(station, sc.position_at(t)?, t)?;
    Ok(elevation >= station.minimum_elevation_deg())
}

/// All maximal visibility intervals between `a` and `b` inside `[t0, t1]`.
///
/// A coarse scan at [`WINDOW_SCAN_STEP_S`] finds transitions which are then
/// bisected to [`WINDOW_RESOLUTION_S`]. Windows shorter than the scan step
/// that fall between two samples are not detected.
pub fn find_windows(a: &Actor, b: &Actor, t0: Epoch, t1: Epoch) -> Result<Vec<Window>> {
    find_windows_with(a, b, t0, t1, WINDOW_SCAN_STEP_S, WINDOW_RESOLUTION_S)
}

pub fn find_windows_with(
    a: &Actor,
    b: &Actor,
    t0: Epoch,
    t1: Epoch,
    scan_step: f64,
    resolution: f64,
) -> Result<Vec<Window>> {
    if !(t0 < t1) {
        return Err(Error::invalid("window search", "t0 must precede t1"));
    }
    let visible = |t: Epoch| is_visible(a, b, t);
    // Converges to the transition between `lo` (state `from`) and `hi`.
    let refine = |mut lo: Epoch, mut hi: Epoch, from: bool| -> Result<(Epoch, Epoch)> {
        while hi - lo > resolution {
            let mid = lo + 0.5 * (hi - lo);
            if visible(mid)? == from {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok((lo, hi))
    };

    let mut windows = Vec::new();
    let mut prev_t = t0;
    let mut prev_vis = visible(t0)?;
    let mut open = if prev_vis { Some(t0) } else { None };
    let n = ((t1 - t0) / scan_step).ceil() as u64;
    for k in 1..=n {
        let t = if k == n { t1 } else { t0 + k as f64 * scan_step };
        let vis = visible(t)?;
        if vis != prev_vis {
            let (lo, hi) = refine(prev_t, t, prev_vis)?;
            if vis {
                open = Some(hi);
            } else if let Some(start) = open.take() {
                windows.push(Window {
                    start,
                    end: lo,
                    from_actor: a.id().to_owned(),
                    to_actor: b.id().to_owned(),
                });
            }
        }
        prev_t = t;
        prev_vis = vis;
    }
    if let Some(start) = open {
        windows.push(Window {
            start,
            end: t1,
            from_actor: a.id().to_owned(),
            to_actor: b.id().to_owned(),
        });
    }
    Ok(windows)
}

pub const SCHEMA_VERSION: i64 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ActorRecord {
    schema_version: i64,
    id: String,
    kind: ActorKind,
    epoch_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    orbit: Option<OrbitRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    geodetic: Option<GeodeticRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    thermal: Option<ThermalRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    battery: Option<BatteryRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    radiation: Option<RadiationRecord>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    comm_devices: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    known_peers: BTreeSet<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OrbitRecord {
    a_m: f64,
    e: f64,
    i_rad: f64,
    raan_rad: f64,
    argp_rad: f64,
    nu_rad: f64,
    epoch_s: f64,
    central_body: CentralBody,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeodeticRecord {
    lat_deg: f64,
    lon_deg: f64,
    elev_m: f64,
    min_elev_deg: f64,
}

#[derive(Serialize, Deserialize)]
struct ThermalRecord {
    #[serde(flatten)]
    properties: ThermalProperties,
    #[serde(rename = "temperature_K")]
    temperature_k: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BatteryRecord {
    capacity_j: f64,
    level_j: f64,
    charging_rate_w: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RadiationRecord {
    r_d: f64,
    r_i: f64,
    r_f: f64,
    seed: u64,
    failed: bool,
    #[serde(default)]
    bitflips: u64,
}

#[derive(Deserialize)]
struct VersionProbe {
    schema_version: i64,
}

impl From<&Actor> for ActorRecord {
    fn from(a: &Actor) -> Self {
        ActorRecord {
            schema_version: SCHEMA_VERSION,
            id: a.id().to_owned(),
            kind: a.kind(),
            epoch_s: a.local_time().j2000_seconds(),
            orbit: a.orbit().map(|o| OrbitRecord {
                a_m: o.semi_major_axis,
                e: o.eccentricity,
                i_rad: o.inclination,
                raan_rad: o.raan,
                argp_rad: o.argument_of_periapsis,
                nu_rad: o.true_anomaly,
                epoch_s: o.epoch.j2000_seconds(),
                central_body: o.central_body.clone(),
            }),
            geodetic: a.geodetic_position().map(|g| GeodeticRecord {
                lat_deg: g.latitude_deg,
                lon_deg: g.longitude_deg,
                elev_m: g.elevation_m,
                min_elev_deg: a.minimum_elevation_deg(),
            }),
            thermal: a.thermal().map(|t| ThermalRecord {
                properties: t.properties,
                temperature_k: t.temperature_k,
            }),
            battery: a.battery().map(|b| BatteryRecord {
                capacity_j: b.capacity_j,
                level_j: b.level_j,
                charging_rate_w: b.charging_rate_w,
            }),
            radiation: a.radiation().map(|r| RadiationRecord {
                r_d: r.config.data_corruption_rate,
                r_i: r.config.interruption_rate,
                r_f: r.config.failure_rate,
                seed: r.config.seed,
                failed: r.state.failed,
                bitflips: r.state.cumulative_bitflips,
            }),
            comm_devices: a.comm_devices().clone(),
            known_peers: a.known_peers().clone(),
        }
    }
}

impl TryFrom<ActorRecord> for Actor {
    type Error = Error;

    fn try_from(r: ActorRecord) -> Result<Actor> {
        let epoch = Epoch::from_j2000_seconds(r.epoch_s);
        let mut actor = match r.kind {
            ActorKind::Spacecraft => {
                let o = r
                    .orbit
                    .ok_or_else(|| Error::invalid("actor record", "spacecraft without orbit"))?;
                if r.geodetic.is_some() {
                    return Err(Error::invalid("actor record", "spacecraft with geodetic position"));
                }
                let orbit = OrbitState::new(
                    o.a_m,
                    o.e,
                    o.i_rad,
                    o.raan_rad,
                    o.argp_rad,
                    o.nu_rad,
                    Epoch::from_j2000_seconds(o.epoch_s),
                    o.central_body,
                )?;
                Actor::spacecraft(r.id, epoch, orbit)?
            }
            ActorKind::GroundStation => {
                let g = r.geodetic.ok_or_else(|| {
                    Error::invalid("actor record", "ground station without geodetic position")
                })?;
                if r.orbit.is_some() {
                    return Err(Error::invalid("actor record", "ground station with orbit"));
                }
                let site = GeodeticPosition {
                    latitude_deg: g.lat_deg,
                    longitude_deg: g.lon_deg,
                    elevation_m: g.elev_m,
                };
                Actor::ground_station(r.id, epoch, site.latitude_deg, site.longitude_deg, site.elevation_m, g.min_elev_deg)?
            }
        };
        if let Some(t) = r.thermal {
            actor.set_thermal(ThermalState::new(t.temperature_k, t.properties)?)?;
        }
        if let Some(b) = r.battery {
            actor.set_battery(Battery::new(b.capacity_j, b.level_j, b.charging_rate_w)?)?;
        }
        if let Some(rad) = r.radiation {
            if actor.kind() != ActorKind::Spacecraft {
                return Err(Error::invalid("actor record", "radiation model on ground station"));
            }
            let config = RadiationConfig {
                data_corruption_rate: rad.r_d,
                interruption_rate: rad.r_i,
                failure_rate: rad.r_f,
                seed: rad.seed,
            };
            config.validate()?;
            let mut state = RadiationState::for_actor(config.seed, actor.id());
            state.failed = rad.failed;
            state.cumulative_bitflips = rad.bitflips;
            actor.set_radiation_model(RadiationModel { config, state });
        }
        for (name, rate) in r.comm_devices {
            actor.add_comm_device(name, rate)?;
        }
        actor.replace_known_peers(r.known_peers);
        Ok(actor)
    }
}

fn parse_error(e: serde_json::Error) -> Error {
    Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

/// Serializes an actor to the versioned JSON exchange format.
///
/// The random generator state of a radiation model is not part of the
/// format; a deserialized actor restarts its stream from the seed.
pub fn serialize_actor(actor: &Actor) -> Vec<u8> {
    serde_json::to_vec(&ActorRecord::from(actor)).expect("actor record serializes")
}

pub fn deserialize_actor(bytes: &[u8]) -> Result<Actor> {
    let probe: VersionProbe = serde_json::from_slice(bytes).map_err(parse_error)?;
    if probe.schema_version != SCHEMA_VERSION {
        return Err(Error::SchemaVersion(probe.schema_version));
    }
    let record: ActorRecord = serde_json::from_slice(bytes).map_err(parse_error)?;
    Actor::try_from(record)
}

/// Replaces `actor`'s peer set from serialized heartbeats received at `t`.
///
/// Peers whose device has failed are dropped. The live peers are returned
/// so callers can query visibility against their propagated orbits.
pub fn update_known_peers<B: AsRef<[u8]>>(actor: &mut Actor, peers: &[B], t: Epoch) -> Result<Vec<Actor>> {
    let mut live = Vec::with_capacity(peers.len());
    for bytes in peers {
        let peer = deserialize_actor(bytes.as_ref())?;
        if peer.id() == actor.id() {
            return Err(Error::invalid(
                "peer list",
                format!("peer shares the id `{}` of the receiving actor", actor.id()),
            ));
        }
        if peer.local_time() > t {
            return Err(Error::invalid(
                "peer list",
                format!("peer `{}` reports a time after {}", peer.id(), t),
            ));
        }
        if !peer.has_failed() {
            live.push(peer);
        }
    }
    actor.replace_known_peers(live.iter().map(|p| p.id().to_owned()).collect());
    Ok(live)
}
