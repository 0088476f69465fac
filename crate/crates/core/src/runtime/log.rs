//! Time-ordered event log and its CSV form.

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use crate::epoch::Epoch;
use crate::vec3::Vec3;
use crate::{Error, Result};

pub const LOG_HEADER: [&str; 10] = [
    "time_s",
    "actor_id",
    "pos_x_m",
    "pos_y_m",
    "pos_z_m",
    "temperature_K",
    "state_of_charge",
    "is_in_eclipse",
    "current_activity",
    "event",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    Snapshot,
    ActivityStart,
    ActivityEnd,
    Interrupted,
    WindowOpen,
    WindowClose,
    RadiationBitflip,
    RadiationInterrupt,
    DeviceFailure,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Snapshot => "snapshot",
            EventKind::ActivityStart => "activity_start",
            EventKind::ActivityEnd => "activity_end",
            EventKind::Interrupted => "interrupted",
            EventKind::WindowOpen => "window_open",
            EventKind::WindowClose => "window_close",
            EventKind::RadiationBitflip => "radiation_bitflip",
            EventKind::RadiationInterrupt => "radiation_interrupt",
            EventKind::DeviceFailure => "device_failure",
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EventKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "snapshot" => EventKind::Snapshot,
            "activity_start" => EventKind::ActivityStart,
            "activity_end" => EventKind::ActivityEnd,
            "interrupted" => EventKind::Interrupted,
            "window_open" => EventKind::WindowOpen,
            "window_close" => EventKind::WindowClose,
            "radiation_bitflip" => EventKind::RadiationBitflip,
            "radiation_interrupt" => EventKind::RadiationInterrupt,
            "device_failure" => EventKind::DeviceFailure,
            other => return Err(Error::invalid("log event", format!("unknown kind `{other}`"))),
        })
    }
}

/// One row of the log. `payload` carries event detail (peer id, bit-flip
/// count, outcome) and is kept in memory only.
#[derive(Debug, Clone, PartialEq)]
pub struct LogRecord {
    pub time: Epoch,
    pub actor_id: String,
    pub position: Option<Vec3>,
    pub temperature_k: Option<f64>,
    pub state_of_charge: Option<f64>,
    pub in_eclipse: Option<bool>,
    pub current_activity: Option<String>,
    pub event: EventKind,
    pub payload: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EventLog {
    records: Vec<LogRecord>,
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl EventLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, record: LogRecord) {
        debug_assert!(self.records.last().is_none_or(|r| r.time <= record.time));
        self.records.push(record);
    }

    pub fn records(&self) -> &[LogRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &LogRecord> {
        self.records.iter()
    }

    /// Merges several logs into one time-ordered log. Records with equal
    /// times keep the order of `logs`.
    pub fn merge(logs: impl IntoIterator<Item = EventLog>) -> EventLog {
        let mut records: Vec<LogRecord> = logs.into_iter().flat_map(|l| l.records).collect();
        records.sort_by(|a, b| a.time.cmp(&b.time));
        EventLog { records }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(LOG_HEADER)?;
        for r in &self.records {
            let [x, y, z] = match r.position {
                Some(p) => p.map(|c| c.to_string()),
                None => Default::default(),
            };
            w.write_record([
                r.time.j2000_seconds().to_string(),
                r.actor_id.clone(),
                x,
                y,
                z,
                opt(r.temperature_k),
                opt(r.state_of_charge),
                opt(r.in_eclipse),
                r.current_activity.clone().unwrap_or_default(),
                r.event.as_str().to_owned(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory cannot fail");
        buf
    }

    pub fn write_log(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path.as_ref())?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

fn parse_opt<T: FromStr>(s: &str, column: &'static str) -> Result<Option<T>> {
    if s.is_empty() {
        return Ok(None);
    }
    s.parse()
        .map(Some)
        .map_err(|_| Error::invalid("log row", format!("bad {column} value `{s}`")))
}

/// Parses a CSV log written by [`EventLog::write_csv`]. Payloads are not
/// part of the file and come back empty.
pub fn read_log<R: Read>(input: R) -> Result<EventLog> {
    let mut rd = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = rd.headers()?.clone();
    if header.iter().ne(LOG_HEADER.iter().copied()) {
        return Err(Error::invalid("log header", format!("{header:?}")));
    }
    let mut log = EventLog::new();
    for row in rd.records() {
        let row = row?;
        let time: f64 = parse_opt(&row[0], "time_s")?.ok_or_else(|| Error::invalid("log row", "missing time"))?;
        let pos: [Option<f64>; 3] = [
            parse_opt(&row[2], "pos_x_m")?,
            parse_opt(&row[3], "pos_y_m")?,
            parse_opt(&row[4], "pos_z_m")?,
        ];
        log.records.push(LogRecord {
            time: Epoch::from_j2000_seconds(time),
            actor_id: row[1].to_owned(),
            position: match pos {
                [Some(x), Some(y), Some(z)] => Some([x, y, z]),
                _ => None,
            },
            temperature_k: parse_opt(&row[5], "temperature_K")?,
            state_of_charge: parse_opt(&row[6], "state_of_charge")?,
            in_eclipse: parse_opt(&row[7], "is_in_eclipse")?,
            current_activity: (!row[8].is_empty()).then(|| row[8].to_owned()),
            event: row[9].parse()?,
            payload: None,
        });
    }
    Ok(log)
}
