//! Source datasets: CSV I/O, seeded synthetic generation and fault injection.
//!
//! Weather files use the header `day,hour,temperature,pressure,humidity` and
//! consumption files `day,hour,consumption_kwh`. Values carry exactly three
//! decimals and an empty field encodes null.

mod generate;
mod inject;

use std::fmt::Write as _;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fixed::Fixed;
use crate::ledger::SampleTriple;

pub use generate::{generate_consumption, generate_weather, ConsumptionProfile, GeneratedWeather, WeatherProfile};
pub use inject::{inject_consumption, inject_weather, FaultSpec};

pub const WEATHER_HEADER: [&str; 5] = ["day", "hour", "temperature", "pressure", "humidity"];
pub const CONSUMPTION_HEADER: [&str; 3] = ["day", "hour", "consumption_kwh"];

/// Calendar slot of a row: day of month (1-31) and hour (0-23).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DateTime {
    pub day: u32,
    pub hour: u32,
}

impl DateTime {
    pub const LAST: DateTime = DateTime { day: 31, hour: 23 };

    pub fn new(day: u32, hour: u32) -> Self {
        DateTime { day, hour }
    }

    /// Simulation step (hours since the start of day 1).
    pub fn step(self) -> u64 {
        24 * (self.day as u64 - 1) + self.hour as u64
    }

    pub fn from_step(step: u64) -> Self {
        DateTime {
            day: (step / 24) as u32 + 1,
            hour: (step % 24) as u32,
        }
    }

    pub fn is_valid(self) -> bool {
        (1..=31).contains(&self.day) && self.hour < 24
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeatherRow {
    pub at: DateTime,
    pub sample: SampleTriple,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsumptionRow {
    pub at: DateTime,
    pub consumption: Option<Fixed>,
}

/// Data source roles that own a dataset file.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceRole {
    Esco,
    Meteo,
    Client,
    Meter,
}

impl SourceRole {
    pub const STAKEHOLDERS: [SourceRole; 3] = [SourceRole::Esco, SourceRole::Meteo, SourceRole::Client];

    pub fn name(self) -> &'static str {
        match self {
            SourceRole::Esco => "esco",
            SourceRole::Meteo => "meteo",
            SourceRole::Client => "client",
            SourceRole::Meter => "meter",
        }
    }

    /// Position among the weather stakeholders, if this is one.
    pub fn stakeholder_index(self) -> Option<usize> {
        SourceRole::STAKEHOLDERS.iter().position(|r| *r == self)
    }
}

/// `<source>_seed<k>[_<fault>].csv`
pub fn dataset_file_name(source: &str, seed: u64, fault: Option<&str>) -> String {
    match fault {
        Some(f) => format!("{source}_seed{seed}_{f}.csv"),
        None => format!("{source}_seed{seed}.csv"),
    }
}

fn fmt_opt(v: Option<Fixed>) -> String {
    v.map(|f| f.to_string()).unwrap_or_default()
}

pub fn write_weather(rows: &[WeatherRow]) -> String {
    let mut out = WEATHER_HEADER.join(",");
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{:02},{},{},{}",
            r.at.day,
            r.at.hour,
            fmt_opt(r.sample.temperature),
            fmt_opt(r.sample.pressure),
            fmt_opt(r.sample.humidity)
        );
    }
    out
}

pub fn write_consumption(rows: &[ConsumptionRow]) -> String {
    let mut out = CONSUMPTION_HEADER.join(",");
    out.push('\n');
    for r in rows {
        let _ = writeln!(out, "{},{:02},{}", r.at.day, r.at.hour, fmt_opt(r.consumption));
    }
    out
}

struct RecordReader<'a> {
    origin: &'a str,
}

impl RecordReader<'_> {
    fn err(&self, line: u64, message: impl Into<String>) -> Error {
        Error::Schema {
            origin: self.origin.to_string(),
            line,
            message: message.into(),
        }
    }

    fn records<R: Read>(&self, input: R, header: &[&str]) -> Result<Vec<(u64, Vec<String>)>> {
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
        let found = reader.headers().map_err(|e| self.err(1, e.to_string()))?.clone();
        if found.iter().collect::<Vec<_>>() != header {
            return Err(self.err(1, format!("expected header {:?}, found {:?}", header.join(","), found)));
        }
        let mut out = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| {
                let line = e.position().map(|p| p.line()).unwrap_or(0);
                self.err(line, e.to_string())
            })?;
            let line = record.position().map(|p| p.line()).unwrap_or(0);
            out.push((line, record.iter().map(str::to_string).collect()));
        }
        Ok(out)
    }

    fn datetime(&self, line: u64, day: &str, hour: &str) -> Result<DateTime> {
        let day: u32 = day.parse().map_err(|_| self.err(line, format!("malformed day {day:?}")))?;
        let hour: u32 = hour.parse().map_err(|_| self.err(line, format!("malformed hour {hour:?}")))?;
        let at = DateTime::new(day, hour);
        if !at.is_valid() {
            return Err(self.err(line, format!("datetime day {day} hour {hour} out of range")));
        }
        Ok(at)
    }

    fn number(&self, line: u64, field: &str, name: &str) -> Result<Option<Fixed>> {
        if field.is_empty() {
            return Ok(None);
        }
        field
            .parse()
            .map(Some)
            .map_err(|e| self.err(line, format!("{name}: {e}")))
    }

    fn check_order(&self, line: u64, prev: Option<DateTime>, at: DateTime) -> Result<()> {
        match prev {
            Some(p) if at < p => Err(self.err(line, format!("rows out of order: {at:?} after {p:?}"))),
            _ => Ok(()),
        }
    }
}

/// Parses a weather CSV. Rows must be sorted by datetime; repeated datetimes are allowed.
pub fn parse_weather<R: Read>(input: R, origin: &str) -> Result<Vec<WeatherRow>> {
    let rr = RecordReader { origin };
    let mut rows: Vec<WeatherRow> = Vec::new();
    for (line, fields) in rr.records(input, &WEATHER_HEADER)? {
        let at = rr.datetime(line, &fields[0], &fields[1])?;
        rr.check_order(line, rows.last().map(|r| r.at), at)?;
        let sample = SampleTriple {
            temperature: rr.number(line, &fields[2], "temperature")?,
            pressure: rr.number(line, &fields[3], "pressure")?,
            humidity: rr.number(line, &fields[4], "humidity")?,
        };
        rows.push(WeatherRow { at, sample });
    }
    Ok(rows)
}

pub fn parse_consumption<R: Read>(input: R, origin: &str) -> Result<Vec<ConsumptionRow>> {
    let rr = RecordReader { origin };
    let mut rows: Vec<ConsumptionRow> = Vec::new();
    for (line, fields) in rr.records(input, &CONSUMPTION_HEADER)? {
        let at = rr.datetime(line, &fields[0], &fields[1])?;
        rr.check_order(line, rows.last().map(|r| r.at), at)?;
        let consumption = rr.number(line, &fields[2], "consumption_kwh")?;
        if consumption.is_some_and(Fixed::is_negative) {
            return Err(rr.err(line, "consumption_kwh must be non-negative"));
        }
        rows.push(ConsumptionRow { at, consumption });
    }
    Ok(rows)
}

pub fn read_weather_csv(path: &Path) -> Result<Vec<WeatherRow>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_weather(file, &path.display().to_string())
}

pub fn read_consumption_csv(path: &Path) -> Result<Vec<ConsumptionRow>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_consumption(file, &path.display().to_string())
}

pub fn write_weather_csv(path: &Path, rows: &[WeatherRow]) -> Result<()> {
    fs::write(path, write_weather(rows)).map_err(|e| Error::io(path, e))
}

pub fn write_consumption_csv(path: &Path, rows: &[ConsumptionRow]) -> Result<()> {
    fs::write(path, write_consumption(rows)).map_err(|e| Error::io(path, e))
}

/// The four datasets one simulation consumes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DatasetBundle {
    /// Weather rows for esco, meteo and client, in that order.
    pub weather: [Vec<WeatherRow>; 3],
    pub consumption: Vec<ConsumptionRow>,
}

impl DatasetBundle {
    pub fn empty() -> Self {
        DatasetBundle {
            weather: [Vec::new(), Vec::new(), Vec::new()],
            consumption: Vec::new(),
        }
    }

    /// Synthetic datasets for `seed` with the default profiles.
    pub fn generate(seed: u64) -> Self {
        let weather = generate_weather(seed, &WeatherProfile::default());
        let consumption = generate_consumption(
            seed,
            &weather.truth,
            &crate::tepc::ModelParams::default(),
            &ConsumptionProfile::default(),
        );
        DatasetBundle {
            weather: weather.sources,
            consumption,
        }
    }

    pub fn paths(dir: &Path, seed: u64) -> DatasetPaths {
        let at = |role: &str| dir.join(dataset_file_name(role, seed, None));
        DatasetPaths {
            esco: at("esco"),
            meteo: at("meteo"),
            client: at("client"),
            meter: at("meter"),
        }
    }

    pub fn load(paths: &DatasetPaths) -> Result<Self> {
        Ok(DatasetBundle {
            weather: [
                read_weather_csv(&paths.esco)?,
                read_weather_csv(&paths.meteo)?,
                read_weather_csv(&paths.client)?,
            ],
            consumption: read_consumption_csv(&paths.meter)?,
        })
    }

    /// Applies a fault to the dataset it targets.
    pub fn inject(&mut self, spec: &FaultSpec) -> Result<()> {
        match spec.target() {
            SourceRole::Meter => {
                self.consumption = inject_consumption(&self.consumption, spec)?;
            }
            role => {
                let i = role.stakeholder_index().expect("weather role");
                self.weather[i] = inject_weather(&self.weather[i], spec)?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetPaths {
    pub esco: PathBuf,
    pub meteo: PathBuf,
    pub client: PathBuf,
    pub meter: PathBuf,
}
