use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ConsumptionRow, DateTime, SourceRole, WeatherRow};
use crate::error::{Error, Result};
use crate::fixed::Fixed;
use crate::ledger::SampleTriple;

pub const FAULT_COUNT_RANGE: std::ops::RangeInclusive<u32> = 25..=30;

/// Dataset mutation that sets up one fault scenario.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FaultSpec {
    /// Null every channel of one row.
    SingleNull { source: SourceRole, day: u32, hour: u32 },
    /// Null every channel of `count` distinct seeded rows.
    MultiNull { source: SourceRole, count: u32, seed: u64 },
    /// Follow `count` seeded rows with an all-zero copy at the same datetime.
    DuplicateZero { source: SourceRole, count: u32, seed: u64 },
    /// Push the consumption reading of each listed day later by `hours`.
    Delay { days: Vec<u32>, hours: u32 },
}

impl FaultSpec {
    pub fn target(&self) -> SourceRole {
        match self {
            FaultSpec::SingleNull { source, .. }
            | FaultSpec::MultiNull { source, .. }
            | FaultSpec::DuplicateZero { source, .. } => *source,
            FaultSpec::Delay { .. } => SourceRole::Meter,
        }
    }

    /// Suffix used in dataset file names.
    pub fn label(&self) -> &'static str {
        match self {
            FaultSpec::SingleNull { .. } => "single_null",
            FaultSpec::MultiNull { .. } => "multi_null",
            FaultSpec::DuplicateZero { .. } => "duplicate_zero",
            FaultSpec::Delay { .. } => "delay",
        }
    }
}

fn pick_rows(len: usize, count: u32, seed: u64) -> Result<Vec<usize>> {
    if !FAULT_COUNT_RANGE.contains(&count) {
        return Err(Error::Injection(format!(
            "fault count {count} outside {}..={}",
            FAULT_COUNT_RANGE.start(),
            FAULT_COUNT_RANGE.end()
        )));
    }
    if (count as usize) > len {
        return Err(Error::Injection(format!("cannot pick {count} rows from {len}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = rand::seq::index::sample(&mut rng, len, count as usize).into_vec();
    picked.sort_unstable();
    Ok(picked)
}

pub fn inject_weather(rows: &[WeatherRow], spec: &FaultSpec) -> Result<Vec<WeatherRow>> {
    let mut out = rows.to_vec();
    match spec {
        FaultSpec::SingleNull { day, hour, .. } => {
            let at = DateTime::new(*day, *hour);
            let row = out
                .iter_mut()
                .find(|r| r.at == at)
                .ok_or_else(|| Error::Injection(format!("no row at day {day} hour {hour}")))?;
            row.sample = SampleTriple::NULL;
        }
        FaultSpec::MultiNull { count, seed, .. } => {
            // distinct datetimes: rows are sorted, duplicates only come from injection
            for i in pick_rows(out.len(), *count, *seed)? {
                out[i].sample = SampleTriple::NULL;
            }
        }
        FaultSpec::DuplicateZero { count, seed, .. } => {
            let picked = pick_rows(rows.len(), *count, *seed)?;
            let zero = SampleTriple::new(Fixed::ZERO, Fixed::ZERO, Fixed::ZERO);
            out = Vec::with_capacity(rows.len() + picked.len());
            let mut next = picked.iter().peekable();
            for (i, row) in rows.iter().enumerate() {
                out.push(*row);
                if next.peek() == Some(&&i) {
                    next.next();
                    out.push(WeatherRow { at: row.at, sample: zero });
                }
            }
        }
        FaultSpec::Delay { .. } => {
            return Err(Error::Injection("delay applies to consumption datasets".into()));
        }
    }
    Ok(out)
}

pub fn inject_consumption(rows: &[ConsumptionRow], spec: &FaultSpec) -> Result<Vec<ConsumptionRow>> {
    let FaultSpec::Delay { days, hours } = spec else {
        return Err(Error::Injection(format!("{} applies to weather datasets", spec.label())));
    };
    if *hours == 0 {
        return Err(Error::Injection("delay must be at least one hour".into()));
    }
    let mut out = rows.to_vec();
    for day in days {
        let row = out
            .iter_mut()
            .find(|r| r.at.day == *day && r.at.hour == 23)
            .ok_or_else(|| Error::Injection(format!("no consumption row for day {day}")))?;
        let moved = DateTime::from_step(row.at.step() + *hours as u64);
        if !moved.is_valid() {
            return Err(Error::Injection(format!("day {day} delayed past the end of the month")));
        }
        row.at = moved;
    }
    out.sort_by_key(|r| r.at);
    Ok(out)
}

impl FromStr for FaultSpec {
    type Err = Error;

    /// `single-null:source=client,day=2,hour=2`, `multi-null:source=client,count=27,seed=7`,
    /// `duplicate-zero:source=esco,count=27,seed=7`, `delay:days=3;11;16,hours=2`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |m: String| Error::Injection(format!("fault spec {s:?}: {m}"));
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut params = std::collections::BTreeMap::new();
        for part in rest.split(',').filter(|p| !p.is_empty()) {
            let (k, v) = part.split_once('=').ok_or_else(|| bad(format!("expected key=value, got {part:?}")))?;
            params.insert(k.trim(), v.trim());
        }
        let get = |k: &str| params.get(k).copied().ok_or_else(|| bad(format!("missing {k}")));
        let num = |k: &str| -> Result<u64> { get(k)?.parse().map_err(|_| bad(format!("{k} is not a number"))) };
        let source = |default: SourceRole| -> Result<SourceRole> {
            match params.get("source") {
                None => Ok(default),
                Some(&"esco") => Ok(SourceRole::Esco),
                Some(&"meteo") => Ok(SourceRole::Meteo),
                Some(&"client") => Ok(SourceRole::Client),
                Some(other) => Err(bad(format!("unknown weather source {other:?}"))),
            }
        };
        Ok(match kind {
            "single-null" => FaultSpec::SingleNull {
                source: source(SourceRole::Client)?,
                day: num("day")? as u32,
                hour: num("hour")? as u32,
            },
            "multi-null" => FaultSpec::MultiNull {
                source: source(SourceRole::Client)?,
                count: num("count")? as u32,
                seed: num("seed")?,
            },
            "duplicate-zero" => FaultSpec::DuplicateZero {
                source: source(SourceRole::Esco)?,
                count: num("count")? as u32,
                seed: num("seed")?,
            },
            "delay" => FaultSpec::Delay {
                days: get("days")?
                    .split(';')
                    .map(|d| d.parse().map_err(|_| bad(format!("bad day {d:?}"))))
                    .collect::<Result<_>>()?,
                hours: num("hours")? as u32,
            },
            other => return Err(bad(format!("unknown fault kind {other:?}"))),
        })
    }
}
