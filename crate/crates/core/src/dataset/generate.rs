//! Seeded synthetic datasets.
//!
//! Generation runs entirely in integer thousandths with a ChaCha stream and a
//! fixed cosine table, so a seed produces the same bytes on every platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ConsumptionRow, DateTime, WeatherRow};
use crate::fixed::Fixed;
use crate::ledger::SampleTriple;
use crate::tepc::{DegreeDayModel, ModelParams};

/// cos(2πh/24) scaled by 1e6.
const COS_TABLE: [i64; 24] = [
    1_000_000, 965_926, 866_025, 707_107, 500_000, 258_819, 0, -258_819, -500_000, -707_107, -866_025, -965_926,
    -1_000_000, -965_926, -866_025, -707_107, -500_000, -258_819, 0, 258_819, 500_000, 707_107, 866_025, 965_926,
];

fn cos_hours(hour: i64) -> i64 {
    COS_TABLE[hour.rem_euclid(24) as usize]
}

const TEMPERATURE_RANGE: (i64, i64) = (-10_000, 30_000);
const PRESSURE_RANGE: (i64, i64) = (960_000, 1_040_000);
const HUMIDITY_RANGE: (i64, i64) = (20_000, 95_000);

/// Maximum absolute per-source deviation from the true value, per channel.
/// The defaults are a quarter of the default voting tolerances, so any two
/// clean sources differ by at most half a tolerance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeatherProfile {
    pub temperature_noise: Fixed,
    pub pressure_noise: Fixed,
    pub humidity_noise: Fixed,
}

impl Default for WeatherProfile {
    fn default() -> Self {
        WeatherProfile {
            temperature_noise: Fixed::from_milli(250),
            pressure_noise: Fixed::from_milli(1_250),
            humidity_noise: Fixed::from_milli(1_250),
        }
    }
}

impl WeatherProfile {
    pub fn noiseless() -> Self {
        WeatherProfile {
            temperature_noise: Fixed::ZERO,
            pressure_noise: Fixed::ZERO,
            humidity_noise: Fixed::ZERO,
        }
    }
}

/// Achieved savings subtracted from the baseline prediction, plus symmetric noise.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsumptionProfile {
    pub saving_min: Fixed,
    pub saving_max: Fixed,
    pub noise: Fixed,
}

impl Default for ConsumptionProfile {
    fn default() -> Self {
        ConsumptionProfile {
            saving_min: Fixed::from_int(5),
            saving_max: Fixed::from_int(15),
            noise: Fixed::from_int(2),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratedWeather {
    pub truth: Vec<WeatherRow>,
    /// esco, meteo, client
    pub sources: [Vec<WeatherRow>; 3],
}

fn symmetric(rng: &mut ChaCha8Rng, bound: Fixed) -> i64 {
    let b = bound.milli().abs();
    if b == 0 {
        0
    } else {
        rng.random_range(-b..=b)
    }
}

fn clamp(v: i64, (lo, hi): (i64, i64)) -> i64 {
    v.clamp(lo, hi)
}

/// Hourly readings for days 2-31: a diurnal temperature cycle around a seeded
/// monthly mean, slowly drifting pressure, humidity inverse to temperature.
pub fn generate_weather(seed: u64, profile: &WeatherProfile) -> GeneratedWeather {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let monthly_mean = rng.random_range(2_000..=8_000i64);
    let temp_amplitude = rng.random_range(3_000..=6_000i64);
    let pressure_base = rng.random_range(1_005_000..=1_020_000i64);
    let humidity_base = rng.random_range(65_000..=75_000i64);
    let humidity_amplitude = rng.random_range(8_000..=15_000i64);

    let mut truth = Vec::with_capacity(720);
    let (mut temp_drift, mut pressure_drift, mut humidity_drift) = (0i64, 0i64, 0i64);
    for day in 2..=31u32 {
        temp_drift = (temp_drift + rng.random_range(-1_500..=1_500i64)).clamp(-5_000, 5_000);
        pressure_drift = (pressure_drift + rng.random_range(-4_000..=4_000i64)).clamp(-20_000, 20_000);
        humidity_drift = (humidity_drift + rng.random_range(-4_000..=4_000i64)).clamp(-10_000, 10_000);
        for hour in 0..24u32 {
            let h = hour as i64;
            // coldest around 04:00, warmest around 16:00
            let diurnal = cos_hours(h - 4);
            let t = monthly_mean + temp_drift - temp_amplitude * diurnal / 1_000_000 + rng.random_range(-200..=200i64);
            let p = pressure_base + pressure_drift + 600 * cos_hours(h - 10) / 1_000_000 + rng.random_range(-300..=300i64);
            let u = humidity_base + humidity_drift + humidity_amplitude * diurnal / 1_000_000 + rng.random_range(-1_000..=1_000i64);
            truth.push(WeatherRow {
                at: DateTime::new(day, hour),
                sample: SampleTriple::new(
                    Fixed::from_milli(clamp(t, TEMPERATURE_RANGE)),
                    Fixed::from_milli(clamp(p, PRESSURE_RANGE)),
                    Fixed::from_milli(clamp(u, HUMIDITY_RANGE)),
                ),
            });
        }
    }

    let mut variant = || -> Vec<WeatherRow> {
        truth
            .iter()
            .map(|row| {
                let [t, p, u] = row.sample.channels().map(|c| c.unwrap().milli());
                WeatherRow {
                    at: row.at,
                    sample: SampleTriple::new(
                        Fixed::from_milli(clamp(t + symmetric(&mut rng, profile.temperature_noise), TEMPERATURE_RANGE)),
                        Fixed::from_milli(clamp(p + symmetric(&mut rng, profile.pressure_noise), PRESSURE_RANGE)),
                        Fixed::from_milli(clamp(u + symmetric(&mut rng, profile.humidity_noise), HUMIDITY_RANGE)),
                    ),
                }
            })
            .collect()
    };
    let sources = [variant(), variant(), variant()];
    GeneratedWeather { truth, sources }
}

/// One reading per day at 23:00: the model's prediction from the true daily
/// mean temperature, minus a seeded saving in `[saving_min, saving_max]`,
/// plus noise, floored at zero.
pub fn generate_consumption(
    seed: u64,
    truth: &[WeatherRow],
    model: &ModelParams,
    profile: &ConsumptionProfile,
) -> Vec<ConsumptionRow> {
    // separate stream from the weather generator
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_c0de_0000_0001);
    let model = DegreeDayModel(*model);
    let mut rows = Vec::with_capacity(30);
    for day in 2..=31u32 {
        let temps: Vec<Fixed> = truth
            .iter()
            .filter(|r| r.at.day == day)
            .filter_map(|r| r.sample.temperature)
            .collect();
        let predicted = model.predict_from_temperatures(&temps);
        let (lo, hi) = (profile.saving_min.milli(), profile.saving_max.milli());
        let saving = if hi > lo { rng.random_range(lo..=hi) } else { lo };
        let noise = symmetric(&mut rng, profile.noise);
        let kwh = (predicted.milli() - saving + noise).max(0);
        rows.push(ConsumptionRow {
            at: DateTime::new(day, 23),
            consumption: Some(Fixed::from_milli(kwh)),
        });
    }
    rows
}
