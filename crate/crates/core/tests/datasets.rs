mod common;

use common::*;
use epochsim::arch::ArchitectureKind;
use epochsim::dataset::{
    generate_consumption, generate_weather, inject_consumption, inject_weather, parse_consumption, parse_weather,
    read_weather_csv, write_consumption, write_weather, write_weather_csv, ConsumptionProfile, DatasetBundle, DateTime,
    FaultSpec, SourceRole, WeatherProfile, WeatherRow,
};
use epochsim::fixed::Fixed;
use epochsim::ledger::SampleTriple;
use epochsim::scenario::{simulate, Scenario, ScenarioConfig};
use epochsim::tepc::{self, check_variable, ModelParams, Tolerances};
use proptest::prelude::*;

#[test]
fn same_seed_same_bytes() {
    for seed in 1..=4 {
        let a = generate_weather(seed, &WeatherProfile::default());
        let b = generate_weather(seed, &WeatherProfile::default());
        for (x, y) in a.sources.iter().zip(&b.sources) {
            assert_eq!(write_weather(x), write_weather(y));
        }
        let ca = generate_consumption(seed, &a.truth, &ModelParams::default(), &ConsumptionProfile::default());
        let cb = generate_consumption(seed, &b.truth, &ModelParams::default(), &ConsumptionProfile::default());
        assert_eq!(write_consumption(&ca), write_consumption(&cb));
    }
    assert_ne!(
        write_weather(&generate_weather(1, &WeatherProfile::default()).truth),
        write_weather(&generate_weather(2, &WeatherProfile::default()).truth)
    );
}

#[test]
fn clean_data_needs_no_clamping() {
    for seed in 1..=20 {
        let w = generate_weather(seed, &WeatherProfile::default());
        for row in w.sources.iter().flatten().chain(&w.truth) {
            assert_eq!(check_variable(&row.sample), Ok(row.sample), "seed {seed} {:?}", row.at);
        }
    }
}

#[test]
fn sources_agree_within_half_a_tolerance() {
    let tol = Tolerances::default().channels();
    for seed in 1..=20 {
        let w = generate_weather(seed, &WeatherProfile::default());
        for i in 0..720 {
            for a in 0..3 {
                for b in a + 1..3 {
                    let (x, y) = (w.sources[a][i].sample.channels(), w.sources[b][i].sample.channels());
                    for c in 0..3 {
                        let diff = (x[c].unwrap() - y[c].unwrap()).abs();
                        assert!(diff.milli() * 2 <= tol[c].milli(), "seed {seed} row {i} channel {c}: {diff}");
                    }
                }
            }
        }
    }
}

#[test]
fn zero_noise_zero_saving_gives_zero() {
    let w = generate_weather(5, &WeatherProfile::noiseless());
    let profile = ConsumptionProfile {
        saving_min: Fixed::ZERO,
        saving_max: Fixed::ZERO,
        noise: Fixed::ZERO,
    };
    let bundle = DatasetBundle {
        weather: w.sources.clone(),
        consumption: generate_consumption(5, &w.truth, &ModelParams::default(), &profile),
    };
    let config = ScenarioConfig::new(Scenario::S1, ArchitectureKind::OrderExecute, 5);
    let run = simulate(&config, &bundle).unwrap();
    assert_eq!(tepc::daily_savings(&run.state), vec![Fixed::ZERO; 30]);
    assert_eq!(tepc::monthly_savings(&run.state), vec![Fixed::ZERO]);
}

#[test]
fn positive_saving_validates() {
    let config = ScenarioConfig::new(Scenario::S1, ArchitectureKind::ExecuteOrderValidate, 2);
    let run = simulate(&config, &DatasetBundle::generate(2)).unwrap();
    let s = tepc::monthly_savings(&run.state);
    assert!(s[0] > Fixed::ZERO);
    let report = epochsim::SimReport::from_run(&config, &run, None);
    assert_eq!(report.validated, Some(true));
}

#[test]
fn single_null_at_day_two_hour_two() {
    let client = &DatasetBundle::generate(1).weather[2];
    let spec = FaultSpec::SingleNull {
        source: SourceRole::Client,
        day: 2,
        hour: 2,
    };
    let out = inject_weather(client, &spec).unwrap();
    assert_eq!(out[2].at, DateTime::new(2, 2));
    assert_eq!(out[2].sample, SampleTriple::NULL);
}

#[test]
fn delay_moves_six_days_to_hour_one() {
    let meter = &DatasetBundle::generate(1).consumption;
    let spec = FaultSpec::Delay {
        days: vec![3, 11, 16, 25, 27, 30],
        hours: 2,
    };
    let out = inject_consumption(meter, &spec).unwrap();
    assert_eq!(out.len(), 30);
    let moved: Vec<_> = out.iter().filter(|r| r.at.hour == 1).map(|r| r.at.day).collect();
    assert_eq!(moved, [4, 12, 17, 26, 28, 31]);
}

#[test]
fn parses_spec_rows() {
    let rows = parse_weather("day,hour,temperature,pressure,humidity\n2,05,20.000,1000.000,50.000\n2,05,,1000.000,50.000\n".as_bytes(), "x").unwrap();
    assert_eq!(rows[0], WeatherRow { at: DateTime::new(2, 5), sample: triple("20", "1000", "50") });
    assert_eq!(rows[1].sample.temperature, None);
}

#[test]
fn files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("esco_seed1.csv");
    let rows = DatasetBundle::generate(1).weather[0].clone();
    write_weather_csv(&path, &rows).unwrap();
    assert_eq!(read_weather_csv(&path).unwrap(), rows);
    assert!(read_weather_csv(&dir.path().join("missing.csv")).is_err());
}

fn weather_rows() -> impl Strategy<Value = Vec<WeatherRow>> {
    let channel = prop::option::weighted(0.9, -99_999i64..99_999).prop_map(|o| o.map(Fixed::from_milli));
    prop::collection::vec(((1u32..=31, 0u32..24), channel.clone(), channel.clone(), channel), 0..40).prop_map(|mut v| {
        v.sort_by_key(|(at, ..)| *at);
        v.into_iter()
            .map(|((day, hour), t, p, h)| WeatherRow {
                at: DateTime::new(day, hour),
                sample: SampleTriple::from_channels([t, p, h]),
            })
            .collect()
    })
}

proptest! {
    #[test]
    fn csv_round_trip(rows in weather_rows()) {
        let text = write_weather(&rows);
        let back = parse_weather(text.as_bytes(), "prop").unwrap();
        prop_assert_eq!(&back, &rows);
        prop_assert_eq!(write_weather(&back), text);
    }

    #[test]
    fn consumption_round_trip(values in prop::collection::vec(prop::option::of(0i64..1_000_000), 30)) {
        let rows: Vec<_> = values
            .iter()
            .enumerate()
            .map(|(i, v)| epochsim::dataset::ConsumptionRow { at: DateTime::new(i as u32 + 2, 23), consumption: v.map(Fixed::from_milli) })
            .collect();
        let text = write_consumption(&rows);
        prop_assert_eq!(parse_consumption(text.as_bytes(), "prop").unwrap(), rows);
    }

    #[test]
    fn injection_is_local(seed in 0u64..500, count in 25u32..=30, kind in 0..2u8) {
        let rows = DatasetBundle::generate(seed % 7 + 1).weather[0].clone();
        let spec = if kind == 0 {
            FaultSpec::MultiNull { source: SourceRole::Esco, count, seed }
        } else {
            FaultSpec::DuplicateZero { source: SourceRole::Esco, count, seed }
        };
        let out = inject_weather(&rows, &spec).unwrap();
        prop_assert_eq!(inject_weather(&rows, &spec).unwrap(), out.clone());
        match spec {
            FaultSpec::MultiNull { .. } => {
                prop_assert_eq!(out.len(), rows.len());
                let changed: Vec<_> = rows.iter().zip(&out).filter(|(a, b)| a != b).collect();
                prop_assert_eq!(changed.len(), count as usize);
                prop_assert!(changed.iter().all(|(_, b)| b.sample.is_all_null()));
            }
            _ => {
                prop_assert_eq!(out.len(), rows.len() + count as usize);
                let zero = triple("0", "0", "0");
                let kept: Vec<WeatherRow> = out
                    .iter()
                    .enumerate()
                    .filter(|(i, r)| !(r.sample == zero && *i > 0 && out[i - 1].at == r.at))
                    .map(|(_, r)| *r)
                    .collect();
                prop_assert_eq!(kept, rows);
            }
        }
    }
}
