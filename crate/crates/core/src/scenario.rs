//! Named fault scenarios, run configuration and reports.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::arch::{ArchitectureConfig, ArchitectureKind};
use crate::dataset::{DatasetBundle, DatasetPaths, FaultSpec, SourceRole};
use crate::error::{Error, Result};
use crate::fixed::Fixed;
use crate::ledger::{BlockStatus, Value};
use crate::sim::{run_simulation, SimRun, SimulationClock, SimulationSetup};
use crate::tepc::{self, DegreeDayModel, ModelParams, VotingParams};

/// Days whose meter reading arrives late in the transaction-order scenario.
pub const DELAYED_DAYS: [u32; 6] = [3, 11, 16, 25, 27, 30];

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    /// Clean data.
    S1,
    /// One null client sample.
    S2a,
    /// 25-30 null client samples.
    S2b,
    /// 25-30 ESCO rows followed by an all-zero duplicate.
    S3,
    /// Meter readings of six days pushed past midnight.
    S4,
}

impl Scenario {
    pub const ALL: [Scenario; 5] = [Scenario::S1, Scenario::S2a, Scenario::S2b, Scenario::S3, Scenario::S4];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::S1 => "s1",
            Scenario::S2a => "s2a",
            Scenario::S2b => "s2b",
            Scenario::S3 => "s3",
            Scenario::S4 => "s4",
        }
    }

    /// The dataset mutation this scenario applies, if any.
    pub fn fault(self, rng_seed: u64, delay_hours: u32) -> Option<FaultSpec> {
        let count = ChaCha8Rng::seed_from_u64(rng_seed).random_range(25..=30u32);
        match self {
            Scenario::S1 => None,
            Scenario::S2a => Some(FaultSpec::SingleNull {
                source: SourceRole::Client,
                day: 2,
                hour: 2,
            }),
            Scenario::S2b => Some(FaultSpec::MultiNull {
                source: SourceRole::Client,
                count,
                seed: rng_seed,
            }),
            Scenario::S3 => Some(FaultSpec::DuplicateZero {
                source: SourceRole::Esco,
                count,
                seed: rng_seed,
            }),
            Scenario::S4 => Some(FaultSpec::Delay {
                days: DELAYED_DAYS.to_vec(),
                hours: delay_hours,
            }),
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown scenario {s:?}")))
    }
}

pub fn parse_architecture(s: &str) -> Result<ArchitectureKind> {
    match s.to_ascii_lowercase().as_str() {
        "oe" => Ok(ArchitectureKind::OrderExecute),
        "eov" => Ok(ArchitectureKind::ExecuteOrderValidate),
        _ => Err(Error::Config(format!("unknown architecture {s:?}"))),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetSource {
    /// Generate the clean datasets from this seed.
    Seed(u64),
    /// Load clean datasets from files.
    Paths(DatasetPaths),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub architecture: ArchitectureConfig,
    pub dataset: DatasetSource,
    pub model: ModelParams,
    pub voting: VotingParams,
    /// Drives fault placement.
    pub rng_seed: u64,
    pub delay_hours: u32,
}

impl ScenarioConfig {
    pub fn new(scenario: Scenario, kind: ArchitectureKind, seed: u64) -> Self {
        ScenarioConfig {
            scenario,
            architecture: ArchitectureConfig::new(kind),
            dataset: DatasetSource::Seed(seed),
            model: ModelParams::default(),
            voting: VotingParams::default(),
            rng_seed: seed,
            delay_hours: 2,
        }
    }

    pub fn with_scenario(&self, scenario: Scenario) -> Self {
        ScenarioConfig {
            scenario,
            ..self.clone()
        }
    }

    pub fn with_architecture(&self, kind: ArchitectureKind) -> Self {
        let mut c = self.clone();
        c.architecture.kind = kind;
        c
    }

    pub fn fault(&self) -> Option<FaultSpec> {
        self.scenario.fault(self.rng_seed, self.delay_hours)
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_config_text(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            self.set(key.trim(), value.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", n + 1)))?;
        }
        Ok(())
    }

    fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let fixed = || value.parse::<Fixed>().map_err(|e| format!("{key}: {e}"));
        let int = || value.parse::<u64>().map_err(|_| format!("{key}: expected a non-negative integer"));
        match key {
            "scenario" => self.scenario = value.parse().map_err(|e: Error| e.to_string())?,
            "architecture" => self.architecture.kind = parse_architecture(value).map_err(|e| e.to_string())?,
            "dataset.seed" => self.dataset = DatasetSource::Seed(int()?),
            "rng_seed" => self.rng_seed = int()?,
            "model.base_load" => self.model.base_load = fixed()?,
            "model.hdd_coefficient" => self.model.hdd_coefficient = fixed()?,
            "model.base_temperature" => self.model.base_temperature = fixed()?,
            "voting.tolerance.temperature" => self.voting.tolerances.temperature = fixed()?,
            "voting.tolerance.pressure" => self.voting.tolerances.pressure = fixed()?,
            "voting.tolerance.humidity" => self.voting.tolerances.humidity = fixed()?,
            "voting.weight.esco" => self.voting.weights.0[0] = fixed()?,
            "voting.weight.meteo" => self.voting.weights.0[1] = fixed()?,
            "voting.weight.client" => self.voting.weights.0[2] = fixed()?,
            "eov.endorsers" => {
                self.architecture.eov_endorser_count = u32::try_from(int()?).map_err(|e| e.to_string())?;
                if self.architecture.eov_endorser_count == 0 {
                    return Err("eov.endorsers must be at least 1".into());
                }
            }
            "oe.skip_preexecution" => {
                self.architecture.oe_skip_preexecution = value.parse().map_err(|_| format!("{key}: expected true or false"))?
            }
            "block.frequency" => {
                let k = int()?;
                if !(1..24).contains(&k) {
                    return Err("block.frequency must be between 1 and 23".into());
                }
                self.architecture.block_frequency_steps = k;
            }
            "fault.delay_hours" => {
                self.delay_hours = u32::try_from(int()?).map_err(|e| e.to_string())?;
            }
            _ => return Err(format!("unknown key {key:?}")),
        }
        Ok(())
    }
}

/// Clean datasets for `config`, before any fault.
pub fn load_clean_datasets(config: &ScenarioConfig) -> Result<DatasetBundle> {
    match &config.dataset {
        DatasetSource::Seed(seed) => Ok(DatasetBundle::generate(*seed)),
        DatasetSource::Paths(paths) => DatasetBundle::load(paths),
    }
}

/// Applies the scenario's fault to a clean bundle.
pub fn faulted(config: &ScenarioConfig, clean: &DatasetBundle) -> Result<DatasetBundle> {
    let mut bundle = clean.clone();
    if let Some(spec) = config.fault() {
        bundle.inject(&spec)?;
    }
    Ok(bundle)
}

/// Runs `config` over the given (already faulted) datasets.
pub fn simulate(config: &ScenarioConfig, datasets: &DatasetBundle) -> Result<SimRun> {
    run_simulation(&SimulationSetup {
        architecture: config.architecture,
        voting: config.voting,
        model: Arc::new(DegreeDayModel(config.model)),
        clock: SimulationClock::default(),
        datasets,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DailySaving {
    pub day: u32,
    pub saving: Fixed,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimReport {
    pub config: ScenarioConfig,
    pub fault: Option<FaultSpec>,
    /// Last entry of the monthly-saving list, if month end committed.
    pub monthly_saving: Option<Fixed>,
    pub validated: Option<bool>,
    pub daily_savings: Vec<DailySaving>,
    pub receipt_counts: BTreeMap<String, usize>,
    pub transaction_count: usize,
    pub block_count: usize,
    pub invalidated_blocks: Vec<u64>,
    /// Monthly saving of the clean run with the same datasets and architecture.
    pub baseline_saving: Option<Fixed>,
    pub deviation: Option<Fixed>,
}

impl SimReport {
    pub fn from_run(config: &ScenarioConfig, run: &SimRun, baseline_saving: Option<Fixed>) -> Self {
        let monthly_saving = tepc::monthly_savings(&run.state).last().copied();
        let validated = run
            .receipts
            .iter()
            .rev()
            .find(|r| run.transaction(r.txid).method == "monthEndProcess")
            .and_then(|r| match r.output {
                Some(Value::Bool(b)) => Some(b),
                _ => None,
            });
        let mut receipt_counts = BTreeMap::new();
        for r in &run.receipts {
            *receipt_counts.entry(r.status.label().to_string()).or_insert(0) += 1;
        }
        let invalidated_blocks = run
            .chain
            .blocks()
            .iter()
            .filter(|b| b.status == BlockStatus::Invalidated)
            .map(|b| b.height)
            .collect();
        let deviation = match (monthly_saving, baseline_saving) {
            (Some(s), Some(b)) => Some(s - b),
            _ => None,
        };
        SimReport {
            config: config.clone(),
            fault: config.fault(),
            monthly_saving,
            validated,
            daily_savings: run
                .daily_savings_by_day()
                .into_iter()
                .map(|(day, saving)| DailySaving { day, saving })
                .collect(),
            receipt_counts,
            transaction_count: run.transactions.len(),
            block_count: run.chain.len(),
            invalidated_blocks,
            baseline_saving,
            deviation,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> serde_json::Result<SimReport> {
        serde_json::from_str(text)
    }

    /// Aligned text summary.
    pub fn table(&self) -> String {
        let opt = |v: Option<Fixed>| v.map(|f| f.to_string()).unwrap_or_else(|| "-".into());
        let mut rows = vec![
            ("scenario".to_string(), self.config.scenario.to_string()),
            ("architecture".to_string(), self.config.architecture.kind.short_name().to_string()),
            ("monthly saving (kWh)".to_string(), opt(self.monthly_saving)),
            (
                "validated".to_string(),
                self.validated.map(|b| b.to_string()).unwrap_or_else(|| "-".into()),
            ),
            ("baseline (kWh)".to_string(), opt(self.baseline_saving)),
            ("deviation (kWh)".to_string(), opt(self.deviation)),
            ("blocks".to_string(), self.block_count.to_string()),
            ("invalidated blocks".to_string(), self.invalidated_blocks.len().to_string()),
            ("transactions".to_string(), self.transaction_count.to_string()),
        ];
        for (status, n) in &self.receipt_counts {
            rows.push((format!("  {status}"), n.to_string()));
        }
        let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        rows.iter().map(|(k, v)| format!("{k:<width$}  {v}\n")).collect()
    }
}

/// Runs the scenario and, unless it is the clean one, the clean baseline it is compared to.
pub fn run_scenario(config: &ScenarioConfig) -> Result<SimReport> {
    let clean = load_clean_datasets(config)?;
    run_scenario_on(config, &clean)
}

pub fn run_scenario_on(config: &ScenarioConfig, clean: &DatasetBundle) -> Result<SimReport> {
    let data = faulted(config, clean)?;
    let run = simulate(config, &data)?;
    let baseline = if config.scenario == Scenario::S1 {
        tepc::monthly_savings(&run.state).last().copied()
    } else {
        let base = simulate(&config.with_scenario(Scenario::S1), clean)?;
        tepc::monthly_savings(&base.state).last().copied()
    };
    Ok(SimReport::from_run(config, &run, baseline))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MatrixRow {
    pub dataset: u64,
    pub scenario: Scenario,
    pub oe: Option<Fixed>,
    pub eov: Option<Fixed>,
    pub pattern: &'static str,
    pub holds: bool,
}

/// Relation each scenario is expected to show between OE, EOV and the clean run.
pub fn expected_pattern(scenario: Scenario) -> &'static str {
    match scenario {
        Scenario::S1 => "OE==EOV",
        Scenario::S2a | Scenario::S2b => "OE!=EOV;OE!=S1;EOV!=S1",
        Scenario::S3 => "EOV==S1;OE!=S1",
        Scenario::S4 => "OE==EOV;OE!=S1",
    }
}

fn pattern_holds(scenario: Scenario, oe: Option<Fixed>, eov: Option<Fixed>, base: Option<Fixed>) -> bool {
    match scenario {
        Scenario::S1 => oe == eov,
        Scenario::S2a | Scenario::S2b => oe != eov && oe != base && eov != base,
        Scenario::S3 => eov == base && oe != base,
        Scenario::S4 => oe == eov && oe != base,
    }
}

/// Every scenario under both architectures for each seed, in (seed, scenario) order.
/// Seeds run on separate threads; the output order does not depend on scheduling.
pub fn matrix(seeds: &[u64], template: &ScenarioConfig) -> Result<Vec<MatrixRow>> {
    let per_seed: Vec<Result<Vec<MatrixRow>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = seeds
            .iter()
            .map(|&seed| scope.spawn(move || matrix_for_seed(seed, template)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("matrix worker panicked")).collect()
    });
    let mut rows = Vec::new();
    for r in per_seed {
        rows.extend(r?);
    }
    Ok(rows)
}

fn matrix_for_seed(seed: u64, template: &ScenarioConfig) -> Result<Vec<MatrixRow>> {
    let base_config = ScenarioConfig {
        dataset: DatasetSource::Seed(seed),
        rng_seed: seed,
        ..template.clone()
    };
    let clean = load_clean_datasets(&base_config)?;
    let saving = |scenario: Scenario, kind: ArchitectureKind| -> Result<Option<Fixed>> {
        let config = base_config.with_scenario(scenario).with_architecture(kind);
        let run = simulate(&config, &faulted(&config, &clean)?)?;
        Ok(tepc::monthly_savings(&run.state).last().copied())
    };
    let mut rows = Vec::new();
    let mut baseline = None;
    for scenario in Scenario::ALL {
        let oe = saving(scenario, ArchitectureKind::OrderExecute)?;
        let eov = saving(scenario, ArchitectureKind::ExecuteOrderValidate)?;
        if scenario == Scenario::S1 {
            baseline = eov;
        }
        rows.push(MatrixRow {
            dataset: seed,
            scenario,
            oe,
            eov,
            pattern: expected_pattern(scenario),
            holds: pattern_holds(scenario, oe, eov, baseline),
        });
    }
    Ok(rows)
}

pub fn matrix_csv(rows: &[MatrixRow]) -> String {
    let opt = |v: Option<Fixed>| v.map(|f| f.to_string()).unwrap_or_default();
    let mut out = String::from("dataset,scenario,oe,eov,pattern,holds\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.dataset,
            r.scenario,
            opt(r.oe),
            opt(r.eov),
            r.pattern,
            r.holds
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_text_overrides() {
        let mut c = ScenarioConfig::new(Scenario::S1, ArchitectureKind::OrderExecute, 1);
        c.apply_config_text(
            "# comment\nmodel.base_load = 40\nvoting.weight.client = 2.5\neov.endorsers=3\noe.skip_preexecution=false\narchitecture = eov\n",
        )
        .unwrap();
        assert_eq!(c.model.base_load, Fixed::from_int(40));
        assert_eq!(c.voting.weights.0[2], Fixed::from_milli(2_500));
        assert_eq!(c.architecture.eov_endorser_count, 3);
        assert!(!c.architecture.oe_skip_preexecution);
        assert_eq!(c.architecture.kind, ArchitectureKind::ExecuteOrderValidate);
        assert!(c.apply_config_text("nope = 1").is_err());
        assert!(c.apply_config_text("eov.endorsers = 0").is_err());
        assert!(c.apply_config_text("just text").is_err());
    }

    #[test]
    fn config_round_trips_through_json() {
        let c = ScenarioConfig::new(Scenario::S3, ArchitectureKind::ExecuteOrderValidate, 4);
        let back: ScenarioConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn fault_counts_in_range() {
        for seed in 0..50 {
            match Scenario::S2b.fault(seed, 2) {
                Some(FaultSpec::MultiNull { count, .. }) => assert!((25..=30).contains(&count)),
                other => panic!("{other:?}"),
            }
        }
        assert_eq!(Scenario::S1.fault(1, 2), None);
    }

    #[test]
    fn scenario_names_parse() {
        for s in Scenario::ALL {
            assert_eq!(s.name().parse::<Scenario>().unwrap(), s);
        }
        assert!("s5".parse::<Scenario>().is_err());
    }
}
