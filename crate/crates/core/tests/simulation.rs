mod common;

use std::sync::Arc;

use epochsim::arch::{produce_block, ArchitectureConfig, ArchitectureKind, Mempool};
use epochsim::dataset::DatasetBundle;
use epochsim::ledger::{canonical_json, Chain, TxStatus, WorldState};
use epochsim::runtime::ContractRegistry;
use epochsim::scenario::{run_scenario, simulate, Scenario, ScenarioConfig};
use epochsim::sim::{oracle_tick, stakeholder_tick, meter_tick, SimulationClock, SourceAgent};
use epochsim::tepc::{self, addr, DegreeDayModel, VotingParams};

const ARCHS: [ArchitectureKind; 2] = [ArchitectureKind::OrderExecute, ArchitectureKind::ExecuteOrderValidate];

#[test]
fn thirty_midnights_and_one_month_end() {
    for kind in ARCHS {
        let config = ScenarioConfig::new(Scenario::S1, kind, 1);
        let run = simulate(&config, &DatasetBundle::generate(1)).unwrap();
        let midnights: Vec<_> = run.transactions.iter().filter(|t| t.method == "midnightProcess").collect();
        assert_eq!(midnights.len(), 30);
        assert_eq!(midnights[0].proposed_at_step, 48);
        assert!(midnights.iter().all(|t| run.receipt(t.txid).status == TxStatus::Applied));
        assert_eq!(run.transactions.iter().filter(|t| t.method == "monthEndProcess").count(), 1);
        assert_eq!(run.receipts.len(), run.transactions.len());
        assert_eq!(tepc::daily_savings(&run.state).len(), 30);
        assert!(tepc::pending_samples(&run.state).is_empty());
    }
}

#[test]
fn each_hour_is_one_block() {
    let config = ScenarioConfig::new(Scenario::S1, ArchitectureKind::ExecuteOrderValidate, 3);
    let run = simulate(&config, &DatasetBundle::generate(3)).unwrap();
    let blocks = run.chain.blocks();
    for (i, b) in blocks.iter().enumerate() {
        assert_eq!(b.height, i as u64);
        assert!(b.txs.iter().all(|t| t.proposed_at_step == b.step));
    }
    let day_two: Vec<_> = blocks.iter().filter(|b| (24..48).contains(&b.step)).collect();
    assert_eq!(day_two.len(), 24);
    assert!(day_two.iter().all(|b| b.txs.iter().filter(|t| t.method == "addHourlySample").count() == 3));
}

/// Steps the scheduler by hand to look at the state right after each midnight.
#[test]
fn stores_are_empty_after_every_midnight() {
    let data = DatasetBundle::generate(2);
    let clock = SimulationClock::default();
    for kind in ARCHS {
        let config = ArchitectureConfig::new(kind);
        let mut registry = ContractRegistry::new();
        let mut state = WorldState::new();
        tepc::deploy(&mut registry, &mut state, &VotingParams::default(), Arc::new(DegreeDayModel::default()), 12);
        let mut chain = Chain::new();
        let mut pool = Mempool::new();
        let mut agents: Vec<SourceAgent> = addr::stakeholders()
            .into_iter()
            .zip(&data.weather)
            .map(|(a, rows)| SourceAgent::stakeholder(a, rows))
            .collect();
        let mut meter = SourceAgent::meter(addr::meter(), &data.consumption);
        for step in 16..=clock.close_step() {
            let mut proposals: Vec<_> = oracle_tick(&clock, step).into_iter().collect();
            let midnight = proposals.iter().any(|p| p.method == "midnightProcess");
            for a in &mut agents {
                proposals.extend(stakeholder_tick(a, &clock, step));
            }
            proposals.extend(meter_tick(&mut meter, &clock, step));
            for p in proposals {
                pool.propose(p.proposer, p.target, p.method, p.args, step);
            }
            produce_block(&config, &mut pool, &mut chain, &mut state, &registry, step);
            if midnight {
                // only the new day's hour-0 samples may remain
                let day = step / 24 + 1;
                let leftover: Vec<_> = tepc::pending_samples(&state)
                    .into_iter()
                    .filter(|k| !k.key.ends_with(&format!("/d{day:02}/h00")))
                    .collect();
                assert!(leftover.is_empty(), "{kind:?} step {step}: {leftover:?}");
            }
        }
    }
}

#[test]
fn identical_configs_give_identical_bytes() {
    for scenario in [Scenario::S2b, Scenario::S3] {
        for kind in ARCHS {
            let config = ScenarioConfig::new(scenario, kind, 4);
            let data = epochsim::scenario::faulted(&config, &DatasetBundle::generate(4)).unwrap();
            let a = simulate(&config, &data).unwrap();
            let b = simulate(&config, &data).unwrap();
            assert_eq!(a.transactions, b.transactions);
            assert_eq!(canonical_json(&a.chain, &a.state, &a.receipts), canonical_json(&b.chain, &b.state, &b.receipts));
        }
    }
}

#[test]
fn report_config_replays() {
    let config = ScenarioConfig::new(Scenario::S4, ArchitectureKind::OrderExecute, 2);
    let report = run_scenario(&config).unwrap();
    let replayed = epochsim::SimReport::from_json(&report.to_json()).unwrap();
    assert_eq!(replayed, report);
    assert_eq!(run_scenario(&replayed.config).unwrap().to_json(), report.to_json());
    assert_eq!(report.monthly_saving, tepc::monthly_savings(&simulate(&config, &epochsim::scenario::faulted(&config, &DatasetBundle::generate(2)).unwrap()).unwrap().state).last().copied());
}

#[test]
fn config_file_changes_the_run() {
    let mut config = ScenarioConfig::new(Scenario::S1, ArchitectureKind::ExecuteOrderValidate, 1);
    let base = run_scenario(&config).unwrap();
    config.apply_config_text("model.base_load = 60\neov.endorsers = 3\n").unwrap();
    let shifted = run_scenario(&config).unwrap();
    // ten extra kWh of predicted consumption on each of 30 days
    assert_eq!(shifted.monthly_saving.unwrap() - base.monthly_saving.unwrap(), epochsim::Fixed::from_int(300));
}
