mod common;

use std::collections::BTreeMap;

use common::*;
use epochsim::arch::{canonical_order, eov_block, eov_endorse, oe_block, produce_block, ArchitectureConfig, ArchitectureKind, Mempool};
use epochsim::ledger::{BlockStatus, Chain, SampleTriple, StateKey, TxStatus, Value, WorldState};
use epochsim::runtime::ContractRegistry;
use epochsim::tepc::addr;
use proptest::prelude::*;

fn null_sample() -> SampleTriple {
    SampleTriple {
        humidity: None,
        ..triple("20", "1000", "50")
    }
}

fn three_samples(day: u32, hour: u32, client: SampleTriple) -> Vec<epochsim::ledger::Transaction> {
    vec![
        hourly(0, addr::esco(), triple("20", "1000", "50"), day, hour),
        hourly(1, addr::meteo(), triple("20.2", "1001", "51"), day, hour),
        hourly(2, addr::client(), client, day, hour),
    ]
}

#[test]
fn oe_valid_block_applies_everything() {
    let (reg, mut state) = deployed();
    let mut chain = Chain::new();
    let out = oe_block(three_samples(2, 0, triple("19.9", "999", "49")), &mut chain, &mut state, &reg, 24, true);
    assert_eq!(out.status, BlockStatus::Committed);
    assert!(out.receipts.iter().all(|r| r.status == TxStatus::Applied));
    assert_eq!(stored(&state, &addr::client(), 2, 0), Value::Sample(triple("19.9", "999", "49")));
}

#[test]
fn oe_null_sample_invalidates_the_block() {
    let (reg, mut state) = deployed();
    let before = state.clone();
    let mut chain = Chain::new();
    let out = oe_block(three_samples(2, 2, null_sample()), &mut chain, &mut state, &reg, 26, true);
    assert_eq!(out.status, BlockStatus::Invalidated);
    assert_eq!(out.receipts.len(), 3);
    assert!(out
        .receipts
        .iter()
        .all(|r| matches!(r.status, TxStatus::InvalidatedBlockFault { faulty_txid, .. } if faulty_txid.0 == 2)));
    assert_eq!(state, before);
    assert_eq!(chain.blocks()[0].txs.len(), 3);
}

#[test]
fn oe_with_preexecution_filters_the_faulty_tx() {
    let (reg, mut state) = deployed();
    let mut chain = Chain::new();
    let out = oe_block(three_samples(2, 2, null_sample()), &mut chain, &mut state, &reg, 26, false);
    assert_eq!(out.status, BlockStatus::Committed);
    let labels: Vec<_> = out.receipts.iter().map(|r| r.status.label()).collect();
    assert_eq!(labels, ["applied", "applied", "failed_exception"]);
    assert_eq!(chain.blocks()[0].txs.len(), 2);
}

#[test]
fn oe_duplicate_overrides_with_zeros() {
    let (reg, mut state) = deployed();
    let mut chain = Chain::new();
    let txs = vec![
        hourly(0, addr::esco(), triple("20", "1000", "50"), 2, 3),
        hourly(1, addr::esco(), triple("0", "0", "0"), 2, 3),
    ];
    let out = oe_block(txs, &mut chain, &mut state, &reg, 27, true);
    assert!(out.receipts.iter().all(|r| r.status == TxStatus::Applied));
    assert_eq!(stored(&state, &addr::esco(), 2, 3), Value::Sample(triple("0", "850", "0")));
}

#[test]
fn endorsement_outcomes() {
    let (reg, state) = deployed();
    let e = eov_endorse(&hourly(0, addr::esco(), triple("20", "1000", "50"), 2, 0), &state, &reg, 2, 24).unwrap();
    assert_eq!(e.endorser_count, 2);
    assert_eq!(e.rwset.writes.len(), 1);

    let rejected = eov_endorse(&hourly(1, addr::client(), null_sample(), 2, 0), &state, &reg, 2, 24).unwrap_err();
    assert!(matches!(rejected, TxStatus::RejectedAtEndorsement { ref reason } if reason.contains("null")));

    let early = eov_endorse(&hourly(2, addr::esco(), triple("20", "1000", "50"), 1, 10), &state, &reg, 2, 10).unwrap_err();
    assert!(matches!(early, TxStatus::RejectedAtEndorsement { ref reason } if reason.contains("no contract")));
}

#[test]
fn eov_duplicate_conflicts() {
    let (reg, mut state) = deployed();
    let mut chain = Chain::new();
    let txs = vec![
        hourly(0, addr::esco(), triple("20", "1000", "50"), 2, 3),
        hourly(1, addr::esco(), triple("0", "0", "0"), 2, 3),
    ];
    let out = eov_block(txs, &mut chain, &mut state, &reg, 27, 2);
    assert_eq!(out.receipts[0].status, TxStatus::Applied);
    assert!(matches!(out.receipts[1].status, TxStatus::InvalidatedMvccConflict { .. }));
    assert_eq!(stored(&state, &addr::esco(), 2, 3), Value::Sample(triple("20", "1000", "50")));
    assert_eq!(chain.blocks()[0].txs.len(), 1);
}

#[test]
fn eov_null_sample_spares_its_peers() {
    let (reg, mut state) = deployed();
    let mut chain = Chain::new();
    let out = eov_block(three_samples(2, 2, null_sample()), &mut chain, &mut state, &reg, 26, 2);
    let labels: Vec<_> = out.receipts.iter().map(|r| r.status.label()).collect();
    assert_eq!(labels, ["applied", "applied", "rejected_at_endorsement"]);
    assert_eq!(stored(&state, &addr::client(), 2, 2), Value::Null);
    assert_eq!(stored(&state, &addr::meteo(), 2, 2), Value::Sample(triple("20.2", "1001", "51")));
}

#[test]
fn canonical_order_puts_the_oracle_first() {
    let esco = hourly(0, addr::esco(), triple("1", "1000", "50"), 3, 0);
    let meter = daily(1, Some("10"), 2, 48);
    let midnight = oracle(2, "midnightProcess", 48);
    let ordered = canonical_order(vec![meter.clone(), esco.clone(), midnight.clone()]);
    assert_eq!(ordered, vec![midnight, esco.clone(), meter]);

    let mut same_source: Vec<_> = (0..5).map(|i| hourly(i, addr::meteo(), triple("1", "1000", "50"), 3, 0)).collect();
    same_source.reverse();
    let ids: Vec<u64> = canonical_order(same_source).iter().map(|t| t.txid.0).collect();
    assert_eq!(ids, [0, 1, 2, 3, 4]);
}

#[test]
fn late_meter_reading_goes_into_a_later_block() {
    let (reg, mut state) = deployed();
    let mut chain = Chain::new();
    let mut pool = Mempool::new();
    let config = ArchitectureConfig::new(ArchitectureKind::ExecuteOrderValidate);
    pool.propose(addr::oracle(), addr::data_qualifier(), "midnightProcess", vec![], 72);
    produce_block(&config, &mut pool, &mut chain, &mut state, &reg, 72).unwrap();
    pool.propose(addr::meter(), addr::data_qualifier(), "addDailySample", vec![num(40), num(3)], 73);
    assert!(produce_block(&config, &mut pool, &mut chain, &mut state, &reg, 72).is_none());
    let out = produce_block(&config, &mut pool, &mut chain, &mut state, &reg, 73).unwrap();
    assert_eq!(out.height, 1);
    assert_eq!(chain.blocks()[1].step, 73);
}

fn disjoint_txs() -> Vec<epochsim::ledger::Transaction> {
    let sources = addr::stakeholders();
    (0..9u64)
        .map(|i| {
            let s = &sources[(i % 3) as usize];
            hourly(i, s.clone(), triple(&format!("{}", i), "1000", "50"), 2, (i / 3) as u32)
        })
        .collect()
}

fn run_eov(txs: Vec<epochsim::ledger::Transaction>, reg: &ContractRegistry, state: &WorldState) -> WorldState {
    let mut state = state.clone();
    let mut chain = Chain::new();
    let out = eov_block(txs, &mut chain, &mut state, reg, 26, 2);
    assert!(out.receipts.iter().all(|r| r.status == TxStatus::Applied));
    state
}

proptest! {
    #[test]
    fn disjoint_transactions_commute(perm in Just((0..9usize).collect::<Vec<_>>()).prop_shuffle()) {
        let (reg, state) = deployed();
        let txs = disjoint_txs();
        let expected = run_eov(txs.clone(), &reg, &state);
        let shuffled = perm.iter().map(|&i| txs[i].clone()).collect();
        prop_assert_eq!(run_eov(shuffled, &reg, &state), expected);
    }

    #[test]
    fn versions_count_commits(commits in prop::collection::vec(prop::collection::vec((0..4u8, -5..5i64), 0..4), 0..12)) {
        let contract = addr::aggregator();
        let mut state = WorldState::new();
        let mut counts: BTreeMap<u8, u64> = BTreeMap::new();
        for batch in &commits {
            let writes: BTreeMap<StateKey, Value> = batch
                .iter()
                .map(|(k, v)| (StateKey::new(&contract, format!("k{k}")), num(*v)))
                .collect();
            let before: Vec<Option<u64>> = (0..4).map(|k| state.version(&StateKey::new(&contract, format!("k{k}")))).collect();
            state.commit_writes(&writes);
            for k in 0..4u8 {
                let key = StateKey::new(&contract, format!("k{k}"));
                if writes.contains_key(&key) {
                    *counts.entry(k).or_default() += 1;
                    // 0 on first write, then +1 per commit
                    prop_assert_eq!(state.version(&key), Some(before[k as usize].map_or(0, |v| v + 1)));
                } else {
                    prop_assert_eq!(state.version(&key), before[k as usize]);
                }
            }
        }
        for (k, n) in counts {
            prop_assert_eq!(state.version(&StateKey::new(&contract, format!("k{k}"))), Some(n - 1));
        }
    }
}

#[test]
fn snapshot_is_isolated() {
    let (_, mut state) = deployed();
    let snap = state.snapshot();
    let key = StateKey::new(&addr::aggregator(), "k");
    state.commit_writes(&[(key.clone(), num(1))].into_iter().collect());
    assert_eq!(snap.version(&key), None);
    assert_eq!(state.version(&key), Some(0));
    assert!(WorldState::new().snapshot().is_empty());
}
