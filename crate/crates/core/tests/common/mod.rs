#![allow(dead_code)]

use std::sync::Arc;

use epochsim::fixed::Fixed;
use epochsim::ledger::{Address, SampleTriple, StateKey, Transaction, TxId, Value, WorldState};
use epochsim::runtime::ContractRegistry;
use epochsim::tepc::{self, addr, DegreeDayModel, VotingParams};

pub fn fx(s: &str) -> Fixed {
    s.parse().unwrap()
}

pub fn triple(t: &str, p: &str, h: &str) -> SampleTriple {
    SampleTriple::new(fx(t), fx(p), fx(h))
}

pub fn num(n: i64) -> Value {
    Value::Number(Fixed::from_int(n))
}

/// Contracts deployed at step 12 with default parameters.
pub fn deployed() -> (ContractRegistry, WorldState) {
    let mut registry = ContractRegistry::new();
    let mut state = WorldState::new();
    tepc::deploy(
        &mut registry,
        &mut state,
        &VotingParams::default(),
        Arc::new(DegreeDayModel::default()),
        12,
    );
    (registry, state)
}

pub fn call(id: u64, proposer: Address, target: Address, method: &str, args: Vec<Value>, step: u64) -> Transaction {
    Transaction {
        txid: TxId(id),
        proposer,
        target,
        method: method.to_string(),
        args,
        proposed_at_step: step,
        arrival_seq: id,
    }
}

pub fn hourly(id: u64, source: Address, sample: SampleTriple, day: u32, hour: u32) -> Transaction {
    let step = 24 * (day as u64 - 1) + hour as u64;
    call(
        id,
        source,
        addr::data_qualifier(),
        "addHourlySample",
        vec![Value::Sample(sample), num(day as i64), num(hour as i64)],
        step,
    )
}

pub fn daily(id: u64, kwh: Option<&str>, day: u32, step: u64) -> Transaction {
    let kwh = kwh.map(|k| Value::Number(fx(k))).unwrap_or(Value::Null);
    call(id, addr::meter(), addr::data_qualifier(), "addDailySample", vec![kwh, num(day as i64)], step)
}

pub fn oracle(id: u64, method: &str, step: u64) -> Transaction {
    call(id, addr::oracle(), addr::data_qualifier(), method, vec![], step)
}

pub fn stored(state: &WorldState, source: &Address, day: u32, hour: u32) -> Value {
    state.value(&StateKey::new(&addr::data_qualifier(), tepc::hourly_key(source, day, hour)))
}
