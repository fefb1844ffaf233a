//! Discrete-time scheduler and the agents that feed it.
//!
//! One step is one hour. Day 1 is set-up: contracts are deployed at step 12
//! and the sources bound at step 16. Data flows from step 24 (day 2, 00:00).

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::arch::{produce_block, ArchitectureConfig, Mempool};
use crate::dataset::{ConsumptionRow, DatasetBundle, DateTime, WeatherRow};
use crate::error::{Error, Result};
use crate::fixed::Fixed;
use crate::ledger::{Address, Chain, Receipt, Transaction, TxId, Value, WorldState};
use crate::runtime::ContractRegistry;
use crate::tepc::{self, addr, ConsumptionModel, VotingParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimulationClock {
    pub hours_per_day: u64,
    pub days_per_month: u64,
    pub deploy_step: u64,
    pub source_init_step: u64,
    pub month_begin_step: u64,
    pub first_midnight_step: u64,
    pub end_step: u64,
}

impl Default for SimulationClock {
    fn default() -> Self {
        SimulationClock {
            hours_per_day: 24,
            days_per_month: 31,
            deploy_step: 12,
            source_init_step: 16,
            month_begin_step: 24,
            first_midnight_step: 48,
            end_step: 24 * 31,
        }
    }
}

impl SimulationClock {
    pub fn hour_of_day(&self, step: u64) -> u64 {
        step % self.hours_per_day
    }

    pub fn day(&self, step: u64) -> u64 {
        step / self.hours_per_day + 1
    }

    /// The month-end trigger runs in its own block right after the last midnight.
    pub fn close_step(&self) -> u64 {
        self.end_step + 1
    }
}

/// A transaction an agent wants submitted; the mempool assigns its id.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Proposal {
    pub proposer: Address,
    pub target: Address,
    pub method: &'static str,
    pub args: Vec<Value>,
}

/// A data source replaying its dataset: each row is proposed at the step of its datetime.
#[derive(Clone, Debug)]
pub struct SourceAgent {
    pub address: Address,
    method: &'static str,
    rows: Vec<(u64, Vec<Value>)>,
    cursor: usize,
}

impl SourceAgent {
    pub fn stakeholder(address: Address, rows: &[WeatherRow]) -> Self {
        let rows = rows
            .iter()
            .map(|r| {
                let args = vec![
                    Value::Sample(r.sample),
                    Value::Number(Fixed::from_int(r.at.day as i64)),
                    Value::Number(Fixed::from_int(r.at.hour as i64)),
                ];
                (r.at.step(), args)
            })
            .collect();
        Self::sorted(address, "addHourlySample", rows)
    }

    pub fn meter(address: Address, rows: &[ConsumptionRow]) -> Self {
        let rows = rows
            .iter()
            .map(|r| {
                let kwh = r.consumption.map(Value::Number).unwrap_or(Value::Null);
                // a delayed reading still names the last day closed at 23:00
                let measured = DateTime::from_step(r.at.step().saturating_sub(23)).day;
                (r.at.step(), vec![kwh, Value::Number(Fixed::from_int(measured as i64))])
            })
            .collect();
        Self::sorted(address, "addDailySample", rows)
    }

    fn sorted(address: Address, method: &'static str, mut rows: Vec<(u64, Vec<Value>)>) -> Self {
        rows.sort_by_key(|(step, _)| *step);
        SourceAgent {
            address,
            method,
            rows,
            cursor: 0,
        }
    }

    /// Proposals for `step`. Rows dated earlier than `step` are skipped.
    pub fn tick(&mut self, step: u64) -> Vec<Proposal> {
        while self.rows.get(self.cursor).is_some_and(|(s, _)| *s < step) {
            self.cursor += 1;
        }
        let mut out = Vec::new();
        while let Some((s, args)) = self.rows.get(self.cursor) {
            if *s != step {
                break;
            }
            out.push(Proposal {
                proposer: self.address.clone(),
                target: addr::data_qualifier(),
                method: self.method,
                args: args.clone(),
            });
            self.cursor += 1;
        }
        out
    }

    pub fn remaining(&self) -> usize {
        self.rows.len() - self.cursor
    }
}

pub fn stakeholder_tick(agent: &mut SourceAgent, clock: &SimulationClock, step: u64) -> Vec<Proposal> {
    if step < clock.month_begin_step {
        return Vec::new();
    }
    agent.tick(step)
}

pub fn meter_tick(agent: &mut SourceAgent, clock: &SimulationClock, step: u64) -> Vec<Proposal> {
    stakeholder_tick(agent, clock, step)
}

pub fn oracle_tick(clock: &SimulationClock, step: u64) -> Option<Proposal> {
    let method = if step == clock.close_step() {
        "monthEndProcess"
    } else if (clock.first_midnight_step..=clock.end_step).contains(&step) && clock.hour_of_day(step) == 0 {
        "midnightProcess"
    } else {
        return None;
    };
    Some(Proposal {
        proposer: addr::oracle(),
        target: addr::data_qualifier(),
        method,
        args: Vec::new(),
    })
}

/// Everything a finished run leaves behind.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimRun {
    pub chain: Chain,
    pub state: WorldState,
    /// One receipt per proposed transaction, in txid order.
    pub receipts: Vec<Receipt>,
    pub transactions: Vec<Transaction>,
}

impl SimRun {
    pub fn receipt(&self, txid: TxId) -> &Receipt {
        &self.receipts[txid.0 as usize]
    }

    pub fn transaction(&self, txid: TxId) -> &Transaction {
        &self.transactions[txid.0 as usize]
    }

    /// (day, ζ) for every midnight that committed.
    pub fn daily_savings_by_day(&self) -> Vec<(u32, Fixed)> {
        self.receipts
            .iter()
            .filter(|r| self.transaction(r.txid).method == "midnightProcess")
            .filter_map(|r| match (&r.output, r.step_committed) {
                (Some(Value::Number(z)), Some(step)) => Some(((step / 24) as u32, *z)),
                _ => None,
            })
            .collect()
    }
}

pub struct SimulationSetup<'a> {
    pub architecture: ArchitectureConfig,
    pub voting: VotingParams,
    pub model: Arc<dyn ConsumptionModel>,
    pub clock: SimulationClock,
    pub datasets: &'a DatasetBundle,
}

pub fn run_simulation(setup: &SimulationSetup<'_>) -> Result<SimRun> {
    let clock = &setup.clock;
    let frequency = setup.architecture.block_frequency_steps;
    if frequency == 0 {
        return Err(Error::Config("block frequency must be at least one step".into()));
    }
    if setup.architecture.eov_endorser_count == 0 {
        return Err(Error::Config("at least one endorser is required".into()));
    }

    let mut registry = ContractRegistry::new();
    let mut state = WorldState::new();
    let mut chain = Chain::new();
    let mut mempool = Mempool::new();
    let mut transactions = Vec::new();
    let mut receipts = Vec::new();
    let mut stakeholders: Vec<SourceAgent> = Vec::new();
    let mut meter: Option<SourceAgent> = None;

    for step in 0..=clock.close_step() {
        if step == clock.deploy_step {
            tepc::deploy(&mut registry, &mut state, &setup.voting, setup.model.clone(), step);
        }
        if step == clock.source_init_step {
            stakeholders = addr::stakeholders()
                .into_iter()
                .zip(&setup.datasets.weather)
                .map(|(a, rows)| SourceAgent::stakeholder(a, rows))
                .collect();
            meter = Some(SourceAgent::meter(addr::meter(), &setup.datasets.consumption));
        }

        let mut proposals: Vec<Proposal> = oracle_tick(clock, step).into_iter().collect();
        for agent in &mut stakeholders {
            proposals.extend(stakeholder_tick(agent, clock, step));
        }
        if let Some(m) = &mut meter {
            proposals.extend(meter_tick(m, clock, step));
        }
        for p in proposals {
            let txid = mempool.propose(p.proposer.clone(), p.target.clone(), p.method, p.args.clone(), step);
            transactions.push(Transaction {
                txid,
                proposer: p.proposer,
                target: p.target,
                method: p.method.to_string(),
                args: p.args,
                proposed_at_step: step,
                arrival_seq: txid.0,
            });
        }

        if (step + 1) % frequency == 0 || step == clock.close_step() {
            let expected_height = chain.next_height();
            let due = mempool.len();
            if let Some(outcome) = produce_block(&setup.architecture, &mut mempool, &mut chain, &mut state, &registry, step) {
                if outcome.height != expected_height || outcome.receipts.len() != due {
                    return Err(Error::Invariant(format!(
                        "block at step {step}: height {} (expected {expected_height}), {} receipts for {due} transactions",
                        outcome.height,
                        outcome.receipts.len()
                    )));
                }
                receipts.extend(outcome.receipts);
            }
        }
    }

    receipts.sort_by_key(|r: &Receipt| r.txid);
    let ids: BTreeSet<TxId> = receipts.iter().map(|r| r.txid).collect();
    if !mempool.is_empty() || ids.len() != transactions.len() || receipts.len() != transactions.len() {
        return Err(Error::Invariant(format!(
            "{} transactions proposed, {} receipts, {} left in the mempool",
            transactions.len(),
            receipts.len(),
            mempool.len()
        )));
    }
    Ok(SimRun {
        chain,
        state,
        receipts,
        transactions,
    })
}
