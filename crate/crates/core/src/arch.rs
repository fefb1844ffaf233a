//! The two execution pipelines under comparison.
//!
//! Order-execute puts transactions into a block first and then runs them
//! one after another; a single exception invalidates the whole block.
//! Execute-order-validate simulates each transaction against the state at
//! block start (endorsement), orders the endorsed results, and commits only
//! those whose read versions are still current.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::ledger::{
    Address, AddressKind, BlockStatus, Chain, ReadWriteSet, Receipt, Transaction, TxId, TxStatus, Value, WorldState,
};
use crate::runtime::{execute, ContractRegistry};
use crate::tepc::addr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArchitectureKind {
    OrderExecute,
    ExecuteOrderValidate,
}

impl ArchitectureKind {
    pub fn short_name(self) -> &'static str {
        match self {
            ArchitectureKind::OrderExecute => "oe",
            ArchitectureKind::ExecuteOrderValidate => "eov",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArchitectureConfig {
    pub kind: ArchitectureKind,
    /// Order-execute proposers include transactions without pre-executing them.
    pub oe_skip_preexecution: bool,
    pub eov_endorser_count: u32,
    pub block_frequency_steps: u64,
}

impl ArchitectureConfig {
    pub fn new(kind: ArchitectureKind) -> Self {
        ArchitectureConfig {
            kind,
            oe_skip_preexecution: true,
            eov_endorser_count: 2,
            block_frequency_steps: 1,
        }
    }
}

/// FIFO pool of proposed transactions. Admission assigns the transaction id
/// and arrival sequence.
#[derive(Clone, Debug, Default)]
pub struct Mempool {
    pending: VecDeque<Transaction>,
    next_seq: u64,
}

impl Mempool {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn propose(
        &mut self,
        proposer: Address,
        target: Address,
        method: impl Into<String>,
        args: Vec<Value>,
        step: u64,
    ) -> TxId {
        let seq = self.next_seq;
        self.next_seq += 1;
        let txid = TxId(seq);
        self.pending.push_back(Transaction {
            txid,
            proposer,
            target,
            method: method.into(),
            args,
            proposed_at_step: step,
            arrival_seq: seq,
        });
        txid
    }

    /// Removes every transaction proposed at or before `step`, in admission order.
    pub fn drain_ready(&mut self, step: u64) -> Vec<Transaction> {
        let (ready, waiting): (Vec<_>, Vec<_>) = self.pending.drain(..).partition(|tx| tx.proposed_at_step <= step);
        self.pending = waiting.into();
        ready
    }

    pub fn len(&self) -> usize {
        self.pending.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pending.is_empty()
    }
}

/// Ordering class of a proposer within one block: the time oracle first,
/// weather stakeholders next, the client meter last.
pub fn priority_class(proposer: &Address) -> u8 {
    match proposer.kind {
        AddressKind::Oracle => 0,
        _ if *proposer == addr::meter() => 2,
        _ => 1,
    }
}

/// Stable sort by (priority class, arrival sequence).
pub fn canonical_order(mut txs: Vec<Transaction>) -> Vec<Transaction> {
    txs.sort_by_key(|tx| (priority_class(&tx.proposer), tx.arrival_seq));
    txs
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Endorsement {
    pub tx: Transaction,
    pub rwset: ReadWriteSet,
    pub output: Value,
    pub endorser_count: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockOutcome {
    pub height: u64,
    pub status: BlockStatus,
    pub receipts: Vec<Receipt>,
}

fn applied(txid: TxId, step: u64, output: Value) -> Receipt {
    Receipt {
        txid,
        status: TxStatus::Applied,
        step_committed: Some(step),
        output: Some(output),
    }
}

fn not_applied(txid: TxId, status: TxStatus) -> Receipt {
    Receipt {
        txid,
        status,
        step_committed: None,
        output: None,
    }
}

/// Order-execute block over already-ordered transactions.
pub fn oe_block(
    txs: Vec<Transaction>,
    chain: &mut Chain,
    state: &mut WorldState,
    registry: &ContractRegistry,
    step: u64,
    skip_preexecution: bool,
) -> BlockOutcome {
    let mut working = state.clone();
    let mut included = Vec::with_capacity(txs.len());
    let mut receipts = Vec::with_capacity(txs.len());
    let mut fault = None;

    let mut queue = txs.into_iter();
    for tx in queue.by_ref() {
        match execute(registry, &working, &tx, step) {
            Ok(exec) => {
                working.commit_writes(&exec.rwset.writes);
                receipts.push(applied(tx.txid, step, exec.output));
                included.push(tx);
            }
            Err(e) if !skip_preexecution => {
                // a validating proposer filters the failure out before inclusion
                receipts.push(not_applied(tx.txid, TxStatus::FailedException { reason: e.to_string() }));
            }
            Err(e) => {
                fault = Some((tx.txid, e.to_string()));
                included.push(tx);
                break;
            }
        }
    }
    // execution stops at the fault; the unexecuted tail still belongs to the block
    included.extend(queue);

    if let Some((faulty_txid, reason)) = fault {
        let receipts = included
            .iter()
            .map(|tx| {
                not_applied(
                    tx.txid,
                    TxStatus::InvalidatedBlockFault {
                        faulty_txid,
                        reason: reason.clone(),
                    },
                )
            })
            .collect();
        let height = chain.push(step, included, BlockStatus::Invalidated).height;
        return BlockOutcome {
            height,
            status: BlockStatus::Invalidated,
            receipts,
        };
    }

    *state = working;
    let height = chain.push(step, included, BlockStatus::Committed).height;
    BlockOutcome {
        height,
        status: BlockStatus::Committed,
        receipts,
    }
}

/// Simulates `tx` on `endorsers` independent views of `state`. Failures are
/// returned as the rejection status.
pub fn eov_endorse(
    tx: &Transaction,
    state: &WorldState,
    registry: &ContractRegistry,
    endorsers: u32,
    step: u64,
) -> Result<Endorsement, TxStatus> {
    assert!(endorsers >= 1, "at least one endorser is required");
    let mut first = None;
    for _ in 0..endorsers {
        let exec = execute(registry, state, tx, step).map_err(|e| TxStatus::RejectedAtEndorsement {
            reason: e.to_string(),
        })?;
        match &first {
            None => first = Some(exec),
            Some(prev) if *prev == exec => {}
            Some(_) => {
                return Err(TxStatus::RejectedAtEndorsement {
                    reason: "endorsers produced different results".into(),
                })
            }
        }
    }
    let exec = first.expect("endorsers >= 1");
    Ok(Endorsement {
        tx: tx.clone(),
        rwset: exec.rwset,
        output: exec.output,
        endorser_count: endorsers,
    })
}

/// Execute-order-validate block over already-ordered transactions.
pub fn eov_block(
    txs: Vec<Transaction>,
    chain: &mut Chain,
    state: &mut WorldState,
    registry: &ContractRegistry,
    step: u64,
    endorsers: u32,
) -> BlockOutcome {
    let mut receipts = Vec::with_capacity(txs.len());
    let mut endorsed = Vec::with_capacity(txs.len());
    for tx in &txs {
        match eov_endorse(tx, state, registry, endorsers, step) {
            Ok(e) => endorsed.push(e),
            Err(status) => receipts.push(not_applied(tx.txid, status)),
        }
    }

    let mut written: BTreeSet<_> = BTreeSet::new();
    let mut body = Vec::with_capacity(endorsed.len());
    for e in endorsed {
        let stale_read = e
            .rwset
            .reads
            .iter()
            .find(|(key, version)| state.version(key) != **version)
            .map(|(key, _)| key);
        let overlapping_write = e.rwset.writes.keys().find(|key| written.contains(*key));
        if let Some(key) = stale_read.or(overlapping_write) {
            receipts.push(not_applied(e.tx.txid, TxStatus::InvalidatedMvccConflict { key: key.to_string() }));
            continue;
        }
        state.commit_writes(&e.rwset.writes);
        written.extend(e.rwset.writes.keys().cloned());
        receipts.push(applied(e.tx.txid, step, e.output));
        body.push(e.tx);
    }

    receipts.sort_by_key(|r| r.txid);
    let height = chain.push(step, body, BlockStatus::Committed).height;
    BlockOutcome {
        height,
        status: BlockStatus::Committed,
        receipts,
    }
}

/// Drains the transactions due at `step`, orders them and runs one block
/// under the configured architecture. Returns `None` when nothing was due.
pub fn produce_block(
    config: &ArchitectureConfig,
    mempool: &mut Mempool,
    chain: &mut Chain,
    state: &mut WorldState,
    registry: &ContractRegistry,
    step: u64,
) -> Option<BlockOutcome> {
    let txs = canonical_order(mempool.drain_ready(step));
    if txs.is_empty() {
        return None;
    }
    Some(match config.kind {
        ArchitectureKind::OrderExecute => oe_block(txs, chain, state, registry, step, config.oe_skip_preexecution),
        ArchitectureKind::ExecuteOrderValidate => {
            eov_block(txs, chain, state, registry, step, config.eov_endorser_count)
        }
    })
}

/// Order-execute step: drain, order, execute sequentially.
pub fn oe_step(
    mempool: &mut Mempool,
    chain: &mut Chain,
    state: &mut WorldState,
    registry: &ContractRegistry,
    step: u64,
    skip_preexecution: bool,
) -> Option<BlockOutcome> {
    let config = ArchitectureConfig {
        oe_skip_preexecution: skip_preexecution,
        ..ArchitectureConfig::new(ArchitectureKind::OrderExecute)
    };
    produce_block(&config, mempool, chain, state, registry, step)
}

/// Execute-order-validate step: drain, order, endorse, validate, commit.
pub fn eov_step(
    mempool: &mut Mempool,
    chain: &mut Chain,
    state: &mut WorldState,
    registry: &ContractRegistry,
    step: u64,
    endorsers: u32,
) -> Option<BlockOutcome> {
    let config = ArchitectureConfig {
        eov_endorser_count: endorsers,
        ..ArchitectureConfig::new(ArchitectureKind::ExecuteOrderValidate)
    };
    produce_block(&config, mempool, chain, state, registry, step)
}
