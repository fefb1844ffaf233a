//! Ledger data types shared by both execution pipelines: participants,
//! transactions, blocks, receipts and the versioned world state.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::fixed::Fixed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AddressKind {
    Contract,
    Source,
    Oracle,
    Proposer,
}

/// Identity of a participant or a deployed contract.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Address {
    pub kind: AddressKind,
    pub id: String,
}

impl Address {
    pub fn new(kind: AddressKind, id: impl Into<String>) -> Self {
        let id = id.into();
        assert!(!id.is_empty(), "address id must be non-empty");
        Address { kind, id }
    }

    pub fn contract(id: impl Into<String>) -> Self {
        Self::new(AddressKind::Contract, id)
    }

    pub fn source(id: impl Into<String>) -> Self {
        Self::new(AddressKind::Source, id)
    }

    pub fn oracle(id: impl Into<String>) -> Self {
        Self::new(AddressKind::Oracle, id)
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id)
    }
}

/// Temperature (°C), pressure (hPa) and humidity (%) readings; any channel may be missing.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SampleTriple {
    pub temperature: Option<Fixed>,
    pub pressure: Option<Fixed>,
    pub humidity: Option<Fixed>,
}

impl SampleTriple {
    pub fn new(temperature: Fixed, pressure: Fixed, humidity: Fixed) -> Self {
        SampleTriple {
            temperature: Some(temperature),
            pressure: Some(pressure),
            humidity: Some(humidity),
        }
    }

    pub const NULL: SampleTriple = SampleTriple {
        temperature: None,
        pressure: None,
        humidity: None,
    };

    pub fn channels(&self) -> [Option<Fixed>; 3] {
        [self.temperature, self.pressure, self.humidity]
    }

    pub fn from_channels([temperature, pressure, humidity]: [Option<Fixed>; 3]) -> Self {
        SampleTriple {
            temperature,
            pressure,
            humidity,
        }
    }

    pub fn is_all_null(&self) -> bool {
        self.channels().iter().all(Option::is_none)
    }
}

/// Dynamically typed value passed to and stored by contracts.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", content = "value", rename_all = "snake_case")]
pub enum Value {
    Null,
    Number(Fixed),
    Bool(bool),
    Text(String),
    Sample(SampleTriple),
    List(Vec<Value>),
}

impl Value {
    pub fn is_null(&self) -> bool {
        matches!(self, Value::Null)
    }
}

impl From<Fixed> for Value {
    fn from(v: Fixed) -> Self {
        Value::Number(v)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}

impl From<SampleTriple> for Value {
    fn from(v: SampleTriple) -> Self {
        Value::Sample(v)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TxId(pub u64);

impl fmt::Display for TxId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "tx{:06}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transaction {
    pub txid: TxId,
    pub proposer: Address,
    pub target: Address,
    pub method: String,
    pub args: Vec<Value>,
    pub proposed_at_step: u64,
    pub arrival_seq: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockStatus {
    Committed,
    Invalidated,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub height: u64,
    pub step: u64,
    pub txs: Vec<Transaction>,
    pub status: BlockStatus,
}

/// Append-only sequence of blocks with consecutive heights.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chain {
    blocks: Vec<Block>,
}

impl Chain {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn next_height(&self) -> u64 {
        self.blocks.len() as u64
    }

    pub fn push(&mut self, step: u64, txs: Vec<Transaction>, status: BlockStatus) -> &Block {
        let height = self.next_height();
        self.blocks.push(Block {
            height,
            step,
            txs,
            status,
        });
        self.blocks.last().unwrap()
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct StateKey {
    pub contract: Address,
    pub key: String,
}

impl StateKey {
    pub fn new(contract: &Address, key: impl Into<String>) -> Self {
        StateKey {
            contract: contract.clone(),
            key: key.into(),
        }
    }
}

impl fmt::Display for StateKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.contract.id, self.key)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VersionedValue {
    pub value: Value,
    pub version: u64,
}

pub type WriteSet = BTreeMap<StateKey, Value>;

/// Versioned key-value store. The first write of a key yields version 0 and
/// every later committed write bumps it by one.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct WorldState {
    entries: BTreeMap<StateKey, VersionedValue>,
}

impl WorldState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, key: &StateKey) -> Option<&VersionedValue> {
        self.entries.get(key)
    }

    /// Current value, treating absent keys as `Null`.
    pub fn value(&self, key: &StateKey) -> Value {
        self.entries
            .get(key)
            .map(|v| v.value.clone())
            .unwrap_or(Value::Null)
    }

    pub fn version(&self, key: &StateKey) -> Option<u64> {
        self.entries.get(key).map(|v| v.version)
    }

    pub fn commit_writes(&mut self, writes: &WriteSet) {
        for (key, value) in writes {
            match self.entries.get_mut(key) {
                Some(existing) => {
                    existing.value = value.clone();
                    existing.version += 1;
                }
                None => {
                    self.entries.insert(
                        key.clone(),
                        VersionedValue {
                            value: value.clone(),
                            version: 0,
                        },
                    );
                }
            }
        }
    }

    /// Isolated copy; later commits to either side are invisible to the other.
    pub fn snapshot(&self) -> WorldState {
        self.clone()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&StateKey, &VersionedValue)> {
        self.entries.iter()
    }
}

/// Keys read (with the version observed, `None` when absent) and the last
/// value written per key during one execution.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReadWriteSet {
    pub reads: BTreeMap<StateKey, Option<u64>>,
    pub writes: WriteSet,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum TxStatus {
    Applied,
    FailedException { reason: String },
    InvalidatedBlockFault { faulty_txid: TxId, reason: String },
    InvalidatedMvccConflict { key: String },
    RejectedAtEndorsement { reason: String },
}

impl TxStatus {
    /// Short label used in histograms.
    pub fn label(&self) -> &'static str {
        match self {
            TxStatus::Applied => "applied",
            TxStatus::FailedException { .. } => "failed_exception",
            TxStatus::InvalidatedBlockFault { .. } => "invalidated_block_fault",
            TxStatus::InvalidatedMvccConflict { .. } => "invalidated_mvcc_conflict",
            TxStatus::RejectedAtEndorsement { .. } => "rejected_at_endorsement",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Receipt {
    pub txid: TxId,
    #[serde(flatten)]
    pub status: TxStatus,
    pub step_committed: Option<u64>,
    /// Return value of the top-level call when the transaction applied.
    pub output: Option<Value>,
}

/// Canonical JSON document of a run's chain, committed state and receipts:
/// object keys sorted, decimals rendered as strings with three fraction digits.
pub fn canonical_json(chain: &Chain, state: &WorldState, receipts: &[Receipt]) -> String {
    let state_entries: Vec<serde_json::Value> = state
        .iter()
        .map(|(k, v)| {
            serde_json::json!({
                "key": k.to_string(),
                "value": v.value,
                "version": v.version,
            })
        })
        .collect();
    let doc = serde_json::json!({
        "chain": chain.blocks(),
        "state": state_entries,
        "receipts": receipts,
    });
    // serde_json::Map is a BTreeMap without the preserve_order feature
    serde_json::to_string_pretty(&doc).expect("ledger types always serialize")
}
