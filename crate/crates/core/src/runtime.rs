//! Deterministic contract execution.
//!
//! A transaction runs as one flat session: nested contract-to-contract calls
//! share a single read/write set, and any exception aborts the whole call
//! tree with no effects. Contracts cannot catch exceptions.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::fixed::Fixed;
use crate::ledger::{Address, AddressKind, ReadWriteSet, SampleTriple, StateKey, Transaction, Value, WorldState};

pub const MAX_CALL_DEPTH: u32 = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExceptionKind {
    NullValue,
    NotDeployed,
    UnknownMethod,
    BadArgument,
    DepthExceeded,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
#[error("{kind:?} in {origin}: {message}")]
pub struct ContractException {
    pub kind: ExceptionKind,
    pub message: String,
    pub origin: Address,
}

impl ContractException {
    pub fn new(kind: ExceptionKind, origin: &Address, message: impl Into<String>) -> Self {
        ContractException {
            kind,
            message: message.into(),
            origin: origin.clone(),
        }
    }
}

/// Compiled-in contract code behind a uniform dispatch interface.
pub trait Contract: Send + Sync {
    fn invoke(&self, ctx: &mut CallContext<'_, '_>, method: &str, args: &[Value]) -> Result<Value, ContractException>;
}

#[derive(Clone)]
struct Deployment {
    code: Arc<dyn Contract>,
    deployed_at: u64,
}

/// Deployed contracts by address, each with the step it became callable.
#[derive(Clone, Default)]
pub struct ContractRegistry {
    deployments: BTreeMap<Address, Deployment>,
}

impl fmt::Debug for ContractRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map()
            .entries(self.deployments.iter().map(|(a, d)| (a, d.deployed_at)))
            .finish()
    }
}

impl ContractRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn deploy(&mut self, address: Address, code: Arc<dyn Contract>, deployed_at: u64) {
        assert_eq!(address.kind, AddressKind::Contract, "only contract addresses can be deployed");
        self.deployments.insert(address, Deployment { code, deployed_at });
    }

    pub fn deployment_step(&self, address: &Address) -> Option<u64> {
        self.deployments.get(address).map(|d| d.deployed_at)
    }

    fn resolve(&self, address: &Address, step: u64) -> Option<&dyn Contract> {
        self.deployments
            .get(address)
            .filter(|d| d.deployed_at <= step)
            .map(|d| d.code.as_ref())
    }
}

/// Successful execution of one transaction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Execution {
    pub rwset: ReadWriteSet,
    pub output: Value,
}

/// Mutable bookkeeping for one transaction's call tree over a read-only base.
pub struct ExecutionSession<'a> {
    base: &'a WorldState,
    registry: &'a ContractRegistry,
    rwset: ReadWriteSet,
    depth: u32,
    block_step: u64,
}

impl<'a> ExecutionSession<'a> {
    pub fn new(registry: &'a ContractRegistry, base: &'a WorldState, block_step: u64) -> Self {
        ExecutionSession {
            base,
            registry,
            rwset: ReadWriteSet::default(),
            depth: 0,
            block_step,
        }
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    fn read(&mut self, key: StateKey) -> Value {
        if let Some(v) = self.rwset.writes.get(&key) {
            return v.clone();
        }
        let version = self.base.version(&key);
        let value = self.base.value(&key);
        self.rwset.reads.entry(key).or_insert(version);
        value
    }

    fn write(&mut self, key: StateKey, value: Value) {
        self.rwset.writes.insert(key, value);
    }

    /// Invokes `method` on `callee` on behalf of `caller`, merging its effects
    /// into this session.
    pub fn call_contract(
        &mut self,
        caller: &Address,
        callee: &Address,
        method: &str,
        args: &[Value],
    ) -> Result<Value, ContractException> {
        if self.depth + 1 > MAX_CALL_DEPTH {
            return Err(ContractException::new(
                ExceptionKind::DepthExceeded,
                callee,
                format!("call depth {} exceeds {MAX_CALL_DEPTH}", self.depth + 1),
            ));
        }
        let registry = self.registry;
        let code = registry.resolve(callee, self.block_step).ok_or_else(|| {
            ContractException::new(
                ExceptionKind::NotDeployed,
                callee,
                format!("no contract deployed at {callee} as of step {}", self.block_step),
            )
        })?;
        self.depth += 1;
        let mut ctx = CallContext {
            session: self,
            this: callee.clone(),
            caller: caller.clone(),
        };
        let result = code.invoke(&mut ctx, method, args);
        self.depth -= 1;
        result
    }

    pub fn into_rwset(self) -> ReadWriteSet {
        self.rwset
    }
}

/// View of the session from inside one contract frame.
pub struct CallContext<'s, 'a> {
    session: &'s mut ExecutionSession<'a>,
    this: Address,
    caller: Address,
}

impl CallContext<'_, '_> {
    pub fn this(&self) -> &Address {
        &self.this
    }

    pub fn caller(&self) -> &Address {
        &self.caller
    }

    pub fn block_step(&self) -> u64 {
        self.session.block_step
    }

    pub fn depth(&self) -> u32 {
        self.session.depth
    }

    /// Reads a key of this contract's own storage.
    pub fn read(&mut self, key: impl Into<String>) -> Value {
        let key = StateKey::new(&self.this, key);
        self.session.read(key)
    }

    pub fn write(&mut self, key: impl Into<String>, value: Value) {
        let key = StateKey::new(&self.this, key);
        self.session.write(key, value);
    }

    pub fn call(&mut self, callee: &Address, method: &str, args: &[Value]) -> Result<Value, ContractException> {
        let this = self.this.clone();
        self.session.call_contract(&this, callee, method, args)
    }

    pub fn exception(&self, kind: ExceptionKind, message: impl Into<String>) -> ContractException {
        ContractException::new(kind, &self.this, message)
    }

    pub fn require_caller(&self, allowed: &[&Address]) -> Result<(), ContractException> {
        if allowed.iter().any(|a| **a == self.caller) {
            Ok(())
        } else {
            Err(self.exception(
                ExceptionKind::BadArgument,
                format!("caller {} is not authorized", self.caller),
            ))
        }
    }

    /// Numeric view of a value. Null raises `NullValue`.
    pub fn number(&self, value: &Value, what: &str) -> Result<Fixed, ContractException> {
        match value {
            Value::Number(n) => Ok(*n),
            Value::Null => Err(self.exception(ExceptionKind::NullValue, format!("{what} is null"))),
            other => Err(self.exception(ExceptionKind::BadArgument, format!("{what} is not a number: {other:?}"))),
        }
    }

    pub fn sample(&self, value: &Value, what: &str) -> Result<SampleTriple, ContractException> {
        match value {
            Value::Sample(s) => Ok(*s),
            Value::Null => Err(self.exception(ExceptionKind::NullValue, format!("{what} is null"))),
            other => Err(self.exception(ExceptionKind::BadArgument, format!("{what} is not a sample: {other:?}"))),
        }
    }

    pub fn arg<'v>(&self, args: &'v [Value], index: usize, what: &str) -> Result<&'v Value, ContractException> {
        args.get(index)
            .ok_or_else(|| self.exception(ExceptionKind::BadArgument, format!("missing argument {index} ({what})")))
    }

    pub fn unknown_method(&self, method: &str) -> ContractException {
        self.exception(ExceptionKind::UnknownMethod, format!("no method {method:?}"))
    }
}

/// Executes `tx` against `base` without mutating it. Returns the read/write
/// set of the whole call tree, or the exception that aborted it.
pub fn execute(
    registry: &ContractRegistry,
    base: &WorldState,
    tx: &Transaction,
    block_step: u64,
) -> Result<Execution, ContractException> {
    if tx.target.kind != AddressKind::Contract {
        return Err(ContractException::new(
            ExceptionKind::BadArgument,
            &tx.target,
            "transaction target is not a contract",
        ));
    }
    let mut session = ExecutionSession::new(registry, base, block_step);
    let output = session.call_contract(&tx.proposer, &tx.target, &tx.method, &tx.args)?;
    Ok(Execution {
        rwset: session.into_rwset(),
        output,
    })
}
