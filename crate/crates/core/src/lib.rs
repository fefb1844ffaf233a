//! Blockchain pipeline simulator for an energy performance contract.
//!
//! Runs the same contract workload under an order-execute and an
//! execute-order-validate pipeline over seeded, fault-injected datasets.

pub mod arch;
pub mod dataset;
pub mod error;
pub mod fixed;
pub mod ledger;
pub mod runtime;
pub mod scenario;
pub mod sim;
pub mod tepc;

pub use arch::{ArchitectureConfig, ArchitectureKind};
pub use error::{Error, Result};
pub use fixed::Fixed;
pub use scenario::{run_scenario, Scenario, ScenarioConfig, SimReport};
