//! The Trusted Energy Performance Contract application: four cooperating
//! contracts (data qualifier, predictor, aggregator, validator) fed by three
//! weather sources, a client meter and a time oracle.

mod aggregator;
mod data_qualifier;
mod predictor;
mod validator;
pub mod voting;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::fixed::Fixed;
use crate::ledger::{Address, StateKey, Value, WorldState, WriteSet};
use crate::runtime::ContractRegistry;

pub use aggregator::Aggregator;
pub use data_qualifier::DataQualifier;
pub use predictor::{ConsumptionModel, DegreeDayModel, Predictor};
pub use validator::{check_variable, Validator, HUMIDITY_BOUNDS, PRESSURE_BOUNDS, TEMPERATURE_BOUNDS};
pub use voting::{qualify_by_voting, QualifiedSample, Tolerances};

/// Well-known participant and contract addresses.
pub mod addr {
    use crate::ledger::Address;

    pub fn esco() -> Address {
        Address::source("esco")
    }
    pub fn meteo() -> Address {
        Address::source("meteo")
    }
    pub fn client() -> Address {
        Address::source("client")
    }
    pub fn meter() -> Address {
        Address::source("meter")
    }
    pub fn oracle() -> Address {
        Address::oracle("oracle")
    }

    /// The three weather stakeholders in voting order.
    pub fn stakeholders() -> [Address; 3] {
        [esco(), meteo(), client()]
    }

    pub fn data_qualifier() -> Address {
        Address::contract("data_qualifier")
    }
    pub fn predictor() -> Address {
        Address::contract("predictor")
    }
    pub fn aggregator() -> Address {
        Address::contract("aggregator")
    }
    pub fn validator() -> Address {
        Address::contract("validator")
    }
}

/// Source weights for the three weather stakeholders, in voting order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Weights(pub [Fixed; 3]);

impl Default for Weights {
    fn default() -> Self {
        Weights([Fixed::from_int(1); 3])
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VotingParams {
    pub tolerances: Tolerances,
    pub weights: Weights,
}

/// Parameters of the default degree-day consumption model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelParams {
    /// kWh per day independent of weather.
    pub base_load: Fixed,
    /// kWh per heating degree-day.
    pub hdd_coefficient: Fixed,
    /// °C below which heating demand accrues.
    pub base_temperature: Fixed,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            base_load: Fixed::from_int(50),
            hdd_coefficient: Fixed::from_int(10),
            base_temperature: Fixed::from_int(18),
        }
    }
}

pub fn hourly_key(source: &Address, day: u32, hour: u32) -> String {
    format!("pi/{}/d{day:02}/h{hour:02}", source.id)
}

pub const METER_KEY: &str = "pi/meter/daily";
pub const LAST_PROCESSED_DAY_KEY: &str = "last_processed_day";

pub fn gamma_key(hour: u32) -> String {
    format!("gamma/h{hour:02}")
}

pub fn weight_key(source: &Address) -> String {
    format!("weights/{}", source.id)
}

/// Registers the four contracts at `step` and writes their genesis storage.
/// Deploying the data qualifier brings up the other three with it.
pub fn deploy(
    registry: &mut ContractRegistry,
    state: &mut WorldState,
    voting: &VotingParams,
    model: Arc<dyn ConsumptionModel>,
    step: u64,
) {
    registry.deploy(addr::data_qualifier(), Arc::new(DataQualifier::new(voting.tolerances)), step);
    registry.deploy(addr::predictor(), Arc::new(Predictor::new(model)), step);
    registry.deploy(addr::aggregator(), Arc::new(Aggregator), step);
    registry.deploy(addr::validator(), Arc::new(Validator), step);

    let dq = addr::data_qualifier();
    let mut genesis = WriteSet::new();
    for (source, weight) in addr::stakeholders().iter().zip(voting.weights.0) {
        genesis.insert(StateKey::new(&dq, weight_key(source)), Value::Number(weight));
    }
    // day 1 is set-up only; the first midnight closes day 2
    genesis.insert(
        StateKey::new(&dq, LAST_PROCESSED_DAY_KEY),
        Value::Number(Fixed::from_int(1)),
    );
    state.commit_writes(&genesis);
}

/// Daily savings recorded so far, read from committed state.
pub fn daily_savings(state: &WorldState) -> Vec<Fixed> {
    list_from_state(state, "sigma_d")
}

/// Monthly savings recorded so far, read from committed state.
pub fn monthly_savings(state: &WorldState) -> Vec<Fixed> {
    list_from_state(state, "sigma_m")
}

fn list_from_state(state: &WorldState, prefix: &str) -> Vec<Fixed> {
    let agg = addr::aggregator();
    let len = match state.value(&StateKey::new(&agg, format!("{prefix}/len"))) {
        Value::Number(n) => (n.milli() / 1000) as usize,
        _ => 0,
    };
    (0..len)
        .filter_map(|i| match state.value(&StateKey::new(&agg, format!("{prefix}/{i}"))) {
            Value::Number(n) => Some(n),
            _ => None,
        })
        .collect()
}

/// Qualified samples currently stored for each hour.
pub fn qualified_samples(state: &WorldState) -> Vec<Option<QualifiedSample>> {
    let dq = addr::data_qualifier();
    (0..24)
        .map(|h| QualifiedSample::from_value(&state.value(&StateKey::new(&dq, gamma_key(h)))))
        .collect()
}

/// Non-null source samples still held in the data qualifier's stores.
pub fn pending_samples(state: &WorldState) -> Vec<StateKey> {
    state
        .iter()
        .filter(|(k, v)| k.contract == addr::data_qualifier() && k.key.starts_with("pi/") && !v.value.is_null())
        .map(|(k, _)| k.clone())
        .collect()
}
