use std::sync::Arc;

use super::voting::QualifiedSample;
use super::{addr, ModelParams};
use crate::fixed::{div_round_half_even, Fixed};
use crate::ledger::Value;
use crate::runtime::{CallContext, Contract, ContractException, ExceptionKind};

/// Baseline daily consumption predicted from a day of qualified samples.
pub trait ConsumptionModel: Send + Sync {
    fn predict(&self, day: &[QualifiedSample]) -> Fixed;
}

/// `base_load + hdd_coefficient * max(0, base_temperature - mean temperature)`,
/// falling back to the base load when no temperature was qualified.
/// The mean is kept exact; only the prediction is rounded.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DegreeDayModel(pub ModelParams);

impl DegreeDayModel {
    pub fn predict_from_temperatures(&self, temperatures: &[Fixed]) -> Fixed {
        let p = &self.0;
        if temperatures.is_empty() {
            return p.base_load;
        }
        let n = temperatures.len() as i128;
        let total: i128 = temperatures.iter().map(|t| t.milli() as i128).sum();
        // n times the degree-days, in thousandths
        let hdd_n = (p.base_temperature.milli() as i128 * n - total).max(0);
        let heating = div_round_half_even(p.hdd_coefficient.milli() as i128 * hdd_n, 1000 * n);
        p.base_load + Fixed::from_milli(heating as i64)
    }
}

impl ConsumptionModel for DegreeDayModel {
    fn predict(&self, day: &[QualifiedSample]) -> Fixed {
        let temps: Vec<Fixed> = day.iter().filter_map(|q| q.sample.temperature).collect();
        self.predict_from_temperatures(&temps)
    }
}

pub struct Predictor {
    model: Arc<dyn ConsumptionModel>,
}

impl Predictor {
    pub fn new(model: Arc<dyn ConsumptionModel>) -> Self {
        Predictor { model }
    }

    fn gamma(ctx: &CallContext<'_, '_>, value: &Value) -> Result<Vec<QualifiedSample>, ContractException> {
        match value {
            Value::List(items) => items
                .iter()
                .map(|v| {
                    QualifiedSample::from_value(v)
                        .ok_or_else(|| ctx.exception(ExceptionKind::BadArgument, "malformed qualified sample"))
                })
                .collect(),
            _ => Err(ctx.exception(ExceptionKind::BadArgument, "qualified samples must be a list")),
        }
    }
}

impl Contract for Predictor {
    fn invoke(&self, ctx: &mut CallContext<'_, '_>, method: &str, args: &[Value]) -> Result<Value, ContractException> {
        match method {
            "predictDailyCons" => {
                ctx.require_caller(&[&addr::data_qualifier()])?;
                let gamma = Self::gamma(ctx, ctx.arg(args, 0, "qualified samples")?)?;
                // a day without a consumption reading records no saving
                let saving = match ctx.arg(args, 1, "consumption")? {
                    Value::Null => Fixed::ZERO,
                    v => {
                        let actual = ctx.number(v, "consumption")?;
                        self.model.predict(&gamma) - actual
                    }
                };
                ctx.call(&addr::aggregator(), "addDailySaving", &[Value::Number(saving)])?;
                Ok(Value::Number(saving))
            }
            "predictCons" => {
                let gamma = Self::gamma(ctx, ctx.arg(args, 0, "qualified samples")?)?;
                Ok(Value::Number(self.model.predict(&gamma)))
            }
            "computeMonthlySaving" => {
                let daily = ctx.call(&addr::aggregator(), "getDailySavings", &[])?;
                let Value::List(items) = daily else {
                    return Err(ctx.exception(ExceptionKind::BadArgument, "daily savings must be a list"));
                };
                let mut total = Fixed::ZERO;
                for item in &items {
                    total += ctx.number(item, "daily saving")?;
                }
                Ok(Value::Number(total))
            }
            _ => Err(ctx.unknown_method(method)),
        }
    }
}
