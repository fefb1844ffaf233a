use super::addr;
use crate::fixed::Fixed;
use crate::ledger::Value;
use crate::runtime::{CallContext, Contract, ContractException};

/// Append-only lists of daily (`sigma_d`) and monthly (`sigma_m`) savings.
pub struct Aggregator;

fn len(ctx: &mut CallContext<'_, '_>, list: &str) -> Result<i64, ContractException> {
    match ctx.read(format!("{list}/len")) {
        Value::Null => Ok(0),
        v => Ok(ctx.number(&v, "list length")?.milli() / 1000),
    }
}

fn append(ctx: &mut CallContext<'_, '_>, list: &str, value: Value) -> Result<(), ContractException> {
    let n = len(ctx, list)?;
    ctx.write(format!("{list}/{n}"), value);
    ctx.write(format!("{list}/len"), Value::Number(Fixed::from_int(n + 1)));
    Ok(())
}

fn items(ctx: &mut CallContext<'_, '_>, list: &str) -> Result<Value, ContractException> {
    let n = len(ctx, list)?;
    Ok(Value::List((0..n).map(|i| ctx.read(format!("{list}/{i}"))).collect()))
}

impl Contract for Aggregator {
    fn invoke(&self, ctx: &mut CallContext<'_, '_>, method: &str, args: &[Value]) -> Result<Value, ContractException> {
        match method {
            // the pseudocode also names this addDailyConsumption
            "addDailySaving" | "addDailyConsumption" => {
                ctx.require_caller(&[&addr::predictor()])?;
                let saving = ctx.number(ctx.arg(args, 0, "daily saving")?, "daily saving")?;
                append(ctx, "sigma_d", Value::Number(saving))?;
                Ok(Value::Null)
            }
            "addMonthlySaving" => {
                ctx.require_caller(&[&addr::data_qualifier()])?;
                let saving = ctx.number(ctx.arg(args, 0, "monthly saving")?, "monthly saving")?;
                append(ctx, "sigma_m", Value::Number(saving))?;
                Ok(Value::Null)
            }
            "getDailySavings" => items(ctx, "sigma_d"),
            "getMonthlySavings" => items(ctx, "sigma_m"),
            _ => Err(ctx.unknown_method(method)),
        }
    }
}
