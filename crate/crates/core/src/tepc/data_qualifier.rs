use super::voting::{qualify_by_voting, QualifiedSample, Tolerances};
use super::{addr, gamma_key, hourly_key, weight_key, Weights, LAST_PROCESSED_DAY_KEY, METER_KEY};
use crate::fixed::Fixed;
use crate::ledger::{Address, Value};
use crate::runtime::{CallContext, Contract, ContractException, ExceptionKind};

/// Collects source samples, qualifies them by voting at midnight and drives
/// the daily and monthly saving computations.
///
/// Hourly samples live under `pi/<source>/d<day>/h<hour>`; the meter's
/// reading lives in a single slot that each midnight consumes and clears.
pub struct DataQualifier {
    tolerances: Tolerances,
}

impl DataQualifier {
    pub fn new(tolerances: Tolerances) -> Self {
        DataQualifier { tolerances }
    }

    fn add_hourly_sample(&self, ctx: &mut CallContext<'_, '_>, args: &[Value]) -> Result<Value, ContractException> {
        let stakeholders = addr::stakeholders();
        ctx.require_caller(&stakeholders.iter().collect::<Vec<_>>())?;
        let source = ctx.caller().clone();
        let raw = ctx.arg(args, 0, "sample")?.clone();
        let day = int_arg(ctx, args, 1, "day", 1..=31)?;
        let hour = int_arg(ctx, args, 2, "hour", 0..=23)?;
        let checked = ctx.call(&addr::validator(), "checkVariable", &[raw])?;
        let key = hourly_key(&source, day, hour);
        // a second sample for the same slot overwrites the first
        let _previous = ctx.read(key.clone());
        ctx.write(key, checked);
        Ok(Value::Null)
    }

    fn add_daily_sample(&self, ctx: &mut CallContext<'_, '_>, args: &[Value]) -> Result<Value, ContractException> {
        ctx.require_caller(&[&addr::meter()])?;
        let consumption = ctx.arg(args, 0, "consumption")?.clone();
        if !consumption.is_null() {
            ctx.number(&consumption, "consumption")?;
        }
        let _previous = ctx.read(METER_KEY);
        ctx.write(METER_KEY, consumption);
        Ok(Value::Null)
    }

    fn weights(&self, ctx: &mut CallContext<'_, '_>) -> Result<Weights, ContractException> {
        let mut weights = [Fixed::ZERO; 3];
        for (slot, source) in weights.iter_mut().zip(addr::stakeholders()) {
            let w = ctx.read(weight_key(&source));
            *slot = ctx.number(&w, "source weight")?;
        }
        Ok(Weights(weights))
    }

    /// Votes every hour of `day` into `gamma/h<hour>` and returns the 24 entries.
    fn calculate_qualified_daily_samples(
        &self,
        ctx: &mut CallContext<'_, '_>,
        day: u32,
    ) -> Result<Vec<QualifiedSample>, ContractException> {
        let weights = self.weights(ctx)?;
        let sources = addr::stakeholders();
        let mut gamma = Vec::with_capacity(24);
        for hour in 0..24 {
            let mut samples = [None; 3];
            for (slot, source) in samples.iter_mut().zip(&sources) {
                *slot = match ctx.read(hourly_key(source, day, hour)) {
                    Value::Sample(s) => Some(s),
                    _ => None,
                };
            }
            let qualified = qualify_by_voting(&samples, &weights, &self.tolerances);
            ctx.write(gamma_key(hour), qualified.to_value());
            gamma.push(qualified);
        }
        Ok(gamma)
    }

    fn clear_day(&self, ctx: &mut CallContext<'_, '_>, sources: &[Address], day: u32) {
        for source in sources {
            for hour in 0..24 {
                let key = hourly_key(source, day, hour);
                if !ctx.read(key.clone()).is_null() {
                    ctx.write(key, Value::Null);
                }
            }
        }
    }

    fn midnight_process(&self, ctx: &mut CallContext<'_, '_>) -> Result<Value, ContractException> {
        ctx.require_caller(&[&addr::oracle()])?;
        // the block at hour 0 of day d+1 closes day d
        let day = (ctx.block_step() / 24) as u32;
        let last = ctx.read(LAST_PROCESSED_DAY_KEY);
        let last = (ctx.number(&last, "last processed day")?.milli() / 1000) as u32;
        if day <= last {
            return Err(ctx.exception(
                ExceptionKind::BadArgument,
                format!("day {day} already processed (last {last})"),
            ));
        }

        let gamma = self.calculate_qualified_daily_samples(ctx, day)?;
        let consumption = ctx.read(METER_KEY);
        let gamma_list = Value::List(gamma.iter().map(QualifiedSample::to_value).collect());
        let saving = ctx.call(&addr::predictor(), "predictDailyCons", &[gamma_list, consumption.clone()])?;

        // empty every store, including days whose midnight never committed
        let sources = addr::stakeholders();
        for d in (last + 1)..=day {
            self.clear_day(ctx, &sources, d);
        }
        if !consumption.is_null() {
            ctx.write(METER_KEY, Value::Null);
        }
        ctx.write(LAST_PROCESSED_DAY_KEY, Value::Number(Fixed::from_int(day as i64)));
        Ok(saving)
    }

    fn month_end_process(&self, ctx: &mut CallContext<'_, '_>) -> Result<Value, ContractException> {
        ctx.require_caller(&[&addr::oracle()])?;
        let saving = ctx.call(&addr::predictor(), "computeMonthlySaving", &[])?;
        let valid = ctx.call(&addr::validator(), "validateMonthlySaving", &[saving.clone()])?;
        ctx.call(&addr::aggregator(), "addMonthlySaving", &[saving])?;
        Ok(valid)
    }
}

fn int_arg(
    ctx: &CallContext<'_, '_>,
    args: &[Value],
    index: usize,
    what: &str,
    range: std::ops::RangeInclusive<u32>,
) -> Result<u32, ContractException> {
    let n = ctx.number(ctx.arg(args, index, what)?, what)?;
    let whole = n.milli() / 1000;
    if n.milli() % 1000 != 0 || whole < *range.start() as i64 || whole > *range.end() as i64 {
        return Err(ctx.exception(ExceptionKind::BadArgument, format!("{what} {n} out of range")));
    }
    Ok(whole as u32)
}

impl Contract for DataQualifier {
    fn invoke(&self, ctx: &mut CallContext<'_, '_>, method: &str, args: &[Value]) -> Result<Value, ContractException> {
        match method {
            "addHourlySample" => self.add_hourly_sample(ctx, args),
            "addDailySample" => self.add_daily_sample(ctx, args),
            "midnightProcess" => self.midnight_process(ctx),
            // the oracle's month-end call goes by either name
            "monthEndProcess" | "validateMonthlySaving" => self.month_end_process(ctx),
            _ => Err(ctx.unknown_method(method)),
        }
    }
}
