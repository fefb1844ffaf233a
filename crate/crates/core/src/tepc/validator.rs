use crate::fixed::Fixed;
use crate::ledger::{SampleTriple, Value};
use crate::runtime::{CallContext, Contract, ContractException, ExceptionKind};

pub const TEMPERATURE_BOUNDS: (Fixed, Fixed) = (Fixed::from_int(-30), Fixed::from_int(60));
pub const PRESSURE_BOUNDS: (Fixed, Fixed) = (Fixed::from_int(850), Fixed::from_int(1060));
pub const HUMIDITY_BOUNDS: (Fixed, Fixed) = (Fixed::from_int(0), Fixed::from_int(100));

/// Replaces out-of-range channels with the nearest bound. A missing channel
/// fails at its first comparison, in temperature, pressure, humidity order.
pub fn check_variable(sample: &SampleTriple) -> Result<SampleTriple, &'static str> {
    fn clamp(value: Option<Fixed>, (lo, hi): (Fixed, Fixed), name: &'static str) -> Result<Fixed, &'static str> {
        let v = value.ok_or(name)?;
        Ok(if v <= lo {
            lo
        } else if v >= hi {
            hi
        } else {
            v
        })
    }
    Ok(SampleTriple::new(
        clamp(sample.temperature, TEMPERATURE_BOUNDS, "temperature")?,
        clamp(sample.pressure, PRESSURE_BOUNDS, "pressure")?,
        clamp(sample.humidity, HUMIDITY_BOUNDS, "humidity")?,
    ))
}

pub struct Validator;

impl Contract for Validator {
    fn invoke(&self, ctx: &mut CallContext<'_, '_>, method: &str, args: &[Value]) -> Result<Value, ContractException> {
        match method {
            "checkVariable" | "checkVariables" => {
                let sample = ctx.sample(ctx.arg(args, 0, "sample")?, "sample")?;
                check_variable(&sample)
                    .map(Value::Sample)
                    .map_err(|channel| ctx.exception(ExceptionKind::NullValue, format!("{channel} is null")))
            }
            "validateMonthlySaving" => {
                let saving = ctx.number(ctx.arg(args, 0, "saving")?, "saving")?;
                Ok(Value::Bool(saving >= Fixed::ZERO))
            }
            _ => Err(ctx.unknown_method(method)),
        }
    }
}
