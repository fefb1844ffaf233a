//! Fixed-point decimal with three fractional digits.
//!
//! Every quantity the contracts touch (temperatures, pressures, kWh, weights)
//! is stored as an integer count of thousandths. Addition and subtraction are
//! exact; multiplication and division round half-to-even back onto the grid,
//! so results are identical on every platform.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

const SCALE: i64 = 1000;

#[derive(Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fixed(i64);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid decimal {input:?}: {reason}")]
pub struct ParseFixedError {
    pub input: String,
    pub reason: &'static str,
}

impl Fixed {
    pub const ZERO: Fixed = Fixed(0);

    pub const fn from_milli(milli: i64) -> Self {
        Fixed(milli)
    }

    pub const fn from_int(value: i64) -> Self {
        Fixed(value * SCALE)
    }

    pub const fn milli(self) -> i64 {
        self.0
    }

    pub fn abs(self) -> Self {
        Fixed(self.0.abs())
    }

    pub fn is_negative(self) -> bool {
        self.0 < 0
    }

    /// Product rounded half-to-even to three decimals.
    pub fn mul(self, rhs: Fixed) -> Fixed {
        Fixed(div_round_half_even(self.0 as i128 * rhs.0 as i128, SCALE as i128) as i64)
    }

    /// Quotient rounded half-to-even. Panics on a zero divisor.
    pub fn div(self, rhs: Fixed) -> Fixed {
        assert!(rhs.0 != 0, "fixed-point division by zero");
        Fixed(div_round_half_even(self.0 as i128 * SCALE as i128, rhs.0 as i128) as i64)
    }

    /// Division by an integer count, as used for averages.
    pub fn div_int(self, n: i64) -> Fixed {
        assert!(n != 0, "fixed-point division by zero");
        Fixed(div_round_half_even(self.0 as i128, n as i128) as i64)
    }

    pub fn max(self, other: Fixed) -> Fixed {
        if self >= other {
            self
        } else {
            other
        }
    }

    pub fn clamp(self, lo: Fixed, hi: Fixed) -> Fixed {
        Ord::clamp(self, lo, hi)
    }

    /// Mean of a non-empty slice, or `None` when it is empty.
    pub fn mean(values: &[Fixed]) -> Option<Fixed> {
        if values.is_empty() {
            return None;
        }
        let total: i128 = values.iter().map(|v| v.0 as i128).sum();
        Some(Fixed(div_round_half_even(total, values.len() as i128) as i64))
    }
}

/// Integer division rounding half-to-even; `den` must be non-zero.
pub(crate) fn div_round_half_even(num: i128, den: i128) -> i128 {
    let (num, den) = if den < 0 { (-num, -den) } else { (num, den) };
    let q = num.div_euclid(den);
    let r = num.rem_euclid(den);
    // q is the floor; compare the remainder against half the divisor
    match (2 * r).cmp(&den) {
        std::cmp::Ordering::Less => q,
        std::cmp::Ordering::Greater => q + 1,
        std::cmp::Ordering::Equal => {
            if q % 2 == 0 {
                q
            } else {
                q + 1
            }
        }
    }
}

impl Add for Fixed {
    type Output = Fixed;
    fn add(self, rhs: Fixed) -> Fixed {
        Fixed(self.0 + rhs.0)
    }
}

impl AddAssign for Fixed {
    fn add_assign(&mut self, rhs: Fixed) {
        self.0 += rhs.0;
    }
}

impl Sub for Fixed {
    type Output = Fixed;
    fn sub(self, rhs: Fixed) -> Fixed {
        Fixed(self.0 - rhs.0)
    }
}

impl SubAssign for Fixed {
    fn sub_assign(&mut self, rhs: Fixed) {
        self.0 -= rhs.0;
    }
}

impl Neg for Fixed {
    type Output = Fixed;
    fn neg(self) -> Fixed {
        Fixed(-self.0)
    }
}

impl Sum for Fixed {
    fn sum<I: Iterator<Item = Fixed>>(iter: I) -> Fixed {
        iter.fold(Fixed::ZERO, Add::add)
    }
}

impl<'a> Sum<&'a Fixed> for Fixed {
    fn sum<I: Iterator<Item = &'a Fixed>>(iter: I) -> Fixed {
        iter.copied().sum()
    }
}

impl fmt::Display for Fixed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        let text = format!("{sign}{}.{:03}", abs / SCALE as u64, abs % SCALE as u64);
        f.pad(&text)
    }
}

impl fmt::Debug for Fixed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Fixed {
    type Err = ParseFixedError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = |reason| ParseFixedError {
            input: s.to_string(),
            reason,
        };
        let (negative, body) = match s.as_bytes().first() {
            Some(b'-') => (true, &s[1..]),
            Some(b'+') => (false, &s[1..]),
            _ => (false, s),
        };
        let (int_part, frac_part) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        if int_part.is_empty() || !int_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err("expected digits before the decimal point"));
        }
        if body.contains('.') && frac_part.is_empty() {
            return Err(err("expected digits after the decimal point"));
        }
        if frac_part.len() > 3 {
            return Err(err("more than three fractional digits"));
        }
        if !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err("non-digit in fractional part"));
        }
        let whole: i64 = int_part.parse().map_err(|_| err("integer part out of range"))?;
        let mut frac: i64 = if frac_part.is_empty() {
            0
        } else {
            frac_part.parse().map_err(|_| err("bad fractional part"))?
        };
        for _ in frac_part.len()..3 {
            frac *= 10;
        }
        let milli = whole
            .checked_mul(SCALE)
            .and_then(|w| w.checked_add(frac))
            .ok_or_else(|| err("value out of range"))?;
        Ok(Fixed(if negative { -milli } else { milli }))
    }
}

impl Serialize for Fixed {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Fixed {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}
