//! Fixed-point currency in milli-units.
//!
//! All fee, reward and ask arithmetic runs on integer milli-units so that
//! ledger conservation checks are exact. Floating-point enters only at the
//! config/serialization boundary, where values are written in whole units
//! (`0.1` == 100 milli).

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Neg, Sub, SubAssign};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A signed amount of currency, stored as integer milli-units.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Currency(i64);

impl Currency {
    pub const ZERO: Currency = Currency(0);

    pub const fn from_milli(milli: i64) -> Self {
        Currency(milli)
    }

    /// Converts whole units to milli, rounding to the nearest milli.
    pub fn from_units(units: f64) -> Self {
        Currency((units * 1000.0).round() as i64)
    }

    pub const fn milli(self) -> i64 {
        self.0
    }

    /// Exact for any amount below 2^53 milli.
    pub fn as_units(self) -> f64 {
        self.0 as f64 / 1000.0
    }

    pub fn max(self, other: Currency) -> Currency {
        Currency(self.0.max(other.0))
    }

    pub fn is_negative(self) -> bool {
        self.0 < 0
    }
}

impl Add for Currency {
    type Output = Currency;
    fn add(self, rhs: Currency) -> Currency {
        Currency(self.0 + rhs.0)
    }
}

impl Sub for Currency {
    type Output = Currency;
    fn sub(self, rhs: Currency) -> Currency {
        Currency(self.0 - rhs.0)
    }
}

impl AddAssign for Currency {
    fn add_assign(&mut self, rhs: Currency) {
        self.0 += rhs.0;
    }
}

impl SubAssign for Currency {
    fn sub_assign(&mut self, rhs: Currency) {
        self.0 -= rhs.0;
    }
}

impl Neg for Currency {
    type Output = Currency;
    fn neg(self) -> Currency {
        Currency(-self.0)
    }
}

impl Sum for Currency {
    fn sum<I: Iterator<Item = Currency>>(iter: I) -> Currency {
        Currency(iter.map(|c| c.0).sum())
    }
}

impl<'a> Sum<&'a Currency> for Currency {
    fn sum<I: Iterator<Item = &'a Currency>>(iter: I) -> Currency {
        Currency(iter.map(|c| c.0).sum())
    }
}

impl fmt::Display for Currency {
    /// Exact decimal rendering with three places: `1.100`, `-0.300`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        write!(f, "{}{}.{:03}", sign, abs / 1000, abs % 1000)
    }
}

impl fmt::Debug for Currency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Currency({self})")
    }
}

impl Serialize for Currency {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_f64(self.as_units())
    }
}

impl<'de> Deserialize<'de> for Currency {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Currency, D::Error> {
        let units = f64::deserialize(deserializer)?;
        if !units.is_finite() {
            return Err(serde::de::Error::custom("currency amount must be finite"));
        }
        Ok(Currency::from_units(units))
    }
}
