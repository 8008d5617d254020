//! Exact decimal quantities used for capacities, utilization, and revenue.

use std::fmt;
use std::ops::{Add, Sub};
use std::str::FromStr;

use rust_decimal::{Decimal, RoundingStrategy};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// An exact decimal number kept in normalized form (no trailing fractional
/// zeros, no negative zero), so that equal values always print identically.
///
/// Serializes as a bare JSON number carrying the exact decimal text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Quantity(Decimal);

impl Quantity {
    pub const ZERO: Quantity = Quantity(Decimal::ZERO);
    pub const ONE: Quantity = Quantity(Decimal::ONE);

    pub fn new(value: Decimal) -> Self {
        if value.is_zero() {
            Quantity(Decimal::ZERO)
        } else {
            Quantity(value.normalize())
        }
    }

    pub fn as_decimal(self) -> Decimal {
        self.0
    }

    pub fn is_negative(self) -> bool {
        self.0.is_sign_negative() && !self.0.is_zero()
    }

    /// Rounds half-to-even at `dp` fractional digits.
    pub fn round_dp(self, dp: u32) -> Self {
        Quantity::new(self.0.round_dp_with_strategy(dp, RoundingStrategy::MidpointNearestEven))
    }

    /// Scales by `numerator / denominator` exactly, then rounds to `dp` places.
    pub fn scale(self, numerator: i64, denominator: i64, dp: u32) -> Self {
        let scaled = self.0 * Decimal::from(numerator) / Decimal::from(denominator);
        Quantity::new(scaled).round_dp(dp)
    }

    /// Ratio `self / other` rounded half-to-even to `dp` places; `None` when
    /// `other` is zero.
    pub fn ratio(self, other: Quantity, dp: u32) -> Option<Quantity> {
        if other.0.is_zero() {
            return None;
        }
        Some(Quantity::new(self.0 / other.0).round_dp(dp))
    }

    pub fn clamp_to(self, lo: Quantity, hi: Quantity) -> Self {
        if self < lo {
            lo
        } else if self > hi {
            hi
        } else {
            self
        }
    }

    pub fn saturating_sub(self, rhs: Quantity) -> Self {
        if rhs >= self {
            Quantity::ZERO
        } else {
            self - rhs
        }
    }
}

impl From<u64> for Quantity {
    fn from(v: u64) -> Self {
        Quantity(Decimal::from(v))
    }
}

impl From<i64> for Quantity {
    fn from(v: i64) -> Self {
        Quantity(Decimal::from(v))
    }
}

impl From<u32> for Quantity {
    fn from(v: u32) -> Self {
        Quantity(Decimal::from(v))
    }
}

impl From<Decimal> for Quantity {
    fn from(v: Decimal) -> Self {
        Quantity::new(v)
    }
}

impl Add for Quantity {
    type Output = Quantity;

    fn add(self, rhs: Quantity) -> Quantity {
        Quantity::new(self.0 + rhs.0)
    }
}

impl Sub for Quantity {
    type Output = Quantity;

    fn sub(self, rhs: Quantity) -> Quantity {
        Quantity::new(self.0 - rhs.0)
    }
}

impl std::iter::Sum for Quantity {
    fn sum<I: Iterator<Item = Quantity>>(iter: I) -> Quantity {
        iter.fold(Quantity::ZERO, |a, b| a + b)
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

impl FromStr for Quantity {
    type Err = rust_decimal::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.contains(['e', 'E']) {
            Decimal::from_scientific(s).map(Quantity::new)
        } else {
            Decimal::from_str_exact(s).map(Quantity::new)
        }
    }
}

impl Serialize for Quantity {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        // With serde_json's arbitrary_precision feature a Number holds its
        // decimal text verbatim.
        let number = serde_json::Number::from_str(&self.to_string())
            .map_err(|e| serde::ser::Error::custom(e.to_string()))?;
        number.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Quantity {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let number = serde_json::Number::deserialize(deserializer)?;
        Quantity::from_str(&number.to_string()).map_err(serde::de::Error::custom)
    }
}
