//! Fixed-point money with four fractional digits.
//!
//! Amounts are exact decimals. Rates stay binary floating point; multiplying
//! an amount by a rate rounds the product back to four digits, half away
//! from zero.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use rust_decimal::prelude::{FromPrimitive, ToPrimitive};
use rust_decimal::{Decimal, RoundingStrategy};

/// Number of fractional digits carried by every [`Money`] value.
pub const SCALE: u32 = 4;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Money(Decimal);

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MoneyError {
    #[error("cannot parse money amount {0:?}")]
    Parse(String),
    #[error("amount {0} is not finite or out of range")]
    OutOfRange(f64),
}

impl Money {
    pub const ZERO: Money = Money(Decimal::ZERO);

    fn rounded(d: Decimal) -> Self {
        Money(d.round_dp_with_strategy(SCALE, RoundingStrategy::MidpointAwayFromZero))
    }

    pub fn from_int(units: i64) -> Self {
        Money(Decimal::from(units))
    }

    /// Builds an amount from a count of 1/10000 units.
    pub fn from_minor(minor: i64) -> Self {
        Money(Decimal::new(minor, SCALE))
    }

    pub fn from_decimal(d: Decimal) -> Self {
        Self::rounded(d)
    }

    pub fn try_from_f64(value: f64) -> Result<Self, MoneyError> {
        Decimal::from_f64(value)
            .map(Self::rounded)
            .ok_or(MoneyError::OutOfRange(value))
    }

    /// Converts a real amount, panicking on NaN or overflow.
    pub fn from_f64(value: f64) -> Self {
        Self::try_from_f64(value).expect("money amount out of range")
    }

    pub fn to_f64(self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn as_decimal(self) -> Decimal {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(self) -> bool {
        self.0.is_sign_negative() && !self.0.is_zero()
    }

    /// `self × rate`, rounded to four digits.
    pub fn scale(self, rate: f64) -> Self {
        let r = Decimal::from_f64(rate).expect("rate out of range");
        Self::rounded(self.0 * r)
    }

    pub fn min(self, other: Money) -> Money {
        Ord::min(self, other)
    }

    pub fn max(self, other: Money) -> Money {
        Ord::max(self, other)
    }

    /// Ratio of two amounts as a real number.
    pub fn ratio(self, denominator: Money) -> f64 {
        (self.0 / denominator.0).to_f64().unwrap_or(f64::NAN)
    }
}

impl fmt::Display for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.4}", self.0)
    }
}

impl FromStr for Money {
    type Err = MoneyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let trimmed = s.trim();
        let d = Decimal::from_str(trimmed).map_err(|_| MoneyError::Parse(s.to_string()))?;
        Ok(Self::rounded(d))
    }
}

impl Add for Money {
    type Output = Money;
    fn add(self, rhs: Money) -> Money {
        Money(self.0 + rhs.0)
    }
}

impl Sub for Money {
    type Output = Money;
    fn sub(self, rhs: Money) -> Money {
        Money(self.0 - rhs.0)
    }
}

impl Neg for Money {
    type Output = Money;
    fn neg(self) -> Money {
        Money(-self.0)
    }
}

impl AddAssign for Money {
    fn add_assign(&mut self, rhs: Money) {
        self.0 += rhs.0;
    }
}

impl SubAssign for Money {
    fn sub_assign(&mut self, rhs: Money) {
        self.0 -= rhs.0;
    }
}

impl Sum for Money {
    fn sum<I: Iterator<Item = Money>>(iter: I) -> Money {
        iter.fold(Money::ZERO, Add::add)
    }
}

impl<'a> Sum<&'a Money> for Money {
    fn sum<I: Iterator<Item = &'a Money>>(iter: I) -> Money {
        iter.copied().sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_always_has_four_digits() {
        assert_eq!(Money::from_int(5).to_string(), "5.0000");
        assert_eq!(Money::from_minor(-623_000).to_string(), "-62.3000");
        assert_eq!(Money::from_f64(0.00005).to_string(), "0.0001");
        assert_eq!(Money::from_f64(-0.00005).to_string(), "-0.0001");
    }

    #[test]
    fn scale_rounds_products() {
        assert_eq!(
            Money::from_int(100).scale(0.623),
            Money::from_minor(623_000)
        );
        assert_eq!(
            Money::from_int(100).scale(0.8115),
            Money::from_minor(811_500)
        );
        assert_eq!(
            Money::from_int(1).scale(1.0 / 3.0),
            Money::from_minor(3_333)
        );
    }

    #[test]
    fn parse_round_trip() {
        let m: Money = "-12.3456".parse().unwrap();
        assert_eq!(m.to_string().parse::<Money>().unwrap(), m);
        assert!("abc".parse::<Money>().is_err());
    }

    #[test]
    fn negative_zero_is_not_negative() {
        assert!(!(Money::ZERO - Money::ZERO).is_negative());
        assert!(Money::from_minor(-1).is_negative());
    }
}
