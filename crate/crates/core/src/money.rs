//! Fixed-point money arithmetic.
//!
//! All economic quantities are stored as integer cents so that objective
//! values, weight sums and cross-mode comparisons are exact. Two runs that
//! should agree agree bit-for-bit, with no float drift.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Neg, Sub, SubAssign};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// A signed amount of money with cent resolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Money(i64);

impl Money {
    pub const ZERO: Money = Money(0);

    pub const fn from_cents(cents: i64) -> Money {
        Money(cents)
    }

    /// Whole dollars, no fractional part.
    pub const fn from_dollars(dollars: i64) -> Money {
        Money(dollars * 100)
    }

    /// Fractional dollars, rounded half away from zero to cents.
    pub fn from_dollars_rounded(dollars: f64) -> Money {
        Money((dollars * 100.0).round() as i64)
    }

    pub const fn cents(self) -> i64 {
        self.0
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }

    pub fn is_negative(self) -> bool {
        self.0 < 0
    }

    /// Scale by a dimensionless factor, rounding half away from zero.
    ///
    /// The factor is honoured to micro precision (1e-6), which keeps the
    /// product an exact integer computation: `cents * round(f * 1e6) / 1e6`
    /// with a single half-away-from-zero division at the end.
    pub fn scale(self, factor: f64) -> Money {
        let micros = (factor * 1e6).round() as i128;
        let raw = self.0 as i128 * micros;
        Money(div_round_half_away(raw, 1_000_000) as i64)
    }

    /// Parse a decimal money literal: optional sign, up to two decimals.
    ///
    /// `"12"`, `"12.3"`, `"12.34"`, `"-0.05"` are accepted; more than two
    /// decimal digits are rejected rather than silently rounded.
    pub fn parse(text: &str) -> Result<Money, Error> {
        let s = text.trim();
        let bad = || Error::MoneyParse(s.to_string());
        if s.is_empty() {
            return Err(bad());
        }
        let (neg, digits) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s.strip_prefix('+').unwrap_or(s)),
        };
        let (int_part, frac_part) = match digits.split_once('.') {
            Some((i, f)) => (i, f),
            None => (digits, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(bad());
        }
        if frac_part.len() > 2 {
            return Err(bad());
        }
        if !int_part.chars().all(|c| c.is_ascii_digit())
            || !frac_part.chars().all(|c| c.is_ascii_digit())
        {
            return Err(bad());
        }
        let whole: i64 = if int_part.is_empty() {
            0
        } else {
            int_part.parse().map_err(|_| bad())?
        };
        let mut frac: i64 = if frac_part.is_empty() {
            0
        } else {
            frac_part.parse().map_err(|_| bad())?
        };
        if frac_part.len() == 1 {
            frac *= 10;
        }
        let cents = whole
            .checked_mul(100)
            .and_then(|w| w.checked_add(frac))
            .ok_or_else(bad)?;
        Ok(Money(if neg { -cents } else { cents }))
    }
}

/// Integer division rounding half away from zero.
fn div_round_half_away(num: i128, den: i128) -> i128 {
    debug_assert!(den > 0);
    let q = num / den;
    let r = num % den;
    if r.abs() * 2 >= den {
        q + num.signum()
    } else {
        q
    }
}

impl fmt::Display for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        write!(f, "{sign}{}.{:02}", abs / 100, abs % 100)
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
        Money(iter.map(|m| m.0).sum())
    }
}

impl Serialize for Money {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Money {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Money, D::Error> {
        let s = String::deserialize(deserializer)?;
        Money::parse(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display_round_trip() {
        for text in ["0.00", "12.34", "-2.50", "0.05", "-0.01", "100000.99"] {
            let m = Money::parse(text).unwrap();
            assert_eq!(m.to_string(), text);
        }
    }

    #[test]
    fn parse_accepts_short_forms() {
        assert_eq!(Money::parse("6").unwrap(), Money::from_cents(600));
        assert_eq!(Money::parse("6.5").unwrap(), Money::from_cents(650));
        assert_eq!(Money::parse("-3").unwrap(), Money::from_cents(-300));
        assert_eq!(Money::parse(".5").unwrap(), Money::from_cents(50));
    }

    #[test]
    fn parse_rejects_garbage() {
        for text in ["", "abc", "1.234", "1..2", "--1", "1.2.3", "1e3"] {
            assert!(Money::parse(text).is_err(), "{text:?} should not parse");
        }
    }

    #[test]
    fn scale_rounds_half_away_from_zero() {
        // 3.00 * 0.5 = 1.50 exactly
        assert_eq!(Money::from_cents(300).scale(0.5), Money::from_cents(150));
        // 0.01 * 0.5 = 0.005 -> 0.01 (away from zero)
        assert_eq!(Money::from_cents(1).scale(0.5), Money::from_cents(1));
        assert_eq!(Money::from_cents(-1).scale(0.5), Money::from_cents(-1));
        // 0.03 * 0.5 = 0.015 -> 0.02
        assert_eq!(Money::from_cents(3).scale(0.5), Money::from_cents(2));
        assert_eq!(Money::from_cents(-3).scale(0.5), Money::from_cents(-2));
        assert_eq!(Money::from_cents(12345).scale(1.0), Money::from_cents(12345));
    }

    proptest::proptest! {
        #[test]
        fn display_parse_round_trip(cents in -1_000_000_000_000i64..=1_000_000_000_000) {
            let m = Money::from_cents(cents);
            proptest::prop_assert_eq!(Money::parse(&m.to_string()).unwrap(), m);
        }

        /// Splitting a discount factor across two applications costs at most
        /// one cent of rounding.
        #[test]
        fn scale_nearly_linear_in_factor(
            cents in -10_000_000i64..=10_000_000,
            a in 1u32..=500_000,
            b in 1u32..=500_000,
        ) {
            let m = Money::from_cents(cents);
            let (fa, fb) = (a as f64 / 1e6, b as f64 / 1e6);
            let split = m.scale(fa) + m.scale(fb);
            let joint = m.scale(fa + fb);
            proptest::prop_assert!((split.cents() - joint.cents()).abs() <= 1);
        }
    }
}
