//! Exact money rates and their text forms.

use std::fmt;

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};

/// A money rate (currency per km), held as an exact rational.
pub type Money = BigRational;

/// `num / den` as money. Panics if `den` is zero.
pub fn ratio(num: i64, den: i64) -> Money {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Money {
    BigRational::from_integer(BigInt::from(n))
}

pub fn from_usize(n: usize) -> Money {
    BigRational::from_integer(BigInt::from(n))
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse {input:?} as an exact number")]
pub struct ParseMoneyError {
    input: String,
}

/// Parses a decimal (`0.048`, `-1.5e-3`) or a fraction (`7/150`) exactly.
pub fn parse_money(s: &str) -> Result<Money, ParseMoneyError> {
    let err = || ParseMoneyError {
        input: s.to_string(),
    };
    let t = s.trim();
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| err())?;
        let d: BigInt = d.trim().parse().map_err(|_| err())?;
        if d.is_zero() {
            return Err(err());
        }
        return Ok(BigRational::new(n, d));
    }

    let (mantissa, exponent) = match t.find(['e', 'E']) {
        Some(i) => {
            let e: i32 = t[i + 1..].parse().map_err(|_| err())?;
            (&t[..i], e)
        }
        None => (t, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(err());
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(err());
    }
    let all: BigInt = format!("{whole}{frac}").parse().map_err(|_| err())?;
    let scale = exponent - frac.len() as i32;
    let ten = BigInt::from(10u32);
    let mut value = BigRational::from_integer(all);
    if scale >= 0 {
        value *= BigRational::from_integer(num::pow(ten, scale as usize));
    } else {
        value /= BigRational::from_integer(num::pow(ten, (-scale) as usize));
    }
    Ok(if negative { -value } else { value })
}

/// Converts a finite float through its shortest decimal representation, so
/// `0.07_f64` becomes exactly `7/100`.
pub fn from_f64(x: f64) -> Option<Money> {
    if !x.is_finite() {
        return None;
    }
    parse_money(&format!("{x}")).ok()
}

pub fn to_f64(m: &Money) -> f64 {
    m.to_f64().unwrap_or(f64::NAN)
}

/// Fixed-point rendering with `places` decimals, rounding half away from zero.
pub fn format_fixed(m: &Money, places: usize) -> String {
    let scale = BigRational::from_integer(num::pow(BigInt::from(10u32), places));
    let scaled = (m * scale).round().to_integer();
    let negative = scaled.is_negative();
    let digits = scaled.abs().to_string();
    let body = if places == 0 {
        digits
    } else {
        let padded = format!("{digits:0>width$}", width = places + 1);
        let (w, f) = padded.split_at(padded.len() - places);
        format!("{w}.{f}")
    };
    if negative {
        format!("-{body}")
    } else {
        body
    }
}

/// `a/b` in lowest terms, or just `a` for integers.
pub fn format_exact(m: &Money) -> String {
    if m.denom().is_one() {
        m.numer().to_string()
    } else {
        format!("{}/{}", m.numer(), m.denom())
    }
}

/// Display adapter for fixed-point output.
pub struct Fixed<'a>(pub &'a Money, pub usize);

impl fmt::Display for Fixed<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_fixed(self.0, self.1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_decimals_exactly() {
        assert_eq!(parse_money("0.048").unwrap(), ratio(6, 125));
        assert_eq!(parse_money("0.07").unwrap(), ratio(7, 100));
        assert_eq!(parse_money("-1.5e-2").unwrap(), ratio(-3, 200));
        assert_eq!(parse_money("12").unwrap(), int(12));
        assert_eq!(parse_money(".5").unwrap(), ratio(1, 2));
        assert_eq!(parse_money("7/150").unwrap(), ratio(7, 150));
        assert_eq!(parse_money("2e3").unwrap(), int(2000));
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["", ".", "abc", "1/0", "1..2", "1.2.3", "--1", "1e"] {
            assert!(parse_money(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn float_round_trip_uses_shortest_decimal() {
        assert_eq!(from_f64(0.07).unwrap(), ratio(7, 100));
        assert_eq!(from_f64(1e-7).unwrap(), ratio(1, 10_000_000));
        assert!(from_f64(f64::NAN).is_none());
    }

    #[test]
    fn fixed_point_rounding() {
        assert_eq!(format_fixed(&ratio(7, 150), 6), "0.046667");
        assert_eq!(format_fixed(&ratio(1, 2), 0), "1");
        assert_eq!(format_fixed(&ratio(-1, 2), 0), "-1");
        assert_eq!(format_fixed(&ratio(21, 50), 4), "0.4200");
        assert_eq!(format_fixed(&ratio(-1, 1_000_000), 2), "0.00");
        assert_eq!(format_fixed(&int(100), 2), "100.00");
        assert_eq!(Fixed(&ratio(1, 8), 2).to_string(), "0.13");
    }

    #[test]
    fn exact_format() {
        assert_eq!(format_exact(&ratio(14, 300)), "7/150");
        assert_eq!(format_exact(&int(-3)), "-3");
    }
}
