//! Exact rational arithmetic used on every quota-sensitive path.
//!
//! Quantities like standard quotas must floor bit-exactly (a quota of
//! exactly 1 and a quota of 0.999... apportion differently), so they are
//! carried as reduced `i128` fractions end to end.

use num_rational::Ratio;
use num_traits::Signed;
use thiserror::Error;

/// A rational number in lowest terms with a positive denominator.
pub type Rational = Ratio<i128>;

/// Shorthand constructor; panics if `den == 0`.
pub fn rat(num: i128, den: i128) -> Rational {
    Ratio::new(num, den)
}

pub fn from_int(n: i128) -> Rational {
    Ratio::from_integer(n)
}

pub fn floor_int(r: &Rational) -> i128 {
    r.floor().to_integer()
}

pub fn ceil_int(r: &Rational) -> i128 {
    r.ceil().to_integer()
}

/// `r - floor(r)`, always in `[0, 1)`.
pub fn frac_part(r: &Rational) -> Rational {
    r - r.floor()
}

/// Canonical `"num/den"` rendering in lowest terms. The denominator is
/// always printed (`3` renders as `"3/1"`), which keeps serialized quotas
/// trivially parseable and byte-stable.
pub fn format_ratio(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseRatioError {
    #[error("empty rational literal")]
    Empty,
    #[error("malformed rational literal {0:?}")]
    Malformed(String),
    #[error("zero denominator in {0:?}")]
    ZeroDenominator(String),
    #[error("rational literal {0:?} out of range")]
    OutOfRange(String),
}

/// Parse `"3/4"`, `"0.75"`, `"-2"`, or `"26.56"` into an exact rational.
/// Decimal literals are read exactly (base-10 scaling), never through a
/// binary float.
pub fn parse_ratio(s: &str) -> Result<Rational, ParseRatioError> {
    let s = s.trim();
    if s.is_empty() {
        return Err(ParseRatioError::Empty);
    }
    let malformed = || ParseRatioError::Malformed(s.to_string());
    if let Some((num, den)) = s.split_once('/') {
        let num: i128 = num.trim().parse().map_err(|_| malformed())?;
        let den: i128 = den.trim().parse().map_err(|_| malformed())?;
        if den == 0 {
            return Err(ParseRatioError::ZeroDenominator(s.to_string()));
        }
        return Ok(Ratio::new(num, den));
    }
    let (sign, digits) = match s.strip_prefix('-') {
        Some(rest) => (-1i128, rest),
        None => (1i128, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(malformed());
    }
    if !int_part.chars().all(|c| c.is_ascii_digit())
        || !frac_part.chars().all(|c| c.is_ascii_digit())
    {
        return Err(malformed());
    }
    // 10^38 overflows i128; cap the total significant length well below that.
    if int_part.len() + frac_part.len() > 36 {
        return Err(ParseRatioError::OutOfRange(s.to_string()));
    }
    let mut num: i128 = 0;
    for c in int_part.chars().chain(frac_part.chars()) {
        num = num * 10 + i128::from(c as u8 - b'0');
    }
    let den = 10i128.pow(frac_part.len() as u32);
    Ok(Ratio::new(sign * num, den))
}

/// `|a - b| <= tol`, all exact.
pub fn within(a: &Rational, b: &Rational, tol: &Rational) -> bool {
    (a - b).abs() <= *tol
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fraction_and_decimal_forms() {
        assert_eq!(parse_ratio("3/4").unwrap(), rat(3, 4));
        assert_eq!(parse_ratio("0.75").unwrap(), rat(3, 4));
        assert_eq!(parse_ratio("26.56").unwrap(), rat(2656, 100));
        assert_eq!(parse_ratio("-1/2").unwrap(), rat(-1, 2));
        assert_eq!(parse_ratio("2").unwrap(), from_int(2));
        assert_eq!(parse_ratio(" 5/10 ").unwrap(), rat(1, 2));
    }

    #[test]
    fn rejects_malformed_literals() {
        assert!(parse_ratio("").is_err());
        assert!(parse_ratio("1/0").is_err());
        assert!(parse_ratio("a/b").is_err());
        assert!(parse_ratio("1.2.3").is_err());
        assert!(parse_ratio(".").is_err());
    }

    #[test]
    fn floor_ceil_frac_are_exact() {
        assert_eq!(floor_int(&rat(7, 2)), 3);
        assert_eq!(ceil_int(&rat(7, 2)), 4);
        assert_eq!(floor_int(&rat(-1, 2)), -1);
        assert_eq!(frac_part(&rat(9, 4)), rat(1, 4));
        assert_eq!(frac_part(&from_int(3)), from_int(0));
    }

    #[test]
    fn canonical_format_always_shows_denominator() {
        assert_eq!(format_ratio(&rat(206, 25)), "206/25");
        assert_eq!(format_ratio(&from_int(3)), "3/1");
        assert_eq!(format_ratio(&rat(2, 4)), "1/2");
    }
}
