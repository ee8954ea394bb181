//! Exact rational helpers: parsing decimal/fraction strings and reducing angles modulo 2
//! (angles are stored as multiples of π).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Parses `"2/3"`, `"-1.5"`, `"0.25"`, `"3"`, `"1e-3"` or `"2.5E2"` into an exact rational.
///
/// Decimal strings are read as the decimal they spell, so `"0.1"` is exactly `1/10`.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let s = text.trim();
    if s.is_empty() {
        return None;
    }
    if let Some((num, den)) = s.split_once('/') {
        let num = parse_rational(num)?;
        let den = parse_rational(den)?;
        if den.is_zero() {
            return None;
        }
        return Some(num / den);
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().all(|b| b.is_ascii_digit()) || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut value = BigRational::from_integer(all_digits.parse::<BigInt>().ok()?);
    let scale = exponent - frac_part.len() as i32;
    let ten = BigRational::from_integer(BigInt::from(10));
    if scale >= 0 {
        value *= num_traits::pow(ten, scale as usize);
    } else {
        value /= num_traits::pow(ten, (-scale) as usize);
    }
    Some(if negative { -value } else { value })
}

/// Exact rational for a finite float, read through its shortest round-trip decimal.
pub fn rational_from_f64(x: f64) -> Option<BigRational> {
    if !x.is_finite() {
        return None;
    }
    parse_rational(&format!("{x:e}"))
}

pub fn to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        // Very large numerator/denominator pairs: divide in floating point after scaling.
        let n = q.numer().to_f64().unwrap_or(f64::NAN);
        let d = q.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Reduces `q` into `[0, 2)`.
pub fn reduce_mod_two(q: &BigRational) -> BigRational {
    let two = BigRational::from_integer(BigInt::from(2));
    let turns = (q / &two).floor();
    let r = q - turns * &two;
    debug_assert!(!r.is_negative() && r < two);
    r
}

/// True when `q` is an even integer, i.e. `q·π ≡ 0 (mod 2π)`.
pub fn is_even_integer(q: &BigRational) -> bool {
    q.is_integer() && (q.to_integer() % BigInt::from(2)).is_zero()
}

/// `q / 2` as an integer when `q` is an even integer.
pub fn half_integer(q: &BigRational) -> Option<i64> {
    if is_even_integer(q) {
        (q.to_integer() / BigInt::from(2)).to_i64()
    } else {
        None
    }
}

pub fn format_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Shortest round-trip form, switching to exponent notation for very small or large values.
pub fn format_float(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e16).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}
