//! Exact rational numbers and their text form.
//!
//! Every coordinate, distance and cost in this crate is a [`Rational`].
//! The text form is `"p/q"` in lowest terms, or just `"p"` when the
//! denominator is one. Parsing additionally accepts finite decimals such as
//! `"-2.375"`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn ratio(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

/// Absolute difference, i.e. the line distance between two coordinates.
pub fn dist(a: &Rational, b: &Rational) -> Rational {
    (a - b).abs()
}

pub fn parse(text: &str) -> Result<Rational> {
    let s = text.trim();
    let bad = |why: &str| Error::parse(format!("rational {text:?}"), why.to_string());
    if s.is_empty() {
        return Err(bad("empty"));
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = parse_int(p).ok_or_else(|| bad("bad numerator"))?;
        let q: BigInt = parse_int(q).ok_or_else(|| bad("bad denominator"))?;
        if q.is_zero() {
            return Err(bad("zero denominator"));
        }
        return Ok(Rational::new(p, q));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad("bad decimal fraction"));
        }
        let negative = whole.starts_with('-');
        let whole_digits = whole.trim_start_matches(['-', '+']);
        if !whole_digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad("bad decimal integer part"));
        }
        let digits = format!("{}{}", if whole_digits.is_empty() { "0" } else { whole_digits }, frac);
        let numer: BigInt = digits.parse().map_err(|_| bad("bad decimal"))?;
        let denom = num_traits::pow(BigInt::from(10), frac.len());
        let value = Rational::new(numer, denom);
        return Ok(if negative { -value } else { value });
    }
    parse_int(s)
        .map(Rational::from_integer)
        .ok_or_else(|| bad("not a number"))
}

fn parse_int(s: &str) -> Option<BigInt> {
    let s = s.trim();
    let digits = s.strip_prefix(['-', '+']).unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

/// Canonical text form; `parse(&format(x)) == x` for every `x`.
pub fn format(value: &Rational) -> String {
    value.to_string()
}

/// Lossy conversion for reports and plots only.
pub fn approx(value: &Rational) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

/// Serde adapter for a sequence of rationals written as strings.
pub mod serde_seq {
    use serde::de::{Error as _, SeqAccess, Visitor};
    use serde::{Deserializer, Serializer};

    use super::Rational;

    pub fn serialize<S: Serializer>(values: &[Rational], ser: S) -> Result<S::Ok, S::Error> {
        ser.collect_seq(values.iter().map(super::format))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Vec<Rational>, D::Error> {
        struct Seq;
        impl<'de> Visitor<'de> for Seq {
            type Value = Vec<Rational>;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("a list of rationals (\"p/q\", decimal strings, or integers)")
            }
            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Self::Value, A::Error> {
                let mut out = Vec::new();
                while let Some(v) = seq.next_element::<serde_json::Value>()? {
                    let idx = out.len();
                    let parsed = match &v {
                        serde_json::Value::String(s) => super::parse(s),
                        serde_json::Value::Number(n) if n.is_i64() || n.is_u64() => {
                            super::parse(&n.to_string())
                        }
                        other => {
                            return Err(A::Error::custom(format!(
                                "element {idx}: expected a rational string, got {other}"
                            )))
                        }
                    };
                    out.push(parsed.map_err(|e| A::Error::custom(format!("element {idx}: {e}")))?);
                }
                Ok(out)
            }
        }
        de.deserialize_seq(Seq)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_forms() {
        assert_eq!(parse("3").unwrap(), int(3));
        assert_eq!(parse("-6/4").unwrap(), ratio(-3, 2));
        assert_eq!(parse("2.5").unwrap(), ratio(5, 2));
        assert_eq!(parse("-0.125").unwrap(), ratio(-1, 8));
        assert_eq!(parse(".5").unwrap(), ratio(1, 2));
        assert!(parse("1/0").is_err());
        assert!(parse("abc").is_err());
        assert!(parse("1.").is_err());
        assert!(parse("").is_err());
    }

    #[test]
    fn one_third_is_exact() {
        let third = parse("1/3").unwrap();
        assert_eq!(format(&third), "1/3");
        assert_eq!(&third * int(3), one());
    }

    #[test]
    fn canonical_form_is_lowest_terms() {
        assert_eq!(format(&parse("10/4").unwrap()), "5/2");
        assert_eq!(format(&parse("4/2").unwrap()), "2");
        assert_eq!(format(&parse("-1/-3").unwrap()), "1/3");
    }
}
