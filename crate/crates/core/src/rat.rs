//! Exact rational helpers shared by every module.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rat = BigRational;

pub fn int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn frac(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"p"` or `"p/q"`. Decimal notation is rejected on purpose.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a fraction string: {s:?}"));
    let parse_int = |t: &str| -> Result<BigInt> {
        let t = t.trim();
        let digits = t.strip_prefix(['-', '+']).unwrap_or(t);
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        t.parse::<BigInt>().map_err(|_| bad())
    };
    match s.split_once('/') {
        None => Ok(Rat::from_integer(parse_int(s)?)),
        Some((p, q)) => {
            let p = parse_int(p)?;
            let q = parse_int(q)?;
            if q.is_zero() {
                return Err(Error::Parse(format!("zero denominator in {s:?}")));
            }
            Ok(Rat::new(p, q))
        }
    }
}

pub fn fmt_rat(r: &Rat) -> String {
    r.to_string()
}

pub fn ceil(r: &Rat) -> BigInt {
    r.ceil().to_integer()
}

pub fn floor(r: &Rat) -> BigInt {
    r.floor().to_integer()
}

pub fn is_integral(r: &Rat) -> bool {
    r.is_integer()
}

pub fn is_nonneg(r: &Rat) -> bool {
    !r.is_negative()
}

/// Least common multiple of the denominators.
pub fn denom_lcm<'a>(values: impl IntoIterator<Item = &'a Rat>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, r| acc.lcm(r.denom()))
}

/// Serde adapter storing a rational as a fraction string.
pub mod serde_rat {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rat, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_rat(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rat, D::Error> {
        let s = String::deserialize(d)?;
        parse_rat(&s).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for vectors of fraction strings.
pub mod serde_rat_vec {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Rat], s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(fmt_rat))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Rat>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter()
            .map(|s| parse_rat(s).map_err(serde::de::Error::custom))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_integers() {
        assert_eq!(parse_rat("3/2").unwrap(), frac(3, 2));
        assert_eq!(parse_rat("-4").unwrap(), int(-4));
        assert_eq!(parse_rat(" 6/4 ").unwrap(), frac(3, 2));
        assert_eq!(parse_rat("1/-2").unwrap(), frac(-1, 2));
    }

    #[test]
    fn rejects_decimals_and_junk() {
        for s in ["1.5", "", "/", "1/0", "a/2", "--1", "1/2/3", "1e3"] {
            assert!(parse_rat(s).is_err(), "{s}");
        }
    }

    #[test]
    fn formats_round_trip() {
        for r in [frac(3, 2), int(0), frac(-7, 3), int(5)] {
            assert_eq!(parse_rat(&fmt_rat(&r)).unwrap(), r);
        }
        assert_eq!(fmt_rat(&int(2)), "2");
    }
}
