//! Exact rational helpers shared by every module.
//!
//! All lengths, positions and torus coordinates are [`Q`] values. On the wire
//! they are lowest-terms `"p/q"` strings; a bare integer `"p"` is accepted on
//! input.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn frac(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Reduce `x` into `[0, period)`.
pub fn modulo(x: &Q, period: &Q) -> Q {
    debug_assert!(period.is_positive());
    let k = (x / period).floor();
    let r = x - &k * period;
    debug_assert!(!r.is_negative() && &r < period);
    r
}

/// `a ≡ b (mod period)`.
pub fn congruent(a: &Q, b: &Q, period: &Q) -> bool {
    modulo(&(a - b), period).is_zero()
}

/// Distance between `a` and `b` on a circle of circumference `period`.
pub fn circle_distance(a: &Q, b: &Q, period: &Q) -> Q {
    let t = modulo(&(a - b), period);
    let u = period - &t;
    if t < u {
        t
    } else {
        u
    }
}

pub fn format_q(x: &Q) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(Error::Parse(format!("zero denominator in {s:?}")));
    }
    Ok(Q::new(n, d))
}

/// Least common multiple of the denominators, as a `u64`.
pub fn lcm_denominators<'a>(values: impl IntoIterator<Item = &'a Q>) -> Option<u64> {
    let mut acc = BigInt::one();
    for v in values {
        acc = acc.lcm(v.denom());
    }
    u64::try_from(acc).ok()
}

/// `x` as an `i64` when it is an integer that fits.
pub fn to_integer(x: &Q) -> Option<i64> {
    if x.is_integer() {
        i64::try_from(x.to_integer()).ok()
    } else {
        None
    }
}

pub(crate) mod serde_q {
    use super::{format_q, parse_q, Q};
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Q, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_q(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Q, D::Error> {
        let s = String::deserialize(d)?;
        parse_q(&s).map_err(D::Error::custom)
    }

    pub mod vec {
        use super::*;
        use serde::ser::SerializeSeq;

        pub fn serialize<S: Serializer>(xs: &[Q], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(xs.len()))?;
            for x in xs {
                seq.serialize_element(&format_q(x))?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Q>, D::Error> {
            let raw = Vec::<String>::deserialize(d)?;
            raw.iter()
                .map(|s| parse_q(s).map_err(D::Error::custom))
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modulo_normalizes_negative_values() {
        assert_eq!(modulo(&q(-1), &q(4)), q(3));
        assert_eq!(modulo(&frac(9, 2), &q(4)), frac(1, 2));
        assert_eq!(modulo(&q(8), &q(4)), q(0));
    }

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_q("6/4").unwrap(), frac(3, 2));
        assert_eq!(parse_q("-3").unwrap(), q(-3));
        assert_eq!(format_q(&q(5)), "5/1");
        assert_eq!(format_q(&frac(-2, 6)), "-1/3");
        assert!(parse_q("1/0").is_err());
        assert!(parse_q("one").is_err());
    }

    #[test]
    fn circle_distance_wraps() {
        assert_eq!(circle_distance(&q(1), &q(7), &q(8)), q(2));
        assert_eq!(circle_distance(&frac(1, 2), &q(0), &q(8)), frac(1, 2));
    }
}
