//! The exact number type used everywhere in the core.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision fraction, always kept in lowest terms with a positive
/// denominator.
pub type Rational = num_rational::BigRational;

pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

/// Parses `"p/q"` or `"p"`; the result is reduced.
pub fn parse(text: &str) -> Result<Rational> {
    let text = text.trim();
    let (numer, denom) = match text.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (text, "1"),
    };
    let numer: BigInt = numer
        .parse()
        .map_err(|_| Error::Parse(format!("bad numerator in {text:?}")))?;
    let denom: BigInt = denom
        .parse()
        .map_err(|_| Error::Parse(format!("bad denominator in {text:?}")))?;
    if denom.is_zero() {
        return Err(Error::Parse(format!("zero denominator in {text:?}")));
    }
    Ok(Rational::new(numer, denom))
}

/// Canonical `"p/q"` form (`"p"` for integers).
pub fn format(value: &Rational) -> String {
    value.to_string()
}

pub fn to_f64(value: &Rational) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

pub fn abs(value: &Rational) -> Rational {
    value.abs()
}

pub fn pow(base: &Rational, exp: u32) -> Rational {
    num_traits::pow(base.clone(), exp as usize)
}

/// Total order by cross-multiplication, with a machine-integer fast path.
/// Agrees with `Ord for Rational` but avoids its continued-fraction walk.
pub fn cmp(a: &Rational, b: &Rational) -> Ordering {
    if let (Some(an), Some(ad), Some(bn), Some(bd)) = (
        a.numer().to_i64(),
        a.denom().to_i64(),
        b.numer().to_i64(),
        b.denom().to_i64(),
    ) {
        return (i128::from(an) * i128::from(bd)).cmp(&(i128::from(bn) * i128::from(ad)));
    }
    (a.numer() * b.denom()).cmp(&(b.numer() * a.denom()))
}

/// A rational ordered with [`cmp`], for use as a map key.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Point(pub Rational);

impl Ord for Point {
    fn cmp(&self, other: &Self) -> Ordering {
        cmp(&self.0, &other.0)
    }
}

impl PartialOrd for Point {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(Ord::cmp(self, other))
    }
}

/// Sum with a single reduction at the end. Terms that share a denominator
/// (or divide the running one) skip the lcm.
pub fn sum<T: std::borrow::Borrow<Rational>>(terms: impl IntoIterator<Item = T>) -> Rational {
    let mut num = BigInt::zero();
    let mut den = BigInt::one();
    for t in terms {
        let t = t.borrow();
        if t.numer().is_zero() {
            continue;
        }
        if t.denom() == &den {
            num += t.numer();
        } else if (&den % t.denom()).is_zero() {
            num += t.numer() * (&den / t.denom());
        } else if (t.denom() % &den).is_zero() {
            let f = t.denom() / &den;
            num = num * f + t.numer();
            den = t.denom().clone();
        } else {
            num = num * t.denom() + t.numer() * &den;
            den *= t.denom();
        }
    }
    Rational::new(num, den)
}

pub fn min(a: &Rational, b: &Rational) -> Rational {
    if cmp(a, b) != Ordering::Greater {
        a.clone()
    } else {
        b.clone()
    }
}

pub fn ceil_to_u64(value: &Rational) -> Option<u64> {
    value.ceil().to_integer().to_u64()
}

/// Serde adapter storing a rational as its `"p/q"` string.
pub mod serde_str {
    use super::Rational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::format(value))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        super::parse(&text).map_err(serde::de::Error::custom)
    }
}

/// Same as [`serde_str`] for optional values.
pub mod serde_opt_str {
    use super::Rational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        match value {
            Some(v) => s.serialize_some(&super::format(v)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|t| super::parse(&t).map_err(serde::de::Error::custom))
            .transpose()
    }
}

/// Same as [`serde_str`] for lists.
pub mod serde_vec_str {
    use super::Rational;
    use serde::ser::SerializeSeq;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(values: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(values.len()))?;
        for v in values {
            seq.serialize_element(&super::format(v))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|t| super::parse(t).map_err(serde::de::Error::custom))
            .collect()
    }
}
