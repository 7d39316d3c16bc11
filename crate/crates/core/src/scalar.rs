//! Scalar traits shared by the exact and floating-point code paths.
//!
//! Exact certificates run over [`Rat`](crate::Rat); numerical Kähler geometry
//! runs over `f64` (or `f32`) and `Complex<f64>`. Algorithms that only need
//! field operations are written once against [`Field`].

use std::fmt::Debug;
use std::ops::Neg;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, FloatConst, FromPrimitive, Num, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::Rat;

/// A commutative field with exact or approximate arithmetic.
pub trait Field: Num + Neg<Output = Self> + Clone + Debug + Send + Sync {}

impl<T> Field for T where T: Num + Neg<Output = T> + Clone + Debug + Send + Sync {}

/// A totally ordered field; the polytope code is generic over this.
pub trait OrderedField: Field + PartialOrd + Signed {}

impl<T> OrderedField for T where T: Field + PartialOrd + Signed {}

/// Real floating-point scalars for the integrator and Kähler numerics.
pub trait Real: Float + FloatConst + FromPrimitive + Debug + Send + Sync + 'static {
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Fields that can be embedded from the rationals.
pub trait FromRat: Field {
    fn from_rat(q: &Rat) -> Self;
}

impl FromRat for BigRational {
    fn from_rat(q: &Rat) -> Self {
        q.clone()
    }
}

impl FromRat for f64 {
    fn from_rat(q: &Rat) -> Self {
        rat_to_f64(q)
    }
}

impl FromRat for f32 {
    fn from_rat(q: &Rat) -> Self {
        rat_to_f64(q) as f32
    }
}

impl<T: Real> FromRat for num_complex::Complex<T> {
    fn from_rat(q: &Rat) -> Self {
        num_complex::Complex::new(T::lit(rat_to_f64(q)), T::zero())
    }
}

pub fn rat(num: i64, den: i64) -> Rat {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_int(n: i64) -> Rat {
    BigRational::from_integer(BigInt::from(n))
}

pub fn rat_to_f64(q: &Rat) -> f64 {
    match (q.numer().to_f64(), q.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        _ => q.to_f64().unwrap_or(f64::NAN),
    }
}

/// Parses `"p"`, `"p/q"` or a finite decimal such as `"-0.25"`.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|e| Error::Parse(format!("{s}: {e}")))?;
        let d = BigInt::from_str(d.trim()).map_err(|e| Error::Parse(format!("{s}: {e}")))?;
        if d.is_zero() {
            return Err(Error::Parse(format!("{s}: zero denominator")));
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((ip, fp)) = s.split_once('.') {
        let neg = ip.starts_with('-');
        let digits = format!("{}{}", ip.trim_start_matches(['-', '+']), fp);
        let n = BigInt::from_str(&digits).map_err(|e| Error::Parse(format!("{s}: {e}")))?;
        let d = num_traits::pow(BigInt::from(10), fp.len());
        let q = BigRational::new(n, d);
        return Ok(if neg { -q } else { q });
    }
    let n = BigInt::from_str(s).map_err(|e| Error::Parse(format!("{s}: {e}")))?;
    Ok(BigRational::from_integer(n))
}

pub fn format_rat(q: &Rat) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// `[numerator, denominator]` as decimal strings.
pub fn rat_pair(q: &Rat) -> [String; 2] {
    [q.numer().to_string(), q.denom().to_string()]
}

pub fn rat_from_pair(p: &[String; 2]) -> Result<Rat> {
    let n = BigInt::from_str(&p[0]).map_err(|e| Error::Parse(format!("{}: {e}", p[0])))?;
    let d = BigInt::from_str(&p[1]).map_err(|e| Error::Parse(format!("{}: {e}", p[1])))?;
    if !d.is_positive() {
        return Err(Error::Parse(format!(
            "denominator {} must be positive",
            p[1]
        )));
    }
    Ok(BigRational::new(n, d))
}

/// Serde adapter storing a [`Rat`] as `["num", "den"]`.
pub mod serde_rat {
    use super::*;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(q: &Rat, s: S) -> std::result::Result<S::Ok, S::Error> {
        rat_pair(q).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rat, D::Error> {
        let p = <[String; 2]>::deserialize(d)?;
        rat_from_pair(&p).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for `Vec<Rat>`.
pub mod serde_rat_vec {
    use super::*;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Rat], s: S) -> std::result::Result<S::Ok, S::Error> {
        v.iter().map(rat_pair).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Rat>, D::Error> {
        let v = Vec::<[String; 2]>::deserialize(d)?;
        v.iter()
            .map(|p| rat_from_pair(p).map_err(serde::de::Error::custom))
            .collect()
    }
}

/// Serde adapter for `Vec<Vec<Rat>>`.
pub mod serde_rat_mat {
    use super::*;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &[Vec<Rat>], s: S) -> std::result::Result<S::Ok, S::Error> {
        m.iter()
            .map(|r| r.iter().map(rat_pair).collect::<Vec<_>>())
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Vec<Vec<Rat>>, D::Error> {
        let m = Vec::<Vec<[String; 2]>>::deserialize(d)?;
        m.iter()
            .map(|r| {
                r.iter()
                    .map(|p| rat_from_pair(p).map_err(serde::de::Error::custom))
                    .collect()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse_rat("3").unwrap(), rat_int(3));
        assert_eq!(parse_rat(" -6/8 ").unwrap(), rat(-3, 4));
        assert_eq!(parse_rat("-0.25").unwrap(), rat(-1, 4));
        assert_eq!(parse_rat("1.5").unwrap(), rat(3, 2));
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("x").is_err());
    }

    #[test]
    fn pair_is_reduced() {
        let q = rat(10, -4);
        assert_eq!(rat_pair(&q), ["-5".to_string(), "2".to_string()]);
        assert!(rat_from_pair(&["1".into(), "-2".into()]).is_err());
    }

    #[test]
    fn huge_rational_to_f64() {
        let big = num_traits::pow(BigInt::from(10), 400);
        let q = BigRational::new(big.clone() + 1, big);
        assert!((rat_to_f64(&q) - 1.0).abs() < 1e-12);
    }
}
