//! Exact rationals used for densities and thresholds.

use num_rational::Ratio;
use serde::{Deserialize, Deserializer, Serializer};

use crate::error::{Error, Result};

pub type Rational = Ratio<u64>;

pub fn parse_ratio(s: &str) -> Result<Rational> {
    let bad = || Error::Parse { input: s.to_string(), message: "expected a rational `p/q` or a natural".into() };
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim().parse().map_err(|_| bad())?, d.trim().parse().map_err(|_| bad())?),
        None => (s.parse().map_err(|_| bad())?, 1),
    };
    if d == 0 {
        return Err(bad());
    }
    Ok(Ratio::new(n, d))
}

pub fn format_ratio(r: &Rational) -> String {
    if *r.denom() == 1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// `floor(r * size)` without overflow for the sizes used here.
pub fn floor_mul(r: &Rational, size: u64) -> u64 {
    ((*r.numer() as u128 * size as u128) / *r.denom() as u128) as u64
}

pub mod serde_ratio {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_ratio(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_ratio(&s).map_err(serde::de::Error::custom)
    }
}

pub mod serde_ratio_vec {
    use super::*;
    use serde::Serialize;

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
        v.iter().map(format_ratio).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Rational>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter().map(|s| parse_ratio(s).map_err(serde::de::Error::custom)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_text() {
        for s in ["7/8", "1", "0", "5/11"] {
            assert_eq!(format_ratio(&parse_ratio(s).unwrap()), s);
        }
        assert_eq!(format_ratio(&parse_ratio("2/4").unwrap()), "1/2");
        assert!(parse_ratio("1/0").is_err());
        assert!(parse_ratio("x").is_err());
    }

    #[test]
    fn floor_mul_rounds_down() {
        assert_eq!(floor_mul(&Ratio::new(1, 8), 4), 0);
        assert_eq!(floor_mul(&Ratio::new(1, 8), 16), 2);
        assert_eq!(floor_mul(&Ratio::new(3, 8), 8), 3);
    }
}
