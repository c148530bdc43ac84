//! Scalar type, sequence norms and the exponent type used by the certifier.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Matrix entries are complex-capable; real operators simply carry zero imaginary parts.
pub type Scalar = Complex64;

/// Anything with an absolute value.
pub trait Modulus: Copy {
    fn modulus(&self) -> f64;
}

impl Modulus for f64 {
    fn modulus(&self) -> f64 {
        self.abs()
    }
}

impl Modulus for Complex64 {
    fn modulus(&self) -> f64 {
        self.norm()
    }
}

/// `‖v‖_p` for any real `p ≥ 1`; `f64::INFINITY` gives the sup norm.
pub fn lp_norm<T: Modulus>(v: &[T], p: f64) -> f64 {
    if p.is_infinite() {
        v.iter().map(Modulus::modulus).fold(0.0, f64::max)
    } else if p == 1.0 {
        v.iter().map(Modulus::modulus).sum()
    } else if p == 2.0 {
        // scaled to avoid overflow on large entries
        let scale = v.iter().map(Modulus::modulus).fold(0.0, f64::max);
        if scale == 0.0 {
            return 0.0;
        }
        let s: f64 = v.iter().map(|x| (x.modulus() / scale).powi(2)).sum();
        scale * s.sqrt()
    } else {
        let scale = v.iter().map(Modulus::modulus).fold(0.0, f64::max);
        if scale == 0.0 {
            return 0.0;
        }
        let s: f64 = v.iter().map(|x| (x.modulus() / scale).powf(p)).sum();
        scale * s.powf(1.0 / p)
    }
}

/// The exponents for which exact block bounds exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PNorm {
    One,
    Two,
    Inf,
}

impl PNorm {
    pub const ALL: [PNorm; 3] = [PNorm::One, PNorm::Two, PNorm::Inf];

    pub fn as_f64(self) -> f64 {
        match self {
            PNorm::One => 1.0,
            PNorm::Two => 2.0,
            PNorm::Inf => f64::INFINITY,
        }
    }

    /// `1/p`, with `1/∞ = 0`.
    pub fn reciprocal(self) -> f64 {
        match self {
            PNorm::One => 1.0,
            PNorm::Two => 0.5,
            PNorm::Inf => 0.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PNorm::One => "1",
            PNorm::Two => "2",
            PNorm::Inf => "inf",
        }
    }
}

impl fmt::Display for PNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PNorm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "1" => Ok(PNorm::One),
            "2" => Ok(PNorm::Two),
            "inf" | "infinity" | "∞" => Ok(PNorm::Inf),
            other => Err(Error::Input(format!(
                "exponent must be one of 1, 2, inf (got {other:?})"
            ))),
        }
    }
}

impl Serialize for PNorm {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for PNorm {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norms_of_small_vectors() {
        let v = [3.0, -4.0];
        assert_eq!(lp_norm(&v, 1.0), 7.0);
        assert_eq!(lp_norm(&v, 2.0), 5.0);
        assert_eq!(lp_norm(&v, f64::INFINITY), 4.0);
        assert!((lp_norm(&v, 3.0) - 91f64.powf(1.0 / 3.0)).abs() < 1e-12);
        assert_eq!(lp_norm::<f64>(&[], 2.0), 0.0);
    }

    #[test]
    fn pnorm_parses() {
        assert_eq!("inf".parse::<PNorm>().unwrap(), PNorm::Inf);
        assert_eq!("2".parse::<PNorm>().unwrap(), PNorm::Two);
        assert!("3".parse::<PNorm>().is_err());
    }
}
