//! Points of the Riemann sphere, exact when rational.

use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use super::poly::rat_to_f64;

#[derive(Clone, Debug)]
pub enum SpherePoint {
    Infinity,
    Rational(BigRational),
    Complex(Complex64),
}

/// Chordal coincidence tolerance for floating points.
pub const COINCIDENCE_TOL: f64 = 1e-9;

impl SpherePoint {
    pub fn rat(n: i64, d: i64) -> SpherePoint {
        SpherePoint::Rational(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn int(n: i64) -> SpherePoint {
        SpherePoint::rat(n, 1)
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self, SpherePoint::Complex(_))
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, SpherePoint::Infinity)
    }

    /// Finite value as a complex double.
    pub fn to_c64(&self) -> Option<Complex64> {
        match self {
            SpherePoint::Infinity => None,
            SpherePoint::Rational(r) => Some(Complex64::new(rat_to_f64(r), 0.0)),
            SpherePoint::Complex(z) => Some(*z),
        }
    }

    /// Chordal distance on the unit-diameter sphere.
    pub fn chordal(&self, o: &SpherePoint) -> f64 {
        match (self.to_c64(), o.to_c64()) {
            (None, None) => 0.0,
            (Some(z), None) | (None, Some(z)) => 1.0 / (1.0 + z.norm_sqr()).sqrt(),
            (Some(z), Some(w)) => {
                (z - w).norm() / ((1.0 + z.norm_sqr()).sqrt() * (1.0 + w.norm_sqr()).sqrt())
            }
        }
    }

    /// Exact equality on exact data, chordal tolerance otherwise.
    pub fn same(&self, o: &SpherePoint) -> bool {
        match (self, o) {
            (SpherePoint::Infinity, SpherePoint::Infinity) => true,
            (SpherePoint::Rational(a), SpherePoint::Rational(b)) => a == b,
            (SpherePoint::Infinity, SpherePoint::Rational(_))
            | (SpherePoint::Rational(_), SpherePoint::Infinity) => false,
            _ => self.chordal(o) < COINCIDENCE_TOL,
        }
    }

    pub fn from_c64(z: Complex64) -> SpherePoint {
        if !z.re.is_finite() || !z.im.is_finite() {
            SpherePoint::Infinity
        } else {
            SpherePoint::Complex(z)
        }
    }

    /// Replace a floating value by a nearby small-height rational, if one is
    /// within `1e-11` (relative); the caller must confirm exactly.
    pub fn snap_candidate(&self) -> Option<SpherePoint> {
        let z = match self {
            SpherePoint::Complex(z) => *z,
            _ => return Some(self.clone()),
        };
        if z.norm() > 1e12 {
            return Some(SpherePoint::Infinity);
        }
        let scale = 1.0f64.max(z.norm());
        if z.im.abs() > 1e-11 * scale {
            return None;
        }
        let r = best_rational(z.re, 1_000_000)?;
        if (rat_to_f64(&r) - z.re).abs() <= 1e-11 * scale {
            Some(SpherePoint::Rational(r))
        } else {
            None
        }
    }

    pub fn label(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for SpherePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpherePoint::Infinity => write!(f, "inf"),
            SpherePoint::Rational(r) => {
                if r.denom() == &BigInt::from(1) {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            SpherePoint::Complex(z) => {
                let re = if z.re.abs() < 5e-13 { 0.0 } else { z.re };
                let im = if z.im.abs() < 5e-13 { 0.0 } else { z.im };
                if im == 0.0 {
                    write!(f, "{:.12}", re)
                } else {
                    write!(f, "{:.12}{:+.12}i", re, im)
                }
            }
        }
    }
}

impl Serialize for SpherePoint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            SpherePoint::Complex(z) => {
                use serde::ser::SerializeSeq;
                let mut seq = s.serialize_seq(Some(2))?;
                seq.serialize_element(&crate::fmt17(z.re))?;
                seq.serialize_element(&crate::fmt17(z.im))?;
                seq.end()
            }
            _ => s.serialize_str(&self.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for SpherePoint {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<SpherePoint, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        parse_point_value(&v).map_err(serde::de::Error::custom)
    }
}

/// `"p/q"`, `"inf"`, an integer string, or `[re, im]`.
pub fn parse_point_value(v: &serde_json::Value) -> Result<SpherePoint, String> {
    match v {
        serde_json::Value::String(s) => {
            let t = s.trim();
            if t.eq_ignore_ascii_case("inf") || t == "∞" {
                return Ok(SpherePoint::Infinity);
            }
            crate::exact_farey::parse_rational(t)
                .map(SpherePoint::Rational)
                .ok_or_else(|| format!("bad point {s:?}"))
        }
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(SpherePoint::int(i))
            } else {
                let x = n.as_f64().ok_or("bad number")?;
                BigRational::from_float(x)
                    .map(SpherePoint::Rational)
                    .ok_or_else(|| "bad number".to_string())
            }
        }
        serde_json::Value::Array(a) if a.len() == 2 => {
            let g = |x: &serde_json::Value| -> Result<f64, String> {
                match x {
                    serde_json::Value::Number(n) => n.as_f64().ok_or("bad number".into()),
                    serde_json::Value::String(s) => s.trim().parse().map_err(|_| format!("bad number {s:?}")),
                    _ => Err("bad number".into()),
                }
            };
            let (re, im) = (g(&a[0])?, g(&a[1])?);
            if im == 0.0 {
                if let Some(r) = BigRational::from_float(re) {
                    return Ok(SpherePoint::Rational(r));
                }
            }
            Ok(SpherePoint::Complex(Complex64::new(re, im)))
        }
        _ => Err(format!("bad point {v}")),
    }
}

/// Best rational approximation with bounded denominator (continued fractions).
pub fn best_rational(x: f64, max_den: i64) -> Option<BigRational> {
    if !x.is_finite() {
        return None;
    }
    let (mut h0, mut h1): (i128, i128) = (0, 1);
    let (mut k0, mut k1): (i128, i128) = (1, 0);
    let mut y = x;
    for _ in 0..64 {
        let a = y.floor();
        if a.abs() > 1e15 {
            break;
        }
        let ai = a as i128;
        let h2 = ai * h1 + h0;
        let k2 = ai * k1 + k0;
        if k2 > max_den as i128 {
            break;
        }
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
        let frac = y - a;
        if frac.abs() < 1e-15 {
            break;
        }
        y = 1.0 / frac;
    }
    if k1 == 0 {
        return None;
    }
    let g = h1.gcd(&k1);
    Some(BigRational::new(BigInt::from(h1 / g), BigInt::from(k1 / g)))
}

/// Height-bounded rational as `(p, q)` for labels.
pub fn small_rational(r: &BigRational) -> Option<(i64, i64)> {
    Some((r.numer().to_i64()?, r.denom().to_i64()?))
}
