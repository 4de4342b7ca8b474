//! Exact arithmetic for cusps, the modular group and the normalized horoball family.
//!
//! A cusp `p/q` doubles as a boundary point of the upper half-plane and as an
//! isotopy class of essential curves in the four-marked sphere. The horoball
//! `B_t(p/q)` is the disk tangent to the real line at `p/q` with Euclidean
//! diameter `t/q^2`; `B_t(inf)` is the half-plane `Im > 1/t`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FareyError {
    #[error("(0,0) does not represent a cusp")]
    ZeroCusp,
    #[error("integer overflow in modular arithmetic")]
    Overflow,
    #[error("cannot parse cusp from {0:?}")]
    Parse(String),
    #[error("determinant must be 1, got {0}")]
    Determinant(i128),
    #[error("leash bound needs 0 <= alpha < 1 and C >= 0 (alpha = {alpha}, C = {c})")]
    LeashDomain { c: f64, alpha: f64 },
}

/// Extended rational `p/q` in lowest terms with `q >= 0`; infinity is `(1,0)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cusp {
    p: i64,
    q: i64,
}

impl Cusp {
    pub const INFINITY: Cusp = Cusp { p: 1, q: 0 };
    pub const ZERO: Cusp = Cusp { p: 0, q: 1 };
    pub const ONE: Cusp = Cusp { p: 1, q: 1 };

    pub fn new(p: i64, q: i64) -> Result<Cusp, FareyError> {
        cusp_normalize(p, q)
    }

    pub fn p(&self) -> i64 {
        self.p
    }

    pub fn q(&self) -> i64 {
        self.q
    }

    pub fn is_infinity(&self) -> bool {
        self.q == 0
    }

    /// `max(|p|, q)`, the height used by attractor searches.
    pub fn height(&self) -> i64 {
        self.p.abs().max(self.q)
    }

    pub fn to_f64(&self) -> f64 {
        if self.q == 0 {
            f64::INFINITY
        } else {
            self.p as f64 / self.q as f64
        }
    }
}

impl fmt::Display for Cusp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.q == 0 {
            write!(f, "inf")
        } else {
            write!(f, "{}/{}", self.p, self.q)
        }
    }
}

impl FromStr for Cusp {
    type Err = FareyError;

    fn from_str(s: &str) -> Result<Cusp, FareyError> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("inf") || t == "∞" || t == "1/0" {
            return Ok(Cusp::INFINITY);
        }
        let bad = || FareyError::Parse(s.to_string());
        match t.split_once('/') {
            Some((a, b)) => {
                let p: i64 = a.trim().parse().map_err(|_| bad())?;
                let q: i64 = b.trim().parse().map_err(|_| bad())?;
                cusp_normalize(p, q)
            }
            None => {
                let p: i64 = t.parse().map_err(|_| bad())?;
                cusp_normalize(p, 1)
            }
        }
    }
}

impl Serialize for Cusp {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Cusp {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Cusp, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub fn cusp_normalize(p: i64, q: i64) -> Result<Cusp, FareyError> {
    cusp_normalize_wide(p as i128, q as i128)
}

fn cusp_normalize_wide(p: i128, q: i128) -> Result<Cusp, FareyError> {
    if p == 0 && q == 0 {
        return Err(FareyError::ZeroCusp);
    }
    if q == 0 {
        return Ok(Cusp::INFINITY);
    }
    let g = p.gcd(&q);
    let (mut p, mut q) = (p / g, q / g);
    if q < 0 {
        p = -p;
        q = -q;
    }
    let p = i64::try_from(p).map_err(|_| FareyError::Overflow)?;
    let q = i64::try_from(q).map_err(|_| FareyError::Overflow)?;
    Ok(Cusp { p, q })
}

/// Element of PSL(2,Z), stored with a canonical sign (`c > 0`, or `c = 0` and `d > 0`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ModularElement {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl ModularElement {
    pub const IDENTITY: ModularElement = ModularElement { a: 1, b: 0, c: 0, d: 1 };
    pub const S: ModularElement = ModularElement { a: 0, b: -1, c: 1, d: 0 };
    pub const T: ModularElement = ModularElement { a: 1, b: 1, c: 0, d: 1 };

    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Result<ModularElement, FareyError> {
        Self::from_wide(a as i128, b as i128, c as i128, d as i128)
    }

    fn from_wide(a: i128, b: i128, c: i128, d: i128) -> Result<ModularElement, FareyError> {
        let det = a * d - b * c;
        if det != 1 {
            return Err(FareyError::Determinant(det));
        }
        let flip = c < 0 || (c == 0 && d < 0);
        let s = if flip { -1 } else { 1 };
        let cv = |x: i128| i64::try_from(s * x).map_err(|_| FareyError::Overflow);
        Ok(ModularElement { a: cv(a)?, b: cv(b)?, c: cv(c)?, d: cv(d)? })
    }

    pub fn translation(n: i64) -> ModularElement {
        ModularElement { a: 1, b: n, c: 0, d: 1 }
    }

    pub fn mul(&self, o: &ModularElement) -> Result<ModularElement, FareyError> {
        let (a, b, c, d) = (self.a as i128, self.b as i128, self.c as i128, self.d as i128);
        let (e, f, g, h) = (o.a as i128, o.b as i128, o.c as i128, o.d as i128);
        Self::from_wide(a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)
    }

    pub fn inverse(&self) -> ModularElement {
        Self::from_wide(self.d as i128, -(self.b as i128), -(self.c as i128), self.a as i128)
            .expect("inverse of a unimodular matrix")
    }

    /// Congruent to the identity mod 2 (up to sign).
    pub fn in_gamma2(&self) -> bool {
        self.a.rem_euclid(2) == 1
            && self.d.rem_euclid(2) == 1
            && self.b.rem_euclid(2) == 0
            && self.c.rem_euclid(2) == 0
    }

    /// Some element sending infinity to `r`.
    pub fn frame_of(r: Cusp) -> ModularElement {
        if r.is_infinity() {
            return ModularElement::IDENTITY;
        }
        // p*y - x*q = 1
        let ext = (r.p as i128).extended_gcd(&(r.q as i128));
        let (y, x) = (ext.x, -ext.y);
        // ext.x * p + ext.y * q = 1 with gcd 1
        debug_assert_eq!(ext.gcd.abs(), 1);
        let s = ext.gcd.signum();
        Self::from_wide(r.p as i128, s * x, r.q as i128, s * y).expect("unimodular frame")
    }

    pub fn apply_c64(&self, z: num_complex::Complex64) -> num_complex::Complex64 {
        let (a, b, c, d) = (self.a as f64, self.b as f64, self.c as f64, self.d as f64);
        (z * a + b) / (z * c + d)
    }
}

impl fmt::Display for ModularElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{} {}; {} {}]", self.a, self.b, self.c, self.d)
    }
}

pub fn moebius_apply(m: &ModularElement, r: Cusp) -> Result<Cusp, FareyError> {
    let (p, q) = (r.p as i128, r.q as i128);
    cusp_normalize_wide(
        m.a as i128 * p + m.b as i128 * q,
        m.c as i128 * p + m.d as i128 * q,
    )
}

/// Point of the upper half-plane with exact rational coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactPoint {
    pub x: BigRational,
    pub y: BigRational,
}

impl ExactPoint {
    pub fn new(x: BigRational, y: BigRational) -> ExactPoint {
        assert!(y.is_positive(), "point must lie in the upper half-plane");
        ExactPoint { x, y }
    }

    pub fn from_f64(x: f64, y: f64) -> Option<ExactPoint> {
        let x = BigRational::from_float(x)?;
        let y = BigRational::from_float(y)?;
        if !y.is_positive() {
            return None;
        }
        Some(ExactPoint { x, y })
    }

    pub fn to_c64(&self) -> num_complex::Complex64 {
        num_complex::Complex64::new(
            self.x.to_f64().unwrap_or(f64::NAN),
            self.y.to_f64().unwrap_or(f64::NAN),
        )
    }
}

pub fn moebius_apply_point(m: &ModularElement, z: &ExactPoint) -> ExactPoint {
    let a = BigRational::from_integer(BigInt::from(m.a));
    let b = BigRational::from_integer(BigInt::from(m.b));
    let c = BigRational::from_integer(BigInt::from(m.c));
    let d = BigRational::from_integer(BigInt::from(m.d));
    let cxd = &c * &z.x + &d;
    let den = &cxd * &cxd + &c * &c * &z.y * &z.y;
    let re = ((&a * &z.x + &b) * &cxd + &a * &c * &z.y * &z.y) / &den;
    let im = &z.y / &den;
    ExactPoint { x: re, y: im }
}

/// Member `B_t(base)` of the normalized horoball family.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Horoball {
    pub base: Cusp,
    pub t: BigRational,
}

impl Horoball {
    pub fn new(base: Cusp, t: BigRational) -> Horoball {
        assert!(t.is_positive(), "hororadius must be positive");
        Horoball { base, t }
    }

    /// Euclidean diameter `t/q^2`; `None` for the half-plane at infinity.
    pub fn diameter(&self) -> Option<BigRational> {
        if self.base.is_infinity() {
            None
        } else {
            let q = BigInt::from(self.base.q);
            Some(&self.t / BigRational::from_integer(&q * &q))
        }
    }

    fn center_x(&self) -> BigRational {
        BigRational::new(BigInt::from(self.base.p), BigInt::from(self.base.q))
    }
}

pub fn horoball_map(m: &ModularElement, b: &Horoball) -> Result<Horoball, FareyError> {
    Ok(Horoball { base: moebius_apply(m, b.base)?, t: b.t.clone() })
}

/// Exact test of `Im(tau)/|q tau - p|^2 > 1/t`.
pub fn horoball_contains(b: &Horoball, tau: &ExactPoint) -> bool {
    if b.base.is_infinity() {
        return &tau.y * &b.t > BigRational::one();
    }
    let p = BigRational::from_integer(BigInt::from(b.base.p));
    let q = BigRational::from_integer(BigInt::from(b.base.q));
    let re = &q * &tau.x - &p;
    let im = &q * &tau.y;
    &tau.y * &b.t > &re * &re + &im * &im
}

/// Open horoballs are disjoint (tangency allowed). For two finite bases the
/// circle condition `dx^2 + (r1-r2)^2 >= (r1+r2)^2` reduces to
/// `(p1 q2 - p2 q1)^2 >= t1 t2`.
pub fn horoballs_disjoint(h1: &Horoball, h2: &Horoball) -> bool {
    match (h1.base.is_infinity(), h2.base.is_infinity()) {
        (true, true) => false,
        (true, false) | (false, true) => {
            let (inf, fin) = if h1.base.is_infinity() { (h1, h2) } else { (h2, h1) };
            let q = BigInt::from(fin.base.q);
            &inf.t * &fin.t <= BigRational::from_integer(&q * &q)
        }
        (false, false) => {
            if h1.base == h2.base {
                return false;
            }
            let det = BigInt::from(h1.base.p) * BigInt::from(h2.base.q) - BigInt::from(h2.base.p) * BigInt::from(h1.base.q);
            BigRational::from_integer(&det * &det) >= &h1.t * &h2.t
        }
    }
}

/// Open horoball meets the open rectangle `(x0,x1) x (y0,y1)`.
pub fn horoball_meets_rect(
    b: &Horoball,
    x0: &BigRational,
    x1: &BigRational,
    y0: &BigRational,
    y1: &BigRational,
) -> bool {
    match b.diameter() {
        None => y1 * &b.t > BigRational::one(),
        Some(d) => {
            let two = BigRational::from_integer(BigInt::from(2));
            let r = &d / &two;
            let cx = b.center_x();
            let zero = BigRational::zero();
            let dx = if &cx < x0 {
                x0 - &cx
            } else if &cx > x1 {
                &cx - x1
            } else {
                zero.clone()
            };
            let dy = if &r < y0 {
                y0 - &r
            } else if &r > y1 {
                &r - y1
            } else {
                zero
            };
            &dx * &dx + &dy * &dy < &r * &r
        }
    }
}

/// Horoballs of `B_t` meeting the rectangle, enumerated over `q^2 <= t/y0`.
pub fn horoballs_meeting_rect(
    t: &BigRational,
    x0: &BigRational,
    x1: &BigRational,
    y0: &BigRational,
    y1: &BigRational,
) -> Vec<Cusp> {
    let mut out = Vec::new();
    let inf = Horoball::new(Cusp::INFINITY, t.clone());
    if horoball_meets_rect(&inf, x0, x1, y0, y1) {
        out.push(Cusp::INFINITY);
    }
    let qmax = floor_sqrt_ratio(t, y0);
    for q in 1..=qmax {
        let qb = BigRational::from_integer(BigInt::from(q));
        let lo: BigInt = (x0 * &qb).floor().to_integer() - 1;
        let hi: BigInt = (x1 * &qb).ceil().to_integer() + 1;
        let (lo, hi) = (lo.to_i64().unwrap_or(i64::MIN), hi.to_i64().unwrap_or(i64::MAX));
        for p in lo..=hi {
            if p.gcd(&q) != 1 {
                continue;
            }
            let c = Cusp { p, q };
            if horoball_meets_rect(&Horoball::new(c, t.clone()), x0, x1, y0, y1) {
                out.push(c);
            }
        }
    }
    out
}

/// Largest integer `q` with `q^2 <= a/b`.
fn floor_sqrt_ratio(a: &BigRational, b: &BigRational) -> i64 {
    let r = a / b;
    let fl = r.floor().to_integer();
    let mut q = fl.sqrt();
    while BigRational::from_integer(&q * &q) > r {
        q -= 1;
    }
    while BigRational::from_integer((&q + 1) * (&q + 1)) <= r {
        q += 1;
    }
    q.to_i64().unwrap_or(i64::MAX)
}

/// The unique cusp whose horoball `B_t` contains `tau`, if any (`t < 1`).
/// A containing `p/q` has `|x - p/q| < 1/(2q^2)`, so by Legendre it is a
/// continued-fraction convergent of `x`; only those are tested.
pub fn cusp_identify(tau: &ExactPoint, t: &BigRational) -> Option<Cusp> {
    if &tau.y * t > BigRational::one() {
        return Some(Cusp::INFINITY);
    }
    let qmax = BigInt::from(floor_sqrt_ratio(t, &tau.y));
    let (mut h0, mut h1) = (BigInt::zero(), BigInt::one());
    let (mut k0, mut k1) = (BigInt::one(), BigInt::zero());
    let mut x = tau.x.clone();
    loop {
        let a = x.floor().to_integer();
        let h2 = &a * &h1 + &h0;
        let k2 = &a * &k1 + &k0;
        if k2 > qmax {
            return None;
        }
        let c = Cusp { p: h2.to_i64()?, q: k2.to_i64()? };
        if horoball_contains(&Horoball::new(c, t.clone()), tau) {
            return Some(c);
        }
        let frac = &x - BigRational::from_integer(a);
        if frac.is_zero() {
            return None;
        }
        x = frac.recip();
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
    }
}

/// Puncture of the thrice-punctured sphere that a cusp projects to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PunctureLabel {
    Zero,
    One,
    Infinity,
}

impl PunctureLabel {
    pub const ALL: [PunctureLabel; 3] = [PunctureLabel::Zero, PunctureLabel::One, PunctureLabel::Infinity];
}

impl fmt::Display for PunctureLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PunctureLabel::Zero => "0",
            PunctureLabel::One => "1",
            PunctureLabel::Infinity => "inf",
        };
        f.write_str(s)
    }
}

/// Parity table, calibrated from the limits of the lambda function along
/// vertical geodesics: `lambda(iY) -> 0`, `lambda(iy) -> 1` as `y -> 0`,
/// `lambda(1 + iy) -> inf` as `y -> 0`.
pub fn gamma2_class(r: Cusp) -> PunctureLabel {
    match (r.p.rem_euclid(2), r.q.rem_euclid(2)) {
        (1, 0) => PunctureLabel::Zero,
        (0, 1) => PunctureLabel::One,
        _ => PunctureLabel::Infinity,
    }
}

/// `C/(1-alpha)`, the eventual bound for sequences with `x_n <= alpha x_{n-1} + C`.
pub fn leash_bound(c: f64, alpha: f64) -> Result<f64, FareyError> {
    if !(0.0..1.0).contains(&alpha) || c < 0.0 || !c.is_finite() {
        return Err(FareyError::LeashDomain { c, alpha });
    }
    Ok(c / (1.0 - alpha))
}

pub fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn parse_rational(s: &str) -> Option<BigRational> {
    let t = s.trim();
    match t.split_once('/') {
        Some((a, b)) => {
            let n: BigInt = a.trim().parse().ok()?;
            let d: BigInt = b.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(BigRational::new(n, d))
        }
        None => {
            if let Ok(n) = t.parse::<BigInt>() {
                return Some(BigRational::from_integer(n));
            }
            let v: f64 = t.parse().ok()?;
            BigRational::from_float(v)
        }
    }
}

/// All cusps with `|p| <= h`, `0 <= q <= h`, in a fixed order (infinity first).
pub fn cusps_up_to_height(h: i64) -> Vec<Cusp> {
    let mut v = Vec::new();
    if h >= 1 {
        v.push(Cusp::INFINITY);
    }
    for q in 1..=h {
        for p in -h..=h {
            if p.gcd(&q) == 1 {
                v.push(Cusp { p, q });
            }
        }
    }
    if h == 0 {
        v.clear();
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_examples() {
        assert_eq!(cusp_normalize(2, 4).unwrap(), Cusp { p: 1, q: 2 });
        assert_eq!(cusp_normalize(3, 0).unwrap(), Cusp::INFINITY);
        assert_eq!(cusp_normalize(-3, -6).unwrap(), Cusp { p: 1, q: 2 });
        assert_eq!(cusp_normalize(0, 0), Err(FareyError::ZeroCusp));
        assert_eq!(cusp_normalize(0, -5).unwrap(), Cusp::ZERO);
    }

    #[test]
    fn apply_examples() {
        assert_eq!(moebius_apply(&ModularElement::S, Cusp::ZERO).unwrap(), Cusp::INFINITY);
        let r = Cusp::new(3, 7).unwrap();
        assert_eq!(moebius_apply(&ModularElement::T, r).unwrap(), Cusp::new(10, 7).unwrap());
        let m = ModularElement::new(1, 0, 2, 1).unwrap();
        assert_eq!(moebius_apply(&m, Cusp::ONE).unwrap(), Cusp::new(1, 3).unwrap());
    }

    #[test]
    fn horoball_map_examples() {
        let half = rational(1, 2);
        let b = Horoball::new(Cusp::ZERO, half.clone());
        assert_eq!(horoball_map(&ModularElement::T, &b).unwrap().base, Cusp::ONE);
        assert_eq!(horoball_map(&ModularElement::IDENTITY, &b).unwrap(), b);
        let m = ModularElement::new(1, 0, 2, 1).unwrap();
        let binf = Horoball::new(Cusp::INFINITY, half);
        assert_eq!(horoball_map(&m, &binf).unwrap().base, Cusp::new(1, 2).unwrap());
    }

    #[test]
    fn contains_examples() {
        let b1 = Horoball::new(Cusp::INFINITY, rational(1, 1));
        assert!(horoball_contains(&b1, &ExactPoint::new(rational(0, 1), rational(2, 1))));
        let b = Horoball::new(Cusp::ZERO, rational(1, 2));
        assert!(horoball_contains(&b, &ExactPoint::new(rational(0, 1), rational(1, 10))));
        assert!(!horoball_contains(&b, &ExactPoint::new(rational(0, 1), rational(1, 1))));
    }

    #[test]
    fn diameter_matches_predicate() {
        let b = Horoball::new(Cusp::new(2, 3).unwrap(), rational(1, 2));
        let d = b.diameter().unwrap();
        assert_eq!(d, rational(1, 18));
        // the top point r + i d is on the boundary, slightly lower is inside
        let x = rational(2, 3);
        assert!(!horoball_contains(&b, &ExactPoint::new(x.clone(), d.clone())));
        assert!(horoball_contains(&b, &ExactPoint::new(x, &d * rational(99, 100))));
    }

    #[test]
    fn identify_examples() {
        let half = rational(1, 2);
        let p = ExactPoint::new(rational(0, 1), rational(10, 1));
        assert_eq!(cusp_identify(&p, &half), Some(Cusp::INFINITY));
        let p = ExactPoint::new(rational(1, 3), rational(1, 100));
        assert_eq!(cusp_identify(&p, &half), Some(Cusp::new(1, 3).unwrap()));
        let p = ExactPoint::new(rational(1, 2), rational(1, 2));
        assert_eq!(cusp_identify(&p, &half), None);
    }

    fn identify_by_scan(tau: &ExactPoint, t: &BigRational) -> Option<Cusp> {
        if &tau.y * t > BigRational::one() {
            return Some(Cusp::INFINITY);
        }
        for q in 1..=floor_sqrt_ratio(t, &tau.y) {
            let fl = (&tau.x * BigRational::from_integer(BigInt::from(q))).floor().to_integer().to_i64().unwrap();
            for p in [fl, fl + 1] {
                if p.gcd(&q) == 1 && horoball_contains(&Horoball::new(Cusp { p, q }, t.clone()), tau) {
                    return Some(Cusp { p, q });
                }
            }
        }
        None
    }

    #[test]
    fn convergent_search_matches_scan() {
        let mut s: u64 = 12345;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (s >> 11) as f64 / (1u64 << 53) as f64
        };
        for k in 0..800 {
            let x = 4.0 * next() - 2.0;
            let y = 10f64.powf(-4.0 * next()) * if k % 2 == 0 { 1.0 } else { 0.01 };
            let p = ExactPoint::from_f64(x, y).unwrap();
            for t in [rational(1, 2), rational(9, 10)] {
                assert_eq!(cusp_identify(&p, &t), identify_by_scan(&p, &t));
            }
        }
    }

    #[test]
    fn leash_examples() {
        assert_eq!(leash_bound(0.0, 0.5).unwrap(), 0.0);
        assert_eq!(leash_bound(1.0, 0.0).unwrap(), 1.0);
        assert_eq!(leash_bound(2.0, 0.5).unwrap(), 4.0);
        assert!(leash_bound(1.0, 1.0).is_err());
    }

    #[test]
    fn frames_send_infinity_to_cusp() {
        for c in cusps_up_to_height(12) {
            let g = ModularElement::frame_of(c);
            assert_eq!(moebius_apply(&g, Cusp::INFINITY).unwrap(), c);
        }
    }

    #[test]
    fn psl_sign_is_canonical() {
        let m = ModularElement::new(-1, 0, -2, -1).unwrap();
        assert_eq!(m, ModularElement::new(1, 0, 2, 1).unwrap());
        assert!(ModularElement::new(1, 2, 2, 5).unwrap().in_gamma2());
        assert!(!ModularElement::T.in_gamma2());
    }

    #[test]
    fn parse_and_display() {
        assert_eq!("inf".parse::<Cusp>().unwrap(), Cusp::INFINITY);
        assert_eq!("-2/4".parse::<Cusp>().unwrap().to_string(), "-1/2");
        assert_eq!("3".parse::<Cusp>().unwrap().to_string(), "3/1");
        assert!("0/0".parse::<Cusp>().is_err());
    }
}
