//! Rational maps of the sphere: critical points, postcritical dynamics,
//! portraits, static reducibility and the composition constructions.
//!
//! Every map carries complex coefficients; maps built from rational data also
//! keep exact coefficients, and then orbits, portraits and decompositions are
//! decided exactly.

pub mod point;
pub mod poly;

use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Num, One, Zero};
use serde::Serialize;
use thiserror::Error;

pub use point::SpherePoint;
pub use poly::{cluster, CPoly, Poly, QPoly};


#[derive(Debug, Error, Clone, PartialEq)]
pub enum RatMapError {
    #[error("denominator is the zero polynomial")]
    ZeroDenominator,
    #[error("map has degree {0}; degree at least 1 is required")]
    Degenerate(usize),
    #[error("orbit of {point} not periodic within {max_iter} iterations")]
    NotEventuallyPeriodic { point: String, max_iter: usize },
    #[error("marked set is not forward invariant: f({0}) = {1} is unmarked")]
    NotInvariant(String, String),
    #[error("postcritical point {0} is not marked")]
    PostcriticalUnmarked(String),
    #[error("marked set needs 4 distinct points")]
    BadMarking,
    #[error("no Moebius map realizes the requested double transposition")]
    NoSuchMoebius,
    #[error("degenerate Lattes parameter")]
    DegenerateLattes,
    #[error("map is not statically reducible")]
    NotReducible,
    #[error("root finder residual {0:e} too large")]
    RootFinder(f64),
    #[error("inconsistent portrait: {0}")]
    BadPortrait(String),
}

pub type Result<T> = std::result::Result<T, RatMapError>;

/// `num/den` with complex coefficients and optional exact rational coefficients.
#[derive(Clone, Debug)]
pub struct RationalMap {
    num: CPoly,
    den: CPoly,
    exact: Option<(QPoly, QPoly)>,
}

impl PartialEq for RationalMap {
    fn eq(&self, o: &Self) -> bool {
        match (&self.exact, &o.exact) {
            (Some((n1, d1)), Some((n2, d2))) => n1.mul(d2) == n2.mul(d1),
            _ => {
                let a = self.num.mul(&o.den);
                let b = o.num.mul(&self.den);
                let n = a.c.len().max(b.c.len());
                (0..n).all(|k| (a.coeff(k) - b.coeff(k)).norm() < 1e-12)
            }
        }
    }
}

impl RationalMap {
    /// Exact map; common factors are cancelled and the denominator made monic.
    pub fn from_exact(num: QPoly, den: QPoly) -> Result<RationalMap> {
        if den.is_zero() {
            return Err(RatMapError::ZeroDenominator);
        }
        let g = num.gcd(&den);
        let (mut n, mut d) = if g.deg_or_zero() > 0 {
            (num.divrem(&g).0, den.divrem(&g).0)
        } else {
            (num, den)
        };
        let l = d.leading();
        n = n.scale(&(BigRational::one() / &l));
        d = d.monic();
        let deg = n.deg_or_zero().max(d.deg_or_zero());
        if deg < 1 {
            return Err(RatMapError::Degenerate(deg));
        }
        Ok(RationalMap { num: n.to_complex(), den: d.to_complex(), exact: Some((n, d)) })
    }

    pub fn from_complex(num: Vec<Complex64>, den: Vec<Complex64>) -> Result<RationalMap> {
        let n = CPoly::new(num);
        let d = CPoly::new(den);
        if d.is_zero() {
            return Err(RatMapError::ZeroDenominator);
        }
        let deg = n.deg_or_zero().max(d.deg_or_zero());
        if deg < 1 {
            return Err(RatMapError::Degenerate(deg));
        }
        Ok(RationalMap { num: n, den: d, exact: None })
    }

    /// Exact map from integer-ratio coefficient lists (increasing degree).
    pub fn from_ratios(num: &[(i64, i64)], den: &[(i64, i64)]) -> Result<RationalMap> {
        let q = |v: &[(i64, i64)]| {
            QPoly::new(
                v.iter()
                    .map(|&(a, b)| BigRational::new(BigInt::from(a), BigInt::from(b)))
                    .collect(),
            )
        };
        Self::from_exact(q(num), q(den))
    }

    pub fn identity() -> RationalMap {
        Self::from_ratios(&[(0, 1), (1, 1)], &[(1, 1)]).unwrap()
    }

    /// `z -> (az+b)/(cz+d)` from exact entries.
    pub fn moebius_exact(a: BigRational, b: BigRational, c: BigRational, d: BigRational) -> Result<RationalMap> {
        if (&a * &d - &b * &c).is_zero() {
            return Err(RatMapError::NoSuchMoebius);
        }
        Self::from_exact(QPoly::new(vec![b, a]), QPoly::new(vec![d, c]))
    }

    pub fn moebius_complex(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<RationalMap> {
        if (a * d - b * c).norm() == 0.0 {
            return Err(RatMapError::NoSuchMoebius);
        }
        Self::from_complex(vec![b, a], vec![d, c])
    }

    pub fn num(&self) -> &CPoly {
        &self.num
    }

    pub fn den(&self) -> &CPoly {
        &self.den
    }

    pub fn exact(&self) -> Option<(&QPoly, &QPoly)> {
        self.exact.as_ref().map(|(n, d)| (n, d))
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    pub fn degree(&self) -> usize {
        match &self.exact {
            Some((n, d)) => n.deg_or_zero().max(d.deg_or_zero()),
            None => self.num.deg_or_zero().max(self.den.deg_or_zero()),
        }
    }

    /// Value at a sphere point; exact when both map and point are exact.
    pub fn eval(&self, z: &SpherePoint) -> SpherePoint {
        if let (Some((n, d)), true) = (&self.exact, z.is_exact()) {
            return match z {
                SpherePoint::Infinity => {
                    let (dn, dd) = (n.deg_or_zero(), d.deg_or_zero());
                    if n.is_zero() {
                        SpherePoint::Rational(BigRational::zero())
                    } else if dn > dd {
                        SpherePoint::Infinity
                    } else if dn == dd {
                        SpherePoint::Rational(n.leading() / d.leading())
                    } else {
                        SpherePoint::Rational(BigRational::zero())
                    }
                }
                SpherePoint::Rational(r) => {
                    let dv = d.eval(r);
                    if dv.is_zero() {
                        SpherePoint::Infinity
                    } else {
                        SpherePoint::Rational(n.eval(r) / dv)
                    }
                }
                SpherePoint::Complex(_) => unreachable!(),
            };
        }
        match z.to_c64() {
            None => self.eval_at_infinity_c(),
            Some(w) => match self.eval_c(w) {
                Some(v) => SpherePoint::Complex(v),
                None => SpherePoint::Infinity,
            },
        }
    }

    fn eval_at_infinity_c(&self) -> SpherePoint {
        let d = self.degree();
        let (a, b) = (self.num.coeff(d), self.den.coeff(d));
        if b.norm() == 0.0 {
            SpherePoint::Infinity
        } else {
            SpherePoint::Complex(a / b)
        }
    }

    /// Finite value at a finite point, `None` at a pole; uses the chart `1/z` for large `|z|`.
    pub fn eval_c(&self, z: Complex64) -> Option<Complex64> {
        if z.norm() <= 1.0 {
            let d = self.den.eval(&z);
            if d.norm() == 0.0 {
                return None;
            }
            Some(self.num.eval(&z) / d)
        } else {
            let w = z.inv();
            let deg = self.degree();
            let d = self.den.reversed(deg).eval(&w);
            if d.norm() == 0.0 {
                return None;
            }
            Some(self.num.reversed(deg).eval(&w) / d)
        }
    }

    /// Value and derivative at a finite non-pole point.
    pub fn eval_with_derivative(&self, z: Complex64) -> Option<(Complex64, Complex64)> {
        let (n, dn) = self.num.eval_with_derivative(z);
        let (d, dd) = self.den.eval_with_derivative(z);
        if d.norm() == 0.0 {
            return None;
        }
        Some((n / d, (dn * d - n * dd) / (d * d)))
    }

    /// `self o h` at coefficient level.
    pub fn compose(&self, h: &RationalMap) -> RationalMap {
        match (&self.exact, &h.exact) {
            (Some((n, d)), Some((p, q))) => {
                let (a, b) = compose_polys(n, d, p, q, self.degree());
                Self::from_exact(a, b).expect("composition of valid maps")
            }
            _ => {
                let (a, b) = compose_polys(&self.num, &self.den, &h.num, &h.den, self.degree());
                RationalMap { num: a, den: b, exact: None }
            }
        }
    }

    /// `self o self o ... ` (`n >= 1` factors).
    pub fn iterate(&self, n: usize) -> RationalMap {
        let mut g = self.clone();
        for _ in 1..n {
            g = g.compose(self);
        }
        g
    }

    /// Conjugate `m o self o m^{-1}` for a Moebius map `m`.
    pub fn conjugate(&self, m: &RationalMap, m_inv: &RationalMap) -> RationalMap {
        m.compose(&self.compose(m_inv))
    }

    pub fn critical_points(&self) -> Result<Vec<CriticalPoint>> {
        let d = self.degree();
        let mut out = Vec::new();
        if let Some((n, den)) = &self.exact {
            let w = n.derivative().mul(den).sub(&n.mul(&den.derivative()));
            let deg_w = w.deg_or_zero();
            for (s, mult) in w.squarefree() {
                for z in s.to_complex().roots() {
                    let pt = confirm_root(&s, z);
                    out.push(CriticalPoint { point: pt, degree: mult as u32 + 1, factor: Some(s.clone()) });
                }
            }
            let at_inf = (2 * d - 2).saturating_sub(deg_w);
            if at_inf > 0 && !w.is_zero() {
                out.push(CriticalPoint { point: SpherePoint::Infinity, degree: at_inf as u32 + 1, factor: None });
            }
        } else {
            let w = self
                .num
                .derivative()
                .mul(&self.den)
                .sub(&self.num.mul(&self.den.derivative()))
                .cleaned(1e-13);
            let deg_w = w.deg_or_zero();
            let roots = w.roots();
            for &r in &roots {
                let res = w.eval(&r).norm();
                if !res.is_finite() {
                    return Err(RatMapError::RootFinder(res));
                }
            }
            for (z, m) in cluster(&roots, 1e-7) {
                out.push(CriticalPoint { point: SpherePoint::Complex(z), degree: m as u32 + 1, factor: None });
            }
            let at_inf = (2 * d - 2).saturating_sub(deg_w);
            if at_inf > 0 {
                out.push(CriticalPoint { point: SpherePoint::Infinity, degree: at_inf as u32 + 1, factor: None });
            }
        }
        Ok(out)
    }

    /// Critical value, confirmed exactly when the critical point is a root of a rational factor.
    pub fn critical_value(&self, c: &CriticalPoint) -> SpherePoint {
        let v = self.eval(&c.point);
        if v.is_exact() {
            return v;
        }
        if let (Some((n, d)), Some(s)) = (&self.exact, &c.factor) {
            if let Some(cand) = v.snap_candidate() {
                let target = match &cand {
                    SpherePoint::Infinity => Some(d.clone()),
                    SpherePoint::Rational(r) => Some(n.sub(&d.scale(r))),
                    _ => None,
                };
                if let (Some(t), Some(z)) = (target, c.point.to_c64()) {
                    if root_of_common_factor(s, &t, z) {
                        return cand;
                    }
                }
            }
        }
        v
    }

    pub fn forward_orbit(&self, z: &SpherePoint, max_iter: usize) -> Result<Orbit> {
        let mut pts = vec![z.clone()];
        for i in 1..=max_iter {
            let w = self.eval(pts.last().unwrap());
            if let Some(j) = pts.iter().position(|p| p.same(&w)) {
                return Ok(Orbit { points: pts, preperiod: j, period: i - j });
            }
            // exact heights grow geometrically along infinite orbits
            if let SpherePoint::Rational(r) = &w {
                if r.numer().bits() + r.denom().bits() > MAX_ORBIT_BITS {
                    break;
                }
            }
            pts.push(w);
        }
        Err(RatMapError::NotEventuallyPeriodic { point: z.to_string(), max_iter })
    }

    pub fn postcritical_set(&self) -> Result<PostcriticalSet> {
        let crit = self.critical_points()?;
        let mut points: Vec<SpherePoint> = Vec::new();
        let mut certificate = Vec::new();
        for c in &crit {
            let v = self.critical_value(c);
            let orb = self.forward_orbit(&v, MAX_ORBIT)?;
            certificate.push(OrbitCertificate {
                critical_point: c.point.clone(),
                preperiod: orb.preperiod,
                period: orb.period,
            });
            for p in orb.points {
                if !points.iter().any(|q| q.same(&p)) {
                    points.push(p);
                }
            }
        }
        sort_points(&mut points);
        Ok(PostcriticalSet { points, certificate })
    }

    pub fn classify_fatou_julia(&self) -> Result<PostcriticalClassification> {
        let crit = self.critical_points()?;
        let pcs = self.postcritical_set()?;
        let mut entries = Vec::new();
        for p in &pcs.points {
            let orb = self.forward_orbit(p, MAX_ORBIT)?;
            let cycle = &orb.points[orb.preperiod..orb.preperiod + orb.period];
            let fatou = cycle.iter().any(|z| crit.iter().any(|c| c.point.same(z)));
            entries.push(ClassifiedPoint {
                point: p.clone(),
                kind: if fatou { PointKind::Fatou } else { PointKind::Julia },
                preperiod: orb.preperiod,
                period: orb.period,
            });
        }
        Ok(PostcriticalClassification { entries })
    }

    pub fn fixed_points(&self) -> Result<Vec<SpherePoint>> {
        let mut out = Vec::new();
        if let Some((n, d)) = &self.exact {
            let p = n.sub(&d.mul(&QPoly::x()));
            for (s, _) in p.squarefree() {
                for z in s.to_complex().roots() {
                    out.push(confirm_root(&s, z));
                }
            }
        } else {
            let p = self.num.sub(&self.den.mul(&CPoly::x())).cleaned(1e-14);
            for (z, _) in cluster(&p.roots(), 1e-7) {
                out.push(SpherePoint::Complex(z));
            }
        }
        if self.eval(&SpherePoint::Infinity).is_infinity() {
            out.push(SpherePoint::Infinity);
        }
        let mut dedup: Vec<SpherePoint> = Vec::new();
        for z in out {
            if !dedup.iter().any(|w| w.same(&z)) {
                dedup.push(z);
            }
        }
        sort_points(&mut dedup);
        Ok(dedup)
    }

    /// Local degree at `z`, from the order of vanishing of `f - f(z)` in charts.
    pub fn local_degree(&self, z: &SpherePoint) -> u32 {
        let w = self.eval(z);
        let (pre, pre_inv) = chart_to_zero(z);
        let (post, _) = chart_to_zero(&w);
        let g = post.compose(&self.compose(&pre_inv));
        let _ = pre;
        match &g.exact {
            Some((n, _)) => n.low_order() as u32,
            None => {
                let n = g.num.cleaned(1e-9);
                n.low_order().max(1) as u32
            }
        }
    }

    pub fn dynamical_portrait(&self, a: &[SpherePoint]) -> Result<Portrait> {
        let (nodes, degrees) = self.portrait_nodes(a)?;
        let mut edges = Vec::new();
        for (i, z) in nodes.iter().enumerate() {
            let w = self.eval(z);
            let j = nodes
                .iter()
                .position(|n| n.same(&w))
                .ok_or_else(|| RatMapError::NotInvariant(z.to_string(), w.to_string()))?;
            edges.push(PortraitEdge { from: i, to: j, weight: degrees[i] });
        }
        Ok(Portrait {
            kind: PortraitKind::Dynamical,
            sources: nodes.iter().map(|z| z.to_string()).collect(),
            targets: nodes.iter().map(|z| z.to_string()).collect(),
            edges,
        })
    }

    pub fn static_portrait(&self, a: &[SpherePoint]) -> Result<Portrait> {
        let (nodes, degrees) = self.portrait_nodes(a)?;
        let mut targets: Vec<SpherePoint> = a.to_vec();
        sort_points(&mut targets);
        let mut edges = Vec::new();
        for (i, z) in nodes.iter().enumerate() {
            let w = self.eval(z);
            let j = targets
                .iter()
                .position(|n| n.same(&w))
                .ok_or_else(|| RatMapError::NotInvariant(z.to_string(), w.to_string()))?;
            edges.push(PortraitEdge { from: i, to: j, weight: degrees[i] });
        }
        Ok(Portrait {
            kind: PortraitKind::Static,
            sources: nodes.iter().map(|z| z.to_string()).collect(),
            targets: targets.iter().map(|z| z.to_string()).collect(),
            edges,
        })
    }

    fn portrait_nodes(&self, a: &[SpherePoint]) -> Result<(Vec<SpherePoint>, Vec<u32>)> {
        let crit = self.critical_points()?;
        for z in a {
            let w = self.eval(z);
            if !a.iter().any(|x| x.same(&w)) {
                return Err(RatMapError::NotInvariant(z.to_string(), w.to_string()));
            }
        }
        let pcs = self.postcritical_set()?;
        for p in &pcs.points {
            if !a.iter().any(|x| x.same(p)) {
                return Err(RatMapError::PostcriticalUnmarked(p.to_string()));
            }
        }
        let mut nodes: Vec<SpherePoint> = Vec::new();
        for z in crit.iter().map(|c| &c.point).chain(a.iter()) {
            if !nodes.iter().any(|n| n.same(z)) {
                nodes.push(z.clone());
            }
        }
        sort_points(&mut nodes);
        let degrees = nodes
            .iter()
            .map(|z| crit.iter().find(|c| c.point.same(z)).map(|c| c.degree).unwrap_or(1))
            .collect();
        Ok((nodes, degrees))
    }

    /// Orbifold signature `(2,2,2,2)` on `P_f`: `|P_f| = 4`, every critical point
    /// is simple, lies outside `P_f` and maps into it, and every non-critical
    /// preimage of a point of `P_f` is itself in `P_f`.
    pub fn has_lattes_signature(&self) -> Result<bool> {
        let p = self.postcritical_set()?.points;
        if p.len() != 4 {
            return Ok(false);
        }
        let crit = self.critical_points()?;
        for c in &crit {
            if c.degree != 2 || p.iter().any(|x| x.same(&c.point)) {
                return Ok(false);
            }
        }
        let d = self.degree();
        for x in &p {
            let over = crit.iter().filter(|c| self.critical_value(c).same(x)).count();
            let marked_over = p.iter().filter(|y| self.eval(y).same(x)).count();
            if d < 2 * over || d - 2 * over != marked_over {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Some `a` in `A` with `f^{-1}(f(a))` free of critical points and meeting `A` only in `a`.
    pub fn is_statically_reducible(&self, a: &[SpherePoint]) -> Result<Option<SpherePoint>> {
        if a.len() != 4 {
            return Err(RatMapError::BadMarking);
        }
        let crit = self.critical_points()?;
        let cvals: Vec<SpherePoint> = crit.iter().map(|c| self.critical_value(c)).collect();
        for (i, x) in a.iter().enumerate() {
            let fx = self.eval(x);
            if cvals.iter().any(|v| v.same(&fx)) {
                continue;
            }
            let clash = a.iter().enumerate().any(|(j, y)| j != i && self.eval(y).same(&fx));
            if !clash {
                return Ok(Some(x.clone()));
            }
        }
        Ok(None)
    }

    /// `(M, g)` with `f = M o g`, `M(A) = A`, `M^2 = id` and `g(a) = a`.
    pub fn decompose_statically_reducible(&self, a: &[SpherePoint]) -> Result<(RationalMap, RationalMap)> {
        let x = self.is_statically_reducible(a)?.ok_or(RatMapError::NotReducible)?;
        let fx = self.eval(&x);
        if fx.same(&x) {
            return Ok((RationalMap::identity(), self.clone()));
        }
        let m = moebius_transposition(a, &x, &fx)?;
        let g = m.compose(self);
        Ok((m, g))
    }
}

pub const MAX_ORBIT: usize = 64;

/// Exact orbit points taller than this many bits end the search early.
pub const MAX_ORBIT_BITS: u64 = 1 << 14;

fn compose_polys<T: Num + Clone>(n: &Poly<T>, d: &Poly<T>, p: &Poly<T>, q: &Poly<T>, deg: usize) -> (Poly<T>, Poly<T>) {
    let mut a = Poly::zero();
    let mut b = Poly::zero();
    let ppow: Vec<Poly<T>> = (0..=deg).map(|k| p.pow(k)).collect();
    let qpow: Vec<Poly<T>> = (0..=deg).map(|k| q.pow(k)).collect();
    for k in 0..=deg {
        let term = ppow[k].mul(&qpow[deg - k]);
        a = a.add(&term.scale(&n.coeff(k)));
        b = b.add(&term.scale(&d.coeff(k)));
    }
    (a, b)
}

/// Whether `z`, a root of `s`, is a root of `gcd(s, t)` rather than of the cofactor.
fn root_of_common_factor(s: &QPoly, t: &QPoly, z: Complex64) -> bool {
    let g = s.gcd(t);
    if g.deg_or_zero() == 0 {
        return false;
    }
    let rest = s.divrem(&g).0;
    let dist = |p: &QPoly| {
        p.to_complex().roots().iter().map(|r| (r - z).norm()).fold(f64::INFINITY, f64::min)
    };
    dist(&g) < dist(&rest)
}

/// Rational root if it verifies exactly, otherwise the polished float.
fn confirm_root(s: &QPoly, z: Complex64) -> SpherePoint {
    if let Some(SpherePoint::Rational(r)) = SpherePoint::Complex(z).snap_candidate() {
        if s.eval(&r).is_zero() {
            return SpherePoint::Rational(r);
        }
    }
    SpherePoint::Complex(s.to_complex().polish(z))
}

/// Moebius chart sending `z` to 0, with its inverse.
pub fn chart_to_zero(z: &SpherePoint) -> (RationalMap, RationalMap) {
    let one = BigRational::one();
    let zero = BigRational::zero();
    match z {
        SpherePoint::Infinity => {
            let m = RationalMap::moebius_exact(zero.clone(), one.clone(), one.clone(), zero.clone()).unwrap();
            (m.clone(), m)
        }
        SpherePoint::Rational(r) => (
            RationalMap::moebius_exact(one.clone(), -r.clone(), zero.clone(), one.clone()).unwrap(),
            RationalMap::moebius_exact(one.clone(), r.clone(), zero, one).unwrap(),
        ),
        SpherePoint::Complex(c) => {
            let (o, z0) = (Complex64::one(), Complex64::zero());
            (
                RationalMap::moebius_complex(o, -c, z0, o).unwrap(),
                RationalMap::moebius_complex(o, *c, z0, o).unwrap(),
            )
        }
    }
}

/// Deterministic order: infinity last, exact rationals by value, then floats by (re, im).
pub fn sort_points(v: &mut [SpherePoint]) {
    v.sort_by(|a, b| {
        let key = |p: &SpherePoint| match p {
            SpherePoint::Infinity => (2u8, f64::INFINITY, 0.0),
            SpherePoint::Rational(r) => (0u8, poly::rat_to_f64(r), 0.0),
            SpherePoint::Complex(z) => (1u8, z.re, z.im),
        };
        let (ka, kb) = (key(a), key(b));
        ka.0.cmp(&kb.0)
            .then(ka.1.partial_cmp(&kb.1).unwrap_or(std::cmp::Ordering::Equal))
            .then(ka.2.partial_cmp(&kb.2).unwrap_or(std::cmp::Ordering::Equal))
            .then_with(|| match (a, b) {
                (SpherePoint::Rational(x), SpherePoint::Rational(y)) => x.cmp(y),
                _ => std::cmp::Ordering::Equal,
            })
    });
}

#[derive(Clone, Debug)]
pub struct CriticalPoint {
    pub point: SpherePoint,
    pub degree: u32,
    /// Square-free rational factor of the Wronskian containing this root.
    pub factor: Option<QPoly>,
}

#[derive(Clone, Debug)]
pub struct Orbit {
    pub points: Vec<SpherePoint>,
    pub preperiod: usize,
    pub period: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct OrbitCertificate {
    pub critical_point: SpherePoint,
    pub preperiod: usize,
    pub period: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct PostcriticalSet {
    pub points: Vec<SpherePoint>,
    pub certificate: Vec<OrbitCertificate>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PointKind {
    Fatou,
    Julia,
}

impl fmt::Display for PointKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PointKind::Fatou => "Fatou",
            PointKind::Julia => "Julia",
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassifiedPoint {
    pub point: SpherePoint,
    pub kind: PointKind,
    pub preperiod: usize,
    pub period: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct PostcriticalClassification {
    pub entries: Vec<ClassifiedPoint>,
}

impl PostcriticalClassification {
    pub fn kind_of(&self, z: &SpherePoint) -> Option<PointKind> {
        self.entries.iter().find(|e| e.point.same(z)).map(|e| e.kind)
    }

    pub fn fatou(&self) -> Vec<String> {
        self.of_kind(PointKind::Fatou)
    }

    pub fn julia(&self) -> Vec<String> {
        self.of_kind(PointKind::Julia)
    }

    fn of_kind(&self, k: PointKind) -> Vec<String> {
        self.entries.iter().filter(|e| e.kind == k).map(|e| e.point.to_string()).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PortraitKind {
    Dynamical,
    Static,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PortraitEdge {
    pub from: usize,
    pub to: usize,
    pub weight: u32,
}

/// Weighted directed graph on `C_f ∪ A`. Dynamical portraits use one node set;
/// static portraits are bipartite with targets `A`.
#[derive(Clone, Debug, Serialize)]
pub struct Portrait {
    pub kind: PortraitKind,
    pub sources: Vec<String>,
    pub targets: Vec<String>,
    pub edges: Vec<PortraitEdge>,
}

impl Portrait {
    /// Dynamical portrait of a branched cover given only combinatorially, as
    /// `(from, to, local degree)` with one edge out of every node. Nodes not
    /// listed with degree above 1 are taken to be regular. Checks that no fibre
    /// carries more than `degree` preimages and that the local degrees account
    /// for exactly `2 degree - 2` critical points.
    pub fn combinatorial(degree: u32, edges: &[(&str, &str, u32)]) -> Result<Portrait> {
        let bad = |m: String| Err(RatMapError::BadPortrait(m));
        if degree < 2 {
            return bad(format!("degree {degree} < 2"));
        }
        let mut nodes: Vec<String> = edges.iter().flat_map(|e| [e.0.to_string(), e.1.to_string()]).collect();
        nodes.sort();
        nodes.dedup();
        let idx = |l: &str| nodes.iter().position(|n| n == l).expect("label collected");
        let mut out = vec![0usize; nodes.len()];
        let mut fibre = vec![0u32; nodes.len()];
        let mut crit = 0u32;
        let mut es = Vec::new();
        for &(a, b, w) in edges {
            if w == 0 || w > degree {
                return bad(format!("local degree {w} at {a}"));
            }
            out[idx(a)] += 1;
            fibre[idx(b)] += w;
            crit += w - 1;
            es.push(PortraitEdge { from: idx(a), to: idx(b), weight: w });
        }
        if let Some(i) = out.iter().position(|&k| k != 1) {
            return bad(format!("{} has {} images", nodes[i], out[i]));
        }
        if let Some(i) = fibre.iter().position(|&k| k > degree) {
            return bad(format!("{} has {} preimages counted with multiplicity", nodes[i], fibre[i]));
        }
        if crit != 2 * degree - 2 {
            return bad(format!("{crit} critical points, need {}", 2 * degree - 2));
        }
        es.sort_by_key(|e| e.from);
        Ok(Portrait { kind: PortraitKind::Dynamical, sources: nodes.clone(), targets: nodes, edges: es })
    }

    /// Forward orbits of the critical nodes of a dynamical portrait, sorted.
    pub fn postcritical(&self) -> Vec<String> {
        let next = |i: usize| self.edges.iter().find(|e| e.from == i).map(|e| e.to);
        let mut seen = vec![false; self.targets.len()];
        for e in self.edges.iter().filter(|e| e.weight > 1) {
            let mut j = Some(e.to);
            while let Some(k) = j.filter(|&k| !seen[k]) {
                seen[k] = true;
                j = next(k);
            }
        }
        let mut v: Vec<String> = (0..seen.len()).filter(|&i| seen[i]).map(|i| self.targets[i].clone()).collect();
        v.sort();
        v
    }

    /// Edges as `(source label, target label, weight)`, sorted.
    pub fn labeled_edges(&self) -> Vec<(String, String, u32)> {
        let mut v: Vec<_> = self
            .edges
            .iter()
            .map(|e| (self.sources[e.from].clone(), self.targets[e.to].clone(), e.weight))
            .collect();
        v.sort();
        v
    }

    /// Weakly connected components of a static portrait, as edge lists.
    pub fn static_components(&self) -> Vec<Vec<(String, String, u32)>> {
        let ns = self.sources.len();
        let n = ns + self.targets.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut Vec<usize>, x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            p[x] = r;
            r
        }
        for e in &self.edges {
            let (a, b) = (find(&mut parent, e.from), find(&mut parent, ns + e.to));
            parent[a] = b;
        }
        let mut groups: std::collections::BTreeMap<usize, Vec<(String, String, u32)>> = Default::default();
        for e in &self.edges {
            let r = find(&mut parent, e.from);
            groups.entry(r).or_default().push((
                self.sources[e.from].clone(),
                self.targets[e.to].clone(),
                e.weight,
            ));
        }
        let mut out: Vec<_> = groups.into_values().collect();
        for g in out.iter_mut() {
            g.sort();
        }
        out.sort();
        out
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph portrait {\n  rankdir=LR;\n");
        let target_prefix = if self.kind == PortraitKind::Static { "t" } else { "s" };
        for (i, l) in self.sources.iter().enumerate() {
            s.push_str(&format!("  s{i} [label=\"{l}\"];\n"));
        }
        if self.kind == PortraitKind::Static {
            for (i, l) in self.targets.iter().enumerate() {
                s.push_str(&format!("  t{i} [label=\"{l}\"];\n"));
            }
        }
        for e in &self.edges {
            if e.weight > 1 {
                s.push_str(&format!("  s{} -> {}{} [label=\"{}:1\"];\n", e.from, target_prefix, e.to, e.weight));
            } else {
                s.push_str(&format!("  s{} -> {}{};\n", e.from, target_prefix, e.to));
            }
        }
        s.push_str("}\n");
        s
    }
}

/// Moebius map swapping `a <-> b` and the other two points of `A`.
pub fn moebius_transposition(set: &[SpherePoint], a: &SpherePoint, b: &SpherePoint) -> Result<RationalMap> {
    if set.len() != 4 || a.same(b) {
        return Err(RatMapError::NoSuchMoebius);
    }
    if !set.iter().any(|x| x.same(a)) || !set.iter().any(|x| x.same(b)) {
        return Err(RatMapError::NoSuchMoebius);
    }
    let rest: Vec<&SpherePoint> = set.iter().filter(|x| !x.same(a) && !x.same(b)).collect();
    if rest.len() != 2 {
        return Err(RatMapError::NoSuchMoebius);
    }
    let (c, d) = (rest[0], rest[1]);
    let m = moebius_three_points([a, b, c], [b, a, d])?;
    if !m.eval(d).same(c) {
        return Err(RatMapError::NoSuchMoebius);
    }
    Ok(m)
}

/// Moebius map with `z_i -> w_i`.
pub fn moebius_three_points(z: [&SpherePoint; 3], w: [&SpherePoint; 3]) -> Result<RationalMap> {
    let all_exact = z.iter().chain(w.iter()).all(|p| p.is_exact());
    if all_exact {
        let to_opt = |p: &SpherePoint| match p {
            SpherePoint::Rational(r) => Some(r.clone()),
            _ => None,
        };
        let zz = [to_opt(z[0]), to_opt(z[1]), to_opt(z[2])];
        let ww = [to_opt(w[0]), to_opt(w[1]), to_opt(w[2])];
        let m1 = to_standard(&zz).ok_or(RatMapError::NoSuchMoebius)?;
        let m2 = to_standard(&ww).ok_or(RatMapError::NoSuchMoebius)?;
        let m = mat_mul(&mat_inv(&m2), &m1);
        let [a, b, c, d] = m;
        RationalMap::moebius_exact(a, b, c, d)
    } else {
        let zz = [z[0].to_c64(), z[1].to_c64(), z[2].to_c64()];
        let ww = [w[0].to_c64(), w[1].to_c64(), w[2].to_c64()];
        let m1 = to_standard(&zz).ok_or(RatMapError::NoSuchMoebius)?;
        let m2 = to_standard(&ww).ok_or(RatMapError::NoSuchMoebius)?;
        let [a, b, c, d] = mat_mul(&mat_inv(&m2), &m1);
        RationalMap::moebius_complex(a, b, c, d)
    }
}

/// Matrix of the map sending `(z1, z2, z3)` to `(0, 1, inf)`; `None` entries are infinity.
fn to_standard<T: Num + Clone>(z: &[Option<T>; 3]) -> Option<[T; 4]> {
    let (o, zr) = (T::one(), T::zero());
    let m = match (&z[0], &z[1], &z[2]) {
        (None, Some(z2), Some(z3)) => [zr, z2.clone() - z3.clone(), o, zr_neg(z3)],
        (Some(z1), None, Some(z3)) => [o.clone(), zr_neg(z1), o, zr_neg(z3)],
        (Some(z1), Some(z2), None) => [o, zr_neg(z1), zr, z2.clone() - z1.clone()],
        (Some(z1), Some(z2), Some(z3)) => {
            let u = z2.clone() - z3.clone();
            let v = z2.clone() - z1.clone();
            [u.clone(), zr_neg(z1) * u, v.clone(), zr_neg(z3) * v]
        }
        _ => return None,
    };
    let det = m[0].clone() * m[3].clone() - m[1].clone() * m[2].clone();
    if det.is_zero() {
        None
    } else {
        Some(m)
    }
}

fn zr_neg<T: Num + Clone>(x: &T) -> T {
    T::zero() - x.clone()
}

fn mat_mul<T: Num + Clone>(x: &[T; 4], y: &[T; 4]) -> [T; 4] {
    let [a, b, c, d] = x.clone();
    let [e, f, g, h] = y.clone();
    [
        a.clone() * e.clone() + b.clone() * g.clone(),
        a * f.clone() + b * h.clone(),
        c.clone() * e + d.clone() * g,
        c * f + d * h,
    ]
}

fn mat_inv<T: Num + Clone>(x: &[T; 4]) -> [T; 4] {
    let [a, b, c, d] = x.clone();
    [d, zr_neg(&b), zr_neg(&c), a]
}

/// Flexible Lattes family `4z(1-z)(1-k^2 z)/(1-k^2 z^2)^2` from exact `k^2`.
pub fn lattes_sq(k2: &BigRational) -> Result<RationalMap> {
    if k2.is_zero() || k2.is_one() {
        return Err(RatMapError::DegenerateLattes);
    }
    let o = BigRational::one();
    let z0 = BigRational::zero();
    let four = BigRational::from_integer(BigInt::from(4));
    let zz = QPoly::new(vec![z0.clone(), four]);
    let one_minus_z = QPoly::new(vec![o.clone(), -o.clone()]);
    let one_minus_kz = QPoly::new(vec![o.clone(), -k2.clone()]);
    let num = zz.mul(&one_minus_z).mul(&one_minus_kz);
    let base = QPoly::new(vec![o, z0, -k2.clone()]);
    RationalMap::from_exact(num, base.mul(&base))
}

pub fn lattes(k: Complex64) -> Result<RationalMap> {
    if !k.re.is_finite() || !k.im.is_finite() || k.norm() < 1e-12 || (k * k - 1.0).norm() < 1e-12 {
        return Err(RatMapError::DegenerateLattes);
    }
    let k2 = k * k;
    let o = Complex64::one();
    let z0 = Complex64::zero();
    let num = CPoly::new(vec![z0, Complex64::new(4.0, 0.0)])
        .mul(&CPoly::new(vec![o, -o]))
        .mul(&CPoly::new(vec![o, -k2]));
    let base = CPoly::new(vec![o, z0, -k2]);
    RationalMap::from_complex(num.c, base.mul(&base).c)
}

/// The quadratic map `(1-2z)^2`.
pub fn quadratic_example() -> RationalMap {
    RationalMap::from_ratios(&[(1, 1), (-4, 1), (4, 1)], &[(1, 1)]).unwrap()
}

/// The cubic map `-(z-1)^3/(3z+1)^2`.
pub fn cubic_example() -> RationalMap {
    // -(z^3 - 3z^2 + 3z - 1) / (9z^2 + 6z + 1)
    RationalMap::from_ratios(&[(1, 1), (-3, 1), (3, 1), (-1, 1)], &[(1, 1), (6, 1), (9, 1)]).unwrap()
}

/// Marked set `{0, 1, inf, a}`.
pub fn standard_marking(a: SpherePoint) -> Vec<SpherePoint> {
    vec![SpherePoint::int(0), SpherePoint::int(1), SpherePoint::Infinity, a]
}

/// A rational map with a forward-invariant marked set of four points.
#[derive(Clone, Debug)]
pub struct MarkedMap {
    pub f: RationalMap,
    pub marked: Vec<SpherePoint>,
    pub postcritical: Vec<SpherePoint>,
    /// The marked point outside `{0, 1, inf}`.
    pub free_point: Option<SpherePoint>,
}

impl MarkedMap {
    pub fn new(f: RationalMap, marked: Vec<SpherePoint>) -> Result<MarkedMap> {
        if marked.len() != 4 {
            return Err(RatMapError::BadMarking);
        }
        for i in 0..4 {
            for j in 0..i {
                if marked[i].same(&marked[j]) {
                    return Err(RatMapError::BadMarking);
                }
            }
        }
        // Not being PCF is the more basic failure, so report it first.
        let pcs = f.postcritical_set()?;
        for z in &marked {
            let w = f.eval(z);
            if !marked.iter().any(|x| x.same(&w)) {
                return Err(RatMapError::NotInvariant(z.to_string(), w.to_string()));
            }
        }
        for p in &pcs.points {
            if !marked.iter().any(|x| x.same(p)) {
                return Err(RatMapError::PostcriticalUnmarked(p.to_string()));
            }
        }
        let std3 = [SpherePoint::int(0), SpherePoint::int(1), SpherePoint::Infinity];
        let normalized = std3.iter().all(|s| marked.iter().any(|x| x.same(s)));
        let free_point = if normalized {
            marked.iter().find(|x| !std3.iter().any(|s| s.same(x))).cloned()
        } else {
            None
        };
        Ok(MarkedMap { f, marked, postcritical: pcs.points, free_point })
    }
}
