//! Brute-force curve pullback: draw the curve of a cusp on the sphere, track
//! all preimages around it, split them into components by monodromy, and
//! name each component's class by lifting it to the torus.

use num_bigint::BigInt;
use num_complex::Complex64 as C;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::cover::track::{lerp_sphere, PreimageTracker, SPoint};
use crate::cover::{basepoint_for, torus_build, CoverError, TorusClass, TorusCover};
use crate::exact_farey::{cusp_normalize, Cusp};
use crate::pullback::{admissible_multipliers, CuspFate, SigmaEvaluator};
use crate::ratmap::{RationalMap, SpherePoint};

#[derive(Debug, Error)]
pub enum OracleError {
    #[error(transparent)]
    Cover(#[from] CoverError),
    #[error("curve comes within {0:e} of a marked point")]
    Clearance(f64),
    #[error("monodromy is not a permutation of the preimages")]
    BadMonodromy,
    #[error("essential components in different classes: {0:?}")]
    MixedClasses(Vec<String>),
    #[error("gave up after {attempts} perturbations: {last}")]
    RetriesExhausted { attempts: usize, last: String },
    #[error("calibration found {0} conventions in full agreement")]
    Calibration(usize),
    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, OracleError>;

/// How a cusp `p/q` names a torus homology class (up to sign).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Convention {
    /// `p/q ↦ (p, q)`
    PQ,
    /// `p/q ↦ (p, -q)`
    PNegQ,
    /// `p/q ↦ (q, p)`
    QP,
    /// `p/q ↦ (q, -p)`
    QNegP,
}

/// The convention found by `calibrate` (quadratic example, tie broken by the
/// cubic example at a non-real marked point), frozen.
pub const CALIBRATED: Convention = Convention::PNegQ;

impl Convention {
    /// Eight sign/transpose candidates collapse to four once classes are taken up to sign.
    pub const ALL: [Convention; 4] = [Convention::PQ, Convention::PNegQ, Convention::QP, Convention::QNegP];

    pub fn vector(self, r: Cusp) -> (i64, i64) {
        let (p, q) = (r.p(), r.q());
        match self {
            Convention::PQ => (p, q),
            Convention::PNegQ => (p, -q),
            Convention::QP => (q, p),
            Convention::QNegP => (q, -p),
        }
    }

    pub fn cusp_of(self, m: i64, n: i64) -> Option<Cusp> {
        let g = m.gcd(&n);
        if g == 0 {
            return None;
        }
        let (m, n) = (m / g, n / g);
        match self {
            Convention::PQ => cusp_normalize(m, n),
            Convention::PNegQ => cusp_normalize(m, -n),
            Convention::QP => cusp_normalize(n, m),
            Convention::QNegP => cusp_normalize(-n, m),
        }
        .ok()
    }
}

/// Closed sampled curve on the sphere (`points[0] == points[last]`).
#[derive(Clone, Debug)]
pub struct GeometricCurve {
    pub points: Vec<SPoint>,
    /// Smallest chordal distance to a marked point.
    pub clearance: f64,
    /// Offset of the torus line in the complementary direction.
    pub offset: f64,
}

#[derive(Clone, Debug)]
pub struct PullbackComponent {
    pub curve: GeometricCurve,
    pub degree: usize,
}

fn marked_spoints(a: C) -> [SPoint; 4] {
    [SPoint::finite(C::new(0.0, 0.0)), SPoint::finite(C::new(1.0, 0.0)), SPoint::infinity(), SPoint::finite(a)]
}

fn clearance_of(points: &[SPoint], a: C) -> f64 {
    let m = marked_spoints(a);
    points.iter().flat_map(|p| m.iter().map(move |q| p.chordal(q))).fold(f64::INFINITY, f64::min)
}

/// Image under the torus cover of the line `c·w + s·v`, `s ∈ [0, 1]`, where
/// `v` is the class of `r` and `(v, w)` is a lattice basis.
pub fn slope_curve(t: &TorusCover, r: Cusp, samples: usize, convention: Convention, offset: f64) -> Result<GeometricCurve> {
    if samples < 256 {
        return Err(OracleError::Precondition(format!("need at least 256 samples, got {samples}")));
    }
    let (m, n) = convention.vector(r);
    // m·n' − n·m' = 1
    let e = m.extended_gcd(&n);
    let (mp, np) = (-e.y * e.gcd.signum(), e.x * e.gcd.signum());
    let v = C::new(m as f64, 0.0) + t.tau0 * n as f64;
    let w = C::new(mp as f64, 0.0) + t.tau0 * np as f64;
    let z0 = w * offset;
    let mut points: Vec<SPoint> = (0..samples).map(|k| t.point_map(z0 + v * (k as f64 / samples as f64))).collect();
    points.push(points[0]);
    let clearance = clearance_of(&points, t.a);
    Ok(GeometricCurve { points, clearance, offset })
}

/// Track every preimage once around `gamma`; monodromy cycles are the components.
pub fn pullback_components(tracker: &PreimageTracker, gamma: &GeometricCurve) -> Result<Vec<PullbackComponent>> {
    let pts = &gamma.points;
    let nseg = pts.len() - 1;
    let curve = |s: f64| {
        let k = (s.floor() as usize).min(nseg - 1);
        lerp_sphere(pts[k], pts[k + 1], s - k as f64)
    };
    let start = tracker.all_preimages(pts[0]);
    let d = start.len();
    for i in 0..d {
        for j in 0..i {
            if start[i].chordal(&start[j]) < 1e-9 {
                return Err(OracleError::Clearance(gamma.clearance));
            }
        }
    }
    let tr = tracker.track(&curve, 0.0, nseg as f64, start.clone(), nseg)?;
    let end = tr.points.last().unwrap();
    let mut perm = vec![usize::MAX; d];
    for i in 0..d {
        let (j, dist) = (0..d)
            .map(|j| (j, end[i].chordal(&start[j])))
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .unwrap();
        if dist > 1e-7 {
            return Err(OracleError::BadMonodromy);
        }
        perm[i] = j;
    }
    let mut seen = vec![false; d];
    for &j in &perm {
        if seen[j] {
            return Err(OracleError::BadMonodromy);
        }
        seen[j] = true;
    }
    let mut done = vec![false; d];
    let mut comps = Vec::new();
    for i0 in 0..d {
        if done[i0] {
            continue;
        }
        let mut cyc = vec![i0];
        done[i0] = true;
        let mut i = perm[i0];
        while i != i0 {
            done[i] = true;
            cyc.push(i);
            i = perm[i];
        }
        let mut points = Vec::with_capacity(cyc.len() * tr.points.len());
        for &b in &cyc {
            points.extend(tr.points[..tr.points.len() - 1].iter().map(|row| row[b]));
        }
        points.push(points[0]);
        comps.push(PullbackComponent {
            curve: GeometricCurve { points, clearance: f64::NAN, offset: gamma.offset },
            degree: cyc.len(),
        });
    }
    Ok(comps)
}

/// Peripheral, or the cusp named by the component's torus homology.
pub fn classify_component(t: &TorusCover, c: &PullbackComponent, convention: Convention) -> Result<CuspFate> {
    match t.lift_curve(&c.curve.points)? {
        TorusClass::Peripheral => Ok(CuspFate::Peripheral),
        TorusClass::Homology(m, n) => Ok(convention
            .cusp_of(m, n)
            .map(CuspFate::Essential)
            .unwrap_or(CuspFate::Peripheral)),
    }
}

/// Outcome of one oracle pullback.
#[derive(Clone, Debug)]
pub struct OracleResult {
    pub cusp: Cusp,
    pub fate: CuspFate,
    pub multiplier: BigRational,
    /// `(degree, class)` per component, in monodromy order.
    pub components: Vec<(usize, CuspFate)>,
    pub attempts: usize,
    pub offset: f64,
}

impl OracleResult {
    pub fn degree_sum(&self) -> usize {
        self.components.iter().map(|c| c.0).sum()
    }
}

#[derive(Clone, Debug)]
pub struct Oracle {
    pub f: RationalMap,
    pub torus: TorusCover,
    pub convention: Convention,
    pub seed: u64,
    pub samples: usize,
    tracker: PreimageTracker,
}

impl Oracle {
    /// Oracle for `f` with marked set `{0, 1, ∞, a}`.
    pub fn new(f: &RationalMap, a: &SpherePoint, convention: Convention, seed: u64) -> Result<Oracle> {
        let ac = a.to_c64().ok_or_else(|| OracleError::Precondition("a must be finite".into()))?;
        let tau0 = basepoint_for(ac)?;
        Ok(Oracle {
            f: f.clone(),
            torus: torus_build(tau0)?,
            convention,
            seed,
            samples: 256,
            tracker: PreimageTracker::new(f),
        })
    }

    pub fn with_samples(mut self, n: usize) -> Self {
        self.samples = n;
        self
    }

    pub fn degree(&self) -> usize {
        self.f.degree()
    }

    fn samples_for(&self, r: Cusp) -> usize {
        let (m, n) = self.convention.vector(r);
        let len = (C::new(m as f64, 0.0) + self.torus.tau0 * n as f64).norm();
        self.samples.max((self.samples as f64 * len / 2.0).ceil() as usize)
    }

    fn attempt(&self, r: Cusp, offset: f64) -> Result<OracleResult> {
        let gamma = slope_curve(&self.torus, r, self.samples_for(r), self.convention, offset)?;
        if gamma.clearance < 1e-5 {
            return Err(OracleError::Clearance(gamma.clearance));
        }
        let comps = pullback_components(&self.tracker, &gamma)?;
        let mut classes = Vec::new();
        for c in &comps {
            classes.push((c.degree, classify_component(&self.torus, c, self.convention)?));
        }
        let mut fate = CuspFate::Peripheral;
        let mut multiplier = BigRational::zero();
        for (d, cl) in &classes {
            if let CuspFate::Essential(c) = cl {
                if let CuspFate::Essential(prev) = &fate {
                    if prev != c {
                        let names = classes.iter().map(|x| x.1.label()).collect();
                        return Err(OracleError::MixedClasses(names));
                    }
                }
                fate = CuspFate::Essential(*c);
                multiplier += BigRational::new(BigInt::from(1), BigInt::from(*d as i64));
            }
        }
        Ok(OracleResult { cusp: r, fate, multiplier, components: classes, attempts: 0, offset })
    }

    /// Oracle pullback of the curve of `r`, perturbing the curve within its
    /// class (at most five times) when tracking fails.
    pub fn analyze(&self, r: Cusp) -> Result<OracleResult> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ (r.p() as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (r.q() as u64).rotate_left(29));
        let mut last = String::new();
        for k in 0..=5 {
            let offset = if k == 0 { 0.25 } else { 0.25 + rng.random_range(-0.12..0.12) };
            match self.attempt(r, offset) {
                Ok(mut res) => {
                    res.attempts = k + 1;
                    return Ok(res);
                }
                Err(e @ OracleError::MixedClasses(_)) => return Err(e),
                Err(e) => last = e.to_string(),
            }
        }
        Err(OracleError::RetriesExhausted { attempts: 6, last })
    }

    pub fn cusp_pullback_oracle(&self, r: Cusp) -> Result<CuspFate> {
        Ok(self.analyze(r)?.fate)
    }

    pub fn multiplier_oracle(&self, r: Cusp) -> Result<BigRational> {
        Ok(self.analyze(r)?.multiplier)
    }

    pub fn is_admissible(&self, m: &BigRational) -> bool {
        m.is_zero() || admissible_multipliers(self.degree()).contains(m)
    }
}

/// Cusps used to pin the cusp-to-curve convention.
pub fn calibration_cusps() -> Vec<Cusp> {
    ["0", "1", "inf", "1/2", "-1/2", "2", "-2"].iter().map(|s| s.parse().unwrap()).collect()
}

/// Conventions whose oracle fates match the analytic engine on `calibration_cusps`.
pub fn agreeing_conventions(ev: &SigmaEvaluator, seed: u64) -> Result<Vec<Convention>> {
    let analytic: Vec<CuspFate> = calibration_cusps().iter().map(|&r| ev.fate(r)).collect();
    let mut hits = Vec::new();
    for conv in Convention::ALL {
        let o = Oracle::new(&ev.f, &ev.a, conv, seed)?;
        let ok = calibration_cusps()
            .iter()
            .zip(&analytic)
            .all(|(&r, a)| a.is_decided() && o.cusp_pullback_oracle(r).map(|f| &f == a).unwrap_or(false));
        if ok {
            hits.push(conv);
        }
    }
    Ok(hits)
}

#[derive(Clone, Debug, Serialize)]
pub struct Calibration {
    /// Conventions agreeing on the primary evaluator.
    pub primary: Vec<Convention>,
    /// Survivors after each tie-breaking evaluator.
    pub rounds: Vec<Vec<Convention>>,
    pub chosen: Convention,
}

/// Calibrate on `primary`; when several conventions survive, keep only those
/// that also agree on each of `tie_breakers` in turn. A map with real
/// coefficients and a real marked point commutes with conjugation, which
/// exchanges `(p, q)` and `(p, -q)`, so such maps cannot separate that pair.
pub fn calibrate(primary: &SigmaEvaluator, tie_breakers: &[&SigmaEvaluator], seed: u64) -> Result<Calibration> {
    let first = agreeing_conventions(primary, seed)?;
    let mut alive = first.clone();
    let mut rounds = Vec::new();
    for ev in tie_breakers {
        if alive.len() <= 1 {
            break;
        }
        let hits = agreeing_conventions(ev, seed)?;
        alive.retain(|c| hits.contains(c));
        rounds.push(alive.clone());
    }
    if alive.len() == 1 {
        Ok(Calibration { primary: first, rounds, chosen: alive[0] })
    } else {
        Err(OracleError::Calibration(alive.len()))
    }
}

/// Quadratic example with `a = 1/4`, and the cubic example at its non-real fixed point.
pub fn calibration_evaluators() -> std::result::Result<(SigmaEvaluator, SigmaEvaluator), crate::pullback::PullbackError> {
    use crate::ratmap::{cubic_example, quadratic_example, standard_marking};
    let q = crate::pullback::build_evaluator(&quadratic_example(), &standard_marking(SpherePoint::rat(1, 4)))?;
    let a = SpherePoint::Complex(C::new(-0.25, 7f64.sqrt() / 4.0));
    let c = crate::pullback::build_evaluator(&cubic_example(), &standard_marking(a))?;
    Ok((q, c))
}

/// Number of proper crossings between two closed polylines, counted in a
/// chart where both are finite.
pub fn transverse_crossings(a: &GeometricCurve, b: &GeometricCurve) -> usize {
    let finite = |c: &GeometricCurve, inv: bool| -> Option<Vec<C>> {
        c.points
            .iter()
            .map(|p| {
                let z = p.to_option()?;
                let z = if inv { if z.norm() == 0.0 { return None } else { 1.0 / z } } else { z };
                if z.norm() < 1e6 { Some(z) } else { None }
            })
            .collect()
    };
    let (pa, pb) = match (finite(a, false), finite(b, false)) {
        (Some(x), Some(y)) => (x, y),
        _ => match (finite(a, true), finite(b, true)) {
            (Some(x), Some(y)) => (x, y),
            _ => return 0,
        },
    };
    let cross = |u: C, v: C| u.re * v.im - u.im * v.re;
    let mut count = 0;
    for i in 0..pa.len() - 1 {
        for j in 0..pb.len() - 1 {
            let (p, r) = (pa[i], pa[i + 1] - pa[i]);
            let (q, s) = (pb[j], pb[j + 1] - pb[j]);
            let den = cross(r, s);
            if den == 0.0 {
                continue;
            }
            let t = cross(q - p, s) / den;
            let u = cross(q - p, r) / den;
            if (0.0..1.0).contains(&t) && (0.0..1.0).contains(&u) {
                count += 1;
            }
        }
    }
    count
}

/// One row of the analytic-versus-oracle comparison.
#[derive(Clone, Debug, Serialize)]
pub struct ComparisonRow {
    pub cusp: String,
    pub analytic_fate: String,
    pub oracle_fate: String,
    pub analytic_multiplier: String,
    pub oracle_multiplier: String,
    pub agree: bool,
}

pub fn comparison_csv(rows: &[ComparisonRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf8 csv")
}
