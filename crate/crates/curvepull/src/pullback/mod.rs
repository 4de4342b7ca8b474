//! The pullback map σ on the half-plane, its boundary behaviour at cusps,
//! Thurston multipliers from horoball scaling, cusp orbits and attractors.

pub mod walk;

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_complex::Complex64 as C;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::cover::{basepoint_for, lambda, CoverError, Framed, I};
use crate::exact_farey::{cusp_identify, cusps_up_to_height, gamma2_class, Cusp, ExactPoint, ModularElement, PunctureLabel};
use crate::fmt17;
use crate::ratmap::{moebius_three_points, MarkedMap, PointKind, PostcriticalClassification, RatMapError, RationalMap, SpherePoint};
use walk::{geodesic, Continuation, State};

#[derive(Debug, Error)]
pub enum PullbackError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Map(#[from] RatMapError),
    #[error(transparent)]
    Cover(#[from] CoverError),
    #[error("σ is constant for this marking")]
    Constant,
    #[error("cusp {0} has no essential pullback decided ({1})")]
    NotEssential(Cusp, String),
    #[error("multiplier estimate {estimate} is within 0.05 of several admissible values: {candidates:?}")]
    SnapAmbiguous { estimate: f64, candidates: Vec<String> },
    #[error("multiplier estimate {estimate} is not within 0.05 of any admissible value")]
    NoAdmissible { estimate: f64 },
}

pub type Result<T> = std::result::Result<T, PullbackError>;

/// How the input map was replaced before building the evaluator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Substitution {
    None,
    /// Conjugated so that the unmarked point of `{0,1,∞}` becomes the free point.
    Relabel,
    SecondIterate,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CuspSettings {
    pub t: f64,
    pub depth: usize,
}

impl Default for CuspSettings {
    fn default() -> Self {
        CuspSettings { t: 0.5, depth: 12 }
    }
}

#[derive(Clone, Debug)]
pub struct SigmaEvaluator {
    /// The map actually pulled back (after any substitution).
    pub f: RationalMap,
    pub marked: Vec<SpherePoint>,
    pub a: SpherePoint,
    pub tau0: C,
    pub constant: bool,
    pub substitution: Substitution,
    pub classification: PostcriticalClassification,
    pub postcritical: Vec<SpherePoint>,
    pub settings: CuspSettings,
    engine: Option<Continuation>,
}

fn std3() -> [SpherePoint; 3] {
    [SpherePoint::int(0), SpherePoint::int(1), SpherePoint::Infinity]
}

fn in_b(z: &SpherePoint) -> bool {
    std3().iter().any(|s| s.same(z))
}

pub fn build_evaluator(f: &RationalMap, marked: &[SpherePoint]) -> Result<SigmaEvaluator> {
    let pre = |e: RatMapError| PullbackError::Precondition(e.to_string());
    let mm = MarkedMap::new(f.clone(), marked.to_vec()).map_err(pre)?;
    let a = mm
        .free_point
        .clone()
        .ok_or_else(|| PullbackError::Precondition("marked set must be {0, 1, inf, a}".into()))?;
    if mm.postcritical.iter().any(|p| !in_b(p)) {
        return Err(PullbackError::Precondition("postcritical set must lie in {0, 1, inf}".into()));
    }
    let b_escapes = std3().iter().any(|z| !in_b(&f.eval(z)));
    if mm.postcritical.len() == 2 && b_escapes {
        let b = std3().into_iter().find(|z| !mm.postcritical.iter().any(|p| p.same(z))).unwrap();
        let fa = f.eval(&a);
        let (g, new_marked, sub) = if fa.same(&a) {
            let (p1, p2) = (&mm.postcritical[0], &mm.postcritical[1]);
            let m = moebius_three_points([p1, p2, &a], [&std3()[0], &std3()[1], &std3()[2]]).map_err(pre)?;
            let m_inv = moebius_three_points([&std3()[0], &std3()[1], &std3()[2]], [p1, p2, &a]).map_err(pre)?;
            let g = m.compose(f).compose(&m_inv);
            let mut nm = std3().to_vec();
            nm.push(m.eval(&b));
            (g, nm, Substitution::Relabel)
        } else {
            (f.compose(f), marked.to_vec(), Substitution::SecondIterate)
        };
        let mut ev = build_plain(&g, &new_marked)?;
        ev.substitution = sub;
        return Ok(ev);
    }
    build_plain(f, marked)
}

fn build_plain(f: &RationalMap, marked: &[SpherePoint]) -> Result<SigmaEvaluator> {
    let mm = MarkedMap::new(f.clone(), marked.to_vec())?;
    let a = mm.free_point.clone().ok_or_else(|| PullbackError::Precondition("marked set must be {0, 1, inf, a}".into()))?;
    let fa = f.eval(&a);
    let constant = in_b(&fa);
    if !constant && !fa.same(&a) {
        return Err(PullbackError::Precondition(format!("f(a) = {fa} is neither a nor in {{0, 1, inf}}")));
    }
    let ac = a.to_c64().ok_or_else(|| PullbackError::Precondition("a must be finite".into()))?;
    let tau0 = basepoint_for(ac)?;
    let l0 = lambda(tau0)?.unwrap_or(C::new(f64::INFINITY, 0.0));
    if (l0 - ac).norm() > 1e-10 {
        return Err(CoverError::NoConvergence { iterations: 0, residual: (l0 - ac).norm() }.into());
    }
    let classification = f.classify_fatou_julia()?;
    let engine = if constant { None } else { Some(Continuation::new(f)) };
    Ok(SigmaEvaluator {
        f: f.clone(),
        marked: marked.to_vec(),
        a,
        tau0,
        constant,
        substitution: Substitution::None,
        classification,
        postcritical: mm.postcritical,
        settings: CuspSettings::default(),
        engine,
    })
}

/// Where σ sends a cusp.
#[derive(Clone, Debug, PartialEq)]
pub enum CuspFate {
    Essential(Cusp),
    Peripheral,
    Undecided(Diagnostics),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostics {
    pub reason: String,
    /// Deepest image, when one was computed.
    pub deepest: Option<C>,
    pub residual: f64,
}

impl CuspFate {
    pub fn is_decided(&self) -> bool {
        !matches!(self, CuspFate::Undecided(_))
    }

    pub fn label(&self) -> String {
        match self {
            CuspFate::Essential(c) => c.to_string(),
            CuspFate::Peripheral => "peripheral".into(),
            CuspFate::Undecided(_) => "undecided".into(),
        }
    }
}

impl Serialize for CuspFate {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(None)?;
        match self {
            CuspFate::Essential(c) => {
                m.serialize_entry("fate", "essential")?;
                m.serialize_entry("target", c)?;
            }
            CuspFate::Peripheral => m.serialize_entry("fate", "peripheral")?,
            CuspFate::Undecided(d) => {
                m.serialize_entry("fate", "undecided")?;
                m.serialize_entry("reason", &d.reason)?;
                if let Some(z) = d.deepest {
                    m.serialize_entry("deepest", &[fmt17(z.re), fmt17(z.im)])?;
                }
                m.serialize_entry("residual", &fmt17(d.residual))?;
            }
        }
        m.end()
    }
}

/// Image of the approach point at depth `n`.
#[derive(Clone, Debug)]
pub struct DepthImage {
    pub n: usize,
    /// Horoball parameter of the source point: it lies on the boundary of `B_{t_n}(r)`.
    pub t_n: f64,
    pub source: Framed,
    pub image: Framed,
}

#[derive(Clone, Debug)]
pub struct CuspTrace {
    pub cusp: Cusp,
    pub t: f64,
    pub images: Vec<DepthImage>,
}

#[derive(Clone, Debug)]
pub struct CuspAnalysis {
    pub fate: CuspFate,
    /// Raw `1/δ` estimate when essential.
    pub estimate: Option<f64>,
    pub trace: Option<CuspTrace>,
}

/// All `Σ 1/d_j` over multisets of positive integers with `Σ d_j ≤ deg`.
pub fn admissible_multipliers(deg: usize) -> Vec<BigRational> {
    fn rec(rest: usize, max_part: usize, acc: BigRational, nonempty: bool, out: &mut BTreeSet<BigRational>) {
        if nonempty {
            out.insert(acc.clone());
        }
        for d in 1..=max_part.min(rest) {
            let next = &acc + BigRational::new(BigInt::from(1), BigInt::from(d));
            rec(rest - d, d, next, true, out);
        }
    }
    let mut out = BTreeSet::new();
    rec(deg, deg, BigRational::zero(), false, &mut out);
    out.into_iter().collect()
}

/// The unique admissible value within 0.05 of `estimate`.
pub fn snap_multiplier(estimate: f64, deg: usize) -> Result<BigRational> {
    let near: Vec<BigRational> = admissible_multipliers(deg)
        .into_iter()
        .filter(|v| (v.to_f64().unwrap() - estimate).abs() < 0.05)
        .collect();
    match near.len() {
        0 => Err(PullbackError::NoAdmissible { estimate }),
        1 => Ok(near.into_iter().next().unwrap()),
        _ => Err(PullbackError::SnapAmbiguous { estimate, candidates: near.iter().map(|v| v.to_string()).collect() }),
    }
}

/// Intercept of the least-squares line through `(x_i, y_i)`.
fn intercept(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    if pts.len() == 1 {
        return pts[0].1;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return my;
    }
    my - sxy / sxx * mx
}

fn plain_region(z: C, t: &BigRational) -> Option<Option<Cusp>> {
    if !(z.im > 0.0) || !z.re.is_finite() || !z.im.is_finite() {
        return None;
    }
    let p = ExactPoint::from_f64(z.re, z.im)?;
    Some(cusp_identify(&p, t))
}

impl SigmaEvaluator {
    pub fn with_settings(mut self, s: CuspSettings) -> Self {
        self.settings = s;
        self
    }

    pub fn degree(&self) -> usize {
        self.f.degree()
    }

    fn engine(&self) -> Result<&Continuation> {
        self.engine.as_ref().ok_or(PullbackError::Constant)
    }

    fn a_c(&self) -> C {
        self.a.to_c64().unwrap()
    }

    fn start(&self) -> Result<State> {
        Ok(self.engine()?.start(Framed::from_plain(self.tau0)?, self.a_c()))
    }

    /// Continuation state at `tau`, reached along the geodesic from `τ₀`.
    pub fn sigma_state(&self, tau: C) -> Result<State> {
        let eng = self.engine()?;
        let st = self.start()?;
        Framed::from_plain(tau)?;
        let (path, len) = geodesic(self.tau0, tau);
        let p = |s: f64| Framed::from_plain(path(s)).expect("geodesic between half-plane points");
        Ok(eng.follow(st, &p, len, &[])?.0)
    }

    pub fn sigma_eval(&self, tau: C) -> Result<C> {
        Ok(self.sigma_state(tau)?.lift.plain())
    }

    /// `|f(λ(σ(τ))) − λ(τ)|`, computed from the returned point alone.
    pub fn semiconjugacy_residual(&self, tau: C) -> Result<f64> {
        let s = self.sigma_eval(tau)?;
        let ls = lambda(s)?.ok_or(CoverError::PrecisionLoss(s.im))?;
        let lt = lambda(tau)?.ok_or(CoverError::PrecisionLoss(tau.im))?;
        let v = self.f.eval_c(ls).unwrap_or(C::new(f64::INFINITY, 0.0));
        Ok((v - lt).norm())
    }

    /// Images of `τ_n = r + i·4^{-n}·t/q²` (or `i·4^n/t` at infinity), `n = 1..depth`.
    pub fn cusp_trace(&self, r: Cusp, t: f64, depth: usize) -> Result<CuspTrace> {
        if !(t > 0.0 && t < 1.0) {
            return Err(PullbackError::Precondition(format!("horoball parameter t = {t} must lie in (0, 1)")));
        }
        let eng = self.engine()?;
        let st = self.start()?;
        let g = ModularElement::frame_of(r);
        let (xr, entry) = if r.is_infinity() {
            (0.0, I)
        } else {
            let q = r.q() as f64;
            (-(g.d as f64) / g.c as f64, C::new(r.to_f64(), 1.0 / (q * q)))
        };
        let (path, len) = geodesic(self.tau0, entry);
        let p1 = |s: f64| Framed::from_plain(path(s)).expect("geodesic between half-plane points");
        let (mut st, _) = eng.follow(st, &p1, len, &[])?;
        st.src = Framed::new(g, C::new(xr, 1.0));
        let stops: Vec<f64> = (1..=depth).map(|n| (4f64.powi(n as i32) / t).ln()).collect();
        let p2 = |u: f64| Framed::new(g, C::new(xr, u.exp()));
        let (_, rec) = eng.follow(st, &p2, *stops.last().unwrap_or(&0.0), &stops)?;
        let images = rec
            .iter()
            .enumerate()
            .map(|(i, s)| DepthImage { n: i + 1, t_n: t * 4f64.powi(-(i as i32 + 1)), source: s.src, image: s.lift })
            .collect();
        Ok(CuspTrace { cusp: r, t, images })
    }

    /// Fate from the last three depths, with an exact cusp identification of
    /// the plain image run beside the framed one.
    pub fn classify_trace(&self, tr: &CuspTrace) -> (CuspFate, Option<f64>) {
        let und = |reason: &str, deepest: Option<C>, residual: f64| {
            CuspFate::Undecided(Diagnostics { reason: reason.into(), deepest, residual })
        };
        let n = tr.images.len();
        if n < 3 {
            return (und("fewer than three depths", tr.images.last().map(|d| d.image.plain()), f64::NAN), None);
        }
        let last = &tr.images[n - 3..];
        let deepest = last[2].image.plain();
        let t_rat = BigRational::from_float(tr.t).unwrap();
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        let framed: Vec<Option<Cusp>> = last.iter().map(|d| d.image.cusp_region(tr.t)).collect();
        let exact: Vec<Option<Option<Cusp>>> = last.iter().map(|d| plain_region(d.image.plain(), &t_rat)).collect();
        for (fr, ex) in framed.iter().zip(&exact) {
            if let Some(ex) = ex {
                if ex != fr {
                    return (und("framed and exact cusp identification disagree", Some(deepest), f64::NAN), None);
                }
            }
        }
        if let Some(r2) = framed[0] {
            if framed.iter().all(|c| *c == Some(r2)) {
                let pts: Vec<(f64, f64)> = tr
                    .images
                    .iter()
                    .filter(|d| d.image.cusp_region(tr.t) == Some(r2))
                    .map(|d| (d.t_n, 1.0 / d.image.reduced_height() / d.t_n))
                    .collect();
                // shallow depths carry non-linear corrections; fit the deepest four
                let delta = intercept(&pts[pts.len().saturating_sub(4)..]);
                return (CuspFate::Essential(r2), Some(1.0 / delta));
            }
            return (und("images change cusp between depths", Some(deepest), f64::NAN), None);
        }
        let outside = last.iter().all(|d| {
            d.image.cusp_region(0.5).is_none() && plain_region(d.image.plain(), &half).map_or(true, |c| c.is_none())
        });
        let moves = [last[0].image.distance(&last[1].image), last[1].image.distance(&last[2].image)];
        let worst = moves[0].max(moves[1]);
        if outside && worst < 1e-6 {
            return (CuspFate::Peripheral, None);
        }
        (und("images neither settle in a horoball nor converge", Some(deepest), worst), None)
    }

    pub fn analyze_cusp(&self, r: Cusp, t: f64, depth: usize) -> CuspAnalysis {
        if self.constant {
            return CuspAnalysis { fate: CuspFate::Peripheral, estimate: None, trace: None };
        }
        match self.cusp_trace(r, t, depth) {
            Ok(tr) => {
                let (fate, estimate) = self.classify_trace(&tr);
                CuspAnalysis { fate, estimate, trace: Some(tr) }
            }
            Err(e) => CuspAnalysis {
                fate: CuspFate::Undecided(Diagnostics { reason: e.to_string(), deepest: None, residual: f64::NAN }),
                estimate: None,
                trace: None,
            },
        }
    }

    pub fn cusp_pullback(&self, r: Cusp, t: f64, depth: usize) -> CuspFate {
        self.analyze_cusp(r, t, depth).fate
    }

    /// `cusp_pullback` with the evaluator's own settings.
    pub fn fate(&self, r: Cusp) -> CuspFate {
        self.cusp_pullback(r, self.settings.t, self.settings.depth)
    }

    /// Thurston multiplier `1/δ`, snapped; `0` for a peripheral pullback.
    pub fn multiplier_from_horoballs(&self, r: Cusp) -> Result<BigRational> {
        let an = self.analyze_cusp(r, self.settings.t, self.settings.depth);
        match (&an.fate, an.estimate) {
            (CuspFate::Peripheral, _) => Ok(BigRational::zero()),
            (CuspFate::Essential(_), Some(m)) => snap_multiplier(m, self.degree()),
            (CuspFate::Undecided(d), _) => Err(PullbackError::NotEssential(r, d.reason.clone())),
            (CuspFate::Essential(_), None) => Err(PullbackError::NotEssential(r, "no estimate".into())),
        }
    }

    pub fn classify_cusp(&self, r: Cusp) -> PointKind {
        let p = match gamma2_class(r) {
            PunctureLabel::Zero => SpherePoint::int(0),
            PunctureLabel::One => SpherePoint::int(1),
            PunctureLabel::Infinity => SpherePoint::Infinity,
        };
        // points of {0,1,∞} outside the postcritical set count as Julia
        self.classification.kind_of(&p).unwrap_or(PointKind::Julia)
    }

    pub fn iterate_cusp_orbit(&self, r: Cusp, max_n: usize) -> OrbitRecord {
        orbit_from(r, max_n, &mut |c| self.fate(c))
    }

    pub fn find_attractor(&self, height_bound: i64, max_n: usize) -> AttractorReport {
        let starts = cusps_up_to_height(height_bound);
        let mut table: BTreeMap<Cusp, CuspFate> = BTreeMap::new();
        let mut frontier: Vec<Cusp> = starts.clone();
        for _ in 0..=max_n {
            frontier.sort();
            frontier.dedup();
            frontier.retain(|c| !table.contains_key(c));
            if frontier.is_empty() {
                break;
            }
            let found: Vec<(Cusp, CuspFate)> = frontier.par_iter().map(|&c| (c, self.fate(c))).collect();
            frontier = found
                .iter()
                .filter_map(|(_, f)| match f {
                    CuspFate::Essential(c) => Some(*c),
                    _ => None,
                })
                .collect();
            table.extend(found);
        }
        let orbits: Vec<OrbitRecord> = starts
            .iter()
            .map(|&r| {
                orbit_from(r, max_n, &mut |c| {
                    table.get(&c).cloned().unwrap_or_else(|| {
                        CuspFate::Undecided(Diagnostics { reason: "not computed".into(), deepest: None, residual: f64::NAN })
                    })
                })
            })
            .collect();
        let mut attractor: BTreeSet<Cusp> = BTreeSet::new();
        for o in &orbits {
            if let Terminal::EntersAttractorCycle(c) = &o.terminal {
                attractor.extend(c.iter().cloned());
            }
        }
        let attractor: Vec<Cusp> = attractor.into_iter().collect();
        let check = CuspSettings { t: self.settings.t, depth: self.settings.depth + 4 };
        let entries: Vec<ClosureEntry> = attractor
            .par_iter()
            .map(|&c| {
                let fate = self.cusp_pullback(c, check.t, check.depth);
                let ok = match &fate {
                    CuspFate::Peripheral => true,
                    CuspFate::Essential(r2) => attractor.binary_search(r2).is_ok(),
                    CuspFate::Undecided(_) => false,
                };
                ClosureEntry { cusp: c, fate, ok }
            })
            .collect();
        let passed = entries.iter().all(|e| e.ok);
        let undecided = orbits.iter().filter(|o| matches!(o.terminal, Terminal::Undecided(_))).map(|o| o.start).collect();
        let julia: Vec<&OrbitRecord> = orbits.iter().filter(|o| self.classify_cusp(o.start) == PointKind::Julia).collect();
        AttractorReport {
            height_bound,
            max_n,
            t: self.settings.t,
            depth: self.settings.depth,
            julia_total: julia.len(),
            julia_peripheral: julia.iter().filter(|o| matches!(o.terminal, Terminal::BecomesPeripheral(_))).count(),
            orbits,
            attractor,
            closure: ClosureCertificate { depth: check.depth, entries, passed },
            undecided,
        }
    }
}

/// Follow fates from `r` until peripheral, a repeated cusp, an undecided step, or `max_n` steps.
fn orbit_from(r: Cusp, max_n: usize, fate: &mut dyn FnMut(Cusp) -> CuspFate) -> OrbitRecord {
    let mut seen = vec![r];
    let mut fates = Vec::new();
    let mut cur = r;
    for step in 1..=max_n {
        let f = fate(cur);
        fates.push(f.clone());
        match f {
            CuspFate::Peripheral => return OrbitRecord { start: r, fates, terminal: Terminal::BecomesPeripheral(step) },
            CuspFate::Undecided(_) => return OrbitRecord { start: r, fates, terminal: Terminal::Undecided(step) },
            CuspFate::Essential(next) => {
                if let Some(i) = seen.iter().position(|c| *c == next) {
                    return OrbitRecord { start: r, fates, terminal: Terminal::EntersAttractorCycle(seen[i..].to_vec()) };
                }
                seen.push(next);
                cur = next;
            }
        }
    }
    OrbitRecord { start: r, fates, terminal: Terminal::Exhausted }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value")]
pub enum Terminal {
    EntersAttractorCycle(Vec<Cusp>),
    BecomesPeripheral(usize),
    Exhausted,
    /// The fate at this step could not be decided.
    Undecided(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrbitRecord {
    pub start: Cusp,
    pub fates: Vec<CuspFate>,
    pub terminal: Terminal,
}

impl OrbitRecord {
    /// The cusps visited, starting with `start`.
    pub fn cusps(&self) -> Vec<Cusp> {
        let mut v = vec![self.start];
        v.extend(self.fates.iter().filter_map(|f| match f {
            CuspFate::Essential(c) => Some(*c),
            _ => None,
        }));
        v
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ClosureEntry {
    pub cusp: Cusp,
    pub fate: CuspFate,
    pub ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClosureCertificate {
    pub depth: usize,
    pub entries: Vec<ClosureEntry>,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct AttractorReport {
    pub height_bound: i64,
    pub max_n: usize,
    #[serde(serialize_with = "ser_f64")]
    pub t: f64,
    pub depth: usize,
    pub orbits: Vec<OrbitRecord>,
    pub attractor: Vec<Cusp>,
    pub closure: ClosureCertificate,
    pub undecided: Vec<Cusp>,
    pub julia_total: usize,
    pub julia_peripheral: usize,
}

fn ser_f64<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&fmt17(*x))
}
