//! Predictor-corrector tracking of preimages along sphere paths, and plain
//! path lifting through λ.

use num_complex::Complex64 as C;

use super::{lift_newton, CoverError, Framed, LiftTarget, Result};
use crate::ratmap::{CPoly, RationalMap};

/// Sphere point stored as `c` or, when `inv`, as `1/c`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SPoint {
    pub inv: bool,
    pub c: C,
}

impl SPoint {
    pub fn finite(z: C) -> SPoint {
        SPoint { inv: false, c: z }.rechart()
    }

    pub fn infinity() -> SPoint {
        SPoint { inv: true, c: C::new(0.0, 0.0) }
    }

    pub fn from_option(z: Option<C>) -> SPoint {
        match z {
            Some(z) if z.re.is_finite() && z.im.is_finite() => SPoint::finite(z),
            _ => SPoint::infinity(),
        }
    }

    pub fn to_option(&self) -> Option<C> {
        if !self.inv {
            Some(self.c)
        } else if self.c.norm() == 0.0 {
            None
        } else {
            Some(1.0 / self.c)
        }
    }

    /// Keep the stored coordinate in the unit-ish disk.
    pub fn rechart(self) -> SPoint {
        if self.c.norm() > 1.5 {
            SPoint { inv: !self.inv, c: 1.0 / self.c }
        } else {
            self
        }
    }

    fn in_chart(&self, inv: bool) -> Option<C> {
        if inv == self.inv {
            Some(self.c)
        } else if self.c.norm() == 0.0 {
            None
        } else {
            Some(1.0 / self.c)
        }
    }

    /// Chordal distance (invariant under `z -> 1/z`, so either chart works).
    pub fn chordal(&self, o: &SPoint) -> f64 {
        let a = self.c;
        match o.in_chart(self.inv) {
            Some(b) => (a - b).norm() / ((1.0 + a.norm_sqr()).sqrt() * (1.0 + b.norm_sqr()).sqrt()),
            None => 1.0 / (1.0 + a.norm_sqr()).sqrt(),
        }
    }
}

/// `f` seen in the four chart combinations `[source inverted][target inverted]`.
#[derive(Clone, Debug)]
pub struct ChartMaps {
    maps: [[RationalMap; 2]; 2],
}

impl ChartMaps {
    pub fn new(f: &RationalMap) -> ChartMaps {
        let inv = RationalMap::from_ratios(&[(1, 1)], &[(0, 1), (1, 1)]).unwrap();
        let fi = f.compose(&inv);
        ChartMaps {
            maps: [[f.clone(), inv.compose(f)], [fi.clone(), inv.compose(&fi)]],
        }
    }

    /// Newton for `f(w) = m` from `w0`; returns the root and final residual.
    pub fn newton(&self, w0: SPoint, m: SPoint) -> Option<SPoint> {
        let (m_inv, mc) = match m.to_option() {
            Some(z) if z.norm() <= 1.0 => (false, z),
            Some(z) => (true, 1.0 / z),
            None => (true, C::new(0.0, 0.0)),
        };
        let mut w = w0;
        for _ in 0..50 {
            let map = &self.maps[w.inv as usize][m_inv as usize];
            let (v, dv) = map.eval_with_derivative(w.c)?;
            let r = v - mc;
            if r.norm() < 1e-14 {
                return Some(w);
            }
            if dv.norm() == 0.0 || !dv.re.is_finite() {
                return None;
            }
            let mut step = r / dv;
            if step.norm() > 0.5 {
                step *= 0.5 / step.norm();
            }
            let c_new = w.c - step;
            let tiny = step.norm() <= 1e-15 * (1.0 + w.c.norm());
            w = SPoint { inv: w.inv, c: c_new }.rechart();
            if tiny && r.norm() < 1e-10 {
                return Some(w);
            }
        }
        None
    }
}

/// Tracks all preimages of a moving point simultaneously.
#[derive(Clone, Debug)]
pub struct PreimageTracker {
    charts: ChartMaps,
    f: RationalMap,
}

/// Accepted samples: parameter values and, per sample, one point per branch.
#[derive(Clone, Debug)]
pub struct Tracks {
    pub s: Vec<f64>,
    pub points: Vec<Vec<SPoint>>,
}

impl PreimageTracker {
    pub fn new(f: &RationalMap) -> PreimageTracker {
        PreimageTracker { charts: ChartMaps::new(f), f: f.clone() }
    }

    pub fn degree(&self) -> usize {
        self.f.degree()
    }

    pub fn charts(&self) -> &ChartMaps {
        &self.charts
    }

    /// All `deg f` preimages of `m`, with infinity repeated by multiplicity.
    pub fn all_preimages(&self, m: SPoint) -> Vec<SPoint> {
        let d = self.f.degree();
        let (n, den) = (self.f.num(), self.f.den());
        let p: CPoly = match m.to_option() {
            Some(z) if z.norm() <= 1.0 => n.sub(&den.scale(&z)),
            Some(z) => den.sub(&n.scale(&(1.0 / z))),
            None => den.clone(),
        };
        let p = p.cleaned(1e-15);
        let roots = p.roots();
        let mut out: Vec<SPoint> = roots
            .iter()
            .map(|&z| {
                let w = SPoint::finite(z);
                self.charts.newton(w, m).unwrap_or(w)
            })
            .collect();
        while out.len() < d {
            out.push(SPoint::infinity());
        }
        out
    }

    /// Follow `start` (one point per branch) along `curve` on `[s0, s1]`.
    /// Steps halve until every branch moves less than a quarter of the
    /// current separation and the new separation exceeds ten times the move.
    pub fn track(
        &self,
        curve: &dyn Fn(f64) -> SPoint,
        s0: f64,
        s1: f64,
        start: Vec<SPoint>,
        min_steps: usize,
    ) -> Result<Tracks> {
        let span = s1 - s0;
        let max_ds = span / min_steps.max(1) as f64;
        let mut ds = max_ds;
        let mut s = s0;
        let mut cur = start;
        let mut out = Tracks { s: vec![s0], points: vec![cur.clone()] };
        let sep_of = |v: &[SPoint]| {
            let mut m = f64::INFINITY;
            for i in 0..v.len() {
                for j in 0..i {
                    m = m.min(v[i].chordal(&v[j]));
                }
            }
            m
        };
        while s < s1 {
            let s_new = if s1 - s <= ds * (1.0 + 1e-12) { s1 } else { s + ds };
            let m = curve(s_new);
            let sep_old = sep_of(&cur);
            let mut next = Vec::with_capacity(cur.len());
            let mut ok = true;
            let mut movement: f64 = 0.0;
            for w in &cur {
                match self.charts.newton(*w, m) {
                    Some(v) => {
                        movement = movement.max(v.chordal(w));
                        next.push(v);
                    }
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                let sep_new = sep_of(&next);
                ok = movement < 0.25 * sep_old && sep_new > 10.0 * movement.max(1e-14);
            }
            if ok {
                s = s_new;
                cur = next;
                out.s.push(s);
                out.points.push(cur.clone());
                ds = (ds * 2.0).min(max_ds);
            } else {
                ds *= 0.5;
                if ds < 1e-13 * span.abs().max(1.0) {
                    return Err(CoverError::BranchCollision { s, separation: sep_old });
                }
            }
        }
        Ok(out)
    }
}

pub(crate) fn lerp_sphere(a: SPoint, b: SPoint, t: f64) -> SPoint {
    match b.in_chart(a.inv) {
        Some(bc) => SPoint { inv: a.inv, c: a.c + (bc - a.c) * t }.rechart(),
        None => {
            let ac = a.in_chart(!a.inv).unwrap_or(C::new(0.0, 0.0));
            SPoint { inv: !a.inv, c: ac * (1.0 - t) + b.in_chart(!a.inv).unwrap_or(C::new(0.0, 0.0)) * t }.rechart()
        }
    }
}

/// Continue the branch of `f^{-1}` through `w0` along the polyline `path`
/// (finite moduli points); returns the branch value at every vertex.
pub fn continue_inverse_branch(f: &RationalMap, path: &[C], w0: C) -> Result<Vec<C>> {
    if path.is_empty() {
        return Ok(vec![]);
    }
    let tracker = PreimageTracker::new(f);
    let m0 = SPoint::finite(path[0]);
    let w0p = SPoint::finite(w0);
    let fw0 = f.eval_c(w0).map(SPoint::finite).unwrap_or(SPoint::infinity());
    if fw0.chordal(&m0) > 1e-8 {
        return Err(CoverError::LiftBroken { s: 0.0, reason: "f(w0) differs from the path start".into() });
    }
    let start = tracker.all_preimages(m0);
    let idx = (0..start.len())
        .min_by(|&i, &j| start[i].chordal(&w0p).partial_cmp(&start[j].chordal(&w0p)).unwrap())
        .unwrap();
    let mut cur = start;
    cur[idx] = w0p;
    let mut out = vec![w0];
    for k in 1..path.len() {
        let (a, b) = (SPoint::finite(path[k - 1]), SPoint::finite(path[k]));
        let curve = move |t: f64| lerp_sphere(a, b, t);
        let tr = tracker.track(&curve, 0.0, 1.0, cur, 4)?;
        cur = tr.points.last().unwrap().clone();
        out.push(cur[idx].to_option().unwrap_or(C::new(f64::INFINITY, 0.0)));
    }
    Ok(out)
}

/// Lift the polyline `path` through λ starting at `start`; returns plain
/// half-plane points at the vertices.
pub fn lift_path(path: &[C], start: C) -> Result<Vec<C>> {
    if path.is_empty() {
        return Ok(vec![]);
    }
    let mut p = Framed::from_plain(start)?;
    let m0 = p.moduli().value().unwrap_or(C::new(f64::INFINITY, 0.0));
    if (m0 - path[0]).norm() > 1e-8 {
        return Err(CoverError::LiftBroken { s: 0.0, reason: "λ(start) differs from the path start".into() });
    }
    let mut out = vec![start];
    for k in 1..path.len() {
        let (a, b) = (path[k - 1], path[k]);
        let mut t: f64 = 0.0;
        let mut dt: f64 = 0.25;
        while t < 1.0 {
            let t_new = (t + dt).min(1.0);
            let m = a + (b - a) * t_new;
            let ok = match lift_newton(&LiftTarget::Plain(Some(m)), p, 1.0) {
                Ok((q, _)) if q.distance(&p) < 0.5 => {
                    p = q;
                    true
                }
                _ => false,
            };
            if ok {
                t = t_new;
                dt = (dt * 2.0).min(0.25);
            } else {
                dt *= 0.5;
                if dt < 1e-12 {
                    return Err(CoverError::LiftBroken { s: (k - 1) as f64 + t, reason: "refinement floor".into() });
                }
            }
        }
        out.push(p.plain());
    }
    Ok(out)
}
