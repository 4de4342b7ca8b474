//! Continuation engine behind σ: a source point moves along a path in the
//! half-plane, its λ-image is followed by one branch of `f^{-1}`, and that
//! branch is lifted back through λ.
//!
//! Near a puncture the moduli point is carried by its logarithm, and the
//! preimage by `u = log y` in a local chart where `f` reads `y^e H(y)`.

use std::f64::consts::PI;

use num_complex::Complex64 as C;

use crate::cover::track::{ChartMaps, PreimageTracker, SPoint};
use crate::cover::{hyperbolic_distance, lift_newton, log1m, log_lambda, Anh, CoverError, Framed, LiftTarget, ModuliPoint, Result, I};
use crate::ratmap::{cluster, RationalMap, SpherePoint};

/// Charts `ψ` with `ψ(0)` equal to `0`, `1`, `∞`.
const PUNCTURE_CHARTS: [Anh; 3] = [Anh::Id, Anh::OneMinus, Anh::Inv];

/// Enter a local chart below this log-distance to a puncture, leave above `LEAVE`.
const ENTER: f64 = -8.0;
const LEAVE: f64 = -6.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Center {
    /// One of `0, 1, ∞`, reached from `0` by this anharmonic map.
    Marked(Anh),
    Point(C),
}

impl Center {
    fn kappa(&self, y: C) -> Option<C> {
        match *self {
            Center::Marked(k) => k.apply(Some(y)),
            Center::Point(z0) => Some(z0 + y),
        }
    }

    fn kappa_inv(&self, w: Option<C>) -> Option<C> {
        match *self {
            // Id, OneMinus and Inv are involutions
            Center::Marked(k) => k.apply(w),
            Center::Point(z0) => w.map(|w| w - z0),
        }
    }
}

/// `ψ^{-1} ∘ f ∘ κ (y) = y^e H(y)` near `y = 0`.
#[derive(Clone, Debug)]
pub struct LocalChart {
    pub center: Center,
    pub psi: Anh,
    pub e: u32,
    log_h0: C,
    zeros: Vec<C>,
    poles: Vec<C>,
    pub radius: f64,
}

impl LocalChart {
    fn build(f: &RationalMap, center: Center, psi: Anh, e: u32) -> Option<LocalChart> {
        let kappa = match center {
            Center::Marked(k) => k.to_map(),
            Center::Point(z0) => {
                RationalMap::moebius_complex(C::new(1.0, 0.0), z0, C::new(0.0, 0.0), C::new(1.0, 0.0)).ok()?
            }
        };
        let r = psi.inverse().to_map().compose(f).compose(&kappa);
        let (num, den) = (r.num().clone(), r.den().clone());
        let scale = (0..=num.deg_or_zero()).map(|k| num.coeff(k).norm()).fold(0.0, f64::max);
        if (0..e as usize).any(|k| num.coeff(k).norm() > 1e-8 * scale) {
            return None;
        }
        let n1 = num.shift_down(e as usize);
        let d0 = den.coeff(0);
        if d0.norm() == 0.0 || n1.coeff(0).norm() == 0.0 {
            return None;
        }
        let zeros = n1.roots();
        let poles = den.roots();
        let radius = zeros.iter().chain(&poles).map(|z| z.norm()).fold(1e3, f64::min);
        Some(LocalChart { center, psi, e, log_h0: (n1.coeff(0) / d0).ln(), zeros, poles, radius })
    }

    fn lh(&self, y: C) -> (C, C) {
        let (mut v, mut d) = (self.log_h0, C::new(0.0, 0.0));
        for z in &self.zeros {
            v += log1m(y / z);
            d += 1.0 / (y - z);
        }
        for p in &self.poles {
            v -= log1m(y / p);
            d -= 1.0 / (y - p);
        }
        (v, d)
    }

    /// `G(u) = e u + LH(e^u)`, the logarithm of the chart value.
    pub fn g(&self, u: C) -> C {
        self.e as f64 * u + self.lh(u.exp()).0
    }

    /// Newton for `G(u) = target` from `u0`, staying inside half the chart radius.
    fn solve(&self, target: C, u0: C) -> Option<C> {
        let mut u = u0;
        let lim = (0.5 * self.radius).ln();
        for _ in 0..60 {
            let y = u.exp();
            let (v, d) = self.lh(y);
            let r = self.e as f64 * u + v - target;
            if r.norm() < 1e-13 * (1.0 + target.norm()) {
                return Some(u);
            }
            let mut step = r / (self.e as f64 + y * d);
            let cap = 2.0f64.max(0.5 * u.re.abs());
            if step.norm() > cap {
                step *= cap / step.norm();
            }
            u -= step;
            if u.re > lim || !u.re.is_finite() {
                return None;
            }
        }
        None
    }

    fn branch(&self, l: C, u: C) -> C {
        let g0 = self.g(u);
        let k = ((g0.im - l.im) / (2.0 * PI)).round();
        l + I * (2.0 * PI * k)
    }
}

/// Chordal distance from `w` to the nearest of `0, 1, ∞`.
fn puncture_gap(w: SPoint) -> f64 {
    [SPoint::finite(C::new(0.0, 0.0)), SPoint::finite(C::new(1.0, 0.0)), SPoint::infinity()]
        .iter()
        .map(|p| p.chordal(&w))
        .fold(f64::INFINITY, f64::min)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Pre {
    Plain { w: SPoint, sep: f64 },
    Near { chart: usize, u: C },
}

/// One sample of the continuation: source, preimage branch, and lift.
#[derive(Clone, Copy, Debug)]
pub struct State {
    pub src: Framed,
    pub pre: Pre,
    pub lift: Framed,
}

/// Cached data for continuing `f^{-1}` and lifting through λ.
#[derive(Clone, Debug)]
pub struct Continuation {
    charts: ChartMaps,
    tracker: PreimageTracker,
    local: Vec<LocalChart>,
    pub min_step: f64,
    pub max_step: f64,
    pub first_step: f64,
}

impl Continuation {
    pub fn new(f: &RationalMap) -> Continuation {
        let tracker = PreimageTracker::new(f);
        let mut local = Vec::new();
        let marked = [(SpherePoint::int(0), Anh::Id), (SpherePoint::int(1), Anh::OneMinus), (SpherePoint::Infinity, Anh::Inv)];
        for (k, &psi) in PUNCTURE_CHARTS.iter().enumerate() {
            let mut centers: Vec<(Center, u32)> = Vec::new();
            for (z, kappa) in &marked {
                if f.eval(z).same(&marked[k].0) {
                    centers.push((Center::Marked(*kappa), f.local_degree(z)));
                }
            }
            let pre = tracker.all_preimages(SPoint::from_option(psi.apply(Some(C::new(0.0, 0.0)))));
            let others: Vec<C> = pre
                .iter()
                .filter_map(|p| p.to_option())
                .filter(|z| z.norm() <= 1e8 && z.norm() > 1e-4 && (z - 1.0).norm() > 1e-4)
                .collect();
            for (z, m) in cluster(&others, 1e-4) {
                centers.push((Center::Point(z), m as u32));
            }
            for (c, e) in centers {
                if let Some(ch) = LocalChart::build(f, c, psi, e) {
                    local.push(ch);
                }
            }
        }
        Continuation { charts: ChartMaps::new(f), tracker, local, min_step: 1e-10, max_step: 1.0, first_step: 0.05 }
    }

    pub fn local_charts(&self) -> &[LocalChart] {
        &self.local
    }

    /// Distance from `w` to the nearest other preimage of `m`.
    fn separation(&self, w: SPoint, m: SPoint) -> f64 {
        let mut d: Vec<f64> = self.tracker.all_preimages(m).iter().map(|p| p.chordal(&w)).collect();
        d.sort_by(|a, b| a.partial_cmp(b).unwrap());
        d.get(1).cloned().unwrap_or(1.0)
    }

    pub fn start(&self, tau0: Framed, a: C) -> State {
        let m = SPoint::from_option(tau0.moduli().value());
        let w = SPoint::finite(a);
        let pre = Pre::Plain { w, sep: self.separation(w, m) };
        let pre = self.switch(pre, &tau0.moduli());
        State { src: tau0, pre, lift: tau0 }
    }

    /// Current preimage as a sphere value.
    pub fn preimage(&self, pre: &Pre) -> Option<C> {
        match *pre {
            Pre::Plain { w, .. } => w.to_option(),
            Pre::Near { chart, u } => self.local[chart].center.kappa(u.exp()),
        }
    }

    fn step_pre(&self, pre: &Pre, mp: &ModuliPoint) -> Option<Pre> {
        match *pre {
            Pre::Plain { w, sep } => {
                let m = SPoint::from_option(mp.value());
                let w2 = self.charts.newton(w, m)?;
                // Bounding the move by the distance to 0, 1, ∞ too keeps the
                // winding about them, and so the lift's log branch, continuous.
                if w2.chordal(&w) > 0.25 * sep.min(puncture_gap(w)) {
                    return None;
                }
                Some(Pre::Plain { w: w2, sep: self.separation(w2, m) })
            }
            Pre::Near { chart, u } => {
                let lc = &self.local[chart];
                let l = mp.log_in(lc.psi);
                let tk = lc.branch(l, u);
                let d = tk - lc.g(u);
                if d.im.abs() > 1.0 || (tk.re > ENTER && d.norm() > 0.75) {
                    return None;
                }
                Some(Pre::Near { chart, u: lc.solve(tk, u)? })
            }
        }
    }

    /// Change between the plain and local representations where appropriate.
    fn switch(&self, pre: Pre, mp: &ModuliPoint) -> Pre {
        match pre {
            Pre::Plain { w, .. } => {
                for (i, lc) in self.local.iter().enumerate() {
                    let l = mp.log_in(lc.psi);
                    if l.re >= ENTER {
                        continue;
                    }
                    let Some(y) = lc.center.kappa_inv(w.to_option()) else { continue };
                    if y.norm() == 0.0 || y.norm() > 0.25 * lc.radius {
                        continue;
                    }
                    let u0 = y.ln();
                    if let Some(u) = lc.solve(lc.branch(l, u0), u0) {
                        if (u - u0).norm() < 0.1 {
                            return Pre::Near { chart: i, u };
                        }
                    }
                }
                pre
            }
            Pre::Near { chart, u } => {
                let lc = &self.local[chart];
                let l = mp.log_in(lc.psi);
                if l.re > LEAVE || u.exp().norm() > 0.5 * lc.radius {
                    let w = SPoint::from_option(lc.center.kappa(u.exp()));
                    let m = SPoint::from_option(mp.value());
                    Pre::Plain { w, sep: self.separation(w, m) }
                } else {
                    pre
                }
            }
        }
    }

    fn lift_target(&self, pre: &Pre) -> LiftTarget {
        match *pre {
            Pre::Plain { w, .. } => LiftTarget::Plain(w.to_option()),
            Pre::Near { chart, u } => match self.local[chart].center {
                Center::Marked(k) => LiftTarget::Chart { kappa: k, u },
                Center::Point(z0) => LiftTarget::Plain(Some(z0 + u.exp())),
            },
        }
    }

    /// One guarded step to a new source point, or `None` to retry smaller.
    pub fn step(&self, st: &State, src: Framed) -> Option<State> {
        let mp = src.moduli();
        let pre = self.step_pre(&st.pre, &mp)?;
        let pre = self.switch(pre, &mp);
        let target = self.lift_target(&pre);
        let ds = src.distance(&st.src);
        let t = target.log_in(Anh::of_modular(&st.lift.g))?;
        let lam = log_lambda(st.lift.w);
        let k = ((lam.im - t.im) / (2.0 * PI)).round();
        if (t.im + 2.0 * PI * k - lam.im).abs() > 1.0 {
            return None;
        }
        let (lift, _) = lift_newton(&target, st.lift, 2.0 + 2.0 * ds).ok()?;
        // σ does not expand the hyperbolic metric, so a larger move is a branch jump
        if lift.distance(&st.lift) > 1.001 * ds + 1e-9 {
            return None;
        }
        Some(State { src, pre, lift })
    }

    /// Follow `path` (parametrized by hyperbolic arclength on `[0, len]`),
    /// returning the state at each of the sorted `stops` and at the end.
    pub fn follow(&self, st: State, path: &dyn Fn(f64) -> Framed, len: f64, stops: &[f64]) -> Result<(State, Vec<State>)> {
        let mut cur = st;
        let mut s = 0.0;
        let mut ds = self.first_step;
        let mut recorded = Vec::with_capacity(stops.len());
        let mut next_stop = 0;
        while next_stop < stops.len() && stops[next_stop] <= 0.0 {
            recorded.push(cur);
            next_stop += 1;
        }
        while s < len {
            let goal = if next_stop < stops.len() { stops[next_stop].min(len) } else { len };
            let s_new = if goal - s <= ds * (1.0 + 1e-12) { goal } else { s + ds };
            match self.step(&cur, path(s_new)) {
                Some(n) => {
                    cur = n;
                    s = s_new;
                    ds = (ds * 2.0).min(self.max_step);
                    while next_stop < stops.len() && stops[next_stop] <= s {
                        recorded.push(cur);
                        next_stop += 1;
                    }
                }
                None => {
                    ds *= 0.5;
                    if ds < self.min_step {
                        return Err(CoverError::LiftBroken { s, reason: "continuation step underflow".into() });
                    }
                }
            }
        }
        Ok((cur, recorded))
    }
}

/// Hyperbolic geodesic from `a` to `b` by arclength, and its length.
pub fn geodesic(a: C, b: C) -> (impl Fn(f64) -> C, f64) {
    let len = hyperbolic_distance(a, b);
    let vertical = (a.re - b.re).abs() <= 1e-14 * (1.0 + a.re.abs());
    let (x1, x2) = if vertical {
        (0.0, 0.0)
    } else {
        let c = (a.norm_sqr() - b.norm_sqr()) / (2.0 * (a.re - b.re));
        let r = (a - c).norm();
        (c - r, c + r)
    };
    let m = move |z: C| (z - x1) / (z - x2);
    let (ma, mb) = if vertical { (C::new(0.0, 0.0), C::new(0.0, 0.0)) } else { (m(a), m(b)) };
    let ratio = if vertical { (b.im / a.im).ln() } else { (mb.norm() / ma.norm()).ln() };
    let f = move |s: f64| {
        let frac = if len == 0.0 { 0.0 } else { s / len };
        if vertical {
            C::new(a.re, a.im * (ratio * frac).exp())
        } else {
            let w = ma * (ratio * frac).exp();
            (w * x2 - x1) / (w - 1.0)
        }
    };
    (f, len)
}
