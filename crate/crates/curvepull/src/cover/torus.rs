//! The elliptic double cover `P: C/⟨1, τ₀⟩ → sphere`, branched over
//! `{0, 1, ∞, λ(τ₀)}`, and homology of lifted curves.

use std::f64::consts::PI;

use num_complex::Complex64 as C;
use serde::Serialize;

use super::track::{lerp_sphere, SPoint};
use super::{lambda, theta2, theta3, CoverError, Result};

/// `P(z) = (θ₂/θ₃)² (θ₄(πz)/θ₁(πz))²` for the nome of `τ₀`: even, periodic
/// in `⟨1, τ₀⟩`, with `P(0) = ∞`, `P(1/2) = 1`, `P(τ₀/2) = 0`, `P((1+τ₀)/2) = λ(τ₀)`.
#[derive(Clone, Debug)]
pub struct TorusCover {
    pub tau0: C,
    pub a: C,
    scale: C,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum TorusClass {
    Peripheral,
    /// Displacement `m + n τ₀`, sign-normalized.
    Homology(i64, i64),
}

impl TorusClass {
    pub fn normalized(m: i64, n: i64) -> TorusClass {
        if m == 0 && n == 0 {
            TorusClass::Peripheral
        } else if m > 0 || (m == 0 && n > 0) {
            TorusClass::Homology(m, n)
        } else {
            TorusClass::Homology(-m, -n)
        }
    }
}

pub fn torus_build(tau0: C) -> Result<TorusCover> {
    let a = lambda(tau0)?.ok_or(CoverError::PrecisionLoss(tau0.im))?;
    let r = theta2(tau0) / theta3(tau0);
    Ok(TorusCover { tau0, a, scale: r * r })
}

impl TorusCover {
    fn q_pow(&self, x: f64) -> C {
        (C::new(0.0, PI) * self.tau0 * x).exp()
    }

    /// `(θ₁, θ₁', θ₄, θ₄')` at `v = πz` (derivatives in `v`).
    fn thetas(&self, z: C) -> (C, C, C, C) {
        let v = PI * z;
        let (mut t1, mut d1) = (C::new(0.0, 0.0), C::new(0.0, 0.0));
        for n in 0..40 {
            let k = (2 * n + 1) as f64;
            let c = self.q_pow((n as f64 + 0.5).powi(2)) * if n % 2 == 0 { 2.0 } else { -2.0 };
            let (s, co) = ((v * k).sin(), (v * k).cos());
            t1 += c * s;
            d1 += c * k * co;
            if c.norm() * (1.0 + s.norm() + co.norm()) * k < 1e-18 * t1.norm().max(1e-300) {
                break;
            }
        }
        let (mut t4, mut d4) = (C::new(1.0, 0.0), C::new(0.0, 0.0));
        for n in 1..40 {
            let k = (2 * n) as f64;
            let c = self.q_pow((n * n) as f64) * if n % 2 == 0 { 2.0 } else { -2.0 };
            let (s, co) = ((v * k).sin(), (v * k).cos());
            t4 += c * co;
            d4 -= c * k * s;
            if c.norm() * (1.0 + s.norm() + co.norm()) * k < 1e-18 {
                break;
            }
        }
        (t1, d1, t4, d4)
    }

    /// Representative of `z` in the period parallelogram centred at 0.
    pub fn reduce(&self, z: C) -> C {
        let n = (z.im / self.tau0.im).round();
        let mut w = z - self.tau0 * n;
        w.re -= w.re.round();
        w
    }

    /// Coordinates `(x, y)` with `d = x + y τ₀`.
    pub fn lattice_coords(&self, d: C) -> (f64, f64) {
        let y = d.im / self.tau0.im;
        (d.re - y * self.tau0.re, y)
    }

    pub fn point_map(&self, z: C) -> SPoint {
        let (t1, _, t4, _) = self.thetas(self.reduce(z));
        if t1.norm() == 0.0 {
            return SPoint::infinity();
        }
        let r = t4 / t1;
        SPoint::finite(self.scale * r * r)
    }

    /// Distance from `z` to the nearest half-period, where `P` branches.
    pub fn half_period_distance(&self, z: C) -> f64 {
        let w = self.reduce(2.0 * z);
        let mut best = f64::INFINITY;
        for i in -1..=1 {
            for j in -1..=1 {
                let lp = w - C::new(i as f64, 0.0) - self.tau0 * j as f64;
                best = best.min(lp.norm());
            }
        }
        best / 2.0
    }

    /// Newton for `P(z) = target`, in the chart `1/P` for large targets.
    pub fn newton(&self, z0: C, target: SPoint) -> Option<C> {
        let (big, tc) = match target.to_option() {
            Some(w) if w.norm() <= 1.0 => (false, w),
            Some(w) => (true, 1.0 / w),
            None => (true, C::new(0.0, 0.0)),
        };
        let mut z = z0;
        for _ in 0..60 {
            let (t1, d1, t4, d4) = self.thetas(self.reduce(z));
            let (val, der) = if !big {
                if t1.norm() == 0.0 {
                    return None;
                }
                let r = t4 / t1;
                let dr = (d4 * t1 - t4 * d1) / (t1 * t1);
                (self.scale * r * r, self.scale * 2.0 * r * dr * PI)
            } else {
                if t4.norm() == 0.0 {
                    return None;
                }
                let r = t1 / t4;
                let dr = (d1 * t4 - t1 * d4) / (t4 * t4);
                (r * r / self.scale, 2.0 * r * dr * PI / self.scale)
            };
            let res = val - tc;
            if res.norm() < 1e-14 {
                return Some(z);
            }
            if der.norm() == 0.0 {
                return None;
            }
            let mut step = res / der;
            let cap = 0.1 * (1.0 + self.tau0.im);
            if step.norm() > cap {
                step *= cap / step.norm();
            }
            z -= step;
            if step.norm() < 1e-15 * (1.0 + z.norm()) && res.norm() < 1e-10 {
                return Some(z);
            }
        }
        None
    }

    /// Some preimage of `target`, by multistart Newton over the parallelogram.
    pub fn preimage(&self, target: SPoint) -> Option<C> {
        for i in 0..8 {
            for j in 0..8 {
                let z0 = C::new((i as f64 + 0.37) / 8.0, 0.0) + self.tau0 * ((j as f64 + 0.29) / 8.0);
                if let Some(z) = self.newton(z0, target) {
                    if self.point_map(z).chordal(&target) < 1e-10 {
                        return Some(z);
                    }
                }
            }
        }
        None
    }

    fn lattice_point(&self, d: C) -> Option<(i64, i64)> {
        let (x, y) = self.lattice_coords(d);
        let (m, n) = (x.round(), y.round());
        if (x - m).abs() < 1e-6 && (y - n).abs() < 1e-6 {
            Some((m as i64, n as i64))
        } else {
            None
        }
    }

    /// Continue a lift of the polyline from `z` along `pts`.
    fn continue_lift(&self, pts: &[SPoint], mut z: C) -> Result<C> {
        for k in 1..pts.len() {
            let (a, b) = (pts[k - 1], pts[k]);
            let mut t: f64 = 0.0;
            let mut dt: f64 = 1.0;
            while t < 1.0 {
                let t_new = (t + dt).min(1.0);
                let target = lerp_sphere(a, b, t_new);
                let guard = 0.5 * self.half_period_distance(z);
                match self.newton(z, target) {
                    Some(zn) if (zn - z).norm() < guard => {
                        z = zn;
                        t = t_new;
                        dt = (dt * 2.0).min(1.0);
                    }
                    _ => {
                        dt *= 0.5;
                        if dt < 1e-12 {
                            return Err(CoverError::LiftBroken {
                                s: (k - 1) as f64 + t,
                                reason: "torus lift refinement floor".into(),
                            });
                        }
                    }
                }
            }
        }
        Ok(z)
    }

    /// Homology class of a closed sphere polyline lifted through `P`; the
    /// curve is traversed twice when the first lift does not close.
    pub fn lift_curve(&self, pts: &[SPoint]) -> Result<TorusClass> {
        if pts.len() < 2 {
            return Ok(TorusClass::Peripheral);
        }
        let z0 = self.preimage(pts[0]).ok_or(CoverError::LiftBroken {
            s: 0.0,
            reason: "no torus preimage of the start point".into(),
        })?;
        let z1 = self.continue_lift(pts, z0)?;
        if let Some((m, n)) = self.lattice_point(z1 - z0) {
            return Ok(TorusClass::normalized(m, n));
        }
        if self.lattice_point(z1 + z0).is_none() {
            return Err(CoverError::LiftBroken { s: 1.0, reason: "lift endpoint is not a preimage".into() });
        }
        let z2 = self.continue_lift(pts, z1)?;
        match self.lattice_point(z2 - z0) {
            Some((m, n)) => Ok(TorusClass::normalized(m, n)),
            None => Err(CoverError::LiftBroken { s: 2.0, reason: "double lift did not close".into() }),
        }
    }
}

/// `torus_point_map`.
pub fn torus_point_map(t: &TorusCover, z: C) -> SPoint {
    t.point_map(z)
}

/// `torus_lift_curve`.
pub fn torus_lift_curve(t: &TorusCover, pts: &[SPoint]) -> Result<TorusClass> {
    t.lift_curve(pts)
}
