//! The lambda covering of the thrice-punctured sphere by the upper half-plane,
//! path lifting, inverse-branch tracking and the torus double cover.
//!
//! Deep cusp approaches would underflow `e^{iπτ}`, so half-plane points are
//! carried as `τ = g·ω` with `g` in PSL(2,Z) and `Im ω` kept moderate, and
//! lambda values as `ψ(e^l)` with `ψ` an anharmonic map and `l` a logarithm.

pub mod torus;
pub mod track;

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64 as C;
use thiserror::Error;

use crate::exact_farey::{moebius_apply, Cusp, ModularElement, PunctureLabel};
use crate::ratmap::RationalMap;

pub use torus::{torus_build, TorusClass, TorusCover};
pub use track::{continue_inverse_branch, lift_path, PreimageTracker, SPoint};

pub const I: C = C::new(0.0, 1.0);

/// Frames are re-reduced once `Im ω` drops below this.
pub const FRAME_MIN_IM: f64 = 0.6;
/// Points with smaller imaginary part are rejected.
pub const MIN_IM: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoverError {
    #[error("point {0} is not in the upper half-plane")]
    InvalidPoint(String),
    #[error("reduced imaginary part {0} too small")]
    PrecisionLoss(f64),
    #[error("Newton did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("path lift broke at parameter {s}: {reason}")]
    LiftBroken { s: f64, reason: String },
    #[error("preimages collided at parameter {s} (separation {separation:e})")]
    BranchCollision { s: f64, separation: f64 },
    #[error("curve passes within {distance:e} of a marked point")]
    Clearance { distance: f64 },
}

pub type Result<T> = std::result::Result<T, CoverError>;

fn sum_until_small(first: C, mut term: impl FnMut(usize) -> C) -> C {
    let mut acc = first;
    for n in 1..200 {
        let t = term(n);
        acc += t;
        if t.norm() < 1e-17 * acc.norm().max(1e-300) {
            break;
        }
    }
    acc
}

/// `exp(iπ ω k)` for real `k`.
fn nome_pow(w: C, k: f64) -> C {
    (I * PI * w * k).exp()
}

pub fn theta3(w: C) -> C {
    sum_until_small(C::new(1.0, 0.0), |n| 2.0 * nome_pow(w, (n * n) as f64))
}

pub fn theta4(w: C) -> C {
    sum_until_small(C::new(1.0, 0.0), |n| {
        let s = if n % 2 == 0 { 2.0 } else { -2.0 };
        s * nome_pow(w, (n * n) as f64)
    })
}

/// `θ₂ = 2 q^{1/4} Σ q^{n(n+1)}`.
pub fn theta2(w: C) -> C {
    2.0 * nome_pow(w, 0.25) * pair_series(w)
}

/// `Σ_{n≥0} q^{n(n+1)}`.
fn pair_series(w: C) -> C {
    sum_until_small(C::new(1.0, 0.0), |n| nome_pow(w, (n * (n + 1)) as f64))
}

/// `log λ(ω) = ln 16 + iπω + 4 Log Σq^{n(n+1)} − 4 Log θ₃`, holomorphic and
/// single-valued for `Im ω ≥ 0.4`.
pub fn log_lambda(w: C) -> C {
    C::new(16f64.ln(), 0.0) + I * PI * w + 4.0 * pair_series(w).ln() - 4.0 * theta3(w).ln()
}

/// `d/dω log λ = iπ θ₄⁴`.
pub fn dlog_lambda(w: C) -> C {
    I * PI * theta4(w).powu(4)
}

/// `(h, ω_F)` with `ω = h·ω_F` and `ω_F` in the standard fundamental domain.
pub fn reduce_to_f(w: C) -> (ModularElement, C) {
    let mut h = ModularElement::IDENTITY;
    let mut z = w;
    for _ in 0..100_000 {
        let n = z.re.round();
        if n != 0.0 {
            z -= n;
            h = h.mul(&ModularElement::translation(n as i64)).expect("frame overflow");
        }
        if z.norm_sqr() < 1.0 - 1e-14 {
            z = -1.0 / z;
            h = h.mul(&ModularElement::S).expect("frame overflow");
        } else {
            break;
        }
    }
    (h, z)
}

pub fn hyperbolic_distance(z: C, w: C) -> f64 {
    2.0 * ((z - w).norm() / (2.0 * (z.im * w.im).sqrt())).asinh()
}

/// The six anharmonic maps permuting `{0, 1, ∞}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Anh {
    Id,
    OneMinus,
    Inv,
    XOverXm1,
    OneOverOneMinus,
    XMinus1OverX,
}

/// `Log(1 − e^u)`, accurate when `e^u` is small.
fn log1m_exp(u: C) -> C {
    let x = u.exp();
    log1m(x)
}

/// `Log(1 − x)` with a series for small `x`.
pub fn log1m(x: C) -> C {
    if x.norm() < 1e-3 {
        let mut acc = C::new(0.0, 0.0);
        let mut p = x;
        for k in 1..12 {
            acc -= p / k as f64;
            p *= x;
        }
        acc
    } else {
        (1.0 - x).ln()
    }
}

impl Anh {
    pub const ALL: [Anh; 6] = [
        Anh::Id,
        Anh::OneMinus,
        Anh::Inv,
        Anh::XOverXm1,
        Anh::OneOverOneMinus,
        Anh::XMinus1OverX,
    ];

    /// Sphere action; `None` is infinity.
    pub fn apply(self, x: Option<C>) -> Option<C> {
        let one = C::new(1.0, 0.0);
        let div = |n: C, d: C| if d.norm() == 0.0 { None } else { Some(n / d) };
        match (self, x) {
            (Anh::Id, x) => x,
            (Anh::OneMinus, Some(x)) => Some(one - x),
            (Anh::OneMinus, None) => None,
            (Anh::Inv, Some(x)) => div(one, x),
            (Anh::Inv, None) => Some(C::new(0.0, 0.0)),
            (Anh::XOverXm1, Some(x)) => div(x, x - one),
            (Anh::XOverXm1, None) => Some(one),
            (Anh::OneOverOneMinus, Some(x)) => div(one, one - x),
            (Anh::OneOverOneMinus, None) => Some(C::new(0.0, 0.0)),
            (Anh::XMinus1OverX, Some(x)) => div(x - one, x),
            (Anh::XMinus1OverX, None) => Some(one),
        }
    }

    /// `Log ψ(e^u)` modulo `2πi`, stable for very negative `Re u`.
    pub fn log_apply(self, u: C) -> C {
        let ipi = I * PI;
        match self {
            Anh::Id => u,
            Anh::OneMinus => log1m_exp(u),
            Anh::Inv => -u,
            Anh::XOverXm1 => u + ipi - log1m_exp(u),
            Anh::OneOverOneMinus => -log1m_exp(u),
            Anh::XMinus1OverX => ipi + log1m_exp(u) - u,
        }
    }

    /// Where `0` goes.
    pub fn at_zero(self) -> PunctureLabel {
        match self {
            Anh::Id | Anh::XOverXm1 => PunctureLabel::Zero,
            Anh::OneMinus | Anh::OneOverOneMinus => PunctureLabel::One,
            Anh::Inv | Anh::XMinus1OverX => PunctureLabel::Infinity,
        }
    }

    pub fn fixes_zero(self) -> bool {
        self.at_zero() == PunctureLabel::Zero
    }

    fn identify(f: impl Fn(Option<C>) -> Option<C>) -> Anh {
        let probe = [C::new(0.3, 0.17), C::new(-1.4, 0.6)];
        *Anh::ALL
            .iter()
            .find(|a| {
                probe.iter().all(|&x| match (a.apply(Some(x)), f(Some(x))) {
                    (Some(u), Some(v)) => (u - v).norm() < 1e-9,
                    _ => false,
                })
            })
            .expect("anharmonic composition")
    }

    /// `self ∘ o`
    pub fn compose(self, o: Anh) -> Anh {
        static TABLE: OnceLock<[[Anh; 6]; 6]> = OnceLock::new();
        let t = TABLE.get_or_init(|| {
            let mut t = [[Anh::Id; 6]; 6];
            for (i, a) in Anh::ALL.iter().enumerate() {
                for (j, b) in Anh::ALL.iter().enumerate() {
                    t[i][j] = Anh::identify(|x| a.apply(b.apply(x)));
                }
            }
            t
        });
        t[self as usize][o as usize]
    }

    pub fn inverse(self) -> Anh {
        *Anh::ALL.iter().find(|b| self.compose(**b) == Anh::Id).unwrap()
    }

    /// The map `ψ_g` with `λ(gτ) = ψ_g(λ(τ))`.
    pub fn of_modular(g: &ModularElement) -> Anh {
        static TABLE: OnceLock<Vec<([i64; 4], Anh)>> = OnceLock::new();
        let t = TABLE.get_or_init(|| {
            // λ(τ+1) = λ/(λ−1), λ(−1/τ) = 1 − λ
            let gens = [(ModularElement::T, Anh::XOverXm1), (ModularElement::S, Anh::OneMinus)];
            let key = |m: &ModularElement| [m.a, m.b, m.c, m.d].map(|x| x.rem_euclid(2));
            let mut seen = vec![(key(&ModularElement::IDENTITY), Anh::Id)];
            let mut queue = vec![(ModularElement::IDENTITY, Anh::Id)];
            while let Some((m, psi)) = queue.pop() {
                for (g, pg) in gens {
                    let n = m.mul(&g).unwrap();
                    let k = key(&n);
                    if !seen.iter().any(|(s, _)| *s == k) {
                        let pn = psi.compose(pg);
                        seen.push((k, pn));
                        queue.push((n, pn));
                    }
                }
            }
            seen
        });
        let k = [g.a, g.b, g.c, g.d].map(|x| x.rem_euclid(2));
        // -I is trivial mod 2, so the sign convention does not matter
        t.iter().find(|(s, _)| *s == k).map(|(_, a)| *a).expect("SL(2,Z/2) has six elements")
    }

    pub fn to_map(self) -> RationalMap {
        let r = |n: &[(i64, i64)], d: &[(i64, i64)]| RationalMap::from_ratios(n, d).unwrap();
        match self {
            Anh::Id => r(&[(0, 1), (1, 1)], &[(1, 1)]),
            Anh::OneMinus => r(&[(1, 1), (-1, 1)], &[(1, 1)]),
            Anh::Inv => r(&[(1, 1)], &[(0, 1), (1, 1)]),
            Anh::XOverXm1 => r(&[(0, 1), (1, 1)], &[(-1, 1), (1, 1)]),
            Anh::OneOverOneMinus => r(&[(1, 1)], &[(1, 1), (-1, 1)]),
            Anh::XMinus1OverX => r(&[(-1, 1), (1, 1)], &[(0, 1), (1, 1)]),
        }
    }
}

/// A point of the thrice-punctured sphere as `ψ(e^l)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModuliPoint {
    pub anh: Anh,
    pub l: C,
}

impl ModuliPoint {
    pub fn value(&self) -> Option<C> {
        self.anh.apply(Some(self.l.exp()))
    }

    /// `log` of the value in the chart `χ`, i.e. `Log χ^{-1}(m)`.
    pub fn log_in(&self, chi: Anh) -> C {
        chi.inverse().compose(self.anh).log_apply(self.l)
    }
}

/// `τ = g·ω`, with `Im ω ≥ FRAME_MIN_IM` after normalization.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Framed {
    pub g: ModularElement,
    pub w: C,
}

impl Framed {
    pub fn from_plain(tau: C) -> Result<Framed> {
        if !(tau.im > MIN_IM) || !tau.re.is_finite() {
            return Err(CoverError::InvalidPoint(format!("{tau}")));
        }
        Ok(Framed { g: ModularElement::IDENTITY, w: tau }.normalized())
    }

    pub fn new(g: ModularElement, w: C) -> Framed {
        Framed { g, w }.normalized()
    }

    pub fn normalized(self) -> Framed {
        if self.w.im >= FRAME_MIN_IM {
            return self;
        }
        let (h, wf) = reduce_to_f(self.w);
        Framed { g: self.g.mul(&h).expect("frame overflow"), w: wf }
    }

    pub fn plain(&self) -> C {
        self.g.apply_c64(self.w)
    }

    /// Coordinates of this point in the frame `g2`.
    pub fn coords_in(&self, g2: &ModularElement) -> C {
        if *g2 == self.g {
            return self.w;
        }
        let h = g2.inverse().mul(&self.g).expect("frame overflow");
        h.apply_c64(self.w)
    }

    pub fn distance(&self, o: &Framed) -> f64 {
        hyperbolic_distance(self.w, o.coords_in(&self.g))
    }

    pub fn moduli(&self) -> ModuliPoint {
        ModuliPoint { anh: Anh::of_modular(&self.g), l: log_lambda(self.w) }
    }

    /// The cusp whose horoball `B_t` contains this point, found by reduction in the frame.
    pub fn cusp_region(&self, t: f64) -> Option<Cusp> {
        let (h, wf) = reduce_to_f(self.w);
        if wf.im > 1.0 / t {
            let g = self.g.mul(&h).expect("frame overflow");
            Some(moebius_apply(&g, Cusp::INFINITY).expect("cusp overflow"))
        } else {
            None
        }
    }

    /// Height of the point in the frame of its cusp region.
    pub fn reduced_height(&self) -> f64 {
        reduce_to_f(self.w).1.im
    }
}

/// `λ(τ)`; `None` never occurs for valid input but keeps the sphere type.
pub fn lambda(tau: C) -> Result<Option<C>> {
    Ok(Framed::from_plain(tau)?.moduli().value())
}

/// Newton target for the lift: a plain sphere value or a log chart `κ(e^u)`.
#[derive(Clone, Copy, Debug)]
pub enum LiftTarget {
    Plain(Option<C>),
    Chart { kappa: Anh, u: C },
}

impl LiftTarget {
    /// `Log ψ^{-1}(target)`.
    pub(crate) fn log_in(&self, psi: Anh) -> Option<C> {
        match *self {
            LiftTarget::Plain(w) => {
                let x = psi.inverse().apply(w)?;
                if x.norm() == 0.0 || !x.re.is_finite() {
                    None
                } else {
                    Some(x.ln())
                }
            }
            LiftTarget::Chart { kappa, u } => Some(psi.inverse().compose(kappa).log_apply(u)),
        }
    }
}

/// Solve `λ(τ) = target` by Newton on `log λ` from `start`, re-framing as needed.
/// The `2πik` branch is the one nearest to the current value, so a converged
/// result is the continuation of `start` when the target moved little.
/// `max_jump` bounds the hyperbolic excursion from `start`.
pub fn lift_newton(target: &LiftTarget, start: Framed, max_jump: f64) -> Result<(Framed, C)> {
    let mut p = start.normalized();
    let mut lam = log_lambda(p.w);
    let mut last = f64::INFINITY;
    for it in 0..80 {
        let psi = Anh::of_modular(&p.g);
        let t = target.log_in(psi).ok_or_else(|| CoverError::LiftBroken {
            s: 0.0,
            reason: "target at a puncture of the current frame".into(),
        })?;
        let k = ((lam.im - t.im) / (2.0 * PI)).round();
        let tk = t + I * (2.0 * PI * k);
        let r = lam - tk;
        let tol = 4e-15 * (1.0 + tk.norm());
        last = r.norm();
        if last < tol {
            return Ok((p, lam));
        }
        let mut step = r / dlog_lambda(p.w);
        if step.norm() > 0.5 * p.w.im {
            step *= 0.5 * p.w.im / step.norm();
        }
        let w_new = p.w - step;
        if (w_new - p.w).norm() <= 1e-16 * p.w.norm() && last < 1e3 * tol {
            return Ok((p, lam));
        }
        p = Framed { g: p.g, w: w_new }.normalized();
        lam = log_lambda(p.w);
        if p.distance(&start) > max_jump {
            return Err(CoverError::NoConvergence { iterations: it + 1, residual: last });
        }
    }
    Err(CoverError::NoConvergence { iterations: 80, residual: last })
}

/// Local inverse of λ near `guess`.
pub fn lambda_inverse_local(m: C, guess: C) -> Result<C> {
    let start = Framed::from_plain(guess)?;
    let (p, _) = lift_newton(&LiftTarget::Plain(Some(m)), start, 4.0)?;
    let tau = p.plain();
    let v = lambda(tau)?.unwrap_or(C::new(f64::INFINITY, 0.0));
    let residual = (v - m).norm();
    if residual < 1e-10 * m.norm().max(1.0) {
        Ok(tau)
    } else {
        Err(CoverError::NoConvergence { iterations: 80, residual })
    }
}

/// The element `γ ∈ Γ(2)` with `γ·τ1 = τ2` for two points with equal λ.
pub fn deck_transformation(tau1: C, tau2: C) -> Option<ModularElement> {
    let (h1, f1) = reduce_to_f(tau1);
    let (h2, f2) = reduce_to_f(tau2);
    if (f1 - f2).norm() > 1e-6 {
        return None;
    }
    let g = h2.mul(&h1.inverse()).ok()?;
    if g.in_gamma2() {
        Some(g)
    } else {
        None
    }
}

/// Preimage of `a` under λ with the largest imaginary part in the strip `|Re τ| ≤ 1`.
pub fn basepoint_for(a: C) -> Result<C> {
    let mut best: Option<C> = None;
    let mut last_err = CoverError::NoConvergence { iterations: 0, residual: f64::INFINITY };
    for i in 0..9 {
        for j in 0..4 {
            let guess = C::new(-1.0 + 0.25 * i as f64, 0.7 + 0.6 * j as f64);
            match lambda_inverse_local(a, guess) {
                Ok(tau) => {
                    // all solutions are Γ(2)-equivalent; keep the highest one
                    let mut t = tau;
                    t.re -= 2.0 * ((t.re + 1.0) / 2.0).floor();
                    if t.re > 1.0 - 1e-12 {
                        t.re -= 2.0;
                    }
                    best = match best {
                        None => Some(t),
                        Some(b) if t.im > b.im + 1e-9 || ((t.im - b.im).abs() <= 1e-9 && t.re < b.re - 1e-9) => Some(t),
                        b => b,
                    };
                }
                Err(e) => last_err = e,
            }
        }
    }
    best.ok_or(last_err)
}
