//! Dense univariate polynomials over exact rationals or complex doubles,
//! and a companion-matrix root finder with Newton polishing.

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Num, One, Zero};

/// Coefficients in increasing degree; trailing zeros are trimmed.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly<T> {
    pub c: Vec<T>,
}

pub type QPoly = Poly<BigRational>;
pub type CPoly = Poly<Complex64>;

impl<T: Num + Clone> Poly<T> {
    pub fn new(mut c: Vec<T>) -> Self {
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        Poly { c }
    }

    pub fn zero() -> Self {
        Poly { c: vec![] }
    }

    pub fn constant(x: T) -> Self {
        Poly::new(vec![x])
    }

    /// `z`
    pub fn x() -> Self {
        Poly::new(vec![T::zero(), T::one()])
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    /// Degree, with `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        if self.c.is_empty() {
            None
        } else {
            Some(self.c.len() - 1)
        }
    }

    pub fn deg_or_zero(&self) -> usize {
        self.degree().unwrap_or(0)
    }

    pub fn coeff(&self, k: usize) -> T {
        self.c.get(k).cloned().unwrap_or_else(T::zero)
    }

    pub fn leading(&self) -> T {
        self.c.last().cloned().unwrap_or_else(T::zero)
    }

    pub fn eval(&self, z: &T) -> T {
        let mut acc = T::zero();
        for a in self.c.iter().rev() {
            acc = acc * z.clone() + a.clone();
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        let mut out = Vec::with_capacity(self.c.len().saturating_sub(1));
        let mut k = T::one();
        for a in self.c.iter().skip(1) {
            out.push(a.clone() * k.clone());
            k = k + T::one();
        }
        Poly::new(out)
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.c.len().max(o.c.len());
        Poly::new((0..n).map(|k| self.coeff(k) + o.coeff(k)).collect())
    }

    pub fn sub(&self, o: &Self) -> Self {
        let n = self.c.len().max(o.c.len());
        Poly::new((0..n).map(|k| self.coeff(k) - o.coeff(k)).collect())
    }

    pub fn scale(&self, s: &T) -> Self {
        Poly::new(self.c.iter().map(|a| a.clone() * s.clone()).collect())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![T::zero(); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            for (j, b) in o.c.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        Poly::new(out)
    }

    pub fn pow(&self, n: usize) -> Self {
        let mut acc = Poly::constant(T::one());
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    /// Coefficients of `z^n p(1/z)`, padding with zeros when `n > deg p`.
    pub fn reversed(&self, n: usize) -> Self {
        let mut out = vec![T::zero(); n + 1];
        for (k, a) in self.c.iter().enumerate() {
            if k <= n {
                out[n - k] = a.clone();
            }
        }
        Poly::new(out)
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn divrem(&self, d: &Self) -> (Self, Self) {
        let dd = d.degree().expect("division by zero polynomial");
        let lead = d.leading();
        let mut r = self.c.clone();
        if r.len() <= dd {
            return (Poly::zero(), self.clone());
        }
        let mut q = vec![T::zero(); r.len() - dd];
        for k in (0..q.len()).rev() {
            let coef = r[k + dd].clone() / lead.clone();
            for (j, b) in d.c.iter().enumerate() {
                r[k + j] = r[k + j].clone() - coef.clone() * b.clone();
            }
            q[k] = coef;
        }
        r.truncate(dd);
        (Poly::new(q), Poly::new(r))
    }

    /// Number of leading zero coefficients, i.e. the order of vanishing at 0.
    pub fn low_order(&self) -> usize {
        self.c.iter().take_while(|a| a.is_zero()).count()
    }

    /// Divide by `z^k`, assuming the low coefficients vanish.
    pub fn shift_down(&self, k: usize) -> Self {
        Poly::new(self.c.iter().skip(k).cloned().collect())
    }

    pub fn map<U: Num + Clone>(&self, f: impl Fn(&T) -> U) -> Poly<U> {
        Poly::new(self.c.iter().map(f).collect())
    }
}

impl QPoly {
    pub fn monic(&self) -> QPoly {
        if self.is_zero() {
            return self.clone();
        }
        let l = self.leading();
        self.scale(&(BigRational::one() / l))
    }

    pub fn gcd(&self, o: &QPoly) -> QPoly {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let (_, r) = a.divrem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Yun's square-free decomposition: returns `(s_i, i)` with `p = lc * prod s_i^i`.
    pub fn squarefree(&self) -> Vec<(QPoly, usize)> {
        let mut out = Vec::new();
        if self.deg_or_zero() == 0 {
            return out;
        }
        let dp = self.derivative();
        let a0 = self.gcd(&dp);
        let mut b = self.divrem(&a0).0;
        let mut c = dp.divrem(&a0).0;
        let mut d = c.sub(&b.derivative());
        let mut i = 1;
        loop {
            let a = b.gcd(&d);
            if a.deg_or_zero() > 0 {
                out.push((a.clone(), i));
            }
            b = b.divrem(&a).0;
            if b.deg_or_zero() == 0 {
                break;
            }
            c = d.divrem(&a).0;
            d = c.sub(&b.derivative());
            i += 1;
        }
        out
    }

    pub fn to_complex(&self) -> CPoly {
        self.map(|a| Complex64::new(rat_to_f64(a), 0.0))
    }

    pub fn divides(&self, o: &QPoly) -> bool {
        o.divrem(self).1.is_zero()
    }
}

pub fn rat_to_f64(a: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    a.to_f64().unwrap_or(f64::NAN)
}

impl CPoly {
    pub fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut p = Complex64::zero();
        let mut dp = Complex64::zero();
        for a in self.c.iter().rev() {
            dp = dp * z + p;
            p = p * z + a;
        }
        (p, dp)
    }

    /// Drop coefficients that are negligible against the largest one.
    pub fn cleaned(&self, rel: f64) -> CPoly {
        let m = self.c.iter().map(|a| a.norm()).fold(0.0, f64::max);
        Poly::new(
            self.c
                .iter()
                .map(|a| if a.norm() <= rel * m { Complex64::zero() } else { *a })
                .collect(),
        )
    }

    /// All roots with multiplicity: companion eigenvalues, then Newton polishing.
    pub fn roots(&self) -> Vec<Complex64> {
        let Some(n) = self.degree() else { return vec![] };
        if n == 0 {
            return vec![];
        }
        // roots at 0 are exact; a nilpotent companion matrix stalls the QR iteration
        let k = self.low_order();
        if k > 0 {
            let mut out = vec![Complex64::zero(); k];
            out.extend(self.shift_down(k).roots().into_iter().map(|z| self.polish(z)));
            return out;
        }
        let lead = self.leading();
        if n == 1 {
            return vec![-self.c[0] / lead];
        }
        let mut m = DMatrix::<Complex64>::zeros(n, n);
        for i in 1..n {
            m[(i, i - 1)] = Complex64::one();
        }
        for i in 0..n {
            m[(i, n - 1)] = -self.c[i] / lead;
        }
        let eig = m
            .try_schur(f64::EPSILON, 10_000)
            .and_then(|s| s.eigenvalues())
            .map(|v| v.iter().cloned().collect::<Vec<_>>())
            .unwrap_or_else(|| durand_kerner(self));
        eig.into_iter().map(|z| self.polish(z)).collect()
    }

    /// A few guarded Newton steps; keeps the input if Newton does not improve the residual.
    pub fn polish(&self, z0: Complex64) -> Complex64 {
        let mut z = z0;
        let mut best = self.eval(&z).norm();
        for _ in 0..8 {
            let (p, dp) = self.eval_with_derivative(z);
            if dp.norm() == 0.0 || p.norm() == 0.0 {
                break;
            }
            let zn = z - p / dp;
            let r = self.eval(&zn).norm();
            if !(r < best) {
                break;
            }
            best = r;
            z = zn;
        }
        z
    }
}

fn durand_kerner(p: &CPoly) -> Vec<Complex64> {
    let n = p.deg_or_zero();
    let lead = p.leading();
    let mono = p.scale(&(Complex64::one() / lead));
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..n).map(|k| seed.powu(k as u32)).collect();
    for _ in 0..500 {
        let mut delta: f64 = 0.0;
        for i in 0..n {
            let mut den = Complex64::one();
            for j in 0..n {
                if i != j {
                    den *= z[i] - z[j];
                }
            }
            let step = mono.eval(&z[i]) / den;
            z[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 {
            break;
        }
    }
    z
}

/// Group nearby values; returns cluster centers with their sizes.
pub fn cluster(points: &[Complex64], tol: f64) -> Vec<(Complex64, usize)> {
    let mut out: Vec<(Complex64, usize, Complex64)> = Vec::new();
    for &z in points {
        if let Some(c) = out.iter_mut().find(|c| (c.0 - z).norm() < tol) {
            c.1 += 1;
            c.2 += z;
            c.0 = c.2 / c.1 as f64;
        } else {
            out.push((z, 1, z));
        }
    }
    out.into_iter().map(|(c, n, _)| (c, n)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_farey::rational;

    fn q(v: &[(i64, i64)]) -> QPoly {
        Poly::new(v.iter().map(|&(n, d)| rational(n, d)).collect())
    }

    #[test]
    fn divrem_roundtrip() {
        let a = q(&[(1, 1), (2, 1), (0, 1), (3, 1)]);
        let b = q(&[(1, 2), (1, 1)]);
        let (qq, r) = a.divrem(&b);
        assert_eq!(qq.mul(&b).add(&r), a);
    }

    #[test]
    fn squarefree_of_known_product() {
        // (z-1)^3 (z+2)
        let l1 = q(&[(-1, 1), (1, 1)]);
        let l2 = q(&[(2, 1), (1, 1)]);
        let p = l1.pow(3).mul(&l2);
        let sf = p.squarefree();
        assert_eq!(sf, vec![(l2.monic(), 1), (l1.monic(), 3)]);
    }

    #[test]
    fn roots_of_cubic() {
        let p = CPoly::new(vec![
            Complex64::new(-6.0, 0.0),
            Complex64::new(11.0, 0.0),
            Complex64::new(-6.0, 0.0),
            Complex64::new(1.0, 0.0),
        ]);
        let mut r: Vec<f64> = p.roots().iter().map(|z| z.re).collect();
        r.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (x, want) in r.iter().zip([1.0, 2.0, 3.0]) {
            assert!((x - want).abs() < 1e-12);
        }
    }

    #[test]
    fn double_root_clusters() {
        let l = CPoly::new(vec![Complex64::new(-0.5, 0.0), Complex64::one()]);
        let p = l.mul(&l).mul(&CPoly::new(vec![Complex64::new(3.0, 0.0), Complex64::one()]));
        let cl = cluster(&p.roots(), 1e-7);
        assert_eq!(cl.len(), 2);
        assert!(cl.iter().any(|(z, n)| *n == 2 && (z - 0.5).norm() < 1e-7));
    }
}
