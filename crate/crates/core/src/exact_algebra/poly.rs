//! Dense univariate polynomials over the rationals.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::Q;

/// A polynomial with rational coefficients, constant term first.
///
/// The coefficient vector never ends in a zero; the zero polynomial is empty.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QPoly {
    coeffs: Vec<Q>,
}

impl QPoly {
    pub fn new(mut coeffs: Vec<Q>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        QPoly { coeffs }
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        QPoly::new(coeffs.iter().map(|&c| Q::from_integer(c.into())).collect())
    }

    pub fn from_bigints(coeffs: &[BigInt]) -> Self {
        QPoly::new(coeffs.iter().map(|c| Q::from_integer(c.clone())).collect())
    }

    pub fn zero() -> Self {
        QPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        QPoly::constant(Q::one())
    }

    pub fn x() -> Self {
        QPoly::new(vec![Q::zero(), Q::one()])
    }

    pub fn constant(c: Q) -> Self {
        QPoly::new(vec![c])
    }

    /// `x - c`
    pub fn linear_root(c: Q) -> Self {
        QPoly::new(vec![-c, Q::one()])
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Q> {
        self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Q {
        self.coeffs.get(i).cloned().unwrap_or_else(Q::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Degree, with the zero polynomial reported as 0.
    pub fn deg(&self) -> usize {
        self.degree().unwrap_or(0)
    }

    pub fn lc(&self) -> Q {
        self.coeffs.last().cloned().unwrap_or_else(Q::zero)
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs.last().is_some_and(|c| c.is_one())
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let lc = self.lc();
        self.scale(&(Q::one() / lc))
    }

    pub fn scale(&self, c: &Q) -> Self {
        QPoly::new(self.coeffs.iter().map(|x| x * c).collect())
    }

    pub fn shift(&self, k: usize) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut v = vec![Q::zero(); k];
        v.extend(self.coeffs.iter().cloned());
        QPoly::new(v)
    }

    pub fn eval(&self, x: &Q) -> Q {
        let mut acc = Q::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// `self(other(x))`
    pub fn compose(&self, other: &QPoly) -> QPoly {
        let mut acc = QPoly::zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * other) + &QPoly::constant(c.clone());
        }
        acc
    }

    pub fn derivative(&self) -> QPoly {
        QPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * Q::from_integer(BigInt::from(i)))
                .collect(),
        )
    }

    pub fn pow(&self, e: usize) -> QPoly {
        let mut r = QPoly::one();
        for _ in 0..e {
            r = &r * self;
        }
        r
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn divrem(&self, d: &QPoly) -> (QPoly, QPoly) {
        assert!(!d.is_zero(), "polynomial division by zero");
        let dd = d.deg();
        let lc_inv = Q::one() / d.lc();
        let mut r = self.coeffs.clone();
        if r.len() <= dd {
            return (QPoly::zero(), self.clone());
        }
        let mut q = vec![Q::zero(); r.len() - dd];
        while r.len() > dd {
            let k = r.len() - 1 - dd;
            let c = r.last().unwrap() * &lc_inv;
            if !c.is_zero() {
                for (i, dc) in d.coeffs.iter().enumerate() {
                    r[k + i] -= &c * dc;
                }
            }
            q[k] = c;
            r.pop();
        }
        (QPoly::new(q), QPoly::new(r))
    }

    pub fn rem(&self, d: &QPoly) -> QPoly {
        self.divrem(d).1
    }

    pub fn div_exact(&self, d: &QPoly) -> Option<QPoly> {
        let (q, r) = self.divrem(d);
        r.is_zero().then_some(q)
    }

    /// Monic gcd.
    pub fn gcd(&self, other: &QPoly) -> QPoly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Extended gcd: returns `(g, s, t)` with `s*self + t*other = g`, `g` monic.
    pub fn xgcd(&self, other: &QPoly) -> (QPoly, QPoly, QPoly) {
        let (mut r0, mut r1) = (self.clone(), other.clone());
        let (mut s0, mut s1) = (QPoly::one(), QPoly::zero());
        let (mut t0, mut t1) = (QPoly::zero(), QPoly::one());
        while !r1.is_zero() {
            let (q, r) = r0.divrem(&r1);
            r0 = std::mem::replace(&mut r1, r);
            let s = &s0 - &(&q * &s1);
            s0 = std::mem::replace(&mut s1, s);
            let t = &t0 - &(&q * &t1);
            t0 = std::mem::replace(&mut t1, t);
        }
        if r0.is_zero() {
            return (r0, s0, t0);
        }
        let inv = Q::one() / r0.lc();
        (r0.scale(&inv), s0.scale(&inv), t0.scale(&inv))
    }

    /// Yun's squarefree decomposition of a nonzero polynomial: monic `(g, m)` pairs.
    pub fn squarefree_decomposition(&self) -> Vec<(QPoly, usize)> {
        let f = self.monic();
        let mut out = Vec::new();
        if f.deg() == 0 {
            return out;
        }
        let d = f.derivative();
        let a0 = f.gcd(&d);
        let mut b = f.div_exact(&a0).unwrap();
        let mut c = d.div_exact(&a0).unwrap();
        let mut dd = &c - &b.derivative();
        let mut i = 1;
        while b.deg() > 0 {
            let a = b.gcd(&dd);
            b = b.div_exact(&a).unwrap();
            c = dd.div_exact(&a).unwrap();
            dd = &c - &b.derivative();
            if a.deg() > 0 {
                out.push((a, i));
            }
            i += 1;
        }
        out
    }

    pub fn squarefree_part(&self) -> QPoly {
        if self.is_zero() {
            return QPoly::zero();
        }
        let d = self.derivative();
        self.div_exact(&self.gcd(&d)).unwrap().monic()
    }

    pub fn is_squarefree(&self) -> bool {
        !self.is_zero() && self.gcd(&self.derivative()).deg() == 0
    }

    /// Least common multiple of the coefficient denominators.
    pub fn denominator_lcm(&self) -> BigInt {
        self.coeffs
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()))
    }

    /// Integer content-free polynomial with positive leading coefficient, plus the
    /// rational factor `c` with `self = c * primitive`.
    pub fn primitive_part(&self) -> (Q, Vec<BigInt>) {
        if self.is_zero() {
            return (Q::zero(), Vec::new());
        }
        let l = self.denominator_lcm();
        let ints: Vec<BigInt> = self
            .coeffs
            .iter()
            .map(|c| (c * Q::from_integer(l.clone())).to_integer())
            .collect();
        let mut g = ints.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
        if ints.last().unwrap().is_negative() {
            g = -g;
        }
        let prim: Vec<BigInt> = ints.iter().map(|c| c / &g).collect();
        (Q::new(g, l), prim)
    }

    /// Whether every coefficient is an integer.
    pub fn is_integral(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_integer())
    }

    /// Resultant over the rationals (Euclidean algorithm).
    pub fn resultant(&self, other: &QPoly) -> Q {
        if self.is_zero() || other.is_zero() {
            return Q::zero();
        }
        let (mut a, mut b) = (self.clone(), other.clone());
        let mut res = Q::one();
        loop {
            let da = a.deg();
            let db = b.deg();
            if db == 0 {
                return res * pow_q(&b.lc(), da);
            }
            let r = a.rem(&b);
            if r.is_zero() {
                return Q::zero();
            }
            let dr = r.deg();
            if (da * db) % 2 == 1 {
                res = -res;
            }
            res *= pow_q(&b.lc(), da - dr);
            a = b;
            b = r;
        }
    }

    pub fn discriminant(&self) -> Q {
        let n = self.deg();
        let r = self.resultant(&self.derivative());
        let sign = if (n * (n.saturating_sub(1)) / 2) % 2 == 1 {
            -Q::one()
        } else {
            Q::one()
        };
        sign * r / self.lc()
    }

    /// Polynomial with roots scaled: `c^deg * self(x / c)`, roots multiplied by `c`.
    pub fn scale_roots(&self, c: &Q) -> QPoly {
        let n = self.deg();
        QPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(i, a)| a * pow_q(c, n - i))
                .collect(),
        )
    }
}

/// Lagrange interpolation through points with distinct abscissae.
pub fn interpolate(points: &[(Q, Q)]) -> QPoly {
    let mut acc = QPoly::zero();
    for (i, (xi, yi)) in points.iter().enumerate() {
        if yi.is_zero() {
            continue;
        }
        let mut basis = QPoly::one();
        let mut denom = Q::one();
        for (j, (xj, _)) in points.iter().enumerate() {
            if i != j {
                basis = &basis * &QPoly::linear_root(xj.clone());
                denom *= xi - xj;
            }
        }
        acc = &acc + &basis.scale(&(yi / denom));
    }
    acc
}

pub fn pow_q(b: &Q, e: usize) -> Q {
    let mut r = Q::one();
    for _ in 0..e {
        r *= b;
    }
    r
}

impl<'a> Add<&'a QPoly> for &'a QPoly {
    type Output = QPoly;
    fn add(self, rhs: &QPoly) -> QPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        QPoly::new((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl<'a> Sub<&'a QPoly> for &'a QPoly {
    type Output = QPoly;
    fn sub(self, rhs: &QPoly) -> QPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        QPoly::new((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl<'a> Mul<&'a QPoly> for &'a QPoly {
    type Output = QPoly;
    fn mul(self, rhs: &QPoly) -> QPoly {
        if self.is_zero() || rhs.is_zero() {
            return QPoly::zero();
        }
        let mut out = vec![Q::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        QPoly::new(out)
    }
}

impl Neg for &QPoly {
    type Output = QPoly;
    fn neg(self) -> QPoly {
        QPoly::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl fmt::Display for QPoly {
    /// Bracketed coefficient list, constant term first: `[1, 0, 1]`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "[0]");
        }
        let parts: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        write!(f, "[{}]", parts.join(","))
    }
}
