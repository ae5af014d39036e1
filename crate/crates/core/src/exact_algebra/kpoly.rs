//! Polynomials over a number field, norms, and factorization by the norm method.

use std::fmt;

use super::factor::factor_squarefree;
use super::number_field::{FieldElement, NumberField};
use super::poly::{interpolate, QPoly};
use super::Q;

/// Polynomial over `K`, constant term first, no trailing zeros.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct KPoly {
    field: NumberField,
    coeffs: Vec<FieldElement>,
}

impl KPoly {
    pub fn new(field: &NumberField, mut coeffs: Vec<FieldElement>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        KPoly {
            field: field.clone(),
            coeffs,
        }
    }

    pub fn from_qpoly(field: &NumberField, p: &QPoly) -> Self {
        Self::new(
            field,
            p.coeffs().iter().map(|c| field.from_q(c.clone())).collect(),
        )
    }

    pub fn zero(field: &NumberField) -> Self {
        Self::new(field, Vec::new())
    }

    pub fn constant(c: FieldElement) -> Self {
        let f = c.field().clone();
        Self::new(&f, vec![c])
    }

    pub fn x(field: &NumberField) -> Self {
        Self::new(field, vec![field.zero(), field.one()])
    }

    /// `x - c`.
    pub fn linear_root(c: &FieldElement) -> Self {
        let f = c.field().clone();
        Self::new(&f, vec![-c, f.one()])
    }

    pub fn field(&self) -> &NumberField {
        &self.field
    }

    pub fn coeffs(&self) -> &[FieldElement] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn deg(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn lc(&self) -> FieldElement {
        self.coeffs.last().cloned().unwrap_or_else(|| self.field.zero())
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let inv = self.lc().inv().unwrap();
        self.scale(&inv)
    }

    pub fn scale(&self, c: &FieldElement) -> Self {
        Self::new(&self.field, self.coeffs.iter().map(|a| a * c).collect())
    }

    /// Rational coefficients, when all coefficients are rational.
    pub fn to_qpoly(&self) -> Option<QPoly> {
        self.coeffs
            .iter()
            .map(|c| c.to_rational())
            .collect::<Option<Vec<_>>>()
            .map(QPoly::new)
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        let z = self.field.zero();
        Self::new(
            &self.field,
            (0..n)
                .map(|i| self.coeffs.get(i).unwrap_or(&z) + o.coeffs.get(i).unwrap_or(&z))
                .collect(),
        )
    }

    pub fn sub(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        let z = self.field.zero();
        Self::new(
            &self.field,
            (0..n)
                .map(|i| self.coeffs.get(i).unwrap_or(&z) - o.coeffs.get(i).unwrap_or(&z))
                .collect(),
        )
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero(&self.field);
        }
        // accumulate in Q[x] and reduce once per coefficient
        let mut out = vec![QPoly::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] = &out[i + j] + &(a.repr() * b.repr());
            }
        }
        Self::new(
            &self.field,
            out.into_iter().map(|p| self.field.from_poly(p)).collect(),
        )
    }

    pub fn divrem(&self, d: &Self) -> (Self, Self) {
        assert!(!d.is_zero(), "division by zero polynomial");
        let mut r = self.coeffs.clone();
        let dn = d.coeffs.len();
        if r.len() < dn {
            return (Self::zero(&self.field), self.clone());
        }
        let inv = d.lc().inv().unwrap();
        let mut q = vec![self.field.zero(); r.len() - dn + 1];
        for k in (0..q.len()).rev() {
            let c = &r[k + dn - 1] * &inv;
            if !c.is_zero() {
                for (j, dj) in d.coeffs.iter().enumerate() {
                    r[k + j] = &r[k + j] - &(&c * dj);
                }
            }
            q[k] = c;
        }
        r.truncate(dn - 1);
        (Self::new(&self.field, q), Self::new(&self.field, r))
    }

    pub fn rem(&self, d: &Self) -> Self {
        self.divrem(d).1
    }

    /// Monic gcd.
    pub fn gcd(&self, o: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            &self.field,
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c.scale(&Q::from_integer((i as i64).into())))
                .collect(),
        )
    }

    pub fn eval(&self, x: &FieldElement) -> FieldElement {
        let mut acc = self.field.zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * x) + c;
        }
        acc
    }

    /// `p(x + c)`.
    pub fn shift_var(&self, c: &FieldElement) -> Self {
        let lin = Self::new(&self.field, vec![c.clone(), self.field.one()]);
        let mut acc = Self::zero(&self.field);
        for a in self.coeffs.iter().rev() {
            acc = acc.mul(&lin).add(&Self::constant(a.clone()));
        }
        acc
    }

    pub fn is_squarefree(&self) -> bool {
        self.gcd(&self.derivative()).deg() == 0
    }

    /// Yun's algorithm over `K`.
    pub fn squarefree_decomposition(&self) -> Vec<(KPoly, usize)> {
        let f = self.monic();
        let mut out = Vec::new();
        if f.deg() == 0 {
            return out;
        }
        let df = f.derivative();
        let mut a = f.gcd(&df);
        let mut b = f.divrem(&a).0;
        let mut c = df.divrem(&a).0;
        let mut d = c.sub(&b.derivative());
        let mut i = 1;
        while b.deg() > 0 {
            a = b.gcd(&d);
            b = b.divrem(&a).0;
            c = d.divrem(&a).0;
            if a.deg() > 0 {
                out.push((a.clone(), i));
            }
            d = c.sub(&b.derivative());
            i += 1;
        }
        out
    }

    /// `N(x) = prod over conjugates of the coefficients`, via interpolation of
    /// element norms at integer points.
    pub fn norm(&self) -> QPoly {
        let n = self.field.degree();
        let d = n * self.deg();
        let points: Vec<(Q, Q)> = (0..=d as i64)
            .map(|x0| {
                let x = Q::from_integer(x0.into());
                let v = self.eval(&self.field.from_q(x.clone()));
                (x, v.norm())
            })
            .collect();
        interpolate(&points)
    }
}

impl fmt::Debug for KPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

fn shift_sequence() -> impl Iterator<Item = i64> {
    (1..).flat_map(|k| [k, -k])
}

/// Monic irreducible factors over `K` of a squarefree polynomial.
pub fn factor_squarefree_over(h: &KPoly) -> Vec<KPoly> {
    let k = h.field().clone();
    let h = h.monic();
    if h.deg() == 0 {
        return Vec::new();
    }
    if h.deg() == 1 {
        return vec![h];
    }
    if k.is_rationals() {
        let q = h.to_qpoly().expect("rational coefficients over Q");
        return factor_squarefree(&q)
            .iter()
            .map(|g| KPoly::from_qpoly(&k, g))
            .collect();
    }
    let theta = k.generator();
    let shifts = std::iter::once(0).chain(shift_sequence());
    for s in shifts.take(64) {
        let st = theta.scale(&Q::from_integer(s.into()));
        let hs = h.shift_var(&-&st);
        let n = hs.norm();
        if !n.is_squarefree() {
            continue;
        }
        let parts = factor_squarefree(&n);
        if parts.len() == 1 {
            return vec![h];
        }
        let mut out: Vec<KPoly> = parts
            .iter()
            .map(|nj| hs.gcd(&KPoly::from_qpoly(&k, nj)).shift_var(&st))
            .filter(|g| g.deg() > 0)
            .collect();
        out.sort_by(|a, b| a.deg().cmp(&b.deg()).then_with(|| a.coeffs.cmp(&b.coeffs)));
        return out;
    }
    unreachable!("a squarefree norm exists for some small shift")
}

/// Factorization over `K` into monic irreducibles with multiplicities.
pub fn factor_over_field(h: &KPoly) -> Vec<(KPoly, usize)> {
    let mut out = Vec::new();
    for (g, m) in h.squarefree_decomposition() {
        for f in factor_squarefree_over(&g) {
            out.push((f, m));
        }
    }
    out
}

/// Distinct roots of a polynomial over `K`, sorted.
pub fn roots_in_field(h: &KPoly) -> Vec<FieldElement> {
    let mut roots: Vec<FieldElement> = factor_over_field(h)
        .into_iter()
        .filter(|(g, _)| g.deg() == 1)
        .map(|(g, _)| -&g.coeffs()[0])
        .collect();
    roots.sort();
    roots.dedup();
    roots
}

/// Distinct roots in `K` of a rational polynomial, using the field's root cache.
pub fn rational_roots_in(k: &NumberField, f: &QPoly) -> Vec<FieldElement> {
    let mut roots = Vec::new();
    for g in factor_squarefree(&f.squarefree_part()) {
        let rs = match k.cached_roots(&g) {
            Some(rs) => rs,
            None => {
                let rs = if g.deg() > k.degree() || !k.degree().is_multiple_of(g.deg()) {
                    Vec::new()
                } else {
                    roots_in_field(&KPoly::from_qpoly(k, &g))
                };
                k.cache_roots(g.clone(), rs.clone());
                rs
            }
        };
        roots.extend(rs);
    }
    roots.sort();
    roots
}
