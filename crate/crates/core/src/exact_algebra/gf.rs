//! Finite fields `F_{p^f}` and polynomial arithmetic / factorization over them.
//!
//! Elements are coefficient vectors of length `f` in the basis `1, z, ..., z^{f-1}`
//! where `z` is a root of the field's defining modulus. Polynomials over the field
//! are vectors of elements, constant term first, with no trailing zero element.

use std::cmp::Ordering;

use num_bigint::BigUint;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// An element of a finite field.
pub type Gf = Vec<u64>;
/// A polynomial over a finite field, constant term first.
pub type GfPoly = Vec<Gf>;

const RNG_SEED: u64 = 0x5eed_f1e1d;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FiniteField {
    p: u64,
    /// Monic modulus over `F_p`, constant term first, length `f + 1`.
    modulus: Vec<u64>,
}

fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn powmod_u64(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1 % p;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, b, p);
        }
        b = mulmod(b, b, p);
        e >>= 1;
    }
    r
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

impl FiniteField {
    /// The prime field `F_p`, represented with modulus `z`.
    pub fn prime(p: u64) -> Self {
        assert!(is_prime(p), "{p} is not prime");
        FiniteField {
            p,
            modulus: vec![0, 1],
        }
    }

    /// Builds `F_p[z]/(modulus)`, checking that the modulus is monic and irreducible.
    pub fn with_modulus(p: u64, modulus: Vec<u64>) -> Result<Self> {
        if !is_prime(p) || p >= 1 << 32 {
            return Err(Error::invalid(format!("{p} is not a supported prime")));
        }
        if modulus.len() < 2 || *modulus.last().unwrap() != 1 {
            return Err(Error::invalid("modulus must be monic of positive degree"));
        }
        let base = FiniteField::prime(p);
        let poly: GfPoly = modulus.iter().map(|&c| vec![c % p]).collect();
        if !base.is_irreducible(&poly) {
            return Err(Error::invalid("modulus is not irreducible"));
        }
        Ok(FiniteField { p, modulus })
    }

    /// `F_{p^f}` with the least irreducible monic modulus of degree `f`,
    /// ordering candidates by the integer `sum c_i p^i` of their lower coefficients.
    pub fn canonical(p: u64, f: usize) -> Self {
        assert!(f >= 1);
        if f == 1 {
            return FiniteField::prime(p);
        }
        let base = FiniteField::prime(p);
        let mut digits = vec![0u64; f];
        loop {
            let poly: GfPoly = digits
                .iter()
                .map(|&c| vec![c])
                .chain(std::iter::once(vec![1]))
                .collect();
            if digits[0] != 0 && base.is_irreducible(&poly) {
                let mut modulus = digits.clone();
                modulus.push(1);
                return FiniteField { p, modulus };
            }
            // increment base-p counter, least significant digit first
            let mut i = 0;
            loop {
                digits[i] += 1;
                if digits[i] < p {
                    break;
                }
                digits[i] = 0;
                i += 1;
                assert!(i < f, "no irreducible polynomial found");
            }
        }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> usize {
        self.modulus.len() - 1
    }

    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    /// Number of elements, `p^f`.
    pub fn order(&self) -> BigUint {
        BigUint::from(self.p).pow(self.degree() as u32)
    }

    pub fn zero(&self) -> Gf {
        vec![0; self.degree()]
    }

    pub fn one(&self) -> Gf {
        self.from_u64(1)
    }

    pub fn from_u64(&self, c: u64) -> Gf {
        let mut v = self.zero();
        v[0] = c % self.p;
        v
    }

    pub fn from_i64(&self, c: i64) -> Gf {
        let p = self.p as i64;
        self.from_u64(c.rem_euclid(p) as u64)
    }

    /// Reduces an arbitrary coefficient vector (in powers of `z`) into the field.
    pub fn from_coeffs(&self, coeffs: &[u64]) -> Gf {
        let f = self.degree();
        let mut v: Vec<u64> = coeffs.iter().map(|&c| c % self.p).collect();
        self.reduce_in_place(&mut v);
        v.resize(f, 0);
        v
    }

    /// The generator `z`.
    pub fn generator(&self) -> Gf {
        self.from_coeffs(&[0, 1])
    }

    fn reduce_in_place(&self, v: &mut Vec<u64>) {
        let f = self.degree();
        while v.len() > f {
            let top = v.pop().unwrap();
            if top == 0 {
                continue;
            }
            let shift = v.len() - f;
            for (i, &m) in self.modulus[..f].iter().enumerate() {
                let t = mulmod(top, m, self.p);
                v[shift + i] = (v[shift + i] + self.p - t) % self.p;
            }
        }
    }

    pub fn is_zero(&self, a: &Gf) -> bool {
        a.iter().all(|&c| c == 0)
    }

    pub fn is_one(&self, a: &Gf) -> bool {
        a[0] == 1 && a[1..].iter().all(|&c| c == 0)
    }

    pub fn add(&self, a: &Gf, b: &Gf) -> Gf {
        a.iter().zip(b).map(|(x, y)| (x + y) % self.p).collect()
    }

    pub fn sub(&self, a: &Gf, b: &Gf) -> Gf {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x + self.p - y) % self.p)
            .collect()
    }

    pub fn neg(&self, a: &Gf) -> Gf {
        a.iter().map(|x| (self.p - x) % self.p).collect()
    }

    pub fn mul(&self, a: &Gf, b: &Gf) -> Gf {
        let f = self.degree();
        if f == 1 {
            return vec![mulmod(a[0], b[0], self.p)];
        }
        let mut prod = vec![0u64; 2 * f - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + mulmod(x, y, self.p)) % self.p;
            }
        }
        self.reduce_in_place(&mut prod);
        prod.resize(f, 0);
        prod
    }

    pub fn scale(&self, a: &Gf, c: u64) -> Gf {
        a.iter().map(|&x| mulmod(x, c, self.p)).collect()
    }

    pub fn pow(&self, a: &Gf, e: &BigUint) -> Gf {
        let mut result = self.one();
        let bits = e.bits();
        for i in (0..bits).rev() {
            result = self.mul(&result, &result);
            if e.bit(i) {
                result = self.mul(&result, a);
            }
        }
        result
    }

    pub fn pow_u64(&self, a: &Gf, e: u64) -> Gf {
        self.pow(a, &BigUint::from(e))
    }

    pub fn inv(&self, a: &Gf) -> Option<Gf> {
        if self.is_zero(a) {
            return None;
        }
        if self.degree() == 1 {
            return Some(vec![powmod_u64(a[0], self.p - 2, self.p)]);
        }
        let e = self.order() - BigUint::from(2u32);
        Some(self.pow(a, &e))
    }

    pub fn div(&self, a: &Gf, b: &Gf) -> Option<Gf> {
        self.inv(b).map(|bi| self.mul(a, &bi))
    }

    pub fn frobenius(&self, a: &Gf) -> Gf {
        self.pow_u64(a, self.p)
    }

    /// Enumerates every element (only sensible for small fields).
    pub fn elements(&self) -> Vec<Gf> {
        let f = self.degree();
        let total = (self.p as usize).pow(f as u32);
        (0..total)
            .map(|mut n| {
                (0..f)
                    .map(|_| {
                        let d = (n % self.p as usize) as u64;
                        n /= self.p as usize;
                        d
                    })
                    .collect()
            })
            .collect()
    }

    pub fn random(&self, rng: &mut impl Rng) -> Gf {
        (0..self.degree()).map(|_| rng.gen_range(0..self.p)).collect()
    }

    // ---- polynomials over the field ----

    pub fn poly_trim(&self, mut a: GfPoly) -> GfPoly {
        while a.last().is_some_and(|c| self.is_zero(c)) {
            a.pop();
        }
        a
    }

    pub fn poly_degree(a: &GfPoly) -> Option<usize> {
        a.len().checked_sub(1)
    }

    pub fn poly_const(&self, c: Gf) -> GfPoly {
        self.poly_trim(vec![c])
    }

    pub fn poly_x(&self) -> GfPoly {
        vec![self.zero(), self.one()]
    }

    pub fn poly_add(&self, a: &GfPoly, b: &GfPoly) -> GfPoly {
        let n = a.len().max(b.len());
        let z = self.zero();
        let out = (0..n)
            .map(|i| self.add(a.get(i).unwrap_or(&z), b.get(i).unwrap_or(&z)))
            .collect();
        self.poly_trim(out)
    }

    pub fn poly_sub(&self, a: &GfPoly, b: &GfPoly) -> GfPoly {
        let n = a.len().max(b.len());
        let z = self.zero();
        let out = (0..n)
            .map(|i| self.sub(a.get(i).unwrap_or(&z), b.get(i).unwrap_or(&z)))
            .collect();
        self.poly_trim(out)
    }

    pub fn poly_mul(&self, a: &GfPoly, b: &GfPoly) -> GfPoly {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![self.zero(); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            if self.is_zero(x) {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                let t = self.mul(x, y);
                out[i + j] = self.add(&out[i + j], &t);
            }
        }
        self.poly_trim(out)
    }

    pub fn poly_scale(&self, a: &GfPoly, c: &Gf) -> GfPoly {
        self.poly_trim(a.iter().map(|x| self.mul(x, c)).collect())
    }

    pub fn poly_monic(&self, a: &GfPoly) -> GfPoly {
        match a.last() {
            None => Vec::new(),
            Some(lc) => {
                let inv = self.inv(lc).expect("nonzero leading coefficient");
                self.poly_scale(a, &inv)
            }
        }
    }

    /// Quotient and remainder; panics on a zero divisor.
    pub fn poly_divrem(&self, a: &GfPoly, b: &GfPoly) -> (GfPoly, GfPoly) {
        assert!(!b.is_empty(), "division by zero polynomial");
        let db = b.len() - 1;
        let lc_inv = self.inv(b.last().unwrap()).unwrap();
        let mut r = a.clone();
        if r.len() <= db {
            return (Vec::new(), r);
        }
        let mut q = vec![self.zero(); r.len() - db];
        while r.len() > db {
            let k = r.len() - 1 - db;
            let c = self.mul(r.last().unwrap(), &lc_inv);
            for (i, bc) in b.iter().enumerate() {
                let t = self.mul(&c, bc);
                r[k + i] = self.sub(&r[k + i], &t);
            }
            q[k] = c;
            r.pop();
            r = self.poly_trim(r);
        }
        (self.poly_trim(q), r)
    }

    pub fn poly_rem(&self, a: &GfPoly, b: &GfPoly) -> GfPoly {
        self.poly_divrem(a, b).1
    }

    pub fn poly_div_exact(&self, a: &GfPoly, b: &GfPoly) -> GfPoly {
        let (q, r) = self.poly_divrem(a, b);
        debug_assert!(r.is_empty());
        q
    }

    /// Monic gcd (zero if both inputs are zero).
    pub fn poly_gcd(&self, a: &GfPoly, b: &GfPoly) -> GfPoly {
        let (mut a, mut b) = (a.clone(), b.clone());
        while !b.is_empty() {
            let r = self.poly_rem(&a, &b);
            a = b;
            b = r;
        }
        self.poly_monic(&a)
    }

    pub fn poly_deriv(&self, a: &GfPoly) -> GfPoly {
        let out = a
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| self.scale(c, (i as u64) % self.p))
            .collect();
        self.poly_trim(out)
    }

    pub fn poly_eval(&self, a: &GfPoly, x: &Gf) -> Gf {
        let mut acc = self.zero();
        for c in a.iter().rev() {
            acc = self.add(&self.mul(&acc, x), c);
        }
        acc
    }

    pub fn poly_is_one(&self, a: &GfPoly) -> bool {
        a.len() == 1 && self.is_one(&a[0])
    }

    pub fn poly_powmod(&self, base: &GfPoly, e: &BigUint, m: &GfPoly) -> GfPoly {
        let mut result = self.poly_const(self.one());
        let base = self.poly_rem(base, m);
        for i in (0..e.bits()).rev() {
            result = self.poly_rem(&self.poly_mul(&result, &result), m);
            if e.bit(i) {
                result = self.poly_rem(&self.poly_mul(&result, &base), m);
            }
        }
        result
    }

    /// Applies `c -> c^(p^k)` coefficient-wise.
    fn poly_frobenius_coeffs(&self, a: &GfPoly, k: usize) -> GfPoly {
        let e = BigUint::from(self.p).pow(k as u32);
        a.iter().map(|c| self.pow(c, &e)).collect()
    }

    /// Squarefree decomposition: pairs `(g, m)` with `a = lc * prod g^m`.
    pub fn poly_squarefree(&self, a: &GfPoly) -> Vec<(GfPoly, usize)> {
        let a = self.poly_monic(a);
        let mut out = Vec::new();
        if a.len() <= 1 {
            return out;
        }
        let d = self.poly_deriv(&a);
        if d.is_empty() {
            let root = self.poly_pth_root(&a);
            for (g, m) in self.poly_squarefree(&root) {
                out.push((g, m * self.p as usize));
            }
            return out;
        }
        let mut c = self.poly_gcd(&a, &d);
        let mut w = self.poly_div_exact(&a, &c);
        let mut i = 1;
        while !self.poly_is_one(&w) {
            let y = self.poly_gcd(&w, &c);
            let fac = self.poly_div_exact(&w, &y);
            if !self.poly_is_one(&fac) {
                out.push((fac, i));
            }
            w = y;
            c = self.poly_div_exact(&c, &w);
            i += 1;
        }
        if !self.poly_is_one(&c) {
            let root = self.poly_pth_root(&c);
            for (g, m) in self.poly_squarefree(&root) {
                out.push((g, m * self.p as usize));
            }
        }
        out
    }

    fn poly_pth_root(&self, a: &GfPoly) -> GfPoly {
        let p = self.p as usize;
        let f = self.degree();
        // inverse Frobenius on coefficients is c -> c^(p^(f-1))
        let coeffs: GfPoly = a.iter().step_by(p).cloned().collect();
        self.poly_trim(self.poly_frobenius_coeffs(&coeffs, f - 1))
    }

    /// Distinct-degree factorization of a monic squarefree polynomial.
    fn poly_distinct_degree(&self, a: &GfPoly) -> Vec<(GfPoly, usize)> {
        let q = self.order();
        let x = self.poly_x();
        let mut rest = a.clone();
        let mut h = x.clone();
        let mut out = Vec::new();
        let mut d = 0;
        while rest.len() > 1 {
            d += 1;
            if 2 * d > rest.len() - 1 {
                let deg = rest.len() - 1;
                out.push((rest.clone(), deg));
                break;
            }
            h = self.poly_powmod(&h, &q, &rest);
            let g = self.poly_gcd(&self.poly_sub(&h, &x), &rest);
            if !self.poly_is_one(&g) {
                out.push((g.clone(), d));
                rest = self.poly_div_exact(&rest, &g);
                h = self.poly_rem(&h, &rest);
            }
        }
        out
    }

    /// Equal-degree splitting (Cantor–Zassenhaus; trace map in characteristic 2).
    fn poly_equal_degree(&self, a: &GfPoly, d: usize, rng: &mut ChaCha8Rng) -> Vec<GfPoly> {
        let n = a.len() - 1;
        if n == d {
            return vec![a.clone()];
        }
        let q = self.order();
        loop {
            let r: GfPoly = self.poly_trim((0..n).map(|_| self.random(rng)).collect());
            if r.len() <= 1 {
                continue;
            }
            let b = if self.p == 2 {
                // T(r) = r + r^2 + ... + r^(2^(k d - 1)), k = [F:F_2]
                let steps = self.degree() * d;
                let mut acc = r.clone();
                let mut t = r.clone();
                for _ in 1..steps {
                    t = self.poly_rem(&self.poly_mul(&t, &t), a);
                    acc = self.poly_add(&acc, &t);
                }
                acc
            } else {
                let e = (q.pow(d as u32) - BigUint::one()) >> 1;
                let t = self.poly_powmod(&r, &e, a);
                self.poly_sub(&t, &self.poly_const(self.one()))
            };
            let g = self.poly_gcd(&b, a);
            if g.len() > 1 && g.len() < a.len() {
                let h = self.poly_div_exact(a, &g);
                let mut out = self.poly_equal_degree(&g, d, rng);
                out.extend(self.poly_equal_degree(&self.poly_monic(&h), d, rng));
                return out;
            }
        }
    }

    /// Full factorization into monic irreducibles with multiplicities, in canonical order.
    pub fn poly_factor(&self, a: &GfPoly) -> Vec<(GfPoly, usize)> {
        let mut rng = ChaCha8Rng::seed_from_u64(RNG_SEED);
        let mut out = Vec::new();
        for (sf, m) in self.poly_squarefree(a) {
            for (block, d) in self.poly_distinct_degree(&sf) {
                for g in self.poly_equal_degree(&block, d, &mut rng) {
                    out.push((g, m));
                }
            }
        }
        out.sort_by(|x, y| self.poly_cmp(&x.0, &y.0).then(x.1.cmp(&y.1)));
        out
    }

    /// Total order on polynomials: by degree, then coefficients from the top.
    pub fn poly_cmp(&self, a: &GfPoly, b: &GfPoly) -> Ordering {
        a.len().cmp(&b.len()).then_with(|| {
            for (x, y) in a.iter().rev().zip(b.iter().rev()) {
                let o = x.iter().rev().cmp(y.iter().rev());
                if o != Ordering::Equal {
                    return o;
                }
            }
            Ordering::Equal
        })
    }

    pub fn is_irreducible(&self, a: &GfPoly) -> bool {
        if a.len() < 2 {
            return false;
        }
        let fs = self.poly_factor(a);
        fs.len() == 1 && fs[0].1 == 1
    }

    /// Distinct roots in the field.
    pub fn poly_roots(&self, a: &GfPoly) -> Vec<Gf> {
        let mut roots: Vec<Gf> = self
            .poly_factor(a)
            .into_iter()
            .filter(|(g, _)| g.len() == 2)
            .map(|(g, _)| self.neg(&g[0]))
            .collect();
        roots.sort_by(|x, y| x.iter().rev().cmp(y.iter().rev()));
        roots
    }

    /// Lifts a polynomial with `F_p` coefficients into this field.
    pub fn poly_from_prime(&self, a: &[u64]) -> GfPoly {
        self.poly_trim(a.iter().map(|&c| self.from_u64(c)).collect())
    }

    pub fn format_element(&self, a: &Gf) -> String {
        if self.degree() == 1 {
            a[0].to_string()
        } else {
            let parts: Vec<String> = a.iter().map(|c| c.to_string()).collect();
            format!("({})", parts.join(";"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_moduli() {
        assert_eq!(FiniteField::canonical(5, 2).modulus(), &[2, 0, 1]);
        assert_eq!(FiniteField::canonical(2, 2).modulus(), &[1, 1, 1]);
        assert_eq!(FiniteField::canonical(7, 1).modulus(), &[0, 1]);
        // x^2 + 1 is irreducible mod 7 but x^2 + x + 3 would come later in order
        assert_eq!(FiniteField::canonical(7, 2).modulus(), &[1, 0, 1]);
    }

    #[test]
    fn inverse_and_frobenius() {
        let f = FiniteField::canonical(5, 2);
        for a in f.elements().into_iter().skip(1) {
            let inv = f.inv(&a).unwrap();
            assert!(f.is_one(&f.mul(&a, &inv)));
        }
        let z = f.generator();
        // Frobenius fixes exactly the prime field
        assert_ne!(f.frobenius(&z), z);
        assert_eq!(f.frobenius(&f.from_u64(3)), f.from_u64(3));
    }

    #[test]
    fn factor_x2_plus_1() {
        let f5 = FiniteField::prime(5);
        let g = f5.poly_from_prime(&[1, 0, 1]);
        let fs = f5.poly_factor(&g);
        assert_eq!(fs.len(), 2);
        assert_eq!(f5.poly_roots(&g), vec![vec![2], vec![3]]);
        let f3 = FiniteField::prime(3);
        assert!(f3.is_irreducible(&f3.poly_from_prime(&[1, 0, 1])));
        let f2 = FiniteField::prime(2);
        assert_eq!(f2.poly_factor(&f2.poly_from_prime(&[1, 0, 1])), vec![(vec![vec![1], vec![1]], 2)]);
    }

    #[test]
    fn t2_minus_2_splits_over_f25() {
        let f25 = FiniteField::canonical(5, 2);
        let g = f25.poly_from_prime(&[3, 0, 1]);
        assert_eq!(f25.poly_factor(&g).len(), 2);
        let f5 = FiniteField::prime(5);
        assert!(f5.is_irreducible(&f5.poly_from_prime(&[3, 0, 1])));
    }

    #[test]
    fn factor_products_char_two_and_inseparable() {
        let f4 = FiniteField::canonical(2, 2);
        // x^4 + x = x (x+1)(x^2+x+1) splits completely over F_4
        let g = f4.poly_from_prime(&[0, 1, 0, 0, 1]);
        assert_eq!(f4.poly_roots(&g).len(), 4);
        let f3 = FiniteField::prime(3);
        // (x^3 + 2)^1 = (x + 2)^3 in characteristic 3
        let g = f3.poly_from_prime(&[2, 0, 0, 1]);
        assert_eq!(f3.poly_factor(&g), vec![(vec![vec![2], vec![1]], 3)]);
    }

    #[test]
    fn factorization_reassembles() {
        let f = FiniteField::prime(7);
        let g = f.poly_from_prime(&[3, 1, 4, 1, 5, 2, 6, 1]);
        let mut prod = f.poly_const(f.one());
        for (h, m) in f.poly_factor(&g) {
            for _ in 0..m {
                prod = f.poly_mul(&prod, &h);
            }
        }
        assert_eq!(prod, f.poly_monic(&g));
    }
}
