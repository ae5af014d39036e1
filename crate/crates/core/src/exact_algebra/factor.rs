//! Factorization over `Q`: squarefree decomposition, modular factorization,
//! Hensel lifting and Zassenhaus recombination.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::gf::{is_prime, FiniteField, GfPoly};
use super::poly::QPoly;
use super::Q;
use crate::error::{Error, Result};

/// Factorization `unit * prod factor^mult` with monic irreducible factors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factorization {
    pub unit: Q,
    pub factors: Vec<(QPoly, usize)>,
}

impl Factorization {
    pub fn expand(&self) -> QPoly {
        let mut acc = QPoly::constant(self.unit.clone());
        for (g, m) in &self.factors {
            acc = &acc * &g.pow(*m);
        }
        acc
    }
}

/// Factors a nonzero rational polynomial into monic irreducibles over `Q`.
pub fn factor_over_q(f: &QPoly) -> Result<Factorization> {
    if f.is_zero() {
        return Err(Error::invalid("cannot factor the zero polynomial"));
    }
    let unit = f.lc();
    let mut factors = Vec::new();
    for (g, m) in f.squarefree_decomposition() {
        for h in factor_squarefree(&g) {
            factors.push((h, m));
        }
    }
    factors.sort();
    Ok(Factorization { unit, factors })
}

/// Monic irreducible factors of a squarefree polynomial.
pub fn factor_squarefree(g: &QPoly) -> Vec<QPoly> {
    if g.deg() == 0 {
        return Vec::new();
    }
    if g.deg() == 1 {
        return vec![g.monic()];
    }
    let (_, prim) = g.primitive_part();
    let mut out: Vec<QPoly> = zassenhaus(&prim)
        .into_iter()
        .map(|h| QPoly::from_bigints(&h).monic())
        .collect();
    out.sort();
    out
}

pub fn is_irreducible_over_q(f: &QPoly) -> bool {
    f.deg() >= 1 && f.is_squarefree() && factor_squarefree(f).len() == 1
}

// ---- integer polynomial helpers ----

type ZPoly = Vec<BigInt>;

fn ztrim(mut a: ZPoly) -> ZPoly {
    while a.last().is_some_and(|c| c.is_zero()) {
        a.pop();
    }
    a
}

fn zmul(a: &ZPoly, b: &ZPoly) -> ZPoly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    ztrim(out)
}

fn zsub(a: &ZPoly, b: &ZPoly) -> ZPoly {
    let n = a.len().max(b.len());
    let z = BigInt::zero();
    ztrim(
        (0..n)
            .map(|i| a.get(i).unwrap_or(&z) - b.get(i).unwrap_or(&z))
            .collect(),
    )
}

fn zadd_scaled(a: &ZPoly, b: &ZPoly, s: &BigInt) -> ZPoly {
    let n = a.len().max(b.len());
    let z = BigInt::zero();
    ztrim(
        (0..n)
            .map(|i| a.get(i).unwrap_or(&z) + b.get(i).unwrap_or(&z) * s)
            .collect(),
    )
}

fn zmod(a: &ZPoly, m: &BigInt) -> ZPoly {
    ztrim(a.iter().map(|c| c.mod_floor(m)).collect())
}

fn zsym(a: &ZPoly, m: &BigInt) -> ZPoly {
    let half: BigInt = m >> 1;
    ztrim(
        a.iter()
            .map(|c| {
                let r = c.mod_floor(m);
                if r > half {
                    r - m
                } else {
                    r
                }
            })
            .collect(),
    )
}

fn to_fp(a: &ZPoly, ff: &FiniteField) -> GfPoly {
    let p = BigInt::from(ff.p());
    ff.poly_trim(
        a.iter()
            .map(|c| ff.from_u64(c.mod_floor(&p).to_u64().unwrap()))
            .collect(),
    )
}

fn from_fp(a: &GfPoly) -> ZPoly {
    a.iter().map(|c| BigInt::from(c[0])).collect()
}

fn fp_xgcd(ff: &FiniteField, a: &GfPoly, b: &GfPoly) -> (GfPoly, GfPoly) {
    // returns (s, t) with s a + t b = 1, assuming gcd 1
    let (mut r0, mut r1) = (a.clone(), b.clone());
    let one = ff.poly_const(ff.one());
    let (mut s0, mut s1) = (one.clone(), Vec::new());
    let (mut t0, mut t1) = (Vec::new(), one);
    while !r1.is_empty() {
        let (q, r) = ff.poly_divrem(&r0, &r1);
        r0 = std::mem::replace(&mut r1, r);
        let s = ff.poly_sub(&s0, &ff.poly_mul(&q, &s1));
        s0 = std::mem::replace(&mut s1, s);
        let t = ff.poly_sub(&t0, &ff.poly_mul(&q, &t1));
        t0 = std::mem::replace(&mut t1, t);
    }
    let inv = ff.inv(&r0[0]).unwrap();
    (ff.poly_scale(&s0, &inv), ff.poly_scale(&t0, &inv))
}

/// Lifts `f ≡ g0 * h0 (mod p)` with `g0` monic to a factorization modulo `p^k`.
fn hensel_two(f: &ZPoly, g0: &GfPoly, h0: &GfPoly, ff: &FiniteField, k: u32) -> (ZPoly, ZPoly) {
    let p = BigInt::from(ff.p());
    let (s, t) = fp_xgcd(ff, g0, h0);
    let mut g = from_fp(g0);
    let mut h = from_fp(h0);
    let mut pj = p.clone();
    for _ in 1..k {
        let diff = zsub(f, &zmul(&g, &h));
        let e: ZPoly = diff.iter().map(|c| c / &pj).collect();
        let c = to_fp(&e, ff);
        let tc = ff.poly_mul(&t, &c);
        let (q, dg) = ff.poly_divrem(&tc, g0);
        let dh = ff.poly_add(&ff.poly_mul(&s, &c), &ff.poly_mul(&q, h0));
        g = zadd_scaled(&g, &from_fp(&dg), &pj);
        h = zadd_scaled(&h, &from_fp(&dh), &pj);
        pj *= &p;
    }
    (zmod(&g, &pj), zmod(&h, &pj))
}

/// Multifactor lift: monic factors of `f / lc(f)` modulo `p^k`.
fn hensel_multi(f: &ZPoly, factors: &[GfPoly], ff: &FiniteField, k: u32) -> Vec<ZPoly> {
    let pk = BigInt::from(ff.p()).pow(k);
    if factors.len() == 1 {
        let lc = f.last().unwrap().clone();
        let inv = lc.modinv(&pk).expect("leading coefficient invertible");
        return vec![zmod(&f.iter().map(|c| c * &inv).collect(), &pk)];
    }
    let mid = factors.len() / 2;
    let (left, right) = factors.split_at(mid);
    let prod = |fs: &[GfPoly]| {
        fs.iter()
            .fold(ff.poly_const(ff.one()), |acc, g| ff.poly_mul(&acc, g))
    };
    let g0 = prod(left);
    let lc = to_fp(&vec![f.last().unwrap().clone()], ff);
    let h0 = ff.poly_scale(&prod(right), &lc[0]);
    let (g, h) = hensel_two(f, &g0, &h0, ff, k);
    let mut out = hensel_multi(&g, left, ff, k);
    out.extend(hensel_multi(&h, right, ff, k));
    out
}

fn isqrt_ceil(n: &BigInt) -> BigInt {
    let mut r = n.sqrt();
    if &(&r * &r) < n {
        r += 1;
    }
    r
}

fn divides_exactly(h: &ZPoly, g: &ZPoly) -> Option<ZPoly> {
    let hq = QPoly::from_bigints(h);
    let gq = QPoly::from_bigints(g);
    let (q, r) = hq.divrem(&gq);
    if !r.is_zero() || !q.is_integral() {
        return None;
    }
    Some(q.coeffs().iter().map(|c| c.to_integer()).collect())
}

fn primitive(a: &ZPoly) -> ZPoly {
    let mut g = a.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
    if a.last().is_some_and(|c| c.is_negative()) {
        g = -g;
    }
    a.iter().map(|c| c / &g).collect()
}

/// Irreducible factors (primitive, positive leading coefficient) of a squarefree
/// primitive integer polynomial of degree at least 2.
fn zassenhaus(h: &ZPoly) -> Vec<ZPoly> {
    let n = h.len() - 1;
    let lc = h.last().unwrap().clone();
    let hq = QPoly::from_bigints(h);
    let dh = hq.derivative();

    // pick the good prime with the fewest modular factors among the first few
    let mut best: Option<(FiniteField, Vec<GfPoly>)> = None;
    let mut tried = 0;
    let mut p = 2u64;
    while tried < 8 {
        p += 1;
        if !is_prime(p) || (&lc % BigInt::from(p)).is_zero() {
            continue;
        }
        let ff = FiniteField::prime(p);
        let hp = to_fp(h, &ff);
        let dp = ff.poly_deriv(&hp);
        if dp.is_empty() || !ff.poly_is_one(&ff.poly_gcd(&hp, &dp)) {
            continue;
        }
        tried += 1;
        let fs: Vec<GfPoly> = ff.poly_factor(&hp).into_iter().map(|(g, _)| g).collect();
        if fs.len() == 1 {
            return vec![h.clone()];
        }
        if best.as_ref().is_none_or(|(_, b)| fs.len() < b.len()) {
            best = Some((ff, fs));
        }
    }
    let _ = dh;
    let (ff, modular) = best.expect("some good prime");
    let pbig = BigInt::from(ff.p());

    // Mignotte-style bound on coefficients of any factor, times lc
    let norm_sq: BigInt = h.iter().map(|c| c * c).sum();
    let bound = (BigInt::one() << n) * isqrt_ceil(&norm_sq) * lc.abs() * 2 + 1;
    let mut k = 1u32;
    let mut pk = pbig.clone();
    while pk <= bound {
        pk *= &pbig;
        k += 1;
    }
    let mut lifted = hensel_multi(h, &modular, &ff, k);

    let mut rest = h.clone();
    let mut out = Vec::new();
    let mut s = 1;
    'outer: while 2 * s <= lifted.len() {
        let r = lifted.len();
        let mut idx: Vec<usize> = (0..s).collect();
        loop {
            let lcr = rest.last().unwrap().clone();
            let mut cand = vec![lcr.clone()];
            for &i in &idx {
                cand = zsym(&zmul(&cand, &lifted[i]), &pk);
            }
            let cand = primitive(&zsym(&cand, &pk));
            // constant-term filter before trial division
            let c0_ok = cand[0].is_zero() || (&lcr * &rest[0]) % &cand[0] == BigInt::zero();
            if c0_ok {
                if let Some(q) = divides_exactly(&rest, &cand) {
                    out.push(cand);
                    rest = q;
                    let mut keep = Vec::new();
                    for (i, f) in lifted.into_iter().enumerate() {
                        if !idx.contains(&i) {
                            keep.push(f);
                        }
                    }
                    lifted = keep;
                    continue 'outer;
                }
            }
            // next combination
            let mut i = s;
            loop {
                if i == 0 {
                    s += 1;
                    continue 'outer;
                }
                i -= 1;
                if idx[i] < r - s + i {
                    idx[i] += 1;
                    for j in i + 1..s {
                        idx[j] = idx[j - 1] + 1;
                    }
                    break;
                }
            }
        }
    }
    if rest.len() > 1 {
        out.push(primitive(&rest));
    }
    out
}
