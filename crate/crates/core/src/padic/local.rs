//! Local data of a number field at a rational prime `p`: a `p`-maximal order
//! (Round 2), the primes above `p` as ideals of `O/pO`, and per-prime valuation and
//! residue data.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exact_algebra::gf::{FiniteField, Gf, GfPoly};
use crate::exact_algebra::linalg::{
    fp_in_span, fp_kernel, fp_solve_modulo, fp_span_basis, q_inverse, q_row_times, QMatrix,
};
use crate::exact_algebra::{FieldElement, NumberField, QPoly, Q};

type FpVec = Vec<u64>;

/// One prime `P` above `p`.
#[derive(Debug)]
pub struct PrimeData {
    /// RREF basis of `P / pO` in order coordinates.
    pub pbar: Vec<FpVec>,
    pub e: u32,
    pub f: usize,
    /// `beta * P ⊆ pO`, `beta ∉ pO`; then `x ∈ P` iff `x beta / p ∈ O`.
    beta: Vec<BigInt>,
    /// Lift of the idempotent of `P` in `O/pO`.
    idem: Vec<BigInt>,
    pub residue_field: FiniteField,
    /// Residues of the order basis in the canonical residue field.
    images: Vec<Gf>,
    /// Residue of the field generator.
    pub fingerprint: Gf,
}

/// A `p`-maximal order and the primes above `p`, in canonical order.
#[derive(Debug)]
pub struct LocalData {
    pub p: u64,
    field: NumberField,
    /// Rows: order basis in power-basis coordinates.
    basis: QMatrix,
    basis_inv: QMatrix,
    /// `b_i b_j = sum_k mult[i][j][k] b_k`.
    mult: Vec<Vec<Vec<BigInt>>>,
    pub primes: Vec<PrimeData>,
}

static CACHE: OnceLock<Mutex<HashMap<(QPoly, u64), Arc<LocalData>>>> = OnceLock::new();

/// Cached local data of `field` at `p`.
pub fn local_data(field: &NumberField, p: u64) -> Result<Arc<LocalData>> {
    if !crate::exact_algebra::gf::is_prime(p) || p >= 1 << 31 {
        return Err(Error::invalid(format!("{p} is not a supported prime")));
    }
    let key = (field.minpoly().clone(), p);
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(d) = cache.lock().unwrap().get(&key) {
        return Ok(d.clone());
    }
    let d = Arc::new(LocalData::compute(field, p)?);
    cache.lock().unwrap().insert(key, d.clone());
    Ok(d)
}

pub(crate) fn q_mod_p(q: &Q, p: u64) -> Option<u64> {
    let pb = BigInt::from(p);
    let den = q.denom().mod_floor(&pb).to_u64().unwrap();
    if den == 0 {
        return None;
    }
    let num = q.numer().mod_floor(&pb).to_u64().unwrap();
    Some(num * inv_mod(den, p) % p)
}

fn inv_mod(a: u64, p: u64) -> u64 {
    let r = BigInt::from(a).modpow(&BigInt::from(p - 2), &BigInt::from(p));
    r.to_u64().unwrap()
}

fn v_p_int(n: &BigInt, p: &BigInt) -> u32 {
    if n.is_zero() {
        return u32::MAX;
    }
    let mut n = n.clone();
    let mut k = 0;
    while (&n % p).is_zero() {
        n /= p;
        k += 1;
    }
    k
}

/// Hermite normal form row basis of the lattice spanned by rational vectors.
fn lattice_basis(gens: &[Vec<Q>], n: usize) -> QMatrix {
    let den = gens
        .iter()
        .flatten()
        .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
    let mut rows: Vec<Vec<BigInt>> = gens
        .iter()
        .map(|g| g.iter().map(|q| (q * Q::from_integer(den.clone())).to_integer()).collect())
        .collect();
    let mut r = 0;
    for col in 0..n {
        loop {
            let piv = (r..rows.len())
                .filter(|&i| !rows[i][col].is_zero())
                .min_by_key(|&i| rows[i][col].abs());
            let Some(pi) = piv else { break };
            rows.swap(r, pi);
            let mut done = true;
            for i in r + 1..rows.len() {
                if !rows[i][col].is_zero() {
                    let q = rows[i][col].div_floor(&rows[r][col]);
                    let pr = rows[r].clone();
                    for (x, y) in rows[i].iter_mut().zip(&pr) {
                        *x -= &q * y;
                    }
                    if !rows[i][col].is_zero() {
                        done = false;
                    }
                }
            }
            if done {
                break;
            }
        }
        if r < rows.len() && !rows[r][col].is_zero() {
            if rows[r][col].is_negative() {
                for x in rows[r].iter_mut() {
                    *x = -x.clone();
                }
            }
            for i in 0..r {
                let q = rows[i][col].div_floor(&rows[r][col]);
                if !q.is_zero() {
                    let pr = rows[r].clone();
                    for (x, y) in rows[i].iter_mut().zip(&pr) {
                        *x -= &q * y;
                    }
                }
            }
            r += 1;
        }
    }
    rows.truncate(r);
    rows.into_iter()
        .map(|row| row.into_iter().map(|x| Q::new(x, den.clone())).collect())
        .collect()
}

/// `F_p`-algebra `O/pO` given by structure constants.
struct Algebra {
    p: u64,
    n: usize,
    mult: Vec<Vec<FpVec>>,
    one: FpVec,
}

impl Algebra {
    fn mul(&self, a: &[u64], b: &[u64]) -> FpVec {
        let p = self.p;
        let mut out = vec![0u64; self.n];
        for (i, &ai) in a.iter().enumerate() {
            if ai == 0 {
                continue;
            }
            for (j, &bj) in b.iter().enumerate() {
                if bj == 0 {
                    continue;
                }
                let c = ai * bj % p;
                for (o, &m) in out.iter_mut().zip(&self.mult[i][j]) {
                    *o = (*o + c * m) % p;
                }
            }
        }
        out
    }

    fn pow(&self, a: &[u64], mut e: u64) -> FpVec {
        let mut base = a.to_vec();
        let mut acc = self.one.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    fn unit(&self, i: usize) -> FpVec {
        let mut v = vec![0; self.n];
        v[i] = 1;
        v
    }

    fn sub(&self, a: &[u64], b: &[u64]) -> FpVec {
        a.iter().zip(b).map(|(x, y)| (x + self.p - y) % self.p).collect()
    }

    fn scale(&self, a: &[u64], c: u64) -> FpVec {
        a.iter().map(|x| x * c % self.p).collect()
    }

    /// Kernel of the linear map whose values on the unit vectors are `images`.
    fn kernel_of(&self, images: &[FpVec]) -> Vec<FpVec> {
        let rows = images.first().map_or(0, |v| v.len());
        let m: Vec<FpVec> = (0..rows)
            .map(|r| images.iter().map(|img| img[r]).collect())
            .collect();
        if rows == 0 {
            return (0..self.n).map(|i| self.unit(i)).collect();
        }
        fp_kernel(&m, self.n, self.p)
    }

    /// Nilradical, as the kernel of `x -> x^(p^j)` with `p^j >= n`.
    fn radical(&self) -> Vec<FpVec> {
        let mut q = self.p;
        while (q as usize) < self.n {
            q *= self.p;
        }
        let images: Vec<FpVec> = (0..self.n).map(|i| self.pow(&self.unit(i), q)).collect();
        fp_span_basis(&self.kernel_of(&images), self.n, self.p)
    }

    /// Minimal polynomial of `y` modulo the ideal `j`, over `F_p`, monic.
    fn minpoly_mod(&self, y: &[u64], j: &[FpVec]) -> Vec<u64> {
        let mut powers = vec![self.one.clone()];
        loop {
            let next = self.mul(powers.last().unwrap(), y);
            if let Some(c) = fp_solve_modulo(&powers, j, &next, self.p) {
                let mut mu: Vec<u64> = c.iter().map(|x| (self.p - x) % self.p).collect();
                mu.push(1);
                return mu;
            }
            powers.push(next);
        }
    }

    /// `{y : y^p - y ∈ J}` contains `J`; returns a basis of it.
    fn frobenius_fixed(&self, j: &[FpVec]) -> Vec<FpVec> {
        let phi: Vec<FpVec> = (0..self.n)
            .map(|i| {
                let u = self.unit(i);
                self.sub(&self.pow(&u, self.p), &u)
            })
            .collect();
        // unknowns: a (n) then coefficients on J
        let mut cols = phi;
        cols.extend(j.iter().cloned());
        let rows = self.n;
        let m: Vec<FpVec> = (0..rows).map(|r| cols.iter().map(|c| c[r]).collect()).collect();
        let ker = fp_kernel(&m, cols.len(), self.p);
        let proj: Vec<FpVec> = ker.into_iter().map(|v| v[..self.n].to_vec()).collect();
        fp_span_basis(&proj, self.n, self.p)
    }

    fn ideal_sum(&self, j: &[FpVec], gen: &[u64]) -> Vec<FpVec> {
        let mut vs = j.to_vec();
        for i in 0..self.n {
            vs.push(self.mul(gen, &self.unit(i)));
        }
        fp_span_basis(&vs, self.n, self.p)
    }

    /// Maximal ideals containing the semiprime ideal `j`.
    fn split(&self, j: Vec<FpVec>, out: &mut Vec<Vec<FpVec>>) {
        let fixed = self.frobenius_fixed(&j);
        if fixed.len() - j.len() <= 1 {
            out.push(j);
            return;
        }
        let mut span1 = j.clone();
        span1.push(self.one.clone());
        let span1 = fp_span_basis(&span1, self.n, self.p);
        let y = fixed
            .iter()
            .find(|v| !fp_in_span(&span1, v, self.p))
            .expect("non-scalar fixed element")
            .clone();
        let mu = self.minpoly_mod(&y, &j);
        let fp = FiniteField::prime(self.p);
        let roots = fp.poly_roots(&fp.poly_from_prime(&mu));
        for c in roots {
            let g = self.sub(&y, &self.scale(&self.one, c[0]));
            self.split(self.ideal_sum(&j, &g), out);
        }
    }
}

impl LocalData {
    fn compute(field: &NumberField, p: u64) -> Result<LocalData> {
        let n = field.degree();
        let pq = Q::from_integer(p.into());
        let pb = BigInt::from(p);
        let mut basis: QMatrix = (0..n)
            .map(|i| (0..n).map(|j| if i == j { Q::one() } else { Q::zero() }).collect())
            .collect();
        let disc = field.minpoly().discriminant();
        let maximal_already = v_p_int(disc.numer(), &pb) < 2;
        let (basis_inv, mult, alg) = loop {
            let inv = q_inverse(&basis).ok_or_else(|| Error::invariant("singular order basis"))?;
            let mult = structure_constants(field, &basis, &inv)?;
            let alg = reduce_algebra(&mult, p, n, &basis_inv_one(field, &inv, p));
            if maximal_already {
                break (inv, mult, alg);
            }
            let rad = alg.radical();
            // I = lifts of the radical + pO
            let mut gens: Vec<Vec<Q>> = rad
                .iter()
                .map(|r| q_row_times(&r.iter().map(|&x| Q::from_integer(x.into())).collect::<Vec<_>>(), &basis))
                .collect();
            gens.extend(basis.iter().map(|b| b.iter().map(|x| x * &pq).collect()));
            let ibasis = lattice_basis(&gens, n);
            let iinv = q_inverse(&ibasis).ok_or_else(|| Error::invariant("singular ideal basis"))?;
            let ielems: Vec<FieldElement> = ibasis.iter().map(|b| field.from_coeffs(b.clone())).collect();
            // U/pO: kernel of u -> (u c_k mod pI)_k
            let images: Vec<FpVec> = (0..n)
                .map(|i| {
                    let bi = field.from_coeffs(basis[i].clone());
                    let mut img = Vec::with_capacity(n * n);
                    for c in &ielems {
                        let coords = q_row_times(&field.coords(&(&bi * c)), &iinv);
                        for q in coords {
                            img.push(q_mod_p(&q, p).expect("ideal is a module"));
                        }
                    }
                    img
                })
                .collect();
            let ker = alg.kernel_of(&images);
            if ker.is_empty() {
                break (inv, mult, alg);
            }
            let mut gens = basis.clone();
            for k in ker {
                let lift: Vec<Q> = k.iter().map(|&x| Q::from_integer(x.into()) / &pq).collect();
                gens.push(q_row_times(&lift, &basis));
            }
            basis = lattice_basis(&gens, n);
        };

        let rad = alg.radical();
        let mut maxes = Vec::new();
        alg.split(rad, &mut maxes);
        let mut data = LocalData {
            p,
            field: field.clone(),
            basis,
            basis_inv,
            mult,
            primes: Vec::new(),
        };
        let theta = data.o_coords(&field.generator());
        let theta_mod: FpVec = theta.iter().map(|q| q_mod_p(q, p).unwrap()).collect();
        let count = maxes.len();
        let mut primes = Vec::new();
        for (idx, pbar) in maxes.iter().enumerate() {
            let f = n - pbar.len();
            // beta: annihilator of P/pO
            let images: Vec<FpVec> = (0..n)
                .map(|i| {
                    let u = alg.unit(i);
                    pbar.iter().flat_map(|q| alg.mul(&u, q)).collect()
                })
                .collect();
            let ann = alg.kernel_of(&images);
            let beta: Vec<BigInt> = ann
                .first()
                .ok_or_else(|| Error::invariant("empty annihilator"))?
                .iter()
                .map(|&x| BigInt::from(x))
                .collect();
            let idem = if count == 1 {
                alg.one.iter().map(|&x| BigInt::from(x)).collect()
            } else {
                idempotent(&alg, &maxes, idx)
                    .iter()
                    .map(|&x| BigInt::from(x))
                    .collect()
            };
            let residue_field = FiniteField::canonical(p, f);
            let images = residue_images(&alg, pbar, f, &residue_field, &theta_mod);
            let fingerprint = combine(&residue_field, &images, &theta_mod);
            let mut pd = PrimeData {
                pbar: pbar.clone(),
                e: 0,
                f,
                beta,
                idem,
                residue_field,
                images,
                fingerprint,
            };
            let p_o: Vec<BigInt> = data.o_coords_int(&field.from_q(pq.clone()));
            pd.e = data.divide_out(&pd, p_o);
            primes.push(pd);
        }
        primes.sort_by(|a, b| {
            (a.e, a.f, &a.fingerprint, &a.pbar).cmp(&(b.e, b.f, &b.fingerprint, &b.pbar))
        });
        let total: usize = primes.iter().map(|q| q.e as usize * q.f).sum();
        if total != n {
            return Err(Error::invariant(format!(
                "sum of e*f is {total}, expected {n}"
            )));
        }
        data.primes = primes;
        Ok(data)
    }

    pub fn degree(&self) -> usize {
        self.basis.len()
    }

    pub fn field(&self) -> &NumberField {
        &self.field
    }

    /// Coordinates in the order basis.
    pub fn o_coords(&self, x: &FieldElement) -> Vec<Q> {
        q_row_times(&self.field.coords(x), &self.basis_inv)
    }

    fn o_coords_int(&self, x: &FieldElement) -> Vec<BigInt> {
        self.o_coords(x).into_iter().map(|q| q.to_integer()).collect()
    }

    pub fn from_o_coords(&self, c: &[Q]) -> FieldElement {
        self.field.from_coeffs(q_row_times(c, &self.basis))
    }

    fn mul_int(&self, a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
        let n = self.degree();
        let mut out = vec![BigInt::zero(); n];
        for (i, ai) in a.iter().enumerate() {
            if ai.is_zero() {
                continue;
            }
            for (j, bj) in b.iter().enumerate() {
                if bj.is_zero() {
                    continue;
                }
                let c = ai * bj;
                for (o, m) in out.iter_mut().zip(&self.mult[i][j]) {
                    if !m.is_zero() {
                        *o += &c * m;
                    }
                }
            }
        }
        out
    }

    /// `ord_P` of a nonzero integral element given in order coordinates.
    fn ord_int(&self, pd: &PrimeData, y: &[BigInt]) -> u32 {
        let pb = BigInt::from(self.p);
        let content = y.iter().filter(|c| !c.is_zero()).map(|c| v_p_int(c, &pb)).min().unwrap();
        let scale = pb.pow(content);
        let y: Vec<BigInt> = y.iter().map(|c| c / &scale).collect();
        content * pd.e + self.divide_out(pd, y)
    }

    /// Number of times `y -> y beta / p` stays integral, which is `ord_P(y)`.
    fn divide_out(&self, pd: &PrimeData, mut y: Vec<BigInt>) -> u32 {
        let pb = BigInt::from(self.p);
        let mut k = 0;
        loop {
            let t = self.mul_int(&y, &pd.beta);
            if t.iter().all(|c| (c % &pb).is_zero()) {
                y = t.into_iter().map(|c| c / &pb).collect();
                k += 1;
            } else {
                return k;
            }
        }
    }

    /// `ord_P(x)` (unnormalized, `ord_P(p) = e`); `None` for zero.
    pub fn ord(&self, idx: usize, x: &FieldElement) -> Option<i64> {
        if x.is_zero() {
            return None;
        }
        let c = self.o_coords(x);
        let den = c.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
        let y: Vec<BigInt> = c.iter().map(|q| (q * Q::from_integer(den.clone())).to_integer()).collect();
        let pd = &self.primes[idx];
        let vden = v_p_int(&den, &BigInt::from(self.p)) as i64;
        Some(self.ord_int(pd, &y) as i64 - vden * pd.e as i64)
    }

    /// Residue of an element of the valuation ring; `None` when outside it.
    pub fn residue(&self, idx: usize, x: &FieldElement) -> Option<Gf> {
        let pd = &self.primes[idx];
        if x.is_zero() {
            return Some(pd.residue_field.zero());
        }
        if self.ord(idx, x)? < 0 {
            return None;
        }
        let mut c = self.o_coords(x);
        let pb = BigInt::from(self.p);
        let den = c.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
        let k = v_p_int(&den, &pb);
        if k > 0 {
            // multiply by idem^k to clear p from denominators at the other primes
            let idem: Vec<Q> = pd.idem.iter().map(|b| Q::from_integer(b.clone())).collect();
            let s = self.from_o_coords(&idem);
            let xs = x * &s.pow(k as u64);
            c = self.o_coords(&xs);
        }
        let v: FpVec = c.iter().map(|q| q_mod_p(q, self.p)).collect::<Option<_>>()?;
        Some(combine(&pd.residue_field, &pd.images, &v))
    }

    /// Generators of `P` as a `Z`-module: lifts of `P/pO` together with `p`.
    pub fn prime_generators(&self, idx: usize) -> Vec<FieldElement> {
        let mut out: Vec<FieldElement> = self.primes[idx]
            .pbar
            .iter()
            .map(|r| self.from_o_coords(&r.iter().map(|&x| Q::from_integer(x.into())).collect::<Vec<_>>()))
            .collect();
        out.push(self.field.from_int(self.p as i64));
        out
    }

    /// Index of the prime whose reduction `P/pO` is spanned by the given vectors.
    pub fn find_prime(&self, pbar: &[FpVec]) -> Option<usize> {
        let b = fp_span_basis(pbar, self.degree(), self.p);
        self.primes.iter().position(|q| q.pbar == b)
    }

    /// Reduction mod `p` of `p`-integral order coordinates of `x`.
    pub fn reduce(&self, x: &FieldElement) -> Option<FpVec> {
        self.o_coords(x).iter().map(|q| q_mod_p(q, self.p)).collect()
    }
}

fn basis_inv_one(field: &NumberField, inv: &QMatrix, p: u64) -> FpVec {
    q_row_times(&field.coords(&field.one()), inv)
        .iter()
        .map(|q| q_mod_p(q, p).expect("1 is integral"))
        .collect()
}

fn structure_constants(field: &NumberField, basis: &QMatrix, inv: &QMatrix) -> Result<Vec<Vec<Vec<BigInt>>>> {
    let n = basis.len();
    let elems: Vec<FieldElement> = basis.iter().map(|b| field.from_coeffs(b.clone())).collect();
    let mut out = vec![vec![Vec::new(); n]; n];
    for i in 0..n {
        for j in i..n {
            let c = q_row_times(&field.coords(&(&elems[i] * &elems[j])), inv);
            if c.iter().any(|q| !q.is_integer()) {
                return Err(Error::invariant("order is not closed under multiplication"));
            }
            let c: Vec<BigInt> = c.into_iter().map(|q| q.to_integer()).collect();
            out[i][j] = c.clone();
            out[j][i] = c;
        }
    }
    Ok(out)
}

fn reduce_algebra(mult: &[Vec<Vec<BigInt>>], p: u64, n: usize, one: &FpVec) -> Algebra {
    let pb = BigInt::from(p);
    Algebra {
        p,
        n,
        mult: mult
            .iter()
            .map(|row| {
                row.iter()
                    .map(|v| v.iter().map(|c| c.mod_floor(&pb).to_u64().unwrap()).collect())
                    .collect()
            })
            .collect(),
        one: one.clone(),
    }
}

/// Idempotent of `O/pO` that is `1` at prime `idx` and `0` at the others.
fn idempotent(alg: &Algebra, maxes: &[Vec<FpVec>], idx: usize) -> FpVec {
    let n = alg.n;
    let p = alg.p;
    // intersection of the other maximal ideals
    let mut w: Vec<FpVec> = (0..n).map(|i| alg.unit(i)).collect();
    for (k, m) in maxes.iter().enumerate() {
        if k != idx {
            w = intersect(&w, m, n, p);
        }
    }
    let c = fp_solve_modulo(&w, &maxes[idx], &alg.one, p).expect("Chinese remainder");
    let mut e = vec![0u64; n];
    for (ci, wi) in c.iter().zip(&w) {
        for (x, y) in e.iter_mut().zip(wi) {
            *x = (*x + ci * y) % p;
        }
    }
    // e <- 3e^2 - 2e^3 converges to the lifted idempotent
    for _ in 0..64 {
        let e2 = alg.mul(&e, &e);
        let e3 = alg.mul(&e2, &e);
        let next = alg.sub(&alg.scale(&e2, 3), &alg.scale(&e3, 2));
        if next == e {
            break;
        }
        e = next;
    }
    e
}

fn intersect(a: &[FpVec], b: &[FpVec], n: usize, p: u64) -> Vec<FpVec> {
    // x = sum s_i a_i = sum t_j b_j
    let mut cols: Vec<FpVec> = a.to_vec();
    cols.extend(b.iter().map(|v| v.iter().map(|x| (p - x) % p).collect()));
    let m: Vec<FpVec> = (0..n).map(|r| cols.iter().map(|c| c[r]).collect()).collect();
    let ker = fp_kernel(&m, cols.len(), p);
    let vs: Vec<FpVec> = ker
        .iter()
        .map(|k| {
            let mut v = vec![0u64; n];
            for (s, ai) in k.iter().zip(a) {
                for (x, y) in v.iter_mut().zip(ai) {
                    *x = (*x + s * y) % p;
                }
            }
            v
        })
        .collect();
    fp_span_basis(&vs, n, p)
}

fn combine(ff: &FiniteField, images: &[Gf], v: &[u64]) -> Gf {
    let mut acc = ff.zero();
    for (c, img) in v.iter().zip(images) {
        if *c != 0 {
            acc = ff.add(&acc, &ff.scale(img, *c));
        }
    }
    acc
}

/// Residues of the order basis under the canonical isomorphism `O/P -> F_{p^f}`.
fn residue_images(alg: &Algebra, pbar: &[FpVec], f: usize, ff: &FiniteField, theta: &[u64]) -> Vec<Gf> {
    let n = alg.n;
    let p = alg.p;
    // a generator z of O/P over F_p
    let mut rng = ChaCha8Rng::seed_from_u64(0x0dd5eed);
    let mut cands: Vec<FpVec> = (0..n).map(|i| alg.unit(i)).collect();
    let mut z = None;
    for attempt in 0..10_000 {
        let y = if attempt < cands.len() {
            cands[attempt].clone()
        } else {
            (0..n).map(|_| rng.gen_range(0..p)).collect()
        };
        let mu = alg.minpoly_mod(&y, pbar);
        if mu.len() == f + 1 {
            z = Some((y, mu));
            break;
        }
    }
    cands.clear();
    let (z, mu) = z.expect("residue field has a generator");
    let mut powers = vec![alg.one.clone()];
    for _ in 1..f {
        powers.push(alg.mul(powers.last().unwrap(), &z));
    }
    let lambdas: Vec<FpVec> = (0..n)
        .map(|i| fp_solve_modulo(&powers, pbar, &alg.unit(i), p).expect("powers of z span O/P"))
        .collect();
    let mu_poly: GfPoly = ff.poly_from_prime(&mu);
    let mut best: Option<(Gf, Vec<Gf>)> = None;
    for r in ff.poly_roots(&mu_poly) {
        let rpow: Vec<Gf> = (0..f).map(|k| ff.pow_u64(&r, k as u64)).collect();
        let images: Vec<Gf> = lambdas.iter().map(|l| combine(ff, &rpow, l)).collect();
        let fp = combine(ff, &images, theta);
        let better = match &best {
            None => true,
            Some((bfp, bimg)) => (&fp, &images) < (bfp, bimg),
        };
        if better {
            best = Some((fp, images));
        }
    }
    best.expect("minimal polynomial has a root").1
}
