//! Valuation rings on number fields: the trivial one and the extensions of the
//! `p`-adic valuation, with values, residues, restriction and Galois action.

pub mod local;

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::exact_algebra::gf::{FiniteField, Gf};
use crate::exact_algebra::linalg::{fp_solve_modulo, fp_span_basis};
use crate::exact_algebra::{relative_automorphisms, FieldElement, FieldEmbedding, NumberField, Q};
use local::{local_data, LocalData};

/// Valuation value: lexicographically ordered entries, or `∞` for zero.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ValueVec(Option<Vec<Q>>);

impl ValueVec {
    pub fn infinity() -> Self {
        ValueVec(None)
    }

    pub fn finite(entries: Vec<Q>) -> Self {
        ValueVec(Some(entries))
    }

    pub fn is_infinite(&self) -> bool {
        self.0.is_none()
    }

    pub fn entries(&self) -> Option<&[Q]> {
        self.0.as_deref()
    }

    /// First entry of a finite value.
    pub fn leading(&self) -> Option<&Q> {
        self.0.as_ref().and_then(|v| v.first())
    }

    /// Sign of the value: `Greater` for positive or `∞`.
    pub fn sign(&self) -> Ordering {
        match &self.0 {
            None => Ordering::Greater,
            Some(v) => v
                .iter()
                .find(|q| !q.is_zero())
                .map_or(Ordering::Equal, |q| if q.is_positive() { Ordering::Greater } else { Ordering::Less }),
        }
    }

    pub fn add(&self, other: &ValueVec) -> ValueVec {
        match (&self.0, &other.0) {
            (Some(a), Some(b)) => ValueVec(Some(a.iter().zip(b).map(|(x, y)| x + y).collect())),
            _ => ValueVec(None),
        }
    }
}

impl PartialOrd for ValueVec {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ValueVec {
    fn cmp(&self, other: &Self) -> Ordering {
        match (&self.0, &other.0) {
            (None, None) => Ordering::Equal,
            (None, _) => Ordering::Greater,
            (_, None) => Ordering::Less,
            (Some(a), Some(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for ValueVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            None => write!(f, "inf"),
            Some(v) => {
                let parts: Vec<String> = v.iter().map(crate::exact_algebra::format_rational_short).collect();
                write!(f, "{}", parts.join(","))
            }
        }
    }
}

/// Position of an element relative to a valuation ring.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Membership {
    InMaximalIdeal,
    Unit,
    OutsideRing,
}

impl Membership {
    pub fn in_ring(self) -> bool {
        self != Membership::OutsideRing
    }

    pub fn from_sign(s: Ordering) -> Self {
        match s {
            Ordering::Greater => Membership::InMaximalIdeal,
            Ordering::Equal => Membership::Unit,
            Ordering::Less => Membership::OutsideRing,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ResidueField {
    Finite(FiniteField),
    Number(NumberField),
}

impl ResidueField {
    pub fn characteristic(&self) -> u64 {
        match self {
            ResidueField::Finite(f) => f.p(),
            ResidueField::Number(_) => 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Residue {
    Finite(FiniteField, Gf),
    Number(FieldElement),
}

impl Residue {
    pub fn is_zero(&self) -> bool {
        match self {
            Residue::Finite(_, g) => g.iter().all(|&c| c == 0),
            Residue::Number(x) => x.is_zero(),
        }
    }
}

impl fmt::Display for Residue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Residue::Finite(ff, g) => write!(f, "{}", ff.format_element(g)),
            Residue::Number(x) => write!(f, "{x}"),
        }
    }
}

/// One extension of a `p`-adic valuation to a number field.
#[derive(Clone)]
pub struct PadicPlace {
    field: NumberField,
    data: Arc<LocalData>,
    index: usize,
}

/// A valuation ring on a number field.
#[derive(Clone)]
pub enum ValuationHandle {
    Trivial(NumberField),
    Padic(PadicPlace),
}

impl PartialEq for ValuationHandle {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (ValuationHandle::Trivial(a), ValuationHandle::Trivial(b)) => a == b,
            (ValuationHandle::Padic(a), ValuationHandle::Padic(b)) => {
                a.field == b.field && a.data.p == b.data.p && a.index == b.index
            }
            _ => false,
        }
    }
}

impl Eq for ValuationHandle {}

impl Hash for ValuationHandle {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.field().hash(state);
        if let ValuationHandle::Padic(w) = self {
            w.data.p.hash(state);
            w.index.hash(state);
        }
    }
}

impl PartialOrd for ValuationHandle {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Trivial first, then by prime and canonical sibling position.
impl Ord for ValuationHandle {
    fn cmp(&self, other: &Self) -> Ordering {
        let key = |h: &ValuationHandle| match h {
            ValuationHandle::Trivial(_) => (0, 0),
            ValuationHandle::Padic(w) => (w.data.p, w.index + 1),
        };
        key(self).cmp(&key(other))
    }
}

impl fmt::Debug for ValuationHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for ValuationHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValuationHandle::Trivial(_) => write!(f, "trivial"),
            ValuationHandle::Padic(_) => write!(
                f,
                "padic p={} e={} f={} pin={} k=1 fp={}",
                self.prime().unwrap(),
                self.e(),
                self.f(),
                self.pin().unwrap(),
                self.fingerprint().unwrap()
            ),
        }
    }
}

fn hex_rows(rows: &[Vec<u64>]) -> String {
    if rows.is_empty() {
        return "-".into();
    }
    rows.iter()
        .map(|r| r.iter().map(|x| format!("{x:x}")).collect::<Vec<_>>().join("."))
        .collect::<Vec<_>>()
        .join(":")
}

fn fingerprint_string(g: &Gf) -> String {
    g.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(".")
}

impl ValuationHandle {
    pub fn trivial(k: &NumberField) -> Self {
        ValuationHandle::Trivial(k.clone())
    }

    /// All extensions of `v_p` to `K`, in canonical order `(e, f, fingerprint, pin)`.
    pub fn places_above(k: &NumberField, p: u64) -> Result<Vec<Self>> {
        let data = local_data(k, p)?;
        Ok((0..data.primes.len())
            .map(|index| {
                ValuationHandle::Padic(PadicPlace {
                    field: k.clone(),
                    data: data.clone(),
                    index,
                })
            })
            .collect())
    }

    /// `v_p` on `Q`.
    pub fn padic_on_q(p: u64) -> Result<Self> {
        Ok(Self::places_above(&NumberField::rationals(), p)?.remove(0))
    }

    pub fn field(&self) -> &NumberField {
        match self {
            ValuationHandle::Trivial(k) => k,
            ValuationHandle::Padic(w) => &w.field,
        }
    }

    pub fn is_trivial(&self) -> bool {
        matches!(self, ValuationHandle::Trivial(_))
    }

    pub fn prime(&self) -> Option<u64> {
        match self {
            ValuationHandle::Trivial(_) => None,
            ValuationHandle::Padic(w) => Some(w.data.p),
        }
    }

    /// Residue characteristic (0 for the trivial valuation).
    pub fn residue_characteristic(&self) -> u64 {
        self.prime().unwrap_or(0)
    }

    pub fn e(&self) -> u32 {
        match self {
            ValuationHandle::Trivial(_) => 1,
            ValuationHandle::Padic(w) => w.data.primes[w.index].e,
        }
    }

    pub fn f(&self) -> usize {
        match self {
            ValuationHandle::Trivial(k) => k.degree(),
            ValuationHandle::Padic(w) => w.data.primes[w.index].f,
        }
    }

    pub fn pin(&self) -> Option<String> {
        match self {
            ValuationHandle::Trivial(_) => None,
            ValuationHandle::Padic(w) => Some(hex_rows(&w.data.primes[w.index].pbar)),
        }
    }

    pub fn fingerprint(&self) -> Option<String> {
        match self {
            ValuationHandle::Trivial(_) => None,
            ValuationHandle::Padic(w) => Some(fingerprint_string(&w.data.primes[w.index].fingerprint)),
        }
    }

    pub fn residue_field(&self) -> ResidueField {
        match self {
            ValuationHandle::Trivial(k) => ResidueField::Number(k.clone()),
            ValuationHandle::Padic(w) => ResidueField::Finite(w.data.primes[w.index].residue_field.clone()),
        }
    }

    fn check_field(&self, x: &FieldElement) {
        debug_assert!(x.field() == self.field(), "element of a different field");
    }

    /// `v(x)`, normalized so that `v(p) = 1`.
    pub fn value(&self, x: &FieldElement) -> ValueVec {
        self.check_field(x);
        if x.is_zero() {
            return ValueVec::infinity();
        }
        match self {
            ValuationHandle::Trivial(_) => ValueVec::finite(vec![Q::zero()]),
            ValuationHandle::Padic(w) => {
                let ord = w.data.ord(w.index, x).unwrap();
                let e = w.data.primes[w.index].e as i64;
                ValueVec::finite(vec![Q::new(ord.into(), e.into())])
            }
        }
    }

    pub fn membership(&self, x: &FieldElement) -> Membership {
        Membership::from_sign(self.value(x).sign())
    }

    pub fn residue(&self, x: &FieldElement) -> Result<Residue> {
        self.check_field(x);
        match self {
            ValuationHandle::Trivial(_) => Ok(Residue::Number(x.clone())),
            ValuationHandle::Padic(w) => {
                let ff = w.data.primes[w.index].residue_field.clone();
                w.data
                    .residue(w.index, x)
                    .map(|g| Residue::Finite(ff, g))
                    .ok_or_else(|| Error::precondition("element is outside the valuation ring"))
            }
        }
    }

    /// Ring containment `O_self ⊇ O_other` on the same field.
    pub fn contains(&self, other: &ValuationHandle) -> bool {
        self.field() == other.field() && (self.is_trivial() || self == other)
    }

    /// Image under an automorphism `σ` of the field: the ring `σ(O)`.
    pub fn pushforward(&self, sigma: &FieldEmbedding) -> Result<Self> {
        if sigma.source() != self.field() || sigma.target() != self.field() {
            return Err(Error::invalid("pushforward needs an automorphism of the handle's field"));
        }
        match self {
            ValuationHandle::Trivial(_) => Ok(self.clone()),
            ValuationHandle::Padic(w) => {
                let d = &w.data;
                let mut rows = Vec::new();
                for g in d.prime_generators(w.index) {
                    let img = sigma.apply(&g);
                    rows.push(d.reduce(&img).ok_or_else(|| Error::invariant("image is not p-integral"))?);
                }
                let rows = fp_span_basis(&rows, d.degree(), d.p);
                let index = d
                    .find_prime(&rows)
                    .ok_or_else(|| Error::invariant("image of a prime is not a prime"))?;
                Ok(ValuationHandle::Padic(PadicPlace {
                    field: w.field.clone(),
                    data: d.clone(),
                    index,
                }))
            }
        }
    }

    /// Restriction along `emb: K -> L` of a handle on `L`.
    pub fn restrict(&self, emb: &FieldEmbedding) -> Result<Self> {
        if emb.target() != self.field() {
            return Err(Error::invalid("embedding does not land in the handle's field"));
        }
        let k = emb.source();
        match self {
            ValuationHandle::Trivial(_) => Ok(ValuationHandle::trivial(k)),
            ValuationHandle::Padic(w) => {
                let data = local_data(k, w.data.p)?;
                let hits: Vec<usize> = (0..data.primes.len())
                    .filter(|&i| {
                        data.prime_generators(i)
                            .iter()
                            .all(|g| self.value(&emb.apply(g)).sign() == Ordering::Greater)
                    })
                    .collect();
                if hits.len() != 1 {
                    return Err(Error::invariant("restriction is not a unique prime"));
                }
                Ok(ValuationHandle::Padic(PadicPlace {
                    field: k.clone(),
                    data,
                    index: hits[0],
                }))
            }
        }
    }

    /// Parses `trivial` or `padic p=.. [e=..] [f=..] [pin=..] [k=..] [fp=..]`.
    pub fn parse(text: &str, field: &NumberField) -> Result<Self> {
        let mut words = text.split_whitespace();
        match words.next() {
            Some("trivial") => {
                if words.next().is_some() {
                    return Err(Error::invalid("trailing text after `trivial`"));
                }
                Ok(ValuationHandle::trivial(field))
            }
            Some("padic") => {
                let mut p = None;
                let mut filters: Vec<(String, String)> = Vec::new();
                for w in words {
                    let (key, val) = w
                        .split_once('=')
                        .ok_or_else(|| Error::invalid(format!("expected key=value, got `{w}`")))?;
                    match key {
                        "p" => p = Some(val.parse::<u64>().map_err(|_| Error::invalid(format!("bad prime `{val}`")))?),
                        "e" | "f" | "pin" | "fp" => filters.push((key.into(), val.into())),
                        "k" => {}
                        _ => return Err(Error::invalid(format!("unknown handle key `{key}`"))),
                    }
                }
                let p = p.ok_or_else(|| Error::invalid("padic handle without p="))?;
                let cands: Vec<ValuationHandle> = Self::places_above(field, p)?
                    .into_iter()
                    .filter(|h| {
                        filters.iter().all(|(k, v)| match k.as_str() {
                            "e" => h.e().to_string() == *v,
                            "f" => h.f().to_string() == *v,
                            "pin" => h.pin().as_deref() == Some(v.as_str()),
                            "fp" => h.fingerprint().as_deref() == Some(v.as_str()),
                            _ => false,
                        })
                    })
                    .collect();
                match cands.len() {
                    1 => Ok(cands.into_iter().next().unwrap()),
                    0 => Err(Error::invalid(format!("no extension of v_{p} matches `{text}`"))),
                    _ => Err(Error::invalid(format!("handle `{text}` is ambiguous"))),
                }
            }
            _ => Err(Error::invalid(format!("unknown valuation handle `{text}`"))),
        }
    }
}

/// Extensions of `v` (on `emb.source()`) to `emb.target()`, canonical order.
pub fn extend_valuation(v: &ValuationHandle, emb: &FieldEmbedding) -> Result<Vec<ValuationHandle>> {
    if v.field() != emb.source() {
        return Err(Error::invalid("valuation and embedding disagree on the base field"));
    }
    let l = emb.target();
    match v {
        ValuationHandle::Trivial(_) => Ok(vec![ValuationHandle::trivial(l)]),
        ValuationHandle::Padic(w) => {
            let mut out = Vec::new();
            for h in ValuationHandle::places_above(l, w.data.p)? {
                if &h.restrict(emb)? == v {
                    out.push(h);
                }
            }
            Ok(out)
        }
    }
}

/// Embedding of finite residue fields `res(v) -> res(w)` induced by `emb`,
/// stored as the image of the generator of `res(v)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResidueMap {
    pub source: FiniteField,
    pub target: FiniteField,
    generator_image: Gf,
}

impl ResidueMap {
    pub fn apply(&self, a: &Gf) -> Gf {
        let t = &self.target;
        let mut acc = t.zero();
        for c in a.iter().rev() {
            acc = t.add(&t.mul(&acc, &self.generator_image), &t.from_u64(*c));
        }
        acc
    }

    pub fn apply_poly(&self, a: &[Gf]) -> Vec<Gf> {
        self.target.poly_trim(a.iter().map(|c| self.apply(c)).collect())
    }
}

/// The residue map for `w` lying over `v` along `emb`.
pub fn residue_map(v: &ValuationHandle, w: &ValuationHandle, emb: &FieldEmbedding) -> Result<ResidueMap> {
    let (ValuationHandle::Padic(pv), ValuationHandle::Padic(_)) = (v, w) else {
        return Err(Error::unsupported("residue maps are only computed between finite residue fields"));
    };
    if &w.restrict(emb)? != v {
        return Err(Error::precondition("valuation does not lie over the base valuation"));
    }
    let (ResidueField::Finite(source), ResidueField::Finite(target)) = (v.residue_field(), w.residue_field()) else {
        unreachable!()
    };
    let d = &pv.data;
    let n = d.degree();
    let mut src_rows = Vec::with_capacity(n);
    let mut images = Vec::with_capacity(n);
    for j in 0..n {
        let mut unit = vec![Q::zero(); n];
        unit[j] = Q::from_integer(1.into());
        let b = d.from_o_coords(&unit);
        let Residue::Finite(_, r) = v.residue(&b)? else { unreachable!() };
        let Residue::Finite(_, s) = w.residue(&emb.apply(&b))? else { unreachable!() };
        src_rows.push(r);
        images.push(s);
    }
    let coeffs = fp_solve_modulo(&src_rows, &[], &source.generator(), source.p())
        .ok_or_else(|| Error::invariant("residues of the order do not span the residue field"))?;
    let mut generator_image = target.zero();
    for (c, s) in coeffs.iter().zip(&images) {
        generator_image = target.add(&generator_image, &target.scale(s, *c));
    }
    Ok(ResidueMap {
        source,
        target,
        generator_image,
    })
}

pub fn count_extensions(v: &ValuationHandle, emb: &FieldEmbedding) -> Result<usize> {
    extend_valuation(v, emb).map(|e| e.len())
}

/// Whether the automorphisms of `L` over `K` act transitively on the extensions of `v`.
pub fn galois_orbit_check(v: &ValuationHandle, emb: &FieldEmbedding) -> Result<bool> {
    let exts = extend_valuation(v, emb)?;
    let auts = relative_automorphisms(emb.target(), emb)?;
    let first = &exts[0];
    let mut orbit = BTreeSet::new();
    for s in &auts {
        orbit.insert(first.pushforward(s)?);
    }
    let all: BTreeSet<ValuationHandle> = exts.iter().cloned().collect();
    let same_ef = exts.iter().all(|h| (h.e(), h.f()) == (first.e(), first.f()));
    Ok(orbit == all && same_ef)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_algebra::{q_frac, q_int, splitting, QPoly};
    use proptest::prelude::*;

    fn gauss() -> NumberField {
        NumberField::new("Q(i)", QPoly::from_ints(&[1, 0, 1])).unwrap()
    }

    #[test]
    fn gaussian_extension_counts() {
        let k = gauss();
        let emb = FieldEmbedding::from_rationals(&k);
        let v5 = ValuationHandle::padic_on_q(5).unwrap();
        let ext = extend_valuation(&v5, &emb).unwrap();
        assert_eq!(ext.len(), 2);
        assert!(ext.iter().all(|h| h.e() == 1 && h.f() == 1));
        let v2 = ValuationHandle::padic_on_q(2).unwrap();
        let ext = extend_valuation(&v2, &emb).unwrap();
        assert_eq!((ext.len(), ext[0].e(), ext[0].f()), (1, 2, 1));
        assert_eq!(count_extensions(&ValuationHandle::padic_on_q(3).unwrap(), &emb).unwrap(), 1);
        let t = ValuationHandle::trivial(&NumberField::rationals());
        assert_eq!(extend_valuation(&t, &emb).unwrap(), vec![ValuationHandle::trivial(&k)]);
        assert_eq!(count_extensions(&v5, &FieldEmbedding::identity(&NumberField::rationals())).unwrap(), 1);
    }

    #[test]
    fn values_and_residues() {
        let v5 = ValuationHandle::padic_on_q(5).unwrap();
        let q = NumberField::rationals();
        assert_eq!(v5.value(&q.from_q(q_frac(25, 3))), ValueVec::finite(vec![q_int(2)]));
        assert_eq!(v5.value(&q.zero()), ValueVec::infinity());
        match v5.residue(&q.from_q(q_frac(7, 2))).unwrap() {
            Residue::Finite(_, g) => assert_eq!(g, vec![1]),
            _ => panic!(),
        }
        assert!(v5.residue(&q.from_q(q_frac(1, 5))).is_err());
        let k = gauss();
        let w2 = &ValuationHandle::places_above(&k, 2).unwrap()[0];
        let one_i = &k.one() + &k.generator();
        assert_eq!(w2.value(&one_i), ValueVec::finite(vec![q_frac(1, 2)]));
        let w5 = &ValuationHandle::places_above(&k, 5).unwrap()[0];
        assert_eq!(w5.residue(&k.generator()).unwrap().to_string(), "2");
        assert_eq!(w5.residue(&k.one()).unwrap().to_string(), "1");
    }

    #[test]
    fn orbit_checks() {
        let k = gauss();
        let emb = FieldEmbedding::from_rationals(&k);
        for p in [2, 5, 7] {
            assert!(galois_orbit_check(&ValuationHandle::padic_on_q(p).unwrap(), &emb).unwrap());
        }
        let s = splitting::splitting_field_over_q(
            &[QPoly::from_ints(&[-2, 0, 1]), QPoly::from_ints(&[-3, 0, 1])],
            Default::default(),
        )
        .unwrap();
        assert!(galois_orbit_check(&ValuationHandle::padic_on_q(7).unwrap(), &s.base_embedding).unwrap());
    }

    #[test]
    fn serialization_round_trip() {
        let k = gauss();
        for h in ValuationHandle::places_above(&k, 5).unwrap() {
            let s = h.to_string();
            assert_eq!(ValuationHandle::parse(&s, &k).unwrap(), h);
        }
        let h = ValuationHandle::parse("padic p=5 fp=3", &k).unwrap();
        assert_eq!(h.fingerprint().unwrap(), "3");
        assert!(ValuationHandle::parse("padic p=5", &k).is_err());
        assert!(ValuationHandle::parse("padic p=2", &k).is_ok());
        assert_eq!(ValuationHandle::parse("trivial", &k).unwrap(), ValuationHandle::trivial(&k));
    }

    #[test]
    fn pushforward_by_conjugation_swaps() {
        let k = gauss();
        let conj = FieldEmbedding::new(k.clone(), -&k.generator()).unwrap();
        let ps = ValuationHandle::places_above(&k, 5).unwrap();
        assert_eq!(ps[0].pushforward(&conj).unwrap(), ps[1]);
        let ps = ValuationHandle::places_above(&k, 2).unwrap();
        assert_eq!(ps[0].pushforward(&conj).unwrap(), ps[0]);
    }

    #[test]
    fn residue_map_is_a_homomorphism() {
        let v = ValuationHandle::padic_on_q(3).unwrap();
        let k = gauss();
        let emb = FieldEmbedding::from_rationals(&k);
        let w = &extend_valuation(&v, &emb).unwrap()[0];
        let m = residue_map(&v, w, &emb).unwrap();
        assert_eq!(m.apply(&m.source.from_u64(2)), m.target.from_u64(2));
        // F_9 -> F_9 inside a bigger field: Q(i) -> Q(i, sqrt 2)
        let s = splitting::splitting_field(&[QPoly::from_ints(&[-2, 0, 1])], &k, Default::default()).unwrap();
        for w2 in extend_valuation(w, &s.base_embedding).unwrap() {
            let m = residue_map(w, &w2, &s.base_embedding).unwrap();
            let src = &m.source;
            for a in src.elements() {
                for b in src.elements() {
                    assert_eq!(m.apply(&src.mul(&a, &b)), m.target.mul(&m.apply(&a), &m.apply(&b)));
                }
            }
            let i = k.generator();
            let Residue::Finite(_, ri) = w.residue(&i).unwrap() else { panic!() };
            let Residue::Finite(_, si) = w2.residue(&s.base_embedding.apply(&i)).unwrap() else { panic!() };
            assert_eq!(m.apply(&ri), si);
        }
    }

    fn gauss_elem() -> impl Strategy<Value = FieldElement> {
        (-30i64..30, -30i64..30, 1i64..20).prop_map(|(a, b, d)| {
            let k = gauss();
            k.from_coeffs(vec![q_frac(a, d), q_frac(b, d)])
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn valuation_axioms(x in gauss_elem(), y in gauss_elem(), p in prop::sample::select(vec![2u64, 3, 5, 13])) {
            let k = gauss();
            for w in ValuationHandle::places_above(&k, p).unwrap() {
                prop_assert_eq!(w.value(&(&x * &y)), w.value(&x).add(&w.value(&y)));
                let s = &x + &y;
                prop_assert!(w.value(&s) >= w.value(&x).min(w.value(&y)));
                let r = w.restrict(&FieldEmbedding::from_rationals(&k)).unwrap();
                let c = NumberField::rationals().from_q(q_frac(p as i64 * 3, 7));
                prop_assert_eq!(w.value(&FieldEmbedding::from_rationals(&k).apply(&c)), r.value(&c));
                if w.value(&x).sign() != Ordering::Less && w.value(&y).sign() != Ordering::Less {
                    let (ResidueField::Finite(ff), Residue::Finite(_, a), Residue::Finite(_, b), Residue::Finite(_, c))
                        = (w.residue_field(), w.residue(&x).unwrap(), w.residue(&y).unwrap(), w.residue(&(&x * &y)).unwrap())
                        else { unreachable!() };
                    prop_assert_eq!(ff.mul(&a, &b), c);
                }
            }
        }
    }
}
