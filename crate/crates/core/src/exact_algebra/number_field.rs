//! Number fields `Q[x]/(m)` with a single generator and their elements.

use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use num_traits::{One, Zero};

use super::factor::factor_squarefree;
use super::linalg::q_kernel;
use super::poly::QPoly;
use super::Q;
use crate::error::{Error, Result};

struct Inner {
    label: String,
    minpoly: QPoly,
    /// Roots of rational polynomials (keyed by monic irreducible factor).
    roots: Mutex<HashMap<QPoly, Vec<FieldElement>>>,
    /// Roots of `minpoly` inside the field, when the field is normal.
    conjugates: OnceLock<Option<Vec<FieldElement>>>,
}

/// `Q(θ)` where `θ` has a monic, integral, irreducible minimal polynomial.
///
/// Cloning is cheap. Two fields are equal when their minimal polynomials are.
#[derive(Clone)]
pub struct NumberField(Arc<Inner>);

impl NumberField {
    /// Validates the minimal polynomial.
    pub fn new(label: impl Into<String>, minpoly: QPoly) -> Result<Self> {
        if minpoly.deg() == 0 || !minpoly.is_monic() {
            return Err(Error::invalid("minimal polynomial must be monic of positive degree"));
        }
        if !minpoly.is_integral() {
            return Err(Error::invalid(
                "minimal polynomial must have integer coefficients",
            ));
        }
        if !minpoly.is_squarefree() || factor_squarefree(&minpoly).len() != 1 {
            return Err(Error::invalid(format!(
                "minimal polynomial {minpoly} is not irreducible over Q"
            )));
        }
        Ok(Self::new_unchecked(label, minpoly))
    }

    pub(crate) fn new_unchecked(label: impl Into<String>, minpoly: QPoly) -> Self {
        NumberField(Arc::new(Inner {
            label: label.into(),
            minpoly,
            roots: Mutex::new(HashMap::new()),
            conjugates: OnceLock::new(),
        }))
    }

    /// `Q` itself, presented as `Q[x]/(x)`.
    pub fn rationals() -> Self {
        static QF: OnceLock<NumberField> = OnceLock::new();
        QF.get_or_init(|| Self::new_unchecked("Q", QPoly::x())).clone()
    }

    pub fn label(&self) -> &str {
        &self.0.label
    }

    pub fn with_label(&self, label: impl Into<String>) -> Self {
        let f = Self::new_unchecked(label, self.minpoly().clone());
        f.0.roots
            .lock()
            .unwrap()
            .extend(self.0.roots.lock().unwrap().iter().map(|(k, v)| {
                (k.clone(), v.iter().map(|e| f.from_poly(e.repr.clone())).collect())
            }));
        if let Some(Some(c)) = self.0.conjugates.get() {
            let _ = f
                .0
                .conjugates
                .set(Some(c.iter().map(|e| f.from_poly(e.repr.clone())).collect()));
        }
        f
    }

    pub fn minpoly(&self) -> &QPoly {
        &self.0.minpoly
    }

    pub fn degree(&self) -> usize {
        self.0.minpoly.deg()
    }

    pub fn is_rationals(&self) -> bool {
        self.degree() == 1
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement {
            field: self.clone(),
            repr: QPoly::zero(),
        }
    }

    pub fn one(&self) -> FieldElement {
        self.from_q(Q::one())
    }

    pub fn from_q(&self, q: Q) -> FieldElement {
        self.from_poly(QPoly::constant(q))
    }

    pub fn from_int(&self, n: i64) -> FieldElement {
        self.from_q(Q::from_integer(n.into()))
    }

    /// The class of `x`; for `Q` this is `0`.
    pub fn generator(&self) -> FieldElement {
        self.from_poly(QPoly::x())
    }

    pub fn from_poly(&self, p: QPoly) -> FieldElement {
        let repr = if p.degree().is_some_and(|d| d >= self.degree()) {
            p.rem(self.minpoly())
        } else {
            p
        };
        FieldElement {
            field: self.clone(),
            repr,
        }
    }

    pub fn from_coeffs(&self, c: Vec<Q>) -> FieldElement {
        self.from_poly(QPoly::new(c))
    }

    /// Coordinates in the power basis, padded to the degree.
    pub fn coords(&self, x: &FieldElement) -> Vec<Q> {
        let mut v = x.repr.coeffs().to_vec();
        v.resize(self.degree(), Q::zero());
        v
    }

    pub(crate) fn cached_roots(&self, g: &QPoly) -> Option<Vec<FieldElement>> {
        self.0.roots.lock().unwrap().get(g).cloned()
    }

    pub(crate) fn cache_roots(&self, g: QPoly, roots: Vec<FieldElement>) {
        self.0.roots.lock().unwrap().insert(g, roots);
    }

    pub(crate) fn conjugates_cell(&self) -> &OnceLock<Option<Vec<FieldElement>>> {
        &self.0.conjugates
    }

    pub fn same(&self, other: &NumberField) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.minpoly() == other.minpoly()
    }
}

impl PartialEq for NumberField {
    fn eq(&self, other: &Self) -> bool {
        self.same(other)
    }
}

impl Eq for NumberField {}

impl Hash for NumberField {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.minpoly().hash(state);
    }
}

impl fmt::Debug for NumberField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NumberField({}, {})", self.label(), self.minpoly())
    }
}

/// Element of a number field; `repr` has degree below the field degree.
#[derive(Clone)]
pub struct FieldElement {
    field: NumberField,
    repr: QPoly,
}

impl FieldElement {
    pub fn field(&self) -> &NumberField {
        &self.field
    }

    pub fn repr(&self) -> &QPoly {
        &self.repr
    }

    pub fn is_zero(&self) -> bool {
        self.repr.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.repr == QPoly::one()
    }

    pub fn to_rational(&self) -> Option<Q> {
        match self.repr.degree() {
            None => Some(Q::zero()),
            Some(0) => Some(self.repr.coeff(0)),
            _ => None,
        }
    }

    pub fn scale(&self, c: &Q) -> FieldElement {
        FieldElement {
            field: self.field.clone(),
            repr: self.repr.scale(c),
        }
    }

    pub fn inv(&self) -> Option<FieldElement> {
        if self.is_zero() {
            return None;
        }
        let (g, s, _) = self.repr.xgcd(self.field.minpoly());
        debug_assert!(g.is_constant());
        Some(self.field.from_poly(s.scale(&(Q::one() / g.lc()))))
    }

    pub fn div(&self, other: &FieldElement) -> Option<FieldElement> {
        other.inv().map(|i| self * &i)
    }

    pub fn pow(&self, mut e: u64) -> FieldElement {
        let mut base = self.clone();
        let mut acc = self.field.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// Signed power; `None` for a negative power of zero.
    pub fn powi(&self, e: i64) -> Option<FieldElement> {
        if e >= 0 {
            Some(self.pow(e as u64))
        } else {
            self.inv().map(|i| i.pow(e.unsigned_abs()))
        }
    }

    /// `N_{K/Q}(x) = Res(m, repr)` since `m` is monic.
    pub fn norm(&self) -> Q {
        self.field.minpoly().resultant(&self.repr)
    }

    /// Minimal polynomial over `Q`, found as the first linear dependence among powers.
    pub fn minimal_polynomial(&self) -> QPoly {
        if let Some(q) = self.to_rational() {
            return QPoly::linear_root(q);
        }
        let n = self.field.degree();
        let mut powers = vec![self.field.coords(&self.field.one())];
        let mut cur = self.field.one();
        for k in 1..=n {
            cur = &cur * self;
            powers.push(self.field.coords(&cur));
            let m: Vec<Vec<Q>> = (0..n)
                .map(|r| powers.iter().map(|col| col[r].clone()).collect())
                .collect();
            let ker = q_kernel(&m, k + 1);
            if let Some(v) = ker.into_iter().next() {
                return QPoly::new(v).monic();
            }
        }
        unreachable!("powers up to the degree are dependent")
    }
}

/// Evaluates a rational polynomial at a field element (Horner).
pub fn eval_at(p: &QPoly, x: &FieldElement) -> FieldElement {
    let k = x.field();
    let mut acc = k.zero();
    for c in p.coeffs().iter().rev() {
        acc = &(&acc * x) + &k.from_q(c.clone());
    }
    acc
}

impl PartialEq for FieldElement {
    fn eq(&self, other: &Self) -> bool {
        self.repr == other.repr && self.field == other.field
    }
}

impl Eq for FieldElement {}

impl Hash for FieldElement {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.repr.hash(state);
    }
}

impl PartialOrd for FieldElement {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for FieldElement {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.repr.cmp(&other.repr)
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.repr)
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.repr)
    }
}

impl<'a> Add<&'a FieldElement> for &'a FieldElement {
    type Output = FieldElement;
    fn add(self, o: &'a FieldElement) -> FieldElement {
        FieldElement {
            field: self.field.clone(),
            repr: &self.repr + &o.repr,
        }
    }
}

impl<'a> Sub<&'a FieldElement> for &'a FieldElement {
    type Output = FieldElement;
    fn sub(self, o: &'a FieldElement) -> FieldElement {
        FieldElement {
            field: self.field.clone(),
            repr: &self.repr - &o.repr,
        }
    }
}

impl<'a> Mul<&'a FieldElement> for &'a FieldElement {
    type Output = FieldElement;
    fn mul(self, o: &'a FieldElement) -> FieldElement {
        self.field.from_poly(&self.repr * &o.repr)
    }
}

impl Neg for &FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        FieldElement {
            field: self.field.clone(),
            repr: -&self.repr,
        }
    }
}

/// Embedding `source -> target` determined by the image of the generator.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FieldEmbedding {
    source: NumberField,
    target: NumberField,
    image: FieldElement,
}

impl FieldEmbedding {
    pub fn new(source: NumberField, image: FieldElement) -> Result<Self> {
        if !eval_at(source.minpoly(), &image).is_zero() {
            return Err(Error::invalid(
                "image of the generator is not a root of the source minimal polynomial",
            ));
        }
        Ok(Self::new_unchecked(source, image))
    }

    pub(crate) fn new_unchecked(source: NumberField, image: FieldElement) -> Self {
        FieldEmbedding {
            target: image.field().clone(),
            source,
            image,
        }
    }

    pub fn identity(k: &NumberField) -> Self {
        FieldEmbedding {
            source: k.clone(),
            target: k.clone(),
            image: k.generator(),
        }
    }

    /// The unique embedding of `Q`.
    pub fn from_rationals(target: &NumberField) -> Self {
        FieldEmbedding {
            source: NumberField::rationals(),
            target: target.clone(),
            image: target.zero(),
        }
    }

    pub fn source(&self) -> &NumberField {
        &self.source
    }

    pub fn target(&self) -> &NumberField {
        &self.target
    }

    pub fn image_of_generator(&self) -> &FieldElement {
        &self.image
    }

    pub fn apply(&self, x: &FieldElement) -> FieldElement {
        debug_assert!(x.field() == &self.source);
        eval_at(x.repr(), &self.image)
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &FieldEmbedding) -> FieldEmbedding {
        FieldEmbedding {
            source: inner.source.clone(),
            target: self.target.clone(),
            image: self.apply(&inner.image),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.source == self.target && self.image == self.source.generator()
    }
}
