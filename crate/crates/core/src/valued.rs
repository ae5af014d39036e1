//! One interface over the supported fields (number fields and `F(t)`) and
//! their supported valuation rings, with the ring order and joins.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};
use crate::exact_algebra::{FieldElement, FieldEmbedding, NumberField, Q};
use crate::function_fields::{
    composed_extend, gauss_extend, restrict_composed, restrict_gauss, ComposedHandle, FinePlace, FunctionField,
    GaussHandle, RatFunc,
};
use crate::padic::{extend_valuation, Membership, ValuationHandle};

#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Field {
    Number(NumberField),
    Function(FunctionField),
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

impl Field {
    pub fn label(&self) -> String {
        match self {
            Field::Number(k) => k.label().to_string(),
            Field::Function(f) => f.label(),
        }
    }

    /// The number field of constants (the field itself for number fields).
    pub fn constants(&self) -> &NumberField {
        match self {
            Field::Number(k) => k,
            Field::Function(f) => f.constants(),
        }
    }

    pub fn is_function_field(&self) -> bool {
        matches!(self, Field::Function(_))
    }

    /// The field obtained by replacing the constants along `emb`.
    pub fn extend_constants(&self, emb: &FieldEmbedding) -> Result<Field> {
        if emb.source() != self.constants() {
            return Err(Error::invalid("embedding does not start at the constant field"));
        }
        Ok(match self {
            Field::Number(_) => Field::Number(emb.target().clone()),
            Field::Function(f) => Field::Function(f.extend_constants(emb)),
        })
    }

    pub fn from_constant(&self, c: FieldElement) -> Element {
        match self {
            Field::Number(_) => Element::Number(c),
            Field::Function(f) => Element::Function(f.from_constant(c)),
        }
    }

    pub fn from_q(&self, q: Q) -> Element {
        self.from_constant(self.constants().from_q(q))
    }

    pub fn from_int(&self, n: i64) -> Element {
        self.from_constant(self.constants().from_int(n))
    }

    /// Image of `x` under the constant-field embedding.
    pub fn map(&self, emb: &FieldEmbedding, x: &Element) -> Element {
        match (self, x) {
            (Field::Number(_), Element::Number(a)) => Element::Number(emb.apply(a)),
            (Field::Function(f), Element::Function(a)) => Element::Function(f.map(emb, a)),
            _ => panic!("element of a different field kind"),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Element {
    Number(FieldElement),
    Function(RatFunc),
}

impl fmt::Debug for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Element::Number(x) => write!(f, "{x}"),
            Element::Function(x) => write!(f, "{x}"),
        }
    }
}

macro_rules! binop {
    ($name:ident, $num:expr, $fun:expr) => {
        pub fn $name(&self, o: &Element) -> Element {
            match (self, o) {
                (Element::Number(a), Element::Number(b)) => Element::Number($num(a, b)),
                (Element::Function(a), Element::Function(b)) => Element::Function($fun(a, b)),
                _ => panic!("mixed field kinds"),
            }
        }
    };
}

impl Element {
    binop!(add, |a: &FieldElement, b| a + b, |a: &RatFunc, b| a.add(b));
    binop!(sub, |a: &FieldElement, b| a - b, |a: &RatFunc, b| a.sub(b));
    binop!(mul, |a: &FieldElement, b| a * b, |a: &RatFunc, b| a.mul(b));

    pub fn neg(&self) -> Element {
        match self {
            Element::Number(a) => Element::Number(-a),
            Element::Function(a) => Element::Function(a.neg()),
        }
    }

    pub fn inv(&self) -> Option<Element> {
        match self {
            Element::Number(a) => a.inv().map(Element::Number),
            Element::Function(a) => a.inv().map(Element::Function),
        }
    }

    pub fn div(&self, o: &Element) -> Option<Element> {
        o.inv().map(|i| self.mul(&i))
    }

    pub fn pow(&self, e: u64) -> Element {
        match self {
            Element::Number(a) => Element::Number(a.pow(e)),
            Element::Function(a) => Element::Function(a.pow(e)),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Element::Number(a) => a.is_zero(),
            Element::Function(a) => a.is_zero(),
        }
    }

    pub fn field(&self) -> Field {
        match self {
            Element::Number(a) => Field::Number(a.field().clone()),
            Element::Function(a) => Field::Function(a.field().clone()),
        }
    }
}

/// A supported valuation ring on a supported field.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Handle {
    Number(ValuationHandle),
    Gauss(GaussHandle),
    Composed(ComposedHandle),
}

impl fmt::Debug for Handle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Handle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Handle::Number(h) => write!(f, "{h}"),
            Handle::Gauss(h) => write!(f, "{h}"),
            Handle::Composed(h) => write!(f, "{h}"),
        }
    }
}

/// What is left of a fine ring inside the residue field of a coarser one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ResiduePlace {
    /// The rings coincide.
    Trivial,
    /// A place of the residue field `(res w)(t)` of a Gauss ring.
    Place(FinePlace),
    /// The coarse ring is the whole field, so the fine ring is its own quotient.
    Ring(Handle),
}

impl Handle {
    pub fn trivial(field: &Field) -> Handle {
        match field {
            Field::Number(k) => Handle::Number(ValuationHandle::trivial(k)),
            Field::Function(f) => Handle::Gauss(
                GaussHandle::new(f, ValuationHandle::trivial(f.constants())).expect("same constant field"),
            ),
        }
    }

    pub fn field(&self) -> Field {
        match self {
            Handle::Number(h) => Field::Number(h.field().clone()),
            Handle::Gauss(h) => Field::Function(h.field().clone()),
            Handle::Composed(h) => Field::Function(h.field().clone()),
        }
    }

    pub fn is_trivial(&self) -> bool {
        match self {
            Handle::Number(h) => h.is_trivial(),
            Handle::Gauss(h) => h.is_trivial(),
            Handle::Composed(_) => false,
        }
    }

    pub fn residue_characteristic(&self) -> u64 {
        match self {
            Handle::Number(h) => h.residue_characteristic(),
            Handle::Gauss(h) => h.residue_characteristic(),
            Handle::Composed(h) => h.residue_characteristic(),
        }
    }

    /// The restriction to the constant field.
    pub fn constant_part(&self) -> &ValuationHandle {
        match self {
            Handle::Number(h) => h,
            Handle::Gauss(h) => h.base(),
            Handle::Composed(h) => h.coarse().base(),
        }
    }

    pub fn membership(&self, x: &Element) -> Membership {
        match (self, x) {
            (Handle::Number(h), Element::Number(a)) => h.membership(a),
            (Handle::Gauss(h), Element::Function(a)) => h.membership(a),
            (Handle::Composed(h), Element::Function(a)) => h.membership(a),
            _ => panic!("handle and element live on different field kinds"),
        }
    }

    /// Valuation rings containing this one, smallest first, ending at the whole field.
    pub fn overrings(&self) -> Vec<Handle> {
        let mut out = vec![self.clone()];
        match self {
            Handle::Number(h) if !h.is_trivial() => out.push(Handle::trivial(&self.field())),
            Handle::Gauss(h) if !h.is_trivial() => out.push(Handle::trivial(&self.field())),
            Handle::Composed(h) => out.extend(Handle::Gauss(h.coarse().clone()).overrings()),
            _ => {}
        }
        out
    }

    /// Ring containment `self ⊇ other`.
    pub fn contains(&self, other: &Handle) -> bool {
        other.overrings().contains(self)
    }

    /// Strictly coarser ring that contains `other`: `self ⊋ other`.
    pub fn strictly_contains(&self, other: &Handle) -> bool {
        self != other && self.contains(other)
    }

    /// Compares in the ring order; `None` for incomparable rings.
    pub fn ring_cmp(&self, other: &Handle) -> Option<Ordering> {
        if self == other {
            Some(Ordering::Equal)
        } else if self.contains(other) {
            Some(Ordering::Greater)
        } else if other.contains(self) {
            Some(Ordering::Less)
        } else {
            None
        }
    }

    /// Extensions to the field with constants replaced along `emb`, canonical order.
    pub fn extend(&self, emb: &FieldEmbedding) -> Result<Vec<Handle>> {
        Ok(match self {
            Handle::Number(h) => extend_valuation(h, emb)?.into_iter().map(Handle::Number).collect(),
            Handle::Gauss(h) => gauss_extend(h, emb)?.into_iter().map(Handle::Gauss).collect(),
            Handle::Composed(h) => composed_extend(h, emb)?.into_iter().map(Handle::Composed).collect(),
        })
    }

    /// Restriction along the constant-field embedding `emb` to `base`.
    pub fn restrict(&self, emb: &FieldEmbedding, base: &Field) -> Result<Handle> {
        Ok(match (self, base) {
            (Handle::Number(h), Field::Number(_)) => Handle::Number(h.restrict(emb)?),
            (Handle::Gauss(h), Field::Function(f)) => Handle::Gauss(restrict_gauss(h, emb, f)?),
            (Handle::Composed(h), Field::Function(f)) => Handle::Composed(restrict_composed(h, emb, f)?),
            _ => return Err(Error::invalid("restriction target has a different field kind")),
        })
    }

    /// Image under an automorphism of the constant field.
    pub fn pushforward(&self, sigma: &FieldEmbedding) -> Result<Handle> {
        match self {
            Handle::Number(h) => Ok(Handle::Number(h.pushforward(sigma)?)),
            Handle::Gauss(h) => Ok(Handle::Gauss(GaussHandle::new(h.field(), h.base().pushforward(sigma)?)?)),
            Handle::Composed(_) => Err(Error::unsupported("automorphisms are not transported through composed rings")),
        }
    }

    pub fn parse(text: &str, field: &Field) -> Result<Handle> {
        let text = text.trim();
        match field {
            Field::Number(k) => Ok(Handle::Number(ValuationHandle::parse(text, k)?)),
            Field::Function(f) => {
                if text == "trivial" {
                    Ok(Handle::trivial(field))
                } else if text.starts_with("gauss ") {
                    Ok(Handle::Gauss(GaussHandle::parse(text, f)?))
                } else if text.starts_with("composed ") {
                    Ok(Handle::Composed(ComposedHandle::parse(text, f)?))
                } else {
                    Err(Error::invalid(format!("unknown handle `{text}` on a function field")))
                }
            }
        }
    }
}

/// Smallest supported ring containing both.
pub fn join(a: &Handle, b: &Handle) -> Result<Handle> {
    if a.field() != b.field() {
        return Err(Error::invalid("join of rings on different fields"));
    }
    let ob = b.overrings();
    a.overrings()
        .into_iter()
        .find(|h| ob.contains(h))
        .ok_or_else(|| Error::unsupported("join outside the supported handle family"))
}

/// `fine ÷ coarse` for `fine ⊆ coarse`.
pub fn divide(fine: &Handle, coarse: &Handle) -> Result<ResiduePlace> {
    if !coarse.contains(fine) {
        return Err(Error::precondition("the coarse ring does not contain the fine ring"));
    }
    if fine == coarse {
        return Ok(ResiduePlace::Trivial);
    }
    match (fine, coarse) {
        (Handle::Composed(c), Handle::Gauss(g)) if c.coarse() == g => Ok(ResiduePlace::Place(c.place().clone())),
        _ if coarse.is_trivial() => Ok(ResiduePlace::Ring(fine.clone())),
        _ => Err(Error::unsupported("quotient outside the supported handle family")),
    }
}
