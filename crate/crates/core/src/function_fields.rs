//! Rational function fields `F(t)` over number fields, Gauss valuations, and
//! rank-2 valuations obtained by composing a Gauss valuation with a place of
//! its residue field.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};
use crate::exact_algebra::gf::{FiniteField, Gf, GfPoly};
use crate::exact_algebra::kpoly::factor_over_field;
use crate::exact_algebra::linalg::q_rref;
use crate::exact_algebra::{
    format_rational_short, parse_rational, relative_automorphisms, FieldElement, FieldEmbedding, KPoly, NumberField,
    Q,
};
use crate::padic::{
    extend_valuation, residue_map, Membership, Residue, ResidueMap, ValuationHandle, ValueVec,
};

/// `F(t)` for a number field `F`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FunctionField {
    constants: NumberField,
    var: String,
}

impl fmt::Debug for FunctionField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

impl FunctionField {
    pub fn new(constants: &NumberField, var: impl Into<String>) -> Self {
        FunctionField {
            constants: constants.clone(),
            var: var.into(),
        }
    }

    pub fn constants(&self) -> &NumberField {
        &self.constants
    }

    pub fn var(&self) -> &str {
        &self.var
    }

    pub fn label(&self) -> String {
        format!("{}({})", self.constants.label(), self.var)
    }

    pub fn zero(&self) -> RatFunc {
        self.from_poly(KPoly::zero(&self.constants))
    }

    pub fn one(&self) -> RatFunc {
        self.from_constant(self.constants.one())
    }

    /// The variable `t`.
    pub fn t(&self) -> RatFunc {
        self.from_poly(KPoly::x(&self.constants))
    }

    pub fn from_constant(&self, c: FieldElement) -> RatFunc {
        self.from_poly(KPoly::constant(c))
    }

    pub fn from_q(&self, q: Q) -> RatFunc {
        self.from_constant(self.constants.from_q(q))
    }

    pub fn from_poly(&self, num: KPoly) -> RatFunc {
        RatFunc {
            field: self.clone(),
            num,
            den: KPoly::constant(self.constants.one()),
        }
    }

    /// `num/den` in lowest terms; `None` when `den = 0`.
    pub fn fraction(&self, num: KPoly, den: KPoly) -> Option<RatFunc> {
        if den.is_zero() {
            return None;
        }
        if num.is_zero() {
            return Some(self.zero());
        }
        let g = num.gcd(&den);
        let (num, _) = num.divrem(&g);
        let (den, _) = den.divrem(&g);
        let lc = den.lc().inv().unwrap();
        Some(RatFunc {
            field: self.clone(),
            num: num.scale(&lc),
            den: den.scale(&lc),
        })
    }

    /// `L(t)` for a constant-field embedding `F -> L`.
    pub fn extend_constants(&self, emb: &FieldEmbedding) -> FunctionField {
        FunctionField::new(emb.target(), self.var.clone())
    }

    /// Image of `x` in `L(t)` under the constant-field embedding.
    pub fn map(&self, emb: &FieldEmbedding, x: &RatFunc) -> RatFunc {
        let l = self.extend_constants(emb);
        let m = |p: &KPoly| KPoly::new(emb.target(), p.coeffs().iter().map(|c| emb.apply(c)).collect());
        l.fraction(m(&x.num), m(&x.den)).unwrap()
    }
}

/// Element of `F(t)`: coprime numerator and monic denominator.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatFunc {
    field: FunctionField,
    num: KPoly,
    den: KPoly,
}

impl RatFunc {
    pub fn field(&self) -> &FunctionField {
        &self.field
    }

    pub fn num(&self) -> &KPoly {
        &self.num
    }

    pub fn den(&self) -> &KPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.den.deg() == 0 && self.num.deg() == 0 && !self.num.is_zero() && self.num.coeffs()[0].is_one()
    }

    /// The value as a constant, when it lies in `F`.
    pub fn constant(&self) -> Option<FieldElement> {
        if self.is_zero() {
            return Some(self.field.constants.zero());
        }
        (self.num.deg() == 0 && self.den.deg() == 0).then(|| self.num.coeffs()[0].clone())
    }

    pub fn add(&self, o: &RatFunc) -> RatFunc {
        let n = self.num.mul(&o.den).add(&o.num.mul(&self.den));
        self.field.fraction(n, self.den.mul(&o.den)).unwrap()
    }

    pub fn sub(&self, o: &RatFunc) -> RatFunc {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> RatFunc {
        RatFunc {
            field: self.field.clone(),
            num: self.num.scale(&-&self.field.constants.one()),
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, o: &RatFunc) -> RatFunc {
        self.field.fraction(self.num.mul(&o.num), self.den.mul(&o.den)).unwrap()
    }

    pub fn inv(&self) -> Option<RatFunc> {
        self.field.fraction(self.den.clone(), self.num.clone())
    }

    pub fn div(&self, o: &RatFunc) -> Option<RatFunc> {
        o.inv().map(|i| self.mul(&i))
    }

    pub fn pow(&self, e: u64) -> RatFunc {
        let mut acc = self.field.one();
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }
}

impl fmt::Debug for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let poly = |p: &KPoly| format_kpoly(p);
        if self.den.deg() == 0 {
            write!(f, "{}", poly(&self.num))
        } else {
            write!(f, "{}/{}", poly(&self.num), poly(&self.den))
        }
    }
}

/// A constant: a rational, or `(c0;c1;...)` power-basis coordinates.
pub fn format_constant(x: &FieldElement) -> String {
    match x.to_rational() {
        Some(q) => format_rational_short(&q),
        None => {
            let c = x.field().coords(x);
            format!("({})", c.iter().map(format_rational_short).collect::<Vec<_>>().join(";"))
        }
    }
}

pub fn parse_constant(s: &str, k: &NumberField) -> Result<FieldElement> {
    let s = s.trim();
    if let Some(inner) = s.strip_prefix('(').and_then(|r| r.strip_suffix(')')) {
        let c: Vec<Q> = inner.split(';').map(parse_rational).collect::<Result<_>>()?;
        if c.len() > k.degree() {
            return Err(Error::invalid(format!("too many coordinates in `{s}`")));
        }
        Ok(k.from_coeffs(c))
    } else {
        Ok(k.from_q(parse_rational(s)?))
    }
}

fn format_kpoly(p: &KPoly) -> String {
    let parts: Vec<String> = p.coeffs().iter().map(format_constant).collect();
    format!("[{}]", if parts.is_empty() { "0".to_string() } else { parts.join(",") })
}

fn format_gfpoly(ff: &FiniteField, p: &GfPoly) -> String {
    let parts: Vec<String> = p.iter().map(|c| ff.format_element(c)).collect();
    format!("[{}]", parts.join(","))
}

fn list_items(s: &str) -> Result<Vec<&str>> {
    let inner = s
        .trim()
        .strip_prefix('[')
        .and_then(|r| r.strip_suffix(']'))
        .ok_or_else(|| Error::invalid(format!("expected a coefficient list, got `{s}`")))?;
    Ok(inner.split(',').map(str::trim).collect())
}

fn parse_gf(s: &str, ff: &FiniteField) -> Result<Gf> {
    let bad = || Error::invalid(format!("bad finite-field element `{s}`"));
    let digits: Vec<i64> = match s.strip_prefix('(').and_then(|r| r.strip_suffix(')')) {
        Some(inner) => inner.split(';').map(|d| d.trim().parse().map_err(|_| bad())).collect::<Result<_>>()?,
        None => vec![s.parse().map_err(|_| bad())?],
    };
    if digits.len() > ff.degree() {
        return Err(bad());
    }
    let p = ff.p() as i64;
    Ok(ff.from_coeffs(&digits.iter().map(|d| d.rem_euclid(p) as u64).collect::<Vec<_>>()))
}

/// Gauss extension of a valuation `w` on `F` to `F(t)`: `v(sum a_i t^i) = min w(a_i)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GaussHandle {
    field: FunctionField,
    base: ValuationHandle,
}

/// Residue of a Gauss-integral element, in `(res w)(t)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GaussResidue {
    Finite { ff: FiniteField, num: GfPoly, den: GfPoly },
    Function(RatFunc),
}

impl GaussResidue {
    pub fn is_zero(&self) -> bool {
        match self {
            GaussResidue::Finite { num, .. } => num.is_empty(),
            GaussResidue::Function(x) => x.is_zero(),
        }
    }
}

impl fmt::Display for GaussResidue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GaussResidue::Finite { ff, num, den } => {
                write!(f, "{}", format_gfpoly(ff, num))?;
                if den.len() > 1 {
                    write!(f, "/{}", format_gfpoly(ff, den))?;
                }
                Ok(())
            }
            GaussResidue::Function(x) => write!(f, "{x}"),
        }
    }
}

fn min_coefficient_value(w: &ValuationHandle, p: &KPoly) -> Q {
    p.coeffs()
        .iter()
        .filter(|c| !c.is_zero())
        .map(|c| w.value(c).leading().cloned().unwrap())
        .min()
        .expect("nonzero polynomial")
}

impl GaussHandle {
    pub fn new(field: &FunctionField, base: ValuationHandle) -> Result<Self> {
        if base.field() != field.constants() {
            return Err(Error::invalid("Gauss base valuation lives on a different constant field"));
        }
        Ok(GaussHandle {
            field: field.clone(),
            base,
        })
    }

    pub fn field(&self) -> &FunctionField {
        &self.field
    }

    pub fn base(&self) -> &ValuationHandle {
        &self.base
    }

    pub fn is_trivial(&self) -> bool {
        self.base.is_trivial()
    }

    pub fn residue_characteristic(&self) -> u64 {
        self.base.residue_characteristic()
    }

    pub fn value(&self, x: &RatFunc) -> ValueVec {
        if x.is_zero() {
            return ValueVec::infinity();
        }
        let v = min_coefficient_value(&self.base, &x.num) - min_coefficient_value(&self.base, &x.den);
        ValueVec::finite(vec![v])
    }

    pub fn membership(&self, x: &RatFunc) -> Membership {
        Membership::from_sign(self.value(x).sign())
    }

    /// Residue in `(res w)(t)`; the element must be Gauss-integral.
    pub fn residue(&self, x: &RatFunc) -> Result<GaussResidue> {
        if self.value(x).sign() == Ordering::Less {
            return Err(Error::precondition("element is outside the Gauss valuation ring"));
        }
        if self.base.is_trivial() {
            return Ok(GaussResidue::Function(x.clone()));
        }
        let crate::padic::ResidueField::Finite(ff) = self.base.residue_field() else {
            unreachable!()
        };
        // scale by a denominator coefficient of least value so both parts become integral
        let pivot = x
            .den
            .coeffs()
            .iter()
            .filter(|c| !c.is_zero())
            .min_by_key(|c| self.base.value(c))
            .unwrap()
            .inv()
            .unwrap();
        let reduce = |p: &KPoly| -> Result<GfPoly> {
            let mut out = Vec::with_capacity(p.coeffs().len());
            for c in p.coeffs() {
                match self.base.residue(&(c * &pivot))? {
                    Residue::Finite(_, g) => out.push(g),
                    Residue::Number(_) => unreachable!(),
                }
            }
            Ok(ff.poly_trim(out))
        };
        let num = reduce(&x.num)?;
        let den = reduce(&x.den)?;
        if num.is_empty() {
            return Ok(GaussResidue::Finite {
                num,
                den: ff.poly_const(ff.one()),
                ff,
            });
        }
        let g = ff.poly_gcd(&num, &den);
        let den = ff.poly_div_exact(&den, &g);
        let lc = ff.inv(den.last().unwrap()).unwrap();
        Ok(GaussResidue::Finite {
            num: ff.poly_scale(&ff.poly_div_exact(&num, &g), &lc),
            den: ff.poly_scale(&den, &lc),
            ff,
        })
    }

    /// Restriction to the constant field.
    pub fn constant_restriction(&self) -> &ValuationHandle {
        &self.base
    }

    pub fn parse(text: &str, field: &FunctionField) -> Result<Self> {
        let rest = text
            .trim()
            .strip_prefix("gauss base=")
            .ok_or_else(|| Error::invalid(format!("expected `gauss base=...`, got `{text}`")))?;
        GaussHandle::new(field, ValuationHandle::parse(rest, field.constants())?)
    }
}

impl fmt::Display for GaussHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "gauss base={}", self.base)
    }
}

impl fmt::Debug for GaussHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// A place of the residue field `(res w)(t)` of a Gauss valuation.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum FinePlace {
    /// Monic irreducible `g` over the finite constant field of the residue field.
    Finite(FiniteField, GfPoly),
    /// Monic irreducible `g` over `F`, for the Gauss extension of the trivial valuation.
    Number(KPoly),
    Infinity,
}

impl FinePlace {
    /// `ord_g` of a nonzero residue.
    pub fn ord(&self, r: &GaussResidue) -> Option<i64> {
        if r.is_zero() {
            return None;
        }
        Some(match (self, r) {
            (FinePlace::Infinity, GaussResidue::Finite { num, den, .. }) => den.len() as i64 - num.len() as i64,
            (FinePlace::Infinity, GaussResidue::Function(x)) => x.den().deg() as i64 - x.num().deg() as i64,
            (FinePlace::Finite(_, g), GaussResidue::Finite { ff, num, den }) => {
                gf_multiplicity(ff, num, g) as i64 - gf_multiplicity(ff, den, g) as i64
            }
            (FinePlace::Number(g), GaussResidue::Function(x)) => {
                k_multiplicity(x.num(), g) as i64 - k_multiplicity(x.den(), g) as i64
            }
            _ => panic!("place and residue live on different residue fields"),
        })
    }

    pub fn degree(&self) -> usize {
        match self {
            FinePlace::Finite(_, g) => g.len() - 1,
            FinePlace::Number(g) => g.deg(),
            FinePlace::Infinity => 1,
        }
    }

    fn sort_key(&self) -> (usize, String) {
        match self {
            FinePlace::Infinity => (usize::MAX, String::new()),
            _ => (self.degree(), self.to_string()),
        }
    }
}

impl fmt::Display for FinePlace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FinePlace::Finite(ff, g) => write!(f, "{}", format_gfpoly(ff, g)),
            FinePlace::Number(g) => write!(f, "{}", format_kpoly(g)),
            FinePlace::Infinity => write!(f, "inf"),
        }
    }
}

impl fmt::Debug for FinePlace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

fn gf_multiplicity(ff: &FiniteField, a: &GfPoly, g: &GfPoly) -> usize {
    let mut a = a.clone();
    let mut n = 0;
    loop {
        let (q, r) = ff.poly_divrem(&a, g);
        if !r.is_empty() {
            return n;
        }
        a = q;
        n += 1;
    }
}

fn k_multiplicity(a: &KPoly, g: &KPoly) -> usize {
    let mut a = a.clone();
    let mut n = 0;
    loop {
        let (q, r) = a.divrem(g);
        if !r.is_zero() {
            return n;
        }
        a = q;
        n += 1;
    }
}

/// Rank-2 valuation ring `O' ⊆ O`: a Gauss ring `O` composed with a place of `res O`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ComposedHandle {
    coarse: GaussHandle,
    place: FinePlace,
}

impl ComposedHandle {
    pub fn new(coarse: GaussHandle, place: FinePlace) -> Result<Self> {
        match (&place, coarse.base.residue_field()) {
            (FinePlace::Infinity, _) => {}
            (FinePlace::Finite(ff, g), crate::padic::ResidueField::Finite(rf)) => {
                if ff != &rf {
                    return Err(Error::invalid("place polynomial is over the wrong finite field"));
                }
                if g.len() < 2 || !ff.is_one(g.last().unwrap()) || !ff.is_irreducible(g) {
                    return Err(Error::invalid("place polynomial must be monic irreducible"));
                }
            }
            (FinePlace::Number(g), crate::padic::ResidueField::Number(k)) => {
                if g.field() != &k || g.deg() == 0 || !g.lc().is_one() {
                    return Err(Error::invalid("place polynomial must be monic over the constant field"));
                }
                let f = factor_over_field(g);
                if f.len() != 1 || f[0].1 != 1 {
                    return Err(Error::invalid("place polynomial must be irreducible"));
                }
            }
            _ => return Err(Error::invalid("place does not match the residue field of the Gauss valuation")),
        }
        Ok(ComposedHandle { coarse, place })
    }

    pub fn coarse(&self) -> &GaussHandle {
        &self.coarse
    }

    pub fn place(&self) -> &FinePlace {
        &self.place
    }

    pub fn field(&self) -> &FunctionField {
        &self.coarse.field
    }

    pub fn residue_characteristic(&self) -> u64 {
        self.coarse.residue_characteristic()
    }

    /// Lexicographic rank-2 membership.
    pub fn membership(&self, x: &RatFunc) -> Membership {
        match self.coarse.value(x).sign() {
            Ordering::Greater => Membership::InMaximalIdeal,
            Ordering::Less => Membership::OutsideRing,
            Ordering::Equal => {
                let r = self.coarse.residue(x).expect("Gauss unit has a residue");
                Membership::from_sign(self.place.ord(&r).expect("unit residue is nonzero").cmp(&0))
            }
        }
    }

    /// Value pair `(v_O(x), ord_place(res(x / c)))` for a normalizing constant `c`;
    /// only the sign pattern is meaningful.
    pub fn value_sign(&self, x: &RatFunc) -> Ordering {
        match self.membership(x) {
            Membership::InMaximalIdeal => Ordering::Greater,
            Membership::Unit => Ordering::Equal,
            Membership::OutsideRing => Ordering::Less,
        }
    }

    pub fn parse(text: &str, field: &FunctionField) -> Result<Self> {
        let rest = text
            .trim()
            .strip_prefix("composed coarse=")
            .ok_or_else(|| Error::invalid(format!("expected `composed coarse=...`, got `{text}`")))?;
        let (coarse, place) = rest
            .rsplit_once(" place=")
            .ok_or_else(|| Error::invalid("composed handle without place="))?;
        let coarse = GaussHandle::parse(coarse, field)?;
        let place = parse_place(place.trim(), &coarse)?;
        ComposedHandle::new(coarse, place)
    }
}

fn parse_place(s: &str, coarse: &GaussHandle) -> Result<FinePlace> {
    if s == "inf" {
        return Ok(FinePlace::Infinity);
    }
    let items = list_items(s)?;
    match coarse.base.residue_field() {
        crate::padic::ResidueField::Finite(ff) => {
            let g: GfPoly = items.iter().map(|c| parse_gf(c, &ff)).collect::<Result<_>>()?;
            Ok(FinePlace::Finite(ff.clone(), ff.poly_trim(g)))
        }
        crate::padic::ResidueField::Number(k) => {
            let g: Vec<FieldElement> = items.iter().map(|c| parse_constant(c, &k)).collect::<Result<_>>()?;
            Ok(FinePlace::Number(KPoly::new(&k, g)))
        }
    }
}

impl fmt::Display for ComposedHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "composed coarse={} place={}", self.coarse, self.place)
    }
}

impl fmt::Debug for ComposedHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// `O' ÷ O`: the place of `res O` whose composition with `O` is `O'`.
pub fn div_valuation(fine: &ComposedHandle) -> &FinePlace {
    &fine.place
}

fn require_normal(emb: &FieldEmbedding) -> Result<()> {
    relative_automorphisms(emb.target(), emb).map(|_| ())
}

/// Gauss extensions to `L(t)` of a Gauss valuation on `F(t)`, for `L` normal over `F`.
pub fn gauss_extend(g: &GaussHandle, emb: &FieldEmbedding) -> Result<Vec<GaussHandle>> {
    if emb.source() != g.field.constants() {
        return Err(Error::invalid("embedding does not start at the constant field"));
    }
    require_normal(emb)?;
    let l = g.field.extend_constants(emb);
    extend_valuation(&g.base, emb)?
        .into_iter()
        .map(|w| GaussHandle::new(&l, w))
        .collect()
}

/// Extensions of `fine` lying under the chosen Gauss extension of its coarse ring.
pub fn fine_extensions(fine: &ComposedHandle, emb: &FieldEmbedding, chosen: &GaussHandle) -> Result<Vec<ComposedHandle>> {
    if chosen.base.restrict(emb)? != fine.coarse.base {
        return Err(Error::precondition("chosen Gauss ring does not extend the coarse ring"));
    }
    let places: Vec<FinePlace> = match &fine.place {
        FinePlace::Infinity => vec![FinePlace::Infinity],
        FinePlace::Finite(_, g) => {
            let rm = residue_map(&fine.coarse.base, &chosen.base, emb)?;
            let ff = rm.target.clone();
            let mut out: Vec<FinePlace> = ff
                .poly_factor(&rm.apply_poly(g))
                .into_iter()
                .map(|(h, _)| FinePlace::Finite(ff.clone(), h))
                .collect();
            out.dedup();
            out
        }
        FinePlace::Number(g) => {
            let mapped = KPoly::new(emb.target(), g.coeffs().iter().map(|c| emb.apply(c)).collect());
            factor_over_field(&mapped).into_iter().map(|(h, _)| FinePlace::Number(h)).collect()
        }
    };
    let mut out: Vec<ComposedHandle> = places
        .into_iter()
        .map(|p| ComposedHandle::new(chosen.clone(), p))
        .collect::<Result<_>>()?;
    out.sort_by_key(|h| h.place.sort_key());
    Ok(out)
}

/// `n_{O, O', L/F}`: number of extensions of `fine` below a fixed extension of its coarse ring.
pub fn count_fine_extensions(fine: &ComposedHandle, emb: &FieldEmbedding, chosen: &GaussHandle) -> Result<usize> {
    if !gauss_extend(&fine.coarse, emb)?.contains(chosen) {
        return Err(Error::precondition("chosen Gauss ring is not an extension of the coarse ring"));
    }
    fine_extensions(fine, emb, chosen).map(|v| v.len())
}

/// All extensions of a composed ring to `L(t)`, grouped by coarse extension.
pub fn composed_extend(fine: &ComposedHandle, emb: &FieldEmbedding) -> Result<Vec<ComposedHandle>> {
    let mut out = Vec::new();
    for g in gauss_extend(&fine.coarse, emb)? {
        out.extend(fine_extensions(fine, emb, &g)?);
    }
    Ok(out)
}

impl ResidueMap {
    /// Preimage of `b` in the source field, if `b` lies in the image.
    pub fn preimage(&self, b: &Gf) -> Option<Gf> {
        let src = &self.source;
        let images: Vec<Gf> = (0..src.degree())
            .map(|i| {
                let mut z = src.zero();
                z[i] = 1;
                self.apply(&z)
            })
            .collect();
        crate::exact_algebra::linalg::fp_solve_modulo(&images, &[], b, src.p()).map(|c| src.from_coeffs(&c))
    }
}

/// Restriction of a Gauss ring on `L(t)` along `F -> L`.
pub fn restrict_gauss(g: &GaussHandle, emb: &FieldEmbedding, base: &FunctionField) -> Result<GaussHandle> {
    GaussHandle::new(base, g.base.restrict(emb)?)
}

/// Restriction of a composed ring on `L(t)` along `F -> L`: the coarse ring restricts,
/// and the place restricts to the product of the distinct conjugates of its polynomial.
pub fn restrict_composed(c: &ComposedHandle, emb: &FieldEmbedding, base: &FunctionField) -> Result<ComposedHandle> {
    let coarse = restrict_gauss(&c.coarse, emb, base)?;
    let place = match &c.place {
        FinePlace::Infinity => FinePlace::Infinity,
        FinePlace::Finite(ff, h) => {
            let rm = residue_map(&coarse.base, &c.coarse.base, emb)?;
            let q_step = rm.source.degree();
            let mut conj: Vec<GfPoly> = Vec::new();
            let mut cur = h.clone();
            loop {
                if conj.contains(&cur) {
                    break;
                }
                conj.push(cur.clone());
                cur = cur
                    .iter()
                    .map(|a| (0..q_step).fold(a.clone(), |acc, _| ff.frobenius(&acc)))
                    .collect();
            }
            let prod = conj.iter().fold(ff.poly_const(ff.one()), |acc, g| ff.poly_mul(&acc, g));
            let g: Option<GfPoly> = prod.iter().map(|a| rm.preimage(a)).collect();
            let g = g.ok_or_else(|| Error::invariant("conjugate product is not defined over the base residue field"))?;
            FinePlace::Finite(rm.source.clone(), g)
        }
        FinePlace::Number(h) => {
            let mut conj: Vec<KPoly> = Vec::new();
            for s in relative_automorphisms(emb.target(), emb)? {
                let img = KPoly::new(emb.target(), h.coeffs().iter().map(|a| s.apply(a)).collect());
                if !conj.contains(&img) {
                    conj.push(img);
                }
            }
            let prod = conj.iter().fold(KPoly::constant(emb.target().one()), |acc, g| acc.mul(g));
            let coeffs: Vec<FieldElement> = prod
                .coeffs()
                .iter()
                .map(|a| preimage_constant(emb, a))
                .collect::<Option<_>>()
                .ok_or_else(|| Error::invariant("conjugate product is not defined over the base field"))?;
            FinePlace::Number(KPoly::new(emb.source(), coeffs))
        }
    };
    ComposedHandle::new(coarse, place)
}

/// Preimage of `y` under a number-field embedding, if it lies in the image.
pub fn preimage_constant(emb: &FieldEmbedding, y: &FieldElement) -> Option<FieldElement> {
    let k = emb.source();
    let l = emb.target();
    let n = k.degree();
    let cols: Vec<Vec<Q>> = (0..n).map(|i| l.coords(&emb.image_of_generator().pow(i as u64))).collect();
    let m: Vec<Vec<Q>> = (0..l.degree()).map(|r| (0..n).map(|i| cols[i][r].clone()).collect()).collect();
    let target = l.coords(y);
    let mut aug: Vec<Vec<Q>> = m
        .into_iter()
        .zip(target)
        .map(|(mut row, b)| {
            row.push(b);
            row
        })
        .collect();
    let pivots = q_rref(&mut aug);
    if pivots.contains(&n) {
        return None;
    }
    let mut c = vec![Q::from_integer(0.into()); n];
    for (r, &pc) in pivots.iter().enumerate() {
        c[pc] = aug[r][n].clone();
    }
    Some(k.from_coeffs(c))
}

/// Finite-field factor count of a place polynomial after extending constants to `F_{p^f}`.
pub fn factor_count_over(ff: &FiniteField, g: &[u64], f: usize) -> usize {
    let big = FiniteField::canonical(ff.p(), f);
    big.poly_factor(&big.poly_from_prime(g)).len()
}
