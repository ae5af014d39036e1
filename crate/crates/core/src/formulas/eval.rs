use std::collections::BTreeMap;

use num_bigint::BigInt;

use super::{Formula, RingKind, Term};
use crate::error::{Error, Result};
use crate::exact_algebra::kpoly::rational_roots_in;
use crate::exact_algebra::{splitting_field, Bounds, FieldEmbedding, QPoly};
use crate::padic::Membership;
use crate::structures::Structure;
use crate::valued::{Element, Field};

/// Everything the evaluator needs from a valued field with named valuation rings.
pub trait Model {
    type Elem: Clone;

    fn int(&self, n: &BigInt) -> Self::Elem;
    fn param(&self, name: &str) -> Result<Self::Elem>;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem>;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn membership(&self, node: &str, a: &Self::Elem) -> Result<Membership>;
    /// All roots of `p` in the field; an error unless `p` splits.
    fn roots(&self, p: &QPoly) -> Result<Vec<Self::Elem>>;
}

fn term<M: Model>(m: &M, t: &Term, env: &[(String, M::Elem)]) -> Result<Option<M::Elem>> {
    let two = |a: &Term, b: &Term| -> Result<Option<(M::Elem, M::Elem)>> {
        Ok(match (term(m, a, env)?, term(m, b, env)?) {
            (Some(x), Some(y)) => Some((x, y)),
            _ => None,
        })
    };
    Ok(match t {
        Term::Int(n) => Some(m.int(n)),
        Term::Param(p) => Some(m.param(p)?),
        Term::Var(v) => Some(
            env.iter()
                .rev()
                .find(|(name, _)| name == v)
                .map(|(_, x)| x.clone())
                .ok_or_else(|| Error::UnboundVariable(v.clone()))?,
        ),
        Term::Add(a, b) => two(a, b)?.map(|(x, y)| m.add(&x, &y)),
        Term::Sub(a, b) => two(a, b)?.map(|(x, y)| m.sub(&x, &y)),
        Term::Mul(a, b) => two(a, b)?.map(|(x, y)| m.mul(&x, &y)),
        Term::Div(a, b) => two(a, b)?.and_then(|(x, y)| m.inv(&y).map(|yi| m.mul(&x, &yi))),
        Term::Neg(a) => term(m, a, env)?.map(|x| m.neg(&x)),
        Term::Pow(a, e) => term(m, a, env)?.map(|x| {
            let mut acc = m.int(&BigInt::from(1));
            let mut base = x;
            let mut e = *e;
            while e > 0 {
                if e & 1 == 1 {
                    acc = m.mul(&acc, &base);
                }
                base = m.mul(&base, &base);
                e >>= 1;
            }
            acc
        }),
    })
}

fn eval_in<M: Model>(m: &M, f: &Formula, env: &mut Vec<(String, M::Elem)>) -> Result<bool> {
    Ok(match f {
        Formula::Zero(t) => term(m, t, env)?.is_some_and(|x| m.is_zero(&x)),
        Formula::In(t, kind, node) => match term(m, t, env)? {
            None => false,
            Some(x) => {
                let mem = m.membership(node, &x)?;
                match kind {
                    RingKind::Ring => mem.in_ring(),
                    RingKind::Ideal => mem == Membership::InMaximalIdeal,
                }
            }
        },
        Formula::Not(a) => !eval_in(m, a, env)?,
        Formula::And(a, b) => eval_in(m, a, env)? && eval_in(m, b, env)?,
        Formula::Or(a, b) => eval_in(m, a, env)? || eval_in(m, b, env)?,
        Formula::ExistsRoot { var, poly, body } => {
            for r in m.roots(poly)? {
                env.push((var.clone(), r));
                let hit = eval_in(m, body, env);
                env.pop();
                if hit? {
                    return Ok(true);
                }
            }
            false
        }
    })
}

/// Truth of a sentence in a model. Binders range over the (finite) root sets.
pub fn evaluate<M: Model>(f: &Formula, model: &M) -> Result<bool> {
    eval_in(model, f, &mut Vec::new())
}

/// Value of a closed term; `None` when it divides by zero.
pub fn evaluate_term<M: Model>(t: &Term, model: &M) -> Result<Option<M::Elem>> {
    term(model, t, &[])
}

/// Truth of a formula with one free variable at a given element.
pub fn evaluate_at<M: Model>(f: &Formula, model: &M, var: &str, x: M::Elem) -> Result<bool> {
    eval_in(model, f, &mut vec![(var.to_string(), x)])
}

/// A structure read as a model, with parameter values in its field.
#[derive(Clone, Debug)]
pub struct StructureModel<'a> {
    structure: &'a Structure,
    params: BTreeMap<String, Element>,
}

impl<'a> StructureModel<'a> {
    pub fn new(structure: &'a Structure, params: BTreeMap<String, Element>) -> Result<Self> {
        for (name, x) in &params {
            if x.field() != *structure.field() {
                return Err(Error::invalid(format!("parameter `${name}` lives in the wrong field")));
            }
        }
        Ok(StructureModel { structure, params })
    }

    /// Transports parameters given over a subfield along its constant embedding.
    pub fn transported(structure: &'a Structure, params: &BTreeMap<String, Element>, emb: &FieldEmbedding) -> Result<Self> {
        let mapped = params.iter().map(|(k, x)| (k.clone(), x.field().map(emb, x))).collect();
        Self::new(structure, mapped)
    }
}

impl Model for StructureModel<'_> {
    type Elem = Element;

    fn int(&self, n: &BigInt) -> Element {
        self.structure.field().from_q(crate::exact_algebra::Q::from_integer(n.clone()))
    }

    fn param(&self, name: &str) -> Result<Element> {
        self.params
            .get(name)
            .cloned()
            .ok_or_else(|| Error::invalid(format!("parameter `${name}` is not bound")))
    }

    fn add(&self, a: &Element, b: &Element) -> Element {
        a.add(b)
    }

    fn sub(&self, a: &Element, b: &Element) -> Element {
        a.sub(b)
    }

    fn mul(&self, a: &Element, b: &Element) -> Element {
        a.mul(b)
    }

    fn neg(&self, a: &Element) -> Element {
        a.neg()
    }

    fn inv(&self, a: &Element) -> Option<Element> {
        a.inv()
    }

    fn is_zero(&self, a: &Element) -> bool {
        a.is_zero()
    }

    fn membership(&self, node: &str, a: &Element) -> Result<Membership> {
        Ok(self.structure.handle_by_name(node)?.membership(a))
    }

    fn roots(&self, p: &QPoly) -> Result<Vec<Element>> {
        let field = self.structure.field();
        let k = field.constants();
        let roots = rational_roots_in(k, p);
        if roots.len() != p.squarefree_part().deg() {
            return Err(Error::precondition(format!(
                "binder polynomial {} does not split over {}",
                super::polylit_string(p),
                field.label()
            )));
        }
        Ok(roots.into_iter().map(|r| field.from_constant(r)).collect())
    }
}

/// A finite normal extension of the base on which the formula is decided.
#[derive(Clone, Debug)]
pub struct DeterminingExtension {
    pub base: Field,
    pub field: Field,
    /// Constant-field embedding of the base into `field`.
    pub embedding: FieldEmbedding,
}

/// Splitting field of the binder polynomials (and any `extra` ones) over the
/// constants, closed up to a normal extension.
pub fn determining_extension(f: &Formula, base: &Field, extra: &[QPoly], bounds: Bounds) -> Result<DeterminingExtension> {
    let mut polys = f.binder_polynomials();
    polys.extend(extra.iter().cloned());
    let k = base.constants();
    if polys.is_empty() {
        return Ok(DeterminingExtension {
            base: base.clone(),
            field: base.clone(),
            embedding: FieldEmbedding::identity(k),
        });
    }
    let sf = splitting_field(&polys, k, bounds)?;
    let field = base.extend_constants(&sf.base_embedding)?;
    Ok(DeterminingExtension {
        base: base.clone(),
        field,
        embedding: sf.base_embedding,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_algebra::NumberField;
    use crate::formulas::parse;
    use crate::padic::ValuationHandle;
    use crate::trees::FiniteTree;
    use crate::valued::Handle;

    fn qi_with_pin(pin_residue_of_i: u64) -> Structure {
        let k = NumberField::new("Q(i)", QPoly::from_ints(&[1, 0, 1])).unwrap();
        let handle = ValuationHandle::places_above(&k, 5)
            .unwrap()
            .into_iter()
            .find(|h| {
                let r = h.residue(&k.generator()).unwrap();
                r.to_string() == pin_residue_of_i.to_string()
            })
            .unwrap();
        let tree = FiniteTree::from_edges(&[("a", "_")]).unwrap();
        let field = Field::Number(k.clone());
        Structure::new(tree, field.clone(), vec![Handle::trivial(&field), Handle::Number(handle)]).unwrap()
    }

    #[test]
    fn binder_examples() {
        let phi = parse("exists x root [1,0,1]: x-2 in m[a]", None).unwrap();
        for pin in [2, 3] {
            let s = qi_with_pin(pin);
            let m = StructureModel::new(&s, BTreeMap::new()).unwrap();
            assert!(evaluate(&phi, &m).unwrap());
        }
        let s = qi_with_pin(2);
        let m = StructureModel::new(&s, BTreeMap::new()).unwrap();
        assert!(evaluate(&parse("0 = 0", None).unwrap(), &m).unwrap());
        assert!(!evaluate(&parse("1/0 in O[a] | 1/(2-2) = 0", None).unwrap(), &m).unwrap());
        let not_split = parse("exists x root [-2,0,1]: 0 = 0", None).unwrap();
        assert!(matches!(evaluate(&not_split, &m), Err(Error::Precondition(_))));
        assert!(matches!(
            evaluate(&parse("$c = 0", None).unwrap(), &m),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn determining_extensions() {
        let q = Field::Number(NumberField::rationals());
        let phi = parse("exists x root [1,0,1] : exists y root [-2,0,1] : 0 = 0", None).unwrap();
        let d = determining_extension(&phi, &q, &[], Bounds::default()).unwrap();
        assert_eq!(d.field.constants().degree(), 4);
        let d = determining_extension(&parse("1 = 0", None).unwrap(), &q, &[], Bounds::default()).unwrap();
        assert_eq!(d.field.constants().degree(), 1);
    }
}
