//! Consistency of sentences `exists x (Q(x) = 0 & R_1(x) & .. & R_n(x))`, where
//! each `R_i` is quantifier-free and talks about the single node `a_i`.
//!
//! With `χ(⊥) = 0`, the condition at `a_i` is satisfiable iff some root of `Q`
//! satisfies it under some extension of `v_{p_i}` to the splitting field of `Q`;
//! the sentence is consistent iff every condition is. A witness is obtained by
//! moving each witnessing ring along an automorphism that sends its root to a
//! common root. With `χ(⊥) = p > 0` every ring is trivial and only roots of `Q`
//! in `F_p^alg` remain.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exact_algebra::factor::is_irreducible_over_q;
use crate::exact_algebra::gf::Gf;
use crate::exact_algebra::{automorphisms, splitting_field, FieldElement, FiniteField, QPoly};
use crate::formulas::{evaluate, evaluate_at, Formula, Model, StructureModel};
use crate::measure::{measure, MeasureConfig, MeasureResult, Params};
use crate::padic::{Membership, ValuationHandle};
use crate::par;
use crate::structures::Structure;
use crate::trees::{CharFunction, FiniteTree};
use crate::valued::{Field, Handle};

/// The variable every condition is stated in.
pub const ROOT_VAR: &str = "x";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PsiSentence {
    q: QPoly,
    /// `(node, condition in x)`, in input order.
    conditions: Vec<(String, Formula)>,
}

impl PsiSentence {
    pub fn new(q: QPoly, conditions: Vec<(String, Formula)>) -> Result<Self> {
        if q.deg() < 1 || !q.is_monic() || !is_irreducible_over_q(&q) {
            return Err(Error::invalid("Q must be monic and irreducible over Q"));
        }
        for (node, r) in &conditions {
            if !r.is_quantifier_free() {
                return Err(Error::unsupported(format!("condition at `{node}` has a quantifier")));
            }
            if !r.params().is_empty() {
                return Err(Error::unsupported(format!("condition at `{node}` has parameters")));
            }
            if let Some(v) = r.free_vars().into_iter().find(|v| v != ROOT_VAR) {
                return Err(Error::UnboundVariable(v));
            }
            if let Some(other) = r.nodes().into_iter().find(|n| n != node) {
                return Err(Error::unsupported(format!(
                    "condition at `{node}` mentions node `{other}`; only one ring per condition is decided"
                )));
            }
        }
        Ok(PsiSentence { q, conditions })
    }

    pub fn q(&self) -> &QPoly {
        &self.q
    }

    pub fn conditions(&self) -> &[(String, Formula)] {
        &self.conditions
    }

    /// `exists x root Q : R_1 & .. & R_n`.
    pub fn formula(&self) -> Formula {
        let body = self
            .conditions
            .iter()
            .map(|(_, r)| r.clone())
            .reduce(Formula::and)
            .unwrap_or_else(Formula::truth);
        Formula::exists_root(ROOT_VAR, self.q.clone(), body)
    }
}

impl fmt::Display for PsiSentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.formula())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeVerdict {
    pub node: String,
    pub characteristic: u64,
    pub satisfiable: bool,
    /// Index of the witnessing extension of `v_p` and of the root.
    pub witness: Option<(usize, usize)>,
    /// Witnessing extension, as printed.
    pub witness_handle: Option<String>,
}

#[derive(Clone, Debug)]
pub struct ConsistencyVerdict {
    pub consistent: bool,
    pub per_node: Vec<NodeVerdict>,
    /// Present when consistent in characteristic 0.
    pub witness_structure: Option<Structure>,
    /// The common root the witness satisfies the conditions at.
    pub witness_root: Option<FieldElement>,
}

/// Characteristic used for each condition's node, checking the node is minimal positive.
fn condition_chars(psi: &PsiSentence, tree: &FiniteTree, chi: &CharFunction) -> Result<Vec<(usize, u64)>> {
    let minimal = chi.minimal_positive(tree);
    psi.conditions
        .iter()
        .map(|(node, _)| {
            let i = tree.node(node)?;
            if !minimal.contains(&i) {
                return Err(Error::precondition(format!(
                    "node `{node}` is not a minimal node of positive characteristic"
                )));
            }
            Ok((i, chi.get(i)))
        })
        .collect()
}

/// Rings of the witness on the whole tree: trivial at characteristic 0, and the
/// ring of the minimal positive node below otherwise.
fn spread(tree: &FiniteTree, chi: &CharFunction, field: &Field, at: &BTreeMap<usize, Handle>) -> Result<Vec<Handle>> {
    (0..tree.len())
        .map(|i| {
            if chi.get(i) == 0 {
                return Ok(Handle::trivial(field));
            }
            let a = tree
                .chain(i)
                .into_iter()
                .filter(|&j| chi.get(j) != 0)
                .min_by_key(|&j| tree.depth(j))
                .expect("positive node");
            at.get(&a)
                .cloned()
                .ok_or_else(|| Error::invariant(format!("no ring chosen at `{}`", tree.name(a))))
        })
        .collect()
}

pub fn decide_psi(psi: &PsiSentence, tree: &FiniteTree, chi: &CharFunction, cfg: MeasureConfig) -> Result<ConsistencyVerdict> {
    if chi.as_slice().len() != tree.len() {
        return Err(Error::invalid("characteristic function and tree disagree"));
    }
    if chi.get(0) != 0 {
        return decide_positive(psi, tree, chi);
    }
    let chars = condition_chars(psi, tree, chi)?;
    let sf = splitting_field(std::slice::from_ref(&psi.q), &crate::exact_algebra::NumberField::rationals(), cfg.bounds)?;
    let l = sf.field.clone();
    let field = Field::Number(l.clone());
    let roots = sf.roots.clone();

    let jobs: Vec<usize> = (0..psi.conditions.len()).collect();
    let per_node = par::try_map(cfg.exec, &jobs, |&k| -> Result<(NodeVerdict, Option<ValuationHandle>)> {
        let (node, r) = &psi.conditions[k];
        let p = chars[k].1;
        let local = FiniteTree::from_edges(&[(node.as_str(), crate::trees::BOTTOM)])?;
        for (wi, w) in ValuationHandle::places_above(&l, p)?.into_iter().enumerate() {
            let s = Structure::new(local.clone(), field.clone(), vec![Handle::trivial(&field), Handle::Number(w.clone())])?;
            let model = StructureModel::new(&s, Params::new())?;
            for (ri, root) in roots.iter().enumerate() {
                if evaluate_at(r, &model, ROOT_VAR, field.from_constant(root.clone()))? {
                    let verdict = NodeVerdict {
                        node: node.clone(),
                        characteristic: p,
                        satisfiable: true,
                        witness: Some((wi, ri)),
                        witness_handle: Some(w.to_string()),
                    };
                    return Ok((verdict, Some(w)));
                }
            }
        }
        let verdict = NodeVerdict {
            node: node.clone(),
            characteristic: p,
            satisfiable: false,
            witness: None,
            witness_handle: None,
        };
        Ok((verdict, None))
    })?;

    let consistent = per_node.iter().all(|(v, _)| v.satisfiable);
    let mut verdict = ConsistencyVerdict {
        consistent,
        per_node: per_node.iter().map(|(v, _)| v.clone()).collect(),
        witness_structure: None,
        witness_root: None,
    };
    if consistent {
        let alpha = roots[0].clone();
        let auts = automorphisms(&l)?;
        let mut at = BTreeMap::new();
        for (k, (v, w)) in per_node.iter().enumerate() {
            let (_, ri) = v.witness.expect("satisfiable");
            let w = w.as_ref().expect("satisfiable");
            let sigma = auts
                .iter()
                .find(|s| s.apply(&roots[ri]) == alpha)
                .ok_or_else(|| Error::invariant("Galois group is not transitive on the roots of Q"))?;
            at.insert(chars[k].0, Handle::Number(w.pushforward(sigma)?));
        }
        // minimal positive nodes without a condition get any ring of the right residue characteristic
        for i in chi.minimal_positive(tree) {
            if let std::collections::btree_map::Entry::Vacant(e) = at.entry(i) {
                e.insert(Handle::Number(ValuationHandle::places_above(&l, chi.get(i))?.remove(0)));
            }
        }
        let s = Structure::new(tree.clone(), field.clone(), spread(tree, chi, &field, &at)?)?;
        let model = StructureModel::new(&s, Params::new())?;
        let body = psi.formula();
        let Formula::ExistsRoot { body, .. } = &body else { unreachable!() };
        if !evaluate_at(body, &model, ROOT_VAR, field.from_constant(alpha.clone()))? {
            return Err(Error::invariant("constructed witness does not satisfy the sentence"));
        }
        verdict.witness_structure = Some(s);
        verdict.witness_root = Some(alpha);
    }
    Ok(verdict)
}

/// `F_q` with every ring trivial.
struct TrivialFiniteModel {
    ff: FiniteField,
    roots: Vec<Gf>,
}

impl Model for TrivialFiniteModel {
    type Elem = Gf;

    fn int(&self, n: &BigInt) -> Gf {
        let p = BigInt::from(self.ff.p());
        self.ff.from_u64(n.mod_floor(&p).to_u64().expect("reduced"))
    }

    fn param(&self, name: &str) -> Result<Gf> {
        Err(Error::invalid(format!("parameter `${name}` is not bound")))
    }

    fn add(&self, a: &Gf, b: &Gf) -> Gf {
        self.ff.add(a, b)
    }

    fn sub(&self, a: &Gf, b: &Gf) -> Gf {
        self.ff.sub(a, b)
    }

    fn mul(&self, a: &Gf, b: &Gf) -> Gf {
        self.ff.mul(a, b)
    }

    fn neg(&self, a: &Gf) -> Gf {
        self.ff.neg(a)
    }

    fn inv(&self, a: &Gf) -> Option<Gf> {
        self.ff.inv(a)
    }

    fn is_zero(&self, a: &Gf) -> bool {
        self.ff.is_zero(a)
    }

    fn membership(&self, _node: &str, a: &Gf) -> Result<Membership> {
        Ok(if self.ff.is_zero(a) {
            Membership::InMaximalIdeal
        } else {
            Membership::Unit
        })
    }

    fn roots(&self, _p: &QPoly) -> Result<Vec<Gf>> {
        Err(Error::unsupported("nested binders in positive characteristic"))
    }
}

/// Reduction mod `p` of a rational polynomial with `p`-integral coefficients.
fn reduce_mod_p(q: &QPoly, p: u64) -> Result<Vec<u64>> {
    let pb = BigInt::from(p);
    q.coeffs()
        .iter()
        .map(|c| {
            let den = c.denom().mod_floor(&pb);
            if den.is_zero() {
                return Err(Error::unsupported(format!("Q has a coefficient with {p} in the denominator")));
            }
            let inv = den.modpow(&(&pb - 2u32), &pb);
            Ok((c.numer() * inv).mod_floor(&pb).to_u64().expect("reduced"))
        })
        .collect()
}

fn decide_positive(psi: &PsiSentence, tree: &FiniteTree, chi: &CharFunction) -> Result<ConsistencyVerdict> {
    let p = chi.get(0);
    for (node, _) in &psi.conditions {
        tree.node(node)?;
    }
    let qbar = reduce_mod_p(&psi.q, p)?;
    let fp = FiniteField::prime(p);
    let degree = fp
        .poly_factor(&fp.poly_from_prime(&qbar))
        .iter()
        .map(|(g, _)| g.len() - 1)
        .fold(1, |a, b| a.lcm(&b));
    let ff = FiniteField::canonical(p, degree);
    let roots = ff.poly_roots(&ff.poly_from_prime(&qbar));
    let model = TrivialFiniteModel { ff, roots };
    let mut per_node: Vec<NodeVerdict> = psi
        .conditions
        .iter()
        .map(|(node, _)| NodeVerdict {
            node: node.clone(),
            characteristic: p,
            satisfiable: false,
            witness: None,
            witness_handle: None,
        })
        .collect();
    let mut consistent = false;
    for (ri, root) in model.roots.iter().enumerate() {
        let mut all = true;
        for (k, (_, r)) in psi.conditions.iter().enumerate() {
            let ok = evaluate_at(r, &model, ROOT_VAR, root.clone())?;
            if ok && per_node[k].witness.is_none() {
                per_node[k].satisfiable = true;
                per_node[k].witness = Some((0, ri));
                per_node[k].witness_handle = Some("trivial".into());
            }
            all &= ok;
        }
        consistent |= all;
    }
    Ok(ConsistencyVerdict {
        consistent,
        per_node,
        witness_structure: None,
        witness_root: None,
    })
}

/// The structure on `Q` with `v_{χ(x)}` at every positive node and trivial rings elsewhere.
pub fn base_structure(tree: &FiniteTree, chi: &CharFunction) -> Result<Structure> {
    let field = Field::Number(crate::exact_algebra::NumberField::rationals());
    let handles = (0..tree.len())
        .map(|i| match chi.get(i) {
            0 => Ok(Handle::trivial(&field)),
            p => Ok(Handle::Number(ValuationHandle::padic_on_q(p)?)),
        })
        .collect::<Result<Vec<_>>>()?;
    Structure::new(tree.clone(), field, handles)
}

/// Decides the sentence and measures it over the base structure; the two should
/// agree on positivity.
pub fn consistency_equals_positive_measure(psi: &PsiSentence, tree: &FiniteTree, chi: &CharFunction, cfg: MeasureConfig) -> Result<(bool, ConsistencyVerdict, MeasureResult)> {
    if chi.get(0) != 0 {
        return Err(Error::unsupported("measures are only defined in characteristic 0"));
    }
    let verdict = decide_psi(psi, tree, chi, cfg)?;
    let s = base_structure(tree, chi)?;
    let m = measure(&psi.formula(), &Params::new(), &s, cfg)?;
    if let Some(w) = &verdict.witness_structure {
        let model = StructureModel::new(w, Params::new())?;
        if !evaluate(&psi.formula(), &model)? {
            return Err(Error::invariant("witness does not satisfy the sentence"));
        }
    }
    Ok((verdict.consistent == (m.true_count > 0), verdict, m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulas::parse_open;

    fn sentence(q: &[i64], conds: &[(&str, &str)]) -> PsiSentence {
        let conditions = conds
            .iter()
            .map(|(n, r)| (n.to_string(), parse_open(r, None, &[ROOT_VAR]).unwrap()))
            .collect();
        PsiSentence::new(QPoly::from_ints(q), conditions).unwrap()
    }

    fn single(p: u64) -> (FiniteTree, CharFunction) {
        let tree = FiniteTree::from_edges(&[("a", "_")]).unwrap();
        let chi = CharFunction::new(&tree, vec![0, p]).unwrap();
        (tree, chi)
    }

    #[test]
    fn gaussian_examples() {
        let psi = sentence(&[1, 0, 1], &[("a", "x - 2 in m[a]")]);
        let (tree, chi5) = single(5);
        let v = decide_psi(&psi, &tree, &chi5, MeasureConfig::default()).unwrap();
        assert!(v.consistent);
        let w = v.witness_structure.unwrap();
        let model = StructureModel::new(&w, Params::new()).unwrap();
        assert!(evaluate(&psi.formula(), &model).unwrap());

        let (tree, chi7) = single(7);
        let (agree, v, m) = consistency_equals_positive_measure(&psi, &tree, &chi7, MeasureConfig::default()).unwrap();
        assert!(agree && !v.consistent && m.true_count == 0);

        let taut = sentence(&[-2, 0, 0, 1], &[("a", "0 = 0")]);
        assert!(decide_psi(&taut, &tree, &chi7, MeasureConfig::default()).unwrap().consistent);
    }

    #[test]
    fn two_aligned_nodes() {
        let psi = sentence(&[1, 0, 1], &[("a", "x - 2 in m[a]"), ("b", "x - 5 in m[b]")]);
        let tree = FiniteTree::from_edges(&[("a", "_"), ("b", "_")]).unwrap();
        let chi = CharFunction::new(&tree, vec![0, 5, 13]).unwrap();
        let (agree, v, m) = consistency_equals_positive_measure(&psi, &tree, &chi, MeasureConfig::default()).unwrap();
        assert!(agree && v.consistent);
        assert_eq!((m.true_count, m.total), (2, 4));
    }

    #[test]
    fn positive_characteristic_and_rejections() {
        let tree = FiniteTree::from_edges(&[("a", "_")]).unwrap();
        let chi = CharFunction::new(&tree, vec![3, 3]).unwrap();
        // x^2 + 1 has no root 0 mod 3, but roots exist in F_9
        let psi = sentence(&[1, 0, 1], &[("a", "x in m[a]")]);
        assert!(!decide_psi(&psi, &tree, &chi, MeasureConfig::default()).unwrap().consistent);
        let psi = sentence(&[1, 0, 1], &[("a", "x^2 + 1 = 0 & x in O[a]")]);
        assert!(decide_psi(&psi, &tree, &chi, MeasureConfig::default()).unwrap().consistent);

        let mixed = vec![("a".to_string(), parse_open("x in O[b]", None, &[ROOT_VAR]).unwrap())];
        assert!(matches!(PsiSentence::new(QPoly::from_ints(&[1, 0, 1]), mixed), Err(Error::Unsupported(_))));
        assert!(PsiSentence::new(QPoly::from_ints(&[-1, 0, 1]), vec![]).is_err());

        let (tree, chi) = single(5);
        let wrong = sentence(&[1, 0, 1], &[("_", "0 = 0")]);
        assert!(matches!(decide_psi(&wrong, &tree, &chi, MeasureConfig::default()), Err(Error::Precondition(_))));
    }
}
