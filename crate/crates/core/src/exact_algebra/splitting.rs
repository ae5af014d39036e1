//! Splitting fields by iterated primitive elements, and automorphism groups.

use std::collections::BTreeSet;

use num_traits::{One, Zero};

use super::factor::factor_squarefree;
use super::kpoly::{factor_squarefree_over, rational_roots_in, KPoly};
use super::number_field::{eval_at, FieldElement, FieldEmbedding, NumberField};
use super::poly::QPoly;
use super::Q;
use crate::error::{Error, Result};

/// Size limits for splitting-field constructions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Bounds {
    /// Largest accepted degree of an input polynomial.
    pub degree: usize,
    /// Largest absolute degree of a constructed field.
    pub field_degree: usize,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            degree: 6,
            field_degree: 48,
        }
    }
}

/// A splitting field `L` of some polynomial over a base `K`, with `K -> L`.
#[derive(Clone, Debug)]
pub struct SplittingField {
    pub field: NumberField,
    /// Distinct roots of the requested polynomials, sorted.
    pub roots: Vec<FieldElement>,
    pub base_embedding: FieldEmbedding,
}

/// Splitting field over `Q` of a product of rational polynomials.
pub fn splitting_field_over_q(polys: &[QPoly], bounds: Bounds) -> Result<SplittingField> {
    splitting_field(polys, &NumberField::rationals(), bounds)
}

/// Splitting field over `K` of rational polynomials. The result is the splitting
/// field over `Q` of the polynomials together with the minimal polynomial of `K`,
/// so it is normal over both `Q` and `K`.
pub fn splitting_field(polys: &[QPoly], base: &NumberField, bounds: Bounds) -> Result<SplittingField> {
    let kpolys: Vec<KPoly> = polys.iter().map(|p| KPoly::from_qpoly(base, p)).collect();
    splitting_field_k(&kpolys, base, bounds)
}

/// As [`splitting_field`] for polynomials with coefficients in `K`.
pub fn splitting_field_k(polys: &[KPoly], base: &NumberField, bounds: Bounds) -> Result<SplittingField> {
    let mut total = QPoly::one();
    for p in polys {
        if p.is_zero() {
            return Err(Error::invalid("cannot split the zero polynomial"));
        }
        if p.deg() > bounds.degree {
            return Err(Error::resource(format!(
                "polynomial of degree {} exceeds the degree bound {}",
                p.deg(),
                bounds.degree
            )));
        }
        let rational = match p.to_qpoly() {
            Some(q) => q,
            None => p.squarefree_decomposition().iter().fold(QPoly::one(), |acc, (g, _)| &acc * &g.norm()),
        };
        total = &total * &rational;
    }
    if !base.is_rationals() {
        total = &total * base.minpoly();
    }
    let label = format!("split{}", total.squarefree_part());
    let field = build_splitting_field(&total, &label, bounds)?;
    let base_embedding = if base.is_rationals() {
        FieldEmbedding::from_rationals(&field)
    } else {
        let img = rational_roots_in(&field, base.minpoly())
            .into_iter()
            .next()
            .ok_or_else(|| Error::invariant("base generator has no image in its splitting field"))?;
        FieldEmbedding::new_unchecked(base.clone(), img)
    };
    let mut roots = BTreeSet::new();
    for p in polys {
        let mapped = KPoly::new(
            &field,
            p.coeffs().iter().map(|c| base_embedding.apply(c)).collect(),
        );
        let cand = match p.to_qpoly() {
            Some(q) => rational_roots_in(&field, &q),
            None => rational_roots_in(&field, &p.norm()),
        };
        roots.extend(cand.into_iter().filter(|r| mapped.eval(r).is_zero()));
    }
    Ok(SplittingField {
        field,
        roots: roots.into_iter().collect(),
        base_embedding,
    })
}

/// Builds `Q(all roots of f)` and seeds its root cache and conjugates.
fn build_splitting_field(f: &QPoly, label: &str, bounds: Bounds) -> Result<NumberField> {
    let factors = factor_squarefree(&f.squarefree_part());
    let mut field = NumberField::rationals();
    // roots[j] are the known roots of factors[j]; combo gives θ_L = Σ c_i root_i
    let mut roots: Vec<Vec<FieldElement>> = vec![Vec::new(); factors.len()];
    let mut combo: Vec<Vec<Q>> = vec![Vec::new(); factors.len()];
    loop {
        let mut to_adjoin: Option<(usize, KPoly)> = None;
        for (j, g) in factors.iter().enumerate() {
            let mut rest = KPoly::from_qpoly(&field, g);
            for r in &roots[j] {
                rest = rest.divrem(&KPoly::linear_root(r)).0;
            }
            if rest.deg() == 0 {
                continue;
            }
            for h in factor_squarefree_over(&rest) {
                if h.deg() == 1 {
                    roots[j].push(-&h.coeffs()[0]);
                    combo[j].push(Q::zero());
                } else if to_adjoin.is_none() {
                    to_adjoin = Some((j, h));
                }
            }
        }
        let Some((j, h)) = to_adjoin else { break };
        let new_deg = field.degree() * h.deg();
        if new_deg > bounds.field_degree {
            return Err(Error::resource(format!(
                "splitting field degree exceeds the bound {}",
                bounds.field_degree
            )));
        }
        let (next, phi, rho, scale, s) = adjoin_root(&field, &h, label)?;
        for rs in roots.iter_mut() {
            for r in rs.iter_mut() {
                *r = phi.apply(r);
            }
        }
        // θ' = d(ρ + sθ) = d ρ + d s Σ c_i root_i
        let ds = &scale * Q::from_integer(s.into());
        for cs in combo.iter_mut() {
            for c in cs.iter_mut() {
                *c *= &ds;
            }
        }
        roots[j].push(rho);
        combo[j].push(scale);
        field = next;
    }
    for (j, g) in factors.iter().enumerate() {
        let mut rs = roots[j].clone();
        rs.sort();
        field.cache_roots(g.clone(), rs);
    }
    let conj = conjugates_from_roots(&field, &roots, &combo);
    if conj.len() != field.degree() {
        return Err(Error::invariant("splitting field has the wrong number of automorphisms"));
    }
    let _ = field.conjugates_cell().set(Some(conj));
    Ok(field)
}

/// Adjoins a root of `h` (irreducible over `L`). Returns the new field, the embedding
/// `L -> L'`, the new root, and `(d, s)` with new generator `d (root + s θ_L)`.
fn adjoin_root(
    l: &NumberField,
    h: &KPoly,
    label: &str,
) -> Result<(NumberField, FieldEmbedding, FieldElement, Q, i64)> {
    let theta = l.generator();
    let mut found = None;
    for s in [0i64].into_iter().chain((1..40).flat_map(|k| [k, -k])) {
        let st = theta.scale(&Q::from_integer(s.into()));
        let n = if l.is_rationals() {
            h.to_qpoly().unwrap()
        } else {
            h.shift_var(&-&st).norm()
        };
        if n.is_squarefree() {
            found = Some((s, n));
            break;
        }
        if l.is_rationals() {
            break;
        }
    }
    let (s, n) = found.ok_or_else(|| Error::invariant("no squarefree norm for primitive element"))?;
    let d = n.denominator_lcm();
    let dq = Q::from_integer(d.clone());
    let minpoly = n.scale_roots(&dq);
    let next = NumberField::new_unchecked(label, minpoly);
    let gamma = next.generator().scale(&(Q::one() / &dq));
    let sq = Q::from_integer(s.into());
    let theta_img = if l.is_rationals() {
        next.zero()
    } else {
        // gcd_y(m_L(y), h(γ - s y)) with h's coefficients read as polynomials in y
        let lin = KPoly::new(&next, vec![gamma.clone(), next.from_q(-sq.clone())]);
        let mut acc = KPoly::zero(&next);
        for c in h.coeffs().iter().rev() {
            acc = acc.mul(&lin).add(&KPoly::from_qpoly(&next, c.repr()));
        }
        let g = acc.gcd(&KPoly::from_qpoly(&next, l.minpoly()));
        if g.deg() != 1 {
            return Err(Error::invariant("primitive element recovery failed"));
        }
        -&g.coeffs()[0]
    };
    let phi = FieldEmbedding::new_unchecked(l.clone(), theta_img.clone());
    let rho = &gamma - &theta_img.scale(&sq);
    debug_assert!(h_image(h, &phi).eval(&rho).is_zero());
    Ok((next, phi, rho, dq, s))
}

fn h_image(h: &KPoly, phi: &FieldEmbedding) -> KPoly {
    KPoly::new(
        phi.target(),
        h.coeffs().iter().map(|c| phi.apply(c)).collect(),
    )
}

/// Images of the generator under all automorphisms, from root permutations.
fn conjugates_from_roots(l: &NumberField, roots: &[Vec<FieldElement>], combo: &[Vec<Q>]) -> Vec<FieldElement> {
    // only roots with nonzero weight matter
    let mut slots: Vec<(usize, Q)> = Vec::new();
    for (j, cs) in combo.iter().enumerate() {
        for c in cs {
            if !c.is_zero() {
                slots.push((j, c.clone()));
            }
        }
    }
    let mut out = BTreeSet::new();
    let mut choice = vec![0usize; slots.len()];
    loop {
        let mut val = l.zero();
        let mut used: Vec<Vec<usize>> = vec![Vec::new(); roots.len()];
        let mut ok = true;
        for (k, (j, c)) in slots.iter().enumerate() {
            if used[*j].contains(&choice[k]) {
                ok = false;
                break;
            }
            used[*j].push(choice[k]);
            val = &val + &roots[*j][choice[k]].scale(c);
        }
        if ok && eval_at(l.minpoly(), &val).is_zero() {
            out.insert(val);
        }
        // odometer
        let mut k = 0;
        loop {
            if k == slots.len() {
                return out.into_iter().collect();
            }
            choice[k] += 1;
            if choice[k] < roots[slots[k].0].len() {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
    }
}

/// All automorphisms of a normal field, identity first.
pub fn automorphisms(l: &NumberField) -> Result<Vec<FieldEmbedding>> {
    let conj = l
        .conjugates_cell()
        .get_or_init(|| {
            let c = rational_roots_in(l, l.minpoly());
            (c.len() == l.degree()).then_some(c)
        })
        .clone()
        .ok_or_else(|| Error::precondition(format!("field {} is not normal over Q", l.label())))?;
    let id = l.generator();
    let mut out: Vec<FieldEmbedding> = conj
        .into_iter()
        .map(|c| FieldEmbedding::new_unchecked(l.clone(), c))
        .collect();
    out.sort_by_key(|e| (e.image_of_generator() != &id, e.image_of_generator().clone()));
    Ok(out)
}

/// Automorphisms of `L` fixing the image of `K` pointwise.
pub fn relative_automorphisms(l: &NumberField, k_image: &FieldEmbedding) -> Result<Vec<FieldEmbedding>> {
    if k_image.target() != l {
        return Err(Error::invalid("embedding does not land in the given field"));
    }
    let g = k_image.image_of_generator();
    let all = automorphisms(l)?;
    let rel: Vec<FieldEmbedding> = all.into_iter().filter(|s| &s.apply(g) == g).collect();
    let k = k_image.source().degree();
    if rel.len() * k != l.degree() {
        return Err(Error::invariant("relative automorphism count mismatch"));
    }
    Ok(rel)
}

/// Whether `L` is normal over `Q` (its minimal polynomial splits in `L`).
pub fn is_normal(l: &NumberField) -> bool {
    automorphisms(l).is_ok()
}
