//! The canonical measure of a sentence over a structure: the fraction of
//! structure extensions to a determining field in which it holds.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exact_algebra::{splitting_field, Bounds, FieldEmbedding, QPoly, Q};
use crate::formulas::{determining_extension, evaluate, DeterminingExtension, Formula, StructureModel};
use crate::par::{self, Execution};
use crate::structures::{check_closed_residue_extension, enumerate_structure_extensions, Structure};
use crate::valued::{Element, Field};

/// Parameter values, keyed by name without the `$`.
pub type Params = BTreeMap<String, Element>;

#[derive(Clone, Copy, Debug, Default)]
pub struct MeasureConfig {
    pub bounds: Bounds,
    pub exec: Execution,
}

#[derive(Clone, Debug)]
pub struct MeasureResult {
    /// Always `true_count / total`.
    pub value: Q,
    pub true_count: usize,
    pub total: usize,
    pub extension: DeterminingExtension,
    /// Truth value per extension, in enumeration order.
    pub truths: Vec<bool>,
}

impl MeasureResult {
    pub fn field_label(&self) -> String {
        self.extension.field.label()
    }
}

impl fmt::Display for MeasureResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "value={}/{} extensions={} true={} field={}",
            self.value.numer(),
            self.value.denom(),
            self.total,
            self.true_count,
            self.field_label()
        )
    }
}

/// Moves an element of `from` into `to`, along a constant-field embedding.
/// Covers `K -> L`, `K(t) -> L(t)` and `K -> L(t)`.
pub fn lift_element(x: &Element, to: &Field, emb: &FieldEmbedding) -> Result<Element> {
    if emb.target() != to.constants() {
        return Err(Error::invalid("embedding does not land in the constant field"));
    }
    match (x, to) {
        (Element::Number(a), _) if a.field() == emb.source() => Ok(to.from_constant(emb.apply(a))),
        (Element::Function(a), Field::Function(f)) if a.field().constants() == emb.source() => {
            let y = a.field().map(emb, a);
            if y.field() != f {
                return Err(Error::invalid("function fields use different variables"));
            }
            Ok(Element::Function(y))
        }
        _ => Err(Error::invalid("parameter does not lie in the base field")),
    }
}

fn lift_params(params: &Params, to: &Field, emb: &FieldEmbedding) -> Result<Params> {
    params
        .iter()
        .map(|(k, x)| Ok((k.clone(), lift_element(x, to, emb)?)))
        .collect()
}

fn check_params(f: &Formula, params: &Params, s: &Structure) -> Result<()> {
    for name in f.params() {
        match params.get(&name) {
            None => return Err(Error::invalid(format!("parameter `${name}` is not bound"))),
            Some(x) if x.field() != *s.field() => {
                return Err(Error::invalid(format!("parameter `${name}` does not lie in {}", s.field().label())))
            }
            Some(_) => {}
        }
    }
    for node in f.nodes() {
        s.tree().node(&node)?;
    }
    Ok(())
}

/// Averages truth over all extensions of `s` along `ext`, which must split the binders.
pub fn measure_over(f: &Formula, params: &Params, s: &Structure, ext: DeterminingExtension, exec: Execution) -> Result<MeasureResult> {
    check_params(f, params, s)?;
    let set = enumerate_structure_extensions(s, &ext.embedding, exec)?;
    let lifted = lift_params(params, &set.overfield, &ext.embedding)?;
    let truths = par::try_map(exec, &set.members, |m| {
        let model = StructureModel::new(m, lifted.clone())?;
        evaluate(f, &model)
    })?;
    let true_count = truths.iter().filter(|&&b| b).count();
    let total = truths.len();
    if total == 0 {
        return Err(Error::invariant("a structure has no extensions"));
    }
    Ok(MeasureResult {
        value: Q::new(true_count.into(), total.into()),
        true_count,
        total,
        extension: ext,
        truths,
    })
}

pub fn measure(f: &Formula, params: &Params, s: &Structure, cfg: MeasureConfig) -> Result<MeasureResult> {
    measure_with(f, params, s, &[], cfg)
}

/// Measure computed over the splitting field of the binders together with `extra`.
pub fn measure_with(f: &Formula, params: &Params, s: &Structure, extra: &[QPoly], cfg: MeasureConfig) -> Result<MeasureResult> {
    let ext = determining_extension(f, s.field(), extra, cfg.bounds)?;
    measure_over(f, params, s, ext, cfg.exec)
}

/// Whether recomputing over a larger field (adding the roots of `alt`) gives the same value.
pub fn measure_stable_under(f: &Formula, params: &Params, s: &Structure, alt: &[QPoly], cfg: MeasureConfig) -> Result<(bool, MeasureResult, MeasureResult)> {
    let base = measure(f, params, s, cfg)?;
    let big = measure_with(f, params, s, alt, cfg)?;
    Ok((base.value == big.value, base, big))
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AxiomReport {
    /// Checks run, by short name.
    pub checked: Vec<String>,
    /// Failed checks with the offending values.
    pub failures: Vec<String>,
}

impl AxiomReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }

    fn check(&mut self, name: &str, ok: bool, detail: impl FnOnce() -> String) {
        self.checked.push(name.to_string());
        if !ok {
            self.failures.push(format!("{name}: {}", detail()));
        }
    }
}

/// Checks range, complement, inclusion-exclusion, positivity, weighting through an
/// intermediate normal field and invariance under the given automorphisms of the
/// constant field.
pub fn check_axioms(s: &Structure, phi: &Formula, psi: &Formula, params: &Params, automorphisms: &[FieldEmbedding], cfg: MeasureConfig) -> Result<AxiomReport> {
    let mut report = AxiomReport::default();
    let mut common = phi.binder_polynomials();
    common.extend(psi.binder_polynomials());
    let m = |f: &Formula| measure_with(f, params, s, &common, cfg);

    let p = m(phi)?;
    let q = m(psi)?;
    let not_p = m(&Formula::not(phi.clone()))?;
    let or = m(&Formula::or(phi.clone(), psi.clone()))?;
    let and = m(&Formula::and(phi.clone(), psi.clone()))?;

    for (name, r) in [("phi", &p), ("psi", &q), ("or", &or), ("and", &and)] {
        let in_range = r.value >= Q::zero() && r.value <= Q::one();
        report.check(&format!("range[{name}]"), in_range, || r.value.to_string());
        let tally = r.value == Q::new(r.true_count.into(), r.total.into());
        report.check(&format!("tally[{name}]"), tally, || format!("{} vs {}/{}", r.value, r.true_count, r.total));
    }
    report.check("complement", not_p.value == Q::one() - &p.value, || {
        format!("P(~phi)={} P(phi)={}", not_p.value, p.value)
    });
    report.check("inclusion-exclusion", &p.value + &q.value == &or.value + &and.value, || {
        format!("{} + {} vs {} + {}", p.value, q.value, or.value, and.value)
    });
    report.check("positivity", (p.value > Q::zero()) == p.truths.iter().any(|&b| b), || p.value.to_string());
    report.check("certainty", (p.value == Q::one()) == p.truths.iter().all(|&b| b), || p.value.to_string());

    // weighting through the splitting field of the first binder polynomial
    if let Some(first) = phi.binder_polynomials().first() {
        let k = s.field().constants();
        let mid = splitting_field(std::slice::from_ref(first), k, cfg.bounds)?;
        let mid_field = s.field().extend_constants(&mid.base_embedding)?;
        let set = enumerate_structure_extensions(s, &mid.base_embedding, cfg.exec)?;
        let lifted = lift_params(params, &mid_field, &mid.base_embedding)?;
        let mut sum = Q::zero();
        for member in &set.members {
            sum += measure(phi, &lifted, member, cfg)?.value;
        }
        let avg = sum / Q::from_integer(set.len().into());
        report.check("weighting", avg == p.value, || format!("average {avg} vs {}", p.value));
    }

    for sigma in automorphisms {
        let image = s.pushforward(sigma)?;
        let moved: Params = params
            .iter()
            .map(|(k, x)| (k.clone(), s.field().map(sigma, x)))
            .collect();
        let r = measure(phi, &moved, &image, cfg)?;
        let base = measure(phi, params, s, cfg)?;
        report.check("isomorphism", r.value == base.value, || format!("{} vs {}", r.value, base.value));
    }
    Ok(report)
}

/// Measures over `s_k` and over `s_l`, after checking that `s_l` extends `s_k` with
/// relatively algebraically closed residue fields. Parameters live in the base field.
pub fn invariance_under_closed_residue_extension(f: &Formula, params: &Params, s_k: &Structure, s_l: &Structure, cfg: MeasureConfig) -> Result<(bool, MeasureResult, MeasureResult)> {
    check_closed_residue_extension(s_k, s_l)?;
    let small = measure(f, params, s_k, cfg)?;
    let id = FieldEmbedding::identity(s_k.field().constants());
    let lifted = lift_params(params, s_l.field(), &id)?;
    let big = measure(f, &lifted, s_l, cfg)?;
    Ok((small.value == big.value, small, big))
}
