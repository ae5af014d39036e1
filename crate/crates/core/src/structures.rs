//! Weakly order-preserving assignments of valuation rings to tree nodes,
//! their extensions along finite normal extensions, and fiber counting.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::exact_algebra::{relative_automorphisms, FieldEmbedding, Q};
use crate::function_fields::FinePlace;
use crate::par::{self, Execution};
use crate::trees::{CharFunction, ChoiceSystem, FiniteTree, BOTTOM};
use crate::valued::{join, Field, Handle};

/// A tree with a valuation ring per node: `⊥` is trivial and `p ≤ p'` gives `O_p ⊇ O_p'`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Structure {
    tree: FiniteTree,
    field: Field,
    assignment: Vec<Handle>,
}

impl Structure {
    pub fn new(tree: FiniteTree, field: Field, assignment: Vec<Handle>) -> Result<Self> {
        if assignment.len() != tree.len() {
            return Err(Error::invalid("one handle per tree node is required"));
        }
        if let Some(h) = assignment.iter().find(|h| h.field() != field) {
            return Err(Error::invalid(format!("handle `{h}` lives on a different field")));
        }
        if !assignment[0].is_trivial() {
            return Err(Error::invalid("the bottom node must carry the trivial ring"));
        }
        for i in 1..tree.len() {
            let p = tree.parent(i).unwrap();
            if !assignment[p].contains(&assignment[i]) {
                return Err(Error::invalid(format!(
                    "ring at `{}` is not contained in the ring at `{}`",
                    tree.name(i),
                    tree.name(p)
                )));
            }
        }
        let s = Structure {
            tree,
            field,
            assignment,
        };
        s.char_function()?;
        Ok(s)
    }

    pub fn tree(&self) -> &FiniteTree {
        &self.tree
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn handles(&self) -> &[Handle] {
        &self.assignment
    }

    pub fn handle(&self, i: usize) -> &Handle {
        &self.assignment[i]
    }

    pub fn handle_by_name(&self, name: &str) -> Result<&Handle> {
        Ok(&self.assignment[self.tree.node(name)?])
    }

    /// Residue characteristic per node.
    pub fn char_function(&self) -> Result<CharFunction> {
        CharFunction::new(&self.tree, self.assignment.iter().map(|h| h.residue_characteristic()).collect())
    }

    /// Node-wise restriction along a constant-field embedding.
    pub fn restrict(&self, emb: &FieldEmbedding, base: &Field) -> Result<Structure> {
        let assignment = self
            .assignment
            .iter()
            .map(|h| h.restrict(emb, base))
            .collect::<Result<Vec<_>>>()?;
        Structure::new(self.tree.clone(), base.clone(), assignment)
    }

    /// Image under an automorphism of the constant field.
    pub fn pushforward(&self, sigma: &FieldEmbedding) -> Result<Structure> {
        let assignment = self
            .assignment
            .iter()
            .map(|h| h.pushforward(sigma))
            .collect::<Result<Vec<_>>>()?;
        Structure::new(self.tree.clone(), self.field.clone(), assignment)
    }

    /// `node <name> = <handle>` lines.
    pub fn node_lines(&self) -> String {
        (0..self.tree.len())
            .map(|i| format!("node {} = {}\n", self.tree.name(i), self.assignment[i]))
            .collect()
    }
}

impl fmt::Debug for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Structure[{}; {:?}; {:?}]", self.field.label(), self.tree, self.assignment)
    }
}

/// The join-closure of `handles` plus the trivial ring, as a tree with its tautological structure.
/// Input handles are named `v0, v1, ...` by first occurrence, joins `j0, j1, ...`.
pub fn tree_from_valuations(handles: &[Handle]) -> Result<(FiniteTree, Structure)> {
    let Some(first) = handles.first() else {
        return Err(Error::invalid("at least one handle is required"));
    };
    let field = first.field();
    let trivial = Handle::trivial(&field);
    let mut rings: Vec<Handle> = vec![trivial.clone()];
    let mut names: Vec<String> = vec![BOTTOM.to_string()];
    for (i, h) in handles.iter().enumerate() {
        if h.field() != field {
            return Err(Error::invalid("handles live on different fields"));
        }
        if !rings.contains(h) {
            rings.push(h.clone());
            names.push(format!("v{i}"));
        }
    }
    let mut joins = 0;
    loop {
        let mut fresh = Vec::new();
        for a in &rings {
            for b in &rings {
                let j = join(a, b)?;
                if !rings.contains(&j) && !fresh.contains(&j) {
                    fresh.push(j);
                }
            }
        }
        if fresh.is_empty() {
            break;
        }
        for j in fresh {
            rings.push(j);
            names.push(format!("j{joins}"));
            joins += 1;
        }
    }
    let n = handles.len();
    if rings.len() > n * n + 1 {
        return Err(Error::invariant("join closure exceeds n^2 + 1 rings"));
    }
    // parent = smallest strictly larger ring in the closure (overrings form a chain)
    let mut edges = Vec::new();
    for (i, r) in rings.iter().enumerate().skip(1) {
        let parent = r.overrings()[1..]
            .iter()
            .find_map(|o| rings.iter().position(|x| x == o))
            .expect("the trivial ring is an overring");
        edges.push((names[i].clone(), names[parent].clone()));
    }
    let tree = FiniteTree::from_edges(&edges)?;
    let assignment = (0..tree.len())
        .map(|i| rings[names.iter().position(|n| n == tree.name(i)).unwrap()].clone())
        .collect();
    let s = Structure::new(tree.clone(), field, assignment)?;
    Ok((tree, s))
}

/// All extensions of a structure along a normal constant-field extension.
#[derive(Clone, Debug)]
pub struct ExtensionSet {
    pub base: Structure,
    pub overfield: Field,
    pub embedding: FieldEmbedding,
    pub members: Vec<Structure>,
}

impl ExtensionSet {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

fn require_normal(emb: &FieldEmbedding) -> Result<()> {
    relative_automorphisms(emb.target(), emb).map(|_| ())
}

/// Per-node candidate extensions, computed in parallel.
fn node_extensions(s: &Structure, emb: &FieldEmbedding, exec: Execution) -> Result<Vec<Vec<Handle>>> {
    par::try_map(exec, s.handles(), |h| h.extend(emb))
}

fn containment_relation(lower: &[Handle], upper: &[Handle]) -> Vec<Vec<bool>> {
    lower.iter().map(|a| upper.iter().map(|b| a.contains(b)).collect()).collect()
}

/// Choice system on the tree: node `x` chooses an extension of `O_x`, constrained along edges by containment.
fn tree_choice_system(tree: &FiniteTree, exts: &[Vec<Handle>]) -> Result<ChoiceSystem> {
    let covers: Vec<(usize, usize)> = (1..tree.len()).map(|i| (tree.parent(i).unwrap(), i)).collect();
    let relations = covers.iter().map(|&(p, c)| containment_relation(&exts[p], &exts[c])).collect();
    ChoiceSystem::new(
        tree.names().to_vec(),
        exts.iter().map(Vec::len).collect(),
        covers,
        relations,
    )
}

/// Every structure on the extended field that restricts to `s`, in canonical order.
pub fn enumerate_structure_extensions(s: &Structure, emb: &FieldEmbedding, exec: Execution) -> Result<ExtensionSet> {
    let overfield = s.field.extend_constants(emb)?;
    require_normal(emb)?;
    let exts = node_extensions(s, emb, exec)?;
    let system = tree_choice_system(&s.tree, &exts)?;
    let members = system
        .partial_choices(&system.full())?
        .into_iter()
        .map(|c| {
            let assignment = (0..s.tree.len()).map(|i| exts[i][c[&i]].clone()).collect();
            Structure::new(s.tree.clone(), overfield.clone(), assignment)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ExtensionSet {
        base: s.clone(),
        overfield,
        embedding: emb.clone(),
        members,
    })
}

/// Node-wise check that `big` extends `small` with relatively algebraically closed
/// residue extensions, for the shipped field kinds.
pub fn check_closed_residue_extension(small: &Structure, big: &Structure) -> Result<()> {
    if small.tree != big.tree {
        return Err(Error::precondition("structures live on different trees"));
    }
    let Field::Number(k) = small.field() else {
        return Err(Error::precondition("the smaller structure must live on a number field"));
    };
    match big.field() {
        Field::Number(l) if l == k => {
            if small != big {
                return Err(Error::precondition("structures on the same field differ"));
            }
            Ok(())
        }
        Field::Function(f) if f.constants() == k => {
            for (i, h) in big.handles().iter().enumerate() {
                if h.constant_part() != small.handle(i).constant_part() {
                    return Err(Error::precondition(format!(
                        "ring at `{}` does not restrict to the base ring",
                        big.tree.name(i)
                    )));
                }
                if let Handle::Composed(c) = h {
                    if !matches!(c.place(), FinePlace::Infinity) && c.place().degree() > 1 {
                        return Err(Error::precondition(format!(
                            "residue extension at `{}` is algebraic of degree {}",
                            big.tree.name(i),
                            c.place().degree()
                        )));
                    }
                }
            }
            Ok(())
        }
        _ => Err(Error::precondition(
            "relative algebraic closure is only checked for K inside K or K(t)",
        )),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiberReport {
    /// Fiber sizes, indexed by the extensions of the small structure.
    pub sizes: Vec<usize>,
    pub uniform: bool,
    /// `|S_L'| / |S_K'|`.
    pub ratio: Q,
    pub small_extensions: usize,
    pub big_extensions: usize,
}

/// Fibers of restriction from extensions of `s_l` (to `L' = L ⊗ K'`) to extensions of `s_k` (to `K'`).
///
/// Realized as the choice system on `P × {0,1}`: layer 0 picks extensions to `K'`,
/// layer 1 extensions to `L'`, with containment inside each layer and restriction
/// between the layers.
pub fn fiber_report(s_k: &Structure, s_l: &Structure, emb: &FieldEmbedding, exec: Execution) -> Result<FiberReport> {
    check_closed_residue_extension(s_k, s_l)?;
    if emb.source() != s_k.field().constants() {
        return Err(Error::invalid("the extension does not start at the base field"));
    }
    require_normal(emb)?;
    let tree = &s_k.tree;
    let n = tree.len();
    let low = node_extensions(s_k, emb, exec)?;
    let high = node_extensions(s_l, emb, exec)?;
    let mut names: Vec<String> = tree.names().iter().map(|x| format!("{x}@0")).collect();
    names.extend(tree.names().iter().map(|x| format!("{x}@1")));
    let mut sizes: Vec<usize> = low.iter().map(Vec::len).collect();
    sizes.extend(high.iter().map(Vec::len));
    let mut covers = Vec::new();
    let mut relations = Vec::new();
    for i in 1..n {
        let p = tree.parent(i).unwrap();
        covers.push((p, i));
        relations.push(containment_relation(&low[p], &low[i]));
        covers.push((n + p, n + i));
        relations.push(containment_relation(&high[p], &high[i]));
    }
    for i in 0..n {
        covers.push((i, n + i));
        relations.push(
            low[i]
                .iter()
                .map(|a| high[i].iter().map(|b| b.constant_part() == a.constant_part()).collect())
                .collect(),
        );
    }
    let system = ChoiceSystem::new(names, sizes, covers, relations)?;
    let small: BTreeSet<usize> = (0..n).collect();
    let fibers = system.fiber_sizes(&system.full(), &small)?;
    let total: usize = fibers.iter().sum();
    let direct = enumerate_structure_extensions(s_l, emb, exec)?.len();
    if total != direct {
        return Err(Error::invariant(format!(
            "layered choice system counts {total} extensions, direct enumeration {direct}"
        )));
    }
    let uniform = fibers.windows(2).all(|w| w[0] == w[1]);
    let small_count = fibers.len();
    Ok(FiberReport {
        uniform,
        ratio: Q::new((total as i64).into(), (small_count.max(1) as i64).into()),
        small_extensions: small_count,
        big_extensions: total,
        sizes: fibers,
    })
}
