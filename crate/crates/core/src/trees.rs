//! Finite trees, residue-characteristic functions on them, and choice systems
//! with brute-force partial-choice enumeration and fiber counting.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};
use crate::exact_algebra::gf::is_prime;

pub const BOTTOM: &str = "_";

/// A finite tree given by a parent map; index 0 is the bottom `⊥`.
/// Nodes are stored in a topological order: every parent precedes its children.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FiniteTree {
    names: Vec<String>,
    parent: Vec<Option<usize>>,
}

impl FiniteTree {
    /// The one-node tree `{⊥}`.
    pub fn trivial() -> Self {
        Self::rooted(BOTTOM)
    }

    fn rooted(name: &str) -> Self {
        FiniteTree {
            names: vec![name.to_string()],
            parent: vec![None],
        }
    }

    /// Builds a tree from `(child, parent)` pairs; the bottom is named [`BOTTOM`].
    pub fn from_edges<S: AsRef<str>>(edges: &[(S, S)]) -> Result<Self> {
        Self::from_edges_with_bottom(BOTTOM, edges)
    }

    fn from_edges_with_bottom<S: AsRef<str>>(bottom: &str, edges: &[(S, S)]) -> Result<Self> {
        let mut parent_of: BTreeMap<&str, &str> = BTreeMap::new();
        let mut order: Vec<&str> = Vec::new();
        for (c, p) in edges {
            let (c, p) = (c.as_ref(), p.as_ref());
            if c == bottom {
                return Err(Error::invalid(format!("the bottom `{bottom}` cannot have a parent")));
            }
            if parent_of.insert(c, p).is_some() {
                return Err(Error::invalid(format!("node `{c}` has two parents")));
            }
            order.push(c);
        }
        let mut tree = Self::rooted(bottom);
        let mut index: HashMap<String, usize> = HashMap::from([(bottom.to_string(), 0)]);
        // repeatedly attach nodes whose parent is placed; stalls only on cycles or dangling parents
        let mut pending = order;
        while !pending.is_empty() {
            let before = pending.len();
            pending.retain(|c| match index.get(parent_of[c]) {
                Some(&pi) => {
                    index.insert(c.to_string(), tree.names.len());
                    tree.names.push(c.to_string());
                    tree.parent.push(Some(pi));
                    false
                }
                None => true,
            });
            if pending.len() == before {
                let c = pending[0];
                let p = parent_of[c];
                return Err(if parent_of.contains_key(p) {
                    Error::invalid(format!("cycle through node `{c}`"))
                } else {
                    Error::UnknownNode(p.to_string())
                });
            }
        }
        Ok(tree)
    }

    /// Parses `child<parent` lines; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut edges = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (c, p) = line.split_once('<').ok_or_else(|| Error::Syntax {
                line: i + 1,
                column: 1,
                message: format!("expected `child<parent`, got `{line}`"),
            })?;
            let (c, p) = (c.trim(), p.trim());
            for name in [c, p] {
                if !valid_name(name) {
                    return Err(Error::Syntax {
                        line: i + 1,
                        column: 1,
                        message: format!("bad node name `{name}`"),
                    });
                }
            }
            edges.push((c.to_string(), p.to_string()));
        }
        Self::from_edges(&edges)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn bottom(&self) -> usize {
        0
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn node(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownNode(name.to_string()))
    }

    pub fn parent(&self, i: usize) -> Option<usize> {
        self.parent[i]
    }

    pub fn children(&self, i: usize) -> Vec<usize> {
        (0..self.len()).filter(|&c| self.parent[c] == Some(i)).collect()
    }

    pub fn depth(&self, mut i: usize) -> usize {
        let mut d = 0;
        while let Some(p) = self.parent[i] {
            i = p;
            d += 1;
        }
        d
    }

    /// The chain `[⊥, i]`, bottom first.
    pub fn chain(&self, i: usize) -> Vec<usize> {
        let mut c = vec![i];
        let mut cur = i;
        while let Some(p) = self.parent[cur] {
            c.push(p);
            cur = p;
        }
        c.reverse();
        c
    }

    /// `x ≤ y`: `x` lies on the chain below `y`.
    pub fn leq(&self, x: usize, y: usize) -> bool {
        let mut cur = Some(y);
        while let Some(c) = cur {
            if c == x {
                return true;
            }
            cur = self.parent[c];
        }
        false
    }

    /// Deepest common ancestor.
    pub fn meet(&self, x: usize, y: usize) -> usize {
        let cx = self.chain(x);
        let cy = self.chain(y);
        let mut m = 0;
        for (a, b) in cx.iter().zip(&cy) {
            if a != b {
                break;
            }
            m = *a;
        }
        m
    }

    pub fn meet_by_name(&self, x: &str, y: &str) -> Result<&str> {
        Ok(self.name(self.meet(self.node(x)?, self.node(y)?)))
    }

    /// Subtrees rooted at the minimal non-bottom nodes, each with its root as bottom.
    pub fn branches(&self) -> Vec<FiniteTree> {
        self.children(0)
            .into_iter()
            .map(|r| {
                let edges: Vec<(String, String)> = (0..self.len())
                    .filter(|&c| c != r && self.leq(r, c))
                    .map(|c| (self.names[c].clone(), self.names[self.parent[c].unwrap()].clone()))
                    .collect();
                Self::from_edges_with_bottom(&self.names[r], &edges).expect("subtree of a tree")
            })
            .collect()
    }

    /// Whether `set` is closed downward.
    pub fn is_downset(&self, set: &BTreeSet<usize>) -> bool {
        set.iter().all(|&x| self.parent[x].is_none_or(|p| set.contains(&p)))
    }
}

fn valid_name(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '.')
}

impl fmt::Display for FiniteTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 1..self.len() {
            writeln!(f, "{}<{}", self.names[i], self.names[self.parent[i].unwrap()])?;
        }
        Ok(())
    }
}

impl fmt::Debug for FiniteTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lines: Vec<String> = (1..self.len())
            .map(|i| format!("{}<{}", self.names[i], self.names[self.parent[i].unwrap()]))
            .collect();
        write!(f, "Tree[{}]", lines.join(", "))
    }
}

/// Residue characteristic per node; `0` or a prime, inherited upward once positive.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CharFunction {
    chars: Vec<u64>,
}

impl CharFunction {
    /// Validates monotonicity: `x ≤ y` and `χ(x) = p ≠ 0` force `χ(y) = p`.
    pub fn new(tree: &FiniteTree, chars: Vec<u64>) -> Result<Self> {
        if chars.len() != tree.len() {
            return Err(Error::invalid("one characteristic per node is required"));
        }
        for (i, &c) in chars.iter().enumerate() {
            if c != 0 && !is_prime(c) {
                return Err(Error::invalid(format!("characteristic {c} is neither 0 nor prime")));
            }
            if let Some(p) = tree.parent(i) {
                if chars[p] != 0 && chars[p] != c {
                    return Err(Error::invalid(format!(
                        "node `{}` has characteristic {c} above characteristic {}",
                        tree.name(i),
                        chars[p]
                    )));
                }
            }
        }
        Ok(CharFunction { chars })
    }

    pub fn zero(tree: &FiniteTree) -> Self {
        CharFunction {
            chars: vec![0; tree.len()],
        }
    }

    /// Parses `node=p` lines; unlisted nodes get `0`.
    pub fn parse(text: &str, tree: &FiniteTree) -> Result<Self> {
        let mut chars = vec![0; tree.len()];
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (n, p) = line.split_once('=').ok_or_else(|| Error::Syntax {
                line: i + 1,
                column: 1,
                message: format!("expected `node=p`, got `{line}`"),
            })?;
            let p: u64 = p.trim().parse().map_err(|_| Error::Syntax {
                line: i + 1,
                column: line.find('=').unwrap() + 2,
                message: format!("bad characteristic `{}`", p.trim()),
            })?;
            chars[tree.node(n.trim())?] = p;
        }
        Self::new(tree, chars)
    }

    pub fn get(&self, i: usize) -> u64 {
        self.chars[i]
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.chars
    }

    /// Nodes of positive characteristic whose parent has characteristic 0.
    pub fn minimal_positive(&self, tree: &FiniteTree) -> Vec<usize> {
        (0..tree.len())
            .filter(|&i| self.chars[i] != 0 && tree.parent(i).is_none_or(|p| self.chars[p] == 0))
            .collect()
    }

    pub fn format(&self, tree: &FiniteTree) -> String {
        (0..tree.len())
            .map(|i| format!("{}={}\n", tree.name(i), self.chars[i]))
            .collect()
    }
}

pub const MAX_POSET: usize = 12;
pub const MAX_CHOICES: usize = 16;

/// Partial choice: chosen index per element of its domain.
pub type Choice = BTreeMap<usize, usize>;

/// Finite sets `S_x` over a poset, with relations `R ⊆ S_lower × S_upper` on covers.
#[derive(Clone, Debug)]
pub struct ChoiceSystem {
    names: Vec<String>,
    sizes: Vec<usize>,
    covers: Vec<(usize, usize)>,
    relations: Vec<Vec<Vec<bool>>>,
    below: Vec<BTreeSet<usize>>,
    topo: Vec<usize>,
}

impl ChoiceSystem {
    /// `covers` are `(lower, upper)` pairs and must form the Hasse diagram of a poset;
    /// `relations[k][a][b]` says `a ∈ S_lower` is compatible with `b ∈ S_upper`.
    pub fn new(
        names: Vec<String>,
        sizes: Vec<usize>,
        covers: Vec<(usize, usize)>,
        relations: Vec<Vec<Vec<bool>>>,
    ) -> Result<Self> {
        let n = names.len();
        if sizes.len() != n || relations.len() != covers.len() {
            return Err(Error::invalid("choice system arrays have mismatched lengths"));
        }
        for (k, &(lo, hi)) in covers.iter().enumerate() {
            if lo >= n || hi >= n || lo == hi {
                return Err(Error::invalid("cover refers to a missing element"));
            }
            let r = &relations[k];
            if r.len() != sizes[lo] || r.iter().any(|row| row.len() != sizes[hi]) {
                return Err(Error::invalid(format!(
                    "relation on {} < {} does not match the set sizes",
                    names[lo], names[hi]
                )));
            }
        }
        // topological order (Kahn, smallest index first) doubles as the cycle check
        let mut indeg = vec![0usize; n];
        for &(_, hi) in &covers {
            indeg[hi] += 1;
        }
        let mut ready: BTreeSet<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut topo = Vec::with_capacity(n);
        while let Some(&x) = ready.iter().next() {
            ready.remove(&x);
            topo.push(x);
            for &(lo, hi) in &covers {
                if lo == x {
                    indeg[hi] -= 1;
                    if indeg[hi] == 0 {
                        ready.insert(hi);
                    }
                }
            }
        }
        if topo.len() != n {
            return Err(Error::invalid("cover relation has a cycle"));
        }
        let mut below: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
        for &x in &topo {
            let mut b = BTreeSet::new();
            for &(lo, hi) in &covers {
                if hi == x {
                    b.insert(lo);
                    b.extend(below[lo].iter().copied());
                }
            }
            below[x] = b;
        }
        Ok(ChoiceSystem {
            names,
            sizes,
            covers,
            relations,
            below,
            topo,
        })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn size(&self, x: usize) -> usize {
        self.sizes[x]
    }

    pub fn covers(&self) -> &[(usize, usize)] {
        &self.covers
    }

    pub fn element(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownNode(name.to_string()))
    }

    /// Strict order `x < y`.
    pub fn lt(&self, x: usize, y: usize) -> bool {
        self.below[y].contains(&x)
    }

    pub fn is_downset(&self, set: &BTreeSet<usize>) -> bool {
        set.iter().all(|&y| self.below[y].is_subset(set))
    }

    pub fn full(&self) -> BTreeSet<usize> {
        (0..self.len()).collect()
    }

    fn check_bounds(&self) -> Result<()> {
        if self.len() > MAX_POSET {
            return Err(Error::resource(format!("choice systems are limited to {MAX_POSET} elements")));
        }
        if self.sizes.iter().any(|&s| s > MAX_CHOICES) {
            return Err(Error::resource(format!("choice sets are limited to {MAX_CHOICES} members")));
        }
        Ok(())
    }

    /// All partial choices on a downset, lexicographic in topological order.
    pub fn partial_choices(&self, downset: &BTreeSet<usize>) -> Result<Vec<Choice>> {
        if !self.is_downset(downset) {
            return Err(Error::precondition("set is not downward closed"));
        }
        let order: Vec<usize> = self.topo.iter().copied().filter(|x| downset.contains(x)).collect();
        let mut out = Vec::new();
        let mut cur = Choice::new();
        self.extend_choices(&order, 0, &mut cur, &mut out);
        Ok(out)
    }

    fn extend_choices(&self, order: &[usize], k: usize, cur: &mut Choice, out: &mut Vec<Choice>) {
        if k == order.len() {
            out.push(cur.clone());
            return;
        }
        let x = order[k];
        for s in 0..self.sizes[x] {
            let ok = self.covers.iter().enumerate().all(|(ci, &(lo, hi))| {
                hi != x || cur.get(&lo).is_none_or(|&a| self.relations[ci][a][s])
            });
            if ok {
                cur.insert(x, s);
                self.extend_choices(order, k + 1, cur, out);
                cur.remove(&x);
            }
        }
    }

    /// Sizes of the fibers of `Γ(big) → Γ(small)`, in the order of `Γ(small)`.
    pub fn fiber_sizes(&self, big: &BTreeSet<usize>, small: &BTreeSet<usize>) -> Result<Vec<usize>> {
        if !small.is_subset(big) {
            return Err(Error::precondition("small downset is not contained in the big one"));
        }
        let base = self.partial_choices(small)?;
        let mut counts: HashMap<Vec<(usize, usize)>, usize> = HashMap::new();
        for c in self.partial_choices(big)? {
            let key: Vec<(usize, usize)> = c.into_iter().filter(|(x, _)| small.contains(x)).collect();
            *counts.entry(key).or_default() += 1;
        }
        Ok(base
            .into_iter()
            .map(|c| counts.get(&c.into_iter().collect::<Vec<_>>()).copied().unwrap_or(0))
            .collect())
    }

    /// All downsets of the poset, in increasing bitmask order.
    pub fn downsets(&self) -> Vec<BTreeSet<usize>> {
        (0u32..(1 << self.len()))
            .map(|mask| (0..self.len()).filter(|i| mask >> i & 1 == 1).collect::<BTreeSet<usize>>())
            .filter(|s| self.is_downset(s))
            .collect()
    }

    /// The common fiber size `n > 0` of `Γ(P') → Γ(P' ∖ {x})` over every downset `P'`
    /// with `x` maximal, or `None` when some fiber differs or is empty.
    pub fn check_smooth_at(&self, x: usize) -> Result<Option<usize>> {
        self.check_bounds()?;
        let mut common: Option<usize> = None;
        for d in self.downsets() {
            if !d.contains(&x) || d.iter().any(|&y| self.lt(x, y)) {
                continue;
            }
            let mut small = d.clone();
            small.remove(&x);
            for n in self.fiber_sizes(&d, &small)? {
                if n == 0 || common.is_some_and(|c| c != n) {
                    return Ok(None);
                }
                common = Some(n);
            }
        }
        Ok(common)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(xs: &[usize]) -> BTreeSet<usize> {
        xs.iter().copied().collect()
    }

    fn total(a: usize, b: usize) -> Vec<Vec<bool>> {
        vec![vec![true; b]; a]
    }

    #[test]
    fn meets_and_branches() {
        let flat = FiniteTree::parse("a<_\nb<_").unwrap();
        assert_eq!(flat.meet_by_name("a", "b").unwrap(), "_");
        let chain = FiniteTree::parse("a<_\nb<a").unwrap();
        assert_eq!(chain.meet_by_name("a", "b").unwrap(), "a");
        assert_eq!(chain.meet_by_name("b", "b").unwrap(), "b");
        assert!(FiniteTree::trivial().branches().is_empty());
        let fb: Vec<Vec<String>> = flat.branches().iter().map(|t| t.names().to_vec()).collect();
        assert_eq!(fb, vec![vec!["a".to_string()], vec!["b".to_string()]]);
        let t = FiniteTree::parse("b<a\na<_\nc<_").unwrap();
        let br: Vec<Vec<String>> = t.branches().iter().map(|t| t.names().to_vec()).collect();
        assert_eq!(br, vec![vec!["a".to_string(), "b".to_string()], vec!["c".to_string()]]);
        assert!(matches!(chain.meet_by_name("a", "z"), Err(Error::UnknownNode(_))));
        assert!(FiniteTree::parse("a<b\nb<a").is_err());
        assert!(matches!(FiniteTree::parse("a<zz"), Err(Error::UnknownNode(_))));
        assert_eq!(FiniteTree::parse(&t.to_string()).unwrap(), t);
    }

    #[test]
    fn char_functions() {
        let t = FiniteTree::parse("a<_\nb<a\nc<_").unwrap();
        let chi = CharFunction::parse("a=5\nb=5", &t).unwrap();
        assert_eq!(chi.minimal_positive(&t), vec![t.node("a").unwrap()]);
        assert!(CharFunction::parse("a=5\nb=7", &t).is_err());
        assert!(CharFunction::parse("a=5\nb=0", &t).is_err());
        assert!(CharFunction::parse("c=4", &t).is_err());
        let chi = CharFunction::parse("b=5", &t).unwrap();
        assert_eq!(chi.minimal_positive(&t), vec![t.node("b").unwrap()]);
    }

    #[test]
    fn partial_choice_counts() {
        let names = vec!["x".to_string(), "y".to_string()];
        let s = ChoiceSystem::new(names, vec![2, 3], vec![(0, 1)], vec![total(2, 3)]).unwrap();
        assert_eq!(s.partial_choices(&set(&[])).unwrap().len(), 1);
        assert_eq!(s.partial_choices(&set(&[0, 1])).unwrap().len(), 6);
        assert!(s.partial_choices(&set(&[1])).is_err());
        assert_eq!(s.check_smooth_at(1).unwrap(), Some(3));
        assert_eq!(s.fiber_sizes(&set(&[0]), &set(&[0])).unwrap(), vec![1, 1]);
        let single = ChoiceSystem::new(vec!["b".into()], vec![1], vec![], vec![]).unwrap();
        assert_eq!(single.partial_choices(&set(&[0])).unwrap().len(), 1);
        let isolated = ChoiceSystem::new(vec!["x".into()], vec![4], vec![], vec![]).unwrap();
        assert_eq!(isolated.check_smooth_at(0).unwrap(), Some(4));
        let mut r = total(2, 3);
        r[1][2] = false;
        let s = ChoiceSystem::new(vec!["x".into(), "y".into()], vec![2, 3], vec![(0, 1)], vec![r]).unwrap();
        assert_eq!(s.check_smooth_at(1).unwrap(), None);
        assert_eq!(s.fiber_sizes(&set(&[0, 1]), &set(&[0])).unwrap(), vec![3, 2]);
    }

    #[test]
    fn resource_bounds() {
        let s = ChoiceSystem::new(vec!["x".into()], vec![17], vec![], vec![]).unwrap();
        assert!(matches!(s.check_smooth_at(0), Err(Error::ResourceBound(_))));
    }

    fn arb_tree() -> impl Strategy<Value = FiniteTree> {
        prop::collection::vec(any::<prop::sample::Index>(), 0..7).prop_map(|picks| {
            let mut edges: Vec<(String, String)> = Vec::new();
            for (i, ix) in picks.iter().enumerate() {
                let parent = ix.index(i + 1);
                let pname = if parent == 0 { BOTTOM.to_string() } else { format!("n{}", parent - 1) };
                edges.push((format!("n{i}"), pname));
            }
            FiniteTree::from_edges(&edges).unwrap()
        })
    }

    proptest! {
        #[test]
        fn meet_is_a_semilattice(t in arb_tree()) {
            let n = t.len();
            for x in 0..n {
                prop_assert_eq!(t.meet(x, x), x);
                prop_assert_eq!(t.meet(x, 0), 0);
                let c = t.chain(x);
                for w in c.windows(2) {
                    prop_assert_eq!(t.parent(w[1]), Some(w[0]));
                }
                for y in 0..n {
                    prop_assert_eq!(t.meet(x, y), t.meet(y, x));
                    let m = t.meet(x, y);
                    prop_assert!(t.leq(m, x) && t.leq(m, y));
                    for z in 0..n {
                        prop_assert_eq!(t.meet(t.meet(x, y), z), t.meet(x, t.meet(y, z)));
                    }
                }
            }
            let covered: usize = t.branches().iter().map(|b| b.len()).sum();
            prop_assert_eq!(covered, n - 1);
        }
    }
}
