//! Text formats for fields, structures, formulas, sentences and choice systems.
//!
//! Field line: `field <label> [minpoly c0 .. cn | split c0 .. cn ; c0 .. cn] [var <t>]`.
//! Without `minpoly`/`split` the field is `Q`. Coefficients are exact rationals,
//! constant term first.
//!
//! Structure file:
//!
//! ```text
//! tree
//! a<_
//! b<_
//! field Q
//! node a = padic p=5
//! node b = padic p=13
//! ```
//!
//! Unlisted nodes get the trivial ring. Formula file: `let <name> = <term>` lines
//! followed by the formula (which may span lines). Sentence file: `Q: [c0,..,1]`,
//! an optional tree block, then `node <a> char <p> : <condition in x>` lines.
//! Choice-system file: `element <name> <size>` and `cover <lower> <upper> : i-j ..` lines.

use std::collections::BTreeMap;

use crate::decide::{PsiSentence, ROOT_VAR};
use crate::error::{Error, Result};
use crate::exact_algebra::kpoly::rational_roots_in;
use crate::exact_algebra::{format_rational_short, parse_rational, splitting_field, Bounds, FieldEmbedding, NumberField, QPoly};
use crate::formulas::{evaluate_term, parse, parse_open, parse_term, Formula, StructureModel};
use crate::function_fields::FunctionField;
use crate::measure::Params;
use crate::structures::Structure;
use crate::trees::{CharFunction, ChoiceSystem, FiniteTree, BOTTOM};
use crate::valued::{Field, Handle};

fn syntax(line: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        line,
        column: 1,
        message: message.into(),
    }
}

/// Strips a `#` comment and surrounding whitespace.
fn clean(raw: &str) -> &str {
    raw.split('#').next().unwrap().trim()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FieldKind {
    Minpoly(QPoly),
    Split(Vec<QPoly>),
}

/// A parsed `field` line, not yet constructed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldSpec {
    pub label: String,
    pub kind: FieldKind,
    pub var: Option<String>,
}

fn parse_coeffs(words: &[&str], line: usize) -> Result<QPoly> {
    if words.is_empty() {
        return Err(syntax(line, "expected coefficients"));
    }
    let c = words
        .iter()
        .map(|w| parse_rational(w).map_err(|e| syntax(line, e.to_string())))
        .collect::<Result<Vec<_>>>()?;
    Ok(QPoly::new(c))
}

impl FieldSpec {
    pub fn parse_line(text: &str, line: usize) -> Result<Self> {
        let words: Vec<&str> = clean(text).split_whitespace().collect();
        if words.first() != Some(&"field") || words.len() < 2 {
            return Err(syntax(line, "expected `field <label> ...`"));
        }
        let label = words[1].to_string();
        let mut rest = &words[2..];
        let mut var = None;
        if let Some(k) = rest.iter().position(|w| *w == "var") {
            if k + 2 != rest.len() {
                return Err(syntax(line, "`var` takes exactly one name, at the end"));
            }
            var = Some(rest[k + 1].to_string());
            rest = &rest[..k];
        }
        let kind = match rest.first() {
            None => FieldKind::Minpoly(QPoly::x()),
            Some(&"minpoly") => FieldKind::Minpoly(parse_coeffs(&rest[1..], line)?),
            Some(&"split") => FieldKind::Split(
                rest[1..]
                    .split(|w| *w == ";")
                    .map(|ws| parse_coeffs(ws, line))
                    .collect::<Result<Vec<_>>>()?,
            ),
            Some(w) => return Err(syntax(line, format!("unknown field kind `{w}`"))),
        };
        Ok(FieldSpec { label, kind, var })
    }

    /// Reads a file holding a single `field` line.
    pub fn parse_file(text: &str) -> Result<Self> {
        let lines: Vec<(usize, &str)> = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, clean(l)))
            .filter(|(_, l)| !l.is_empty())
            .collect();
        match lines.as_slice() {
            [(n, l)] => Self::parse_line(l, *n),
            _ => Err(syntax(1, "a field file holds exactly one `field` line")),
        }
    }

    fn wrap(&self, k: NumberField) -> Field {
        match &self.var {
            None => Field::Number(k),
            Some(v) => Field::Function(FunctionField::new(&k, v.clone())),
        }
    }

    /// The field over `Q`.
    pub fn build(&self, bounds: Bounds) -> Result<Field> {
        let k = match &self.kind {
            FieldKind::Minpoly(m) if m.deg() == 1 && m.coeff(0) == crate::exact_algebra::q_int(0) => {
                NumberField::rationals().with_label(self.label.clone())
            }
            FieldKind::Minpoly(m) => {
                if m.deg() > bounds.field_degree {
                    return Err(Error::resource(format!("field degree {} exceeds {}", m.deg(), bounds.field_degree)));
                }
                NumberField::new(self.label.clone(), m.clone())?
            }
            FieldKind::Split(ps) => splitting_field(ps, &NumberField::rationals(), bounds)?
                .field
                .with_label(self.label.clone()),
        };
        Ok(self.wrap(k))
    }

    /// The constant extension of `base` described by this line, with its embedding.
    /// A `minpoly` field receives the base generator at its first root of the base
    /// minimal polynomial; a `split` field is the splitting field over the base.
    pub fn build_over(&self, base: &Field, bounds: Bounds) -> Result<(Field, FieldEmbedding)> {
        let k = base.constants();
        let emb = match &self.kind {
            FieldKind::Split(ps) => {
                let sf = splitting_field(ps, k, bounds)?;
                let l = sf.field.with_label(self.label.clone());
                FieldEmbedding::new(k.clone(), l.from_poly(sf.base_embedding.image_of_generator().repr().clone()))?
            }
            FieldKind::Minpoly(_) => {
                let l = self.build(bounds)?.constants().clone();
                if k.is_rationals() {
                    FieldEmbedding::from_rationals(&l)
                } else {
                    let root = rational_roots_in(&l, k.minpoly())
                        .into_iter()
                        .next()
                        .ok_or_else(|| Error::precondition(format!("{} does not embed into {}", k.label(), l.label())))?;
                    FieldEmbedding::new(k.clone(), root)?
                }
            }
        };
        Ok((base.extend_constants(&emb)?, emb))
    }
}

/// `field <label> minpoly c0 .. cn [var t]`.
pub fn format_field(field: &Field) -> String {
    let k = field.constants();
    let coeffs: Vec<String> = k.minpoly().coeffs().iter().map(format_rational_short).collect();
    let mut s = format!("field {} minpoly {}", k.label(), coeffs.join(" "));
    if let Field::Function(f) = field {
        s.push_str(&format!(" var {}", f.var()));
    }
    s
}

/// Splits a file into the `tree` block (blanked elsewhere, so line numbers survive) and the other lines.
fn split_tree_block<'a>(text: &'a str, stop: &[&str]) -> (Option<String>, Vec<(usize, &'a str)>) {
    let mut in_tree = false;
    let mut seen = false;
    let mut tree_text = String::new();
    let mut rest = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = clean(raw);
        if line == "tree" || line == "tree:" {
            in_tree = true;
            seen = true;
            tree_text.push('\n');
            continue;
        }
        if in_tree && stop.iter().any(|s| line.starts_with(s)) {
            in_tree = false;
        }
        if in_tree {
            tree_text.push_str(line);
        } else if !line.is_empty() {
            rest.push((i + 1, line));
        }
        tree_text.push('\n');
    }
    (seen.then_some(tree_text), rest)
}

pub fn parse_structure(text: &str, bounds: Bounds) -> Result<Structure> {
    let (tree_text, rest) = split_tree_block(text, &["field", "node "]);
    let tree = match tree_text {
        Some(t) => FiniteTree::parse(&t)?,
        None => FiniteTree::trivial(),
    };
    let mut field = None;
    let mut assigned: BTreeMap<usize, Handle> = BTreeMap::new();
    for (n, line) in rest {
        if line.starts_with("field") {
            if field.is_some() {
                return Err(syntax(n, "more than one `field` line"));
            }
            field = Some(FieldSpec::parse_line(line, n)?.build(bounds)?);
        } else if let Some(body) = line.strip_prefix("node ") {
            let field = field.as_ref().ok_or_else(|| syntax(n, "`node` lines must follow the `field` line"))?;
            let (name, handle) = body.split_once('=').ok_or_else(|| syntax(n, "expected `node <name> = <handle>`"))?;
            let i = tree.node(name.trim())?;
            if assigned.contains_key(&i) {
                return Err(syntax(n, format!("node `{}` assigned twice", name.trim())));
            }
            assigned.insert(i, Handle::parse(handle.trim(), field)?);
        } else {
            return Err(syntax(n, format!("unexpected line `{line}`")));
        }
    }
    let field = field.ok_or_else(|| syntax(1, "missing `field` line"))?;
    let handles = (0..tree.len())
        .map(|i| assigned.remove(&i).unwrap_or_else(|| Handle::trivial(&field)))
        .collect();
    Structure::new(tree, field, handles)
}

pub fn format_structure(s: &Structure) -> String {
    format!("tree\n{}{}\n{}", s.tree(), format_field(s.field()), s.node_lines())
}

/// A formula together with the parameter definitions preceding it.
#[derive(Clone, Debug)]
pub struct FormulaFile {
    pub lets: Vec<(String, crate::formulas::Term)>,
    pub formula: Formula,
}

pub fn parse_formula_file(text: &str, tree: Option<&FiniteTree>) -> Result<FormulaFile> {
    let mut lets = Vec::new();
    let mut body = String::new();
    for raw in text.lines() {
        let line = clean(raw);
        if body.trim().is_empty() && line.starts_with("let ") {
            let (name, term) = line[4..]
                .split_once('=')
                .ok_or_else(|| syntax(1, "expected `let <name> = <term>`"))?;
            let name = name.trim().trim_start_matches('$').to_string();
            lets.push((name, parse_term(term)?));
            body.push('\n');
        } else {
            // keep leading whitespace so error columns match the file
            body.push_str(raw.split('#').next().unwrap().trim_end());
            body.push('\n');
        }
    }
    let formula = parse(&body, tree)?;
    Ok(FormulaFile { lets, formula })
}

impl FormulaFile {
    /// Evaluates the `let` terms in order, each seeing the earlier ones.
    pub fn params(&self, s: &Structure) -> Result<Params> {
        let mut params = Params::new();
        for (name, t) in &self.lets {
            let model = StructureModel::new(s, params.clone())?;
            let x = evaluate_term(t, &model)?.ok_or_else(|| Error::invalid(format!("`${name}` divides by zero")))?;
            params.insert(name.clone(), x);
        }
        Ok(params)
    }
}

/// A sentence file: the sentence, its tree and the characteristic function.
#[derive(Clone, Debug)]
pub struct SentenceFile {
    pub sentence: PsiSentence,
    pub tree: FiniteTree,
    pub chi: CharFunction,
}

pub fn parse_sentence_file(text: &str) -> Result<SentenceFile> {
    let (tree_text, rest) = split_tree_block(text, &["Q:", "node "]);
    let mut q = None;
    let mut conds: Vec<(usize, String, u64, String)> = Vec::new();
    for (n, line) in rest {
        if let Some(poly) = line.strip_prefix("Q:") {
            let inner = poly
                .trim()
                .strip_prefix('[')
                .and_then(|p| p.strip_suffix(']'))
                .ok_or_else(|| syntax(n, "expected `Q: [c0,..,1]`"))?;
            let words: Vec<&str> = inner.split(',').map(str::trim).collect();
            q = Some(parse_coeffs(&words, n)?);
        } else if let Some(body) = line.strip_prefix("node ") {
            let (head, cond) = body.split_once(':').ok_or_else(|| syntax(n, "expected `node <a> char <p> : <condition>`"))?;
            let words: Vec<&str> = head.split_whitespace().collect();
            let [name, "char", p] = words.as_slice() else {
                return Err(syntax(n, "expected `node <a> char <p> : <condition>`"));
            };
            let p: u64 = p.parse().map_err(|_| syntax(n, format!("bad characteristic `{p}`")))?;
            conds.push((n, name.to_string(), p, cond.to_string()));
        } else {
            return Err(syntax(n, format!("unexpected line `{line}`")));
        }
    }
    let q = q.ok_or_else(|| syntax(1, "missing `Q:` line"))?;
    let tree = match tree_text {
        Some(t) => FiniteTree::parse(&t)?,
        None => {
            let edges: Vec<(String, String)> = conds.iter().map(|c| (c.1.clone(), BOTTOM.to_string())).collect();
            FiniteTree::from_edges(&edges)?
        }
    };
    let mut chars = vec![0u64; tree.len()];
    let mut conditions = Vec::new();
    for (n, name, p, cond) in conds {
        let a = tree.node(&name)?;
        for y in 0..tree.len() {
            if tree.leq(a, y) {
                if chars[y] != 0 && chars[y] != p {
                    return Err(syntax(n, format!("node `{}` gets two characteristics", tree.name(y))));
                }
                chars[y] = p;
            }
        }
        let r = parse_open(&cond, Some(&tree), &[ROOT_VAR]).map_err(|e| match e {
            Error::Syntax { column, message, .. } => Error::Syntax { line: n, column, message },
            e => e,
        })?;
        conditions.push((name, r));
    }
    let chi = CharFunction::new(&tree, chars)?;
    Ok(SentenceFile {
        sentence: PsiSentence::new(q, conditions)?,
        tree,
        chi,
    })
}

pub fn parse_choice_system(text: &str) -> Result<ChoiceSystem> {
    let mut names = Vec::new();
    let mut sizes = Vec::new();
    let mut covers = Vec::new();
    let mut relations: Vec<Vec<Vec<bool>>> = Vec::new();
    let index = |names: &[String], n: &str, line: usize| {
        names
            .iter()
            .position(|x| x == n)
            .ok_or_else(|| syntax(line, format!("unknown element `{n}`")))
    };
    for (i, raw) in text.lines().enumerate() {
        let n = i + 1;
        let line = clean(raw);
        if line.is_empty() {
            continue;
        }
        let (head, pairs) = match line.split_once(':') {
            Some((h, p)) => (h, Some(p)),
            None => (line, None),
        };
        let words: Vec<&str> = head.split_whitespace().collect();
        match words.as_slice() {
            ["element", name, size] if pairs.is_none() => {
                if names.iter().any(|x| x == name) {
                    return Err(syntax(n, format!("element `{name}` declared twice")));
                }
                names.push(name.to_string());
                sizes.push(size.parse::<usize>().map_err(|_| syntax(n, format!("bad size `{size}`")))?);
            }
            ["cover", lo, hi] => {
                let (a, b) = (index(&names, lo, n)?, index(&names, hi, n)?);
                let mut rel = vec![vec![false; sizes[b]]; sizes[a]];
                for pair in pairs.unwrap_or("").split_whitespace() {
                    let (x, y) = pair.split_once('-').ok_or_else(|| syntax(n, format!("expected `i-j`, got `{pair}`")))?;
                    let (x, y): (usize, usize) = match (x.parse(), y.parse()) {
                        (Ok(x), Ok(y)) if x < sizes[a] && y < sizes[b] => (x, y),
                        _ => return Err(syntax(n, format!("pair `{pair}` out of range"))),
                    };
                    rel[x][y] = true;
                }
                covers.push((a, b));
                relations.push(rel);
            }
            _ => return Err(syntax(n, format!("unexpected line `{line}`"))),
        }
    }
    ChoiceSystem::new(names, sizes, covers, relations)
}

pub fn format_choice_system(sys: &ChoiceSystem, relations: &[Vec<Vec<bool>>]) -> String {
    let mut out = String::new();
    for (i, name) in sys.names().iter().enumerate() {
        out.push_str(&format!("element {name} {}\n", sys.size(i)));
    }
    for (k, &(a, b)) in sys.covers().iter().enumerate() {
        let pairs: Vec<String> = relations[k]
            .iter()
            .enumerate()
            .flat_map(|(x, row)| row.iter().enumerate().filter(|(_, &r)| r).map(move |(y, _)| format!("{x}-{y}")))
            .collect();
        out.push_str(&format!("cover {} {} : {}\n", sys.names()[a], sys.names()[b], pairs.join(" ")));
    }
    out
}
