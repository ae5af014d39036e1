//! Formulas with polynomial atoms, valuation-ring membership, Boolean
//! connectives and root-bounded existential quantifiers.
//!
//! Surface syntax (whitespace-insensitive):
//!
//! ```text
//! formula := conj { "|" conj }
//! conj    := neg { "&" neg }
//! neg     := "~" neg | "(" formula ")" | atom | binder
//! binder  := "exists" ident "root" polylit ":" formula
//! atom    := term "=" "0" | term "in" ("O" | "m") "[" ident "]"
//! polylit := "[" rational { "," rational } "]"      constant term first, monic
//! term    := sums and products of integers, bound variables, `$params`,
//!            with `^` to a nonnegative integer and `/`
//! ```
//!
//! A binder's body extends as far to the right as possible. An atom whose
//! term divides by zero is false.

mod eval;
mod parser;

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;

use crate::exact_algebra::{format_rational_short, QPoly};

pub use eval::{determining_extension, evaluate, evaluate_at, evaluate_term, DeterminingExtension, Model, StructureModel};
pub use parser::{parse, parse_open, parse_term};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Int(BigInt),
    Var(String),
    Param(String),
    Add(Box<Term>, Box<Term>),
    Sub(Box<Term>, Box<Term>),
    Mul(Box<Term>, Box<Term>),
    Div(Box<Term>, Box<Term>),
    Neg(Box<Term>),
    Pow(Box<Term>, u32),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RingKind {
    /// The valuation ring `O`.
    Ring,
    /// Its maximal ideal `m`.
    Ideal,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    /// `term = 0`.
    Zero(Term),
    In(Term, RingKind, String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    ExistsRoot {
        var: String,
        poly: QPoly,
        body: Box<Formula>,
    },
}

impl Formula {
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    /// `0 = 0`.
    pub fn truth() -> Formula {
        Formula::Zero(Term::Int(0.into()))
    }

    /// `1 = 0`.
    pub fn falsity() -> Formula {
        Formula::Zero(Term::Int(1.into()))
    }

    pub fn exists_root(var: impl Into<String>, poly: QPoly, body: Formula) -> Formula {
        Formula::ExistsRoot {
            var: var.into(),
            poly,
            body: Box::new(body),
        }
    }

    /// Binder polynomials, outermost first.
    pub fn binder_polynomials(&self) -> Vec<QPoly> {
        let mut out = Vec::new();
        self.walk(&mut |f| {
            if let Formula::ExistsRoot { poly, .. } = f {
                out.push(poly.clone());
            }
        });
        out
    }

    /// Node names mentioned by membership atoms.
    pub fn nodes(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.walk(&mut |f| {
            if let Formula::In(_, _, n) = f {
                out.insert(n.clone());
            }
        });
        out
    }

    /// Parameter names `$p` occurring anywhere.
    pub fn params(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.walk(&mut |f| match f {
            Formula::Zero(t) | Formula::In(t, _, _) => t.params(&mut out),
            _ => {}
        });
        out
    }

    /// Free variables (not bound by an enclosing binder).
    pub fn free_vars(&self) -> BTreeSet<String> {
        match self {
            Formula::Zero(t) | Formula::In(t, _, _) => {
                let mut s = BTreeSet::new();
                t.vars(&mut s);
                s
            }
            Formula::Not(a) => a.free_vars(),
            Formula::And(a, b) | Formula::Or(a, b) => {
                let mut s = a.free_vars();
                s.extend(b.free_vars());
                s
            }
            Formula::ExistsRoot { var, body, .. } => {
                let mut s = body.free_vars();
                s.remove(var);
                s
            }
        }
    }

    pub fn is_quantifier_free(&self) -> bool {
        self.binder_polynomials().is_empty()
    }

    fn walk(&self, f: &mut impl FnMut(&Formula)) {
        f(self);
        match self {
            Formula::Not(a) => a.walk(f),
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.walk(f);
                b.walk(f);
            }
            Formula::ExistsRoot { body, .. } => body.walk(f),
            _ => {}
        }
    }
}

impl Term {
    fn vars(&self, out: &mut BTreeSet<String>) {
        self.visit(&mut |t| {
            if let Term::Var(v) = t {
                out.insert(v.clone());
            }
        });
    }

    fn params(&self, out: &mut BTreeSet<String>) {
        self.visit(&mut |t| {
            if let Term::Param(v) = t {
                out.insert(v.clone());
            }
        });
    }

    fn visit(&self, f: &mut impl FnMut(&Term)) {
        f(self);
        match self {
            Term::Add(a, b) | Term::Sub(a, b) | Term::Mul(a, b) | Term::Div(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Term::Neg(a) | Term::Pow(a, _) => a.visit(f),
            _ => {}
        }
    }
}

// binding strength for printing
const SUM: u8 = 0;
const PRODUCT: u8 = 1;
const UNARY: u8 = 2;
const POWER: u8 = 3;
const ATOM: u8 = 4;

impl Term {
    fn level(&self) -> u8 {
        match self {
            Term::Add(..) | Term::Sub(..) => SUM,
            Term::Mul(..) | Term::Div(..) => PRODUCT,
            Term::Neg(_) => UNARY,
            Term::Pow(..) => POWER,
            Term::Int(_) | Term::Var(_) | Term::Param(_) => ATOM,
        }
    }

    fn write_at(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.level() < min {
            write!(f, "(")?;
            self.write_at(f, SUM)?;
            return write!(f, ")");
        }
        match self {
            Term::Int(n) => write!(f, "{n}"),
            Term::Var(v) => write!(f, "{v}"),
            Term::Param(p) => write!(f, "${p}"),
            Term::Add(a, b) | Term::Sub(a, b) => {
                a.write_at(f, SUM)?;
                write!(f, " {} ", if matches!(self, Term::Add(..)) { "+" } else { "-" })?;
                b.write_at(f, PRODUCT)
            }
            Term::Mul(a, b) | Term::Div(a, b) => {
                a.write_at(f, PRODUCT)?;
                write!(f, "{}", if matches!(self, Term::Mul(..)) { "*" } else { "/" })?;
                b.write_at(f, UNARY)
            }
            Term::Neg(a) => {
                write!(f, "-")?;
                a.write_at(f, UNARY)
            }
            Term::Pow(a, e) => {
                a.write_at(f, ATOM)?;
                write!(f, "^{e}")
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_at(f, SUM)
    }
}

/// `[c0,c1,..]`, constant term first.
pub fn polylit_string(p: &QPoly) -> String {
    let parts: Vec<String> = p.coeffs().iter().map(format_rational_short).collect();
    format!("[{}]", parts.join(","))
}

// formula contexts for printing: binders are parenthesized unless nothing follows them
const F_TOP: u8 = 0;
const F_DISJ: u8 = 1;
const F_CONJ: u8 = 2;
const F_NEG: u8 = 3;

impl Formula {
    fn write_at(&self, f: &mut fmt::Formatter<'_>, ctx: u8) -> fmt::Result {
        let need = match self {
            Formula::Or(..) => ctx > F_DISJ,
            Formula::And(..) => ctx > F_CONJ,
            Formula::ExistsRoot { .. } => ctx != F_TOP,
            _ => false,
        };
        if need {
            write!(f, "(")?;
            self.write_at(f, F_TOP)?;
            return write!(f, ")");
        }
        match self {
            Formula::Zero(t) => write!(f, "{t} = 0"),
            Formula::In(t, k, n) => write!(f, "{t} in {}[{n}]", if *k == RingKind::Ring { "O" } else { "m" }),
            Formula::Not(a) => {
                write!(f, "~")?;
                match **a {
                    Formula::Zero(_) | Formula::In(..) => {
                        write!(f, "(")?;
                        a.write_at(f, F_TOP)?;
                        write!(f, ")")
                    }
                    _ => a.write_at(f, F_NEG),
                }
            }
            Formula::Or(a, b) => {
                a.write_at(f, F_DISJ)?;
                write!(f, " | ")?;
                b.write_at(f, F_CONJ)
            }
            Formula::And(a, b) => {
                a.write_at(f, F_CONJ)?;
                write!(f, " & ")?;
                b.write_at(f, F_NEG)
            }
            Formula::ExistsRoot { var, poly, body } => {
                write!(f, "exists {var} root ")?;
                write!(f, "{} : ", polylit_string(poly))?;
                body.write_at(f, F_TOP)
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_at(f, F_TOP)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn arb_term(vars: Vec<String>) -> impl Strategy<Value = Term> {
        let leaf = prop_oneof![
            (0i64..20).prop_map(|n| Term::Int(n.into())),
            prop::sample::select(if vars.is_empty() { vec!["p".to_string()] } else { vars.clone() }).prop_map(
                move |v| if v == "p" { Term::Param("p".into()) } else { Term::Var(v) }
            ),
            Just(Term::Param("a".into())),
        ];
        leaf.prop_recursive(3, 12, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::Add(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::Sub(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::Mul(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::Div(Box::new(a), Box::new(b))),
                inner.clone().prop_map(|a| Term::Neg(Box::new(a))),
                (inner, 0u32..4).prop_map(|(a, e)| Term::Pow(Box::new(a), e)),
            ]
        })
    }

    fn arb_formula() -> impl Strategy<Value = Formula> {
        let atom = prop_oneof![
            arb_term(vec![]).prop_map(Formula::Zero),
            (arb_term(vec![]), prop::bool::ANY, prop::sample::select(vec!["a", "b"])).prop_map(|(t, o, n)| {
                Formula::In(t, if o { RingKind::Ring } else { RingKind::Ideal }, n.to_string())
            }),
        ];
        atom.prop_recursive(4, 24, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(Formula::not),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
                inner.prop_map(|b| Formula::exists_root("x", QPoly::from_ints(&[1, 0, 1]), b)),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(f in arb_formula()) {
            let text = f.to_string();
            let back = parse(&text, None).unwrap();
            prop_assert_eq!(&back, &f, "{}", text);
            prop_assert_eq!(back.to_string(), text);
        }
    }

    #[test]
    fn scope_and_queries() {
        let f = parse("(exists x root [1,0,1]: x-2 in m[a] & x-5 in m[b])", None).unwrap();
        assert_eq!(f.nodes().len(), 2);
        assert!(f.free_vars().is_empty());
        assert_eq!(f.binder_polynomials(), vec![QPoly::from_ints(&[1, 0, 1])]);
        assert_eq!(f.to_string(), "exists x root [1,0,1] : x - 2 in m[a] & x - 5 in m[b]");
    }
}
