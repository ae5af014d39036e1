use num_bigint::BigInt;

use super::{Formula, RingKind, Term};
use crate::error::{Error, Result};
use crate::exact_algebra::{parse_rational, QPoly};
use crate::trees::FiniteTree;

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(BigInt),
    Param(String),
    Sym(char),
    End,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let (mut line, mut column) = (1, 1);
    let mut chars = text.chars().peekable();
    let ident_char = |c: char| c.is_ascii_alphanumeric() || c == '_';
    while let Some(&c) = chars.peek() {
        let (l, col) = (line, column);
        let mut take = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                column = 1;
            } else {
                column += 1;
            }
            c
        };
        if c.is_whitespace() {
            take(&mut chars);
            continue;
        }
        let tok = if c.is_ascii_digit() {
            let mut s = String::new();
            while chars.peek().is_some_and(|c| c.is_ascii_digit()) {
                s.push(take(&mut chars).unwrap());
            }
            Tok::Int(s.parse().expect("digits"))
        } else if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while chars.peek().is_some_and(|&c| ident_char(c)) {
                s.push(take(&mut chars).unwrap());
            }
            Tok::Ident(s)
        } else if c == '$' {
            take(&mut chars);
            let mut s = String::new();
            while chars.peek().is_some_and(|&c| ident_char(c)) {
                s.push(take(&mut chars).unwrap());
            }
            if s.is_empty() {
                return Err(syntax(l, col, "expected a parameter name after `$`"));
            }
            Tok::Param(s)
        } else if "()[],:~&|=+-*/^".contains(c) {
            take(&mut chars);
            Tok::Sym(c)
        } else {
            return Err(syntax(l, col, format!("unexpected character `{c}`")));
        };
        out.push(Token { tok, line: l, column: col });
    }
    out.push(Token {
        tok: Tok::End,
        line,
        column,
    });
    Ok(out)
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        line,
        column,
        message: message.into(),
    }
}

const KEYWORDS: [&str; 5] = ["exists", "root", "in", "O", "m"];

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    tree: Option<&'a FiniteTree>,
    /// Variables bound by enclosing binders, innermost last.
    scope: Vec<String>,
    /// Whether bare identifiers are allowed at all (false for parameter terms).
    allow_vars: bool,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn error(&self, message: impl Into<String>) -> Error {
        let t = &self.toks[self.pos];
        syntax(t.line, t.column, message)
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn is_sym(&self, c: char) -> bool {
        *self.peek() == Tok::Sym(c)
    }

    fn is_keyword(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == k)
    }

    fn expect_sym(&mut self, c: char) -> Result<()> {
        if self.is_sym(c) {
            self.bump();
            Ok(())
        } else {
            Err(self.error(format!("expected `{c}`")))
        }
    }

    fn expect_keyword(&mut self, k: &str) -> Result<()> {
        if self.is_keyword(k) {
            self.bump();
            Ok(())
        } else {
            Err(self.error(format!("expected `{k}`")))
        }
    }

    fn ident(&mut self) -> Result<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.error("expected an identifier")),
        }
    }

    fn formula(&mut self) -> Result<Formula> {
        let mut f = self.conj()?;
        while self.is_sym('|') {
            self.bump();
            let g = self.conj()?;
            f = Formula::or(f, g);
        }
        Ok(f)
    }

    fn conj(&mut self) -> Result<Formula> {
        let mut f = self.neg()?;
        while self.is_sym('&') {
            self.bump();
            let g = self.neg()?;
            f = Formula::and(f, g);
        }
        Ok(f)
    }

    fn neg(&mut self) -> Result<Formula> {
        if self.is_sym('~') {
            self.bump();
            return Ok(Formula::not(self.neg()?));
        }
        if self.is_keyword("exists") {
            return self.binder();
        }
        if self.is_sym('(') {
            // `(` opens either a formula or a term; try the formula reading first
            let save = self.pos;
            self.bump();
            let attempt = self.formula().and_then(|f| self.expect_sym(')').map(|_| f));
            match attempt {
                Ok(f) if !self.continues_term() => return Ok(f),
                Ok(_) => self.pos = save,
                Err(e @ (Error::UnknownNode(_) | Error::UnboundVariable(_))) => return Err(e),
                Err(e) => {
                    self.pos = save;
                    return self.atom().map_err(|e2| furthest(e, e2));
                }
            }
        }
        self.atom()
    }

    fn continues_term(&self) -> bool {
        matches!(self.peek(), Tok::Sym('=' | '+' | '-' | '*' | '/' | '^')) || self.is_keyword("in")
    }

    fn binder(&mut self) -> Result<Formula> {
        self.expect_keyword("exists")?;
        let var = self.ident()?;
        if KEYWORDS.contains(&var.as_str()) {
            return Err(self.error(format!("`{var}` is reserved")));
        }
        self.expect_keyword("root")?;
        let poly = self.polylit()?;
        self.expect_sym(':')?;
        self.scope.push(var.clone());
        let body = self.formula();
        self.scope.pop();
        Ok(Formula::exists_root(var, poly, body?))
    }

    fn polylit(&mut self) -> Result<QPoly> {
        let start = self.pos;
        self.expect_sym('[')?;
        let mut coeffs = vec![self.rational()?];
        while self.is_sym(',') {
            self.bump();
            coeffs.push(self.rational()?);
        }
        self.expect_sym(']')?;
        let p = QPoly::new(coeffs);
        if p.deg() < 1 || !p.is_monic() {
            let t = &self.toks[start];
            return Err(syntax(t.line, t.column, "binder polynomial must be monic and nonconstant"));
        }
        Ok(p)
    }

    fn rational(&mut self) -> Result<crate::exact_algebra::Q> {
        let mut text = String::new();
        if self.is_sym('-') {
            self.bump();
            text.push('-');
        }
        match self.bump() {
            Tok::Int(n) => text.push_str(&n.to_string()),
            _ => {
                self.pos -= 1;
                return Err(self.error("expected a rational coefficient"));
            }
        }
        if self.is_sym('/') {
            self.bump();
            match self.bump() {
                Tok::Int(n) => text.push_str(&format!("/{n}")),
                _ => {
                    self.pos -= 1;
                    return Err(self.error("expected a denominator"));
                }
            }
        }
        parse_rational(&text).map_err(|e| self.error(e.to_string()))
    }

    fn atom(&mut self) -> Result<Formula> {
        let t = self.sum()?;
        if self.is_sym('=') {
            self.bump();
            let rhs = self.sum()?;
            return Ok(match rhs {
                Term::Int(ref n) if *n == BigInt::from(0) => Formula::Zero(t),
                rhs => Formula::Zero(Term::Sub(Box::new(t), Box::new(rhs))),
            });
        }
        if self.is_keyword("in") {
            self.bump();
            let kind = if self.is_keyword("O") {
                RingKind::Ring
            } else if self.is_keyword("m") {
                RingKind::Ideal
            } else {
                return Err(self.error("expected `O` or `m`"));
            };
            self.bump();
            self.expect_sym('[')?;
            let node = self.ident()?;
            if let Some(tree) = self.tree {
                tree.node(&node)?;
            }
            self.expect_sym(']')?;
            return Ok(Formula::In(t, kind, node));
        }
        Err(self.error("expected `= 0` or `in`"))
    }

    fn sum(&mut self) -> Result<Term> {
        let mut t = self.product()?;
        loop {
            if self.is_sym('+') {
                self.bump();
                t = Term::Add(Box::new(t), Box::new(self.product()?));
            } else if self.is_sym('-') {
                self.bump();
                t = Term::Sub(Box::new(t), Box::new(self.product()?));
            } else {
                return Ok(t);
            }
        }
    }

    fn product(&mut self) -> Result<Term> {
        let mut t = self.unary()?;
        loop {
            if self.is_sym('*') {
                self.bump();
                t = Term::Mul(Box::new(t), Box::new(self.unary()?));
            } else if self.is_sym('/') {
                self.bump();
                t = Term::Div(Box::new(t), Box::new(self.unary()?));
            } else {
                return Ok(t);
            }
        }
    }

    fn unary(&mut self) -> Result<Term> {
        if self.is_sym('-') {
            self.bump();
            return Ok(Term::Neg(Box::new(self.unary()?)));
        }
        let base = self.primary()?;
        if self.is_sym('^') {
            self.bump();
            return match self.bump() {
                Tok::Int(n) => {
                    let e: u32 = n.try_into().map_err(|_| self.error("exponent too large"))?;
                    Ok(Term::Pow(Box::new(base), e))
                }
                _ => {
                    self.pos -= 1;
                    Err(self.error("expected a nonnegative integer exponent"))
                }
            };
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Term> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Term::Int(n))
            }
            Tok::Param(p) => {
                self.bump();
                Ok(Term::Param(p))
            }
            Tok::Ident(v) if !KEYWORDS.contains(&v.as_str()) => {
                if !self.allow_vars || !self.scope.contains(&v) {
                    return Err(Error::UnboundVariable(v));
                }
                self.bump();
                Ok(Term::Var(v))
            }
            Tok::Sym('(') => {
                self.bump();
                let t = self.sum()?;
                self.expect_sym(')')?;
                Ok(t)
            }
            _ => Err(self.error("expected a term")),
        }
    }
}

/// Of two syntax errors, keep the one that got further into the input.
fn furthest(a: Error, b: Error) -> Error {
    match (&a, &b) {
        (Error::Syntax { line: l1, column: c1, .. }, Error::Syntax { line: l2, column: c2, .. }) => {
            if (l1, c1) > (l2, c2) {
                a
            } else {
                b
            }
        }
        _ => b,
    }
}

fn run<T>(text: &str, tree: Option<&FiniteTree>, allow_vars: bool, f: impl FnOnce(&mut Parser) -> Result<T>) -> Result<T> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        tree,
        scope: Vec::new(),
        allow_vars,
    };
    let out = f(&mut p)?;
    if *p.peek() != Tok::End {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(out)
}

/// Parses a sentence. With a tree, node names are checked against it.
pub fn parse(text: &str, tree: Option<&FiniteTree>) -> Result<Formula> {
    run(text, tree, true, |p| p.formula())
}

/// Parses a closed term: integers and `$parameters` only.
pub fn parse_term(text: &str) -> Result<Term> {
    run(text, None, false, |p| p.sum())
}

/// Parses a formula in which `free` may occur unbound.
pub fn parse_open(text: &str, tree: Option<&FiniteTree>, free: &[&str]) -> Result<Formula> {
    run(text, tree, true, |p| {
        p.scope = free.iter().map(|s| s.to_string()).collect();
        p.formula()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let f = parse("exists x root [1,0,1] : (x - 2) in m[a]", None).unwrap();
        match &f {
            Formula::ExistsRoot { var, poly, body } => {
                assert_eq!(var, "x");
                assert_eq!(*poly, QPoly::from_ints(&[1, 0, 1]));
                assert!(matches!(**body, Formula::In(_, RingKind::Ideal, ref n) if n == "a"));
            }
            _ => panic!("expected a binder"),
        }
        assert_eq!(
            parse("~( (y) in O[b] )", None),
            Err(Error::UnboundVariable("y".into()))
        );
        let g = parse(
            "(exists x root [1,0,1]: x-2 in m[a]) & (exists x root [1,0,1]: x-5 in m[b])",
            None,
        )
        .unwrap();
        assert!(matches!(g, Formula::And(..)));
        assert_eq!(
            g.to_string(),
            "(exists x root [1,0,1] : x - 2 in m[a]) & (exists x root [1,0,1] : x - 5 in m[b])"
        );
    }

    #[test]
    fn errors_have_positions() {
        match parse("0 = 0 &\n  x ~ 1", None) {
            Err(Error::UnboundVariable(v)) => assert_eq!(v, "x"),
            other => panic!("{other:?}"),
        }
        match parse("0 = 0 &\n  1 ?", None) {
            Err(Error::Syntax { line, column, .. }) => assert_eq!((line, column), (2, 5)),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse("exists x root [2,1,3] : 0 = 0", None), Err(Error::Syntax { .. })));
        assert!(matches!(parse("(1 = 0", None), Err(Error::Syntax { .. })));
        let tree = FiniteTree::from_edges(&[("a", "_")]).unwrap();
        assert_eq!(parse("1 in O[b]", Some(&tree)), Err(Error::UnknownNode("b".into())));
        assert!(parse("1 in O[a]", Some(&tree)).is_ok());
    }

    #[test]
    fn parenthesized_terms_and_shadowing() {
        let f = parse("(1 + 2)*3 = 0 | (($c)) in O[a]", None).unwrap();
        assert!(matches!(f, Formula::Or(..)));
        let g = parse("exists x root [-2,0,1] : exists x root [1,1] : x + 1 = 0", None).unwrap();
        assert_eq!(g.to_string(), "exists x root [-2,0,1] : exists x root [1,1] : x + 1 = 0");
        assert_eq!(parse_term("$a^2 - 1/3").unwrap().to_string(), "$a^2 - 1/3");
        assert!(parse_term("y").is_err());
        assert_eq!(parse("x = 3", None), Err(Error::UnboundVariable("x".into())));
        assert_eq!(parse_open("x = 3", None, &["x"]).unwrap().to_string(), "x - 3 = 0");
    }
}
