//! Constraint-string grammar.
//!
//! ```text
//! chain := expr (rel expr)+
//! expr  := ["+"|"-"] term (("+"|"-") term)*
//! term  := number ["*"] [ident] | ident
//! rel   := "<=" | ">=" | "=" | "==" | "<" | ">"
//! ```
//!
//! Numbers are decimal or `p/q` literals; identifiers may carry a trailing prime.
//! `true` and `false` are accepted as whole constraints.

use std::fmt;

use crate::geometry::{LinearConstraint, Polyhedron, Relation, VarSpace};
use crate::numeric::{rational_from_decimal_string, Rational};

use super::ModelError;

/// Relation of a specification atom; strict forms are allowed here only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AtomRelation {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
}

impl AtomRelation {
    pub fn closed(self) -> Option<Relation> {
        match self {
            AtomRelation::Le => Some(Relation::Le),
            AtomRelation::Eq => Some(Relation::Eq),
            AtomRelation::Ge => Some(Relation::Ge),
            AtomRelation::Lt | AtomRelation::Gt => None,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            AtomRelation::Lt => "<",
            AtomRelation::Le => "<=",
            AtomRelation::Eq => "=",
            AtomRelation::Ge => ">=",
            AtomRelation::Gt => ">",
        }
    }
}

impl fmt::Display for AtomRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// `coefficients · x  relation  bound`, possibly strict.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Atom {
    pub coefficients: Vec<Rational>,
    pub relation: AtomRelation,
    pub bound: Rational,
}

impl Atom {
    pub fn display<'a>(&'a self, space: &'a VarSpace) -> impl fmt::Display + 'a {
        AtomDisplay { atom: self, names: space.names() }
    }
}

struct AtomDisplay<'a> {
    atom: &'a Atom,
    names: &'a [String],
}

impl fmt::Display for AtomDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        crate::geometry::write_linear(f, &self.atom.coefficients, self.names)?;
        write!(f, " {} {}", self.atom.relation, self.atom.bound)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(Rational),
    Ident(String),
    Plus,
    Minus,
    Star,
    Rel(AtomRelation),
}

fn tokenize(text: &str) -> Result<Vec<Token>, String> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let ch = chars[i];
        if ch.is_whitespace() {
            i += 1;
        } else if ch.is_ascii_digit() || ch == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.' || chars[i] == '/') {
                i += 1;
            }
            let lit: String = chars[start..i].iter().collect();
            out.push(Token::Num(rational_from_decimal_string(&lit).map_err(|e| e.to_string())?));
        } else if ch.is_alphabetic() || ch == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            if i < chars.len() && chars[i] == '\'' {
                i += 1;
            }
            out.push(Token::Ident(chars[start..i].iter().collect()));
        } else {
            let next = chars.get(i + 1).copied();
            let (tok, len) = match (ch, next) {
                ('+', _) => (Token::Plus, 1),
                ('-', _) => (Token::Minus, 1),
                ('*', _) => (Token::Star, 1),
                ('<', Some('=')) => (Token::Rel(AtomRelation::Le), 2),
                ('>', Some('=')) => (Token::Rel(AtomRelation::Ge), 2),
                ('=', Some('=')) => (Token::Rel(AtomRelation::Eq), 2),
                ('<', _) => (Token::Rel(AtomRelation::Lt), 1),
                ('>', _) => (Token::Rel(AtomRelation::Gt), 1),
                ('=', _) => (Token::Rel(AtomRelation::Eq), 1),
                ('≤', _) => (Token::Rel(AtomRelation::Le), 1),
                ('≥', _) => (Token::Rel(AtomRelation::Ge), 1),
                _ => return Err(format!("unexpected character `{ch}`")),
            };
            out.push(tok);
            i += len;
        }
    }
    Ok(out)
}

/// Linear expression: coefficients plus constant.
struct Expr {
    coefficients: Vec<Rational>,
    constant: Rational,
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    space: &'a VarSpace,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn expr(&mut self) -> Result<Expr, String> {
        let mut e = Expr { coefficients: vec![Rational::zero(); self.space.dim()], constant: Rational::zero() };
        let mut first = true;
        loop {
            let mut sign = Rational::one();
            match self.peek() {
                Some(Token::Plus) => self.pos += 1,
                Some(Token::Minus) => {
                    sign = -sign;
                    self.pos += 1;
                }
                _ if first => {}
                _ => break,
            }
            first = false;
            self.term(&sign, &mut e)?;
        }
        Ok(e)
    }

    fn term(&mut self, sign: &Rational, e: &mut Expr) -> Result<(), String> {
        match self.peek().cloned() {
            Some(Token::Num(n)) => {
                self.pos += 1;
                let starred = matches!(self.peek(), Some(Token::Star));
                if starred {
                    self.pos += 1;
                }
                match self.peek().cloned() {
                    Some(Token::Ident(name)) => {
                        self.pos += 1;
                        self.add_var(&name, &(sign * &n), e)
                    }
                    _ if starred => Err("expected variable after `*`".into()),
                    _ => {
                        e.constant += &(sign * &n);
                        Ok(())
                    }
                }
            }
            Some(Token::Ident(name)) => {
                self.pos += 1;
                if matches!(self.peek(), Some(Token::Star)) {
                    self.pos += 1;
                    match self.peek().cloned() {
                        Some(Token::Num(n)) => {
                            self.pos += 1;
                            return self.add_var(&name, &(sign * &n), e);
                        }
                        _ => return Err("expected number after `*`".into()),
                    }
                }
                self.add_var(&name, sign, e)
            }
            Some(t) => Err(format!("unexpected token {t:?}")),
            None => Err("unexpected end of constraint".into()),
        }
    }

    fn add_var(&self, name: &str, coef: &Rational, e: &mut Expr) -> Result<(), String> {
        let i = self.space.index_of(name).ok_or_else(|| format!("unknown variable `{name}`"))?;
        e.coefficients[i] += coef;
        Ok(())
    }
}

/// Parses one constraint string, possibly a chain like `0 <= x <= 3`.
pub fn parse_atoms(text: &str, space: &VarSpace) -> Result<Vec<Atom>, ModelError> {
    let err = |message: String| ModelError::Parse { text: text.to_string(), message };
    let trimmed = text.trim();
    if trimmed == "true" {
        return Ok(Vec::new());
    }
    if trimmed == "false" {
        return Ok(vec![Atom {
            coefficients: vec![Rational::zero(); space.dim()],
            relation: AtomRelation::Ge,
            bound: Rational::one(),
        }]);
    }
    let tokens = tokenize(trimmed).map_err(err)?;
    let mut p = Parser { tokens, pos: 0, space };
    let mut exprs = vec![p.expr().map_err(err)?];
    let mut rels = Vec::new();
    while let Some(Token::Rel(r)) = p.peek().cloned() {
        p.pos += 1;
        rels.push(r);
        exprs.push(p.expr().map_err(err)?);
    }
    if p.pos != p.tokens.len() {
        return Err(err(format!("unexpected token {:?}", p.tokens[p.pos])));
    }
    if rels.is_empty() {
        return Err(err("missing relation".into()));
    }
    Ok(rels
        .into_iter()
        .enumerate()
        .map(|(k, relation)| {
            let (l, r) = (&exprs[k], &exprs[k + 1]);
            Atom {
                coefficients: l.coefficients.iter().zip(&r.coefficients).map(|(a, b)| a - b).collect(),
                relation,
                bound: &r.constant - &l.constant,
            }
        })
        .collect())
}

/// Parses a closed constraint string; strict relations are rejected.
pub fn parse_constraint(text: &str, space: &VarSpace) -> Result<Vec<LinearConstraint>, ModelError> {
    parse_atoms(text, space)?
        .into_iter()
        .map(|a| {
            let relation = a.relation.closed().ok_or_else(|| ModelError::Parse {
                text: text.to_string(),
                message: "strict relations are not allowed in models".into(),
            })?;
            Ok(LinearConstraint::new(a.coefficients, relation, a.bound))
        })
        .collect()
}

/// Conjunction of constraint strings as a polyhedron.
pub fn parse_polyhedron<S: AsRef<str>>(texts: &[S], space: &VarSpace) -> Result<Polyhedron, ModelError> {
    let mut cs = Vec::new();
    for t in texts {
        cs.extend(parse_constraint(t.as_ref(), space)?);
    }
    Ok(Polyhedron::from_constraints(space.clone(), &cs)?)
}
