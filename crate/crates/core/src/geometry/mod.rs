//! Closed convex polyhedra over ordered variable spaces.
//!
//! Polyhedra keep a constraint system and lazily compute the dual generator
//! system (points, rays, lines) with the double description method. All
//! arithmetic is exact.

mod cone;
mod linalg;
mod polyhedron;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::Rational;

pub use polyhedron::{ElapseBound, Generators, Optimum, Polyhedron};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeometryError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("variable spaces differ: [{left}] vs [{right}]")]
    SpaceMismatch { left: String, right: String },
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("duplicate variable `{0}`")]
    DuplicateVariable(String),
    #[error("empty flow polyhedron")]
    EmptyFlow,
    #[error("invalid interval [{lo}, {hi}] for `{var}`")]
    InvalidInterval { var: String, lo: Rational, hi: Rational },
    #[error("negative elapse bound {0}")]
    NegativeBound(Rational),
}

/// Ordered list of distinct variable names. Cheap to clone.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct VarSpace(Arc<[String]>);

impl VarSpace {
    pub fn new<I, S>(names: I) -> Result<Self, GeometryError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        for (i, n) in names.iter().enumerate() {
            if names[..i].contains(n) {
                return Err(GeometryError::DuplicateVariable(n.clone()));
            }
        }
        Ok(VarSpace(names.into()))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn names(&self) -> &[String] {
        &self.0
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.0.iter().position(|n| n == name)
    }

    pub fn require(&self, name: &str) -> Result<usize, GeometryError> {
        self.index_of(name).ok_or_else(|| GeometryError::UnknownVariable(name.to_string()))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index_of(name).is_some()
    }

    /// The space of time derivatives: every name gets a prime suffix.
    pub fn derivatives(&self) -> VarSpace {
        VarSpace(self.0.iter().map(|n| format!("{n}'")).collect())
    }

    /// Appends names not already present, keeping existing order.
    pub fn union(&self, other: &VarSpace) -> VarSpace {
        let mut names: Vec<String> = self.0.to_vec();
        for n in other.names() {
            if !names.contains(n) {
                names.push(n.clone());
            }
        }
        VarSpace(names.into())
    }

    pub fn with(&self, extra: &str) -> Result<VarSpace, GeometryError> {
        VarSpace::new(self.0.iter().cloned().chain(std::iter::once(extra.to_string())))
    }

    pub fn without(&self, removed: &[&str]) -> VarSpace {
        VarSpace(self.0.iter().filter(|n| !removed.contains(&n.as_str())).cloned().collect())
    }

    pub(crate) fn check_same(&self, other: &VarSpace) -> Result<(), GeometryError> {
        if self == other {
            Ok(())
        } else {
            Err(GeometryError::SpaceMismatch { left: self.0.join(","), right: other.0.join(",") })
        }
    }
}

impl fmt::Debug for VarSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        })
    }
}

/// `coefficients · x  relation  bound`, always closed.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LinearConstraint {
    pub coefficients: Vec<Rational>,
    pub relation: Relation,
    pub bound: Rational,
}

impl LinearConstraint {
    /// The same half-space written with a positive leading coefficient; a single-variable
    /// constraint is scaled to a unit coefficient.
    pub fn normalized(&self) -> LinearConstraint {
        let nonzero: Vec<&Rational> = self.coefficients.iter().filter(|a| !a.is_zero()).collect();
        let scale = match nonzero.as_slice() {
            [only] => Rational::one() / (*only).clone(),
            [first, ..] if first.is_negative() => -Rational::one(),
            _ => return self.clone(),
        };
        let relation = match (self.relation, scale.is_negative()) {
            (Relation::Le, true) => Relation::Ge,
            (Relation::Ge, true) => Relation::Le,
            (r, _) => r,
        };
        LinearConstraint {
            coefficients: self.coefficients.iter().map(|a| a * &scale).collect(),
            relation,
            bound: &self.bound * &scale,
        }
    }

    pub fn new(coefficients: Vec<Rational>, relation: Relation, bound: Rational) -> Self {
        LinearConstraint { coefficients, relation, bound }
    }

    /// `var = value` in a space of dimension `dim`.
    pub fn var_eq(dim: usize, var: usize, value: Rational) -> Self {
        Self::unit(dim, var, Relation::Eq, value)
    }

    pub fn var_le(dim: usize, var: usize, value: Rational) -> Self {
        Self::unit(dim, var, Relation::Le, value)
    }

    pub fn var_ge(dim: usize, var: usize, value: Rational) -> Self {
        Self::unit(dim, var, Relation::Ge, value)
    }

    fn unit(dim: usize, var: usize, relation: Relation, value: Rational) -> Self {
        let mut coefficients = vec![Rational::zero(); dim];
        coefficients[var] = Rational::one();
        LinearConstraint { coefficients, relation, bound: value }
    }

    pub fn dim(&self) -> usize {
        self.coefficients.len()
    }

    pub fn lhs(&self, point: &[Rational]) -> Rational {
        self.coefficients.iter().zip(point).map(|(a, x)| a * x).sum()
    }

    pub fn is_satisfied_by(&self, point: &[Rational]) -> bool {
        let lhs = self.lhs(point);
        match self.relation {
            Relation::Le => lhs <= self.bound,
            Relation::Eq => lhs == self.bound,
            Relation::Ge => lhs >= self.bound,
        }
    }

    pub fn display<'a>(&'a self, space: &'a VarSpace) -> ConstraintDisplay<'a> {
        ConstraintDisplay { constraint: self, names: space.names() }
    }
}

pub struct ConstraintDisplay<'a> {
    constraint: &'a LinearConstraint,
    names: &'a [String],
}

impl fmt::Display for ConstraintDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_linear(f, &self.constraint.coefficients, self.names)?;
        write!(f, " {} {}", self.constraint.relation, self.constraint.bound)
    }
}

pub(crate) fn write_linear(f: &mut impl fmt::Write, coefficients: &[Rational], names: &[String]) -> fmt::Result {
    let mut first = true;
    for (c, name) in coefficients.iter().zip(names) {
        if c.is_zero() {
            continue;
        }
        let magnitude = c.abs();
        if first {
            if c.is_negative() {
                f.write_str("-")?;
            }
        } else {
            f.write_str(if c.is_negative() { " - " } else { " + " })?;
        }
        if magnitude == 1 {
            f.write_str(name)?;
        } else {
            write!(f, "{magnitude}*{name}")?;
        }
        first = false;
    }
    if first {
        f.write_str("0")?;
    }
    Ok(())
}

/// Closed rational interval `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Interval {
    pub lo: Rational,
    pub hi: Rational,
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational) -> Self {
        Interval { lo, hi }
    }

    pub fn point(value: Rational) -> Self {
        Interval { lo: value.clone(), hi: value }
    }
}

/// Partial map from variable names to the interval they are reset into.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct IntervalUpdate(pub BTreeMap<String, Interval>);

impl IntervalUpdate {
    pub fn identity() -> Self {
        IntervalUpdate(BTreeMap::new())
    }

    pub fn reset(var: &str, lo: Rational, hi: Rational) -> Self {
        let mut map = BTreeMap::new();
        map.insert(var.to_string(), Interval::new(lo, hi));
        IntervalUpdate(map)
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Interval)> {
        self.0.iter()
    }
}
