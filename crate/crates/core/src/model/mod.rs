//! Linear hybrid automata, their synchronized product and the safety-violation
//! construction used for monitoring.

mod builtin;
mod format;
mod parse;

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use thiserror::Error;

use crate::geometry::{GeometryError, IntervalUpdate, LinearConstraint, Polyhedron, Relation, VarSpace};
use crate::numeric::Rational;

pub use builtin::{builtin_base, builtin_model, builtin_names, BuiltinSelector};
pub use format::{model_from_json, model_to_json, spec_from_json, spec_to_json};
pub use parse::{parse_atoms, parse_constraint, parse_polyhedron, Atom, AtomRelation};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("cannot parse constraint `{text}`: {message}")]
    Parse { text: String, message: String },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("unknown location `{0}`")]
    UnknownLocation(String),
    #[error("duplicate location `{0}`")]
    DuplicateLocation(String),
    #[error("malformed model file: {0}")]
    Format(String),
    #[error("unsupported builtin model `{0}`")]
    UnsupportedBuiltin(String),
    #[error("safety specification has no atoms")]
    EmptySpec,
}

#[derive(Debug, Clone)]
pub struct Location {
    pub id: String,
    /// Polyhedron over the derivative space.
    pub flow: Polyhedron,
    pub invariant: Polyhedron,
    pub initial: Polyhedron,
    pub accepting: bool,
}

#[derive(Debug, Clone)]
pub struct Edge {
    pub source: String,
    pub target: String,
    pub guard: Polyhedron,
    pub update: IntervalUpdate,
}

#[derive(Debug, Clone)]
pub struct Lha {
    pub space: VarSpace,
    pub locations: Vec<Location>,
    pub edges: Vec<Edge>,
}

/// Conjunction of possibly strict atoms that must hold at all times.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SafetySpec {
    pub space: VarSpace,
    pub atoms: Vec<Atom>,
}

impl SafetySpec {
    pub fn new(space: VarSpace, atoms: Vec<Atom>) -> Result<SafetySpec, ModelError> {
        if atoms.is_empty() {
            return Err(ModelError::EmptySpec);
        }
        for a in &atoms {
            if a.coefficients.len() != space.dim() {
                return Err(GeometryError::DimensionMismatch { expected: space.dim(), found: a.coefficients.len() }.into());
            }
        }
        Ok(SafetySpec { space, atoms })
    }

    pub fn parse<S: AsRef<str>>(space: VarSpace, atoms: &[S]) -> Result<SafetySpec, ModelError> {
        let mut out = Vec::new();
        for a in atoms {
            out.extend(parse_atoms(a.as_ref(), &space)?);
        }
        SafetySpec::new(space, out)
    }

    /// One closed guard per atom; together they cover the closure of the complement.
    pub fn violation_guards(&self) -> Vec<LinearConstraint> {
        let mut out = Vec::new();
        for a in &self.atoms {
            let flipped = match a.relation {
                AtomRelation::Gt | AtomRelation::Ge => vec![Relation::Le],
                AtomRelation::Lt | AtomRelation::Le => vec![Relation::Ge],
                AtomRelation::Eq => vec![Relation::Le, Relation::Ge],
            };
            for r in flipped {
                out.push(LinearConstraint::new(a.coefficients.clone(), r, a.bound.clone()));
            }
        }
        out
    }

    pub fn holds_at(&self, point: &[Rational]) -> bool {
        self.atoms.iter().all(|a| {
            let lhs: Rational = a.coefficients.iter().zip(point).map(|(c, x)| c * x).sum();
            match a.relation {
                AtomRelation::Lt => lhs < a.bound,
                AtomRelation::Le => lhs <= a.bound,
                AtomRelation::Eq => lhs == a.bound,
                AtomRelation::Ge => lhs >= a.bound,
                AtomRelation::Gt => lhs > a.bound,
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        write!(f, "{tag}: {}", self.message)
    }
}

/// Which component's accepting set a product inherits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AcceptFrom {
    Left,
    Right,
    Both,
}

impl Lha {
    pub fn new(space: VarSpace, locations: Vec<Location>, edges: Vec<Edge>) -> Result<Lha, ModelError> {
        let m = Lha { space, locations, edges };
        let mut index = HashMap::with_capacity(m.locations.len());
        for (i, l) in m.locations.iter().enumerate() {
            if index.insert(l.id.as_str(), i).is_some() {
                return Err(ModelError::DuplicateLocation(l.id.clone()));
            }
        }
        for e in &m.edges {
            for id in [&e.source, &e.target] {
                if !index.contains_key(id.as_str()) {
                    return Err(ModelError::UnknownLocation(id.clone()));
                }
            }
        }
        Ok(m)
    }

    /// Location ids mapped to their indices.
    pub fn location_indices(&self) -> HashMap<&str, usize> {
        self.locations.iter().enumerate().map(|(i, l)| (l.id.as_str(), i)).collect()
    }

    pub fn location_index(&self, id: &str) -> Option<usize> {
        self.locations.iter().position(|l| l.id == id)
    }

    pub fn location(&self, id: &str) -> Option<&Location> {
        self.locations.iter().find(|l| l.id == id)
    }

    /// Edge indices grouped by source location index.
    pub fn outgoing(&self) -> Vec<Vec<usize>> {
        let index = self.location_indices();
        let mut out = vec![Vec::new(); self.locations.len()];
        for (k, e) in self.edges.iter().enumerate() {
            if let Some(&i) = index.get(e.source.as_str()) {
                out[i].push(k);
            }
        }
        out
    }

    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let mut error = |message: String| out.push(Diagnostic { severity: Severity::Error, message });
        let derivs = self.space.derivatives();
        let mut seen = Vec::new();
        for l in &self.locations {
            if seen.contains(&&l.id) {
                error(format!("duplicate location `{}`", l.id));
            }
            seen.push(&l.id);
            if l.flow.space() != &derivs {
                error(format!("flow of `{}` is not over {:?}", l.id, derivs));
            }
            for (what, p) in [("invariant", &l.invariant), ("initial", &l.initial)] {
                if p.space() != &self.space {
                    error(format!("{what} of `{}` is not over {:?}", l.id, self.space));
                }
            }
        }
        for (k, e) in self.edges.iter().enumerate() {
            for end in [&e.source, &e.target] {
                if self.location_index(end).is_none() {
                    error(format!("edge {k} refers to unknown location `{end}`"));
                }
            }
            if e.guard.space() != &self.space {
                error(format!("guard of edge {k} is not over {:?}", self.space));
            }
            for (var, iv) in e.update.iter() {
                if !self.space.contains(var) {
                    error(format!("edge {k} updates unknown variable `{var}`"));
                }
                if iv.lo > iv.hi {
                    error(format!("edge {k} updates `{var}` into empty interval [{}, {}]", iv.lo, iv.hi));
                }
            }
        }
        let well_typed = out.is_empty();
        if well_typed {
            for l in &self.locations {
                if !l.initial.is_empty() && !l.invariant.includes(&l.initial) {
                    out.push(Diagnostic {
                        severity: Severity::Error,
                        message: format!("initial region of `{}` is not inside its invariant", l.id),
                    });
                }
                if l.flow.is_empty() {
                    out.push(Diagnostic {
                        severity: Severity::Warning,
                        message: format!("flow of `{}` is empty; the location can never be entered", l.id),
                    });
                }
            }
            if self.locations.iter().all(|l| l.initial.is_empty()) {
                out.push(Diagnostic {
                    severity: Severity::Warning,
                    message: "no location has a nonempty initial region".into(),
                });
            }
        }
        out
    }

    pub fn has_errors(&self) -> bool {
        self.validate().iter().any(|d| d.severity == Severity::Error)
    }

    /// Renames locations; ids missing from `names` stay as they are.
    pub fn rename_locations(&mut self, names: &BTreeMap<String, String>) {
        let rename = |id: &mut String| {
            if let Some(n) = names.get(id.as_str()) {
                *id = n.clone();
            }
        };
        for l in &mut self.locations {
            rename(&mut l.id);
        }
        for e in &mut self.edges {
            rename(&mut e.source);
            rename(&mut e.target);
        }
    }

    /// Synchronized product. Location `(i, j)` has index `i * |b| + j` and id `(a.b)`;
    /// each component's edges fire alone while the other component stays put.
    pub fn product(&self, other: &Lha, accept: AcceptFrom) -> Result<Lha, ModelError> {
        let space = self.space.union(&other.space);
        let derivs = space.derivatives();
        let mut locations = Vec::with_capacity(self.locations.len() * other.locations.len());
        for a in &self.locations {
            for b in &other.locations {
                let flow = a.flow.lift_to(&derivs)?.intersect(&b.flow.lift_to(&derivs)?)?;
                let invariant = a.invariant.lift_to(&space)?.intersect(&b.invariant.lift_to(&space)?)?;
                let initial = a.initial.lift_to(&space)?.intersect(&b.initial.lift_to(&space)?)?;
                let accepting = match accept {
                    AcceptFrom::Left => a.accepting,
                    AcceptFrom::Right => b.accepting,
                    AcceptFrom::Both => a.accepting && b.accepting,
                };
                locations.push(Location { id: product_id(&a.id, &b.id), flow, invariant, initial, accepting });
            }
        }
        let mut edges = Vec::new();
        for e in &self.edges {
            let guard = e.guard.lift_to(&space)?;
            for b in &other.locations {
                edges.push(Edge {
                    source: product_id(&e.source, &b.id),
                    target: product_id(&e.target, &b.id),
                    guard: guard.clone(),
                    update: e.update.clone(),
                });
            }
        }
        for e in &other.edges {
            let guard = e.guard.lift_to(&space)?;
            for a in &self.locations {
                edges.push(Edge {
                    source: product_id(&a.id, &e.source),
                    target: product_id(&a.id, &e.target),
                    guard: guard.clone(),
                    update: e.update.clone(),
                });
            }
        }
        Lha::new(space, locations, edges)
    }

    /// The automaton whose accepted words are those with a behavior violating `spec`.
    ///
    /// Every location gets a non-initial accepting copy; copies mirror the original
    /// edges, and each original location jumps to its copy on any violated atom.
    pub fn against_safety(&self, spec: &SafetySpec) -> Result<Lha, ModelError> {
        self.space.check_same(&spec.space)?;
        let guards: Vec<Polyhedron> = spec
            .violation_guards()
            .into_iter()
            .map(|g| Polyhedron::from_constraints(self.space.clone(), &[g]))
            .collect::<Result<_, _>>()?;
        let copy_id = |id: &str| format!("{id}_bad");
        let mut locations: Vec<Location> =
            self.locations.iter().map(|l| Location { accepting: false, ..l.clone() }).collect();
        for l in &self.locations {
            locations.push(Location {
                id: copy_id(&l.id),
                flow: l.flow.clone(),
                invariant: l.invariant.clone(),
                initial: Polyhedron::empty(self.space.clone()),
                accepting: true,
            });
        }
        let mut edges = self.edges.clone();
        for e in &self.edges {
            edges.push(Edge {
                source: copy_id(&e.source),
                target: copy_id(&e.target),
                guard: e.guard.clone(),
                update: e.update.clone(),
            });
        }
        for l in &self.locations {
            for g in &guards {
                edges.push(Edge {
                    source: l.id.clone(),
                    target: copy_id(&l.id),
                    guard: g.clone(),
                    update: IntervalUpdate::identity(),
                });
            }
        }
        Lha::new(self.space.clone(), locations, edges)
    }
}

pub fn product_id(a: &str, b: &str) -> String {
    format!("({a}.{b})")
}

/// A single location with universe flow, invariant and initial region.
pub fn universe_automaton(space: VarSpace) -> Lha {
    let loc = Location {
        id: "u".into(),
        flow: Polyhedron::universe(space.derivatives()),
        invariant: Polyhedron::universe(space.clone()),
        initial: Polyhedron::universe(space.clone()),
        accepting: true,
    };
    Lha { space, locations: vec![loc], edges: Vec::new() }
}
