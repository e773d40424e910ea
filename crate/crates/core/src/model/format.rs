//! JSON model and specification files.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::geometry::{Interval, IntervalUpdate, Polyhedron, VarSpace};
use crate::numeric::Rational;

use super::{parse_polyhedron, Edge, Lha, Location, ModelError, SafetySpec};

#[derive(Serialize, Deserialize)]
struct ModelFile {
    variables: Vec<String>,
    locations: Vec<LocationFile>,
    #[serde(default)]
    edges: Vec<EdgeFile>,
}

#[derive(Serialize, Deserialize)]
struct LocationFile {
    id: String,
    #[serde(default)]
    flow: Vec<String>,
    #[serde(default)]
    invariant: Vec<String>,
    #[serde(default = "no_initial")]
    initial: Initial,
    #[serde(default)]
    accepting: bool,
}

/// `"false"` / `false` for no initial states, otherwise a constraint list.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Initial {
    Flag(bool),
    Word(String),
    List(Vec<String>),
}

fn no_initial() -> Initial {
    Initial::Word("false".into())
}

#[derive(Serialize, Deserialize)]
struct EdgeFile {
    from: String,
    to: String,
    #[serde(default)]
    guard: Vec<String>,
    #[serde(default)]
    update: BTreeMap<String, [Rational; 2]>,
}

#[derive(Serialize, Deserialize)]
struct SpecFile {
    atoms: Vec<String>,
}

fn json_err(e: serde_json::Error) -> ModelError {
    ModelError::Format(e.to_string())
}

pub fn model_from_json(text: &str) -> Result<Lha, ModelError> {
    let file: ModelFile = serde_json::from_str(text).map_err(json_err)?;
    let space = VarSpace::new(file.variables)?;
    let derivs = space.derivatives();
    let mut locations = Vec::with_capacity(file.locations.len());
    for l in file.locations {
        let initial = match l.initial {
            Initial::Flag(true) => Polyhedron::universe(space.clone()),
            Initial::Flag(false) => Polyhedron::empty(space.clone()),
            Initial::Word(w) => parse_polyhedron(&[w], &space)?,
            Initial::List(cs) => parse_polyhedron(&cs, &space)?,
        };
        locations.push(Location {
            id: l.id,
            flow: parse_polyhedron(&l.flow, &derivs)?,
            invariant: parse_polyhedron(&l.invariant, &space)?,
            initial,
            accepting: l.accepting,
        });
    }
    let mut edges = Vec::with_capacity(file.edges.len());
    for e in file.edges {
        let mut update = BTreeMap::new();
        for (var, [lo, hi]) in e.update {
            update.insert(var, Interval::new(lo, hi));
        }
        edges.push(Edge {
            source: e.from,
            target: e.to,
            guard: parse_polyhedron(&e.guard, &space)?,
            update: IntervalUpdate(update),
        });
    }
    Lha::new(space, locations, edges)
}

fn constraint_strings(p: &Polyhedron) -> Vec<String> {
    if p.is_empty() {
        return vec!["false".into()];
    }
    p.constraints().iter().map(|c| c.display(p.space()).to_string()).collect()
}

/// Serializes a model; re-reading it yields semantically equal polyhedra.
pub fn model_to_json(m: &Lha) -> String {
    let file = ModelFile {
        variables: m.space.names().to_vec(),
        locations: m
            .locations
            .iter()
            .map(|l| LocationFile {
                id: l.id.clone(),
                flow: constraint_strings(&l.flow),
                invariant: constraint_strings(&l.invariant),
                initial: if l.initial.is_empty() {
                    Initial::Flag(false)
                } else {
                    Initial::List(constraint_strings(&l.initial))
                },
                accepting: l.accepting,
            })
            .collect(),
        edges: m
            .edges
            .iter()
            .map(|e| EdgeFile {
                from: e.source.clone(),
                to: e.target.clone(),
                guard: constraint_strings(&e.guard),
                update: e.update.iter().map(|(v, iv)| (v.clone(), [iv.lo.clone(), iv.hi.clone()])).collect(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("model serializes")
}

pub fn spec_from_json(text: &str, space: &VarSpace) -> Result<SafetySpec, ModelError> {
    let file: SpecFile = serde_json::from_str(text).map_err(json_err)?;
    SafetySpec::parse(space.clone(), &file.atoms)
}

pub fn spec_to_json(spec: &SafetySpec) -> String {
    let file = SpecFile { atoms: spec.atoms.iter().map(|a| a.display(&spec.space).to_string()).collect() };
    serde_json::to_string_pretty(&file).expect("spec serializes")
}
