//! Bounded-duration symbolic reachability shared by both membership methods.

use std::collections::VecDeque;

use crate::geometry::{GeometryError, LinearConstraint, Polyhedron, Relation, VarSpace};
use crate::model::Lha;
use crate::numeric::Rational;

/// Name of the interval clock added to the model's variables.
pub const DELTA: &str = "__delta";

/// A model prepared for reachability over `X ∪ {δ}`.
#[derive(Debug, Clone)]
pub(crate) struct Engine {
    pub model: Lha,
    pub ext: VarSpace,
    /// Flow with `δ' = 1`; `None` when the location admits no rate at all.
    flows: Vec<Option<Polyhedron>>,
    /// Invariant with `δ ≥ 0`.
    pub invariants: Vec<Polyhedron>,
    guards: Vec<Polyhedron>,
    pub targets: Vec<usize>,
    pub outgoing: Vec<Vec<usize>>,
}

/// A queued entry: location, entry region, parent and root as in [`Node`].
type Pending = (usize, Polyhedron, Option<(usize, usize)>, Option<usize>);

#[derive(Debug, Clone)]
pub(crate) struct Node {
    pub location: usize,
    /// Everything reachable at this location from the entry region, with `δ ≤ d`.
    pub region: Polyhedron,
    /// Predecessor node and the edge taken from it.
    pub parent: Option<(usize, usize)>,
    /// Index into the start list for root nodes.
    pub root: Option<usize>,
}

#[derive(Debug, Clone)]
pub(crate) struct Reach {
    pub nodes: Vec<Node>,
    pub saturated: bool,
}

impl Engine {
    pub fn new(model: &Lha) -> Result<Engine, GeometryError> {
        if model.space.contains(DELTA) {
            return Err(GeometryError::DuplicateVariable(DELTA.to_string()));
        }
        let ext = model.space.with(DELTA)?;
        let n = ext.dim();
        let delta = n - 1;
        let ext_derivs = ext.derivatives();
        let rate_one = LinearConstraint::var_eq(n, delta, Rational::one());
        let nonneg = LinearConstraint::var_ge(n, delta, Rational::zero());
        let mut flows = Vec::with_capacity(model.locations.len());
        let mut invariants = Vec::with_capacity(model.locations.len());
        for l in &model.locations {
            flows.push(if l.flow.is_empty() {
                None
            } else {
                Some(l.flow.lift_to(&ext_derivs)?.add_constraints(std::slice::from_ref(&rate_one))?)
            });
            invariants.push(l.invariant.lift_to(&ext)?.add_constraints(std::slice::from_ref(&nonneg))?);
        }
        let index = model.location_indices();
        let mut guards = Vec::with_capacity(model.edges.len());
        let mut targets = Vec::with_capacity(model.edges.len());
        for e in &model.edges {
            guards.push(e.guard.lift_to(&ext)?);
            targets.push(index[e.target.as_str()]);
        }
        Ok(Engine { model: model.clone(), ext, flows, invariants, guards, targets, outgoing: model.outgoing() })
    }

    pub fn delta_bound(&self, relation: Relation, d: &Rational) -> LinearConstraint {
        let n = self.ext.dim();
        let mut coefficients = vec![Rational::zero(); n];
        coefficients[n - 1] = Rational::one();
        LinearConstraint::new(coefficients, relation, d.clone())
    }

    /// `(ω, δ)` as a point of the extended space.
    pub fn ext_point(&self, values: &[Rational], delta: Rational) -> Vec<Rational> {
        let mut p = values.to_vec();
        p.push(delta);
        p
    }

    /// Continuous closure of an entry region at `loc`, cut at `δ ≤ d`.
    pub fn elapse(&self, loc: usize, entry: &Polyhedron, cut: &LinearConstraint) -> Polyhedron {
        let grown = match &self.flows[loc] {
            Some(f) => entry.time_elapse(f, crate::geometry::ElapseBound::Unbounded).expect("spaces match"),
            None => entry.clone(),
        };
        grown
            .intersect(&self.invariants[loc])
            .and_then(|p| p.add_constraints(std::slice::from_ref(cut)))
            .expect("spaces match")
    }

    /// Entry region at the target of `edge` from `region`, if nonempty.
    pub fn jump(&self, edge: usize, region: &Polyhedron) -> Option<Polyhedron> {
        let enabled = region.intersect(&self.guards[edge]).expect("spaces match");
        if enabled.is_empty() {
            return None;
        }
        let moved = enabled.apply_update(&self.model.edges[edge].update).expect("validated update");
        let entry = moved.intersect(&self.invariants[self.targets[edge]]).expect("spaces match");
        (!entry.is_empty()).then_some(entry)
    }

    /// Breadth-first exploration from `starts` for at most `cap` discrete steps.
    pub fn reach(&self, starts: &[(usize, Polyhedron)], d: &Rational, cap: usize) -> Reach {
        let cut = self.delta_bound(Relation::Le, d);
        let mut nodes: Vec<Node> = Vec::new();
        let mut by_location: Vec<Vec<usize>> = vec![Vec::new(); self.model.locations.len()];
        let mut queue: VecDeque<Pending> = VecDeque::new();
        for (k, (loc, region)) in starts.iter().enumerate() {
            let entry = region.intersect(&self.invariants[*loc]).expect("spaces match");
            if !entry.is_empty() {
                queue.push_back((*loc, entry, None, Some(k)));
            }
        }
        let mut steps = 0;
        let mut saturated = false;
        while let Some((loc, entry, parent, root)) = queue.pop_front() {
            if by_location[loc].iter().any(|&n| nodes[n].region.includes(&entry)) {
                continue;
            }
            if parent.is_some() {
                if steps == cap {
                    saturated = true;
                    break;
                }
                steps += 1;
            }
            let region = self.elapse(loc, &entry, &cut);
            let id = nodes.len();
            nodes.push(Node { location: loc, region, parent, root });
            by_location[loc].push(id);
            for &e in &self.outgoing[loc] {
                if let Some(next) = self.jump(e, &nodes[id].region) {
                    queue.push_back((self.targets[e], next, Some((id, e)), None));
                }
            }
        }
        Reach { nodes, saturated }
    }
}

impl Reach {
    /// Nodes at `loc` whose region contains the extended point.
    pub fn containing<'a>(&'a self, point: &'a [Rational]) -> impl Iterator<Item = usize> + 'a {
        self.nodes.iter().enumerate().filter(move |(_, n)| n.region.contains(point)).map(|(i, _)| i)
    }

    /// Chain of node ids from a root down to `id`.
    pub fn chain(&self, id: usize) -> Vec<usize> {
        let mut out = vec![id];
        let mut cur = id;
        while let Some((p, _)) = self.nodes[cur].parent {
            out.push(p);
            cur = p;
        }
        out.reverse();
        out
    }

    pub fn root_of(&self, id: usize) -> usize {
        let first = self.chain(id)[0];
        self.nodes[first].root.expect("chains start at a root")
    }
}
