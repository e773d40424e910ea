use std::fmt;
use std::sync::{Arc, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::cone::{constraints_of, BitSet, Cone, Row};
use super::linalg::{dot, independent_subset, is_zero, normalize, nullspace, Int, Vector};
use super::{GeometryError, IntervalUpdate, LinearConstraint, Relation, VarSpace};
use crate::numeric::Rational;

/// Minimal double description of a nonempty polyhedron.
#[derive(Debug)]
struct Description {
    rows: Vec<Row>,
    rays: Vec<Vector>,
    lines: Vec<Vector>,
}

/// Closed convex polyhedron over a [`VarSpace`].
///
/// Immutable; clones share the lazily computed generator cache.
#[derive(Clone)]
pub struct Polyhedron {
    space: VarSpace,
    rows: Arc<[Row]>,
    cache: Arc<OnceLock<Option<Arc<Description>>>>,
}

/// How long a time elapse may run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ElapseBound {
    Unbounded,
    AtMost(Rational),
    Exactly(Rational),
}

/// Generator representation in rational coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Generators {
    pub points: Vec<Vec<Rational>>,
    pub rays: Vec<Vec<Rational>>,
    pub lines: Vec<Vec<Rational>>,
}

/// Result of optimizing a linear objective.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Optimum {
    Empty,
    Unbounded,
    Finite(Rational),
}

fn lcm_of_denominators<'a>(values: impl Iterator<Item = &'a Rational>) -> BigInt {
    values.fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

fn scaled(value: &Rational, by: &BigInt) -> Int {
    (value.numer() * by) / value.denom()
}

/// Homogenized integer row for `constraint`; `None` for a tautology,
/// `Some(Err(()))` for a contradiction.
fn row_of(constraint: &LinearConstraint) -> Option<Result<Row, ()>> {
    if constraint.coefficients.iter().all(Rational::is_zero) {
        let zero = Rational::zero();
        let holds = match constraint.relation {
            Relation::Le => zero <= constraint.bound,
            Relation::Eq => zero == constraint.bound,
            Relation::Ge => zero >= constraint.bound,
        };
        return if holds { None } else { Some(Err(())) };
    }
    let l = lcm_of_denominators(constraint.coefficients.iter().chain(std::iter::once(&constraint.bound)));
    let b = scaled(&constraint.bound, &l);
    let a: Vec<Int> = constraint.coefficients.iter().map(|c| scaled(c, &l)).collect();
    // a·x ≥ b  ⇔  -b ξ + a·x ≥ 0
    let ge = |a: Vec<Int>, b: Int| {
        let mut v = Vec::with_capacity(a.len() + 1);
        v.push(-b);
        v.extend(a);
        v
    };
    Some(Ok(match constraint.relation {
        Relation::Ge => Row::ineq(ge(a, b)),
        Relation::Le => Row::ineq(ge(a.into_iter().map(|x| -x).collect(), -b)),
        Relation::Eq => Row::eq(ge(a, b)),
    }))
}

fn minimize(cone: Cone) -> Description {
    let Cone { dim, rows, rays, lines, .. } = cone;
    let mut spanning: Vec<Vector> = rays.clone();
    spanning.extend(lines.iter().cloned());
    let mut out: Vec<Row> = nullspace(&spanning, dim).into_iter().map(Row::eq).collect();

    let mut candidates: Vec<(Row, BitSet)> = Vec::new();
    for row in rows.into_iter().filter(|r| !r.eq) {
        let mut s = BitSet::default();
        for (i, r) in rays.iter().enumerate() {
            if dot(&row.coeffs, r).is_zero() {
                s.insert(i);
            }
        }
        if s.count() == rays.len() {
            continue;
        }
        candidates.push((row, s));
    }
    let keep = maximal_sets(&candidates.iter().map(|(_, s)| s.clone()).collect::<Vec<_>>());
    out.extend(candidates.into_iter().zip(keep).filter(|(_, k)| *k).map(|((r, _), _)| r));
    Description { rows: out, rays, lines }
}

/// Marks entries whose set is maximal under inclusion; among equal sets only the first.
fn maximal_sets(sets: &[BitSet]) -> Vec<bool> {
    (0..sets.len())
        .map(|i| {
            !sets.iter().enumerate().any(|(j, other)| {
                j != i && other.is_superset(&sets[i]) && (other != &sets[i] || j < i)
            })
        })
        .collect()
}

impl Polyhedron {
    pub fn universe(space: VarSpace) -> Polyhedron {
        Polyhedron { space, rows: Arc::from(Vec::new()), cache: Arc::new(OnceLock::new()) }
    }

    pub fn empty(space: VarSpace) -> Polyhedron {
        let dim = space.dim() + 1;
        let cache = OnceLock::new();
        let _ = cache.set(None);
        Polyhedron { space, rows: Arc::from(vec![Row::falsum(dim)]), cache: Arc::new(cache) }
    }

    pub fn from_constraints(space: VarSpace, constraints: &[LinearConstraint]) -> Result<Polyhedron, GeometryError> {
        let mut rows = Vec::with_capacity(constraints.len());
        for c in constraints {
            if c.dim() != space.dim() {
                return Err(GeometryError::DimensionMismatch { expected: space.dim(), found: c.dim() });
            }
            match row_of(c) {
                None => {}
                Some(Err(())) => return Ok(Polyhedron::empty(space)),
                Some(Ok(row)) => rows.push(row),
            }
        }
        Ok(Polyhedron::from_rows(space, rows))
    }

    fn from_rows(space: VarSpace, rows: Vec<Row>) -> Polyhedron {
        Polyhedron { space, rows: Arc::from(rows), cache: Arc::new(OnceLock::new()) }
    }

    fn from_description(space: VarSpace, description: Description) -> Polyhedron {
        let rows = Arc::from(description.rows.clone());
        let cache = OnceLock::new();
        let _ = cache.set(Some(Arc::new(description)));
        Polyhedron { space, rows, cache: Arc::new(cache) }
    }

    /// The single point `coords`.
    pub fn point(space: VarSpace, coords: &[Rational]) -> Result<Polyhedron, GeometryError> {
        if coords.len() != space.dim() {
            return Err(GeometryError::DimensionMismatch { expected: space.dim(), found: coords.len() });
        }
        Ok(Polyhedron::from_generators(space, std::slice::from_ref(&coords.to_vec()), &[], &[]))
    }

    /// Convex hull of `points` plus the cone of `rays` plus the span of `lines`.
    pub fn from_generators(
        space: VarSpace,
        points: &[Vec<Rational>],
        rays: &[Vec<Rational>],
        lines: &[Vec<Rational>],
    ) -> Polyhedron {
        let homogenize = |v: &Vec<Rational>, xi: bool| -> Vector {
            let l = lcm_of_denominators(v.iter());
            let mut out = Vec::with_capacity(v.len() + 1);
            out.push(if xi { l.clone() } else { Int::zero() });
            out.extend(v.iter().map(|x| scaled(x, &l)));
            normalize(&mut out);
            out
        };
        let mut cone_rays: Vec<Vector> = points.iter().map(|p| homogenize(p, true)).collect();
        cone_rays.extend(rays.iter().map(|r| homogenize(r, false)));
        let cone_lines: Vec<Vector> = lines.iter().map(|l| homogenize(l, false)).collect();
        Polyhedron::from_cone_generators(space, cone_rays, cone_lines)
    }

    fn from_cone_generators(space: VarSpace, rays: Vec<Vector>, lines: Vec<Vector>) -> Polyhedron {
        let dim = space.dim() + 1;
        if !rays.iter().any(|r| r[0].is_positive()) {
            return Polyhedron::empty(space);
        }
        let lines = independent_subset(&lines, dim);
        let rays: Vec<Vector> = rays.into_iter().filter(|r| !is_zero(r)).collect();
        let (ineqs, eqs) = constraints_of(dim, &rays, &lines);
        let mut rows: Vec<Row> = eqs.into_iter().map(Row::eq).collect();
        let ineq_rows: Vec<Row> = ineqs.into_iter().map(Row::ineq).collect();

        let all: Vec<Vector> = rows.iter().chain(&ineq_rows).map(|r| r.coeffs.clone()).collect();
        let min_lines = nullspace(&all, dim);

        let sats: Vec<BitSet> = rays
            .iter()
            .map(|r| {
                let mut s = BitSet::default();
                for (i, row) in ineq_rows.iter().enumerate() {
                    if dot(&row.coeffs, r).is_zero() {
                        s.insert(i);
                    }
                }
                s
            })
            .collect();
        let keep = maximal_sets(&sats);
        let min_rays: Vec<Vector> = rays
            .into_iter()
            .zip(sats.iter().zip(keep))
            .filter(|(_, (s, k))| *k && s.count() < ineq_rows.len())
            .map(|(r, _)| r)
            .collect();
        rows.extend(ineq_rows);
        Polyhedron::from_description(space, Description { rows, rays: min_rays, lines: min_lines })
    }

    fn description(&self) -> Option<&Arc<Description>> {
        self.cache
            .get_or_init(|| {
                let dim = self.space.dim() + 1;
                let mut cone = Cone::universe(dim);
                cone.add_row(Row::positivity(dim));
                cone.add_rows(self.rows.iter());
                cone.has_point().then(|| Arc::new(minimize(cone)))
            })
            .as_ref()
    }

    fn known_description(&self) -> Option<Option<&Arc<Description>>> {
        self.cache.get().map(Option::as_ref)
    }

    /// Rows best suited for feeding into another computation.
    fn effective_rows(&self) -> &[Row] {
        match self.known_description() {
            Some(Some(d)) => &d.rows,
            _ => &self.rows,
        }
    }

    pub fn space(&self) -> &VarSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn is_empty(&self) -> bool {
        self.description().is_none()
    }

    pub fn is_universe(&self) -> bool {
        match self.description() {
            None => false,
            Some(d) => d.rows.iter().all(|r| r.is_constant()),
        }
    }

    fn check_space(&self, other: &Polyhedron) -> Result<(), GeometryError> {
        self.space.check_same(&other.space)
    }

    pub fn intersect(&self, other: &Polyhedron) -> Result<Polyhedron, GeometryError> {
        self.check_space(other)?;
        Ok(self.intersect_rows(other))
    }

    fn intersect_rows(&self, other: &Polyhedron) -> Polyhedron {
        let (base, extra) = match (self.known_description(), other.known_description()) {
            (Some(None), _) | (_, Some(None)) => return Polyhedron::empty(self.space.clone()),
            (Some(Some(d)), _) => (d, other.effective_rows()),
            (_, Some(Some(d))) => (d, self.effective_rows()),
            (None, None) => {
                let rows: Vec<Row> = self.rows.iter().chain(other.rows.iter()).cloned().collect();
                return Polyhedron::from_rows(self.space.clone(), rows);
            }
        };
        if extra.is_empty() {
            return Polyhedron::from_description(
                self.space.clone(),
                Description { rows: base.rows.clone(), rays: base.rays.clone(), lines: base.lines.clone() },
            );
        }
        let dim = self.space.dim() + 1;
        let mut cone = Cone::from_description(dim, base.rows.clone(), base.rays.clone(), base.lines.clone());
        cone.add_rows(extra.iter());
        if !cone.has_point() {
            return Polyhedron::empty(self.space.clone());
        }
        Polyhedron::from_description(self.space.clone(), minimize(cone))
    }

    pub fn add_constraints(&self, constraints: &[LinearConstraint]) -> Result<Polyhedron, GeometryError> {
        let other = Polyhedron::from_constraints(self.space.clone(), constraints)?;
        self.intersect(&other)
    }

    /// `{ v + s·f | v ∈ self, f ∈ flow, s ≥ 0 }` (closed), optionally with `s` bounded.
    pub fn time_elapse(&self, flow: &Polyhedron, bound: ElapseBound) -> Result<Polyhedron, GeometryError> {
        if flow.dim() != self.dim() {
            return Err(GeometryError::DimensionMismatch { expected: self.dim(), found: flow.dim() });
        }
        if flow.is_empty() {
            return Err(GeometryError::EmptyFlow);
        }
        let (limit, exact) = match bound {
            ElapseBound::Unbounded => return Ok(self.elapse_cone(flow)),
            ElapseBound::AtMost(d) => (d, false),
            ElapseBound::Exactly(d) => (d, true),
        };
        if limit.is_negative() {
            return Err(GeometryError::NegativeBound(limit));
        }
        if limit.is_zero() || self.is_empty() {
            return Ok(self.clone());
        }
        // A fresh rate-1 clock measures the elapsed duration.
        let n = self.dim();
        let clock_name = fresh_name(&self.space, "__elapsed");
        let space = self.space.with(&clock_name).expect("fresh name");
        let flow_space = flow.space.with(&clock_name).expect("fresh name");
        let start = self.embed_with_value(space.clone(), Rational::zero());
        let rate = flow.embed_with_value(flow_space, Rational::one());
        let grown = start.elapse_cone(&rate);
        let relation = if exact { Relation::Eq } else { Relation::Le };
        let mut coefficients = vec![Rational::zero(); n + 1];
        coefficients[n] = Rational::one();
        let cut = grown.add_constraints(&[LinearConstraint::new(coefficients, relation, limit)])?;
        Ok(cut.project_out(&[n]))
    }

    fn elapse_cone(&self, flow: &Polyhedron) -> Polyhedron {
        let (Some(own), Some(f)) = (self.description(), flow.description()) else {
            return if self.is_empty() { self.clone() } else { unreachable!("flow checked nonempty") };
        };
        let mut rays = own.rays.clone();
        let mut lines = own.lines.clone();
        for r in &f.rays {
            let mut dir = r.clone();
            dir[0] = Int::zero();
            if !is_zero(&dir) {
                normalize(&mut dir);
                rays.push(dir);
            }
        }
        for l in &f.lines {
            let mut dir = l.clone();
            dir[0] = Int::zero();
            if !is_zero(&dir) {
                lines.push(dir);
            }
        }
        Polyhedron::from_cone_generators(self.space.clone(), rays, lines)
    }

    /// Appends one dimension (last) fixed to `value`.
    fn embed_with_value(&self, space: VarSpace, value: Rational) -> Polyhedron {
        let Some(d) = self.description() else {
            return Polyhedron::empty(space);
        };
        let extend = |v: &Vector, with: Int| {
            let mut out = v.clone();
            out.push(with);
            out
        };
        let num = value.numer().clone();
        let den = value.denom().clone();
        let rays: Vec<Vector> = d
            .rays
            .iter()
            .map(|r| {
                // (ξ, x) ↦ (den·ξ, den·x, num·ξ)
                let mut out: Vector = r.iter().map(|c| c * &den).collect();
                out.push(&r[0] * &num);
                normalize(&mut out);
                out
            })
            .collect();
        let lines: Vec<Vector> = d.lines.iter().map(|l| extend(l, Int::zero())).collect();
        Polyhedron::from_cone_generators(space, rays, lines)
    }

    /// Existential projection; the result lives in the space without `vars`.
    pub fn eliminate(&self, vars: &[&str]) -> Result<Polyhedron, GeometryError> {
        let mut idx = Vec::with_capacity(vars.len());
        for v in vars {
            idx.push(self.space.require(v)?);
        }
        Ok(self.project_out(&idx))
    }

    fn project_out(&self, idx: &[usize]) -> Polyhedron {
        let names: Vec<&str> = idx.iter().map(|&i| self.space.names()[i].as_str()).collect();
        let space = self.space.without(&names);
        if idx.is_empty() {
            return self.clone();
        }
        let Some(d) = self.description() else {
            return Polyhedron::empty(space);
        };
        let drop = |v: &Vector| -> Vector {
            v.iter().enumerate().filter(|(i, _)| *i == 0 || !idx.contains(&(i - 1))).map(|(_, x)| x.clone()).collect()
        };
        let rays = d.rays.iter().map(drop).collect();
        let lines = d.lines.iter().map(drop).collect();
        Polyhedron::from_cone_generators(space, rays, lines)
    }

    /// Forgets everything known about `vars` while keeping the space.
    pub fn unconstrain(&self, vars: &[&str]) -> Result<Polyhedron, GeometryError> {
        let mut idx = Vec::with_capacity(vars.len());
        for v in vars {
            idx.push(self.space.require(v)?);
        }
        if idx.is_empty() {
            return Ok(self.clone());
        }
        let Some(d) = self.description() else {
            return Ok(self.clone());
        };
        let dim = self.dim() + 1;
        let mut lines = d.lines.clone();
        for i in idx {
            let mut l = vec![Int::zero(); dim];
            l[i + 1] = Int::one();
            lines.push(l);
        }
        Ok(Polyhedron::from_cone_generators(self.space.clone(), d.rays.clone(), lines))
    }

    /// Resets each updated variable into its interval; others are unchanged.
    pub fn apply_update(&self, update: &IntervalUpdate) -> Result<Polyhedron, GeometryError> {
        if update.is_identity() {
            return Ok(self.clone());
        }
        let n = self.dim();
        let mut bounds = Vec::new();
        let mut vars = Vec::new();
        for (var, interval) in update.iter() {
            let i = self.space.require(var)?;
            if interval.lo > interval.hi {
                return Err(GeometryError::InvalidInterval {
                    var: var.clone(),
                    lo: interval.lo.clone(),
                    hi: interval.hi.clone(),
                });
            }
            vars.push(var.as_str());
            if interval.lo == interval.hi {
                bounds.push(LinearConstraint::var_eq(n, i, interval.lo.clone()));
            } else {
                bounds.push(LinearConstraint::var_ge(n, i, interval.lo.clone()));
                bounds.push(LinearConstraint::var_le(n, i, interval.hi.clone()));
            }
        }
        self.unconstrain(&vars)?.add_constraints(&bounds)
    }

    /// `other ⊆ self`.
    pub fn includes(&self, other: &Polyhedron) -> bool {
        if self.space != other.space {
            return false;
        }
        let Some(q) = other.description() else {
            return true;
        };
        if self.known_description().is_some_and(|d| d.is_none()) {
            return false;
        }
        self.effective_rows().iter().all(|row| {
            q.lines.iter().all(|l| dot(&row.coeffs, l).is_zero())
                && q.rays.iter().all(|r| {
                    let p = dot(&row.coeffs, r);
                    if row.eq {
                        p.is_zero()
                    } else {
                        !p.is_negative()
                    }
                })
        })
    }

    /// Semantic equality (mutual inclusion).
    pub fn equals(&self, other: &Polyhedron) -> bool {
        self.includes(other) && other.includes(self)
    }

    /// Smallest closed convex polyhedron containing both.
    pub fn hull(&self, other: &Polyhedron) -> Result<Polyhedron, GeometryError> {
        self.check_space(other)?;
        let (a, b) = match (self.description(), other.description()) {
            (None, _) => return Ok(other.clone()),
            (_, None) => return Ok(self.clone()),
            (Some(a), Some(b)) => (a, b),
        };
        let rays = a.rays.iter().chain(&b.rays).cloned().collect();
        let lines = a.lines.iter().chain(&b.lines).cloned().collect();
        Ok(Polyhedron::from_cone_generators(self.space.clone(), rays, lines))
    }

    /// The hull of `self ∪ other` when that union is itself convex.
    pub fn merge_if_convex(&self, other: &Polyhedron) -> Option<Polyhedron> {
        if self.space != other.space {
            return None;
        }
        if self.includes(other) {
            return Some(self.clone());
        }
        if other.includes(self) {
            return Some(other.clone());
        }
        let hull = self.hull(other).ok()?;
        hull.covered_by_union(&[self.clone(), other.clone()]).then_some(hull)
    }

    /// `self ⊆ ⋃ others`, decided exactly.
    pub fn covered_by_union(&self, others: &[Polyhedron]) -> bool {
        let Some(d) = self.description() else {
            return true;
        };
        if others.iter().any(|q| q.space == self.space && q.includes(self)) {
            return true;
        }
        let Some((first, rest)) = others.split_first() else {
            return false;
        };
        if first.space != self.space || first.is_empty() {
            return self.covered_by_union(rest);
        }
        // self \ first is the union over first's rows c of self ∩ {c < 0};
        // each piece is covered by a closed set iff its closure is.
        let violated_below = |row: &Row| {
            d.rays.iter().any(|r| dot(&row.coeffs, r).is_negative())
                || d.lines.iter().any(|l| !dot(&row.coeffs, l).is_zero())
        };
        for row in first.effective_rows() {
            let negated: Vector = row.coeffs.iter().map(|x| -x).collect();
            let mut pieces = Vec::new();
            if violated_below(row) {
                pieces.push(Row::ineq(negated.clone()));
            }
            if row.eq {
                let flipped = Row { coeffs: negated.clone(), eq: false };
                if violated_below(&flipped) {
                    pieces.push(Row::ineq(row.coeffs.clone()));
                }
            }
            for cut in pieces {
                let piece = self.intersect_rows(&Polyhedron::from_rows(self.space.clone(), vec![cut]));
                if !piece.covered_by_union(rest) {
                    return false;
                }
            }
        }
        true
    }

    pub fn contains(&self, point: &[Rational]) -> bool {
        if point.len() != self.dim() {
            return false;
        }
        let l = lcm_of_denominators(point.iter());
        let mut homog = Vec::with_capacity(point.len() + 1);
        homog.push(l.clone());
        homog.extend(point.iter().map(|x| scaled(x, &l)));
        if self.known_description().is_some_and(|d| d.is_none()) {
            return false;
        }
        self.effective_rows().iter().all(|row| {
            let p = dot(&row.coeffs, &homog);
            if row.eq {
                p.is_zero()
            } else {
                !p.is_negative()
            }
        })
    }

    /// Minimal constraint system; the empty polyhedron yields `0 >= 1`.
    pub fn constraints(&self) -> Vec<LinearConstraint> {
        let n = self.dim();
        let Some(d) = self.description() else {
            return vec![LinearConstraint::new(vec![Rational::zero(); n], Relation::Ge, Rational::one())];
        };
        d.rows
            .iter()
            .filter(|r| !r.is_constant())
            .map(|r| {
                let coefficients: Vec<Rational> = r.coeffs[1..].iter().map(|c| Rational::from(c.clone())).collect();
                let bound = Rational::from(-r.coeffs[0].clone());
                let relation = if r.eq { Relation::Eq } else { Relation::Ge };
                LinearConstraint::new(coefficients, relation, bound)
            })
            .collect()
    }

    pub fn generators(&self) -> Generators {
        let mut out = Generators { points: Vec::new(), rays: Vec::new(), lines: Vec::new() };
        let Some(d) = self.description() else {
            return out;
        };
        let to_q = |v: &[Int]| -> Vec<Rational> { v.iter().map(|x| Rational::from(x.clone())).collect() };
        for r in &d.rays {
            if r[0].is_zero() {
                out.rays.push(to_q(&r[1..]));
            } else {
                out.points.push(
                    r[1..]
                        .iter()
                        .map(|x| Rational::from_big(BigRational::new(x.clone(), r[0].clone())))
                        .collect(),
                );
            }
        }
        out.lines = d.lines.iter().map(|l| to_q(&l[1..])).collect();
        out
    }

    /// Number of generators (points + rays + lines); zero when empty.
    pub fn generator_count(&self) -> usize {
        self.description().map_or(0, |d| d.rays.len() + d.lines.len())
    }

    pub fn maximize(&self, objective: &[Rational]) -> Optimum {
        let Some(d) = self.description() else {
            return Optimum::Empty;
        };
        let l = lcm_of_denominators(objective.iter());
        let mut c: Vector = vec![Int::zero()];
        c.extend(objective.iter().map(|x| scaled(x, &l)));
        if d.lines.iter().any(|line| !dot(&c, line).is_zero()) {
            return Optimum::Unbounded;
        }
        let mut best: Option<BigRational> = None;
        for r in &d.rays {
            let v = dot(&c, r);
            if r[0].is_zero() {
                if v.is_positive() {
                    return Optimum::Unbounded;
                }
            } else {
                let value = BigRational::new(v, &r[0] * &l);
                if best.as_ref().is_none_or(|b| &value > b) {
                    best = Some(value);
                }
            }
        }
        Optimum::Finite(Rational::from_big(best.expect("nonempty polyhedron has a point")))
    }

    pub fn minimize(&self, objective: &[Rational]) -> Optimum {
        let negated: Vec<Rational> = objective.iter().map(|x| -x).collect();
        match self.maximize(&negated) {
            Optimum::Finite(v) => Optimum::Finite(-v),
            other => other,
        }
    }

    /// Re-expresses the polyhedron in a superset space; new variables are unconstrained.
    pub fn lift_to(&self, space: &VarSpace) -> Result<Polyhedron, GeometryError> {
        let mut map = Vec::with_capacity(self.dim());
        for name in self.space.names() {
            map.push(space.require(name)?);
        }
        let dim = space.dim() + 1;
        let remap = |v: &Vector| -> Vector {
            let mut out = vec![Int::zero(); dim];
            out[0] = v[0].clone();
            for (i, &j) in map.iter().enumerate() {
                out[j + 1] = v[i + 1].clone();
            }
            out
        };
        if self.known_description().is_some_and(|d| d.is_none()) {
            return Ok(Polyhedron::empty(space.clone()));
        }
        let rows = self.effective_rows().iter().map(|r| Row { coeffs: remap(&r.coeffs), eq: r.eq }).collect();
        Ok(Polyhedron::from_rows(space.clone(), rows))
    }

    /// Same set, variables renamed positionally.
    pub fn with_space(&self, space: VarSpace) -> Result<Polyhedron, GeometryError> {
        if space.dim() != self.dim() {
            return Err(GeometryError::DimensionMismatch { expected: self.dim(), found: space.dim() });
        }
        Ok(Polyhedron { space, rows: self.rows.clone(), cache: self.cache.clone() })
    }

    pub fn display(&self) -> String {
        if self.is_empty() {
            return "false".to_string();
        }
        let cs = self.constraints();
        if cs.is_empty() {
            return "true".to_string();
        }
        cs.iter().map(|c| c.normalized().display(&self.space).to_string()).collect::<Vec<_>>().join(" & ")
    }
}

fn fresh_name(space: &VarSpace, base: &str) -> String {
    let mut name = base.to_string();
    let mut k = 0;
    while space.contains(&name) {
        k += 1;
        name = format!("{base}{k}");
    }
    name
}

impl fmt::Debug for Polyhedron {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.display())
    }
}

impl PartialEq for Polyhedron {
    fn eq(&self, other: &Self) -> bool {
        self.equals(other)
    }
}
