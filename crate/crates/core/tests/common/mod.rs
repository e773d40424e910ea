//! Shared oracles and generators for the integration tests.
#![allow(dead_code)]

use hamon::geometry::{LinearConstraint, Polyhedron, Relation, VarSpace};
use hamon::numeric::Rational;
use proptest::prelude::*;

pub fn q(n: i64) -> Rational {
    Rational::from(n)
}

pub fn qr(n: i64, d: i64) -> Rational {
    Rational::new(n, d).unwrap()
}

pub fn space(dim: usize) -> VarSpace {
    VarSpace::new((1..=dim).map(|i| format!("x{i}"))).unwrap()
}

pub fn c(coefs: &[i64], rel: Relation, bound: i64) -> LinearConstraint {
    LinearConstraint::new(coefs.iter().map(|&x| q(x)).collect(), rel, q(bound))
}

pub fn satisfies_all(cs: &[LinearConstraint], p: &[Rational]) -> bool {
    cs.iter().all(|c| c.is_satisfied_by(p))
}

/// Decides `∃ t: a_k·t rel_k b_k for all k` by interval reasoning.
pub fn exists_scalar(atoms: &[(Rational, Relation, Rational)]) -> bool {
    let mut lo: Option<Rational> = None;
    let mut hi: Option<Rational> = None;
    for (a, rel, b) in atoms {
        if a.is_zero() {
            let zero = Rational::zero();
            let ok = match rel {
                Relation::Le => zero <= *b,
                Relation::Ge => zero >= *b,
                Relation::Eq => zero == *b,
            };
            if !ok {
                return false;
            }
            continue;
        }
        let v = b / a;
        // a t ≤ b  ⇔  t ≤ b/a when a > 0, t ≥ b/a when a < 0
        let (upper, lower) = match (rel, a.is_positive()) {
            (Relation::Eq, _) => (true, true),
            (Relation::Le, true) | (Relation::Ge, false) => (true, false),
            _ => (false, true),
        };
        if upper {
            hi = Some(hi.map_or(v.clone(), |h| h.min(v.clone())));
        }
        if lower {
            lo = Some(lo.map_or(v.clone(), |l| l.max(v)));
        }
    }
    match (lo, hi) {
        (Some(l), Some(h)) => l <= h,
        _ => true,
    }
}

/// Random constraint set: a bounding box plus a few random cuts.
pub fn constraint_system(dim: usize) -> impl Strategy<Value = Vec<LinearConstraint>> {
    let bounds = proptest::collection::vec((-5i64..=0, 0i64..=5), dim);
    let cuts = proptest::collection::vec(
        (proptest::collection::vec(-3i64..=3, dim), 0usize..3, -6i64..=6),
        0..=3,
    );
    (bounds, cuts).prop_map(move |(bounds, cuts)| {
        let mut out = Vec::new();
        for (i, (lo, hi)) in bounds.into_iter().enumerate() {
            let mut e = vec![0; dim];
            e[i] = 1;
            out.push(c(&e, Relation::Ge, lo));
            out.push(c(&e, Relation::Le, hi));
        }
        for (coefs, rel, b) in cuts {
            let rel = [Relation::Le, Relation::Ge, Relation::Eq][rel];
            out.push(c(&coefs, rel, b));
        }
        out
    })
}

/// Random rational point with small denominators in `[-6, 6]^dim`.
pub fn point(dim: usize) -> impl Strategy<Value = Vec<Rational>> {
    proptest::collection::vec(-12i64..=12, dim).prop_map(|v| v.into_iter().map(|n| qr(n, 2)).collect())
}

pub fn points(dim: usize, n: usize) -> impl Strategy<Value = Vec<Vec<Rational>>> {
    proptest::collection::vec(point(dim), n)
}

/// Flow box `[lo_i, hi_i]` per dimension with small rational bounds.
pub fn flow_box(dim: usize) -> impl Strategy<Value = Vec<(Rational, Rational)>> {
    proptest::collection::vec((-6i64..=6, 0i64..=6), dim)
        .prop_map(|v| v.into_iter().map(|(lo, w)| (qr(lo, 2), qr(lo + w, 2))).collect())
}

pub fn box_polyhedron(space: &VarSpace, bounds: &[(Rational, Rational)]) -> Polyhedron {
    let n = space.dim();
    let mut cs = Vec::new();
    for (i, (lo, hi)) in bounds.iter().enumerate() {
        cs.push(LinearConstraint::var_ge(n, i, lo.clone()));
        cs.push(LinearConstraint::var_le(n, i, hi.clone()));
    }
    Polyhedron::from_constraints(space.clone(), &cs).unwrap()
}

/// `y` reachable from `p` along some constant `f ∈ box` for a duration in `[0, d]`.
pub fn reachable_in_box(p: &[Rational], y: &[Rational], bounds: &[(Rational, Rational)], d: Option<&Rational>) -> bool {
    let mut atoms = vec![(Rational::one(), Relation::Ge, Rational::zero())];
    if let Some(d) = d {
        atoms.push((Rational::one(), Relation::Le, d.clone()));
    }
    for ((pi, yi), (lo, hi)) in p.iter().zip(y).zip(bounds) {
        let delta = yi - pi;
        atoms.push((lo.clone(), Relation::Le, delta.clone()));
        atoms.push((hi.clone(), Relation::Ge, delta));
    }
    exists_scalar(&atoms)
}

/// `(y, z)` feasible for some `z` in the last coordinate.
pub fn exists_last(cs: &[LinearConstraint], y: &[Rational]) -> bool {
    let n = y.len();
    let atoms: Vec<_> = cs
        .iter()
        .map(|c| {
            let rest: Rational = c.coefficients[..n].iter().zip(y).map(|(a, x)| a * x).sum();
            (c.coefficients[n].clone(), c.relation, &c.bound - &rest)
        })
        .collect();
    exists_scalar(&atoms)
}

/// Integer box `[lo, hi]` in two dimensions.
pub fn int_box() -> impl Strategy<Value = [(i64, i64); 2]> {
    ((-3i64..=3, 0i64..=3), (-3i64..=3, 0i64..=3)).prop_map(|((a, w), (b, v))| [(a, a + w), (b, b + v)])
}

/// The union of two closed boxes is convex iff one contains the other, or they agree on
/// one axis and their extents touch or overlap on the other.
pub fn boxes_union_convex(a: &[(i64, i64); 2], b: &[(i64, i64); 2]) -> bool {
    let contains = |x: &[(i64, i64); 2], y: &[(i64, i64); 2]| (0..2).all(|i| x[i].0 <= y[i].0 && y[i].1 <= x[i].1);
    if contains(a, b) || contains(b, a) {
        return true;
    }
    (0..2).any(|i| {
        let j = 1 - i;
        a[i] == b[i] && a[j].0.max(b[j].0) <= a[j].1.min(b[j].1)
    })
}

pub fn box_of(space: &VarSpace, b: &[(i64, i64); 2]) -> Polyhedron {
    box_polyhedron(space, &[(q(b[0].0), q(b[0].1)), (q(b[1].0), q(b[1].1))])
}

/// Random word over `x1..x{dim}`: nondecreasing times, values with small denominators.
pub fn word(dim: usize, max_len: usize) -> impl Strategy<Value = hamon::log::TimedWord> {
    let sample = (0i64..=40, 1i64..=8, proptest::collection::vec((-400i64..=400, 1i64..=16), dim));
    proptest::collection::vec(sample, 0..=max_len).prop_map(move |rows| {
        let mut t = Rational::zero();
        let samples = rows
            .into_iter()
            .map(|(gap, den, values)| {
                t = &t + &qr(gap, den);
                hamon::log::Sample::new(t.clone(), values.into_iter().map(|(n, d)| qr(n, d)).collect())
            })
            .collect();
        hamon::log::TimedWord::new(space(dim), samples).unwrap()
    })
}

/// Small random automaton over `x1..x{dim}`: flow boxes, optional box invariants,
/// half-plane guards, occasional resets, random accepting flags.
pub fn tiny_model(max_locations: usize, dim: usize) -> impl Strategy<Value = hamon::model::Lha> {
    let location = (flow_box(dim), proptest::option::of(-2i64..=8), any::<bool>());
    let edge = (
        0..max_locations,
        0..max_locations,
        proptest::collection::vec(-2i64..=2, dim),
        -4i64..=8,
        proptest::option::of((0..dim, -2i64..=2, 0i64..=2)),
    );
    (
        proptest::collection::vec(location, 1..=max_locations),
        proptest::collection::vec(edge, 0..=2 * max_locations),
        proptest::collection::vec(-2i64..=2, dim),
    )
        .prop_map(move |(locs, edges, init)| {
            use hamon::geometry::IntervalUpdate;
            use hamon::model::{Edge, Lha, Location};
            let sp = space(dim);
            let n = locs.len();
            let locations = locs
                .into_iter()
                .enumerate()
                .map(|(i, (flow, bound, accepting))| {
                    let invariant = match bound {
                        Some(b) => box_polyhedron(&sp, &vec![(q(-b - 4), q(b + 4)); dim]),
                        None => Polyhedron::universe(sp.clone()),
                    };
                    let initial = if i == 0 {
                        Polyhedron::point(sp.clone(), &init.iter().map(|&v| q(v)).collect::<Vec<_>>()).unwrap()
                    } else {
                        Polyhedron::empty(sp.clone())
                    };
                    Location {
                        id: format!("s{i}"),
                        flow: box_polyhedron(&sp.derivatives(), &flow),
                        invariant,
                        initial,
                        accepting,
                    }
                })
                .collect();
            let edges = edges
                .into_iter()
                .map(|(a, b, coefs, bound, reset)| Edge {
                    source: format!("s{}", a % n),
                    target: format!("s{}", b % n),
                    guard: Polyhedron::from_constraints(sp.clone(), &[c(&coefs, Relation::Le, bound)]).unwrap(),
                    update: match reset {
                        Some((v, lo, w)) => IntervalUpdate::reset(&format!("x{}", v + 1), q(lo), q(lo + w)),
                        None => IntervalUpdate::identity(),
                    },
                })
                .collect();
            Lha::new(sp, locations, edges).unwrap()
        })
}
