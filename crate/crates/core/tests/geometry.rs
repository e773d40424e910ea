mod common;

use common::*;
use hamon::geometry::{ElapseBound, IntervalUpdate, LinearConstraint, Optimum, Polyhedron, Relation, VarSpace};
use proptest::prelude::*;

fn poly(space: &VarSpace, cs: &[LinearConstraint]) -> Polyhedron {
    Polyhedron::from_constraints(space.clone(), cs).unwrap()
}

fn derivs(dim: usize) -> VarSpace {
    space(dim).derivatives()
}

#[test]
fn empty_constraint_list_is_universe() {
    let s = space(2);
    let p = poly(&s, &[]);
    assert!(p.is_universe());
    assert!(p.contains(&[q(-1000), q(7)]));
}

#[test]
fn point_from_equalities() {
    let s = space(2);
    let p = poly(&s, &[c(&[1, 0], Relation::Eq, 40), c(&[0, 1], Relation::Eq, 35)]);
    let g = p.generators();
    assert_eq!(g.points, vec![vec![q(40), q(35)]]);
    assert!(g.rays.is_empty() && g.lines.is_empty());
    assert!(!p.is_empty());
}

#[test]
fn contradiction_is_empty() {
    let s = space(1);
    let p = poly(&s, &[c(&[1], Relation::Ge, 1), c(&[1], Relation::Le, 0)]);
    assert!(p.is_empty());
    assert!(!p.contains(&[q(0)]));
}

#[test]
fn dimension_mismatch_is_rejected() {
    let s = space(2);
    assert!(Polyhedron::from_constraints(s, &[c(&[1], Relation::Ge, 0)]).is_err());
}

#[test]
fn intersection_examples() {
    let s = space(2);
    let square = box_polyhedron(&s, &[(q(115), q(125)), (q(115), q(125))]);
    let pt = Polyhedron::point(s.clone(), &[q(123), q(117)]).unwrap();
    assert!(square.intersect(&Polyhedron::universe(s.clone())).unwrap().equals(&square));
    assert!(square.intersect(&pt).unwrap().equals(&pt));
    assert!(square.intersect(&Polyhedron::empty(s.clone())).unwrap().is_empty());
}

#[test]
fn elapse_examples() {
    let s = space(2);
    let start = Polyhedron::point(s.clone(), &[q(40), q(35)]).unwrap();
    let zero = Polyhedron::point(derivs(2), &[q(0), q(0)]).unwrap();
    assert!(start.time_elapse(&zero, ElapseBound::Unbounded).unwrap().equals(&start));

    let flow = box_polyhedron(&derivs(2), &[(qr(15, 2), qr(17, 2)), (q(8), q(9))]);
    let after = start.time_elapse(&flow, ElapseBound::Exactly(q(10))).unwrap();
    let expected = box_polyhedron(&s, &[(q(115), q(125)), (q(115), q(125))]);
    assert!(after.equals(&expected), "{after:?}");

    let origin = Polyhedron::point(s.clone(), &[q(0), q(0)]).unwrap();
    let line = Polyhedron::point(derivs(2), &[q(1), q(2)]).unwrap();
    let ray = origin.time_elapse(&line, ElapseBound::Unbounded).unwrap();
    let expected = poly(&s, &[c(&[-2, 1], Relation::Eq, 0), c(&[1, 0], Relation::Ge, 0)]);
    assert!(ray.equals(&expected), "{ray:?}");
}

#[test]
fn elapse_rejects_empty_flow_and_negative_bounds() {
    let s = space(1);
    let p = Polyhedron::point(s.clone(), &[q(0)]).unwrap();
    assert!(p.time_elapse(&Polyhedron::empty(derivs(1)), ElapseBound::Unbounded).is_err());
    let f = Polyhedron::point(derivs(1), &[q(1)]).unwrap();
    assert!(p.time_elapse(&f, ElapseBound::AtMost(q(-1))).is_err());
    assert!(p.time_elapse(&f, ElapseBound::Exactly(q(0))).unwrap().equals(&p));
}

#[test]
fn elapse_at_most_keeps_start() {
    let s = space(1);
    let p = Polyhedron::point(s.clone(), &[q(0)]).unwrap();
    let f = box_polyhedron(&derivs(1), &[(q(1), q(2))]);
    let r = p.time_elapse(&f, ElapseBound::AtMost(q(3))).unwrap();
    assert!(r.equals(&box_polyhedron(&s, &[(q(0), q(6))])));
}

#[test]
fn elapse_with_unbounded_flow() {
    let s = space(2);
    let p = Polyhedron::point(s.clone(), &[q(0), q(0)]).unwrap();
    // x1' = 1, x2' >= 0
    let f = poly(&derivs(2), &[c(&[1, 0], Relation::Eq, 1), c(&[0, 1], Relation::Ge, 0)]);
    let r = p.time_elapse(&f, ElapseBound::Exactly(q(2))).unwrap();
    let expected = poly(&s, &[c(&[1, 0], Relation::Eq, 2), c(&[0, 1], Relation::Ge, 0)]);
    assert!(r.equals(&expected), "{r:?}");
}

#[test]
fn eliminate_examples() {
    let s = space(2);
    let p = Polyhedron::point(s.clone(), &[q(3), q(5)]).unwrap();
    let e = p.eliminate(&["x2"]).unwrap();
    assert_eq!(e.space().names(), &["x1".to_string()]);
    assert!(e.equals(&Polyhedron::point(space(1), &[q(3)]).unwrap()));

    let seg = poly(&s, &[c(&[-2, 1], Relation::Eq, 0), c(&[1, 0], Relation::Ge, 0), c(&[1, 0], Relation::Le, 1)]);
    let e = seg.eliminate(&["x1"]).unwrap();
    let x2 = VarSpace::new(["x2"]).unwrap();
    assert!(e.equals(&box_polyhedron(&x2, &[(q(0), q(2))])));
    assert!(seg.eliminate(&[]).unwrap().equals(&seg));
    assert!(seg.eliminate(&["nope"]).is_err());
}

#[test]
fn update_examples() {
    let s = space(2);
    let p = Polyhedron::point(s.clone(), &[q(5), q(7)]).unwrap();
    assert!(p.apply_update(&IntervalUpdate::identity()).unwrap().equals(&p));
    let reset = p.apply_update(&IntervalUpdate::reset("x1", q(0), q(0))).unwrap();
    assert!(reset.equals(&Polyhedron::point(s.clone(), &[q(0), q(7)]).unwrap()));

    let one = space(1);
    let p = Polyhedron::point(one.clone(), &[q(5)]).unwrap();
    let r = p.apply_update(&IntervalUpdate::reset("x1", q(1), q(2))).unwrap();
    assert!(r.equals(&box_polyhedron(&one, &[(q(1), q(2))])));
    assert!(p.apply_update(&IntervalUpdate::reset("x1", q(2), q(1))).is_err());
}

#[test]
fn inclusion_examples() {
    let one = space(1);
    let band = box_polyhedron(&one, &[(q(115), q(125))]);
    let pt = Polyhedron::point(one.clone(), &[q(123)]).unwrap();
    assert!(Polyhedron::universe(one.clone()).includes(&band));
    assert!(band.includes(&pt));
    assert!(!pt.includes(&band));
    assert!(band.includes(&Polyhedron::empty(one.clone())));
    assert!(!Polyhedron::empty(one).includes(&pt));
}

#[test]
fn equality_is_semantic() {
    let one = space(1);
    let a = poly(&one, &[c(&[1], Relation::Le, 1), c(&[1], Relation::Ge, 1)]);
    let b = poly(&one, &[c(&[1], Relation::Eq, 1)]);
    assert!(a.equals(&a));
    assert!(a.equals(&b));
    assert_eq!(a, b);
}

#[test]
fn merge_examples() {
    let one = space(1);
    let iv = |lo, hi| box_polyhedron(&one, &[(q(lo), q(hi))]);
    assert!(iv(0, 1).merge_if_convex(&iv(1, 2)).unwrap().equals(&iv(0, 2)));
    assert!(iv(0, 1).merge_if_convex(&iv(2, 3)).is_none());
    assert!(iv(0, 1).merge_if_convex(&iv(0, 3)).unwrap().equals(&iv(0, 3)));
}

#[test]
fn merge_rejects_l_shape() {
    let s = space(2);
    let a = box_of(&s, &[(0, 2), (0, 1)]);
    let b = box_of(&s, &[(0, 1), (0, 2)]);
    assert!(a.merge_if_convex(&b).is_none());
    assert!(!a.hull(&b).unwrap().covered_by_union(&[a.clone(), b.clone()]));
}

#[test]
fn covered_by_three_pieces() {
    let s = space(2);
    let whole = box_of(&s, &[(0, 3), (0, 1)]);
    let parts = [box_of(&s, &[(0, 1), (0, 1)]), box_of(&s, &[(2, 3), (0, 1)]), box_of(&s, &[(1, 2), (0, 1)])];
    assert!(whole.covered_by_union(&parts));
    assert!(!whole.covered_by_union(&parts[..2]));
}

#[test]
fn maximize_and_minimize() {
    let s = space(2);
    let b = box_of(&s, &[(0, 2), (-1, 3)]);
    assert_eq!(b.maximize(&[q(1), q(1)]), Optimum::Finite(q(5)));
    assert_eq!(b.minimize(&[q(1), q(-1)]), Optimum::Finite(q(-3)));
    let half = poly(&s, &[c(&[1, 0], Relation::Ge, 0)]);
    assert_eq!(half.maximize(&[q(1), q(0)]), Optimum::Unbounded);
    assert_eq!(half.maximize(&[q(0), q(1)]), Optimum::Unbounded);
    assert_eq!(half.minimize(&[q(1), q(0)]), Optimum::Finite(q(0)));
    assert_eq!(Polyhedron::empty(s).maximize(&[q(1), q(0)]), Optimum::Empty);
}

#[test]
fn lifting_adds_free_dimensions() {
    let s = space(1);
    let big = VarSpace::new(["y", "x1"]).unwrap();
    let p = box_polyhedron(&s, &[(q(0), q(1))]);
    let l = p.lift_to(&big).unwrap();
    assert!(l.contains(&[q(100), qr(1, 2)]));
    assert!(!l.contains(&[q(0), q(2)]));
}

#[test]
fn display_lists_constraints() {
    let s = space(2);
    let p = poly(&s, &[c(&[1, -3], Relation::Le, 4)]);
    assert_eq!(p.display(), "x1 - 3*x2 <= 4");
    assert_eq!(Polyhedron::empty(s.clone()).display(), "false");
    assert_eq!(Polyhedron::universe(s).display(), "true");
}

#[test]
fn redundant_constraints_are_removed() {
    let s = space(1);
    let p = poly(&s, &[c(&[1], Relation::Le, 3), c(&[1], Relation::Le, 5), c(&[2], Relation::Le, 6)]);
    assert_eq!(p.constraints().len(), 1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dd_round_trip(cs in constraint_system(3), probes in points(3, 40)) {
        let s = space(3);
        let p = poly(&s, &cs);
        let g = p.generators();
        let back = Polyhedron::from_generators(s.clone(), &g.points, &g.rays, &g.lines);
        prop_assert!(p.equals(&back));
        let minimal = Polyhedron::from_constraints(s.clone(), &p.constraints()).unwrap();
        for y in &probes {
            let expected = satisfies_all(&cs, y);
            prop_assert_eq!(back.contains(y), expected);
            prop_assert_eq!(minimal.contains(y), expected);
        }
    }

    #[test]
    fn elapse_matches_scalar_oracle(p in point(2), fb in flow_box(2), d in 0i64..=4, probes in points(2, 40)) {
        let s = space(2);
        let start = Polyhedron::point(s.clone(), &p).unwrap();
        let flow = box_polyhedron(&derivs(2), &fb);
        let d = qr(d, 2);
        let bounded = start.time_elapse(&flow, ElapseBound::AtMost(d.clone())).unwrap();
        let unbounded = start.time_elapse(&flow, ElapseBound::Unbounded).unwrap();
        for y in &probes {
            prop_assert_eq!(bounded.contains(y), reachable_in_box(&p, y, &fb, Some(&d)));
            prop_assert_eq!(unbounded.contains(y), reachable_in_box(&p, y, &fb, None));
        }
    }

    #[test]
    fn eliminate_matches_scalar_oracle(cs in constraint_system(3), probes in points(2, 40)) {
        let s = space(3);
        let p = poly(&s, &cs);
        let e = p.eliminate(&["x3"]).unwrap();
        for y in &probes {
            prop_assert_eq!(e.contains(y), exists_last(&cs, y));
        }
    }

    #[test]
    fn merge_matches_box_oracle(a in int_box(), b in int_box()) {
        let s = space(2);
        let (pa, pb) = (box_of(&s, &a), box_of(&s, &b));
        let merged = pa.merge_if_convex(&pb);
        prop_assert_eq!(merged.is_some(), boxes_union_convex(&a, &b));
        if let Some(h) = merged {
            prop_assert!(h.includes(&pa) && h.includes(&pb));
            for v in h.generators().points {
                prop_assert!(pa.contains(&v) || pb.contains(&v));
            }
        }
    }
}

#[test]
fn rational_point_coordinates_survive() {
    let s = space(2);
    let p = Polyhedron::point(s.clone(), &[qr(1, 3), qr(-7, 2)]).unwrap();
    assert!(p.contains(&[qr(1, 3), qr(-7, 2)]));
    assert!(!p.contains(&[qr(1, 3), q(-3)]));
    assert_eq!(p.generators().points, vec![vec![qr(1, 3), qr(-7, 2)]]);
}
