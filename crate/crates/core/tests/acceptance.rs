//! Acceptance checks, one line per criterion. Runs without the libtest harness so the
//! report is printed even when everything passes.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use hamon::geometry::{ElapseBound, Polyhedron, VarSpace};
use hamon::log::{format_log, generate_log, parse_log, GenerateConfig, TimedWord};
use hamon::method::{Direct, MembershipMethod, Product};
use hamon::model::{builtin_base, builtin_model, model_from_json, spec_from_json, BuiltinSelector, Edge, Lha, Location};
use hamon::monitor::{
    bounded_reach, brute_force_membership, initial_states, restrict_to_sample, run_monitor, MonitorConfig, OracleGrid,
    SymbolicState, Verdict, DELTA,
};
use hamon::numeric::Rational;
use hamon::translate::{method1_verdict, method1_verdict_with, product_reach, Method1Options};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRng, TestRunner};

const MODEL: &str = include_str!("../../../fixtures/platooning/model.json");
const SPEC: &str = include_str!("../../../fixtures/platooning/spec.json");
const LOG: &str = include_str!("../../../fixtures/platooning/log.csv");

type Check = Result<String, String>;
type Criterion = fn() -> Check;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn violation_model() -> Lha {
    let m = model_from_json(MODEL).unwrap();
    let spec = spec_from_json(SPEC, &m.space).unwrap();
    m.against_safety(&spec).unwrap()
}

fn poly(space: &VarSpace, texts: &[&str]) -> Polyhedron {
    hamon::model::parse_polyhedron(texts, space).unwrap()
}

fn union_equals(a: &[Polyhedron], b: &[Polyhedron]) -> bool {
    a.iter().all(|p| p.covered_by_union(b)) && b.iter().all(|p| p.covered_by_union(a))
}

fn regions_at(states: &[SymbolicState], loc: &str) -> Vec<Polyhedron> {
    states.iter().filter(|s| s.location == loc).map(|s| s.region.clone()).collect()
}

fn platooning() -> Check {
    let m = violation_model();
    let w = parse_log(LOG, &m.space).map_err(|e| e.to_string())?;
    let t = Instant::now();
    let v = run_monitor(&m, &w, &MonitorConfig::default()).map_err(|e| e.to_string())?;
    let elapsed = t.elapsed();
    ensure(v.accepted() == [3], || format!("C = {:?}", v.accepted()))?;
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!("C = {{3}} in {:.1} ms", elapsed.as_secs_f64() * 1e3))
}

fn prefix_safety() -> Check {
    let m = violation_model();
    let w = parse_log(LOG, &m.space).unwrap().prefix(2);
    let v = run_monitor(&m, &w, &MonitorConfig::default()).map_err(|e| e.to_string())?;
    ensure(v.verdicts() == [Verdict::Rejected, Verdict::Rejected], || format!("{:?}", v.verdicts()))?;
    Ok("indices 1 and 2 rejected".into())
}

fn worked_example_polyhedra() -> Check {
    let m = violation_model();
    let sp = m.space.clone();
    let (s1, saturated) =
        bounded_reach(&m, &initial_states(&m).unwrap(), &q(10), &MonitorConfig::default()).map_err(|e| e.to_string())?;
    ensure(!saturated, || "first interval saturated".into())?;
    let expected = [
        poly(&sp, &["115 <= x1 <= 125", "115 <= x2 <= 125"]),
        poly(
            &sp,
            &["-3 x1 + 11 x2 >= 876", "-2 x1 + 9 x2 >= 789", "x2 <= 431/3", "x1 <= 499/3", "x2 >= 115", "x1 >= 115", "4 x1 - 7 x2 >= -415"],
        ),
    ];
    ensure(union_equals(&regions_at(&s1, "l0"), &expected), || "State'1 at l0 differs".into())?;

    let w = parse_log(LOG, &sp).unwrap();
    let r1 = restrict_to_sample(&s1, &w.samples()[1]);
    let locs1: Vec<&str> = r1.iter().map(|s| s.location.as_str()).collect();
    ensure(locs1 == ["l0", "l1"], || format!("State1 locations {locs1:?}"))?;

    let start: Vec<SymbolicState> = r1
        .iter()
        .map(|s| SymbolicState {
            location: s.location.clone(),
            region: Polyhedron::point(sp.with(DELTA).unwrap(), &[q(123), q(117), q(0)]).unwrap(),
        })
        .collect();
    let (s2, _) = bounded_reach(&m, &start, &q(10), &MonitorConfig::default()).map_err(|e| e.to_string())?;
    let r2 = restrict_to_sample(&s2, &w.samples()[2]);
    let locs2: Vec<&str> = r2.iter().map(|s| s.location.as_str()).collect();
    ensure(locs2 == ["l0", "l1", "l0_bad", "l1_bad"], || format!("State2 locations {locs2:?}"))?;
    let target = Polyhedron::point(sp.clone(), &[q(203), q(201)]).unwrap();
    ensure(r2.iter().all(|s| s.region.equals(&target)), || "State2 is not the sampled point".into())?;

    // The sample (123, 117) is on some run of the model: the oracle agrees once every location accepts.
    let mut all = m.clone();
    for l in &mut all.locations {
        l.accepting = true;
    }
    let grid = OracleGrid { time_steps: 5, ..OracleGrid::default() };
    let o = brute_force_membership(&all, &w, &grid).map_err(|e| e.to_string())?;
    ensure(o == [true, true, true], || format!("oracle on the log {o:?}"))?;
    let o = brute_force_membership(&m, &w, &grid).map_err(|e| e.to_string())?;
    ensure(o == [false, false, true], || format!("oracle on the violation model {o:?}"))?;
    Ok("State'1 at l0 equal to the two-disjunct system; State2 has (203,201) at l0, l1, l0_bad, l1_bad; oracle agrees".into())
}

fn method_equivalence() -> Check {
    let mut logs = 0;
    let mut skipped = 0;
    let mut alarms = 0;
    let mut disagreements = Vec::new();
    for sel in ["ACCI", "ACCD:2:9/10", "ACCD:2:2"] {
        let sel: BuiltinSelector = sel.parse().unwrap();
        let (base, _) = builtin_base(&sel).unwrap();
        let m = builtin_model(&sel).unwrap();
        for seed in 0..34 {
            let cfg = GenerateConfig { seed, length: 12, ..GenerateConfig::default() };
            let w = generate_log(&base, &cfg).map_err(|e| format!("{sel} seed {seed}: {e}"))?;
            let a = Direct.verdicts(&m, &w, &MonitorConfig::default()).map_err(|e| e.to_string())?;
            let b = Product.verdicts(&m, &w, &MonitorConfig::default()).map_err(|e| e.to_string())?;
            logs += 1;
            if !a.saturated_intervals.is_empty() && !b.saturated_intervals.is_empty() {
                skipped += 1;
                continue;
            }
            if a.accepted() != b.accepted() {
                disagreements.push(format!("{sel} seed {seed}: {:?} vs {:?}", a.accepted(), b.accepted()));
            }
            alarms += usize::from(a.has_alarm());
        }
    }
    ensure(disagreements.is_empty(), || disagreements.join("; "))?;
    ensure(logs - skipped >= 100, || format!("only {} comparable logs", logs - skipped))?;
    Ok(format!("{logs} logs, {skipped} mutually saturated, 0 disagreements, {alarms} with alarms"))
}

fn sample_instant_condition() -> Check {
    let m = violation_model();
    let w = parse_log(LOG, &m.space).unwrap().prefix(2);
    let cfg = MonitorConfig::default();
    let loose = Method1Options { sample_instant_only: false };
    let naive = product_reach(&m, &w, &cfg, loose).map_err(|e| e.to_string())?;
    ensure(naive.accepting.iter().any(|(l, j)| l == "l0_bad" && *j == 1), || format!("{:?}", naive.accepting))?;
    let v = method1_verdict_with(&m, &w, &cfg, loose).map_err(|e| e.to_string())?;
    ensure(v.has_alarm(), || "no alarm without the condition".into())?;
    let v = method1_verdict(&m, &w, &cfg).map_err(|e| e.to_string())?;
    ensure(v.verdicts() == [Verdict::Rejected, Verdict::Rejected], || format!("{:?}", v.verdicts()))?;
    Ok("copy location reachable on [0,10] without t_rel = 0; prefix rejected with it".into())
}

fn tiny_instance() -> impl Strategy<Value = (Lha, TimedWord)> {
    (tiny_model(3, 2), any::<u64>(), 1usize..=3, proptest::option::of((0usize..3, -2i64..=2))).prop_map(
        |(m, seed, length, nudge)| {
            let cfg = GenerateConfig { seed, length, interval: (q(0), q(2)), ..GenerateConfig::default() };
            let mut w = generate_log(&m, &cfg).unwrap_or_else(|e| e.partial);
            if let Some((i, by)) = nudge {
                if i < w.len() && by != 0 {
                    let mut samples = w.samples().to_vec();
                    samples[i].values[0] = &samples[i].values[0] + &qr(by, 2);
                    w = TimedWord::new(w.space().clone(), samples).unwrap();
                }
            }
            (m, w)
        },
    )
}

fn runner(cases: u32) -> TestRunner {
    let config = Config { cases, failure_persistence: None, ..Config::default() };
    let rng = TestRng::deterministic_rng(config.rng_algorithm);
    TestRunner::new_with_rng(config, rng)
}

fn oracle_soundness() -> Check {
    let hits = std::cell::Cell::new(0usize);
    let mut r = runner(250);
    r.run(&tiny_instance(), |(m, w)| {
        let oracle = brute_force_membership(&m, &w, &OracleGrid::default()).unwrap();
        let v = run_monitor(&m, &w, &MonitorConfig { cap: Some(200), ..MonitorConfig::default() }).unwrap();
        for (i, (o, r)) in oracle.iter().zip(v.verdicts()).enumerate() {
            prop_assert!(!o || r == Verdict::Accepted, "index {} oracle true, monitor {:?}", i + 1, r);
        }
        hits.set(hits.get() + oracle.iter().filter(|&&o| o).count());
        Ok(())
    })
    .map_err(|e| e.to_string())?;
    let hits = hits.get();
    ensure(hits > 0, || "oracle never found a run".into())?;
    Ok(format!("250 instances, {hits} oracle-proved indices, 0 violations"))
}

fn zeno_model() -> Lha {
    let sp = VarSpace::new(["x", "y"]).unwrap();
    let flow = poly(&sp.derivatives(), &["x' = 1", "y' = 1"]);
    let loc = |id: &str, invariant: &[&str], initial: Option<&[&str]>, accepting: bool| Location {
        id: id.into(),
        flow: flow.clone(),
        invariant: poly(&sp, invariant),
        initial: initial.map_or_else(|| Polyhedron::empty(sp.clone()), |i| poly(&sp, i)),
        accepting,
    };
    let reset = || hamon::geometry::IntervalUpdate::reset("x", q(0), q(0));
    let edge = |a: &str, b: &str, guard: &[&str], update| Edge { source: a.into(), target: b.into(), guard: poly(&sp, guard), update };
    Lha::new(
        sp.clone(),
        vec![
            loc("a", &["x <= 1/10"], Some(&["x = 0", "y = 0"]), false),
            loc("b", &["x <= 1/10"], None, false),
            loc("c", &[], None, true),
        ],
        vec![
            edge("a", "b", &[], reset()),
            edge("b", "a", &[], reset()),
            edge("a", "c", &["y >= 19"], hamon::geometry::IntervalUpdate::identity()),
        ],
    )
    .unwrap()
}

fn undecidability() -> Check {
    let z = zeno_model();
    let w = parse_log("time,x,y\n0,0,0\n20,1/20,20\n", &z.space).unwrap();
    let v = run_monitor(&z, &w, &MonitorConfig::default()).map_err(|e| e.to_string())?;
    ensure(v.verdicts() == [Verdict::Rejected, Verdict::Inconclusive], || format!("default cap: {:?}", v.verdicts()))?;
    let mut previous = v.verdicts();
    for cap in [50, 100, 200, 400, 1000] {
        let v = run_monitor(&z, &w, &MonitorConfig { cap: Some(cap), ..MonitorConfig::default() }).map_err(|e| e.to_string())?;
        for (a, b) in previous.iter().zip(v.verdicts()) {
            ensure(!(*a == Verdict::Accepted && b == Verdict::Rejected), || format!("cap {cap} flipped accepted to rejected"))?;
        }
        previous = v.verdicts();
    }
    Ok(format!("default cap gives [rejected, inconclusive]; cap 1000 gives {previous:?}"))
}

fn scalability() -> Check {
    let (base, _) = builtin_base(&BuiltinSelector::Acci).unwrap();
    let m = builtin_model(&BuiltinSelector::Acci).unwrap();
    let time = |length: usize, seed: u64| -> Result<f64, String> {
        let w = generate_log(&base, &GenerateConfig { seed, length, ..GenerateConfig::default() }).map_err(|e| e.to_string())?;
        let t = Instant::now();
        let v = run_monitor(&m, &w, &MonitorConfig::default()).map_err(|e| e.to_string())?;
        let s = t.elapsed().as_secs_f64();
        ensure(v.indices.len() == length, || "short verdict".into())?;
        Ok(s)
    };
    let mean = |length: usize| -> Result<f64, String> {
        let mut total = 0.0;
        for seed in 0..5 {
            total += time(length, seed)?;
        }
        Ok(total / 5.0)
    };
    let (m100, m1000) = (mean(100)?, mean(1000)?);
    let big = time(10_000, 0)?;
    ensure(big < 60.0, || format!("length 10000 took {big:.1} s"))?;
    ensure(m1000 <= 20.0 * m100, || format!("mean(1000) = {m1000:.3} s vs mean(100) = {m100:.3} s"))?;
    Ok(format!("length 10000 in {big:.1} s; mean(1000)/mean(100) = {:.1}", m1000 / m100))
}

fn property_suites() -> Check {
    let started = Instant::now();
    let mut done = Vec::new();
    let mut suite = |name: &str, result: Result<(), String>| -> Result<(), String> {
        result.map_err(|e| format!("{name}: {e}"))?;
        done.push(name.to_string());
        Ok(())
    };
    const CASES: u32 = 1000;

    let dd = (1usize..=4).prop_flat_map(|d| (Just(d), constraint_system(d), points(d, 20)));
    suite(
        "double description round-trip",
        runner(CASES)
            .run(&dd, |(d, cs, probes)| {
                let s = space(d);
                let p = Polyhedron::from_constraints(s.clone(), &cs).unwrap();
                let g = p.generators();
                let back = Polyhedron::from_generators(s.clone(), &g.points, &g.rays, &g.lines);
                prop_assert!(p.equals(&back));
                let again = Polyhedron::from_constraints(s, &back.constraints()).unwrap();
                prop_assert!(again.equals(&p));
                for y in &probes {
                    prop_assert_eq!(back.contains(y), satisfies_all(&cs, y));
                }
                Ok(())
            })
            .map_err(|e| e.to_string()),
    )?;

    let derivs = space(2).derivatives();
    suite(
        "elapse vs simulation",
        runner(CASES)
            .run(&(point(2), flow_box(2), 0i64..=4, points(2, 20)), |(p, fb, d, probes)| {
                let start = Polyhedron::point(space(2), &p).unwrap();
                let flow = box_polyhedron(&derivs, &fb);
                let d = qr(d, 2);
                let bounded = start.time_elapse(&flow, ElapseBound::AtMost(d.clone())).unwrap();
                let unbounded = start.time_elapse(&flow, ElapseBound::Unbounded).unwrap();
                for y in &probes {
                    prop_assert_eq!(bounded.contains(y), reachable_in_box(&p, y, &fb, Some(&d)));
                    prop_assert_eq!(unbounded.contains(y), reachable_in_box(&p, y, &fb, None));
                }
                // Endpoints of straight runs at the box corners and the duration bound are inside.
                for f in [fb.iter().map(|b| b.0.clone()).collect::<Vec<_>>(), fb.iter().map(|b| b.1.clone()).collect()] {
                    let end: Vec<Rational> = p.iter().zip(&f).map(|(x, v)| x + &(v * &d)).collect();
                    prop_assert!(bounded.contains(&end));
                }
                Ok(())
            })
            .map_err(|e| e.to_string()),
    )?;

    suite(
        "eliminate vs vertex projection",
        runner(CASES)
            .run(&(constraint_system(3), points(2, 20)), |(cs, probes)| {
                let p = Polyhedron::from_constraints(space(3), &cs).unwrap();
                let e = p.eliminate(&["x3"]).unwrap();
                let g = p.generators();
                let drop = |v: &Vec<Rational>| v[..2].to_vec();
                let projected = Polyhedron::from_generators(
                    space(2),
                    &g.points.iter().map(drop).collect::<Vec<_>>(),
                    &g.rays.iter().map(drop).collect::<Vec<_>>(),
                    &g.lines.iter().map(drop).collect::<Vec<_>>(),
                );
                prop_assert!(e.equals(&projected));
                for y in &probes {
                    prop_assert_eq!(e.contains(y), exists_last(&cs, y));
                }
                Ok(())
            })
            .map_err(|e| e.to_string()),
    )?;

    suite(
        "merge exactness",
        runner(CASES)
            .run(&(int_box(), int_box(), points(2, 20)), |(a, b, probes)| {
                let s = space(2);
                let (pa, pb) = (box_of(&s, &a), box_of(&s, &b));
                let merged = pa.merge_if_convex(&pb);
                prop_assert_eq!(merged.is_some(), boxes_union_convex(&a, &b));
                if let Some(h) = merged {
                    for y in &probes {
                        prop_assert_eq!(h.contains(y), pa.contains(y) || pb.contains(y));
                    }
                    for v in h.generators().points {
                        prop_assert!(pa.contains(&v) || pb.contains(&v));
                    }
                }
                Ok(())
            })
            .map_err(|e| e.to_string()),
    )?;

    suite(
        "log round-trip",
        runner(CASES)
            .run(&word(3, 12), |w| {
                let text = format_log(&w);
                let back = parse_log(&text, w.space()).unwrap();
                prop_assert_eq!(format_log(&back), text);
                prop_assert_eq!(back, w);
                Ok(())
            })
            .map_err(|e| e.to_string()),
    )?;

    let consistent = (tiny_model(3, 2), any::<u64>(), 1usize..=6);
    suite(
        "generated-log model consistency",
        runner(CASES)
            .run(&consistent, |(m, seed, length)| {
                let cfg = GenerateConfig { seed, length, interval: (q(0), q(2)), ..GenerateConfig::default() };
                let w = generate_log(&m, &cfg).unwrap_or_else(|e| e.partial);
                let v = run_monitor(&m, &w, &MonitorConfig { cap: Some(200), ..MonitorConfig::default() }).unwrap();
                if v.saturated_intervals.is_empty() {
                    prop_assert!(v.diagnostics.is_empty(), "{:?}", v.diagnostics);
                }
                Ok(())
            })
            .map_err(|e| e.to_string()),
    )?;

    let elapsed = started.elapsed();
    ensure(elapsed < Duration::from_secs(300), || format!("took {elapsed:?}"))?;
    Ok(format!("{} suites x {CASES} cases in {:.1} s", done.len(), elapsed.as_secs_f64()))
}

fn main() -> ExitCode {
    // Enough of the libtest command line to behave under `cargo test`: `--list`, and name filters.
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--list") {
        println!("acceptance: test");
        return ExitCode::SUCCESS;
    }
    let mut filters = Vec::new();
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if ["--test-threads", "--skip", "--format", "--color", "--logfile", "--shuffle-seed", "-Z"].contains(&a.as_str()) {
            it.next();
        } else if !a.starts_with('-') {
            filters.push(a.as_str());
        }
    }
    let wanted = |name: &str| filters.is_empty() || filters.iter().any(|f| name.contains(f) || "acceptance".contains(f));

    let criteria: [(&str, Criterion); 9] = [
        ("platooning end-to-end", platooning),
        ("prefix safety", prefix_safety),
        ("worked-example polyhedra", worked_example_polyhedra),
        ("method equivalence", method_equivalence),
        ("sample-instant acceptance", sample_instant_condition),
        ("oracle soundness", oracle_soundness),
        ("undecidability handling", undecidability),
        ("scalability smoke", scalability),
        ("property suites", property_suites),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        if !wanted(name) {
            continue;
        }
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
