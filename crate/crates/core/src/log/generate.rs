//! Random logs that follow the flows and edges of a model.

use num_integer::Integer;
use num_traits::ToPrimitive;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::geometry::{Generators, LinearConstraint, Relation};
use crate::model::Lha;
use crate::numeric::Rational;

use super::{Sample, TimedWord};

/// Timestamps are drawn from this grid.
const TIME_GRID: i64 = 1000;
/// Dwell times inside an interval are rounded down to this grid.
const DWELL_GRID: i64 = 4000;
const FLOW_ATTEMPTS: usize = 8;
const MAX_STEPS_PER_INTERVAL: usize = 10_000;
const RETRIES_PER_INTERVAL: usize = 8;
const RETRY_BUDGET: usize = 1000;

#[derive(Debug, Clone)]
pub struct GenerateConfig {
    pub seed: u64,
    pub length: usize,
    /// Inclusive range for the gap between consecutive samples.
    pub interval: (Rational, Rational),
    /// Chance that an enabled edge fires at a step.
    pub switch_probability: f64,
    /// Flow vectors and initial points use convex weights `k / weight_denominator`.
    pub weight_denominator: u32,
    /// Largest multiple of a ray or line added when sampling unbounded sets.
    pub ray_clamp: u32,
    /// Consecutive edges allowed without time passing.
    pub max_zero_time_switches: usize,
}

impl Default for GenerateConfig {
    fn default() -> Self {
        GenerateConfig {
            seed: 0,
            length: 10,
            interval: (Rational::from(1), Rational::from(5)),
            switch_probability: 0.5,
            weight_denominator: 4,
            ray_clamp: 2,
            max_zero_time_switches: 8,
        }
    }
}

#[derive(Debug, Clone, Error)]
#[error("log generation stopped after {} samples: {reason}", partial.len())]
pub struct GenerateError {
    pub reason: String,
    pub partial: TimedWord,
}

struct Sim<'a> {
    m: &'a Lha,
    cfg: &'a GenerateConfig,
    rng: ChaCha8Rng,
    flows: Vec<Generators>,
    invariants: Vec<Vec<LinearConstraint>>,
    outgoing: Vec<Vec<usize>>,
    loc: usize,
    point: Vec<Rational>,
    time: Rational,
}

/// Simulates one run of `m` and samples it `cfg.length` times, the first sample at time 0.
pub fn generate_log(m: &Lha, cfg: &GenerateConfig) -> Result<TimedWord, GenerateError> {
    let mut word = TimedWord::empty(m.space.clone());
    let fail = |reason: String, partial: &TimedWord| GenerateError { reason, partial: partial.clone() };
    if cfg.length == 0 {
        return Ok(word);
    }
    let (lo, hi) = &cfg.interval;
    if lo.is_negative() || lo > hi {
        return Err(fail(format!("invalid interval range [{lo}, {hi}]"), &word));
    }
    if cfg.weight_denominator == 0 {
        return Err(fail("weight denominator must be positive".into(), &word));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let starts: Vec<(usize, crate::geometry::Polyhedron)> = m
        .locations
        .iter()
        .enumerate()
        .filter_map(|(i, l)| l.initial.intersect(&l.invariant).ok().filter(|p| !p.is_empty()).map(|p| (i, p)))
        .collect();
    let Some((loc, init)) = starts.choose(&mut rng).cloned() else {
        return Err(fail("no location has a nonempty initial set".into(), &word));
    };
    let init_gens = init.generators();
    let point = sample_generators(&mut rng, &init_gens, cfg, false);

    let mut sim = Sim {
        m,
        cfg,
        rng,
        flows: m.locations.iter().map(|l| l.flow.generators()).collect(),
        invariants: m.locations.iter().map(|l| l.invariant.constraints()).collect(),
        outgoing: m.outgoing(),
        loc,
        point,
        time: Rational::zero(),
    };
    word.push(Sample::new(Rational::zero(), sim.point.clone())).expect("first sample is valid");
    // Simulation state at each emitted sample, for backtracking out of dead ends.
    let mut saved = vec![(sim.loc, sim.point.clone())];
    let mut failures_here = 0;
    let mut budget = RETRY_BUDGET;
    while word.len() < cfg.length {
        let gap = sim.draw_gap();
        let target = &sim.time + &gap;
        match sim.advance_to(&target) {
            Ok(()) => {
                word.push(Sample::new(target, sim.point.clone())).expect("timestamps increase");
                saved.push((sim.loc, sim.point.clone()));
                failures_here = 0;
            }
            Err(reason) => {
                if budget == 0 {
                    return Err(fail(reason, &word));
                }
                budget -= 1;
                failures_here += 1;
                if failures_here > RETRIES_PER_INTERVAL && word.len() > 1 {
                    word = word.prefix(word.len() - 1);
                    saved.pop();
                    failures_here = 0;
                }
                let (loc, point) = saved.last().cloned().expect("first sample kept");
                sim.loc = loc;
                sim.point = point;
                sim.time = word.samples().last().expect("first sample kept").timestamp.clone();
            }
        }
    }
    Ok(word)
}

/// `k / denom` weights summing to one, as `denom` draws over `n` slots.
fn random_weights(rng: &mut ChaCha8Rng, n: usize, denom: u32) -> Vec<Rational> {
    let mut counts = vec![0i64; n];
    for _ in 0..denom {
        counts[rng.gen_range(0..n)] += 1;
    }
    counts.into_iter().map(|k| Rational::new(k, denom).expect("positive denominator")).collect()
}

/// A point of the set: a convex combination of its points plus bounded ray and line multiples.
/// With `vertices_too`, sometimes returns a bare vertex.
fn sample_generators(rng: &mut ChaCha8Rng, g: &Generators, cfg: &GenerateConfig, vertices_too: bool) -> Vec<Rational> {
    let mut out = if vertices_too && rng.gen_bool(0.25) {
        g.points.choose(rng).expect("nonempty set has a point").clone()
    } else {
        let weights = random_weights(rng, g.points.len(), cfg.weight_denominator);
        let mut acc = vec![Rational::zero(); g.points[0].len()];
        for (w, p) in weights.iter().zip(&g.points) {
            if !w.is_zero() {
                for (a, x) in acc.iter_mut().zip(p) {
                    *a += &(w * x);
                }
            }
        }
        acc
    };
    let clamp = cfg.ray_clamp as i64;
    for r in &g.rays {
        let k = Rational::from(rng.gen_range(0..=clamp));
        for (a, x) in out.iter_mut().zip(r) {
            *a += &(&k * x);
        }
    }
    for l in &g.lines {
        let k = Rational::from(rng.gen_range(-clamp..=clamp));
        for (a, x) in out.iter_mut().zip(l) {
            *a += &(&k * x);
        }
    }
    out
}

fn floor_to_grid(x: &Rational, grid: i64) -> Rational {
    let scaled = x * &Rational::from(grid);
    let floor = scaled.numer().div_floor(scaled.denom());
    &Rational::from(floor) / &Rational::from(grid)
}

impl Sim<'_> {
    fn draw_gap(&mut self) -> Rational {
        let (lo, hi) = &self.cfg.interval;
        let scaled = &(hi - lo) * &Rational::from(TIME_GRID);
        let steps = scaled.numer().div_floor(scaled.denom()).to_i64().unwrap_or(i64::MAX);
        let j = self.rng.gen_range(0..=steps);
        lo + &Rational::new(j, TIME_GRID).expect("positive denominator")
    }

    /// Longest duration for which `point + s·f` stays in the current invariant; `None` if unbounded.
    fn max_dwell(&self, f: &[Rational]) -> Option<Rational> {
        let mut best: Option<Rational> = None;
        for c in &self.invariants[self.loc] {
            let slope = c.lhs(f);
            let limit = match c.relation {
                Relation::Eq if slope.is_zero() => continue,
                Relation::Eq => Rational::zero(),
                Relation::Ge if !slope.is_negative() => continue,
                Relation::Ge => (c.lhs(&self.point) - c.bound.clone()) / (-slope),
                Relation::Le if !slope.is_positive() => continue,
                Relation::Le => (c.bound.clone() - c.lhs(&self.point)) / slope,
            };
            best = Some(match best {
                Some(b) => b.min(limit),
                None => limit,
            });
        }
        best
    }

    /// Tries the outgoing edges in random order; fires one if allowed.
    fn try_switch(&mut self, probability: f64) -> bool {
        let mut edges = self.outgoing[self.loc].clone();
        edges.shuffle(&mut self.rng);
        for e in edges {
            let edge = &self.m.edges[e];
            if !edge.guard.contains(&self.point) || !self.rng.gen_bool(probability) {
                continue;
            }
            let target = self.m.location_index(&edge.target).expect("validated edge");
            for _ in 0..4 {
                let mut next = self.point.clone();
                for (var, iv) in edge.update.iter() {
                    let i = self.m.space.index_of(var).expect("validated update");
                    let k = self.rng.gen_range(0..=self.cfg.weight_denominator as i64);
                    let w = Rational::new(k, self.cfg.weight_denominator).expect("positive denominator");
                    next[i] = &iv.lo + &(&w * &(&iv.hi - &iv.lo));
                }
                if self.m.locations[target].invariant.contains(&next) {
                    self.loc = target;
                    self.point = next;
                    return true;
                }
            }
        }
        false
    }

    /// A flow vector and a positive dwell no longer than `remaining`.
    fn pick_flow(&mut self, remaining: &Rational) -> Option<(Vec<Rational>, Rational)> {
        if self.m.locations[self.loc].flow.is_empty() {
            return None;
        }
        let gens = self.flows[self.loc].clone();
        let mut candidates: Vec<Vec<Rational>> =
            (0..FLOW_ATTEMPTS).map(|_| sample_generators(&mut self.rng, &gens, self.cfg, true)).collect();
        candidates.extend(gens.points.iter().cloned());
        let k = self.rng.gen_range(1..=4);
        let wanted = remaining * &Rational::new(k, 4).expect("positive denominator");
        for f in candidates {
            let cap = self.max_dwell(&f);
            let fits = cap.as_ref().is_none_or(|c| c >= remaining);
            let mut dwell = match cap {
                Some(c) => floor_to_grid(&c.min(wanted.clone()), DWELL_GRID),
                None => floor_to_grid(&wanted, DWELL_GRID),
            };
            if fits && (k == 4 || dwell.is_zero()) {
                dwell = remaining.clone();
            }
            if dwell.is_positive() {
                return Some((f, dwell));
            }
        }
        None
    }

    fn advance_to(&mut self, target: &Rational) -> Result<(), String> {
        let mut zero_time = 0;
        for _ in 0..MAX_STEPS_PER_INTERVAL {
            if self.time == *target {
                return Ok(());
            }
            if zero_time < self.cfg.max_zero_time_switches && self.try_switch(self.cfg.switch_probability) {
                zero_time += 1;
                continue;
            }
            let remaining = target - &self.time;
            match self.pick_flow(&remaining) {
                Some((f, dwell)) => {
                    for (x, r) in self.point.iter_mut().zip(&f) {
                        *x += &(&dwell * r);
                    }
                    self.time = &self.time + &dwell;
                    zero_time = 0;
                }
                None if zero_time < self.cfg.max_zero_time_switches && self.try_switch(1.0) => zero_time += 1,
                None => {
                    return Err(format!(
                        "stuck in `{}` at time {} with no admissible flow or enabled edge",
                        self.m.locations[self.loc].id, self.time
                    ))
                }
            }
        }
        Err(format!("no progress towards time {target} after {MAX_STEPS_PER_INTERVAL} steps"))
    }
}
