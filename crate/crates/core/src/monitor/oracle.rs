//! Brute-force trajectory enumeration, used as a one-sided test oracle.
//!
//! A `true` answer comes with a concrete piecewise-constant run, so the monitor
//! must accept there. A `false` answer proves nothing.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::log::TimedWord;
use crate::model::Lha;
use crate::numeric::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("instance too large for enumeration: {0}")]
    TooLarge(String),
    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),
    #[error("log variables do not match the model")]
    VariableMismatch,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleGrid {
    /// Switch times are multiples of `duration / time_steps` inside each interval.
    pub time_steps: u32,
    /// Switches allowed per interval (at most 2).
    pub max_switches: usize,
    /// Multiple of each ray or line added to flow candidates.
    pub ray_clamp: i64,
}

impl Default for OracleGrid {
    fn default() -> Self {
        OracleGrid { time_steps: 4, max_switches: 2, ray_clamp: 1 }
    }
}

struct Oracle<'a> {
    m: &'a Lha,
    grid: &'a OracleGrid,
    flows: Vec<Vec<Vec<Rational>>>,
    outgoing: Vec<Vec<usize>>,
}

/// For each prefix, whether some enumerated run hits every sample so far and ends accepting.
pub fn brute_force_membership(m: &Lha, w: &TimedWord, grid: &OracleGrid) -> Result<Vec<bool>, OracleError> {
    if w.space() != &m.space {
        return Err(OracleError::VariableMismatch);
    }
    if m.locations.len() > 4 || m.space.dim() > 3 || w.len() > 4 {
        return Err(OracleError::TooLarge(format!(
            "{} locations, {} variables, {} samples",
            m.locations.len(),
            m.space.dim(),
            w.len()
        )));
    }
    if grid.time_steps == 0 {
        return Err(OracleError::GridTooCoarse("time_steps must be positive".into()));
    }
    if grid.max_switches > 2 {
        return Err(OracleError::TooLarge(format!("{} switches per interval", grid.max_switches)));
    }
    let oracle = Oracle { m, grid, flows: m.locations.iter().map(|l| flow_candidates(l, grid)).collect(), outgoing: m.outgoing() };

    let mut out = Vec::with_capacity(w.len());
    let mut current: BTreeSet<usize> = BTreeSet::new();
    for (i, sample) in w.samples().iter().enumerate() {
        let mut next = BTreeSet::new();
        if i == 0 {
            for (loc, l) in m.locations.iter().enumerate() {
                let Ok(start) = l.initial.intersect(&l.invariant) else { continue };
                for p in start.generators().points {
                    oracle.search(loc, &p, &Rational::zero(), &sample.timestamp, &sample.values, grid.max_switches, &mut next);
                }
            }
        } else {
            let prev = &w.samples()[i - 1];
            let d = &sample.timestamp - &prev.timestamp;
            for &loc in &current {
                oracle.search(loc, &prev.values, &Rational::zero(), &d, &sample.values, grid.max_switches, &mut next);
            }
        }
        out.push(next.iter().any(|&l| m.locations[l].accepting));
        current = next;
    }
    Ok(out)
}

/// Vertices, pairwise midpoints and the centroid, each also shifted once along every ray and line.
fn flow_candidates(l: &crate::model::Location, grid: &OracleGrid) -> Vec<Vec<Rational>> {
    let g = l.flow.generators();
    if g.points.is_empty() {
        return Vec::new();
    }
    let mut base: Vec<Vec<Rational>> = g.points.clone();
    let half = Rational::new(1, 2).expect("nonzero");
    for a in 0..g.points.len() {
        for b in a + 1..g.points.len() {
            base.push(g.points[a].iter().zip(&g.points[b]).map(|(x, y)| &(x + y) * &half).collect());
        }
    }
    let n = Rational::from(g.points.len() as i64);
    let centroid: Vec<Rational> = (0..g.points[0].len())
        .map(|k| &g.points.iter().map(|p| p[k].clone()).sum::<Rational>() / &n)
        .collect();
    base.push(centroid);
    let k = Rational::from(grid.ray_clamp);
    let mut out = base.clone();
    for dir in g.rays.iter().chain(&g.lines) {
        for p in &base {
            out.push(p.iter().zip(dir).map(|(x, r)| x + &(&k * r)).collect());
        }
    }
    for dir in &g.lines {
        for p in &base {
            out.push(p.iter().zip(dir).map(|(x, r)| x - &(&k * r)).collect());
        }
    }
    out.sort();
    out.dedup();
    out
}

impl Oracle<'_> {
    #[allow(clippy::too_many_arguments)]
    fn search(
        &self,
        loc: usize,
        v: &[Rational],
        used: &Rational,
        duration: &Rational,
        target: &[Rational],
        switches: usize,
        found: &mut BTreeSet<usize>,
    ) {
        let l = &self.m.locations[loc];
        if !l.invariant.contains(v) {
            return;
        }
        // Final segment: the flow that lands exactly on the sample.
        let rest = duration - used;
        if rest.is_zero() {
            if v == target {
                found.insert(loc);
            }
        } else if !l.flow.is_empty() && l.invariant.contains(target) {
            let f: Vec<Rational> = target.iter().zip(v).map(|(t, x)| &(t - x) / &rest).collect();
            if l.flow.contains(&f) {
                found.insert(loc);
            }
        }
        if switches == 0 {
            return;
        }
        let steps = self.grid.time_steps as i64;
        for j in 0..=steps {
            let t = &(duration * &Rational::from(j)) / &Rational::from(steps);
            if &t < used {
                continue;
            }
            let dt = &t - used;
            let moved: Vec<Vec<Rational>> = if dt.is_zero() {
                vec![v.to_vec()]
            } else {
                self.flows[loc]
                    .iter()
                    .map(|f| v.iter().zip(f).map(|(x, r)| x + &(&dt * r)).collect())
                    .filter(|p: &Vec<Rational>| l.invariant.contains(p))
                    .collect()
            };
            for p in &moved {
                for &e in &self.outgoing[loc] {
                    let edge = &self.m.edges[e];
                    if !edge.guard.contains(p) {
                        continue;
                    }
                    let to = self.m.location_index(&edge.target).expect("validated");
                    for q in self.updates(edge, p) {
                        self.search(to, &q, &t, duration, target, switches - 1, found);
                    }
                }
            }
        }
    }

    /// Post-update valuations: each updated variable at its bounds or midpoint.
    fn updates(&self, edge: &crate::model::Edge, p: &[Rational]) -> Vec<Vec<Rational>> {
        let mut out = vec![p.to_vec()];
        let half = Rational::new(1, 2).expect("nonzero");
        for (var, iv) in edge.update.iter() {
            let i = self.m.space.index_of(var).expect("validated");
            let mid = &(&iv.lo + &iv.hi) * &half;
            let mut values = vec![iv.lo.clone(), mid, iv.hi.clone()];
            values.dedup();
            out = out
                .into_iter()
                .flat_map(|q| {
                    values.iter().map(move |x| {
                        let mut r = q.clone();
                        r[i] = x.clone();
                        r
                    })
                })
                .collect();
        }
        out
    }
}
