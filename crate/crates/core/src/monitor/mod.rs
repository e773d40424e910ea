//! Direct incremental membership: reach between consecutive samples, then
//! restrict to the observed valuation.

mod oracle;
pub(crate) mod reach;
mod witness;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde_json::{json, Value};
use thiserror::Error;

use crate::geometry::{GeometryError, LinearConstraint, Polyhedron, Relation};
use crate::log::{LogError, Sample, TimedWord};
use crate::model::Lha;
use crate::numeric::Rational;

pub use oracle::{brute_force_membership, OracleError, OracleGrid};
pub use reach::DELTA;
pub use witness::{Witness, WitnessStep};

use reach::Engine;
use witness::History;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MonitorError {
    #[error("log variables [{log}] do not match model variables [{model}]")]
    VariableMismatch { log: String, model: String },
    #[error("unknown location `{0}`")]
    UnknownLocation(String),
    #[error("region is not over the model variables plus {DELTA}")]
    RegionSpace,
    #[error("empty log: at least one sample is needed")]
    EmptyWord,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Log(#[from] LogError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonitorConfig {
    /// Discrete steps explored per interval; `None` means ten per location.
    pub cap: Option<usize>,
    /// Merge convex unions in reported state sets.
    pub merge: bool,
    /// Attach a replayable run to every accepted index.
    pub witness: bool,
}

impl Default for MonitorConfig {
    fn default() -> Self {
        MonitorConfig { cap: None, merge: true, witness: false }
    }
}

impl MonitorConfig {
    pub fn cap_for(&self, m: &Lha) -> usize {
        self.cap.unwrap_or(10 * m.locations.len())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Accepted,
    Rejected,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Accepted => "accepted",
            Verdict::Rejected => "rejected",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone)]
pub struct IndexVerdict {
    /// 1-based prefix length.
    pub index: usize,
    pub timestamp: Rational,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone, Default)]
pub struct MonitorVerdict {
    pub indices: Vec<IndexVerdict>,
    /// Indices whose incoming interval hit the cap.
    pub saturated_intervals: Vec<usize>,
    pub diagnostics: Vec<String>,
}

impl MonitorVerdict {
    /// The accepted prefix lengths, i.e. the set C.
    pub fn accepted(&self) -> Vec<usize> {
        self.indices.iter().filter(|v| v.verdict == Verdict::Accepted).map(|v| v.index).collect()
    }

    pub fn verdicts(&self) -> Vec<Verdict> {
        self.indices.iter().map(|v| v.verdict).collect()
    }

    pub fn has_alarm(&self) -> bool {
        self.indices.iter().any(|v| v.verdict == Verdict::Accepted)
    }

    pub fn has_inconclusive(&self) -> bool {
        self.indices.iter().any(|v| v.verdict == Verdict::Inconclusive)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "indices": self.indices.iter().map(IndexVerdict::to_json).collect::<Vec<_>>(),
            "C": self.accepted(),
            "saturated_intervals": self.saturated_intervals,
            "diagnostics": self.diagnostics,
        })
    }
}

impl IndexVerdict {
    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "i": self.index,
            "timestamp": self.timestamp.to_string(),
            "verdict": self.verdict.to_string(),
        });
        if let Some(w) = &self.witness {
            v["witness"] = w.to_json();
        }
        v
    }
}

/// A location paired with a region, over `X ∪ {δ}` or over `X` depending on the operation.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolicState {
    pub location: String,
    pub region: Polyhedron,
}

/// `Init(ℓ) ∩ Inv(ℓ)` with `δ = 0`, for every location where that is nonempty.
pub fn initial_states(m: &Lha) -> Result<Vec<SymbolicState>, MonitorError> {
    let ext = m.space.with(DELTA)?;
    let zero = LinearConstraint::var_eq(ext.dim(), ext.dim() - 1, Rational::zero());
    let mut out = Vec::new();
    for l in &m.locations {
        let region = l.initial.intersect(&l.invariant)?.lift_to(&ext)?.add_constraints(std::slice::from_ref(&zero))?;
        if !region.is_empty() {
            out.push(SymbolicState { location: l.id.clone(), region });
        }
    }
    Ok(out)
}

/// Symbolic states after exactly `d` time units, over `X`, and whether the cap was hit.
pub fn bounded_reach(
    m: &Lha,
    start: &[SymbolicState],
    d: &Rational,
    cfg: &MonitorConfig,
) -> Result<(Vec<SymbolicState>, bool), MonitorError> {
    let engine = Engine::new(m)?;
    let mut starts = Vec::with_capacity(start.len());
    for s in start {
        let loc = m.location_index(&s.location).ok_or_else(|| MonitorError::UnknownLocation(s.location.clone()))?;
        if s.region.space() != &engine.ext {
            return Err(MonitorError::RegionSpace);
        }
        starts.push((loc, s.region.clone()));
    }
    let reach = engine.reach(&starts, d, cfg.cap_for(m));
    let at_d = engine.delta_bound(Relation::Eq, d);
    let mut per_location: BTreeMap<usize, Vec<Polyhedron>> = BTreeMap::new();
    for n in &reach.nodes {
        let slice = n.region.add_constraints(std::slice::from_ref(&at_d))?;
        if !slice.is_empty() {
            per_location.entry(n.location).or_default().push(slice.eliminate(&[DELTA])?);
        }
    }
    let mut out = Vec::new();
    for (loc, regions) in per_location {
        let regions = if cfg.merge { merge_all(regions) } else { regions };
        for region in regions {
            out.push(SymbolicState { location: m.locations[loc].id.clone(), region });
        }
    }
    Ok((out, reach.saturated))
}

/// Repeatedly replaces pairs whose union is convex by their hull.
pub fn merge_all(mut regions: Vec<Polyhedron>) -> Vec<Polyhedron> {
    'outer: loop {
        for i in 0..regions.len() {
            for j in i + 1..regions.len() {
                if let Some(h) = regions[i].merge_if_convex(&regions[j]) {
                    regions[i] = h;
                    regions.swap_remove(j);
                    continue 'outer;
                }
            }
        }
        return regions;
    }
}

/// States whose region contains the sampled valuation, collapsed to that point.
pub fn restrict_to_sample(states: &[SymbolicState], sample: &Sample) -> Vec<SymbolicState> {
    let mut out: Vec<SymbolicState> = Vec::new();
    for s in states {
        if s.region.contains(&sample.values) && !out.iter().any(|o| o.location == s.location) {
            let region = Polyhedron::point(s.region.space().clone(), &sample.values).expect("width checked by contains");
            out.push(SymbolicState { location: s.location.clone(), region });
        }
    }
    out
}

struct Start {
    location: usize,
    region: Polyhedron,
    history: Option<Arc<History>>,
}

/// Online monitor: feed samples one at a time.
pub struct Session {
    engine: Engine,
    cfg: MonitorConfig,
    cap: usize,
    starts: Vec<Start>,
    last: Option<Sample>,
    index: usize,
    /// Some interval hit the cap, so later state sets may be incomplete.
    partial: bool,
    /// Every state vanished; later indices need no computation.
    dead: bool,
    saturated_intervals: Vec<usize>,
    diagnostics: Vec<String>,
}

impl Session {
    pub fn new(m: &Lha, cfg: MonitorConfig) -> Result<Session, MonitorError> {
        let engine = Engine::new(m)?;
        let starts = initial_states(m)?
            .into_iter()
            .map(|s| Start { location: m.location_index(&s.location).expect("own id"), region: s.region, history: None })
            .collect();
        let cap = cfg.cap_for(m);
        Ok(Session {
            engine,
            cfg,
            cap,
            starts,
            last: None,
            index: 0,
            partial: false,
            dead: false,
            saturated_intervals: Vec::new(),
            diagnostics: Vec::new(),
        })
    }

    pub fn push(&mut self, sample: &Sample) -> Result<IndexVerdict, MonitorError> {
        crate::log::check_next(&self.engine.model.space, self.last.as_ref(), sample, self.index as u64 + 1)?;
        let prev_time = self.last.as_ref().map_or_else(Rational::zero, |s| s.timestamp.clone());
        let d = &sample.timestamp - &prev_time;
        self.last = Some(sample.clone());
        self.index += 1;
        let i = self.index;
        let fallback = if self.partial { Verdict::Inconclusive } else { Verdict::Rejected };
        if self.dead {
            return Ok(IndexVerdict { index: i, timestamp: sample.timestamp.clone(), verdict: fallback, witness: None });
        }

        let roots: Vec<(usize, Polyhedron)> = self.starts.iter().map(|s| (s.location, s.region.clone())).collect();
        let reach = self.engine.reach(&roots, &d, self.cap);
        if reach.saturated {
            self.partial = true;
            self.saturated_intervals.push(i);
        }
        let point = self.engine.ext_point(&sample.values, d.clone());
        let mut hit: BTreeMap<usize, usize> = BTreeMap::new();
        for n in reach.containing(&point) {
            hit.entry(reach.nodes[n].location).or_insert(n);
        }

        let m = &self.engine.model;
        let accepting = hit.keys().copied().find(|&l| m.locations[l].accepting);
        let verdict = match accepting {
            Some(_) => Verdict::Accepted,
            None if self.partial => Verdict::Inconclusive,
            None => Verdict::Rejected,
        };
        let zero_point = self.engine.ext_point(&sample.values, Rational::zero());
        let mut next = Vec::with_capacity(hit.len());
        let mut witness = None;
        for (&loc, &node) in &hit {
            let history = self.cfg.witness.then(|| {
                let prev = self.starts[reach.root_of(node)].history.clone();
                Arc::new(History::from_chain(&self.engine, &reach, node, i, prev))
            });
            if Some(loc) == accepting {
                witness = history.as_ref().map(|h| h.witness());
            }
            next.push(Start {
                location: loc,
                region: Polyhedron::point(self.engine.ext.clone(), &zero_point)?,
                history,
            });
        }
        if next.is_empty() {
            self.dead = true;
            if !self.partial {
                self.diagnostics.push(format!(
                    "log inconsistent with bounding model at index {i} (t = {}): no behaviour of the model matches the samples so far",
                    sample.timestamp
                ));
            } else {
                self.diagnostics.push(format!("no states left at index {i} after a saturated interval"));
            }
        }
        self.starts = next;
        Ok(IndexVerdict { index: i, timestamp: sample.timestamp.clone(), verdict, witness })
    }

    /// Locations of the current state set (after the last sample).
    pub fn current_locations(&self) -> Vec<&str> {
        self.starts.iter().map(|s| self.engine.model.locations[s.location].id.as_str()).collect()
    }

    pub fn saturated_intervals(&self) -> &[usize] {
        &self.saturated_intervals
    }

    pub fn diagnostics(&self) -> &[String] {
        &self.diagnostics
    }

    pub fn into_verdict(self, indices: Vec<IndexVerdict>) -> MonitorVerdict {
        MonitorVerdict { indices, saturated_intervals: self.saturated_intervals, diagnostics: self.diagnostics }
    }
}

/// Verdict for every prefix of `w`.
pub fn run_monitor(m: &Lha, w: &TimedWord, cfg: &MonitorConfig) -> Result<MonitorVerdict, MonitorError> {
    if w.space() != &m.space {
        return Err(MonitorError::VariableMismatch { log: w.space().names().join(","), model: m.space.names().join(",") });
    }
    let mut session = Session::new(m, cfg.clone())?;
    let mut indices = Vec::with_capacity(w.len());
    for s in w.samples() {
        indices.push(session.push(s)?);
    }
    Ok(session.into_verdict(indices))
}
