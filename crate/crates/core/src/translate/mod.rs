//! Membership through a product with the word automaton of the log.
//!
//! The log becomes a chain automaton over `X ∪ {t_abs, t_rel}`; the model runs
//! in parallel with it and index `i` is accepted when an accepting model
//! location is reachable together with `wl{i}` right after the `i`-th sample.

mod export;

use thiserror::Error;

use crate::geometry::{GeometryError, IntervalUpdate, LinearConstraint, Polyhedron, VarSpace};
use crate::log::TimedWord;
use crate::model::{AcceptFrom, Edge, Lha, Location, ModelError};
use crate::monitor::reach::Engine;
use crate::monitor::{initial_states, IndexVerdict, MonitorConfig, MonitorError, MonitorVerdict, Verdict};
use crate::numeric::Rational;

pub use export::{export_external, parse_export, EXPORT_HEADER};

pub const T_ABS: &str = "t_abs";
pub const T_REL: &str = "t_rel";

#[derive(Debug, Error)]
pub enum TranslateError {
    #[error("the log is empty; translation needs at least one sample")]
    EmptyWord,
    #[error("model variable `{0}` clashes with a clock of the word automaton")]
    ReservedVariable(String),
    #[error("export line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Monitor(#[from] MonitorError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Id of the word location reached after `i` samples.
pub fn word_location(i: usize) -> String {
    format!("wl{i}")
}

/// The chain automaton `wl0 → … → wl{n}` of a nonempty log over `space`.
pub fn tqw2lha(w: &TimedWord, space: &VarSpace) -> Result<Lha, TranslateError> {
    let first = w.samples().first().ok_or(TranslateError::EmptyWord)?;
    for clock in [T_ABS, T_REL] {
        if space.contains(clock) {
            return Err(TranslateError::ReservedVariable(clock.into()));
        }
    }
    let full = space.with(T_ABS)?.with(T_REL)?;
    let n = full.dim();
    let (abs, rel) = (n - 2, n - 1);
    let derivs = full.derivatives();
    let flow = Polyhedron::from_constraints(
        derivs,
        &[LinearConstraint::var_eq(n, abs, Rational::one()), LinearConstraint::var_eq(n, rel, Rational::one())],
    )?;
    let at_sample = |s: &crate::log::Sample| -> Vec<LinearConstraint> {
        let mut cs = vec![LinearConstraint::var_eq(n, abs, s.timestamp.clone())];
        cs.extend(s.values.iter().enumerate().map(|(k, v)| LinearConstraint::var_eq(n, k, v.clone())));
        cs
    };

    let mut locations = Vec::with_capacity(w.len() + 1);
    for i in 0..=w.len() {
        let invariant = match w.samples().get(i) {
            Some(s) => Polyhedron::from_constraints(full.clone(), &[LinearConstraint::var_le(n, abs, s.timestamp.clone())])?,
            None => Polyhedron::universe(full.clone()),
        };
        let initial = if i == 0 {
            let mut cs = at_sample(first);
            cs[0] = LinearConstraint::var_eq(n, abs, Rational::zero());
            cs.push(LinearConstraint::var_eq(n, rel, Rational::zero()));
            Polyhedron::from_constraints(full.clone(), &cs)?
        } else {
            Polyhedron::empty(full.clone())
        };
        locations.push(Location { id: word_location(i), flow: flow.clone(), invariant, initial, accepting: false });
    }
    let mut edges = Vec::with_capacity(w.len());
    for (i, s) in w.samples().iter().enumerate() {
        edges.push(Edge {
            source: word_location(i),
            target: word_location(i + 1),
            guard: Polyhedron::from_constraints(full.clone(), &at_sample(s))?,
            update: IntervalUpdate::reset(T_REL, Rational::zero(), Rational::zero()),
        });
    }
    Ok(Lha::new(full, locations, edges)?)
}

/// `m ∥ tqw2lha(w)`, accepting where `m` accepts. Location `(ℓ, wl{j})` has index `ℓ·(|w|+1) + j`.
pub fn word_product(m: &Lha, w: &TimedWord) -> Result<Lha, TranslateError> {
    if w.space() != &m.space {
        return Err(MonitorError::VariableMismatch { log: w.space().names().join(","), model: m.space.names().join(",") }.into());
    }
    let mw = tqw2lha(w, &m.space)?;
    Ok(m.product(&mw, AcceptFrom::Left)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Method1Options {
    /// Only count accepting states with `t_rel = 0`, i.e. at a sampling instant.
    pub sample_instant_only: bool,
}

impl Default for Method1Options {
    fn default() -> Self {
        Method1Options { sample_instant_only: true }
    }
}

/// What the product exploration found.
#[derive(Debug, Clone)]
pub struct ProductReach {
    /// Reachable `(accepting model location, samples consumed)` pairs meeting the options.
    pub accepting: Vec<(String, usize)>,
    /// `reached[j]`: some product state has consumed exactly `j` samples.
    pub reached: Vec<bool>,
    pub saturated: bool,
}

pub fn product_reach(m: &Lha, w: &TimedWord, cfg: &MonitorConfig, opts: Method1Options) -> Result<ProductReach, TranslateError> {
    let p = word_product(m, w)?;
    let width = w.len() + 1;
    let engine = Engine::new(&p)?;
    let starts: Vec<(usize, Polyhedron)> = initial_states(&p)?
        .into_iter()
        .map(|s| (p.location_index(&s.location).expect("own id"), s.region))
        .collect();
    let horizon = w.samples().last().expect("nonempty").timestamp.clone();
    let cap = cfg.cap_for(m).saturating_mul(width);
    let reach = engine.reach(&starts, &horizon, cap);

    let rel = engine.ext.index_of(T_REL).expect("product has t_rel");
    let at_sample = LinearConstraint::var_eq(engine.ext.dim(), rel, Rational::zero());
    let mut accepting = Vec::new();
    let mut reached = vec![false; width];
    for node in &reach.nodes {
        let (l, j) = (node.location / width, node.location % width);
        reached[j] = true;
        if !m.locations[l].accepting || accepting.iter().any(|(id, k)| *k == j && *id == m.locations[l].id) {
            continue;
        }
        let hit = !opts.sample_instant_only || !node.region.add_constraints(std::slice::from_ref(&at_sample))?.is_empty();
        if hit {
            accepting.push((m.locations[l].id.clone(), j));
        }
    }
    accepting.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    Ok(ProductReach { accepting, reached, saturated: reach.saturated })
}

/// Method I verdicts per index. On saturation every index not shown accepting is inconclusive.
pub fn method1_verdict_with(
    m: &Lha,
    w: &TimedWord,
    cfg: &MonitorConfig,
    opts: Method1Options,
) -> Result<MonitorVerdict, TranslateError> {
    if w.space() != &m.space {
        return Err(MonitorError::VariableMismatch { log: w.space().names().join(","), model: m.space.names().join(",") }.into());
    }
    if w.is_empty() {
        return Ok(MonitorVerdict::default());
    }
    let r = product_reach(m, w, cfg, opts)?;
    let mut out = MonitorVerdict::default();
    for (k, s) in w.samples().iter().enumerate() {
        let i = k + 1;
        let verdict = if r.accepting.iter().any(|(_, j)| *j == i) {
            Verdict::Accepted
        } else if r.saturated {
            Verdict::Inconclusive
        } else {
            Verdict::Rejected
        };
        out.indices.push(IndexVerdict { index: i, timestamp: s.timestamp.clone(), verdict, witness: None });
    }
    if r.saturated {
        out.saturated_intervals = (1..=w.len()).collect();
        out.diagnostics.push("product exploration hit the cap; unaccepted indices are inconclusive".into());
    } else if let Some(i) = (1..=w.len()).find(|&i| !r.reached[i]) {
        let t = &w.samples()[i - 1].timestamp;
        out.diagnostics.push(format!(
            "log inconsistent with bounding model at index {i} (t = {t}): no behaviour of the model matches the samples so far"
        ));
    }
    Ok(out)
}

pub fn method1_verdict(m: &Lha, w: &TimedWord, cfg: &MonitorConfig) -> Result<MonitorVerdict, TranslateError> {
    method1_verdict_with(m, w, cfg, Method1Options::default())
}
