//! Replayable runs behind accepted indices.

use std::sync::Arc;

use serde_json::{json, Value};

use crate::geometry::{Polyhedron, Relation};
use crate::log::TimedWord;
use crate::model::Lha;
use crate::numeric::Rational;

use super::reach::{Engine, Reach, DELTA};

#[derive(Debug, Clone)]
pub struct WitnessStep {
    /// The sample closing the interval this step belongs to.
    pub index: usize,
    pub location: String,
    /// Edge (index into the model's edge list) taken to enter this step.
    pub edge: Option<usize>,
    /// Valuations reachable during this step.
    pub region: Polyhedron,
    ext_region: Polyhedron,
}

#[derive(Debug, Clone)]
pub struct Witness {
    pub steps: Vec<WitnessStep>,
}

#[derive(Debug)]
pub(crate) struct History {
    prev: Option<Arc<History>>,
    steps: Vec<WitnessStep>,
}

impl History {
    pub fn from_chain(engine: &Engine, reach: &Reach, node: usize, index: usize, prev: Option<Arc<History>>) -> History {
        let steps = reach
            .chain(node)
            .into_iter()
            .map(|id| {
                let n = &reach.nodes[id];
                WitnessStep {
                    index,
                    location: engine.model.locations[n.location].id.clone(),
                    edge: n.parent.map(|(_, e)| e),
                    region: n.region.eliminate(&[DELTA]).expect("delta present"),
                    ext_region: n.region.clone(),
                }
            })
            .collect();
        History { prev, steps }
    }

    pub fn witness(&self) -> Witness {
        let mut parts = vec![&self.steps];
        let mut cur = self.prev.as_deref();
        while let Some(h) = cur {
            parts.push(&h.steps);
            cur = h.prev.as_deref();
        }
        Witness { steps: parts.into_iter().rev().flatten().cloned().collect() }
    }
}

impl Witness {
    /// Recomputes every step from its predecessor and checks it against the stored region,
    /// that every region is nonempty, that each sample is hit, and that the run ends accepting.
    pub fn replay(&self, m: &Lha, w: &TimedWord) -> Result<(), String> {
        let engine = Engine::new(m).map_err(|e| e.to_string())?;
        let last_index = self.steps.last().ok_or("empty witness")?.index;
        let mut prev_loc: Option<usize> = None;
        let mut prev_region: Option<Polyhedron> = None;
        let mut k = 0;
        for i in 1..=last_index {
            let sample = w.samples().get(i - 1).ok_or(format!("witness mentions index {i} beyond the log"))?;
            let before = if i == 1 { Rational::zero() } else { w.samples()[i - 2].timestamp.clone() };
            let d = &sample.timestamp - &before;
            let cut = engine.delta_bound(Relation::Le, &d);
            let interval: Vec<&WitnessStep> = self.steps[k..].iter().take_while(|s| s.index == i).collect();
            if interval.is_empty() {
                return Err(format!("no steps for interval {i}"));
            }
            k += interval.len();
            for (j, step) in interval.iter().enumerate() {
                let loc = m.location_index(&step.location).ok_or(format!("unknown location {}", step.location))?;
                let entry = match (j, step.edge) {
                    (0, None) => {
                        let start = if i == 1 {
                            super::initial_states(m)
                                .map_err(|e| e.to_string())?
                                .into_iter()
                                .find(|s| s.location == step.location)
                                .ok_or(format!("{} has no initial states", step.location))?
                                .region
                        } else {
                            if prev_loc != Some(loc) {
                                return Err(format!("interval {i} starts away from the previous sample's location"));
                            }
                            let p = engine.ext_point(&w.samples()[i - 2].values, Rational::zero());
                            Polyhedron::point(engine.ext.clone(), &p).map_err(|e| e.to_string())?
                        };
                        start.intersect(&engine.invariants[loc]).map_err(|e| e.to_string())?
                    }
                    (j, Some(e)) if j > 0 => {
                        let edge = &m.edges[e];
                        if edge.source != interval[j - 1].location || edge.target != step.location {
                            return Err(format!("edge {e} does not connect the steps at interval {i}"));
                        }
                        engine
                            .jump(e, prev_region.as_ref().expect("previous step"))
                            .ok_or(format!("edge {e} is not enabled at interval {i}"))?
                    }
                    _ => return Err(format!("malformed step order at interval {i}")),
                };
                let region = engine.elapse(loc, &entry, &cut);
                if region.is_empty() || !region.equals(&step.ext_region) {
                    return Err(format!("step at `{}` in interval {i} does not replay", step.location));
                }
                prev_loc = Some(loc);
                prev_region = Some(region);
            }
            let hit = engine.ext_point(&sample.values, d.clone());
            if !prev_region.as_ref().expect("nonempty interval").contains(&hit) {
                return Err(format!("sample {i} is not reached"));
            }
        }
        if k != self.steps.len() {
            return Err("steps out of order".into());
        }
        let end = prev_loc.expect("at least one step");
        if !m.locations[end].accepting {
            return Err(format!("run ends in non-accepting `{}`", m.locations[end].id));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.steps
                .iter()
                .map(|s| {
                    json!({
                        "i": s.index,
                        "location": s.location,
                        "edge": s.edge,
                        "region": s.region.display(),
                    })
                })
                .collect(),
        )
    }
}
