//! Adaptive-cruise-control benchmark automata.

use std::fmt;
use std::str::FromStr;

use crate::geometry::{IntervalUpdate, Polyhedron, VarSpace};
use crate::numeric::Rational;

use super::{parse_polyhedron, Edge, Lha, Location, ModelError, SafetySpec};

/// Names accepted by [`BuiltinSelector::from_str`].
pub fn builtin_names() -> &'static [&'static str] {
    &["ACCI", "ACCD:<dim 2..7>[:<eps>]", "ACCC:<dim 5|10|15>"]
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BuiltinSelector {
    Acci,
    Accd { dim: usize, eps: Rational },
    Accc { dim: usize },
}

impl FromStr for BuiltinSelector {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let unsupported = || ModelError::UnsupportedBuiltin(s.to_string());
        let parts: Vec<&str> = s.trim().split(':').collect();
        let dim = |i: usize| parts.get(i).and_then(|d| d.parse::<usize>().ok()).ok_or_else(unsupported);
        let sel = match parts[0].to_ascii_uppercase().as_str() {
            "ACCI" if parts.len() == 1 => BuiltinSelector::Acci,
            "ACCD" if (2..=3).contains(&parts.len()) => {
                let eps = match parts.get(2) {
                    Some(e) => e.parse().map_err(|_| unsupported())?,
                    None => Rational::new(9, 10).expect("nonzero"),
                };
                BuiltinSelector::Accd { dim: dim(1)?, eps }
            }
            "ACCC" if parts.len() == 2 => BuiltinSelector::Accc { dim: dim(1)? },
            _ => return Err(unsupported()),
        };
        match &sel {
            BuiltinSelector::Accd { dim, .. } if !(2..=7).contains(dim) => Err(unsupported()),
            BuiltinSelector::Accc { dim } if ![5, 10, 15].contains(dim) => Err(unsupported()),
            _ => Ok(sel),
        }
    }
}

impl fmt::Display for BuiltinSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BuiltinSelector::Acci => f.write_str("ACCI"),
            BuiltinSelector::Accd { dim, eps } => write!(f, "ACCD:{dim}:{eps}"),
            BuiltinSelector::Accc { dim } => write!(f, "ACCC:{dim}"),
        }
    }
}

/// The model to monitor against: the violation automaton for ACCI and ACCD, the
/// benchmark as published (it already has an accepting `unsafe` location) for ACCC.
pub fn builtin_model(sel: &BuiltinSelector) -> Result<Lha, ModelError> {
    let (base, spec) = builtin_base(sel)?;
    let Some(spec) = spec else {
        return Ok(base);
    };
    let mut m = base.against_safety(&spec)?;
    if *sel == BuiltinSelector::Acci {
        let names = [("l0_bad", "l2"), ("l1_bad", "l3")];
        m.rename_locations(&names.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect());
    }
    Ok(m)
}

/// The bounding model and, where the benchmark has one, its safety specification.
pub fn builtin_base(sel: &BuiltinSelector) -> Result<(Lha, Option<SafetySpec>), ModelError> {
    match sel {
        BuiltinSelector::Acci => acci(),
        BuiltinSelector::Accd { dim, eps } => accd(*dim, eps),
        BuiltinSelector::Accc { dim } => accc(*dim).map(|m| (m, None)),
    }
}

fn vars(dim: usize) -> VarSpace {
    VarSpace::new((1..=dim).map(|i| format!("x{i}"))).expect("distinct names")
}

struct Builder {
    space: VarSpace,
    locations: Vec<Location>,
    edges: Vec<Edge>,
}

impl Builder {
    fn new(space: VarSpace) -> Builder {
        Builder { space, locations: Vec::new(), edges: Vec::new() }
    }

    fn location(&mut self, id: &str, flow: &[String], invariant: &[String], initial: Option<&[String]>) -> Result<(), ModelError> {
        let initial = match initial {
            Some(cs) => parse_polyhedron(cs, &self.space)?,
            None => Polyhedron::empty(self.space.clone()),
        };
        self.locations.push(Location {
            id: id.to_string(),
            flow: parse_polyhedron(flow, &self.space.derivatives())?,
            invariant: parse_polyhedron(invariant, &self.space)?,
            initial,
            accepting: false,
        });
        Ok(())
    }

    fn edge(&mut self, from: &str, to: &str, guard: &[String]) -> Result<(), ModelError> {
        self.edges.push(Edge {
            source: from.to_string(),
            target: to.to_string(),
            guard: parse_polyhedron(guard, &self.space)?,
            update: IntervalUpdate::identity(),
        });
        Ok(())
    }

    fn finish(self) -> Result<Lha, ModelError> {
        Lha::new(self.space, self.locations, self.edges)
    }
}

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

fn acci() -> Result<(Lha, Option<SafetySpec>), ModelError> {
    let space = vars(2);
    let mut b = Builder::new(space.clone());
    b.location(
        "l0",
        &strings(&["7.5 <= x1' <= 8.5", "8 <= x2' <= 9"]),
        &[],
        Some(&strings(&["x1 = 40", "x2 = 35"])),
    )?;
    b.location("l1", &strings(&["11 <= x1' <= 13", "9 <= x2' <= 11"]), &[], None)?;
    b.edge("l0", "l1", &strings(&["x1 - x2 <= 4"]))?;
    b.edge("l1", "l0", &strings(&["x1 - x2 >= 4"]))?;
    let spec = SafetySpec::parse(space, &["x1 - x2 > 0"])?;
    Ok((b.finish()?, Some(spec)))
}

fn accd_mode_id(mode: usize, dim: usize) -> String {
    if mode == 0 {
        return "cruise".into();
    }
    if dim == 2 {
        return "recovery".into();
    }
    let pairs: Vec<String> = (0..dim - 1).filter(|i| mode & (1 << i) != 0).map(|i| (i + 1).to_string()).collect();
    format!("rec{}", pairs.join("_"))
}

/// Modes are the subsets of follower pairs currently recovering their distance.
fn accd(dim: usize, eps: &Rational) -> Result<(Lha, Option<SafetySpec>), ModelError> {
    let space = vars(dim);
    let mut b = Builder::new(space.clone());
    let pairs = dim - 1;
    for mode in 0..(1usize << pairs) {
        let mut flow = vec!["x1' = 36".to_string()];
        let mut inv = Vec::new();
        for i in 2..=dim {
            flow.push(format!("x{i}' >= 0"));
        }
        for p in 0..pairs {
            let (i, j) = (p + 1, p + 2);
            if mode & (1 << p) != 0 {
                flow.push(format!("x{i}' - x{j}' - {eps} <= 1"));
                flow.push(format!("x{i}' - x{j}' - {eps} >= -1"));
                inv.push(format!("x{i} - x{j} <= 3"));
            } else {
                flow.push(format!("x{i}' - x{j}' <= 1"));
                flow.push(format!("x{i}' - x{j}' >= -1"));
                inv.push(format!("x{i} - x{j} >= 1"));
            }
        }
        let init: Vec<String> = (1..=dim).map(|i| format!("x{i} = {}", 3 * (dim - i))).collect();
        b.location(&accd_mode_id(mode, dim), &flow, &inv, (mode == 0).then_some(init.as_slice()))?;
    }
    for mode in 0..(1usize << pairs) {
        for p in 0..pairs {
            let (i, j) = (p + 1, p + 2);
            let other = mode ^ (1 << p);
            let guard = if mode & (1 << p) == 0 {
                format!("x{i} - x{j} <= 2")
            } else {
                format!("x{i} - x{j} >= 2")
            };
            b.edge(&accd_mode_id(mode, dim), &accd_mode_id(other, dim), &[guard])?;
        }
    }
    let atoms: Vec<String> = (1..dim).map(|i| format!("x{i} - x{} > 0", i + 1)).collect();
    let spec = SafetySpec::parse(space, &atoms)?;
    Ok((b.finish()?, Some(spec)))
}

fn half(n: usize) -> String {
    if n.is_multiple_of(2) {
        (n / 2).to_string()
    } else {
        format!("{n}/2")
    }
}

fn accc(dim: usize) -> Result<Lha, ModelError> {
    let space = vars(dim);
    let mut b = Builder::new(space);
    // Rates are written in halves: 8 + k/2 is half(16 + k).
    let cruise_flow: Vec<String> = (1..=dim).map(|i| format!("x{i}' = {}", half(16 + (i - 1)))).collect();
    let cruise_inv: Vec<String> = (1..dim).map(|i| format!("2 <= x{i} - x{} <= 10", i + 1)).collect();
    let init: Vec<String> = (1..=dim).map(|i| format!("x{i} = {}", 40 - 5 * (i as i64 - 1))).collect();
    b.location("cruise", &cruise_flow, &cruise_inv, Some(&init))?;
    let rec_inv: Vec<String> = (1..dim).map(|i| format!("0 <= x{i} - x{} <= 10", i + 1)).collect();
    for j in 1..dim {
        let flow: Vec<String> = (1..=dim)
            .map(|i| {
                let rate = if i <= j {
                    "12".to_string()
                } else if i == j + 1 {
                    "10".to_string()
                } else {
                    let k = i - j - 2;
                    half(16 + (j - 1) + 2 * k)
                };
                format!("x{i}' = {rate}")
            })
            .collect();
        b.location(&format!("rec{j}"), &flow, &rec_inv, None)?;
    }
    b.location("unsafe", &[], &[], None)?;
    for j in 1..dim {
        let rec = format!("rec{j}");
        b.edge("cruise", &rec, &[format!("x{j} - x{} <= 4", j + 1)])?;
        b.edge(&rec, "cruise", &[format!("x{j} - x{} >= 4", j + 1)])?;
        b.edge(&rec, "unsafe", &[format!("x{j} - x{} <= 1", j + 1)])?;
    }
    let mut m = b.finish()?;
    if let Some(u) = m.locations.iter_mut().find(|l| l.id == "unsafe") {
        u.accepting = true;
    }
    Ok(m)
}
