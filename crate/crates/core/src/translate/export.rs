//! Text export of the product automaton and its reachability query.
//!
//! The dialect follows the shape of PHAVer input files:
//!
//! ```text
//! // hamon-export 1
//! automaton product
//! contr_var : x1, x2, t_abs, t_rel;
//! synclabs : sample, step;
//! loc l0__wl0 : while t_abs <= 0 wait { t_abs' == 1 & t_rel' == 1 & x1' >= 15/2 & ... };
//!   when x1 == 40 & x2 == 35 & t_abs == 0 sync sample do { t_rel' == 0 } goto l0__wl1;
//! end
//! initially : l0__wl0 & x1 == 40 & x2 == 35 & t_abs == 0 & t_rel == 0;
//! accepting : l0_bad__wl0, ...;
//! reach : (l0_bad__wl1 | ...) & t_rel == 0;
//! ```
//!
//! Updates list the new value of each reset variable as primed bounds; variables
//! that are not mentioned keep their value. Lines starting with `//` are comments.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write;

use crate::geometry::{write_linear, Interval, IntervalUpdate, LinearConstraint, Polyhedron, Relation, VarSpace};
use crate::log::TimedWord;
use crate::model::{parse_constraint, Edge, Lha, Location};
use crate::numeric::Rational;

use super::{word_product, TranslateError, T_REL};

pub const EXPORT_HEADER: &str = "// hamon-export 1";

fn sanitize(id: &str) -> String {
    let inner = id.strip_prefix('(').and_then(|s| s.strip_suffix(')')).unwrap_or(id);
    let mut out: String = inner
        .split('.')
        .collect::<Vec<_>>()
        .join("__")
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
        .collect();
    if out.is_empty() || out.starts_with(|c: char| c.is_ascii_digit()) {
        out.insert(0, 'l');
    }
    out
}

/// Leading coefficient made positive, and one for single-variable bounds.
fn constraint_text(c: &LinearConstraint, names: &[String]) -> String {
    let c = c.normalized();
    let mut s = String::new();
    write_linear(&mut s, &c.coefficients, names).expect("string write");
    let rel = match c.relation {
        Relation::Le => "<=",
        Relation::Eq => "==",
        Relation::Ge => ">=",
    };
    let _ = write!(s, " {rel} {}", c.bound);
    s
}

fn polyhedron_text(p: &Polyhedron) -> String {
    if p.is_empty() {
        return "false".into();
    }
    let cs = p.constraints();
    if cs.is_empty() {
        return "true".into();
    }
    cs.iter().map(|c| constraint_text(c, p.space().names())).collect::<Vec<_>>().join(" & ")
}

fn update_text(u: &IntervalUpdate) -> String {
    if u.is_identity() {
        return "true".into();
    }
    u.iter()
        .map(|(v, iv)| {
            if iv.lo == iv.hi {
                format!("{v}' == {}", iv.lo)
            } else {
                format!("{v}' >= {} & {v}' <= {}", iv.lo, iv.hi)
            }
        })
        .collect::<Vec<_>>()
        .join(" & ")
}

/// The product of `m` with the word automaton of `w`, and the query for accepting
/// model locations at sampling instants. Output is byte-stable for fixed input.
pub fn export_external(m: &Lha, w: &TimedWord) -> Result<String, TranslateError> {
    let p = word_product(m, w)?;
    let model_edges = m.edges.len() * (w.len() + 1);

    let mut names: HashMap<&str, String> = HashMap::new();
    let mut used = HashSet::new();
    for l in &p.locations {
        let base = sanitize(&l.id);
        let mut name = base.clone();
        let mut k = 1;
        while !used.insert(name.clone()) {
            k += 1;
            name = format!("{base}_{k}");
        }
        names.insert(l.id.as_str(), name);
    }

    let mut out = String::new();
    let _ = writeln!(out, "{EXPORT_HEADER}");
    let _ = writeln!(
        out,
        "// {} model locations x {} word locations; t_abs is absolute time, t_rel the time since the last sample",
        m.locations.len(),
        w.len() + 1
    );
    let _ = writeln!(out, "automaton product");
    let _ = writeln!(out, "contr_var : {};", p.space.names().join(", "));
    let _ = writeln!(out, "synclabs : sample, step;");
    let outgoing = p.outgoing();
    for (i, l) in p.locations.iter().enumerate() {
        let _ = writeln!(out, "loc {} : while {} wait {{ {} }};", names[l.id.as_str()], polyhedron_text(&l.invariant), polyhedron_text(&l.flow));
        for &k in &outgoing[i] {
            let e = &p.edges[k];
            let label = if k < model_edges { "step" } else { "sample" };
            let _ = writeln!(
                out,
                "  when {} sync {label} do {{ {} }} goto {};",
                polyhedron_text(&e.guard),
                update_text(&e.update),
                names[e.target.as_str()]
            );
        }
    }
    let _ = writeln!(out, "end");
    for l in &p.locations {
        if !l.initial.is_empty() {
            let _ = writeln!(out, "initially : {} & {};", names[l.id.as_str()], polyhedron_text(&l.initial));
        }
    }
    let accepting: Vec<&str> =
        p.locations.iter().filter(|l| l.accepting).map(|l| names[l.id.as_str()].as_str()).collect();
    let _ = writeln!(out, "accepting : {};", accepting.join(", "));
    if accepting.is_empty() {
        let _ = writeln!(out, "reach : false;");
    } else {
        let _ = writeln!(out, "reach : ({}) & {T_REL} == 0;", accepting.join(" | "));
    }
    Ok(out)
}

fn conjunction(text: &str, space: &VarSpace, line: usize) -> Result<Polyhedron, TranslateError> {
    let err = |message: String| TranslateError::Parse { line, message };
    let mut cs = Vec::new();
    for part in text.split('&') {
        cs.extend(parse_constraint(part.trim(), space).map_err(|e| err(e.to_string()))?);
    }
    Polyhedron::from_constraints(space.clone(), &cs).map_err(|e| err(e.to_string()))
}

fn parse_update(text: &str, space: &VarSpace, line: usize) -> Result<IntervalUpdate, TranslateError> {
    let err = |message: String| TranslateError::Parse { line, message };
    let mut bounds: BTreeMap<String, (Option<Rational>, Option<Rational>)> = BTreeMap::new();
    if text.trim() == "true" {
        return Ok(IntervalUpdate::identity());
    }
    let derivs = space.derivatives();
    for part in text.split('&') {
        for c in parse_constraint(part.trim(), &derivs).map_err(|e| err(e.to_string()))? {
            let vars: Vec<usize> = (0..c.dim()).filter(|&k| !c.coefficients[k].is_zero()).collect();
            let [k] = vars[..] else {
                return Err(err(format!("update `{}` must bound a single variable", part.trim())));
            };
            let value = &c.bound / &c.coefficients[k];
            let rel = if c.coefficients[k].is_negative() {
                match c.relation {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                }
            } else {
                c.relation
            };
            let entry = bounds.entry(space.names()[k].clone()).or_default();
            if matches!(rel, Relation::Ge | Relation::Eq) {
                entry.0 = Some(value.clone());
            }
            if matches!(rel, Relation::Le | Relation::Eq) {
                entry.1 = Some(value);
            }
        }
    }
    let mut map = BTreeMap::new();
    for (v, (lo, hi)) in bounds {
        match (lo, hi) {
            (Some(lo), Some(hi)) => {
                map.insert(v, Interval::new(lo, hi));
            }
            _ => return Err(err(format!("update of `{v}` needs both bounds"))),
        }
    }
    Ok(IntervalUpdate(map))
}

/// Splits `head : rest;` and checks the trailing semicolon.
fn field<'a>(text: &'a str, head: &str, line: usize) -> Result<Option<&'a str>, TranslateError> {
    let Some(rest) = text.strip_prefix(head) else { return Ok(None) };
    let rest = rest.trim_start();
    let Some(rest) = rest.strip_prefix(':') else { return Ok(None) };
    let body = rest.trim().strip_suffix(';').ok_or(TranslateError::Parse { line, message: "missing `;`".into() })?;
    Ok(Some(body.trim()))
}

fn between<'a>(text: &'a str, open: &str, close: &str, line: usize) -> Result<(&'a str, &'a str), TranslateError> {
    let err = || TranslateError::Parse { line, message: format!("expected `{open}` … `{close}`") };
    let start = text.find(open).ok_or_else(err)?;
    let end = text[start + open.len()..].find(close).ok_or_else(err)? + start + open.len();
    Ok((&text[start + open.len()..end], &text[end + close.len()..]))
}

/// Reads back an automaton written by [`export_external`].
pub fn parse_export(text: &str) -> Result<Lha, TranslateError> {
    let mut space: Option<VarSpace> = None;
    let mut locations: Vec<Location> = Vec::new();
    let mut edges: Vec<Edge> = Vec::new();
    let mut initial: Vec<(String, Polyhedron, usize)> = Vec::new();
    let mut accepting: Vec<String> = Vec::new();
    let mut ended = false;
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let t = raw.trim();
        if t.is_empty() || t.starts_with("//") || t.starts_with("automaton ") || t.starts_with("synclabs") {
            continue;
        }
        let err = |message: &str| TranslateError::Parse { line, message: message.to_string() };
        if t == "end" {
            ended = true;
            continue;
        }
        if let Some(vars) = field(t, "contr_var", line)? {
            let names: Vec<&str> = vars.split(',').map(str::trim).collect();
            space = Some(VarSpace::new(names).map_err(|e| err(&e.to_string()))?);
            continue;
        }
        let sp = space.as_ref().ok_or_else(|| err("`contr_var` must come first"))?;
        if let Some(rest) = t.strip_prefix("loc ") {
            let (id, rest) = rest.split_once(':').ok_or_else(|| err("expected `loc <id> :`"))?;
            let (inv, rest) = between(rest, "while", "wait", line)?;
            let (flow, _) = between(rest, "{", "}", line)?;
            locations.push(Location {
                id: id.trim().to_string(),
                flow: conjunction(flow, &sp.derivatives(), line)?,
                invariant: conjunction(inv, sp, line)?,
                initial: Polyhedron::empty(sp.clone()),
                accepting: false,
            });
        } else if let Some(rest) = t.strip_prefix("when ") {
            let source = locations.last().ok_or_else(|| err("transition outside a location"))?.id.clone();
            let (guard, rest) = rest.split_once(" sync ").ok_or_else(|| err("expected `sync`"))?;
            let (update, rest) = between(rest, "do {", "}", line)?;
            let target = rest.trim().strip_prefix("goto").ok_or_else(|| err("expected `goto`"))?;
            let target = target.trim().strip_suffix(';').ok_or_else(|| err("missing `;`"))?.trim();
            edges.push(Edge {
                source,
                target: target.to_string(),
                guard: conjunction(guard, sp, line)?,
                update: parse_update(update, sp, line)?,
            });
        } else if let Some(body) = field(t, "initially", line)? {
            let (id, region) = body.split_once('&').unwrap_or((body, "true"));
            initial.push((id.trim().to_string(), conjunction(region, sp, line)?, line));
        } else if let Some(body) = field(t, "accepting", line)? {
            accepting = body.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
        } else if field(t, "reach", line)?.is_some() {
            if !ended {
                return Err(err("`reach` before `end`"));
            }
        } else {
            return Err(err("unrecognised line"));
        }
    }
    let space = space.ok_or(TranslateError::Parse { line: 0, message: "no `contr_var` declaration".into() })?;
    for (id, region, line) in initial {
        let l = locations
            .iter_mut()
            .find(|l| l.id == id)
            .ok_or(TranslateError::Parse { line, message: format!("unknown location `{id}`") })?;
        l.initial = region;
    }
    for id in accepting {
        let l = locations
            .iter_mut()
            .find(|l| l.id == id)
            .ok_or(TranslateError::Parse { line: 0, message: format!("unknown accepting location `{id}`") })?;
        l.accepting = true;
    }
    Ok(Lha::new(space, locations, edges)?)
}
