//! JSON (stable) and table (human) renderings.

use num_bigint::BigUint;
use paql_core::catalog::Relation;
use paql_core::{CardinalityBounds, SolveOutcome};
use serde_json::{json, Value};

use crate::Method;

fn method_name(m: Method) -> &'static str {
    match m {
        Method::Ilp => "ilp",
        Method::Local => "local",
        Method::Brute => "brute",
    }
}

pub(crate) fn outcome_json(
    method: Method,
    out: &SolveOutcome,
    bounds: &CardinalityBounds,
    rel: &Relation,
) -> String {
    let mut v = serde_json::to_value(out).expect("outcome serializes");
    v["method"] = json!(method_name(method));
    v["dataset"] = json!(rel.name());
    v["bounds"] = json!({"lower": bounds.lower, "upper": bounds.upper});
    serde_json::to_string_pretty(&v).expect("json")
}

pub(crate) fn outcome_table(out: &SolveOutcome, bounds: &CardinalityBounds, rel: &Relation) -> String {
    let mut lines = vec![format!(
        "status: {}",
        serde_json::to_value(out.status).ok().and_then(|s| s.as_str().map(String::from)).unwrap_or_default()
    )];
    if let Some(v) = out.objective_value {
        lines.push(format!("objective: {v}"));
    }
    lines.push(format!(
        "bounds: [{}, {}]",
        bounds.lower,
        bounds.upper.map_or("inf".to_string(), |u| u.to_string())
    ));
    if let Some(p) = &out.package {
        let header: Vec<String> = std::iter::once("tuple".to_string())
            .chain(std::iter::once("mult".to_string()))
            .chain(rel.schema().columns().iter().map(|c| c.name.clone()))
            .collect();
        let mut rows = vec![header];
        for (id, m) in p.iter() {
            let mut row = vec![id.to_string(), m.to_string()];
            if let Some(r) = rel.row(id) {
                row.extend(r.values.iter().map(|v| v.to_string()));
            }
            rows.push(row);
        }
        let width: Vec<usize> = (0..rows[0].len())
            .map(|c| rows.iter().map(|r| r.get(c).map_or(0, |s| s.len())).max().unwrap_or(0))
            .collect();
        for r in rows {
            let cells: Vec<String> = r
                .iter()
                .zip(&width)
                .map(|(s, w)| format!("{s:<w$}"))
                .collect();
            lines.push(cells.join("  ").trim_end().to_string());
        }
    }
    let s = &out.stats;
    lines.push(format!(
        "nodes {}  iterations {}  restarts {}  disjuncts {}{}  {:.1?}",
        s.nodes,
        s.iterations,
        s.restarts,
        s.disjuncts,
        if s.timed_out { "  (timed out)" } else { "" },
        s.elapsed
    ));
    lines.join("\n")
}

fn upper_text(b: &CardinalityBounds) -> Value {
    b.upper.map_or(Value::Null, |u| json!(u))
}

pub(crate) fn bounds_json(b: &CardinalityBounds, n: u64, space: Option<&BigUint>) -> String {
    let mut v = json!({
        "lower": b.lower,
        "upper": upper_text(b),
        "candidates": n,
        "perAtom": b.per_atom,
    });
    if let Some(s) = space {
        // may exceed every JSON number type
        v["spaceSize"] = json!(s.to_string());
    }
    serde_json::to_string_pretty(&v).expect("json")
}

pub(crate) fn bounds_table(b: &CardinalityBounds, n: u64, space: Option<&BigUint>) -> String {
    let mut lines = vec![
        format!("lower: {}", b.lower),
        format!("upper: {}", b.upper.map_or("unbounded".into(), |u| u.to_string())),
        format!("candidates: {n}"),
    ];
    if let Some(s) = space {
        lines.push(format!("space: {s}"));
    }
    for a in &b.per_atom {
        lines.push(format!(
            "  {}: [{}, {}]",
            a.atom,
            a.lower,
            a.upper.map_or("inf".into(), |u| u.to_string())
        ));
    }
    lines.join("\n")
}
