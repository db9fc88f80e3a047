//! CPLEX LP-format export of a model.

use std::fmt::Write;

use super::model::{IlpModel, Sense};
use crate::paql::Direction;
use crate::EPSILON;

fn term(out: &mut String, first: &mut bool, coeff: f64, var: &str) {
    if coeff == 0.0 {
        return;
    }
    let sign = if coeff < 0.0 { "-" } else { "+" };
    let mag = coeff.abs();
    if *first {
        if coeff < 0.0 {
            out.push_str(" -");
        }
    } else {
        let _ = write!(out, " {sign}");
    }
    if mag == 1.0 {
        let _ = write!(out, " {var}");
    } else {
        let _ = write!(out, " {mag} {var}");
    }
    *first = false;
}

fn linear(out: &mut String, coeffs: impl IntoIterator<Item = (f64, String)>) {
    let mut first = true;
    for (c, v) in coeffs {
        term(out, &mut first, c, &v);
    }
    if first {
        out.push_str(" 0 x0");
    }
}

fn relation(sense: Sense, rhs: f64) -> (&'static str, f64) {
    match sense {
        Sense::Le => ("<=", rhs),
        Sense::Lt => ("<=", rhs - EPSILON),
        Sense::Ge => (">=", rhs),
        Sense::Gt => (">=", rhs + EPSILON),
        Sense::Eq => ("=", rhs),
    }
}

/// Renders the model in LP format. Variables are named `x{j}` in model order;
/// no-goods over general integers use indicator binaries `y{j}`.
pub fn to_lp_format(model: &IlpModel) -> String {
    let n = model.variables.len();
    let x = |j: usize| format!("x{j}");
    let mut out = String::new();
    let _ = writeln!(out, "\\ relation: {}", model.relation);
    for (j, v) in model.variables.iter().enumerate() {
        let _ = writeln!(out, "\\ x{j} = tuple {}", v.tuple);
    }

    match &model.objective {
        Some(o) => {
            out.push_str(match o.direction {
                Direction::Maximize => "Maximize\n obj:",
                Direction::Minimize => "Minimize\n obj:",
            });
            linear(&mut out, o.coeffs.iter().enumerate().map(|(j, &c)| (c, x(j))));
        }
        None => out.push_str("Minimize\n obj: 0 x0"),
    }
    out.push_str("\nSubject To\n");

    let ones = || (0..n).map(|j| (1.0, x(j)));
    for r in &model.rows {
        let _ = write!(out, " {}:", r.name);
        linear(&mut out, r.coeffs.iter().enumerate().map(|(j, &c)| (c, x(j))));
        let (op, rhs) = relation(r.sense, r.rhs);
        let _ = writeln!(out, " {op} {rhs}");
    }
    let (lo, hi) = model.count_bounds;
    if lo > 0 {
        out.push_str(" card_lo:");
        linear(&mut out, ones());
        let _ = writeln!(out, " >= {lo}");
    }
    if let Some(hi) = hi {
        out.push_str(" card_hi:");
        linear(&mut out, ones());
        let _ = writeln!(out, " <= {hi}");
    }

    let binary = model.is_binary();
    let indicators = !binary && !model.nogoods.is_empty();
    for (i, ng) in model.nogoods.iter().enumerate() {
        if binary {
            let row = model.nogood_row(ng);
            let _ = write!(out, " nogood{i}:");
            linear(&mut out, row.coeffs.iter().enumerate().map(|(j, &c)| (c, x(j))));
            let _ = writeln!(out, " >= {}", row.rhs);
        } else {
            let mut inside = 0usize;
            let _ = write!(out, " nogood{i}:");
            linear(
                &mut out,
                model.variables.iter().enumerate().map(|(j, v)| {
                    if ng.support.contains(&v.tuple) {
                        inside += 1;
                        (-1.0, format!("y{j}"))
                    } else {
                        (1.0, format!("y{j}"))
                    }
                }),
            );
            let _ = writeln!(out, " >= {}", 1.0 - inside as f64);
        }
    }
    if indicators {
        for (j, v) in model.variables.iter().enumerate() {
            let _ = writeln!(out, " link_lo{j}: x{j} - y{j} >= 0");
            let _ = writeln!(out, " link_hi{j}: x{j} - {} y{j} <= 0", v.upper);
        }
    }

    out.push_str("Bounds\n");
    for (j, v) in model.variables.iter().enumerate() {
        let _ = writeln!(out, " 0 <= x{j} <= {}", v.upper);
    }
    if n > 0 {
        out.push_str("Generals\n");
        let names: Vec<String> = (0..n).map(x).collect();
        let _ = writeln!(out, " {}", names.join(" "));
    }
    if indicators {
        out.push_str("Binaries\n");
        let names: Vec<String> = (0..n).map(|j| format!("y{j}")).collect();
        let _ = writeln!(out, " {}", names.join(" "));
    }
    out.push_str("End\n");
    out
}
