//! Random small instances for property tests.

use proptest::prelude::*;

use crate::catalog::{ColumnKind, Relation, Schema, Value};
use crate::paql::{parse, validate, ValidatedQuery};

const COLS: [&str; 3] = ["a", "b", "c"];

pub(crate) fn relation(rows: &[[i32; 3]]) -> Relation {
    let schema = Schema::new(
        COLS.iter()
            .map(|c| (c.to_string(), ColumnKind::Numeric))
            .collect(),
    )
    .unwrap();
    let rows = rows
        .iter()
        .map(|r| r.iter().map(|&v| Value::Number(v as f64)).collect())
        .collect();
    Relation::new("T", schema, rows).unwrap()
}

fn agg() -> impl Strategy<Value = String> {
    prop_oneof![
        Just("COUNT(*)".to_string()),
        (0..3usize).prop_map(|c| format!("SUM(P.{})", COLS[c])),
        (0..3usize).prop_map(|c| format!("AVG(P.{})", COLS[c])),
    ]
}

fn atom(n: usize) -> impl Strategy<Value = String> {
    let hi = (n as i32) * 12;
    prop_oneof![
        (agg(), prop::sample::select(vec!["<=", ">=", "=", "<", ">", "<>"]), -5..hi)
            .prop_map(|(a, op, r)| format!("{a} {op} {r}")),
        (agg(), -5..hi, 0..hi).prop_map(|(a, lo, w)| format!("{a} BETWEEN {lo} AND {}", lo + w)),
    ]
}

fn conjunct(n: usize) -> impl Strategy<Value = String> {
    prop_oneof![
        3 => atom(n),
        1 => (atom(n), atom(n)).prop_map(|(x, y)| format!("({x} OR {y})")),
        1 => atom(n).prop_map(|x| format!("NOT ({x})")),
    ]
}

/// Query text over the three-column relation `T`.
pub(crate) fn query_text(n: usize) -> impl Strategy<Value = String> {
    (
        prop::option::of(0..2u32),
        prop::option::of((0..3usize, 0..12i32)),
        prop::collection::vec(conjunct(n), 0..3),
        prop::option::of((any::<bool>(), 0..3usize)),
    )
        .prop_map(|(repeat, base, atoms, obj)| {
            let mut q = "SELECT PACKAGE(R) AS P FROM T R".to_string();
            if let Some(k) = repeat {
                q += &format!(" REPEAT {k}");
            }
            if let Some((c, v)) = base {
                q += &format!(" WHERE R.{} <= {v}", COLS[c]);
            }
            if !atoms.is_empty() {
                q += &format!(" SUCH THAT {}", atoms.join(" AND "));
            }
            if let Some((max, c)) = obj {
                let dir = if max { "MAXIMIZE" } else { "MINIMIZE" };
                q += &format!(" {dir} SUM(P.{})", COLS[c]);
            }
            q
        })
}

/// A relation with `min_n..=max_n` rows and a query over it.
pub(crate) fn instance(
    min_n: usize,
    max_n: usize,
) -> impl Strategy<Value = (Relation, ValidatedQuery)> {
    (min_n..=max_n)
        .prop_flat_map(|n| {
            (
                prop::collection::vec(prop::array::uniform3(-3..15i32), n),
                query_text(n),
            )
        })
        .prop_map(|(rows, text)| {
            let rel = relation(&rows);
            let q = validate(&parse(&text).unwrap(), rel.schema()).unwrap();
            (rel, q)
        })
}
