use std::sync::atomic::{AtomicUsize, Ordering};

use num_bigint::BigUint;
use paql_core::catalog::{ColumnKind, Relation, Schema, Value};
use paql_core::paql::{parse, validate};
use paql_core::pruning::{bounds_for, pruned_space_size};
use paql_core::solver::brute_force_oracle;
use paql_core::CardinalityBounds;
use proptest::prelude::*;

static PAIRS: AtomicUsize = AtomicUsize::new(0);

fn relation(rows: &[(i32, i32)]) -> Relation {
    let schema = Schema::new(vec![
        ("a".into(), ColumnKind::Numeric),
        ("b".into(), ColumnKind::Numeric),
    ])
    .unwrap();
    let rows = rows
        .iter()
        .map(|&(a, b)| vec![Value::Number(a as f64), Value::Number(b as f64)])
        .collect();
    Relation::new("T", schema, rows).unwrap()
}

fn atom() -> impl Strategy<Value = String> {
    let agg = prop::sample::select(vec!["COUNT(*)", "SUM(P.a)", "SUM(P.b)", "AVG(P.a)"]);
    let op = prop::sample::select(vec!["<=", ">=", "=", "<", ">", "<>"]);
    prop_oneof![
        (agg.clone(), op, 0..60i32).prop_map(|(a, o, r)| format!("{a} {o} {r}")),
        (agg, 0..60i32, 0..30i32).prop_map(|(a, l, w)| format!("{a} BETWEEN {l} AND {}", l + w)),
    ]
}

fn formula() -> impl Strategy<Value = String> {
    prop::collection::vec(
        prop_oneof![
            3 => atom(),
            1 => (atom(), atom()).prop_map(|(x, y)| format!("({x} OR {y})")),
            1 => atom().prop_map(|x| format!("NOT ({x})")),
        ],
        1..4,
    )
    .prop_map(|xs| xs.join(" AND "))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    fn valid_packages_respect_bounds(
        rows in prop::collection::vec((0..15i32, 1..15i32), 1..9),
        repeat in prop::option::of(0..2u32),
        f in formula(),
    ) {
        let rel = relation(&rows);
        let repeat = repeat.map(|k| format!(" REPEAT {k}")).unwrap_or_default();
        let text = format!("SELECT PACKAGE(R) AS P FROM T R{repeat} SUCH THAT {f}");
        let q = validate(&parse(&text).unwrap(), rel.schema()).unwrap();
        let bounds = bounds_for(&q, &rel);
        for (p, _) in brute_force_oracle(&q, &rel, None).unwrap() {
            PAIRS.fetch_add(1, Ordering::Relaxed);
            prop_assert!(bounds.contains(p.cardinality()), "{} outside {:?} for {}", p.cardinality(), bounds, text);
        }
    }
}

#[test]
fn valid_packages_respect_bounds_over_many_pairs() {
    valid_packages_respect_bounds();
    assert!(PAIRS.load(Ordering::Relaxed) >= 1000);
}

fn bounds(lower: u64, upper: u64) -> CardinalityBounds {
    CardinalityBounds {
        lower,
        upper: Some(upper),
        per_atom: Vec::new(),
    }
}

#[test]
fn space_sizes() {
    for n in 0..=20u64 {
        assert_eq!(pruned_space_size(n, &bounds(0, n)).unwrap(), BigUint::from(1u64) << n);
    }
    assert_eq!(pruned_space_size(4, &bounds(3, 4)).unwrap(), BigUint::from(5u32));
}
