//! Response shapes.

use paql_core::catalog::{Column, Relation, TupleId};
use paql_core::exploration::{ExplorationSession, HistoryEntry};
use paql_core::{pretty_print, Package};
use serde::Serialize;
use serde_json::{Map, Value as Json};

#[derive(Serialize)]
pub struct DatasetView {
    pub name: String,
    pub rows: usize,
    pub schema: Vec<Column>,
}

impl DatasetView {
    pub fn of(rel: &Relation) -> Self {
        DatasetView {
            name: rel.name().to_string(),
            rows: rel.len(),
            schema: rel.schema().columns().to_vec(),
        }
    }
}

#[derive(Serialize)]
pub struct TupleView {
    pub id: TupleId,
    pub multiplicity: u32,
    /// Row values keyed by column name, in schema order.
    pub values: Map<String, Json>,
}

/// `{relation, tuples: [{id, multiplicity, values}]}`
#[derive(Serialize)]
pub struct PackageView {
    pub relation: String,
    pub tuples: Vec<TupleView>,
}

impl PackageView {
    pub fn of(pkg: &Package, rel: &Relation) -> Self {
        let tuples = pkg
            .iter()
            .map(|(id, multiplicity)| {
                let mut values = Map::new();
                if let Some(row) = rel.row(id) {
                    for (col, v) in rel.schema().columns().iter().zip(&row.values) {
                        values.insert(col.name.clone(), serde_json::to_value(v).unwrap_or(Json::Null));
                    }
                }
                TupleView {
                    id,
                    multiplicity,
                    values,
                }
            })
            .collect();
        PackageView {
            relation: pkg.relation().to_string(),
            tuples,
        }
    }
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PinView {
    pub tuple_id: TupleId,
    pub multiplicity: u32,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SessionView {
    pub session_id: String,
    pub dataset: String,
    pub query: String,
    pub seed: u64,
    pub package: PackageView,
    pub pinned: Vec<PinView>,
    pub nogoods: Vec<Vec<TupleId>>,
    pub history: Vec<HistoryEntry>,
}

impl SessionView {
    pub fn of(id: &str, s: &ExplorationSession, rel: &Relation) -> Self {
        SessionView {
            session_id: id.to_string(),
            dataset: s.relation_name().to_string(),
            query: pretty_print(s.query().ast()),
            seed: s.seed(),
            package: PackageView::of(s.current(), rel),
            pinned: s
                .pinned()
                .iter()
                .map(|(&tuple_id, &multiplicity)| PinView {
                    tuple_id,
                    multiplicity,
                })
                .collect(),
            nogoods: s.nogoods().iter().map(|n| n.iter().copied().collect()).collect(),
            history: s.history().to_vec(),
        }
    }
}
