//! Relations, schemas and CSV ingestion.

use std::collections::HashMap;
use std::fmt;
use std::io::Read;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::paql::BaseExpr;

/// Dense tuple identifier: the row index within its relation.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct TupleId(pub usize);

impl fmt::Display for TupleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Numeric,
    Text,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
}

/// Ordered, non-empty list of uniquely named columns. Names are stored lower-cased.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Schema {
    columns: Vec<Column>,
}

impl Schema {
    pub fn new(columns: Vec<(String, ColumnKind)>) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::EmptyFile);
        }
        let mut out: Vec<Column> = Vec::with_capacity(columns.len());
        for (name, kind) in columns {
            let name = name.trim().to_lowercase();
            if out.iter().any(|c| c.name == name) {
                return Err(Error::DuplicateColumn(name));
            }
            out.push(Column { name, kind });
        }
        Ok(Schema { columns: out })
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    /// Case-insensitive column lookup.
    pub fn index_of(&self, name: &str) -> Option<usize> {
        let name = name.to_lowercase();
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn column(&self, index: usize) -> &Column {
        &self.columns[index]
    }

    pub fn first_numeric(&self) -> Option<usize> {
        self.columns.iter().position(|c| c.kind == ColumnKind::Numeric)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Number(f64),
    Text(String),
}

impl Value {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Number(v) => Some(*v),
            Value::Text(_) => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Value::Text(s) => Some(s),
            Value::Number(_) => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Number(v) => write!(f, "{v}"),
            Value::Text(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TupleRow {
    pub id: TupleId,
    pub values: Vec<Value>,
}

/// Immutable, schema-typed table. Tuple ids are `0..n` in row order.
#[derive(Debug, Clone, PartialEq)]
pub struct Relation {
    name: String,
    schema: Schema,
    rows: Vec<TupleRow>,
}

impl Relation {
    /// Builds a relation from already-typed rows, checking arity and kinds.
    pub fn new(name: impl Into<String>, schema: Schema, rows: Vec<Vec<Value>>) -> Result<Self> {
        let mut out = Vec::with_capacity(rows.len());
        for (i, values) in rows.into_iter().enumerate() {
            if values.len() != schema.len() {
                return Err(Error::RaggedRow {
                    row: i + 1,
                    expected: schema.len(),
                    found: values.len(),
                });
            }
            for (col, v) in schema.columns().iter().zip(&values) {
                match (col.kind, v) {
                    (ColumnKind::Numeric, Value::Number(x)) if x.is_finite() => {}
                    (ColumnKind::Text, Value::Text(_)) => {}
                    _ => {
                        return Err(Error::UnparseableNumeric {
                            column: col.name.clone(),
                            row: i + 1,
                            cell: v.to_string(),
                        })
                    }
                }
            }
            out.push(TupleRow {
                id: TupleId(i),
                values,
            });
        }
        Ok(Relation {
            name: name.into(),
            schema,
            rows: out,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn rows(&self) -> &[TupleRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row(&self, id: TupleId) -> Option<&TupleRow> {
        self.rows.get(id.0)
    }

    /// Numeric cell; panics if the column is text or the id is out of range.
    pub fn number(&self, id: TupleId, column: usize) -> f64 {
        match &self.rows[id.0].values[column] {
            Value::Number(v) => *v,
            Value::Text(_) => panic!("column {column} is not numeric"),
        }
    }

    /// Serializes back to CSV with a header row.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.schema.columns().iter().map(|c| c.name.as_str()))
            .expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.values.iter().map(|v| v.to_string()))
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
    }
}

fn parse_number(cell: &str) -> Option<f64> {
    let t = cell.trim();
    if t.is_empty() || t.chars().any(|c| c.is_ascii_alphabetic() && c != 'e' && c != 'E') {
        return None;
    }
    t.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Loads a CSV document with a mandatory header row.
///
/// Column kinds are inferred over the whole file: a column is numeric iff every
/// non-empty cell parses as a decimal number. A numeric column may not contain
/// empty cells.
pub fn load_csv<R: Read>(name: &str, source: R) -> Result<Relation> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(source);

    let mut records = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| Error::UnparseableNumeric {
            column: String::new(),
            row: e.position().map_or(0, |p| p.line() as usize),
            cell: e.to_string(),
        })?;
        records.push(rec);
    }
    let mut it = records.into_iter();
    let header = match it.next() {
        Some(h) if !(h.len() == 1 && h[0].trim().is_empty()) => h,
        _ => return Err(Error::EmptyFile),
    };
    let width = header.len();
    let body: Vec<csv::StringRecord> = it.collect();
    for (i, rec) in body.iter().enumerate() {
        if rec.len() != width {
            return Err(Error::RaggedRow {
                row: i + 1,
                expected: width,
                found: rec.len(),
            });
        }
    }

    // Pass 1: infer kinds.
    let kinds: Vec<ColumnKind> = (0..width)
        .map(|c| {
            let mut any = false;
            for rec in &body {
                let cell = &rec[c];
                if cell.trim().is_empty() {
                    continue;
                }
                any = true;
                if parse_number(cell).is_none() {
                    return ColumnKind::Text;
                }
            }
            if any {
                ColumnKind::Numeric
            } else {
                ColumnKind::Text
            }
        })
        .collect();
    let schema = Schema::new(
        header
            .iter()
            .map(str::to_string)
            .zip(kinds.iter().copied())
            .collect(),
    )?;

    // Pass 2: type the cells.
    let mut rows = Vec::with_capacity(body.len());
    for (i, rec) in body.iter().enumerate() {
        let mut values = Vec::with_capacity(width);
        for (c, cell) in rec.iter().enumerate() {
            values.push(match kinds[c] {
                ColumnKind::Text => Value::Text(cell.to_string()),
                ColumnKind::Numeric => Value::Number(parse_number(cell).ok_or_else(|| {
                    Error::UnparseableNumeric {
                        column: schema.column(c).name.clone(),
                        row: i + 1,
                        cell: cell.to_string(),
                    }
                })?),
            });
        }
        rows.push(values);
    }
    Relation::new(name, schema, rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ColumnStats {
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub count: usize,
}

/// MIN/MAX/COUNT of a numeric column over the rows satisfying `predicate`.
pub fn column_stats(
    relation: &Relation,
    column: &str,
    predicate: Option<&BaseExpr>,
) -> Result<ColumnStats> {
    let idx = relation
        .schema()
        .index_of(column)
        .ok_or_else(|| Error::NoSuchColumn(column.to_string()))?;
    if relation.schema().column(idx).kind != ColumnKind::Numeric {
        return Err(Error::NotNumeric(column.to_string()));
    }
    Ok(stats_by_index(relation, idx, predicate))
}

pub(crate) fn stats_by_index(
    relation: &Relation,
    column: usize,
    predicate: Option<&BaseExpr>,
) -> ColumnStats {
    let mut stats = ColumnStats {
        min: None,
        max: None,
        count: 0,
    };
    for row in relation.rows() {
        if predicate.is_some_and(|p| !p.matches(row)) {
            continue;
        }
        let v = relation.number(row.id, column);
        stats.count += 1;
        stats.min = Some(stats.min.map_or(v, |m| m.min(v)));
        stats.max = Some(stats.max.map_or(v, |m| m.max(v)));
    }
    stats
}

/// Named relations, keyed case-insensitively.
#[derive(Debug, Default, Clone)]
pub struct Catalog {
    relations: HashMap<String, Arc<Relation>>,
}

impl Catalog {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts or replaces a relation.
    pub fn insert(&mut self, relation: Relation) -> Arc<Relation> {
        let rel = Arc::new(relation);
        self.relations
            .insert(rel.name().to_lowercase(), Arc::clone(&rel));
        rel
    }

    pub fn load_csv<R: Read>(&mut self, name: &str, source: R) -> Result<Arc<Relation>> {
        let rel = load_csv(name, source)?;
        Ok(self.insert(rel))
    }

    pub fn get(&self, name: &str) -> Option<Arc<Relation>> {
        self.relations.get(&name.to_lowercase()).cloned()
    }

    pub fn drop_relation(&mut self, name: &str) -> Option<Arc<Relation>> {
        self.relations.remove(&name.to_lowercase())
    }

    /// Relations sorted by name.
    pub fn list(&self) -> Vec<Arc<Relation>> {
        let mut v: Vec<_> = self.relations.values().cloned().collect();
        v.sort_by(|a, b| a.name().cmp(b.name()));
        v
    }
}
