//! Interactive exploration: sample packages, pin tuples, re-sample the rest,
//! constraint suggestions, and two-dimensional package summaries.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::catalog::{ColumnKind, Relation, TupleId, Value};
use crate::error::{Error, Result};
use crate::evaluator::{eval_aggregate, Package};
use crate::paql::{fmt_number, Agg, ColumnId, ValidatedQuery};
use crate::pruning::bounds_for;
use crate::solver::{solve_formula_with, ExtraConstraints, SolveOutcome, SolveStatus, SolverConfig};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "action", rename_all = "camelCase")]
pub enum Action {
    Start,
    Pin { tuple: TupleId, multiplicity: u32 },
    Replace,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistoryEntry {
    #[serde(flatten)]
    pub action: Action,
    pub package: Package,
}

/// One user's exploration state. The query is kept without its objective:
/// sessions sample valid packages rather than optimize.
#[derive(Debug, Clone)]
pub struct ExplorationSession {
    query: ValidatedQuery,
    relation_name: String,
    current: Package,
    pinned: BTreeMap<TupleId, u32>,
    nogoods: Vec<BTreeSet<TupleId>>,
    config: SolverConfig,
    history: Vec<HistoryEntry>,
}

fn outcome_package(out: SolveOutcome, empty: Error) -> Result<Package> {
    match out.status {
        SolveStatus::Optimal | SolveStatus::Feasible => Ok(out.package.expect("package present")),
        SolveStatus::Infeasible => Err(empty),
        SolveStatus::Aborted => Err(Error::Timeout),
    }
}

pub fn start_session(query: &ValidatedQuery, relation: &Relation, seed: u64) -> Result<ExplorationSession> {
    start_session_with(
        query,
        relation,
        SolverConfig {
            seed,
            ..Default::default()
        },
    )
}

/// Like [`start_session`]; `config` (including its seed) is reused by later replacements.
pub fn start_session_with(
    query: &ValidatedQuery,
    relation: &Relation,
    config: SolverConfig,
) -> Result<ExplorationSession> {
    let query = query.without_objective();
    let out = solve_formula_with(&query, relation, &config, &ExtraConstraints::default())?;
    let current = outcome_package(out, Error::InfeasibleQuery)?;
    Ok(ExplorationSession {
        query,
        relation_name: relation.name().to_string(),
        history: vec![HistoryEntry {
            action: Action::Start,
            package: current.clone(),
        }],
        current,
        pinned: BTreeMap::new(),
        nogoods: Vec::new(),
        config,
    })
}

impl ExplorationSession {
    pub fn query(&self) -> &ValidatedQuery {
        &self.query
    }

    pub fn relation_name(&self) -> &str {
        &self.relation_name
    }

    pub fn current(&self) -> &Package {
        &self.current
    }

    pub fn pinned(&self) -> &BTreeMap<TupleId, u32> {
        &self.pinned
    }

    /// Supports of packages already shown and replaced.
    pub fn nogoods(&self) -> &[BTreeSet<TupleId>] {
        &self.nogoods
    }

    pub fn seed(&self) -> u64 {
        self.config.seed
    }

    pub fn history(&self) -> &[HistoryEntry] {
        &self.history
    }

    /// Keeps at least `multiplicity` occurrences of `tuple` in later samples.
    /// A multiplicity of 0 removes the pin.
    pub fn pin(&mut self, tuple: TupleId, multiplicity: u32) -> Result<()> {
        if self.current.get(tuple) < multiplicity {
            return Err(Error::NotInPackage {
                tuple: tuple.0,
                multiplicity,
            });
        }
        if multiplicity == 0 {
            self.pinned.remove(&tuple);
        } else {
            self.pinned.insert(tuple, multiplicity);
        }
        self.history.push(HistoryEntry {
            action: Action::Pin {
                tuple,
                multiplicity,
            },
            package: self.current.clone(),
        });
        Ok(())
    }

    /// New sample that keeps the pins and differs from every package shown so far.
    /// On failure the session is left unchanged.
    pub fn replace_unpinned(&mut self, relation: &Relation) -> Result<&Package> {
        let mut nogoods = self.nogoods.clone();
        nogoods.push(self.current.support().collect());
        let extra = ExtraConstraints {
            pins: self.pinned.clone(),
            nogoods,
        };
        let out = solve_formula_with(&self.query, relation, &self.config, &extra)?;
        let next = outcome_package(out, Error::NoAlternative)?;
        self.nogoods = extra.nogoods;
        self.current = next;
        self.history.push(HistoryEntry {
            action: Action::Replace,
            package: self.current.clone(),
        });
        Ok(&self.current)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SuggestionKind {
    BasePredicate,
    GlobalAtom,
    Objective,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstraintSuggestion {
    pub kind: SuggestionKind,
    /// PaQL text for the clause body (or the whole objective clause).
    pub fragment: String,
    pub rationale: String,
}

fn quote(s: &str) -> String {
    format!("'{}'", s.replace('\'', "''"))
}

/// Constraint and objective proposals for a column, optionally anchored at a
/// selected cell value. `query` supplies aliases and the expected package size;
/// `current` is the fallback size when the query bounds have no finite midpoint.
pub fn suggest_constraints(
    relation: &Relation,
    column: &str,
    selected: Option<&Value>,
    query: Option<&ValidatedQuery>,
    current: Option<&Package>,
) -> Result<Vec<ConstraintSuggestion>> {
    let schema = relation.schema();
    let index = schema
        .index_of(column)
        .ok_or_else(|| Error::NoSuchColumn(column.to_string()))?;
    let col = schema.column(index);
    let name = col.name.as_str();
    let (r, p) = match query {
        Some(q) => (
            q.ast().relation_alias.clone(),
            q.ast().package_alias.clone(),
        ),
        None => ("R".to_string(), "P".to_string()),
    };
    let mut out = Vec::new();
    let mut push = |kind, fragment: String, rationale: String| {
        out.push(ConstraintSuggestion {
            kind,
            fragment,
            rationale,
        })
    };

    match (col.kind, selected) {
        (ColumnKind::Text, None) => {}
        (ColumnKind::Text, Some(Value::Text(v))) => {
            push(
                SuggestionKind::BasePredicate,
                format!("{r}.{name} = {}", quote(v)),
                format!("keep only tuples whose {name} is {v}"),
            );
            push(
                SuggestionKind::BasePredicate,
                format!("{r}.{name} <> {}", quote(v)),
                format!("exclude tuples whose {name} is {v}"),
            );
        }
        (ColumnKind::Numeric, Some(Value::Number(v))) => {
            let v = *v;
            let num = fmt_number(v);
            push(
                SuggestionKind::BasePredicate,
                format!("{r}.{name} <= {num}"),
                format!("tuples with {name} at most {num}"),
            );
            push(
                SuggestionKind::BasePredicate,
                format!("{r}.{name} >= {num}"),
                format!("tuples with {name} at least {num}"),
            );
            let expected = query
                .and_then(|q| {
                    let b = bounds_for(q, relation);
                    b.upper
                        .filter(|&u| u >= b.lower)
                        .map(|u| (b.lower + u) as f64 / 2.0)
                })
                .or_else(|| current.map(|c| c.cardinality() as f64));
            if let Some(k) = expected {
                let total = fmt_number(v * k);
                push(
                    SuggestionKind::GlobalAtom,
                    format!("SUM({p}.{name}) <= {total}"),
                    format!("package total {name} no more than {num} per tuple over {} tuples", fmt_number(k)),
                );
            }
        }
        (_, Some(other)) => {
            return Err(Error::TypeMismatch(format!(
                "value {other:?} does not match column `{name}`"
            )))
        }
        (ColumnKind::Numeric, None) => {}
    }
    if col.kind == ColumnKind::Numeric {
        push(
            SuggestionKind::Objective,
            format!("MINIMIZE SUM({p}.{name})"),
            format!("prefer packages with less total {name}"),
        );
        push(
            SuggestionKind::Objective,
            format!("MAXIMIZE SUM({p}.{name})"),
            format!("prefer packages with more total {name}"),
        );
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SummaryDims {
    pub x: String,
    pub y: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryPoint {
    pub package: Package,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VisualSummary {
    pub dims: SummaryDims,
    pub points: Vec<SummaryPoint>,
}

/// Axis aggregates: y is the objective (or COUNT), x the first distinct SUM in
/// the formula, else COUNT, else SUM of the first numeric column.
pub fn summary_dims(query: &ValidatedQuery, relation: &Relation) -> (Agg, Agg) {
    let y = query.objective().map(|o| o.1.clone()).unwrap_or(Agg::Count);
    let atoms = query.formula().map(|f| f.atoms()).unwrap_or_default();
    let x = atoms
        .iter()
        .map(|a| a.agg())
        .find(|a| matches!(a, Agg::Sum(_)) && **a != y)
        .cloned()
        .or_else(|| (y != Agg::Count).then_some(Agg::Count))
        .or_else(|| {
            relation.schema().first_numeric().map(|index| {
                Agg::Sum(ColumnId {
                    index,
                    name: relation.schema().column(index).name.clone(),
                })
            })
        })
        .unwrap_or(Agg::Count);
    (x, y)
}

pub fn visual_summary(
    query: &ValidatedQuery,
    relation: &Relation,
    max_packages: usize,
    seed: u64,
) -> Result<VisualSummary> {
    visual_summary_with(
        query,
        relation,
        max_packages,
        &SolverConfig {
            seed,
            ..Default::default()
        },
    )
}

/// Up to `max_packages` distinct valid packages: the optimum first (when the
/// query has an objective), then further samples excluded by no-good cuts.
pub fn visual_summary_with(
    query: &ValidatedQuery,
    relation: &Relation,
    max_packages: usize,
    config: &SolverConfig,
) -> Result<VisualSummary> {
    let (x, y) = summary_dims(query, relation);
    let sample = query.without_objective();
    let mut extra = ExtraConstraints::default();
    let mut points = Vec::new();
    while points.len() < max_packages.max(1) {
        let q = if points.is_empty() { query } else { &sample };
        let out = solve_formula_with(q, relation, config, &extra)?;
        let package = match outcome_package(out, Error::InfeasibleQuery) {
            Ok(p) => p,
            Err(e) if points.is_empty() => return Err(e),
            Err(_) => break,
        };
        extra.nogoods.push(package.support().collect());
        let coord = |agg: &Agg| eval_aggregate(&package, relation, agg).unwrap_or(0.0);
        points.push(SummaryPoint {
            x: coord(&x),
            y: coord(&y),
            package,
        });
    }
    Ok(VisualSummary {
        dims: SummaryDims {
            x: x.to_string(),
            y: y.to_string(),
        },
        points,
    })
}
