//! Semantic reference: base filtering, package aggregates and validity.
//!
//! Every solver in the crate is tested against the functions here.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::catalog::{Relation, TupleId};
use crate::error::{Error, Result};
use crate::paql::{Agg, Atom, BaseExpr, CmpOp, Formula, ValidatedQuery};
use crate::EPSILON;

/// A multiset of tuples from one relation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "PackageJson", try_from = "PackageJson")]
pub struct Package {
    relation: String,
    multiplicity: BTreeMap<TupleId, u32>,
}

#[derive(Serialize, Deserialize)]
struct PackageJson {
    relation: String,
    tuples: Vec<PackageEntry>,
}

#[derive(Serialize, Deserialize)]
struct PackageEntry {
    id: TupleId,
    multiplicity: u32,
}

impl From<Package> for PackageJson {
    fn from(p: Package) -> Self {
        PackageJson {
            relation: p.relation,
            tuples: p
                .multiplicity
                .into_iter()
                .map(|(id, multiplicity)| PackageEntry { id, multiplicity })
                .collect(),
        }
    }
}

impl TryFrom<PackageJson> for Package {
    type Error = String;

    fn try_from(j: PackageJson) -> Result<Self, String> {
        let mut p = Package::new(j.relation);
        for e in j.tuples {
            if e.multiplicity == 0 {
                return Err(format!("tuple {} has multiplicity 0", e.id));
            }
            if p.multiplicity.insert(e.id, e.multiplicity).is_some() {
                return Err(format!("tuple {} listed twice", e.id));
            }
        }
        Ok(p)
    }
}

impl Package {
    pub fn new(relation: impl Into<String>) -> Self {
        Package {
            relation: relation.into(),
            multiplicity: BTreeMap::new(),
        }
    }

    /// Builds a package from `(tuple, multiplicity)` pairs; zero counts are dropped
    /// and repeated ids accumulate.
    pub fn from_counts(
        relation: impl Into<String>,
        counts: impl IntoIterator<Item = (TupleId, u32)>,
    ) -> Self {
        let mut p = Package::new(relation);
        for (id, c) in counts {
            p.add(id, c);
        }
        p
    }

    /// Each listed id contributes one occurrence.
    pub fn from_ids(relation: impl Into<String>, ids: impl IntoIterator<Item = TupleId>) -> Self {
        Package::from_counts(relation, ids.into_iter().map(|id| (id, 1)))
    }

    pub fn relation(&self) -> &str {
        &self.relation
    }

    pub fn add(&mut self, id: TupleId, count: u32) {
        if count > 0 {
            *self.multiplicity.entry(id).or_insert(0) += count;
        }
    }

    /// Removes up to `count` occurrences of `id`.
    pub fn remove(&mut self, id: TupleId, count: u32) {
        if let Some(m) = self.multiplicity.get_mut(&id) {
            if *m <= count {
                self.multiplicity.remove(&id);
            } else {
                *m -= count;
            }
        }
    }

    pub fn get(&self, id: TupleId) -> u32 {
        self.multiplicity.get(&id).copied().unwrap_or(0)
    }

    /// `(tuple, multiplicity)` in tuple-id order.
    pub fn iter(&self) -> impl Iterator<Item = (TupleId, u32)> + '_ {
        self.multiplicity.iter().map(|(k, v)| (*k, *v))
    }

    /// Distinct tuples in the package.
    pub fn support(&self) -> impl Iterator<Item = TupleId> + '_ {
        self.multiplicity.keys().copied()
    }

    /// Total number of occurrences (COUNT(*)).
    pub fn cardinality(&self) -> u64 {
        self.multiplicity.values().map(|&m| m as u64).sum()
    }

    pub fn distinct(&self) -> usize {
        self.multiplicity.len()
    }

    pub fn is_empty(&self) -> bool {
        self.multiplicity.is_empty()
    }

    /// One entry per occurrence, in tuple-id order.
    pub fn occurrences(&self) -> Vec<TupleId> {
        self.iter()
            .flat_map(|(id, m)| std::iter::repeat_n(id, m as usize))
            .collect()
    }
}

/// Ids of the tuples satisfying `predicate`, in relation order.
pub fn filter_base(relation: &Relation, predicate: Option<&BaseExpr>) -> Vec<TupleId> {
    relation
        .rows()
        .iter()
        .filter(|r| predicate.is_none_or(|p| p.matches(r)))
        .map(|r| r.id)
        .collect()
}

/// COUNT, SUM or AVG of a package.
pub fn eval_aggregate(package: &Package, relation: &Relation, agg: &Agg) -> Result<f64> {
    let count = package.cardinality() as f64;
    let sum = |col: usize| -> f64 {
        package
            .iter()
            .map(|(id, m)| m as f64 * relation.number(id, col))
            .sum()
    };
    match agg {
        Agg::Count => Ok(count),
        Agg::Sum(c) => Ok(sum(c.index)),
        Agg::Avg(c) => {
            if count == 0.0 {
                Err(Error::AvgOfEmpty)
            } else {
                Ok(sum(c.index) / count)
            }
        }
    }
}

/// `value cmp rhs` under the absolute tolerance. Strict comparisons require a
/// margin of more than `EPSILON`, so `!(v >= r) == (v < r)` holds exactly.
pub fn compare(value: f64, cmp: CmpOp, rhs: f64) -> bool {
    match cmp {
        CmpOp::Le => value <= rhs + EPSILON,
        CmpOp::Ge => value >= rhs - EPSILON,
        CmpOp::Lt => value < rhs - EPSILON,
        CmpOp::Gt => value > rhs + EPSILON,
        CmpOp::Eq => (value - rhs).abs() <= EPSILON,
        CmpOp::Ne => (value - rhs).abs() > EPSILON,
    }
}

pub(crate) fn atom_holds(atom: &Atom, value: f64) -> bool {
    match atom {
        Atom::Compare { cmp, value: rhs, .. } => compare(value, *cmp, *rhs),
        Atom::Between { low, high, .. } => value >= low - EPSILON && value <= high + EPSILON,
    }
}

/// Truth of one atom; `None` when the aggregate is undefined (AVG of empty).
fn atom_truth(atom: &Atom, package: &Package, relation: &Relation) -> (Option<f64>, Option<bool>) {
    match eval_aggregate(package, relation, atom.agg()) {
        Ok(v) => (Some(v), Some(atom_holds(atom, v))),
        Err(_) => (None, None),
    }
}

/// Kleene three-valued evaluation: undefined atoms propagate as unknown.
fn eval_formula(f: &Formula, package: &Package, relation: &Relation) -> Option<bool> {
    match f {
        Formula::Atom(a) => atom_truth(a, package, relation).1,
        Formula::And(xs) => {
            let mut unknown = false;
            for x in xs {
                match eval_formula(x, package, relation) {
                    Some(false) => return Some(false),
                    None => unknown = true,
                    Some(true) => {}
                }
            }
            if unknown {
                None
            } else {
                Some(true)
            }
        }
        Formula::Or(xs) => {
            let mut unknown = false;
            for x in xs {
                match eval_formula(x, package, relation) {
                    Some(true) => return Some(true),
                    None => unknown = true,
                    Some(false) => {}
                }
            }
            if unknown {
                None
            } else {
                Some(false)
            }
        }
        Formula::Not(x) => eval_formula(x, package, relation).map(|b| !b),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AtomReport {
    pub atom: String,
    /// `None` when the aggregate is undefined (AVG of an empty package).
    pub value: Option<f64>,
    pub holds: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ValidityReport {
    pub valid: bool,
    pub unknown_tuples: Vec<TupleId>,
    pub base_violations: Vec<TupleId>,
    pub multiplicity_violations: Vec<TupleId>,
    /// Truth of the global formula; `None` if absent or undefined.
    pub formula: Option<bool>,
    pub atoms: Vec<AtomReport>,
}

/// Full validity check with a per-atom report.
pub fn is_valid(package: &Package, query: &ValidatedQuery, relation: &Relation) -> ValidityReport {
    let cap = query.max_multiplicity();
    let mut report = ValidityReport {
        valid: true,
        unknown_tuples: Vec::new(),
        base_violations: Vec::new(),
        multiplicity_violations: Vec::new(),
        formula: None,
        atoms: Vec::new(),
    };
    for (id, m) in package.iter() {
        let Some(row) = relation.row(id) else {
            report.unknown_tuples.push(id);
            continue;
        };
        if query.base().is_some_and(|p| !p.matches(row)) {
            report.base_violations.push(id);
        }
        if m > cap {
            report.multiplicity_violations.push(id);
        }
    }
    let members_ok = report.unknown_tuples.is_empty()
        && report.base_violations.is_empty()
        && report.multiplicity_violations.is_empty();
    if !report.unknown_tuples.is_empty() {
        report.valid = false;
        return report;
    }
    if let Some(f) = query.formula() {
        report.atoms = f
            .atoms()
            .into_iter()
            .map(|a| {
                let (value, holds) = atom_truth(a, package, relation);
                AtomReport {
                    atom: a.to_string(),
                    value,
                    holds,
                }
            })
            .collect();
        report.formula = eval_formula(f, package, relation);
        report.valid = members_ok && report.formula == Some(true);
    } else {
        report.valid = members_ok;
    }
    report
}

/// Boolean-only validity, without building a report.
pub fn satisfies(package: &Package, query: &ValidatedQuery, relation: &Relation) -> bool {
    let cap = query.max_multiplicity();
    for (id, m) in package.iter() {
        let Some(row) = relation.row(id) else {
            return false;
        };
        if m > cap || query.base().is_some_and(|p| !p.matches(row)) {
            return false;
        }
    }
    query
        .formula()
        .is_none_or(|f| eval_formula(f, package, relation) == Some(true))
}

/// Objective value of a package, if the query has an objective.
pub fn objective_value(
    package: &Package,
    query: &ValidatedQuery,
    relation: &Relation,
) -> Option<f64> {
    query
        .objective()
        .and_then(|(_, agg)| eval_aggregate(package, relation, agg).ok())
}
