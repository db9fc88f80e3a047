//! Exact package solving.
//!
//! A validated query is normalized to disjunctive normal form; each disjunct
//! becomes an [`IlpModel`] with one bounded integer variable per
//! base-qualified tuple, and is solved by branch-and-bound. The best outcome
//! across disjuncts is returned.

mod bnb;
mod dnf;
mod lp;
mod model;
mod oracle;
mod translate;

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use serde::Serialize;

pub use dnf::{to_dnf, LinearAtom};
pub use lp::to_lp_format;
pub use model::{IlpModel, Nogood, ObjectiveRow, Row, RowKind, Sense, Variable};
pub use oracle::{brute_force_oracle, ORACLE_SLOT_LIMIT};
pub use translate::{translate, translate_disjuncts};

use crate::catalog::{Relation, TupleId};
use crate::error::Result;
use crate::evaluator::{objective_value, satisfies, Package};
use crate::paql::{Direction, ValidatedQuery};
use crate::pruning::{bounds_for, CardinalityBounds};
use bnb::{branch_and_bound, BnbParams};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolverConfig {
    pub seed: u64,
    pub timeout: Option<Duration>,
    pub node_limit: Option<u64>,
    /// Maximum number of DNF disjuncts before giving up with `DNF_BLOWUP`.
    pub dnf_limit: usize,
    /// Add the cardinality bounds from [`crate::pruning`] to every model.
    pub use_pruning: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            seed: 0,
            timeout: None,
            node_limit: None,
            dnf_limit: 64,
            use_pruning: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveStatus {
    Optimal,
    Feasible,
    Infeasible,
    Aborted,
}

impl SolveStatus {
    pub fn has_package(self) -> bool {
        matches!(self, SolveStatus::Optimal | SolveStatus::Feasible)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SolveStats {
    pub nodes: u64,
    pub iterations: u64,
    pub restarts: u64,
    pub disjuncts: usize,
    pub timed_out: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trajectory_hash: Option<u64>,
    /// Wall-clock time; not serialized so that outputs are reproducible.
    #[serde(skip)]
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SolveOutcome {
    pub status: SolveStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub package: Option<Package>,
    #[serde(rename = "objective", skip_serializing_if = "Option::is_none")]
    pub objective_value: Option<f64>,
    pub stats: SolveStats,
}

impl SolveOutcome {
    pub(crate) fn empty(status: SolveStatus, stats: SolveStats) -> Self {
        SolveOutcome {
            status,
            package: None,
            objective_value: None,
            stats,
        }
    }
}

/// Extra rows layered on a query: minimum multiplicities and forbidden supports.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExtraConstraints {
    pub pins: BTreeMap<TupleId, u32>,
    pub nogoods: Vec<BTreeSet<TupleId>>,
}

fn package_of(model: &IlpModel, x: &[u32]) -> Package {
    Package::from_counts(
        model.relation.clone(),
        model.variables.iter().zip(x).map(|(v, &c)| (v.tuple, c)),
    )
}

/// Solves a single model. The returned package is checked against the rows only.
pub fn solve(model: &IlpModel, config: &SolverConfig) -> SolveOutcome {
    let start = Instant::now();
    let res = branch_and_bound(
        model,
        BnbParams {
            deadline: config.timeout.map(|t| start + t),
            node_limit: config.node_limit,
            seed: config.seed,
            cutoff: None,
        },
        |_| true,
    );
    let status = match (&res.solution, res.complete, model.objective.is_some()) {
        (Some(_), true, true) => SolveStatus::Optimal,
        (Some(_), _, _) => SolveStatus::Feasible,
        (None, true, _) => SolveStatus::Infeasible,
        (None, false, _) => SolveStatus::Aborted,
    };
    let stats = SolveStats {
        nodes: res.nodes,
        disjuncts: 1,
        timed_out: res.timed_out,
        elapsed: start.elapsed(),
        ..Default::default()
    };
    match res.solution {
        Some(x) => SolveOutcome {
            status,
            objective_value: model.objective_value(&x),
            package: Some(package_of(model, &x)),
            stats,
        },
        None => SolveOutcome::empty(status, stats),
    }
}

/// Solves a query with an arbitrary boolean global formula.
pub fn solve_formula(
    query: &ValidatedQuery,
    relation: &Relation,
    config: &SolverConfig,
) -> Result<SolveOutcome> {
    solve_formula_with(query, relation, config, &ExtraConstraints::default())
}

/// [`solve_formula`] with pins and no-good cuts added to every disjunct.
pub fn solve_formula_with(
    query: &ValidatedQuery,
    relation: &Relation,
    config: &SolverConfig,
    extra: &ExtraConstraints,
) -> Result<SolveOutcome> {
    let start = Instant::now();
    let deadline = config.timeout.map(|t| start + t);
    let bounds = if config.use_pruning {
        bounds_for(query, relation)
    } else {
        CardinalityBounds::unbounded()
    };
    let disjuncts = to_dnf(query.formula(), config.dnf_limit)?;
    let maximize = match query.objective() {
        Some((Direction::Maximize, _)) => Some(true),
        Some((Direction::Minimize, _)) => Some(false),
        None => None,
    };

    let mut stats = SolveStats {
        disjuncts: disjuncts.len(),
        ..Default::default()
    };
    let mut best: Option<(Package, f64)> = None;
    let mut incomplete = false;

    for atoms in &disjuncts {
        if bounds.is_empty() {
            break;
        }
        let mut model = translate::translate_conjunction(query, relation, &bounds, atoms);
        if !extra
            .pins
            .iter()
            .all(|(&t, &m)| m == 0 || model.add_pin(t, m))
        {
            continue;
        }
        for ng in &extra.nogoods {
            model.add_nogood(ng.clone());
        }
        let cutoff = match (maximize, &best) {
            (Some(true), Some((_, v))) => Some(*v),
            (Some(false), Some((_, v))) => Some(-*v),
            _ => None,
        };
        let res = branch_and_bound(
            &model,
            BnbParams {
                deadline,
                node_limit: config.node_limit.map(|l| l.saturating_sub(stats.nodes)),
                seed: config.seed,
                cutoff,
            },
            |x| satisfies(&package_of(&model, x), query, relation),
        );
        stats.nodes += res.nodes;
        incomplete |= !res.complete;
        stats.timed_out |= res.timed_out;
        if let Some(x) = res.solution {
            let pkg = package_of(&model, &x);
            let value = objective_value(&pkg, query, relation).unwrap_or(0.0);
            best = Some((pkg, value));
            if maximize.is_none() {
                break;
            }
        }
        if res.timed_out {
            break;
        }
    }

    stats.elapsed = start.elapsed();
    Ok(match best {
        Some((package, value)) => SolveOutcome {
            status: if maximize.is_some() && !incomplete {
                SolveStatus::Optimal
            } else {
                SolveStatus::Feasible
            },
            objective_value: maximize.map(|_| value),
            package: Some(package),
            stats,
        },
        None if incomplete => SolveOutcome::empty(SolveStatus::Aborted, stats),
        None => SolveOutcome::empty(SolveStatus::Infeasible, stats),
    })
}
