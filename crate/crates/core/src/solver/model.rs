use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::catalog::TupleId;
use crate::paql::{CmpOp, Direction};
use crate::EPSILON;

/// Row sense. Strict senses are kept distinct so the exact leaf test agrees with
/// the evaluator; propagation relaxes them to `<= rhs - EPSILON` / `>= rhs + EPSILON`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Sense {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = "=")]
    Eq,
}

impl Sense {
    pub fn holds(self, activity: f64, rhs: f64) -> bool {
        match self {
            Sense::Le => activity <= rhs + EPSILON,
            Sense::Lt => activity < rhs - EPSILON,
            Sense::Ge => activity >= rhs - EPSILON,
            Sense::Gt => activity > rhs + EPSILON,
            Sense::Eq => (activity - rhs).abs() <= EPSILON,
        }
    }

    /// `Ne` has no single-row form.
    pub fn from_cmp(cmp: CmpOp) -> Option<Sense> {
        Some(match cmp {
            CmpOp::Le => Sense::Le,
            CmpOp::Lt => Sense::Lt,
            CmpOp::Ge => Sense::Ge,
            CmpOp::Gt => Sense::Gt,
            CmpOp::Eq => Sense::Eq,
            CmpOp::Ne => return None,
        })
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Lt => "<",
            Sense::Ge => ">=",
            Sense::Gt => ">",
            Sense::Eq => "=",
        }
    }
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum RowKind {
    Count,
    Sum,
    Avg,
    /// `COUNT >= 1` companion of AVG rows.
    AvgSupport,
    Pin,
}

/// `Σ coeffs[j] · x_j  sense  rhs`, coefficients dense over the model variables.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub name: String,
    pub kind: RowKind,
    pub coeffs: Vec<f64>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Row {
    pub fn activity(&self, x: &[u32]) -> f64 {
        self.coeffs
            .iter()
            .zip(x)
            .map(|(a, &v)| a * v as f64)
            .sum()
    }

    pub fn holds(&self, x: &[u32]) -> bool {
        self.sense.holds(self.activity(x), self.rhs)
    }
}

/// Integer variable `0 <= x <= upper` counting occurrences of one tuple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Variable {
    pub tuple: TupleId,
    pub upper: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObjectiveRow {
    pub direction: Direction,
    pub coeffs: Vec<f64>,
}

/// Forbids every assignment whose support (set of tuples with `x > 0`) equals
/// `support`. For 0/1 variables this is the usual no-good row
/// `Σ_{t∈S} (1 - x_t) + Σ_{t∉S} x_t >= 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Nogood {
    pub support: BTreeSet<TupleId>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct IlpModel {
    pub relation: String,
    pub variables: Vec<Variable>,
    pub rows: Vec<Row>,
    /// Cardinality bounds `lower <= Σ x <= upper` from pruning.
    pub count_bounds: (u64, Option<u64>),
    pub objective: Option<ObjectiveRow>,
    pub nogoods: Vec<Nogood>,
}

impl IlpModel {
    pub fn new(relation: impl Into<String>, variables: Vec<Variable>) -> Self {
        IlpModel {
            relation: relation.into(),
            variables,
            rows: Vec::new(),
            count_bounds: (0, None),
            objective: None,
            nogoods: Vec::new(),
        }
    }

    pub fn var_index(&self, tuple: TupleId) -> Option<usize> {
        self.variables.iter().position(|v| v.tuple == tuple)
    }

    pub fn is_binary(&self) -> bool {
        self.variables.iter().all(|v| v.upper <= 1)
    }

    /// Adds `x_t >= min`. Returns false if the tuple has no variable.
    pub fn add_pin(&mut self, tuple: TupleId, min: u32) -> bool {
        let Some(j) = self.var_index(tuple) else {
            return false;
        };
        let mut coeffs = vec![0.0; self.variables.len()];
        coeffs[j] = 1.0;
        self.rows.push(Row {
            name: format!("pin_{tuple}"),
            kind: RowKind::Pin,
            coeffs,
            sense: Sense::Ge,
            rhs: min as f64,
        });
        true
    }

    /// Forbids the package whose support is exactly `support`. A support naming
    /// a tuple without a variable can never be produced and is dropped.
    pub fn add_nogood(&mut self, support: BTreeSet<TupleId>) {
        if support.iter().all(|&t| self.var_index(t).is_some()) {
            self.nogoods.push(Nogood { support });
        }
    }

    /// Linear form of a no-good; only exact for 0/1 variables.
    pub fn nogood_row(&self, nogood: &Nogood) -> Row {
        let coeffs: Vec<f64> = self
            .variables
            .iter()
            .map(|v| {
                if nogood.support.contains(&v.tuple) {
                    -1.0
                } else {
                    1.0
                }
            })
            .collect();
        let inside = self
            .variables
            .iter()
            .filter(|v| nogood.support.contains(&v.tuple))
            .count();
        Row {
            name: "nogood".into(),
            kind: RowKind::Pin,
            coeffs,
            sense: Sense::Ge,
            rhs: 1.0 - inside as f64,
        }
    }

    pub fn violates_nogood(&self, x: &[u32]) -> bool {
        self.nogoods.iter().any(|ng| {
            let mut size = 0;
            for (v, &val) in self.variables.iter().zip(x) {
                if val > 0 {
                    if !ng.support.contains(&v.tuple) {
                        return false;
                    }
                    size += 1;
                }
            }
            size == ng.support.len()
        })
    }

    /// Exact feasibility of a full assignment.
    pub fn is_feasible(&self, x: &[u32]) -> bool {
        if x.len() != self.variables.len()
            || x.iter().zip(&self.variables).any(|(&v, var)| v > var.upper)
        {
            return false;
        }
        let total: u64 = x.iter().map(|&v| v as u64).sum();
        if total < self.count_bounds.0 || self.count_bounds.1.is_some_and(|u| total > u) {
            return false;
        }
        self.rows.iter().all(|r| r.holds(x)) && !self.violates_nogood(x)
    }

    pub fn objective_value(&self, x: &[u32]) -> Option<f64> {
        self.objective.as_ref().map(|o| {
            o.coeffs
                .iter()
                .zip(x)
                .map(|(c, &v)| c * v as f64)
                .sum()
        })
    }
}
