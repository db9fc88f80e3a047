//! Name resolution and type checking against a schema.

use std::fmt;

use super::ast::*;
use super::printer::fmt_number;
use crate::catalog::{ColumnKind, Schema, TupleRow, Value};
use crate::error::{Error, Result};

/// A resolved column: schema position plus its (lower-cased) name.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ColumnId {
    pub index: usize,
    pub name: String,
}

/// A linear package aggregate with its column resolved.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Agg {
    Count,
    Sum(ColumnId),
    Avg(ColumnId),
}

impl fmt::Display for Agg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Agg::Count => f.write_str("COUNT(*)"),
            Agg::Sum(c) => write!(f, "SUM({})", c.name),
            Agg::Avg(c) => write!(f, "AVG({})", c.name),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Atom {
    Compare { agg: Agg, cmp: CmpOp, value: f64 },
    Between { agg: Agg, low: f64, high: f64 },
}

impl Atom {
    pub fn agg(&self) -> &Agg {
        match self {
            Atom::Compare { agg, .. } | Atom::Between { agg, .. } => agg,
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Compare { agg, cmp, value } => write!(f, "{agg} {cmp} {}", fmt_number(*value)),
            Atom::Between { agg, low, high } => write!(
                f,
                "{agg} BETWEEN {} AND {}",
                fmt_number(*low),
                fmt_number(*high)
            ),
        }
    }
}

/// Resolved global formula.
#[derive(Debug, Clone, PartialEq)]
pub enum Formula {
    Atom(Atom),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Not(Box<Formula>),
}

impl Formula {
    pub fn atoms(&self) -> Vec<&Atom> {
        let mut out = Vec::new();
        fn walk<'a>(f: &'a Formula, out: &mut Vec<&'a Atom>) {
            match f {
                Formula::Atom(a) => out.push(a),
                Formula::And(xs) | Formula::Or(xs) => xs.iter().for_each(|x| walk(x, out)),
                Formula::Not(x) => walk(x, out),
            }
        }
        walk(self, &mut out);
        out
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let group = |x: &Formula| matches!(x, Formula::And(_) | Formula::Or(_));
        match self {
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::And(xs) | Formula::Or(xs) => {
                let sep = if matches!(self, Formula::And(_)) {
                    " AND "
                } else {
                    " OR "
                };
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(sep)?;
                    }
                    if group(x) {
                        write!(f, "({x})")?;
                    } else {
                        write!(f, "{x}")?;
                    }
                }
                Ok(())
            }
            Formula::Not(x) if group(x) => write!(f, "NOT ({x})"),
            Formula::Not(x) => write!(f, "NOT {x}"),
        }
    }
}

/// Resolved per-tuple predicate.
#[derive(Debug, Clone, PartialEq)]
pub enum BaseExpr {
    Num {
        column: usize,
        cmp: CmpOp,
        value: f64,
    },
    Text {
        column: usize,
        equal: bool,
        value: String,
    },
    And(Vec<BaseExpr>),
    Or(Vec<BaseExpr>),
    Not(Box<BaseExpr>),
}

impl BaseExpr {
    /// Exact comparison; text equality is case-sensitive.
    pub fn matches(&self, row: &TupleRow) -> bool {
        match self {
            BaseExpr::Num { column, cmp, value } => {
                let Value::Number(v) = row.values[*column] else {
                    return false;
                };
                match cmp {
                    CmpOp::Eq => v == *value,
                    CmpOp::Ne => v != *value,
                    CmpOp::Lt => v < *value,
                    CmpOp::Le => v <= *value,
                    CmpOp::Gt => v > *value,
                    CmpOp::Ge => v >= *value,
                }
            }
            BaseExpr::Text {
                column,
                equal,
                value,
            } => match &row.values[*column] {
                Value::Text(s) => (s == value) == *equal,
                Value::Number(_) => false,
            },
            BaseExpr::And(xs) => xs.iter().all(|x| x.matches(row)),
            BaseExpr::Or(xs) => xs.iter().any(|x| x.matches(row)),
            BaseExpr::Not(x) => !x.matches(row),
        }
    }
}

/// A query whose column references are resolved and type-checked.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedQuery {
    ast: PackageQuery,
    base: Option<BaseExpr>,
    formula: Option<Formula>,
    objective: Option<(Direction, Agg)>,
}

impl ValidatedQuery {
    pub fn ast(&self) -> &PackageQuery {
        &self.ast
    }

    pub fn base(&self) -> Option<&BaseExpr> {
        self.base.as_ref()
    }

    pub fn formula(&self) -> Option<&Formula> {
        self.formula.as_ref()
    }

    pub fn objective(&self) -> Option<(Direction, &Agg)> {
        self.objective.as_ref().map(|(d, a)| (*d, a))
    }

    /// Per-tuple multiplicity cap: `REPEAT k` allows `k + 1`, no REPEAT allows 1.
    pub fn max_multiplicity(&self) -> u32 {
        self.ast.repeat.map_or(1, |k| k.saturating_add(1))
    }

    #[cfg(test)]
    pub(crate) fn from_parts_for_test(mut q: ValidatedQuery, formula: Option<Formula>) -> Self {
        q.formula = formula;
        q
    }

    /// Same query without its objective: a feasibility problem.
    pub fn without_objective(&self) -> ValidatedQuery {
        let mut q = self.clone();
        q.ast.objective = None;
        q.objective = None;
        q
    }
}

pub fn validate(ast: &PackageQuery, schema: &Schema) -> Result<ValidatedQuery> {
    let v = Validator { ast, schema };
    let base = ast.base_predicate.as_ref().map(|b| v.base(b)).transpose()?;
    let formula = ast
        .global_formula
        .as_ref()
        .map(|g| v.global(g))
        .transpose()?;
    let objective = match &ast.objective {
        None => None,
        Some(o) => {
            let agg = v.aggregate(&o.agg)?;
            if matches!(agg, Agg::Avg(_)) {
                return Err(Error::UnsupportedFeature(
                    "AVG objectives are not linear".into(),
                ));
            }
            Some((o.direction, agg))
        }
    };
    Ok(ValidatedQuery {
        ast: ast.clone(),
        base,
        formula,
        objective,
    })
}

struct Validator<'a> {
    ast: &'a PackageQuery,
    schema: &'a Schema,
}

impl Validator<'_> {
    fn resolve(&self, col: &ColumnRef, allowed_qualifier: &str) -> Result<ColumnId> {
        if let Some(q) = &col.qualifier {
            if !q.eq_ignore_ascii_case(allowed_qualifier) {
                return Err(Error::NoSuchColumn(col.to_string()));
            }
        }
        let index = self
            .schema
            .index_of(&col.column)
            .ok_or_else(|| Error::NoSuchColumn(col.to_string()))?;
        Ok(ColumnId {
            index,
            name: self.schema.column(index).name.clone(),
        })
    }

    fn base(&self, p: &BasePredicate) -> Result<BaseExpr> {
        Ok(match p {
            BasePredicate::Compare { column, cmp, value } => {
                let id = self.resolve(column, &self.ast.relation_alias)?;
                match (self.schema.column(id.index).kind, value) {
                    (ColumnKind::Numeric, Literal::Number(v)) => BaseExpr::Num {
                        column: id.index,
                        cmp: *cmp,
                        value: *v,
                    },
                    (ColumnKind::Text, Literal::Text(s)) => match cmp {
                        CmpOp::Eq | CmpOp::Ne => BaseExpr::Text {
                            column: id.index,
                            equal: *cmp == CmpOp::Eq,
                            value: s.clone(),
                        },
                        _ => {
                            return Err(Error::TypeMismatch(format!(
                                "text column `{}` only supports = and <>",
                                id.name
                            )))
                        }
                    },
                    (ColumnKind::Numeric, Literal::Text(_)) => {
                        return Err(Error::TypeMismatch(format!(
                            "numeric column `{}` compared with a string",
                            id.name
                        )))
                    }
                    (ColumnKind::Text, Literal::Number(_)) => {
                        return Err(Error::TypeMismatch(format!(
                            "text column `{}` compared with a number",
                            id.name
                        )))
                    }
                }
            }
            BasePredicate::And { args } => {
                BaseExpr::And(args.iter().map(|a| self.base(a)).collect::<Result<_>>()?)
            }
            BasePredicate::Or { args } => {
                BaseExpr::Or(args.iter().map(|a| self.base(a)).collect::<Result<_>>()?)
            }
            BasePredicate::Not { arg } => BaseExpr::Not(Box::new(self.base(arg)?)),
        })
    }

    fn aggregate(&self, a: &Aggregate) -> Result<Agg> {
        let numeric = |c: &ColumnRef| -> Result<ColumnId> {
            let id = self.resolve(c, &self.ast.package_alias)?;
            if self.schema.column(id.index).kind != ColumnKind::Numeric {
                return Err(Error::TypeMismatch(format!(
                    "aggregate over text column `{}`",
                    id.name
                )));
            }
            Ok(id)
        };
        Ok(match a {
            Aggregate::Count => Agg::Count,
            Aggregate::Sum(c) => Agg::Sum(numeric(c)?),
            Aggregate::Avg(c) => Agg::Avg(numeric(c)?),
            Aggregate::Min(_) | Aggregate::Max(_) => {
                return Err(Error::UnsupportedFeature(
                    "MIN/MAX package aggregates are not linear".into(),
                ))
            }
        })
    }

    fn global(&self, g: &GlobalFormula) -> Result<Formula> {
        Ok(match g {
            GlobalFormula::Atom { atom } => Formula::Atom(match atom {
                GlobalAtom::Compare { agg, cmp, value } => Atom::Compare {
                    agg: self.aggregate(agg)?,
                    cmp: *cmp,
                    value: *value,
                },
                GlobalAtom::Between { agg, low, high } => {
                    let agg = self.aggregate(agg)?;
                    if low > high {
                        return Err(Error::EmptyBetween {
                            low: *low,
                            high: *high,
                        });
                    }
                    Atom::Between {
                        agg,
                        low: *low,
                        high: *high,
                    }
                }
            }),
            GlobalFormula::And { args } => {
                Formula::And(args.iter().map(|a| self.global(a)).collect::<Result<_>>()?)
            }
            GlobalFormula::Or { args } => {
                Formula::Or(args.iter().map(|a| self.global(a)).collect::<Result<_>>()?)
            }
            GlobalFormula::Not { arg } => Formula::Not(Box::new(self.global(arg)?)),
        })
    }
}
