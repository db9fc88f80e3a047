//! Query → integer linear program.

use super::dnf::{to_dnf, LinearAtom};
use super::model::{IlpModel, ObjectiveRow, Row, RowKind, Sense, Variable};
use crate::catalog::Relation;
use crate::error::{Error, Result};
use crate::evaluator::filter_base;
use crate::paql::{Agg, ValidatedQuery};
use crate::pruning::CardinalityBounds;

/// Translates a query whose global formula is a conjunction (after NOT is
/// pushed down). Disjunctive formulas go through [`super::solve_formula`].
pub fn translate(
    query: &ValidatedQuery,
    relation: &Relation,
    bounds: &CardinalityBounds,
) -> Result<IlpModel> {
    let mut disjuncts = to_dnf(query.formula(), usize::MAX)?;
    if disjuncts.len() != 1 {
        return Err(Error::UnsupportedFeature(format!(
            "formula has {} disjuncts; a single model needs a conjunction",
            disjuncts.len()
        )));
    }
    Ok(translate_conjunction(
        query,
        relation,
        bounds,
        &disjuncts.pop().unwrap(),
    ))
}

/// One model per disjunct of the global formula, in DNF order.
pub fn translate_disjuncts(
    query: &ValidatedQuery,
    relation: &Relation,
    bounds: &CardinalityBounds,
    dnf_limit: usize,
) -> Result<Vec<IlpModel>> {
    Ok(to_dnf(query.formula(), dnf_limit)?
        .iter()
        .map(|atoms| translate_conjunction(query, relation, bounds, atoms))
        .collect())
}

pub(crate) fn translate_conjunction(
    query: &ValidatedQuery,
    relation: &Relation,
    bounds: &CardinalityBounds,
    atoms: &[LinearAtom],
) -> IlpModel {
    let upper = query.max_multiplicity();
    let vars: Vec<Variable> = filter_base(relation, query.base())
        .into_iter()
        .map(|tuple| Variable { tuple, upper })
        .collect();
    let column = |c: usize| -> Vec<f64> {
        vars.iter().map(|v| relation.number(v.tuple, c)).collect()
    };
    let ones = vec![1.0; vars.len()];

    let mut model = IlpModel::new(relation.name(), vars.clone());
    let mut avg_support = false;
    for (i, atom) in atoms.iter().enumerate() {
        let (kind, coeffs, rhs) = match &atom.agg {
            Agg::Count => (RowKind::Count, ones.clone(), atom.rhs),
            Agg::Sum(c) => (RowKind::Sum, column(c.index), atom.rhs),
            Agg::Avg(c) => {
                avg_support = true;
                let coeffs = column(c.index).into_iter().map(|v| v - atom.rhs).collect();
                (RowKind::Avg, coeffs, 0.0)
            }
        };
        model.rows.push(Row {
            name: format!("c{i}"),
            kind,
            coeffs,
            sense: atom.sense,
            rhs,
        });
    }
    if avg_support {
        model.rows.push(Row {
            name: "avg_nonempty".into(),
            kind: RowKind::AvgSupport,
            coeffs: ones,
            sense: Sense::Ge,
            rhs: 1.0,
        });
    }
    model.count_bounds = (bounds.lower, bounds.upper);
    model.objective = query.objective().map(|(direction, agg)| ObjectiveRow {
        direction,
        coeffs: match agg {
            Agg::Count => vec![1.0; vars.len()],
            Agg::Sum(c) => column(c.index),
            Agg::Avg(_) => unreachable!("validation rejects AVG objectives"),
        },
    });
    model
}
