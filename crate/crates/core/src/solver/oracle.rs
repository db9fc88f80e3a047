//! Exhaustive enumeration of valid packages, for small inputs only.

use crate::catalog::Relation;
use crate::error::{Error, Result};
use crate::evaluator::{filter_base, objective_value, satisfies, Package};
use crate::paql::{Direction, ValidatedQuery};
use crate::pruning::CardinalityBounds;

/// Largest total number of multiplicity slots the oracle will enumerate.
pub const ORACLE_SLOT_LIMIT: u64 = 25;

/// Every valid package with its objective value, best objective first, then by
/// tuple ids.
///
/// When `bounds` is given, only packages whose cardinality lies inside them
/// are considered.
pub fn brute_force_oracle(
    query: &ValidatedQuery,
    relation: &Relation,
    bounds: Option<&CardinalityBounds>,
) -> Result<Vec<(Package, Option<f64>)>> {
    let ids = filter_base(relation, query.base());
    let cap = query.max_multiplicity();
    let slots = ids.len() as u64 * u64::from(cap);
    if slots > ORACLE_SLOT_LIMIT {
        return Err(Error::TooLarge {
            size: slots,
            limit: ORACLE_SLOT_LIMIT,
        });
    }
    let mut counts = vec![0u32; ids.len()];
    let mut out = Vec::new();
    loop {
        let card: u64 = counts.iter().map(|&c| u64::from(c)).sum();
        if bounds.is_none_or(|b| b.contains(card)) {
            let pkg = Package::from_counts(
                relation.name(),
                ids.iter().copied().zip(counts.iter().copied()),
            );
            if satisfies(&pkg, query, relation) {
                let v = objective_value(&pkg, query, relation);
                out.push((pkg, v));
            }
        }
        // odometer step
        let mut i = 0;
        while i < counts.len() && counts[i] == cap {
            counts[i] = 0;
            i += 1;
        }
        if i == counts.len() {
            break;
        }
        counts[i] += 1;
    }
    let sign = match query.objective() {
        Some((Direction::Minimize, _)) => 1.0,
        _ => -1.0,
    };
    out.sort_by(|a, b| {
        let key = |v: Option<f64>| v.map(|v| sign * v).unwrap_or(0.0);
        key(a.1).total_cmp(&key(b.1)).then_with(|| a.0.cmp(&b.0))
    });
    Ok(out)
}
