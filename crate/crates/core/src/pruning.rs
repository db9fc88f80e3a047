//! Cardinality bounds implied by the global constraints.
//!
//! For `A <= SUM(c) <= B` over strictly positive values, any valid package
//! needs at least `ceil(A / MAX(c))` and at most `floor(B / MIN(c))` tuples,
//! with MIN/MAX taken over the base-qualified tuples. Only the top-level
//! conjunction (and one level of OR under it) is analysed; everything else
//! contributes no bound.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::catalog::{stats_by_index, Relation};
use crate::error::{Error, Result};
use crate::evaluator::filter_base;
use crate::paql::{Agg, Atom, CmpOp, Formula, ValidatedQuery};
use crate::EPSILON;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AtomBound {
    pub atom: String,
    pub lower: u64,
    pub upper: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CardinalityBounds {
    pub lower: u64,
    /// `None` means unbounded.
    pub upper: Option<u64>,
    pub per_atom: Vec<AtomBound>,
}

impl CardinalityBounds {
    pub fn unbounded() -> Self {
        CardinalityBounds {
            lower: 0,
            upper: None,
            per_atom: Vec::new(),
        }
    }

    pub fn contains(&self, cardinality: u64) -> bool {
        cardinality >= self.lower && self.upper.is_none_or(|u| cardinality <= u)
    }

    pub fn is_empty(&self) -> bool {
        self.upper.is_some_and(|u| self.lower > u)
    }
}

/// `(lower, upper)`; `upper = None` is unbounded. Bounds may be crossed (`l > u`)
/// when the atom alone is unsatisfiable.
type Range = (i64, Option<i64>);

fn ceil_tol(x: f64) -> i64 {
    (x - 1e-9 * x.abs().max(1.0)).ceil() as i64
}

fn floor_tol(x: f64) -> i64 {
    (x + 1e-9 * x.abs().max(1.0)).floor() as i64
}

struct Context<'a> {
    relation: &'a Relation,
    query: &'a ValidatedQuery,
}

impl Context<'_> {
    fn count_bound(cmp: Option<CmpOp>, low: f64, high: f64) -> Option<Range> {
        Some(match cmp {
            None => (ceil_tol(low - EPSILON), Some(floor_tol(high + EPSILON))),
            Some(CmpOp::Eq) => (ceil_tol(low - EPSILON), Some(floor_tol(low + EPSILON))),
            Some(CmpOp::Le) => (0, Some(floor_tol(high + EPSILON))),
            Some(CmpOp::Lt) => (0, Some(ceil_tol(high - EPSILON) - 1)),
            Some(CmpOp::Ge) => (ceil_tol(low - EPSILON), None),
            Some(CmpOp::Gt) => (floor_tol(low + EPSILON) + 1, None),
            Some(CmpOp::Ne) => return None,
        })
    }

    fn sum_bound(&self, column: usize, cmp: Option<CmpOp>, low: f64, high: f64) -> Option<Range> {
        let stats = stats_by_index(self.relation, column, self.query.base());
        let (min, max) = (stats.min?, stats.max?);
        if min <= 0.0 {
            return None;
        }
        let lower = |a: f64| ceil_tol((a - EPSILON) / max).max(0);
        let upper = |b: f64| floor_tol((b + EPSILON) / min);
        Some(match cmp {
            None | Some(CmpOp::Eq) => {
                let high = if cmp.is_none() { high } else { low };
                (lower(low), Some(upper(high)))
            }
            Some(CmpOp::Le) | Some(CmpOp::Lt) => (0, Some(upper(high))),
            Some(CmpOp::Ge) | Some(CmpOp::Gt) => (lower(low), None),
            Some(CmpOp::Ne) => return None,
        })
    }

    fn atom(&self, atom: &Atom) -> Option<Range> {
        let (cmp, low, high) = match atom {
            Atom::Compare { cmp, value, .. } => (Some(*cmp), *value, *value),
            Atom::Between { low, high, .. } => (None, *low, *high),
        };
        let r = match atom.agg() {
            Agg::Count => Self::count_bound(cmp, low, high),
            Agg::Sum(c) => self.sum_bound(c.index, cmp, low, high),
            Agg::Avg(_) => None,
        }?;
        Some((r.0.max(0), r.1))
    }

    /// Bound for a conjunct of the top-level AND.
    fn conjunct(&self, f: &Formula, allow_or: bool) -> Option<Range> {
        match f {
            Formula::Atom(a) => self.atom(a),
            Formula::And(xs) => {
                let mut acc: Range = (0, None);
                for x in xs {
                    if let Some(r) = self.conjunct(x, false) {
                        acc = intersect(acc, r);
                    }
                }
                Some(acc)
            }
            Formula::Or(xs) if allow_or => {
                let mut hull: Option<Range> = None;
                for x in xs {
                    let r = self.conjunct(x, false)?;
                    hull = Some(match hull {
                        None => r,
                        Some(h) => union_hull(h, r),
                    });
                }
                hull
            }
            _ => None,
        }
    }
}

fn intersect(a: Range, b: Range) -> Range {
    let upper = match (a.1, b.1) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    };
    (a.0.max(b.0), upper)
}

fn union_hull(a: Range, b: Range) -> Range {
    let upper = match (a.1, b.1) {
        (Some(x), Some(y)) => Some(x.max(y)),
        _ => None,
    };
    (a.0.min(b.0), upper)
}

fn to_bounds(r: Range) -> (u64, Option<u64>) {
    match r.1 {
        // An unsatisfiable upper bound: report a crossed pair.
        Some(u) if u < 0 => (r.0.max(1) as u64, Some(0)),
        u => (r.0.max(0) as u64, u.map(|u| u as u64)),
    }
}

fn conjuncts(f: &Formula) -> Vec<&Formula> {
    match f {
        Formula::And(xs) => xs.iter().flat_map(conjuncts).collect(),
        other => vec![other],
    }
}

/// Cardinality bounds for any valid package of `query` over `relation`.
///
/// The upper bound is always capped at `n * max_multiplicity`, where `n` is the
/// number of base-qualified tuples.
pub fn bounds_for(query: &ValidatedQuery, relation: &Relation) -> CardinalityBounds {
    let n = filter_base(relation, query.base()).len() as u64;
    let cap = n * query.max_multiplicity() as u64;
    let ctx = Context { relation, query };

    let mut combined: Range = (0, None);
    let mut per_atom = Vec::new();
    if let Some(f) = query.formula() {
        for c in conjuncts(f) {
            let r = ctx.conjunct(c, true);
            if let Some(r) = r {
                combined = intersect(combined, r);
            }
            let (lower, upper) = to_bounds(r.unwrap_or((0, None)));
            per_atom.push(AtomBound {
                atom: c.to_string(),
                lower,
                upper,
            });
        }
    }
    let (lower, upper) = to_bounds(combined);
    CardinalityBounds {
        lower,
        upper: Some(upper.map_or(cap, |u| u.min(cap))),
        per_atom,
    }
}

/// Number of subsets of an `n`-set with cardinality in `[lower, upper]`.
pub fn pruned_space_size(n: u64, bounds: &CardinalityBounds) -> Result<BigUint> {
    let upper = bounds.upper.ok_or(Error::UnboundedUpper)?.min(n);
    let mut total = BigUint::zero();
    let mut binom = BigUint::one(); // C(n, 0)
    for c in 0..=upper {
        if c >= bounds.lower {
            total += &binom;
        }
        binom = binom * (n - c) / (c + 1);
    }
    Ok(total)
}
