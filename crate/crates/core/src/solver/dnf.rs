//! Negation normal form and disjunctive normal form of global formulas.

use super::model::Sense;
use crate::error::{Error, Result};
use crate::paql::{Agg, Atom, CmpOp, Formula};

/// `agg sense rhs`, the unit a model row is built from.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearAtom {
    pub agg: Agg,
    pub sense: Sense,
    pub rhs: f64,
}

enum Nnf {
    Lit(LinearAtom),
    And(Vec<Nnf>),
    Or(Vec<Nnf>),
}

fn lit(agg: &Agg, sense: Sense, rhs: f64) -> Nnf {
    Nnf::Lit(LinearAtom {
        agg: agg.clone(),
        sense,
        rhs,
    })
}

fn cmp_nnf(agg: &Agg, cmp: CmpOp, rhs: f64) -> Nnf {
    match Sense::from_cmp(cmp) {
        Some(s) => lit(agg, s, rhs),
        None => Nnf::Or(vec![lit(agg, Sense::Lt, rhs), lit(agg, Sense::Gt, rhs)]),
    }
}

fn to_nnf(f: &Formula, negated: bool) -> Nnf {
    match f {
        Formula::Atom(Atom::Compare { agg, cmp, value }) => {
            let cmp = if negated { cmp.negate() } else { *cmp };
            cmp_nnf(agg, cmp, *value)
        }
        Formula::Atom(Atom::Between { agg, low, high }) => {
            if negated {
                Nnf::Or(vec![lit(agg, Sense::Lt, *low), lit(agg, Sense::Gt, *high)])
            } else {
                Nnf::And(vec![lit(agg, Sense::Ge, *low), lit(agg, Sense::Le, *high)])
            }
        }
        Formula::And(xs) => {
            let parts = xs.iter().map(|x| to_nnf(x, negated)).collect();
            if negated {
                Nnf::Or(parts)
            } else {
                Nnf::And(parts)
            }
        }
        Formula::Or(xs) => {
            let parts = xs.iter().map(|x| to_nnf(x, negated)).collect();
            if negated {
                Nnf::And(parts)
            } else {
                Nnf::Or(parts)
            }
        }
        Formula::Not(x) => to_nnf(x, !negated),
    }
}

fn expand(n: Nnf, limit: usize) -> Result<Vec<Vec<LinearAtom>>> {
    match n {
        Nnf::Lit(a) => Ok(vec![vec![a]]),
        Nnf::Or(xs) => {
            let mut out = Vec::new();
            for x in xs {
                out.extend(expand(x, limit)?);
                if out.len() > limit {
                    return Err(Error::DnfBlowup { limit });
                }
            }
            Ok(out)
        }
        Nnf::And(xs) => {
            let mut acc: Vec<Vec<LinearAtom>> = vec![Vec::new()];
            for x in xs {
                let part = expand(x, limit)?;
                if acc.len().saturating_mul(part.len()) > limit {
                    return Err(Error::DnfBlowup { limit });
                }
                let mut next = Vec::with_capacity(acc.len() * part.len());
                for a in &acc {
                    for p in &part {
                        let mut c = a.clone();
                        c.extend(p.iter().cloned());
                        next.push(c);
                    }
                }
                acc = next;
            }
            Ok(acc)
        }
    }
}

/// Disjuncts of `formula`, each a conjunction of linear atoms. An absent
/// formula is a single empty conjunction.
pub fn to_dnf(formula: Option<&Formula>, limit: usize) -> Result<Vec<Vec<LinearAtom>>> {
    match formula {
        None => Ok(vec![Vec::new()]),
        Some(f) => expand(to_nnf(f, false), limit),
    }
}
