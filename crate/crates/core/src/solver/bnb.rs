//! Depth-first branch-and-bound over bounded integer variables.
//!
//! Nodes are pruned by interval propagation on every row and, when an
//! objective is present, by the minimum over single-row relaxations: each
//! `<=` row with non-negative coefficients (the cardinality row included) is
//! relaxed to a fractional knapsack and solved greedily by value/weight ratio.
//! Branching picks the fractional item of the tightest relaxation.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::model::{IlpModel, Sense};
use crate::paql::Direction;
use crate::EPSILON;

pub(crate) struct BnbParams {
    pub deadline: Option<Instant>,
    pub node_limit: Option<u64>,
    pub seed: u64,
    /// Only solutions whose maximize-normalized objective beats this count.
    pub cutoff: Option<f64>,
}

#[derive(Debug)]
pub(crate) struct BnbResult {
    pub solution: Option<Vec<u32>>,
    /// The search space was fully explored (or the first feasible leaf was
    /// found, in feasibility mode).
    pub complete: bool,
    pub timed_out: bool,
    pub nodes: u64,
}

struct PropRow {
    coeffs: Vec<(usize, f64)>,
    upper: Option<f64>,
    lower: Option<f64>,
}

struct Knapsack {
    row: usize,
    /// Variables with positive objective coefficient, zero weights first, then
    /// by decreasing value/weight.
    order: Vec<usize>,
    weights: Vec<f64>,
}

struct Search<'a, F> {
    model: &'a IlpModel,
    rows: Vec<PropRow>,
    /// Objective normalized to maximization.
    obj: Option<Vec<f64>>,
    knapsacks: Vec<Knapsack>,
    /// Branching order when no relaxation suggests a variable.
    order: Vec<usize>,
    prefer_high: Vec<bool>,
    accept: F,
    params: BnbParams,
    best: Option<(Vec<u32>, f64)>,
    nodes: u64,
    timed_out: bool,
    stop: bool,
}

fn prop_row(coeffs: &[f64], sense: Sense, rhs: f64) -> PropRow {
    let (upper, lower) = match sense {
        Sense::Le => (Some(rhs + EPSILON), None),
        Sense::Lt => (Some(rhs - EPSILON), None),
        Sense::Ge => (None, Some(rhs - EPSILON)),
        Sense::Gt => (None, Some(rhs + EPSILON)),
        Sense::Eq => (Some(rhs + EPSILON), Some(rhs - EPSILON)),
    };
    PropRow {
        coeffs: coeffs
            .iter()
            .enumerate()
            .filter(|(_, a)| **a != 0.0)
            .map(|(j, a)| (j, *a))
            .collect(),
        upper,
        lower,
    }
}

fn slack_tol(limit: f64) -> f64 {
    1e-9 * (1.0 + limit.abs())
}

pub(crate) fn branch_and_bound<F>(model: &IlpModel, params: BnbParams, accept: F) -> BnbResult
where
    F: FnMut(&[u32]) -> bool,
{
    let n = model.variables.len();
    let mut rows: Vec<PropRow> = model
        .rows
        .iter()
        .map(|r| prop_row(&r.coeffs, r.sense, r.rhs))
        .collect();
    let ones = vec![1.0; n];
    let (cl, cu) = model.count_bounds;
    if cl > 0 {
        rows.push(prop_row(&ones, Sense::Ge, cl as f64));
    }
    if let Some(u) = cu {
        rows.push(prop_row(&ones, Sense::Le, u as f64));
    }
    if model.is_binary() {
        for ng in &model.nogoods {
            let r = model.nogood_row(ng);
            rows.push(prop_row(&r.coeffs, r.sense, r.rhs));
        }
    }

    let obj: Option<Vec<f64>> = model.objective.as_ref().map(|o| match o.direction {
        Direction::Maximize => o.coeffs.clone(),
        Direction::Minimize => o.coeffs.iter().map(|c| -c).collect(),
    });

    let mut knapsacks = Vec::new();
    if let Some(c) = &obj {
        for (ri, r) in rows.iter().enumerate() {
            if r.upper.is_none() || r.coeffs.iter().any(|&(_, a)| a < 0.0) {
                continue;
            }
            let mut weight = vec![0.0; n];
            for &(j, a) in &r.coeffs {
                weight[j] = a;
            }
            let mut order: Vec<usize> = (0..n).filter(|&j| c[j] > 0.0).collect();
            let key = |j: usize| {
                if weight[j] == 0.0 {
                    f64::INFINITY
                } else {
                    c[j] / weight[j]
                }
            };
            order.sort_by(|&a, &b| key(b).total_cmp(&key(a)).then(a.cmp(&b)));
            knapsacks.push(Knapsack {
                row: ri,
                order,
                weights: weight,
            });
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let (order, prefer_high) = match &obj {
        Some(c) => {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| c[b].total_cmp(&c[a]).then(a.cmp(&b)));
            (order, c.iter().map(|&v| v > 0.0).collect())
        }
        None => {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng);
            (order, (0..n).map(|_| rng.gen_bool(0.5)).collect())
        }
    };

    let mut search = Search {
        model,
        rows,
        obj,
        knapsacks,
        order,
        prefer_high,
        accept,
        params,
        best: None,
        nodes: 0,
        timed_out: false,
        stop: false,
    };
    let lo = vec![0i64; n];
    let hi: Vec<i64> = model.variables.iter().map(|v| v.upper as i64).collect();
    search.dfs(lo, hi);

    let complete = !search.timed_out;
    BnbResult {
        solution: search.best.map(|(x, _)| x),
        complete,
        timed_out: search.timed_out,
        nodes: search.nodes,
    }
}

impl<F> Search<'_, F>
where
    F: FnMut(&[u32]) -> bool,
{
    fn out_of_budget(&mut self) -> bool {
        let over_limit = self.params.node_limit.is_some_and(|l| self.nodes > l);
        let past_deadline = self.nodes.is_multiple_of(64)
            && self.params.deadline.is_some_and(|d| Instant::now() >= d);
        if over_limit || past_deadline {
            self.timed_out = true;
        }
        self.timed_out
    }

    /// Interval propagation to a fixpoint; false if the node is infeasible.
    fn propagate(&self, lo: &mut [i64], hi: &mut [i64]) -> bool {
        for _ in 0..100 {
            let mut changed = false;
            for row in &self.rows {
                let (mut min_act, mut max_act) = (0.0, 0.0);
                for &(j, a) in &row.coeffs {
                    if a > 0.0 {
                        min_act += a * lo[j] as f64;
                        max_act += a * hi[j] as f64;
                    } else {
                        min_act += a * hi[j] as f64;
                        max_act += a * lo[j] as f64;
                    }
                }
                if let Some(u) = row.upper {
                    if min_act > u + slack_tol(u) {
                        return false;
                    }
                    let slack = u - min_act;
                    for &(j, a) in &row.coeffs {
                        let room = (slack / a.abs() + 1e-9).floor() as i64;
                        if room < hi[j] - lo[j] {
                            if a > 0.0 {
                                hi[j] = lo[j] + room;
                            } else {
                                lo[j] = hi[j] - room;
                            }
                            changed = true;
                        }
                    }
                }
                if let Some(l) = row.lower {
                    if max_act < l - slack_tol(l) {
                        return false;
                    }
                    let slack = max_act - l;
                    for &(j, a) in &row.coeffs {
                        let room = (slack / a.abs() + 1e-9).floor() as i64;
                        if room < hi[j] - lo[j] {
                            if a > 0.0 {
                                lo[j] = hi[j] - room;
                            } else {
                                hi[j] = lo[j] + room;
                            }
                            changed = true;
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
        if !self.model.nogoods.is_empty() {
            let decided = lo.iter().zip(hi.iter()).all(|(&l, &h)| l >= 1 || h == 0);
            if decided {
                let x: Vec<u32> = lo.iter().map(|&v| v.max(0) as u32).collect();
                if self.model.violates_nogood(&x) {
                    return false;
                }
            }
        }
        true
    }

    /// Upper bound on the normalized objective, and the variable the tightest
    /// relaxation takes fractionally.
    fn bound(&self, c: &[f64], lo: &[i64], hi: &[i64]) -> (f64, Option<usize>) {
        let fixed: f64 = c.iter().zip(lo).map(|(c, &l)| c * l as f64).sum();
        let mut best = fixed
            + c.iter()
                .enumerate()
                .filter(|(_, &cj)| cj > 0.0)
                .map(|(j, cj)| cj * (hi[j] - lo[j]) as f64)
                .sum::<f64>();
        let mut critical = None;
        for k in &self.knapsacks {
            let row = &self.rows[k.row];
            let used: f64 = row.coeffs.iter().map(|&(j, a)| a * lo[j] as f64).sum();
            let mut cap = row.upper.unwrap() - used;
            let mut value = fixed;
            let mut frac = None;
            for &j in &k.order {
                let units = (hi[j] - lo[j]) as f64;
                if units == 0.0 {
                    continue;
                }
                let w = k.weights[j];
                if w == 0.0 {
                    value += c[j] * units;
                    continue;
                }
                let take = (cap / w).max(0.0);
                if take >= units {
                    value += c[j] * units;
                    cap -= w * units;
                } else {
                    value += c[j] * take;
                    frac = Some(j);
                    break;
                }
            }
            if value < best {
                best = value;
                critical = frac;
            }
        }
        (best, critical)
    }

    fn dfs(&mut self, mut lo: Vec<i64>, mut hi: Vec<i64>) {
        if self.stop || self.timed_out {
            return;
        }
        self.nodes += 1;
        if self.out_of_budget() {
            return;
        }
        if !self.propagate(&mut lo, &mut hi) {
            return;
        }

        let mut pick = None;
        if let Some(c) = &self.obj {
            let (b, critical) = self.bound(c, &lo, &hi);
            let floor = match (&self.best, self.params.cutoff) {
                (Some((_, v)), _) => Some(*v),
                (None, cut) => cut,
            };
            if floor.is_some_and(|f| b <= f + EPSILON) {
                return;
            }
            pick = critical.filter(|&j| lo[j] < hi[j]);
        }
        let pick = pick.or_else(|| self.order.iter().copied().find(|&j| lo[j] < hi[j]));

        let Some(j) = pick else {
            self.leaf(&lo);
            return;
        };
        let values: Vec<i64> = if self.prefer_high[j] {
            (lo[j]..=hi[j]).rev().collect()
        } else {
            (lo[j]..=hi[j]).collect()
        };
        for v in values {
            let (mut l2, mut h2) = (lo.clone(), hi.clone());
            l2[j] = v;
            h2[j] = v;
            self.dfs(l2, h2);
            if self.stop || self.timed_out {
                return;
            }
        }
    }

    fn leaf(&mut self, lo: &[i64]) {
        let x: Vec<u32> = lo.iter().map(|&v| v as u32).collect();
        if !self.model.is_feasible(&x) {
            return;
        }
        let value = self
            .obj
            .as_ref()
            .map(|c| c.iter().zip(&x).map(|(c, &v)| c * v as f64).sum::<f64>());
        if let Some(v) = value {
            let floor = self.best.as_ref().map(|b| b.1).or(self.params.cutoff);
            if floor.is_some_and(|f| v <= f + EPSILON) {
                return;
            }
        }
        if !(self.accept)(&x) {
            return;
        }
        match value {
            Some(v) => self.best = Some((x, v)),
            None => {
                self.best = Some((x, 0.0));
                self.stop = true;
            }
        }
    }
}
