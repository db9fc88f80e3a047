//! Heuristic package search by k-tuple replacement.
//!
//! An invalid package is repaired by moves that lower a violation measure; a
//! valid one is improved by validity-preserving moves that raise the objective.
//! Moves replace `k` occurrences (k = 1 or 2) with `k` base-qualified tuples,
//! optionally also inserting or deleting a single occurrence.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::catalog::{Relation, TupleId};
use crate::error::{Error, Result};
use crate::evaluator::{atom_holds, eval_aggregate, filter_base, satisfies, Package};
use crate::paql::{Agg, Atom, Direction, Formula, ValidatedQuery};
use crate::pruning::bounds_for;
use crate::solver::{SolveOutcome, SolveStats, SolveStatus};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateDelta {
    pub aggregate: String,
    /// `None` when the aggregate is undefined before or after (AVG of empty).
    pub delta: Option<f64>,
}

/// Remove `removed`, then add `added`; counts are occurrences.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Replacement {
    pub removed: Vec<(TupleId, u32)>,
    pub added: Vec<(TupleId, u32)>,
    pub deltas: Vec<AggregateDelta>,
}

impl Replacement {
    pub fn apply(&self, package: &Package) -> Package {
        let mut p = package.clone();
        for &(t, c) in &self.removed {
            p.remove(t, c);
        }
        for &(t, c) in &self.added {
            p.add(t, c);
        }
        p
    }
}

fn grouped(ids: &[TupleId]) -> Vec<(TupleId, u32)> {
    let mut out: Vec<(TupleId, u32)> = Vec::new();
    for &t in ids {
        match out.last_mut() {
            Some((last, c)) if *last == t => *c += 1,
            _ => out.push((t, 1)),
        }
    }
    out
}

fn applied(package: &Package, out: &[TupleId], ins: &[TupleId]) -> Package {
    let mut p = package.clone();
    for &t in out {
        p.remove(t, 1);
    }
    for &t in ins {
        p.add(t, 1);
    }
    p
}

/// Calls `f(out, in)` for every k-swap; stops early when `f` returns true.
/// Out slots are distinct tuple (multi)sets from the package in id order,
/// candidates follow `cands` order. Identity and overlapping swaps are skipped.
fn for_each_swap(
    package: &Package,
    cands: &[TupleId],
    cap: u32,
    k: usize,
    f: &mut dyn FnMut(&[TupleId], &[TupleId]) -> bool,
) -> bool {
    let support: Vec<TupleId> = package.support().collect();
    match k {
        1 => {
            for &a in &support {
                for &c in cands {
                    if c != a && package.get(c) < cap && f(&[a], &[c]) {
                        return true;
                    }
                }
            }
        }
        2 => {
            for i in 0..support.len() {
                for j in i..support.len() {
                    if i == j && package.get(support[i]) < 2 {
                        continue;
                    }
                    let out = [support[i], support[j]];
                    for ci in 0..cands.len() {
                        let c = cands[ci];
                        if out.contains(&c) {
                            continue;
                        }
                        for &d in &cands[ci..] {
                            if out.contains(&d) {
                                continue;
                            }
                            let fits = if c == d {
                                package.get(c) + 2 <= cap
                            } else {
                                package.get(c) < cap && package.get(d) < cap
                            };
                            let ins = if c <= d { [c, d] } else { [d, c] };
                            if fits && f(&out, &ins) {
                                return true;
                            }
                        }
                    }
                }
            }
        }
        _ => {}
    }
    false
}

fn tracked_aggs(query: &ValidatedQuery) -> Vec<Agg> {
    let mut aggs: Vec<Agg> = Vec::new();
    let formula_aggs = query.formula().map(|f| f.atoms()).unwrap_or_default();
    for a in formula_aggs
        .into_iter()
        .map(|a| a.agg())
        .chain(query.objective().map(|o| o.1))
    {
        if !aggs.contains(a) {
            aggs.push(a.clone());
        }
    }
    aggs
}

/// All replacements of exactly `k` occurrences that turn `package` into a valid package.
pub fn find_replacements(
    package: &Package,
    query: &ValidatedQuery,
    relation: &Relation,
    k: usize,
) -> Result<Vec<Replacement>> {
    if !(1..=2).contains(&k) {
        return Err(Error::KUnsupported(k));
    }
    let cands = filter_base(relation, query.base());
    let aggs = tracked_aggs(query);
    let before: Vec<Option<f64>> = aggs
        .iter()
        .map(|a| eval_aggregate(package, relation, a).ok())
        .collect();
    let mut found = Vec::new();
    for_each_swap(
        package,
        &cands,
        query.max_multiplicity(),
        k,
        &mut |out, ins| {
            let next = applied(package, out, ins);
            if satisfies(&next, query, relation) {
                let deltas = aggs
                    .iter()
                    .zip(&before)
                    .map(|(a, b)| AggregateDelta {
                        aggregate: a.to_string(),
                        delta: match (b, eval_aggregate(&next, relation, a).ok()) {
                            (Some(x), Some(y)) => Some(y - x),
                            _ => None,
                        },
                    })
                    .collect();
                found.push(Replacement {
                    removed: grouped(out),
                    added: grouped(ins),
                    deltas,
                });
            }
            false
        },
    );
    Ok(found)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalSearchConfig {
    /// Budget of applied moves across all restarts.
    pub max_iters: u64,
    pub k_max: usize,
    pub seed: u64,
    /// Also try inserting or deleting single occurrences.
    pub cardinality_moves: bool,
    /// Fresh random starts allowed after an invalid local optimum.
    pub restarts: u32,
}

impl Default for LocalSearchConfig {
    fn default() -> Self {
        LocalSearchConfig {
            max_iters: 1000,
            k_max: 2,
            seed: 0,
            cardinality_moves: true,
            restarts: 5,
        }
    }
}

/// COUNT and per-column sums of a package.
#[derive(Clone)]
struct Totals {
    count: f64,
    sums: Vec<f64>,
}

struct Scorer<'a> {
    query: &'a ValidatedQuery,
    relation: &'a Relation,
    columns: Vec<usize>,
}

impl<'a> Scorer<'a> {
    fn new(query: &'a ValidatedQuery, relation: &'a Relation) -> Self {
        let mut columns: Vec<usize> = tracked_aggs(query)
            .iter()
            .filter_map(|a| match a {
                Agg::Sum(c) | Agg::Avg(c) => Some(c.index),
                Agg::Count => None,
            })
            .collect();
        columns.sort_unstable();
        columns.dedup();
        Scorer {
            query,
            relation,
            columns,
        }
    }

    fn shift(&self, totals: &mut Totals, t: TupleId, times: f64) {
        totals.count += times;
        for &c in &self.columns {
            totals.sums[c] += times * self.relation.number(t, c);
        }
    }

    fn totals(&self, package: &Package) -> Totals {
        let mut totals = Totals {
            count: 0.0,
            sums: vec![0.0; self.relation.schema().len()],
        };
        for (t, m) in package.iter() {
            self.shift(&mut totals, t, m as f64);
        }
        totals
    }

    fn after(&self, totals: &Totals, out: &[TupleId], ins: &[TupleId]) -> Totals {
        let mut next = totals.clone();
        out.iter().for_each(|&t| self.shift(&mut next, t, -1.0));
        ins.iter().for_each(|&t| self.shift(&mut next, t, 1.0));
        next
    }

    fn value(totals: &Totals, agg: &Agg) -> Option<f64> {
        match agg {
            Agg::Count => Some(totals.count),
            Agg::Sum(c) => Some(totals.sums[c.index]),
            Agg::Avg(c) if totals.count > 0.0 => Some(totals.sums[c.index] / totals.count),
            Agg::Avg(_) => None,
        }
    }

    /// Larger is better for both directions.
    fn objective(&self, totals: &Totals) -> Option<f64> {
        self.query.objective().and_then(|(dir, agg)| {
            Self::value(totals, agg).map(|v| match dir {
                Direction::Maximize => v,
                Direction::Minimize => -v,
            })
        })
    }

    fn violation(&self, totals: &Totals) -> (u32, f64) {
        match self.query.formula() {
            Some(f) => violation(f, false, totals),
            None => (0, 0.0),
        }
    }
}

fn atom_violation(atom: &Atom, negated: bool, totals: &Totals) -> (u32, f64) {
    let Some(v) = Scorer::value(totals, atom.agg()) else {
        return (1, 1.0);
    };
    if atom_holds(atom, v) != negated {
        return (0, 0.0);
    }
    let (dist, scale) = match atom {
        Atom::Compare { value: r, .. } => ((v - r).abs(), r.abs()),
        Atom::Between { low, high, .. } if negated => {
            ((v - low).min(high - v).max(0.0), low.abs().max(high.abs()))
        }
        Atom::Between { low, high, .. } => {
            ((low - v).max(v - high).max(0.0), low.abs().max(high.abs()))
        }
    };
    (1, (dist + 1e-6) / scale.max(1.0))
}

fn less(a: (u32, f64), b: (u32, f64)) -> bool {
    a.0 < b.0 || (a.0 == b.0 && a.1 < b.1 - 1e-12)
}

/// (violated literal count, normalized distance) over the negation normal form.
fn violation(f: &Formula, negated: bool, totals: &Totals) -> (u32, f64) {
    match (f, negated) {
        (Formula::Atom(a), _) => atom_violation(a, negated, totals),
        (Formula::Not(x), _) => violation(x, !negated, totals),
        (Formula::And(xs), false) | (Formula::Or(xs), true) => {
            xs.iter().fold((0, 0.0), |acc, x| {
                let v = violation(x, negated, totals);
                (acc.0 + v.0, acc.1 + v.1)
            })
        }
        (Formula::And(xs), true) | (Formula::Or(xs), false) => xs
            .iter()
            .map(|x| violation(x, negated, totals))
            .reduce(|a, b| if less(b, a) { b } else { a })
            .unwrap_or((0, 0.0)),
    }
}

struct Search<'a> {
    scorer: Scorer<'a>,
    cands: Vec<TupleId>,
    cap: u32,
    config: &'a LocalSearchConfig,
}

type Move = (Vec<TupleId>, Vec<TupleId>);

impl Search<'_> {
    /// Single insertions and deletions, in candidate then support order.
    fn cardinality_moves(&self, package: &Package, f: &mut dyn FnMut(&[TupleId], &[TupleId]) -> bool) -> bool {
        if !self.config.cardinality_moves {
            return false;
        }
        for &c in &self.cands {
            if package.get(c) < self.cap && f(&[], &[c]) {
                return true;
            }
        }
        for a in package.support() {
            if f(&[a], &[]) {
                return true;
            }
        }
        false
    }

    fn repair_move(&self, package: &Package) -> Option<Move> {
        let totals = self.scorer.totals(package);
        let current = self.scorer.violation(&totals);
        let mut chosen = None;
        let mut try_move = |out: &[TupleId], ins: &[TupleId]| {
            let next = self.scorer.after(&totals, out, ins);
            if less(self.scorer.violation(&next), current) {
                chosen = Some((out.to_vec(), ins.to_vec()));
                true
            } else {
                false
            }
        };
        let _ = for_each_swap(package, &self.cands, self.cap, 1, &mut try_move)
            || self.cardinality_moves(package, &mut try_move)
            || (self.config.k_max >= 2
                && for_each_swap(package, &self.cands, self.cap, 2, &mut try_move));
        chosen
    }

    fn improving_move(&self, package: &Package, query: &ValidatedQuery, relation: &Relation) -> Option<Move> {
        let totals = self.scorer.totals(package);
        let current = self.scorer.objective(&totals)?;
        let mut improving: Vec<(f64, Move)> = Vec::new();
        let mut consider = |out: &[TupleId], ins: &[TupleId]| {
            let next = self.scorer.after(&totals, out, ins);
            if self.scorer.violation(&next).0 == 0 {
                if let Some(v) = self.scorer.objective(&next) {
                    if v > current + crate::EPSILON {
                        improving.push((v, (out.to_vec(), ins.to_vec())));
                    }
                }
            }
            false
        };
        for_each_swap(package, &self.cands, self.cap, 1, &mut consider);
        self.cardinality_moves(package, &mut consider);
        // best first; the stable sort keeps enumeration order among ties
        improving.sort_by(|a, b| b.0.total_cmp(&a.0));
        improving
            .into_iter()
            .map(|(_, m)| m)
            .find(|(out, ins)| satisfies(&applied(package, out, ins), query, relation))
    }

    fn random_start(&self, rng: &mut ChaCha8Rng, lower: u64, upper: Option<u64>) -> Package {
        let room = self.cands.len() as u64 * u64::from(self.cap);
        let hi = upper.unwrap_or(room).min(room);
        let size = if lower >= hi { hi } else { rng.gen_range(lower..=hi) };
        let mut p = Package::new(self.scorer.relation.name());
        for _ in 0..size {
            let open: Vec<TupleId> = self
                .cands
                .iter()
                .copied()
                .filter(|&t| p.get(t) < self.cap)
                .collect();
            match open.choose(rng) {
                Some(&t) => p.add(t, 1),
                None => break,
            }
        }
        p
    }
}

/// Randomized local search; never reports optimality or infeasibility.
pub fn local_search(
    query: &ValidatedQuery,
    relation: &Relation,
    config: &LocalSearchConfig,
) -> SolveOutcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut cands = filter_base(relation, query.base());
    cands.shuffle(&mut rng);
    let search = Search {
        scorer: Scorer::new(query, relation),
        cands,
        cap: query.max_multiplicity(),
        config,
    };
    let bounds = bounds_for(query, relation);
    let mut hasher = DefaultHasher::new();
    let mut stats = SolveStats {
        disjuncts: 1,
        ..Default::default()
    };

    let mut found = None;
    for attempt in 0..=config.restarts {
        if attempt > 0 {
            if stats.iterations >= config.max_iters {
                break;
            }
            stats.restarts += 1;
        }
        let mut package = search.random_start(&mut rng, bounds.lower, bounds.upper);
        ("start", package.occurrences()).hash(&mut hasher);
        loop {
            let valid = satisfies(&package, query, relation);
            if stats.iterations >= config.max_iters {
                break;
            }
            let step = if valid {
                search.improving_move(&package, query, relation)
            } else {
                search.repair_move(&package)
            };
            let Some((out, ins)) = step else {
                break;
            };
            (&out, &ins).hash(&mut hasher);
            package = applied(&package, &out, &ins);
            stats.iterations += 1;
        }
        if satisfies(&package, query, relation) {
            found = Some(package);
            break;
        }
    }

    stats.trajectory_hash = Some(hasher.finish());
    stats.elapsed = start.elapsed();
    match found {
        Some(package) => SolveOutcome {
            status: SolveStatus::Feasible,
            objective_value: crate::evaluator::objective_value(&package, query, relation),
            package: Some(package),
            stats,
        },
        None => SolveOutcome {
            status: SolveStatus::Aborted,
            package: None,
            objective_value: None,
            stats,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::fixtures::desk;
    use crate::catalog::{load_csv, ColumnKind, Schema, Value};
    use crate::evaluator::is_valid;
    use crate::paql::{parse, validate};
    use crate::solver::brute_force_oracle;
    use crate::testgen::instance;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    const MEAL: &str = "SELECT PACKAGE(R) AS P FROM Recipes R WHERE R.gluten = 'free' SUCH THAT \
                        COUNT(*) = 3 AND SUM(P.calories) BETWEEN 2000 AND 2500 \
                        MAXIMIZE SUM(P.protein)";

    fn q(text: &str, rel: &Relation) -> ValidatedQuery {
        validate(&parse(text).unwrap(), rel.schema()).unwrap()
    }

    fn ids(v: &[usize]) -> Package {
        Package::from_ids("t", v.iter().map(|&i| TupleId(i)))
    }

    fn calories(values: &[f64]) -> Relation {
        let schema = Schema::new(vec![("calories".into(), ColumnKind::Numeric)]).unwrap();
        let rows = values.iter().map(|&v| vec![Value::Number(v)]).collect();
        Relation::new("t", schema, rows).unwrap()
    }

    #[test]
    fn single_swaps_under_a_sum_cap() {
        let rel = calories(&[1200.0, 1000.0, 800.0, 300.0, 600.0, 900.0]);
        let query = q(
            "SELECT PACKAGE(R) AS P FROM t R SUCH THAT SUM(P.calories) <= 2500",
            &rel,
        );
        let found = find_replacements(&ids(&[0, 1, 2]), &query, &rel, 1).unwrap();
        let pairs: Vec<(usize, usize)> = found
            .iter()
            .map(|r| (r.removed[0].0 .0, r.added[0].0 .0))
            .collect();
        assert_eq!(pairs, vec![(0, 3), (0, 4), (1, 3), (2, 3)]);
        assert_eq!(found[0].deltas[0].aggregate, "SUM(calories)");
        assert_eq!(found[0].deltas[0].delta, Some(-900.0));
    }

    #[test]
    fn two_changes_needed_gives_nothing_at_k1() {
        let mut csv = String::from("a,b\n");
        for (a, b) in [(10, 0), (0, 10), (0, 0), (0, 0), (1, 1)] {
            csv += &format!("{a},{b}\n");
        }
        let rel = load_csv("t", csv.as_bytes()).unwrap();
        let query = q(
            "SELECT PACKAGE(R) AS P FROM t R SUCH THAT COUNT(*) = 2 AND SUM(P.a) <= 1 AND SUM(P.b) <= 1",
            &rel,
        );
        let p = ids(&[0, 1]);
        assert!(find_replacements(&p, &query, &rel, 1).unwrap().is_empty());
        assert!(!find_replacements(&p, &query, &rel, 2).unwrap().is_empty());
    }

    #[test]
    fn count_only_swaps() {
        let rel = desk();
        let query = q("SELECT PACKAGE(R) AS P FROM Recipes R SUCH THAT COUNT(*) = 3", &rel);
        let found = find_replacements(&ids(&[0, 1, 2]), &query, &rel, 1).unwrap();
        assert_eq!(found.len(), 6);
    }

    #[test]
    fn k_limits() {
        let rel = desk();
        let query = q(MEAL, &rel);
        for k in [0, 3] {
            assert_eq!(
                find_replacements(&ids(&[0]), &query, &rel, k).unwrap_err().code(),
                "K_UNSUPPORTED"
            );
        }
    }

    #[test]
    fn meal_query_reaches_a_valid_package() {
        let rel = desk();
        let query = q(MEAL, &rel);
        for seed in 0..20 {
            let out = local_search(&query, &rel, &LocalSearchConfig { seed, ..Default::default() });
            assert_eq!(out.status, SolveStatus::Feasible);
            let v = out.objective_value.unwrap();
            assert!([90.0, 95.0, 100.0, 105.0].contains(&v));
            assert!(is_valid(out.package.as_ref().unwrap(), &query, &rel).valid);
        }
    }

    #[test]
    fn infeasible_query_aborts() {
        let rel = desk();
        let query = q(&MEAL.replace("2000 AND 2500", "5000 AND 6000"), &rel);
        let out = local_search(&query, &rel, &LocalSearchConfig::default());
        assert_eq!(out.status, SolveStatus::Aborted);
        assert!(out.package.is_none());
    }

    #[test]
    fn valid_start_is_a_fixed_point() {
        let rel = desk();
        let query = q("SELECT PACKAGE(R) AS P FROM Recipes R", &rel);
        let out = local_search(&query, &rel, &LocalSearchConfig::default());
        assert_eq!(out.status, SolveStatus::Feasible);
        assert_eq!(out.stats.iterations, 0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn single_swaps_match_pair_scan(
            (rel, query) in instance(1, 8),
            picks in prop::collection::vec(0usize..8, 0..5),
        ) {
            let n = rel.len();
            let mut start = Package::new(rel.name());
            for p in picks {
                let t = TupleId(p % n);
                if start.get(t) < query.max_multiplicity() {
                    start.add(t, 1);
                }
            }
            let got: BTreeSet<(TupleId, TupleId)> = find_replacements(&start, &query, &rel, 1)
                .unwrap()
                .iter()
                .map(|r| (r.removed[0].0, r.added[0].0))
                .collect();
            let mut want = BTreeSet::new();
            for out in start.occurrences() {
                for c in 0..n {
                    let c = TupleId(c);
                    if c == out {
                        continue;
                    }
                    let mut next = start.clone();
                    next.remove(out, 1);
                    next.add(c, 1);
                    if is_valid(&next, &query, &rel).valid {
                        want.insert((out, c));
                    }
                }
            }
            prop_assert_eq!(got, want);
        }

        #[test]
        fn results_are_valid_and_reproducible((rel, query) in instance(1, 8), seed in 0u64..100) {
            let cfg = LocalSearchConfig { seed, max_iters: 200, ..Default::default() };
            let a = local_search(&query, &rel, &cfg);
            let b = local_search(&query, &rel, &cfg);
            prop_assert_eq!(a.stats.trajectory_hash, b.stats.trajectory_hash);
            prop_assert_eq!(&a.package, &b.package);
            if let Some(p) = &a.package {
                prop_assert!(is_valid(p, &query, &rel).valid);
            }
            if a.status == SolveStatus::Feasible {
                prop_assert!(!brute_force_oracle(&query, &rel, None).unwrap().is_empty());
            }
        }
    }
}
