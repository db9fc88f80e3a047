//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use paql_core::catalog::{load_csv, ColumnKind, Relation, Schema, TupleId, Value};
use paql_core::evaluator::{is_valid, Package};
use paql_core::exploration::start_session;
use paql_core::local_search::{find_replacements, local_search, LocalSearchConfig};
use paql_core::paql::*;
use paql_core::pruning::{bounds_for, pruned_space_size};
use paql_core::solver::{brute_force_oracle, solve_formula};
use paql_core::{CardinalityBounds, Error, SolveStatus, SolverConfig};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value as Json};

const DESK: &str = include_str!("../../../data/recipes_desk.csv");
const MEAL: &str = include_str!("../../../queries/meal_plan.paql");
const EPS: f64 = 1e-9;

type Check = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Check + 'a>);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($fmt)+));
        }
    };
}

fn desk() -> Relation {
    load_csv("Recipes", DESK.as_bytes()).unwrap()
}

fn compile(text: &str, rel: &Relation) -> ValidatedQuery {
    validate(&parse(text).unwrap(), rel.schema()).unwrap()
}

fn ids(p: &Package) -> Vec<usize> {
    p.support().map(|t| t.0).collect()
}

// ---------------------------------------------------------------- generators

const COLS: [&str; 3] = ["a", "b", "c"];

fn random_relation(rng: &mut ChaCha8Rng, n: usize) -> Relation {
    let schema = Schema::new(
        COLS.iter()
            .map(|c| (c.to_string(), ColumnKind::Numeric))
            .collect(),
    )
    .unwrap();
    let rows = (0..n)
        .map(|_| {
            (0..3)
                .map(|_| Value::Number(rng.gen_range(-3..=20) as f64))
                .collect()
        })
        .collect();
    Relation::new("T", schema, rows).unwrap()
}

fn random_atom(rng: &mut ChaCha8Rng, n: usize) -> String {
    let agg = match rng.gen_range(0..7) {
        0 | 1 => "COUNT(*)".to_string(),
        2..=4 => format!("SUM(P.{})", COLS.choose(rng).unwrap()),
        _ => format!("AVG(P.{})", COLS.choose(rng).unwrap()),
    };
    let scale = if agg.starts_with("SUM") { 10 * n as i32 } else if agg.starts_with("AVG") { 20 } else { n as i32 + 1 };
    let r = rng.gen_range(-2..=scale);
    if rng.gen_bool(0.2) {
        format!("{agg} BETWEEN {r} AND {}", r + rng.gen_range(0..=scale / 2 + 1))
    } else {
        let op = ["<=", ">=", "=", "<", ">", "<>"].choose(rng).unwrap();
        format!("{agg} {op} {r}")
    }
}

/// Conjunction of atoms and one-level disjunctions, with a SUM objective.
fn random_instance(rng: &mut ChaCha8Rng, max_n: usize) -> (Relation, ValidatedQuery, String) {
    let n = rng.gen_range(1..=max_n);
    let rel = random_relation(rng, n);
    let mut text = "SELECT PACKAGE(R) AS P FROM T R".to_string();
    match rng.gen_range(0..3) {
        0 => {}
        k => text += &format!(" REPEAT {}", k - 1),
    }
    if rng.gen_bool(0.25) {
        text += &format!(" WHERE R.{} <= {}", COLS.choose(rng).unwrap(), rng.gen_range(0..20));
    }
    let conjuncts: Vec<String> = (0..rng.gen_range(1..=3))
        .map(|_| {
            if rng.gen_bool(0.3) {
                format!("({} OR {})", random_atom(rng, n), random_atom(rng, n))
            } else {
                random_atom(rng, n)
            }
        })
        .collect();
    text += &format!(" SUCH THAT {}", conjuncts.join(" AND "));
    let dir = if rng.gen_bool(0.5) { "MAXIMIZE" } else { "MINIMIZE" };
    text += &format!(" {dir} SUM(P.{})", COLS.choose(rng).unwrap());
    let q = compile(&text, &rel);
    (rel, q, text)
}

fn random_package(rng: &mut ChaCha8Rng, rel: &Relation, cap: u32) -> Package {
    let mut p = Package::new(rel.name());
    for _ in 0..rng.gen_range(0..=4) {
        let t = TupleId(rng.gen_range(0..rel.len()));
        if p.get(t) < cap {
            p.add(t, 1);
        }
    }
    p
}

const KEYWORDS: &[&str] = &[
    "select", "package", "as", "from", "repeat", "where", "such", "that", "maximize", "minimize",
    "and", "or", "not", "between", "count", "sum", "avg", "min", "max",
];

fn ident(rng: &mut ChaCha8Rng) -> String {
    loop {
        let len = rng.gen_range(1..=6);
        let mut s: String = (0..len)
            .map(|i| {
                let pool: &[u8] = if i == 0 { b"abcdefghijklmnopqrstuvwxyz" } else { b"abcdefghijklmnopqrstuvwxyz0123456789_" };
                *pool.choose(rng).unwrap() as char
            })
            .collect();
        if !KEYWORDS.contains(&s.as_str()) {
            if rng.gen_bool(0.2) {
                s = s.to_uppercase();
            }
            return s;
        }
    }
}

fn number(rng: &mut ChaCha8Rng) -> f64 {
    match rng.gen_range(0..3) {
        0 => rng.gen_range(-1000..1000) as f64,
        1 => rng.gen_range(-1.0e6..1.0e6),
        _ => rng.gen_range(0..1000) as f64 / 8.0,
    }
}

fn cmp_op(rng: &mut ChaCha8Rng) -> CmpOp {
    *[CmpOp::Eq, CmpOp::Ne, CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge]
        .choose(rng)
        .unwrap()
}

fn column(rng: &mut ChaCha8Rng, alias: &str) -> ColumnRef {
    ColumnRef {
        qualifier: rng.gen_bool(0.7).then(|| alias.to_string()),
        column: ident(rng),
    }
}

fn base_ast(rng: &mut ChaCha8Rng, depth: u32) -> BasePredicate {
    if depth == 0 || rng.gen_bool(0.4) {
        let value = if rng.gen_bool(0.5) {
            Literal::Number(number(rng))
        } else {
            Literal::Text(["free", "it's", "", "a b"].choose(rng).unwrap().to_string())
        };
        return BasePredicate::Compare {
            column: column(rng, "R"),
            cmp: cmp_op(rng),
            value,
        };
    }
    let args = |rng: &mut ChaCha8Rng| (0..rng.gen_range(2..=3)).map(|_| base_ast(rng, depth - 1)).collect();
    match rng.gen_range(0..3) {
        0 => BasePredicate::And { args: args(rng) },
        1 => BasePredicate::Or { args: args(rng) },
        _ => BasePredicate::Not {
            arg: Box::new(base_ast(rng, depth - 1)),
        },
    }
}

fn aggregate(rng: &mut ChaCha8Rng) -> Aggregate {
    match rng.gen_range(0..5) {
        0 => Aggregate::Count,
        1 => Aggregate::Sum(column(rng, "P")),
        2 => Aggregate::Avg(column(rng, "P")),
        3 => Aggregate::Min(column(rng, "P")),
        _ => Aggregate::Max(column(rng, "P")),
    }
}

fn global_ast(rng: &mut ChaCha8Rng, depth: u32) -> GlobalFormula {
    if depth == 0 || rng.gen_bool(0.4) {
        let atom = if rng.gen_bool(0.7) {
            GlobalAtom::Compare {
                agg: aggregate(rng),
                cmp: cmp_op(rng),
                value: number(rng),
            }
        } else {
            GlobalAtom::Between {
                agg: aggregate(rng),
                low: number(rng),
                high: number(rng),
            }
        };
        return GlobalFormula::Atom { atom };
    }
    let args = |rng: &mut ChaCha8Rng| (0..rng.gen_range(2..=3)).map(|_| global_ast(rng, depth - 1)).collect();
    match rng.gen_range(0..3) {
        0 => GlobalFormula::And { args: args(rng) },
        1 => GlobalFormula::Or { args: args(rng) },
        _ => GlobalFormula::Not {
            arg: Box::new(global_ast(rng, depth - 1)),
        },
    }
}

fn query_ast(rng: &mut ChaCha8Rng) -> PackageQuery {
    let mut q = PackageQuery::new(ident(rng), "R", "P");
    q.repeat = rng.gen_bool(0.3).then(|| rng.gen_range(0..5));
    q.base_predicate = rng.gen_bool(0.6).then(|| base_ast(rng, 3));
    q.global_formula = rng.gen_bool(0.7).then(|| global_ast(rng, 3));
    q.objective = rng.gen_bool(0.5).then(|| Objective {
        direction: if rng.gen_bool(0.5) { Direction::Maximize } else { Direction::Minimize },
        agg: aggregate(rng),
    });
    q
}

// ---------------------------------------------------------------- criteria

fn meal_planner() -> Check {
    let rel = desk();
    let q = compile(MEAL, &rel);
    let started = Instant::now();
    let out = solve_formula(&q, &rel, &SolverConfig::default()).map_err(|e| e.to_string())?;
    let elapsed = started.elapsed();
    ensure!(out.status == SolveStatus::Optimal, "status {:?}", out.status);
    let p = out.package.as_ref().ok_or("no package")?;
    ensure!(ids(p) == vec![0, 1, 2], "package {:?}", ids(p));
    ensure!(out.objective_value == Some(105.0), "objective {:?}", out.objective_value);
    ensure!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    let all = brute_force_oracle(&q, &rel, None).map_err(|e| e.to_string())?;
    let (best, value) = all.first().ok_or("oracle found nothing")?;
    ensure!(best == p && *value == Some(105.0), "brute best {:?} {:?}", ids(best), value);
    Ok(format!("{{r1,r2,r3}} protein 105 in {elapsed:?}; brute agrees"))
}

fn oracle_equivalence() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let started = Instant::now();
    let (mut feasible, mut total) = (0, 0);
    while total < 600 {
        let (rel, q, text) = random_instance(&mut rng, 12);
        let all = match brute_force_oracle(&q, &rel, None) {
            Ok(all) => all,
            Err(Error::TooLarge { .. }) => continue,
            Err(e) => return Err(format!("{text}: {e}")),
        };
        total += 1;
        let out = solve_formula(&q, &rel, &SolverConfig::default()).map_err(|e| format!("{text}: {e}"))?;
        ensure!(
            out.status.has_package() == !all.is_empty(),
            "{text}: solver {:?}, oracle {} packages",
            out.status,
            all.len()
        );
        if let Some((_, best)) = all.first() {
            feasible += 1;
            ensure!(out.status == SolveStatus::Optimal, "{text}: status {:?}", out.status);
            let (got, want) = (out.objective_value.unwrap(), best.unwrap());
            ensure!((got - want).abs() <= EPS, "{text}: objective {got} vs oracle {want}");
            ensure!(is_valid(out.package.as_ref().unwrap(), &q, &rel).valid, "{text}: invalid package");
        }
    }
    let elapsed = started.elapsed();
    ensure!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    Ok(format!("{total} instances ({feasible} feasible) in {elapsed:.1?}"))
}

fn pruning_soundness() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut pairs = 0;
    while pairs < 1000 {
        let (rel, q, text) = random_instance(&mut rng, 8);
        let b = bounds_for(&q, &rel);
        for (p, _) in brute_force_oracle(&q, &rel, None).map_err(|e| e.to_string())? {
            pairs += 1;
            ensure!(b.contains(p.cardinality()), "{text}: |P| = {} outside {b:?}", p.cardinality());
        }
    }
    let full = |n| CardinalityBounds {
        lower: 0,
        upper: Some(n),
        per_atom: Vec::new(),
    };
    for n in 0..=20u64 {
        let size = pruned_space_size(n, &full(n)).map_err(|e| e.to_string())?;
        ensure!(size == BigUint::from(1u8) << n, "space({n}, (0,{n})) = {size}");
    }
    let five = pruned_space_size(4, &CardinalityBounds { lower: 3, ..full(4) }).map_err(|e| e.to_string())?;
    ensure!(five == BigUint::from(5u8), "space(4,(3,4)) = {five}");
    Ok(format!("{pairs} valid packages inside bounds; space sizes 2^n (n<=20) and 5"))
}

fn neighbor_exactness() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for i in 0..250 {
        let (rel, q, text) = random_instance(&mut rng, 10);
        let start = random_package(&mut rng, &rel, q.max_multiplicity());
        let got: BTreeSet<(TupleId, TupleId)> = find_replacements(&start, &q, &rel, 1)
            .map_err(|e| e.to_string())?
            .iter()
            .map(|r| (r.removed[0].0, r.added[0].0))
            .collect();
        let mut want = BTreeSet::new();
        for out in start.occurrences() {
            for c in (0..rel.len()).map(TupleId) {
                if c == out {
                    continue;
                }
                let mut next = start.clone();
                next.remove(out, 1);
                next.add(c, 1);
                if is_valid(&next, &q, &rel).valid {
                    want.insert((out, c));
                }
            }
        }
        ensure!(got == want, "instance {i} ({text}): {got:?} vs {want:?}");
    }

    let schema = Schema::new(vec![("calories".into(), ColumnKind::Numeric)]).unwrap();
    let rows = [1200.0, 1000.0, 800.0, 300.0, 600.0, 900.0]
        .iter()
        .map(|&v| vec![Value::Number(v)])
        .collect();
    let rel = Relation::new("M", schema, rows).unwrap();
    let q = compile("SELECT PACKAGE(R) AS P FROM M R SUCH THAT SUM(P.calories) <= 2500", &rel);
    let p0 = Package::from_ids("M", [0, 1, 2].map(TupleId));
    let found = find_replacements(&p0, &q, &rel, 1).map_err(|e| e.to_string())?;
    ensure!(found.len() == 4, "scenario gave {} replacements", found.len());
    Ok("250 random instances set-equal to pair scan; scenario yields 4".into())
}

fn local_search_soundness() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let (mut feasible, mut runs) = (0, 0);
    let rel = desk();
    let meal = compile(MEAL, &rel);
    for seed in 0..520u64 {
        let (r, q) = if seed % 4 == 0 {
            (rel.clone(), meal.clone())
        } else {
            let (r, q, _) = random_instance(&mut rng, 10);
            (r, q)
        };
        let cfg = LocalSearchConfig {
            seed,
            max_iters: 300,
            ..Default::default()
        };
        let a = local_search(&q, &r, &cfg);
        let b = local_search(&q, &r, &cfg);
        runs += 1;
        ensure!(a.stats.trajectory_hash == b.stats.trajectory_hash, "seed {seed}: trajectories differ");
        ensure!(a.package == b.package, "seed {seed}: results differ");
        if a.status == SolveStatus::Feasible {
            feasible += 1;
            let p = a.package.as_ref().ok_or("feasible without package")?;
            ensure!(is_valid(p, &q, &r).valid, "seed {seed}: invalid package");
        }
    }
    Ok(format!("{runs} seeded runs, {feasible} feasible, all valid and reproducible"))
}

fn parser() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for i in 0..1200 {
        let q = query_ast(&mut rng);
        let text = pretty_print(&q);
        let back = parse(&text).map_err(|e| format!("ast {i}: {e}: {text}"))?;
        ensure!(back == q, "ast {i} changed: {text}");
    }

    let ast = parse(MEAL).map_err(|e| e.to_string())?;
    let mut want = PackageQuery::new("Recipes", "R", "P");
    want.base_predicate = Some(BasePredicate::Compare {
        column: ColumnRef::qualified("R", "gluten"),
        cmp: CmpOp::Eq,
        value: Literal::Text("free".into()),
    });
    want.global_formula = Some(GlobalFormula::And {
        args: vec![
            GlobalFormula::Atom {
                atom: GlobalAtom::Compare { agg: Aggregate::Count, cmp: CmpOp::Eq, value: 3.0 },
            },
            GlobalFormula::Atom {
                atom: GlobalAtom::Between {
                    agg: Aggregate::Sum(ColumnRef::qualified("P", "calories")),
                    low: 2000.0,
                    high: 2500.0,
                },
            },
        ],
    });
    want.objective = Some(Objective {
        direction: Direction::Maximize,
        agg: Aggregate::Sum(ColumnRef::qualified("P", "protein")),
    });
    ensure!(ast == want, "meal query AST: {ast:?}");

    let soup = [
        "SELECT", "PACKAGE", "(", ")", "R", "P", "AS", "FROM", "Recipes", "REPEAT", "WHERE",
        "SUCH", "THAT", "AND", "OR", "NOT", "BETWEEN", "MAXIMIZE", "MINIMIZE", "COUNT", "SUM",
        "AVG", "*", ".", ",", "=", "<>", "<", "<=", ">", ">=", "!", "'", "'free'", "2", "-3.5",
        "1e400", "--", "\n", "calories", "P.protein", "R.gluten", "é", "\u{0}", ";", "''",
    ];
    let schema = desk().schema().clone();
    let mut crashes = 0;
    for i in 0..10_000 {
        let text: String = if i % 2 == 0 {
            let k = rng.gen_range(0..40);
            (0..k).map(|_| *soup.choose(&mut rng).unwrap()).collect::<Vec<_>>().join(" ")
        } else if i % 4 == 1 {
            let mut t = pretty_print(&query_ast(&mut rng));
            let cut = rng.gen_range(0..=t.len());
            while !t.is_char_boundary(cut.min(t.len())) {
                t.pop();
            }
            t.truncate(cut.min(t.len()));
            t
        } else {
            (0..rng.gen_range(0..60)).map(|_| rng.gen_range(0u8..128) as char).collect()
        };
        let run = catch_unwind(|| {
            if let Ok(q) = parse(&text) {
                let _ = validate(&q, &schema);
            }
        });
        if run.is_err() {
            crashes += 1;
        }
    }
    ensure!(crashes == 0, "{crashes} crashes in fuzz run");
    Ok("1200 round trips; meal query AST; 10000 fuzz inputs, 0 crashes".into())
}

fn exploration_enumeration() -> Check {
    let rel = desk();
    let q = compile(MEAL, &rel);
    // a session whose first sample is the top package {r1, r2, r3}
    let mut session = (0..200)
        .filter_map(|seed| start_session(&q, &rel, seed).ok())
        .find(|s| ids(s.current()) == vec![0, 1, 2])
        .ok_or("no seed starts at {r1, r2, r3}")?;
    session.pin(TupleId(0), 1).map_err(|e| e.to_string())?;
    let mut alternatives = BTreeSet::new();
    let err = loop {
        match session.replace_unpinned(&rel) {
            Ok(p) => {
                ensure!(p.get(TupleId(0)) >= 1, "pin dropped");
                alternatives.insert(ids(p));
            }
            Err(e) => break e,
        }
        ensure!(alternatives.len() <= 2, "more than two alternatives");
    };
    let want: BTreeSet<Vec<usize>> = brute_force_oracle(&q, &rel, None)
        .map_err(|e| e.to_string())?
        .iter()
        .map(|(p, _)| ids(p))
        .filter(|p| p.contains(&0) && *p != vec![0, 1, 2])
        .collect();
    ensure!(want.len() == 2, "oracle lists {want:?}");
    ensure!(alternatives == want, "alternatives {alternatives:?}");
    ensure!(err == Error::NoAlternative, "ended with {err}");
    Ok("{r1,r2,r4}, {r1,r3,r4}, then NO_ALTERNATIVE".into())
}

async fn server_contract() -> Check {
    use paql_server::{serve, AppState, ServerConfig};
    let state = Arc::new(AppState::new(ServerConfig::default()));
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.map_err(|e| e.to_string())?;
    let base = format!("http://{}", listener.local_addr().unwrap());
    tokio::spawn(serve(listener, state));
    let http = reqwest::Client::new();
    let post = |path: &str, body: Json| {
        let req = http.post(format!("{base}{path}")).json(&body);
        async move {
            let r = req.send().await.map_err(|e| e.to_string())?;
            let status = r.status().as_u16();
            Ok::<_, String>((status, r.json::<Json>().await.unwrap_or(Json::Null)))
        }
    };
    let get = |path: &str| {
        let req = http.get(format!("{base}{path}"));
        async move {
            let r = req.send().await.map_err(|e| e.to_string())?;
            let status = r.status().as_u16();
            Ok::<_, String>((status, r.json::<Json>().await.unwrap_or(Json::Null)))
        }
    };

    let (s, _) = post("/datasets", json!({"name": "Recipes", "csv": DESK})).await?;
    ensure!(s == 201, "POST /datasets -> {s}");
    let (s, b) = get("/datasets").await?;
    ensure!(s == 200 && b[0]["rows"] == 5, "GET /datasets -> {s} {b}");
    let (s, b) = post("/queries/parse", json!({"text": MEAL})).await?;
    ensure!(s == 200 && b["canonicalText"].is_string(), "parse -> {s}");
    let (s, b) = post("/queries/parse", json!({"text": "SELECT PACKAGE(R) AS P Recipes R"})).await?;
    ensure!(s == 400 && b["position"].is_object(), "bad parse -> {s} {b}");
    let (s, b) = post("/queries/evaluate", json!({"dataset": "Recipes", "text": MEAL, "method": "ilp"})).await?;
    ensure!(s == 200, "evaluate -> {s} {b}");
    ensure!(b["status"] == "optimal" && b["objective"] == 105.0, "evaluate body {b}");
    ensure!(b["bounds"] == json!({"lower": 3, "upper": 3}), "bounds {}", b["bounds"]);
    let (s, b) = post("/sessions", json!({"dataset": "Recipes", "text": MEAL, "seed": 1})).await?;
    ensure!(s == 201, "POST /sessions -> {s} {b}");
    let id = b["sessionId"].as_str().ok_or("no session id")?.to_string();
    let first = b["package"]["tuples"][0]["id"].clone();
    let (s, _) = post(&format!("/sessions/{id}/pin"), json!({"tupleId": first, "multiplicity": 1})).await?;
    ensure!(s == 200, "pin -> {s}");
    let (s, _) = post(&format!("/sessions/{id}/replace"), json!({})).await?;
    ensure!(s == 200 || s == 409, "replace -> {s}");
    let (s, b) = get(&format!("/sessions/{id}")).await?;
    ensure!(s == 200 && b["pinned"].as_array().map(|a| a.len()) == Some(1), "GET session -> {s} {b}");
    let (s, b) = get("/sessions/nope").await?;
    ensure!(s == 404, "unknown session -> {s} {b}");
    let (s, b) = post("/suggest", json!({"dataset": "Recipes", "column": "fats", "value": 10, "queryText": MEAL})).await?;
    ensure!(s == 200 && b.to_string().contains("MINIMIZE SUM(P.fats)"), "suggest -> {s} {b}");
    let (s, b) = post("/summary", json!({"dataset": "Recipes", "text": MEAL, "maxPackages": 10})).await?;
    ensure!(s == 200 && b["points"].as_array().map(|a| a.len()) == Some(4), "summary -> {s} {b}");
    Ok("all routes exercised against a live instance; evaluate bounds {3,3}".into())
}

// ---------------------------------------------------------------- runner

fn main() {
    let runtime = tokio::runtime::Runtime::new().unwrap();
    let criteria: Vec<Criterion> = vec![
        ("meal planner end-to-end", Box::new(meal_planner)),
        ("oracle equivalence", Box::new(oracle_equivalence)),
        ("pruning soundness", Box::new(pruning_soundness)),
        ("local search neighbor exactness", Box::new(neighbor_exactness)),
        ("local search soundness and determinism", Box::new(local_search_soundness)),
        ("parser round trip, meal AST, fuzz", Box::new(parser)),
        ("exploration enumeration", Box::new(exploration_enumeration)),
        ("server contract", Box::new(|| runtime.block_on(server_contract()))),
    ];
    let mut failed = 0;
    for (name, check) in &criteria {
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()))
        });
        match result {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    println!("{} of {} acceptance criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
