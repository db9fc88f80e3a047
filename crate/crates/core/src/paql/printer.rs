use std::fmt::Write;

use super::ast::*;

/// Canonical single-line rendering; `parse(pretty_print(q)) == q`.
pub fn pretty_print(q: &PackageQuery) -> String {
    let mut out = format!(
        "SELECT PACKAGE({}) AS {} FROM {} {}",
        q.relation_alias, q.package_alias, q.relation_name, q.relation_alias
    );
    if let Some(k) = q.repeat {
        write!(out, " REPEAT {k}").unwrap();
    }
    if let Some(b) = &q.base_predicate {
        write!(out, " WHERE {}", print_base(b)).unwrap();
    }
    if let Some(g) = &q.global_formula {
        write!(out, " SUCH THAT {}", print_global(g)).unwrap();
    }
    if let Some(o) = &q.objective {
        write!(out, " {}", print_objective(o)).unwrap();
    }
    out
}

pub(crate) fn fmt_number(v: f64) -> String {
    format!("{v}")
}

fn fmt_text(s: &str) -> String {
    format!("'{}'", s.replace('\'', "''"))
}

pub fn print_base(p: &BasePredicate) -> String {
    match p {
        BasePredicate::Compare { column, cmp, value } => {
            let lit = match value {
                Literal::Number(v) => fmt_number(*v),
                Literal::Text(s) => fmt_text(s),
            };
            format!("{column} {cmp} {lit}")
        }
        BasePredicate::And { args } => join(args, " AND ", |a| {
            wrap_if(
                matches!(a, BasePredicate::And { .. } | BasePredicate::Or { .. }),
                print_base(a),
            )
        }),
        BasePredicate::Or { args } => join(args, " OR ", |a| {
            wrap_if(matches!(a, BasePredicate::Or { .. }), print_base(a))
        }),
        BasePredicate::Not { arg } => format!(
            "NOT {}",
            wrap_if(
                matches!(**arg, BasePredicate::And { .. } | BasePredicate::Or { .. }),
                print_base(arg)
            )
        ),
    }
}

pub fn print_aggregate(a: &Aggregate) -> String {
    match a {
        Aggregate::Count => "COUNT(*)".to_string(),
        Aggregate::Sum(c) => format!("SUM({c})"),
        Aggregate::Avg(c) => format!("AVG({c})"),
        Aggregate::Min(c) => format!("MIN({c})"),
        Aggregate::Max(c) => format!("MAX({c})"),
    }
}

pub(crate) fn print_atom(a: &GlobalAtom) -> String {
    match a {
        GlobalAtom::Compare { agg, cmp, value } => {
            format!("{} {cmp} {}", print_aggregate(agg), fmt_number(*value))
        }
        GlobalAtom::Between { agg, low, high } => format!(
            "{} BETWEEN {} AND {}",
            print_aggregate(agg),
            fmt_number(*low),
            fmt_number(*high)
        ),
    }
}

pub fn print_global(g: &GlobalFormula) -> String {
    match g {
        GlobalFormula::Atom { atom } => print_atom(atom),
        GlobalFormula::And { args } => join(args, " AND ", |a| {
            wrap_if(
                matches!(a, GlobalFormula::And { .. } | GlobalFormula::Or { .. }),
                print_global(a),
            )
        }),
        GlobalFormula::Or { args } => join(args, " OR ", |a| {
            wrap_if(matches!(a, GlobalFormula::Or { .. }), print_global(a))
        }),
        GlobalFormula::Not { arg } => format!(
            "NOT {}",
            wrap_if(
                matches!(**arg, GlobalFormula::And { .. } | GlobalFormula::Or { .. }),
                print_global(arg)
            )
        ),
    }
}

pub fn print_objective(o: &Objective) -> String {
    let kw = match o.direction {
        Direction::Maximize => "MAXIMIZE",
        Direction::Minimize => "MINIMIZE",
    };
    format!("{kw} {}", print_aggregate(&o.agg))
}

fn join<T>(items: &[T], sep: &str, f: impl Fn(&T) -> String) -> String {
    items.iter().map(f).collect::<Vec<_>>().join(sep)
}

fn wrap_if(cond: bool, s: String) -> String {
    if cond {
        format!("({s})")
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    #[test]
    fn minimal_identity() {
        let q = PackageQuery::new("Recipes", "R", "P");
        assert_eq!(pretty_print(&q), "SELECT PACKAGE(R) AS P FROM Recipes R");
    }

    #[test]
    fn meal_query_canonical_text() {
        let text = "select package(R) as P from Recipes R where R.gluten = 'free' \
                    such that count(*) = 3 and sum(P.calories) between 2000 and 2500 \
                    maximize sum(P.protein)";
        let q = parse(text).unwrap();
        let printed = pretty_print(&q);
        assert_eq!(
            printed,
            "SELECT PACKAGE(R) AS P FROM Recipes R WHERE R.gluten = 'free' SUCH THAT \
             COUNT(*) = 3 AND SUM(P.calories) BETWEEN 2000 AND 2500 MAXIMIZE SUM(P.protein)"
        );
        assert_eq!(parse(&printed).unwrap(), q);
    }

    #[test]
    fn nested_not_or_keeps_structure() {
        let inner = GlobalFormula::Or {
            args: vec![
                GlobalFormula::atom(GlobalAtom::Compare {
                    agg: Aggregate::Count,
                    cmp: CmpOp::Ge,
                    value: 4.0,
                }),
                GlobalFormula::Not {
                    arg: Box::new(GlobalFormula::And {
                        args: vec![
                            GlobalFormula::atom(GlobalAtom::Compare {
                                agg: Aggregate::Count,
                                cmp: CmpOp::Lt,
                                value: 2.0,
                            }),
                            GlobalFormula::Or {
                                args: vec![
                                    GlobalFormula::atom(GlobalAtom::Between {
                                        agg: Aggregate::Sum(ColumnRef::qualified("P", "a")),
                                        low: -1.5,
                                        high: 2.0,
                                    }),
                                    GlobalFormula::atom(GlobalAtom::Compare {
                                        agg: Aggregate::Avg(ColumnRef::qualified("P", "a")),
                                        cmp: CmpOp::Ne,
                                        value: 0.25,
                                    }),
                                ],
                            },
                        ],
                    }),
                },
            ],
        };
        let mut q = PackageQuery::new("T", "R", "P");
        q.global_formula = Some(GlobalFormula::Not {
            arg: Box::new(inner),
        });
        let text = pretty_print(&q);
        assert_eq!(
            text,
            "SELECT PACKAGE(R) AS P FROM T R SUCH THAT NOT (COUNT(*) >= 4 OR NOT \
             (COUNT(*) < 2 AND (SUM(P.a) BETWEEN -1.5 AND 2 OR AVG(P.a) <> 0.25)))"
        );
        assert_eq!(parse(&text).unwrap(), q);
    }

    #[test]
    fn text_literal_escaping() {
        let mut q = PackageQuery::new("T", "R", "P");
        q.base_predicate = Some(BasePredicate::Compare {
            column: ColumnRef::qualified("R", "name"),
            cmp: CmpOp::Ne,
            value: Literal::Text("chef's".into()),
        });
        let text = pretty_print(&q);
        assert!(text.ends_with("R.name <> 'chef''s'"));
        assert_eq!(parse(&text).unwrap(), q);
    }
}
