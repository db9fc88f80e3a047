use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use crate::error::{Error, Position, Result};

const RESERVED: &[&str] = &[
    "SELECT", "PACKAGE", "AS", "FROM", "REPEAT", "WHERE", "SUCH", "THAT", "MAXIMIZE", "MINIMIZE",
    "AND", "OR", "NOT", "BETWEEN",
];

pub(crate) fn is_reserved(word: &str) -> bool {
    RESERVED.iter().any(|k| k.eq_ignore_ascii_case(word))
}

/// Parses a complete PaQL query.
pub fn parse(text: &str) -> Result<PackageQuery> {
    let mut p = Parser::new(text)?;
    let q = p.query()?;
    p.expect_eof()?;
    Ok(q)
}

/// Parses a standalone `WHERE`-clause body.
pub fn parse_base_predicate(text: &str) -> Result<BasePredicate> {
    let mut p = Parser::new(text)?;
    let b = p.base_or()?;
    p.expect_eof()?;
    Ok(b)
}

/// Parses a standalone `SUCH THAT`-clause body.
pub fn parse_global_formula(text: &str) -> Result<GlobalFormula> {
    let mut p = Parser::new(text)?;
    let g = p.global_or()?;
    p.expect_eof()?;
    Ok(g)
}

/// Parses `MAXIMIZE agg` or `MINIMIZE agg`.
pub fn parse_objective(text: &str) -> Result<Objective> {
    let mut p = Parser::new(text)?;
    let o = p.objective()?;
    p.expect_eof()?;
    Ok(o)
}

struct Parser {
    toks: Vec<Token>,
    at: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Clause {
    Repeat = 1,
    Where = 2,
    SuchThat = 3,
    Objective = 4,
}

impl Clause {
    fn name(self) -> &'static str {
        match self {
            Clause::Repeat => "REPEAT",
            Clause::Where => "WHERE",
            Clause::SuchThat => "SUCH THAT",
            Clause::Objective => "MAXIMIZE/MINIMIZE",
        }
    }
}

impl Parser {
    fn new(text: &str) -> Result<Self> {
        Ok(Parser {
            toks: tokenize(text)?,
            at: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.at].tok
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.at + offset).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn pos(&self) -> Position {
        self.toks[self.at].pos
    }

    fn advance(&mut self) -> Tok {
        let t = self.toks[self.at].tok.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn fail<T>(&self, expected: &[&str]) -> Result<T> {
        let found = self.peek().describe();
        let message = if expected.is_empty() {
            format!("unexpected {found}")
        } else {
            format!("expected {}, found {found}", expected.join(" or "))
        };
        Err(Error::Syntax {
            position: self.pos(),
            message,
            expected: expected.iter().map(|s| s.to_string()).collect(),
        })
    }

    fn at_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s.eq_ignore_ascii_case(kw))
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.at_kw(kw) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<()> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            self.fail(&[kw])
        }
    }

    fn expect(&mut self, tok: Tok, label: &str) -> Result<()> {
        if *self.peek() == tok {
            self.advance();
            Ok(())
        } else {
            self.fail(&[label])
        }
    }

    fn expect_eof(&self) -> Result<()> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            self.fail(&["end of input"])
        }
    }

    fn ident(&mut self) -> Result<String> {
        match self.peek() {
            Tok::Ident(s) if !is_reserved(s) => {
                let s = s.clone();
                self.advance();
                Ok(s)
            }
            _ => self.fail(&["identifier"]),
        }
    }

    fn number(&mut self) -> Result<f64> {
        match *self.peek() {
            Tok::Number(v) => {
                self.advance();
                Ok(v)
            }
            Tok::LParen if self.subquery_ahead() => self.subquery_error(),
            _ => self.fail(&["number"]),
        }
    }

    fn subquery_ahead(&self) -> bool {
        matches!(self.peek_at(1), Tok::Ident(s) if s.eq_ignore_ascii_case("SELECT"))
    }

    fn subquery_error<T>(&self) -> Result<T> {
        Err(Error::UnsupportedFeature(format!(
            "sub-queries are not supported (at {})",
            self.pos()
        )))
    }

    fn query(&mut self) -> Result<PackageQuery> {
        self.expect_kw("SELECT")?;
        self.expect_kw("PACKAGE")?;
        self.expect(Tok::LParen, "`(`")?;
        let arg_pos = self.pos();
        let package_arg = self.ident()?;
        self.expect(Tok::RParen, "`)`")?;
        self.expect_kw("AS")?;
        let alias_pos = self.pos();
        let package_alias = self.ident()?;
        self.expect_kw("FROM")?;
        let relation_name = self.ident()?;
        let relation_alias = self.ident()?;
        if !package_arg.eq_ignore_ascii_case(&relation_alias) {
            return Err(Error::Syntax {
                position: arg_pos,
                message: format!(
                    "PACKAGE({package_arg}) does not name the relation alias `{relation_alias}`"
                ),
                expected: vec![relation_alias],
            });
        }
        if package_alias.eq_ignore_ascii_case(&relation_alias) {
            return Err(Error::Syntax {
                position: alias_pos,
                message: format!(
                    "package alias `{package_alias}` must differ from the relation alias"
                ),
                expected: Vec::new(),
            });
        }
        let mut q = PackageQuery::new(relation_name, relation_alias, package_alias);

        let mut seen: Vec<Clause> = Vec::new();
        loop {
            let pos = self.pos();
            let clause = if self.at_kw("REPEAT") {
                Clause::Repeat
            } else if self.at_kw("WHERE") {
                Clause::Where
            } else if self.at_kw("SUCH") {
                Clause::SuchThat
            } else if self.at_kw("MAXIMIZE") || self.at_kw("MINIMIZE") {
                Clause::Objective
            } else {
                break;
            };
            if seen.contains(&clause) {
                return Err(Error::DuplicateClause {
                    clause: clause.name().to_string(),
                    position: pos,
                });
            }
            if seen.last().is_some_and(|&last| last > clause) {
                let allowed: Vec<&str> = [
                    Clause::Repeat,
                    Clause::Where,
                    Clause::SuchThat,
                    Clause::Objective,
                ]
                .into_iter()
                .filter(|c| c > seen.last().unwrap())
                .map(Clause::name)
                .chain(["end of input"])
                .collect();
                return self.fail(&allowed);
            }
            seen.push(clause);
            match clause {
                Clause::Repeat => {
                    self.advance();
                    q.repeat = Some(self.repeat_count()?);
                }
                Clause::Where => {
                    self.advance();
                    q.base_predicate = Some(self.base_or()?);
                }
                Clause::SuchThat => {
                    self.advance();
                    self.expect_kw("THAT")?;
                    q.global_formula = Some(self.global_or()?);
                }
                Clause::Objective => q.objective = Some(self.objective()?),
            }
        }
        if *self.peek() != Tok::Eof {
            let mut expected = Vec::new();
            for (c, words) in [
                (Clause::Repeat, &["REPEAT"][..]),
                (Clause::Where, &["WHERE"][..]),
                (Clause::SuchThat, &["SUCH THAT"][..]),
                (Clause::Objective, &["MAXIMIZE", "MINIMIZE"][..]),
            ] {
                if seen.last().is_none_or(|&l| c > l) {
                    expected.extend_from_slice(words);
                }
            }
            expected.push("end of input");
            return self.fail(&expected);
        }
        Ok(q)
    }

    fn repeat_count(&mut self) -> Result<u32> {
        match *self.peek() {
            Tok::Number(v) if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 => {
                self.advance();
                Ok(v as u32)
            }
            _ => self.fail(&["non-negative integer"]),
        }
    }

    fn column_ref(&mut self) -> Result<ColumnRef> {
        let first = self.ident()?;
        if *self.peek() == Tok::Dot {
            self.advance();
            let column = self.ident()?;
            Ok(ColumnRef {
                qualifier: Some(first),
                column,
            })
        } else {
            Ok(ColumnRef {
                qualifier: None,
                column: first,
            })
        }
    }

    fn cmp_op(&mut self) -> Result<CmpOp> {
        match *self.peek() {
            Tok::Cmp(op) => {
                self.advance();
                Ok(op)
            }
            _ => self.fail(&["comparison operator"]),
        }
    }

    // ---- base predicates ----

    fn base_or(&mut self) -> Result<BasePredicate> {
        let mut args = vec![self.base_and()?];
        while self.eat_kw("OR") {
            args.push(self.base_and()?);
        }
        Ok(if args.len() == 1 {
            args.pop().unwrap()
        } else {
            BasePredicate::Or { args }
        })
    }

    fn base_and(&mut self) -> Result<BasePredicate> {
        let mut args = vec![self.base_not()?];
        while self.eat_kw("AND") {
            args.push(self.base_not()?);
        }
        Ok(if args.len() == 1 {
            args.pop().unwrap()
        } else {
            BasePredicate::And { args }
        })
    }

    fn base_not(&mut self) -> Result<BasePredicate> {
        if self.eat_kw("NOT") {
            Ok(BasePredicate::Not {
                arg: Box::new(self.base_not()?),
            })
        } else {
            self.base_primary()
        }
    }

    fn base_primary(&mut self) -> Result<BasePredicate> {
        match self.peek() {
            Tok::LParen => {
                if self.subquery_ahead() {
                    return self.subquery_error();
                }
                self.advance();
                let inner = self.base_or()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Tok::Ident(s) if !is_reserved(s) => {
                let column = self.column_ref()?;
                let cmp = self.cmp_op()?;
                let value = match self.peek().clone() {
                    Tok::Number(v) => Literal::Number(v),
                    Tok::Str(s) => Literal::Text(s),
                    Tok::LParen if self.subquery_ahead() => return self.subquery_error(),
                    _ => return self.fail(&["number", "string literal"]),
                };
                self.advance();
                Ok(BasePredicate::Compare { column, cmp, value })
            }
            _ => self.fail(&["`(`", "NOT", "column"]),
        }
    }

    // ---- global formulas ----

    fn global_or(&mut self) -> Result<GlobalFormula> {
        let mut args = vec![self.global_and()?];
        while self.eat_kw("OR") {
            args.push(self.global_and()?);
        }
        Ok(if args.len() == 1 {
            args.pop().unwrap()
        } else {
            GlobalFormula::Or { args }
        })
    }

    fn global_and(&mut self) -> Result<GlobalFormula> {
        let mut args = vec![self.global_not()?];
        while self.eat_kw("AND") {
            args.push(self.global_not()?);
        }
        Ok(if args.len() == 1 {
            args.pop().unwrap()
        } else {
            GlobalFormula::And { args }
        })
    }

    fn global_not(&mut self) -> Result<GlobalFormula> {
        if self.eat_kw("NOT") {
            Ok(GlobalFormula::Not {
                arg: Box::new(self.global_not()?),
            })
        } else {
            self.global_primary()
        }
    }

    fn global_primary(&mut self) -> Result<GlobalFormula> {
        if *self.peek() == Tok::LParen {
            if self.subquery_ahead() {
                return self.subquery_error();
            }
            self.advance();
            let inner = self.global_or()?;
            self.expect(Tok::RParen, "`)`")?;
            return Ok(inner);
        }
        if !matches!(self.peek(), Tok::Ident(_)) || *self.peek_at(1) != Tok::LParen {
            return self.fail(&["`(`", "NOT", "COUNT", "SUM", "AVG"]);
        }
        let agg = self.aggregate()?;
        if self.eat_kw("BETWEEN") {
            let low = self.number()?;
            self.expect_kw("AND")?;
            let high = self.number()?;
            return Ok(GlobalFormula::atom(GlobalAtom::Between { agg, low, high }));
        }
        let cmp = match *self.peek() {
            Tok::Cmp(op) => {
                self.advance();
                op
            }
            _ => return self.fail(&["comparison operator", "BETWEEN"]),
        };
        let value = self.number()?;
        Ok(GlobalFormula::atom(GlobalAtom::Compare { agg, cmp, value }))
    }

    fn aggregate(&mut self) -> Result<Aggregate> {
        let name = match self.peek() {
            Tok::Ident(s) if *self.peek_at(1) == Tok::LParen => s.to_ascii_uppercase(),
            _ => return self.fail(&["COUNT", "SUM", "AVG", "MIN", "MAX"]),
        };
        let ctor: fn(ColumnRef) -> Aggregate = match name.as_str() {
            "COUNT" => {
                self.advance();
                self.advance();
                self.expect(Tok::Star, "`*`")?;
                self.expect(Tok::RParen, "`)`")?;
                return Ok(Aggregate::Count);
            }
            "SUM" => Aggregate::Sum,
            "AVG" => Aggregate::Avg,
            "MIN" => Aggregate::Min,
            "MAX" => Aggregate::Max,
            _ => return self.fail(&["COUNT", "SUM", "AVG", "MIN", "MAX"]),
        };
        self.advance();
        self.advance();
        if self.subquery_ahead_here() {
            return self.subquery_error();
        }
        let col = self.column_ref()?;
        self.expect(Tok::RParen, "`)`")?;
        Ok(ctor(col))
    }

    fn subquery_ahead_here(&self) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s.eq_ignore_ascii_case("SELECT"))
    }

    fn objective(&mut self) -> Result<Objective> {
        let direction = if self.eat_kw("MAXIMIZE") {
            Direction::Maximize
        } else if self.eat_kw("MINIMIZE") {
            Direction::Minimize
        } else {
            return self.fail(&["MAXIMIZE", "MINIMIZE"]);
        };
        let agg = self.aggregate()?;
        Ok(Objective { direction, agg })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const MEAL_QUERY: &str = "SELECT PACKAGE(R) AS P
FROM Recipes R
WHERE R.gluten = 'free'
SUCH THAT COUNT(*) = 3 AND
          SUM(P.calories) BETWEEN 2000 AND 2500
MAXIMIZE SUM(P.protein)";

    #[test]
    fn meal_query_ast() {
        let q = parse(MEAL_QUERY).unwrap();
        let mut expected = PackageQuery::new("Recipes", "R", "P");
        expected.base_predicate = Some(BasePredicate::Compare {
            column: ColumnRef::qualified("R", "gluten"),
            cmp: CmpOp::Eq,
            value: Literal::Text("free".into()),
        });
        expected.global_formula = Some(GlobalFormula::And {
            args: vec![
                GlobalFormula::atom(GlobalAtom::Compare {
                    agg: Aggregate::Count,
                    cmp: CmpOp::Eq,
                    value: 3.0,
                }),
                GlobalFormula::atom(GlobalAtom::Between {
                    agg: Aggregate::Sum(ColumnRef::qualified("P", "calories")),
                    low: 2000.0,
                    high: 2500.0,
                }),
            ],
        });
        expected.objective = Some(Objective {
            direction: Direction::Maximize,
            agg: Aggregate::Sum(ColumnRef::qualified("P", "protein")),
        });
        assert_eq!(q, expected);
    }

    #[test]
    fn minimal_query() {
        let q = parse("SELECT PACKAGE(R) AS P FROM Recipes R").unwrap();
        assert_eq!(q, PackageQuery::new("Recipes", "R", "P"));
    }

    #[test]
    fn repeat_clause() {
        let q = parse("SELECT PACKAGE(R) AS P FROM Recipes R REPEAT 2 SUCH THAT COUNT(*) = 3")
            .unwrap();
        assert_eq!(q.repeat, Some(2));
        assert_eq!(q.global_formula.unwrap().atoms().len(), 1);
    }

    #[test]
    fn keywords_are_case_insensitive() {
        let lower = MEAL_QUERY
            .replace("SELECT", "select")
            .replace("PACKAGE", "package")
            .replace("FROM", "from")
            .replace("WHERE", "where")
            .replace("SUCH THAT", "such that")
            .replace("COUNT", "count")
            .replace("AND", "and")
            .replace("BETWEEN", "between")
            .replace("MAXIMIZE", "maximize")
            .replace("SUM", "sum");
        assert_eq!(parse(&lower).unwrap(), parse(MEAL_QUERY).unwrap());
    }

    #[test]
    fn missing_from_reports_position() {
        let err = parse("SELECT PACKAGE(R) AS P Recipes R").unwrap_err();
        assert_eq!(err.code(), "SYNTAX_ERROR");
        assert_eq!(
            err.position(),
            Some(Position {
                line: 1,
                column: 24
            })
        );
        match err {
            Error::Syntax { expected, .. } => assert_eq!(expected, vec!["FROM"]),
            _ => unreachable!(),
        }
    }

    #[test]
    fn duplicate_clauses() {
        let err = parse("SELECT PACKAGE(R) AS P FROM T R WHERE R.a = 1 WHERE R.b = 2").unwrap_err();
        assert_eq!(err.code(), "DUPLICATE_CLAUSE");
        let err = parse("SELECT PACKAGE(R) AS P FROM T R MAXIMIZE COUNT(*) MINIMIZE COUNT(*)")
            .unwrap_err();
        assert_eq!(err.code(), "DUPLICATE_CLAUSE");
    }

    #[test]
    fn out_of_order_clause_is_syntax_error() {
        let err = parse("SELECT PACKAGE(R) AS P FROM T R SUCH THAT COUNT(*) = 1 WHERE R.a = 1")
            .unwrap_err();
        assert_eq!(err.code(), "SYNTAX_ERROR");
    }

    #[test]
    fn subqueries_are_unsupported() {
        let err = parse(
            "SELECT PACKAGE(R) AS P FROM T R SUCH THAT SUM(P.a) <= (SELECT MAX(a) FROM T)",
        )
        .unwrap_err();
        assert_eq!(err.code(), "UNSUPPORTED_FEATURE");
        let err = parse("SELECT PACKAGE(R) AS P FROM T R SUCH THAT (SELECT COUNT(*) FROM T) = 1")
            .unwrap_err();
        assert_eq!(err.code(), "UNSUPPORTED_FEATURE");
    }

    #[test]
    fn alias_checks() {
        assert_eq!(
            parse("SELECT PACKAGE(X) AS P FROM T R").unwrap_err().code(),
            "SYNTAX_ERROR"
        );
        assert_eq!(
            parse("SELECT PACKAGE(R) AS R FROM T R").unwrap_err().code(),
            "SYNTAX_ERROR"
        );
    }

    #[test]
    fn precedence_and_not() {
        let g = parse_global_formula("NOT COUNT(*) >= 4 OR COUNT(*) = 1 AND SUM(a) < 3").unwrap();
        match g {
            GlobalFormula::Or { args } => {
                assert!(matches!(args[0], GlobalFormula::Not { .. }));
                assert!(matches!(args[1], GlobalFormula::And { .. }));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn fragments() {
        assert!(parse_base_predicate("R.fats <= 10").is_ok());
        assert!(parse_objective("MINIMIZE SUM(P.fats)").is_ok());
        assert!(parse_global_formula("SUM(P.fats) <= 30").is_ok());
        assert!(parse_global_formula("SUM(P.fats) <= 30 extra").is_err());
    }
}
