use std::fmt;

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PackageQuery {
    pub relation_name: String,
    pub relation_alias: String,
    pub package_alias: String,
    /// `REPEAT k`: each tuple may occur at most `k + 1` times. `None` means at most once.
    pub repeat: Option<u32>,
    pub base_predicate: Option<BasePredicate>,
    pub global_formula: Option<GlobalFormula>,
    pub objective: Option<Objective>,
}

impl PackageQuery {
    pub fn new(
        relation_name: impl Into<String>,
        relation_alias: impl Into<String>,
        package_alias: impl Into<String>,
    ) -> Self {
        PackageQuery {
            relation_name: relation_name.into(),
            relation_alias: relation_alias.into(),
            package_alias: package_alias.into(),
            repeat: None,
            base_predicate: None,
            global_formula: None,
            objective: None,
        }
    }
}

/// `[qualifier.]column`
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ColumnRef {
    pub qualifier: Option<String>,
    pub column: String,
}

impl ColumnRef {
    pub fn qualified(qualifier: &str, column: &str) -> Self {
        ColumnRef {
            qualifier: Some(qualifier.to_string()),
            column: column.to_string(),
        }
    }
}

impl fmt::Display for ColumnRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.qualifier {
            Some(q) => write!(f, "{q}.{}", self.column),
            None => f.write_str(&self.column),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum CmpOp {
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = "<>")]
    Ne,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "<>",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    /// The comparator equivalent to `NOT (x op r)`.
    pub fn negate(self) -> CmpOp {
        match self {
            CmpOp::Eq => CmpOp::Ne,
            CmpOp::Ne => CmpOp::Eq,
            CmpOp::Lt => CmpOp::Ge,
            CmpOp::Le => CmpOp::Gt,
            CmpOp::Gt => CmpOp::Le,
            CmpOp::Ge => CmpOp::Lt,
        }
    }
}

impl fmt::Display for CmpOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", content = "value", rename_all = "lowercase")]
pub enum Literal {
    Number(f64),
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum BasePredicate {
    Compare {
        column: ColumnRef,
        cmp: CmpOp,
        value: Literal,
    },
    And {
        args: Vec<BasePredicate>,
    },
    Or {
        args: Vec<BasePredicate>,
    },
    Not {
        arg: Box<BasePredicate>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "fn", content = "column", rename_all = "UPPERCASE")]
pub enum Aggregate {
    Count,
    Sum(ColumnRef),
    Avg(ColumnRef),
    Min(ColumnRef),
    Max(ColumnRef),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GlobalAtom {
    Compare {
        agg: Aggregate,
        cmp: CmpOp,
        value: f64,
    },
    Between {
        agg: Aggregate,
        low: f64,
        high: f64,
    },
}

impl GlobalAtom {
    pub fn aggregate(&self) -> &Aggregate {
        match self {
            GlobalAtom::Compare { agg, .. } | GlobalAtom::Between { agg, .. } => agg,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum GlobalFormula {
    Atom { atom: GlobalAtom },
    And { args: Vec<GlobalFormula> },
    Or { args: Vec<GlobalFormula> },
    Not { arg: Box<GlobalFormula> },
}

impl GlobalFormula {
    pub fn atom(atom: GlobalAtom) -> Self {
        GlobalFormula::Atom { atom }
    }

    /// Atoms in left-to-right order.
    pub fn atoms(&self) -> Vec<&GlobalAtom> {
        let mut out = Vec::new();
        fn walk<'a>(f: &'a GlobalFormula, out: &mut Vec<&'a GlobalAtom>) {
            match f {
                GlobalFormula::Atom { atom } => out.push(atom),
                GlobalFormula::And { args } | GlobalFormula::Or { args } => {
                    args.iter().for_each(|a| walk(a, out))
                }
                GlobalFormula::Not { arg } => walk(arg, out),
            }
        }
        walk(self, &mut out);
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Objective {
    pub direction: Direction,
    pub agg: Aggregate,
}
