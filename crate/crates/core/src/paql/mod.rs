//! PaQL: the package query language.
//!
//! ```text
//! query := SELECT PACKAGE '(' ident ')' AS ident FROM ident ident [REPEAT int]
//!          [WHERE bpred] [SUCH THAT gform] [(MAXIMIZE|MINIMIZE) agg]
//! ```
//!
//! Keywords are case-insensitive and `--` starts a line comment.

mod ast;
mod lexer;
mod parser;
mod printer;
mod validate;

pub use ast::*;
pub use parser::{parse, parse_base_predicate, parse_global_formula, parse_objective};
pub(crate) use printer::fmt_number;
pub use printer::{pretty_print, print_aggregate, print_base, print_global, print_objective};
pub use validate::*;
