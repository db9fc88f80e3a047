//! Package queries over in-memory relations.
//!
//! A package query selects a *multiset* of tuples from one relation: every
//! member must satisfy the per-tuple `WHERE` predicate, the package as a whole
//! must satisfy the aggregate `SUCH THAT` formula, and an optional linear
//! objective ranks the valid packages.
//!
//! The crate is organised bottom-up:
//!
//! - [`catalog`]: relations, schemas and CSV ingestion.
//! - [`paql`]: lexer, parser, validator and pretty printer for the query language.
//! - [`evaluator`]: the semantic reference (base filtering, aggregates, validity).
//! - [`pruning`]: cardinality bounds implied by the global constraints.
//! - [`solver`]: ILP translation, exact branch-and-bound and the brute-force oracle.
//! - [`local_search`]: replacement-based repair and improvement heuristic.
//! - [`exploration`]: adaptive exploration sessions, suggestions, visual summaries.

pub mod catalog;
pub mod error;
pub mod evaluator;
pub mod exploration;
pub mod local_search;
pub mod paql;
pub mod pruning;
pub mod solver;
#[cfg(test)]
mod testgen;

pub use catalog::{Catalog, ColumnKind, Relation, Schema, TupleId, Value};
pub use error::{Error, Result};
pub use evaluator::{Package, ValidityReport};
pub use paql::{parse, pretty_print, validate, PackageQuery, ValidatedQuery};
pub use pruning::CardinalityBounds;
pub use solver::{SolveOutcome, SolveStatus, SolverConfig};

/// Absolute tolerance used for every aggregate comparison.
pub const EPSILON: f64 = 1e-9;
