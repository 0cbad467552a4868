//! Scenario-based failure analysis from failure-database records.
//!
//! Analyst-authored failure chains (`.chains` documents) are aggregated into
//! an influence-factor relationship matrix. Active and passive sums, their
//! normalized values, competition ranks, region classes and key-factor flags
//! are derived from it, and the results can be exported as CSV, SVG and DOT.

pub mod analytics;
pub mod cli;
pub mod dsl;
pub mod emit;
pub mod matrix;
pub mod model;
pub mod rapex;

pub use analytics::{analyze, AnalysisConfig, FactorScore, Region};
pub use dsl::{parse_document, serialize_document, Diagnostic, Severity};
pub use matrix::{brute_force_sums, build_matrix, merge, sums, RelationshipMatrix, SumsTable};
pub use model::{ChainSet, Factor, FactorCategory, FailureChain, Step};
