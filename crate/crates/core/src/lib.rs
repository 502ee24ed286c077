//! Satisfiability toolkit for the fluted fragment of first-order logic with
//! distinguished transitive relations.
//!
//! The crate provides, in dependency order:
//! - formula syntax, parsing, and fluted-fragment validation;
//! - finite structures, evaluation, and a bounded brute-force oracle;
//! - fluted resolution over clause sets;
//! - normal forms: basic-formula sets and clause normal form;
//! - certificates: finite witnesses of satisfiability over one transitive
//!   relation, with model construction;
//! - the satisfiability pipeline reducing arbitrary fluted sentences to
//!   basic-formula sets;
//! - tiling encoders exhibiting the undecidable multi-transitive cases.

pub mod certificate;
pub mod error;
pub mod eval;
pub mod fluted;
pub mod formula;
pub mod oracle;
pub mod normalform;
pub mod parser;
pub mod pipeline;
pub mod resolution;
pub mod signature;
pub mod structure;
pub mod tiling;

pub use error::{Error, Result};
pub use eval::{evaluate, satisfying_tuples};
pub use fluted::{classify_fragment, validate_fluted, FlutednessReport};
pub use formula::Formula;
pub use oracle::{bounded_sat_oracle, bounded_sat_oracle_with};
pub use parser::{parse_file, parse_file_with, parse_formula, parse_signature_text};
pub use pipeline::{multiply, solve, solve_with, SolveConfig, SolveOutcome, SolveStats};
pub use signature::Signature;
pub use structure::{structure_from_json, Structure};
pub use tiling::{
    build_grid_window_3t, build_torus, check_grid_like, encode_2t, encode_3t, GridEncoding,
    GridLikeReport, TileAssignment, TilingSystem,
};
