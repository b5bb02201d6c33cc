//! A small document language: declare spaces, bundles, gluings and sections,
//! then run checks on them with optional expected outcomes.

pub mod ast;
pub mod emit;
pub mod lexer;
pub mod parser;
pub mod run;

pub use ast::Document;
pub use emit::emit_document;
pub use parser::parse;
pub use run::{run_document, Entry, Report, RunConfig};

/// The shipped regression document: every worked example with its expected
/// outcome.
pub const PAPER_DOCUMENT: &str = include_str!("../../regression/paper.dfl");

/// JSON report of [`PAPER_DOCUMENT`] under the default configuration.
pub const PAPER_GOLDEN: &str = include_str!("../../regression/paper.json");
