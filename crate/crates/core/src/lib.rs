//! Compiler, linter and renderer for AECO system scenarios.
//!
//! A scenario is a markdown file with a JSON header and a small set of
//! semantic tags. The pipeline discovers scenario files, parses them into
//! documents, links them into an ontology graph and renders a static site.

pub mod cli;
pub mod diagnostics;
pub mod document;
pub mod fixtures;
pub mod markup;
pub mod ontology;
pub mod pipeline;
pub mod render_html;
pub mod scenario_space;
pub mod source;
pub mod stats;
pub mod visual;

pub use diagnostics::{Code, Diagnostic, Report, Severity};
pub use document::{IfcVocabulary, ScenarioDocument};
pub use ontology::{Corpus, OntologyGraph};
pub use pipeline::{compile, render_all, write_output, Compiled, Settings};
