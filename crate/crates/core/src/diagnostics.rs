//! Coded diagnostics with source positions and their text/JSON renderings.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::source::SourceSpan;

/// The fixed diagnostic catalog. `E*` codes are errors, `W*` codes warnings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Code {
    /// Missing `<rasaeco-meta>` header.
    E001,
    /// Malformed meta header (bad JSON, missing title, header not first).
    E002,
    /// Unknown axis value.
    E003,
    /// Inverted cuboid range.
    E004,
    /// Duplicate model or definition name.
    E005,
    /// Unresolved definition or model reference.
    E006,
    /// Reference to a scenario that does not exist.
    E007,
    /// Relation target missing from the corpus.
    E008,
    /// Malformed or misnested semantic tag.
    E009,
    /// Duplicate or unusable scenario identifier.
    E010,
    /// IFC-looking token not in the vocabulary.
    W101,
    /// Relation nature outside the configured vocabulary.
    W102,
    /// Overlapping cuboids in one volumetric.
    W103,
    /// Volumetric covering no cells.
    W104,
}

impl Code {
    pub const ALL: [Code; 14] = [
        Code::E001,
        Code::E002,
        Code::E003,
        Code::E004,
        Code::E005,
        Code::E006,
        Code::E007,
        Code::E008,
        Code::E009,
        Code::E010,
        Code::W101,
        Code::W102,
        Code::W103,
        Code::W104,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Code::E001 => "E001",
            Code::E002 => "E002",
            Code::E003 => "E003",
            Code::E004 => "E004",
            Code::E005 => "E005",
            Code::E006 => "E006",
            Code::E007 => "E007",
            Code::E008 => "E008",
            Code::E009 => "E009",
            Code::E010 => "E010",
            Code::W101 => "W101",
            Code::W102 => "W102",
            Code::W103 => "W103",
            Code::W104 => "W104",
        }
    }

    pub fn severity(self) -> Severity {
        if self.as_str().starts_with('E') {
            Severity::Error
        } else {
            Severity::Warning
        }
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownCode(pub String);

impl fmt::Display for UnknownCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown diagnostic code '{}'", self.0)
    }
}

impl std::error::Error for UnknownCode {}

impl FromStr for Code {
    type Err = UnknownCode;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Code::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| UnknownCode(s.to_string()))
    }
}

impl Serialize for Code {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Code {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

/// A single finding. Field order here is the JSON key order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Diagnostic {
    pub code: Code,
    pub severity: Severity,
    pub message: String,
    pub path: String,
    pub line: u32,
    pub col: u32,
}

impl Diagnostic {
    pub fn new(code: Code, message: impl Into<String>, path: impl Into<String>, line: u32, col: u32) -> Self {
        Diagnostic {
            code,
            severity: code.severity(),
            message: message.into(),
            path: path.into(),
            line,
            col,
        }
    }

    /// Diagnostic positioned at the start of `span`.
    pub fn at(code: Code, message: impl Into<String>, span: &SourceSpan) -> Self {
        Diagnostic::new(code, message, span.path.as_ref(), span.start_line, span.start_col)
    }

    /// Corpus-level finding attached to a file but not to a position in it.
    pub fn in_file(code: Code, message: impl Into<String>, path: impl Into<String>) -> Self {
        Diagnostic::new(code, message, path, 0, 0)
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }

    fn sort_key(&self) -> (&str, u32, u32, Code, &str, Severity) {
        (&self.path, self.line, self.col, self.code, &self.message, self.severity)
    }
}

impl PartialOrd for Diagnostic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sorts by (path, line, col, code); message and severity break remaining ties
/// so that the order is total.
impl Ord for Diagnostic {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sort_key().cmp(&other.sort_key())
    }
}

/// A sorted collection of diagnostics with per-severity counts.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    diagnostics: Vec<Diagnostic>,
    errors: usize,
    warnings: usize,
}

impl Report {
    pub fn new(mut diagnostics: Vec<Diagnostic>) -> Self {
        diagnostics.sort();
        let errors = diagnostics.iter().filter(|d| d.is_error()).count();
        let warnings = diagnostics.len() - errors;
        Report {
            diagnostics,
            errors,
            warnings,
        }
    }

    pub fn diagnostics(&self) -> &[Diagnostic] {
        &self.diagnostics
    }

    pub fn errors(&self) -> usize {
        self.errors
    }

    pub fn warnings(&self) -> usize {
        self.warnings
    }

    pub fn has_errors(&self) -> bool {
        self.errors > 0
    }

    pub fn with_code(&self, code: Code) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics.iter().filter(move |d| d.code == code)
    }

    /// Parses the output of [`format_json`] back into a report.
    pub fn from_json(text: &str) -> serde_json::Result<Report> {
        let parsed: Report = serde_json::from_str(text)?;
        Ok(Report::new(parsed.diagnostics))
    }
}

/// One line per diagnostic followed by a summary line.
pub fn format_text(report: &Report) -> Vec<String> {
    let mut lines: Vec<String> = report
        .diagnostics
        .iter()
        .map(|d| format!("{}:{}:{}: {} {}: {}", d.path, d.line, d.col, d.code, d.severity, d.message))
        .collect();
    lines.push(format!("{} error(s), {} warning(s)", report.errors, report.warnings));
    lines
}

pub fn format_json(report: &Report) -> String {
    serde_json::to_string(report).expect("report serialization is infallible")
}

/// 2 on any error, 1 on warnings in strict mode, 0 otherwise.
pub fn exit_code(report: &Report, strict: bool) -> i32 {
    if report.errors > 0 {
        2
    } else if strict && report.warnings > 0 {
        1
    } else {
        0
    }
}
