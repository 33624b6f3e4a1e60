//! Assembled scenario documents: symbol tables, markings, references, the IFC
//! vocabulary lint and text metrics.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::ops::Range;
use std::path::Path;
use std::sync::LazyLock;

use regex::Regex;

use crate::diagnostics::{Code, Diagnostic};
use crate::markup::{plain_text, strip_tags_text, BodySegment, MetaHeader, Tag, TagKind};
use crate::scenario_space::{validate_volumetric, Axis, AxisValue, Level, Phase, Volumetric};
use crate::source::{SourceFile, SourceSpan};

static IFC_TOKEN: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\bIfc[A-Za-z0-9]+").unwrap());
static IDENTIFIER: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^[a-z0-9_]+$").unwrap());

pub fn is_valid_identifier(id: &str) -> bool {
    IDENTIFIER.is_match(id)
}

/// An IFC-looking token and where it first occurs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IfcToken {
    pub text: String,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Definition {
    pub name: String,
    pub body_text: String,
    pub span: SourceSpan,
    /// Distinct tokens in order of first occurrence.
    pub ifc_tokens: Vec<IfcToken>,
}

impl Definition {
    pub fn ifc_token_texts(&self) -> Vec<&str> {
        self.ifc_tokens.iter().map(|t| t.text.as_str()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelDecl {
    pub name: String,
    pub body_text: String,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Dimension {
    Phase,
    Level,
}

impl Dimension {
    pub fn as_str(self) -> &'static str {
        match self {
            Dimension::Phase => "phase",
            Dimension::Level => "level",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Marking {
    pub dimension: Dimension,
    pub value: AxisValue,
    pub text: String,
    pub span: SourceSpan,
    /// Offset of the opening tag in the source file.
    pub offset: usize,
    pub anchor_id: String,
}

/// `m-<dimension>-<value ordinal>-<occurrence>`, occurrence counted from 1.
pub fn anchor_id(dimension: Dimension, value: AxisValue, occurrence: usize) -> String {
    format!("m-{}-{}-{}", dimension.as_str(), value.ordinal(), occurrence)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RefKind {
    Ref,
    ModelRef,
    ScenarioRef,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RefTarget {
    Local,
    Scenario(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reference {
    pub kind: RefKind,
    pub raw_name: String,
    pub target_scenario: RefTarget,
    /// Empty for scenario references.
    pub target_name: String,
    pub span: SourceSpan,
    pub offset: usize,
}

#[derive(Debug, Clone)]
pub struct ScenarioDocument {
    pub identifier: String,
    pub file: SourceFile,
    pub meta: MetaHeader,
    pub meta_span: SourceSpan,
    pub body: Range<usize>,
    pub volumetric: Volumetric,
    pub segments: Vec<BodySegment>,
    pub models: BTreeMap<String, ModelDecl>,
    pub definitions: BTreeMap<String, Definition>,
    pub markings: Vec<Marking>,
    pub references: Vec<Reference>,
}

impl ScenarioDocument {
    pub fn title(&self) -> &str {
        self.meta.title.trim()
    }

    pub fn path(&self) -> &str {
        self.file.path()
    }

    pub fn marking_at(&self, offset: usize) -> Option<&Marking> {
        self.markings.iter().find(|m| m.offset == offset)
    }

    pub fn markings_of(&self, dimension: Dimension) -> impl Iterator<Item = &Marking> {
        self.markings.iter().filter(move |m| m.dimension == dimension)
    }
}

struct Builder<'a> {
    file: &'a SourceFile,
    models: BTreeMap<String, ModelDecl>,
    definitions: BTreeMap<String, Definition>,
    markings: Vec<Marking>,
    references: Vec<Reference>,
    occurrences: HashMap<(Dimension, AxisValue), usize>,
    diags: Vec<Diagnostic>,
}

impl Builder<'_> {
    fn walk(&mut self, segments: &[BodySegment]) {
        for seg in segments {
            if let BodySegment::Tag(tag) = seg {
                self.visit(tag);
            }
        }
    }

    fn visit(&mut self, tag: &Tag) {
        match tag.kind {
            TagKind::Phase | TagKind::Level => self.marking(tag),
            TagKind::Def => self.definition(tag),
            TagKind::Model => self.model(tag),
            TagKind::Ref | TagKind::ModelRef | TagKind::ScenarioRef => self.reference(tag),
        }
        self.walk(&tag.children);
    }

    fn marking(&mut self, tag: &Tag) {
        if tag.name.is_empty() {
            return;
        }
        let (dimension, parsed) = match tag.kind {
            TagKind::Phase => (Dimension::Phase, Phase::parse(&tag.name).map(AxisValue::Phase)),
            _ => (Dimension::Level, Level::parse(&tag.name).map(AxisValue::Level)),
        };
        let value = match parsed {
            Ok(v) => v,
            Err(e) => {
                self.diags.push(Diagnostic::at(Code::E003, format!("marking uses {e}"), &tag.span));
                return;
            }
        };
        let n = self.occurrences.entry((dimension, value)).or_insert(0);
        *n += 1;
        self.markings.push(Marking {
            dimension,
            value,
            text: plain_text(&tag.children),
            span: tag.span.clone(),
            offset: tag.open.start,
            anchor_id: anchor_id(dimension, value, *n),
        });
    }

    fn definition(&mut self, tag: &Tag) {
        if tag.name.is_empty() {
            return;
        }
        if let Some(prev) = self.definitions.get(&tag.name) {
            let msg = format!(
                "duplicate definition '{}' (first defined at line {})",
                tag.name, prev.span.start_line
            );
            self.diags.push(Diagnostic::at(Code::E005, msg, &tag.span));
            return;
        }
        let mut ifc_tokens: Vec<IfcToken> = Vec::new();
        collect_ifc_tokens(self.file, &tag.children, &mut ifc_tokens);
        self.definitions.insert(
            tag.name.clone(),
            Definition {
                name: tag.name.clone(),
                body_text: plain_text(&tag.children),
                span: tag.span.clone(),
                ifc_tokens,
            },
        );
    }

    fn model(&mut self, tag: &Tag) {
        if tag.name.is_empty() {
            return;
        }
        if let Some(prev) = self.models.get(&tag.name) {
            let msg = format!("duplicate model '{}' (first defined at line {})", tag.name, prev.span.start_line);
            self.diags.push(Diagnostic::at(Code::E005, msg, &tag.span));
            return;
        }
        self.models.insert(
            tag.name.clone(),
            ModelDecl {
                name: tag.name.clone(),
                body_text: plain_text(&tag.children),
                span: tag.span.clone(),
            },
        );
    }

    fn reference(&mut self, tag: &Tag) {
        if tag.name.is_empty() {
            return;
        }
        let kind = match tag.kind {
            TagKind::Ref => RefKind::Ref,
            TagKind::ModelRef => RefKind::ModelRef,
            _ => RefKind::ScenarioRef,
        };
        let parsed = match (kind, tag.name.split_once('#')) {
            (RefKind::ScenarioRef, None) => Some((RefTarget::Scenario(tag.name.clone()), String::new())),
            (RefKind::ScenarioRef, Some(_)) => None,
            (_, None) => Some((RefTarget::Local, tag.name.clone())),
            (_, Some((sid, name))) if !sid.is_empty() && !name.is_empty() && !name.contains('#') => {
                Some((RefTarget::Scenario(sid.to_string()), name.to_string()))
            }
            _ => None,
        };
        let Some((target_scenario, target_name)) = parsed else {
            self.diags.push(Diagnostic::at(
                Code::E009,
                format!("malformed reference name '{}' in <{}>", tag.name, tag.kind),
                &tag.span,
            ));
            return;
        };
        self.references.push(Reference {
            kind,
            raw_name: tag.name.clone(),
            target_scenario,
            target_name,
            span: tag.span.clone(),
            offset: tag.open.start,
        });
    }
}

fn collect_ifc_tokens(file: &SourceFile, segments: &[BodySegment], out: &mut Vec<IfcToken>) {
    for seg in segments {
        match seg {
            BodySegment::Text(run) => {
                for m in IFC_TOKEN.find_iter(&run.text) {
                    if out.iter().all(|t| t.text != m.as_str()) {
                        let at = run.range.start + m.start();
                        out.push(IfcToken {
                            text: m.as_str().to_string(),
                            span: file.span(at..run.range.start + m.end()),
                        });
                    }
                }
            }
            BodySegment::Tag(tag) => collect_ifc_tokens(file, &tag.children, out),
            BodySegment::Invalid { .. } => {}
        }
    }
}

/// Walks the parsed body and registers symbols, markings and references.
/// The volumetric is built from the resolvable header entries.
pub fn build_document(
    identifier: &str,
    file: SourceFile,
    meta: MetaHeader,
    meta_span: SourceSpan,
    body: Range<usize>,
    segments: Vec<BodySegment>,
) -> (ScenarioDocument, Vec<Diagnostic>) {
    let mut builder = Builder {
        file: &file,
        models: BTreeMap::new(),
        definitions: BTreeMap::new(),
        markings: Vec::new(),
        references: Vec::new(),
        occurrences: HashMap::new(),
        diags: Vec::new(),
    };
    builder.walk(&segments);
    let Builder {
        models,
        definitions,
        markings,
        references,
        mut diags,
        ..
    } = builder;

    let volumetric = Volumetric::new(meta.volumetric.iter().filter_map(|r| r.resolve().ok()).collect());
    let all_resolved = volumetric.cuboids.len() == meta.volumetric.len();
    if all_resolved {
        diags.extend(validate_volumetric(&volumetric, &meta_span));
    } else {
        // E003 was reported by the header parser; only check what remains.
        diags.extend(
            validate_volumetric(&volumetric, &meta_span)
                .into_iter()
                .filter(|d| d.code != Code::W104),
        );
    }

    let doc = ScenarioDocument {
        identifier: identifier.to_string(),
        meta,
        meta_span,
        body,
        volumetric,
        segments,
        models,
        definitions,
        markings,
        references,
        file,
    };
    (doc, diags)
}

/// E006 for each local reference that names no local symbol.
pub fn resolve_local(doc: &ScenarioDocument) -> Vec<Diagnostic> {
    doc.references
        .iter()
        .filter(|r| r.target_scenario == RefTarget::Local)
        .filter_map(|r| {
            let (found, what) = match r.kind {
                RefKind::Ref => (doc.definitions.contains_key(&r.target_name), "definition"),
                RefKind::ModelRef => (doc.models.contains_key(&r.target_name), "model"),
                RefKind::ScenarioRef => return None,
            };
            (!found).then(|| Diagnostic::at(Code::E006, format!("unresolved {what} reference '{}'", r.raw_name), &r.span))
        })
        .collect()
}

/// Entity names accepted by the IFC lint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IfcVocabulary {
    names: BTreeSet<String>,
}

impl Default for IfcVocabulary {
    fn default() -> Self {
        IfcVocabulary::from_names(DEFAULT_IFC_NAMES.iter().copied())
    }
}

pub const DEFAULT_IFC_NAMES: [&str; 7] = [
    "IfcActor",
    "IfcControl",
    "IfcCostItem",
    "IfcPerformanceHistory",
    "IfcRelAssignsToControl",
    "IfcTask",
    "IfcZone",
];

impl IfcVocabulary {
    pub fn from_names<'a>(names: impl IntoIterator<Item = &'a str>) -> Self {
        IfcVocabulary {
            names: names.into_iter().map(str::to_string).collect(),
        }
    }

    /// One name per line; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Self {
        IfcVocabulary::from_names(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#')),
        )
    }

    pub fn load(path: &Path) -> std::io::Result<Self> {
        Ok(IfcVocabulary::parse(&std::fs::read_to_string(path)?))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.names.contains(name)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

/// W101 for every definition token absent from the vocabulary.
pub fn lint_ifc(doc: &ScenarioDocument, vocabulary: &IfcVocabulary) -> Vec<Diagnostic> {
    let mut defs: Vec<&Definition> = doc.definitions.values().collect();
    defs.sort_by_key(|d| (d.span.start_line, d.span.start_col));
    defs.iter()
        .flat_map(|d| d.ifc_tokens.iter().map(move |t| (d, t)))
        .filter(|(_, t)| !vocabulary.contains(&t.text))
        .map(|(d, t)| {
            Diagnostic::at(
                Code::W101,
                format!("unknown IFC entity '{}' in definition '{}'", t.text, d.name),
                &t.span,
            )
        })
        .collect()
}

/// The body with all known tags removed and their inner text kept.
pub fn strip_tags(doc: &ScenarioDocument) -> String {
    strip_tags_text(&plain_text(&doc.segments))
}

pub fn word_count(doc: &ScenarioDocument) -> usize {
    count_words(&strip_tags(doc))
}

/// Counts whitespace-separated runs after dropping heading markers, list
/// bullets and fence delimiter lines. Code block contents count.
pub fn count_words(text: &str) -> usize {
    text.lines()
        .filter(|line| !line.trim_start().starts_with("```"))
        .map(|line| {
            let trimmed = line.trim_start();
            let rest = strip_line_marker(trimmed);
            rest.split_whitespace().count()
        })
        .sum()
}

fn strip_line_marker(line: &str) -> &str {
    let hashes = line.len() - line.trim_start_matches('#').len();
    if hashes > 0 {
        let rest = &line[hashes..];
        if rest.is_empty() || rest.starts_with([' ', '\t']) {
            return rest;
        }
    }
    if let Some(rest) = line.strip_prefix("- ").or_else(|| line.strip_prefix("* ")) {
        return rest;
    }
    let digits = line.len() - line.trim_start_matches(|c: char| c.is_ascii_digit()).len();
    if digits > 0 {
        if let Some(rest) = line[digits..].strip_prefix(". ") {
            return rest;
        }
    }
    line
}

/// Looks up the axis of a marking dimension.
pub fn dimension_axis(dimension: Dimension) -> Axis {
    match dimension {
        Dimension::Phase => Axis::Phase,
        Dimension::Level => Axis::Level,
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::markup::{extract_meta, parse_meta, parse_tags, tokenize_body};

    /// Parses a whole source file into a document plus every diagnostic.
    pub(crate) fn doc_from(id: &str, source: &str) -> (ScenarioDocument, Vec<Diagnostic>) {
        let file = SourceFile::new(format!("{id}/scenario.md"), source);
        let split = extract_meta(&file).expect("meta");
        let (meta, mut diags) = parse_meta(&file, split.meta.clone());
        let (tokens, d) = tokenize_body(&file, split.body.clone());
        diags.extend(d);
        let (segs, d) = parse_tags(&file, tokens);
        diags.extend(d);
        let meta_span = file.span(split.meta.clone());
        let (doc, d) = build_document(id, file, meta.expect("header"), meta_span, split.body, segs);
        diags.extend(d);
        (doc, diags)
    }

    fn with_body(body: &str) -> String {
        format!(
            "<rasaeco-meta>{{\"title\":\"T\",\"volumetric\":[{{\"aspect_from\":\"cost\",\"aspect_to\":\"cost\",\"phase_from\":\"planning\",\"phase_to\":\"planning\",\"level_from\":\"site\",\"level_to\":\"site\"}}]}}</rasaeco-meta>\n{body}"
        )
    }

    fn codes(d: &[Diagnostic]) -> Vec<Code> {
        d.iter().map(|d| d.code).collect()
    }

    #[test]
    fn duplicate_definition() {
        let (_, d) = doc_from("x", &with_body("<def name=\"cost\">IfcCostItem</def>\n<def name=\"cost\">IfcCostItem</def>"));
        assert_eq!(codes(&d), vec![Code::E005]);
        assert_eq!(d[0].line, 3);
    }

    #[test]
    fn model_and_def_namespaces_are_separate() {
        let (doc, d) = doc_from("x", &with_body("<def name=\"a\">x</def><model name=\"a\">y</model>"));
        assert!(d.is_empty());
        assert_eq!((doc.definitions.len(), doc.models.len()), (1, 1));
    }

    #[test]
    fn markings_get_occurrence_anchors() {
        let body = "<level name=\"machine/crew\">a</level> <phase name=\"construction\">b <level name=\"machine/crew\">c</level></phase>";
        let (doc, d) = doc_from("x", &with_body(body));
        assert!(d.is_empty());
        let anchors: Vec<_> = doc.markings.iter().map(|m| m.anchor_id.as_str()).collect();
        assert_eq!(anchors, vec!["m-level-1-1", "m-phase-1-1", "m-level-1-2"]);
        assert_eq!(doc.markings[1].text, "b c");
    }

    #[test]
    fn unknown_marking_value() {
        let (_, d) = doc_from("x", &with_body("<phase name=\"konstruction\">a</phase>"));
        assert_eq!(codes(&d), vec![Code::E003]);
    }

    #[test]
    fn local_resolution() {
        let (doc, _) = doc_from(
            "x",
            &with_body("<def name=\"cost\">c</def> <ref name=\"cost\"/> <modelref name=\"bim_extended\"/> <ref name=\"risk_management#risk\"/>"),
        );
        let d = resolve_local(&doc);
        assert_eq!(codes(&d), vec![Code::E006]);
        assert!(d[0].message.contains("bim_extended"));
        assert_eq!(doc.references[2].target_scenario, RefTarget::Scenario("risk_management".into()));
        assert_eq!(doc.references[2].target_name, "risk");
    }

    #[test]
    fn malformed_reference_names() {
        let (_, d) = doc_from("x", &with_body("<ref name=\"a#\"/> <scenarioref name=\"a#b\"/>"));
        assert_eq!(codes(&d), vec![Code::E009, Code::E009]);
    }

    #[test]
    fn ifc_lint() {
        let body = "<def name=\"zone\">An IfcZone.</def>\n<def name=\"hist\">An `IfcPerfromanceHistory`.</def>";
        let (doc, _) = doc_from("x", &with_body(body));
        let d = lint_ifc(&doc, &IfcVocabulary::default());
        assert_eq!(codes(&d), vec![Code::W101]);
        assert_eq!((d[0].line, d[0].col), (3, 22));

        let (doc, _) = doc_from("x", &with_body("<def name=\"t\">IfcTask</def>"));
        assert_eq!(lint_ifc(&doc, &IfcVocabulary::from_names([])).len(), 1);
        assert!(lint_ifc(&doc, &IfcVocabulary::default()).is_empty());
    }

    #[test]
    fn vocabulary_file_format() {
        let v = IfcVocabulary::parse("# comment\nIfcZone\n\n  IfcTask  \n");
        assert_eq!(v.len(), 2);
        assert!(v.contains("IfcTask"));
        assert!(!v.contains("# comment"));
    }

    #[test]
    fn strip_examples() {
        let (doc, _) = doc_from("x", "<rasaeco-meta>{\"title\":\"T\"}</rasaeco-meta>a <phase name=\"planning\">b</phase> c");
        assert_eq!(strip_tags(&doc), "a b c");
        let (doc, _) = doc_from("x", "<rasaeco-meta>{\"title\":\"T\"}</rasaeco-meta>x <ref name=\"cost\"/> y");
        assert_eq!(strip_tags(&doc), "x  y");
        let (doc, _) = doc_from(
            "x",
            "<rasaeco-meta>{\"title\":\"T\"}</rasaeco-meta>1 <phase name=\"planning\">2 <level name=\"site\">3</level> 4</phase> 5",
        );
        assert_eq!(strip_tags(&doc), "1 2 3 4 5");
    }

    #[test]
    fn word_count_rules() {
        assert_eq!(count_words(""), 0);
        assert_eq!(count_words("# Summary\nTwo words."), 3);
        assert_eq!(count_words("- one\n* two\n12. three\n```rust\nlet x = 1;\n```"), 7);
        assert_eq!(count_words("#hashtag stays"), 2);
        assert_eq!(count_words("-dash stays"), 2);
    }
}
