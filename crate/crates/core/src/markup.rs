//! Scenario source format: a leading `<rasaeco-meta>` JSON header followed by
//! a markdown body carrying the seven semantic tag kinds.

use std::fmt;
use std::ops::Range;

use serde::Deserialize;

use crate::diagnostics::{Code, Diagnostic};
use crate::scenario_space::{Aspect, Cuboid, Level, Phase, UnknownAxisValue};
use crate::source::{SourceFile, SourceSpan};

const META_OPEN: &str = "<rasaeco-meta>";
const META_CLOSE: &str = "</rasaeco-meta>";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TagKind {
    Phase,
    Level,
    Model,
    Def,
    Ref,
    ModelRef,
    ScenarioRef,
}

impl TagKind {
    pub const ALL: [TagKind; 7] = [
        TagKind::Phase,
        TagKind::Level,
        TagKind::Model,
        TagKind::Def,
        TagKind::Ref,
        TagKind::ModelRef,
        TagKind::ScenarioRef,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TagKind::Phase => "phase",
            TagKind::Level => "level",
            TagKind::Model => "model",
            TagKind::Def => "def",
            TagKind::Ref => "ref",
            TagKind::ModelRef => "modelref",
            TagKind::ScenarioRef => "scenarioref",
        }
    }

    pub fn from_name(name: &str) -> Option<TagKind> {
        TagKind::ALL.into_iter().find(|k| k.as_str() == name)
    }

    /// Container kinds need a closing tag; the reference kinds are void.
    pub fn is_container(self) -> bool {
        matches!(self, TagKind::Phase | TagKind::Level | TagKind::Model | TagKind::Def)
    }

    /// Symbol-declaring containers, which may not nest in one another.
    pub fn is_declaration(self) -> bool {
        matches!(self, TagKind::Model | TagKind::Def)
    }
}

impl fmt::Display for TagKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Location of the header payload and the body inside a source file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetaSplit {
    pub meta: Range<usize>,
    pub body: Range<usize>,
}

/// Finds the header, which must be the first non-whitespace construct.
pub fn extract_meta(file: &SourceFile) -> Result<MetaSplit, Diagnostic> {
    let text = file.text();
    let lead = text.len() - text.trim_start().len();
    if !text[lead..].starts_with(META_OPEN) {
        return Err(match text.find(META_OPEN) {
            Some(at) => Diagnostic::at(
                Code::E002,
                "<rasaeco-meta> must be the first construct in the file",
                &file.span(at..at + META_OPEN.len()),
            ),
            None => Diagnostic::new(Code::E001, "missing <rasaeco-meta> header", file.path().as_ref(), 1, 1),
        });
    }
    let meta_start = lead + META_OPEN.len();
    match text[meta_start..].find(META_CLOSE) {
        Some(rel) => {
            let meta_end = meta_start + rel;
            Ok(MetaSplit {
                meta: meta_start..meta_end,
                body: meta_end + META_CLOSE.len()..text.len(),
            })
        }
        None => Err(Diagnostic::at(
            Code::E002,
            "unterminated <rasaeco-meta> header (missing </rasaeco-meta>)",
            &file.span(lead..meta_start),
        )),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Relation {
    pub target: String,
    pub nature: String,
}

/// Unresolved volumetric entry: six axis tokens as written.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawCuboid {
    pub aspect_from: String,
    pub aspect_to: String,
    pub phase_from: String,
    pub phase_to: String,
    pub level_from: String,
    pub level_to: String,
}

impl RawCuboid {
    /// Resolves all six tokens, collecting every unknown one.
    pub fn resolve(&self) -> Result<Cuboid, Vec<UnknownAxisValue>> {
        fn grab<T>(r: Result<T, UnknownAxisValue>, errors: &mut Vec<UnknownAxisValue>) -> Option<T> {
            r.map_err(|e| errors.push(e)).ok()
        }
        let mut errors = Vec::new();
        let af = grab(Aspect::parse(&self.aspect_from), &mut errors);
        let at = grab(Aspect::parse(&self.aspect_to), &mut errors);
        let pf = grab(Phase::parse(&self.phase_from), &mut errors);
        let pt = grab(Phase::parse(&self.phase_to), &mut errors);
        let lf = grab(Level::parse(&self.level_from), &mut errors);
        let lt = grab(Level::parse(&self.level_to), &mut errors);
        match (af, at, pf, pt, lf, lt) {
            (Some(af), Some(at), Some(pf), Some(pt), Some(lf), Some(lt)) => Ok(Cuboid::new((af, at), (pf, pt), (lf, lt))),
            _ => Err(errors),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetaHeader {
    pub title: String,
    #[serde(default)]
    pub contact: Option<String>,
    #[serde(default)]
    pub relations: Vec<Relation>,
    #[serde(default)]
    pub volumetric: Vec<RawCuboid>,
}

/// Parses the header JSON. The header is `None` only for E002-class failures;
/// unknown axis tokens yield E003 diagnostics alongside a usable header.
pub fn parse_meta(file: &SourceFile, meta: Range<usize>) -> (Option<MetaHeader>, Vec<Diagnostic>) {
    let span = file.span(meta.clone());
    let raw = &file.text()[meta.clone()];
    let header: MetaHeader = match serde_json::from_str(raw) {
        Ok(h) => h,
        Err(e) => {
            let at = if e.line() == 0 {
                meta.start
            } else {
                file.offset_in(meta.clone(), e.line(), e.column())
            };
            let text = e.to_string();
            let msg = strip_serde_position(&text);
            let diag = Diagnostic::at(Code::E002, format!("malformed meta header: {msg}"), &file.span(at..at));
            return (None, vec![diag]);
        }
    };

    let mut problems = Vec::new();
    if header.title.trim().is_empty() {
        problems.push(Diagnostic::at(Code::E002, "meta header title must not be empty", &span));
    }
    for (i, rel) in header.relations.iter().enumerate() {
        if rel.target.trim().is_empty() || rel.nature.trim().is_empty() {
            problems.push(Diagnostic::at(
                Code::E002,
                format!("relation {} needs a non-empty target and nature", i + 1),
                &span,
            ));
        }
    }
    if !problems.is_empty() {
        return (None, problems);
    }

    let mut diags = Vec::new();
    for (i, raw) in header.volumetric.iter().enumerate() {
        if let Err(errors) = raw.resolve() {
            for e in errors {
                diags.push(Diagnostic::at(Code::E003, format!("volumetric entry {}: {e}", i + 1), &span));
            }
        }
    }
    (Some(header), diags)
}

fn strip_serde_position(msg: &str) -> &str {
    match msg.rfind(" at line ") {
        Some(i) => &msg[..i],
        None => msg,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Text,
    Open { kind: TagKind, name: String },
    Close { kind: TagKind },
    Void { kind: TagKind, name: String },
}

/// A lexical unit of the body. `range` indexes the normalized file text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub range: Range<usize>,
    pub span: SourceSpan,
}

impl Token {
    pub fn source<'a>(&self, file: &'a SourceFile) -> &'a str {
        &file.text()[self.range.clone()]
    }
}

enum Form {
    Open,
    Close,
    Void,
}

struct ScannedTag {
    len: usize,
    form: Form,
    kind: TagKind,
    attrs: Vec<(String, String)>,
}

fn lowercase_word(s: &str) -> &str {
    let end = s.find(|c: char| !c.is_ascii_lowercase()).unwrap_or(s.len());
    &s[..end]
}

fn skip_ws(s: &str, at: usize) -> usize {
    at + s[at..].len() - s[at..].trim_start_matches([' ', '\t', '\n']).len()
}

/// Recognizes a known-kind tag at the start of `s` (which begins with `<`).
/// Anything that is not a syntactically complete tag of a known kind is left
/// for the caller to treat as text.
fn scan_tag(s: &str) -> Option<ScannedTag> {
    let rest = &s[1..];
    if let Some(after_slash) = rest.strip_prefix('/') {
        let word = lowercase_word(after_slash);
        let kind = TagKind::from_name(word)?;
        let at = skip_ws(s, 2 + word.len());
        return s[at..].starts_with('>').then(|| ScannedTag {
            len: at + 1,
            form: Form::Close,
            kind,
            attrs: Vec::new(),
        });
    }

    let word = lowercase_word(rest);
    let kind = TagKind::from_name(word)?;
    let mut at = 1 + word.len();
    if !matches!(s[at..].chars().next(), Some(' ' | '\t' | '\n' | '/' | '>')) {
        return None;
    }
    let mut attrs = Vec::new();
    loop {
        at = skip_ws(s, at);
        let tail = &s[at..];
        if tail.starts_with("/>") {
            return Some(ScannedTag { len: at + 2, form: Form::Void, kind, attrs });
        }
        if tail.starts_with('>') {
            return Some(ScannedTag { len: at + 1, form: Form::Open, kind, attrs });
        }
        let name_len = tail
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '-' || c == '_'))
            .unwrap_or(tail.len());
        if name_len == 0 || !tail[name_len..].starts_with("=\"") {
            return None;
        }
        let value_start = name_len + 2;
        let value_len = tail[value_start..].find('"')?;
        attrs.push((
            tail[..name_len].to_string(),
            decode_entities(&tail[value_start..value_start + value_len]),
        ));
        at += value_start + value_len + 1;
    }
}

fn decode_entities(s: &str) -> String {
    if !s.contains('&') {
        return s.to_string();
    }
    s.replace("&lt;", "<")
        .replace("&gt;", ">")
        .replace("&quot;", "\"")
        .replace("&amp;", "&")
}

/// Checks that the only attribute is a non-empty `name`.
fn tag_name(kind: TagKind, attrs: &[(String, String)]) -> Result<String, String> {
    let mut name = None;
    for (key, value) in attrs {
        if key != "name" {
            return Err(format!("<{kind}> does not accept attribute '{key}'"));
        }
        if name.is_some() {
            return Err(format!("<{kind}> has a duplicate 'name' attribute"));
        }
        name = Some(value);
    }
    match name {
        Some(n) if !n.trim().is_empty() => Ok(n.clone()),
        Some(_) => Err(format!("<{kind}> has an empty 'name' attribute")),
        None => Err(format!("<{kind}> is missing the 'name' attribute")),
    }
}

/// Splits `body` into text runs and tag tokens. Concatenating the token
/// sources reproduces the body exactly.
pub fn tokenize_body(file: &SourceFile, body: Range<usize>) -> (Vec<Token>, Vec<Diagnostic>) {
    let text = file.text();
    let mut tokens = Vec::new();
    let mut diags = Vec::new();
    let mut text_start = body.start;
    let mut at = body.start;

    while at < body.end {
        let Some(rel) = text[at..body.end].find('<') else { break };
        let lt = at + rel;
        let Some(tag) = scan_tag(&text[lt..body.end]) else {
            at = lt + 1;
            continue;
        };
        if text_start < lt {
            tokens.push(Token {
                kind: TokenKind::Text,
                range: text_start..lt,
                span: file.span(text_start..lt),
            });
        }
        let range = lt..lt + tag.len;
        let span = file.span(range.clone());
        let kind = match tag.form {
            Form::Close => TokenKind::Close { kind: tag.kind },
            Form::Open | Form::Void => {
                let name = tag_name(tag.kind, &tag.attrs).unwrap_or_else(|msg| {
                    diags.push(Diagnostic::at(Code::E009, msg, &span));
                    String::new()
                });
                if matches!(tag.form, Form::Open) {
                    TokenKind::Open { kind: tag.kind, name }
                } else {
                    TokenKind::Void { kind: tag.kind, name }
                }
            }
        };
        tokens.push(Token { kind, range: range.clone(), span });
        at = range.end;
        text_start = at;
    }
    if text_start < body.end {
        tokens.push(Token {
            kind: TokenKind::Text,
            range: text_start..body.end,
            span: file.span(text_start..body.end),
        });
    }
    (tokens, diags)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TextRun {
    pub text: String,
    pub range: Range<usize>,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tag {
    pub kind: TagKind,
    pub name: String,
    pub children: Vec<BodySegment>,
    pub span: SourceSpan,
    /// Source range of the opening (or void) tag.
    pub open: Range<usize>,
    /// Source range of the closing tag; `None` for void tags and for
    /// containers left unclosed (already diagnosed).
    pub close: Option<Range<usize>>,
}

impl Tag {
    /// Source range covered by the tag and its children.
    pub fn range(&self) -> Range<usize> {
        let end = match (&self.close, self.children.last()) {
            (Some(c), _) => c.end,
            (None, Some(last)) => last.range().end,
            (None, None) => self.open.end,
        };
        self.open.start..end
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BodySegment {
    Text(TextRun),
    Tag(Tag),
    /// A tag token rejected by [`parse_tags`]; it carries no semantics.
    Invalid { range: Range<usize>, span: SourceSpan },
}

impl BodySegment {
    pub fn range(&self) -> Range<usize> {
        match self {
            BodySegment::Text(t) => t.range.clone(),
            BodySegment::Tag(t) => t.range(),
            BodySegment::Invalid { range, .. } => range.clone(),
        }
    }

    /// Appends the enclosed text with all tags removed.
    pub fn push_plain_text(&self, out: &mut String) {
        match self {
            BodySegment::Text(t) => out.push_str(&t.text),
            BodySegment::Tag(t) => t.children.iter().for_each(|c| c.push_plain_text(out)),
            BodySegment::Invalid { .. } => {}
        }
    }
}

pub fn plain_text(segments: &[BodySegment]) -> String {
    let mut out = String::new();
    segments.iter().for_each(|s| s.push_plain_text(&mut out));
    out
}

struct Frame {
    open: Option<(TagKind, String, Token)>,
    children: Vec<BodySegment>,
}

/// Builds the nested tag forest. Every structural problem is reported as E009
/// and recovered from, so the result always covers the whole body.
pub fn parse_tags(file: &SourceFile, tokens: Vec<Token>) -> (Vec<BodySegment>, Vec<Diagnostic>) {
    let mut diags = Vec::new();
    let mut stack = vec![Frame { open: None, children: Vec::new() }];

    for token in tokens {
        match token.kind.clone() {
            TokenKind::Text => {
                let text = token.source(file).to_string();
                let top = stack.last_mut().expect("root frame");
                top.children.push(BodySegment::Text(TextRun {
                    text,
                    range: token.range,
                    span: token.span,
                }));
            }
            TokenKind::Open { kind, name } if kind.is_container() => {
                if kind.is_declaration() {
                    let enclosing = stack
                        .iter()
                        .rev()
                        .find_map(|f| f.open.as_ref().filter(|(k, _, _)| k.is_declaration()));
                    if let Some((outer, outer_name, _)) = enclosing {
                        diags.push(Diagnostic::at(
                            Code::E009,
                            format!("<{kind} name=\"{name}\"> may not appear inside <{outer} name=\"{outer_name}\">"),
                            &token.span,
                        ));
                    }
                }
                stack.push(Frame {
                    open: Some((kind, name, token)),
                    children: Vec::new(),
                });
            }
            TokenKind::Open { kind, name } => {
                diags.push(Diagnostic::at(Code::E009, format!("<{kind}> must be self-closing"), &token.span));
                push_void(&mut stack, kind, name, token);
            }
            TokenKind::Void { kind, name } if !kind.is_container() => push_void(&mut stack, kind, name, token),
            TokenKind::Void { kind, .. } => {
                diags.push(Diagnostic::at(
                    Code::E009,
                    format!("<{kind}> is a container and needs a closing </{kind}>"),
                    &token.span,
                ));
                push_invalid(&mut stack, token);
            }
            TokenKind::Close { kind } => {
                let matches_top = matches!(stack.last(), Some(Frame { open: Some((k, _, _)), .. }) if *k == kind);
                if matches_top {
                    let frame = stack.pop().expect("non-root frame");
                    let (kind, name, open) = frame.open.expect("container frame");
                    let span = file.span(open.range.start..token.range.end);
                    let tag = Tag {
                        kind,
                        name,
                        children: frame.children,
                        span,
                        open: open.range,
                        close: Some(token.range),
                    };
                    stack.last_mut().expect("root frame").children.push(BodySegment::Tag(tag));
                } else {
                    let msg = match stack.last().and_then(|f| f.open.as_ref()) {
                        Some((open_kind, _, _)) => format!("mismatched </{kind}>, expected </{open_kind}>"),
                        None => format!("</{kind}> without a matching opening tag"),
                    };
                    diags.push(Diagnostic::at(Code::E009, msg, &token.span));
                    push_invalid(&mut stack, token);
                }
            }
        }
    }

    while stack.len() > 1 {
        let frame = stack.pop().expect("non-root frame");
        let (kind, name, open) = frame.open.expect("container frame");
        diags.push(Diagnostic::at(
            Code::E009,
            format!("unclosed <{kind} name=\"{name}\">"),
            &open.span,
        ));
        let end = frame.children.last().map_or(open.range.end, |c| c.range().end);
        let tag = Tag {
            kind,
            name,
            children: frame.children,
            span: file.span(open.range.start..end),
            open: open.range,
            close: None,
        };
        stack.last_mut().expect("root frame").children.push(BodySegment::Tag(tag));
    }
    let root = stack.pop().expect("root frame");
    (root.children, diags)
}

fn push_void(stack: &mut [Frame], kind: TagKind, name: String, token: Token) {
    let tag = Tag {
        kind,
        name,
        children: Vec::new(),
        span: token.span,
        open: token.range,
        close: None,
    };
    stack.last_mut().expect("root frame").children.push(BodySegment::Tag(tag));
}

fn push_invalid(stack: &mut [Frame], token: Token) {
    stack.last_mut().expect("root frame").children.push(BodySegment::Invalid {
        range: token.range,
        span: token.span,
    });
}

/// Removes every known tag from `text`, keeping inner text. Repeats until no
/// tag remains, so joining the remaining text cannot expose a new tag.
pub fn strip_tags_text(text: &str) -> String {
    let mut current = text.to_string();
    loop {
        let file = SourceFile::new("", &current);
        let (tokens, _) = tokenize_body(&file, 0..file.text().len());
        if tokens.iter().all(|t| t.kind == TokenKind::Text) {
            return file.text().to_string();
        }
        current = tokens
            .iter()
            .filter(|t| t.kind == TokenKind::Text)
            .map(|t| t.source(&file))
            .collect();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn file(s: &str) -> SourceFile {
        SourceFile::new("s.md", s)
    }

    fn whole(f: &SourceFile) -> Range<usize> {
        0..f.text().len()
    }

    fn kinds(tokens: &[Token]) -> Vec<TokenKind> {
        tokens.iter().map(|t| t.kind.clone()).collect()
    }

    #[test]
    fn extract_happy_path() {
        let f = file("<rasaeco-meta>{...}</rasaeco-meta>\n# Summary");
        let split = extract_meta(&f).unwrap();
        assert_eq!(&f.text()[split.meta.clone()], "{...}");
        assert_eq!(f.text()[split.body.clone()].trim_start(), "# Summary");
    }

    #[test]
    fn extract_errors() {
        let before = extract_meta(&file("intro\n<rasaeco-meta>{}</rasaeco-meta>")).unwrap_err();
        assert_eq!((before.code, before.line, before.col), (Code::E002, 2, 1));
        assert_eq!(extract_meta(&file("# just text")).unwrap_err().code, Code::E001);
        assert_eq!(extract_meta(&file("<rasaeco-meta>{\"title\":\"x\"}")).unwrap_err().code, Code::E002);
        assert!(extract_meta(&file("\n  <rasaeco-meta>{}</rasaeco-meta>")).is_ok());
    }

    fn meta_of(json: &str) -> (Option<MetaHeader>, Vec<Diagnostic>) {
        let f = file(&format!("<rasaeco-meta>{json}</rasaeco-meta>"));
        let split = extract_meta(&f).unwrap();
        parse_meta(&f, split.meta)
    }

    #[test]
    fn parse_meta_happy_path() {
        let (h, d) = meta_of(
            r#"{"title":"Truck Guidance","relations":[{"target":"scheduling","nature":"uses"}],"volumetric":[{"aspect_from":"as-planned","aspect_to":"divergence","phase_from":"construction","phase_to":"construction","level_from":"machine/crew","level_to":"site"}]}"#,
        );
        let h = h.unwrap();
        assert!(d.is_empty());
        assert_eq!(h.title, "Truck Guidance");
        assert_eq!(h.relations.len(), 1);
        assert_eq!(h.volumetric.len(), 1);
        assert_eq!(crate::scenario_space::cuboid_cells(&h.volumetric[0].resolve().unwrap()).len(), 9);
    }

    #[test]
    fn parse_meta_errors() {
        let (h, d) = meta_of(r#"{"title":""}"#);
        assert!(h.is_none());
        assert_eq!(d[0].code, Code::E002);

        let (h, d) = meta_of(r#"{"contact":"x"}"#);
        assert!(h.is_none());
        assert_eq!(d[0].code, Code::E002);

        let (h, d) = meta_of("{\"title\":\"a\",\n  oops}");
        assert!(h.is_none());
        assert_eq!((d[0].code, d[0].line), (Code::E002, 2));

        let (h, d) = meta_of(
            r#"{"title":"x","volumetric":[{"aspect_from":"cost","aspect_to":"cost","phase_from":"konstruction","phase_to":"construction","level_from":"site","level_to":"site"}]}"#,
        );
        assert!(h.is_some());
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].code, Code::E003);
        assert!(d[0].message.contains("konstruction"));
    }

    #[test]
    fn tokenize_examples() {
        let f = file(r#"The driver arrives. <phase name="construction">Deliveries are tasks.</phase>"#);
        let (t, d) = tokenize_body(&f, whole(&f));
        assert!(d.is_empty());
        assert_eq!(
            kinds(&t),
            vec![
                TokenKind::Text,
                TokenKind::Open { kind: TagKind::Phase, name: "construction".into() },
                TokenKind::Text,
                TokenKind::Close { kind: TagKind::Phase },
            ]
        );

        let f = file(r#"<ref name="cost"/> overruns"#);
        let (t, _) = tokenize_body(&f, whole(&f));
        assert_eq!(kinds(&t), vec![TokenKind::Void { kind: TagKind::Ref, name: "cost".into() }, TokenKind::Text]);

        let f = file("<phase>unnamed</phase>");
        let (_, d) = tokenize_body(&f, whole(&f));
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].code, Code::E009);
    }

    #[test]
    fn unknown_constructs_are_text() {
        let f = file("a <b>bold</b> <Phase name=\"x\"> <phases> <phase name=\"x\" <div> x<y");
        let (t, d) = tokenize_body(&f, whole(&f));
        assert!(d.is_empty());
        assert_eq!(kinds(&t), vec![TokenKind::Text]);
    }

    #[test]
    fn entities_decoded_in_names() {
        let f = file(r#"<def name="a&amp;b">x</def>"#);
        let (t, _) = tokenize_body(&f, whole(&f));
        assert_eq!(t[0].kind, TokenKind::Open { kind: TagKind::Def, name: "a&b".into() });
    }

    fn parse(s: &str) -> (Vec<BodySegment>, Vec<Diagnostic>) {
        let f = file(s);
        let (t, mut d) = tokenize_body(&f, whole(&f));
        let (segs, d2) = parse_tags(&f, t);
        d.extend(d2);
        (segs, d)
    }

    #[test]
    fn nested_markings() {
        let (segs, d) = parse(r#"<phase name="planning">a <level name="site">b</level> c</phase>"#);
        assert!(d.is_empty());
        assert_eq!(segs.len(), 1);
        let BodySegment::Tag(phase) = &segs[0] else { panic!() };
        assert_eq!(phase.kind, TagKind::Phase);
        assert!(matches!(&phase.children[1], BodySegment::Tag(t) if t.kind == TagKind::Level));
    }

    #[test]
    fn structural_errors() {
        let (_, d) = parse(r#"<phase name="planning">x</level>"#);
        assert_eq!(d.iter().map(|d| d.code).collect::<Vec<_>>(), vec![Code::E009, Code::E009]);

        let (_, d) = parse(r#"<def name="cost">x <def name="expenditure">y</def></def>"#);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].code, Code::E009);

        let (_, d) = parse(r#"<model name="m"><def name="d">y</def></model>"#);
        assert_eq!(d.len(), 1);

        let (_, d) = parse("</phase>");
        assert_eq!(d.len(), 1);

        let (_, d) = parse(r#"<ref name="x">"#);
        assert_eq!(d.len(), 1);

        let (_, d) = parse(r#"<phase name="x"/>"#);
        assert_eq!(d.len(), 1);

        let (_, d) = parse(r#"<def name="c"><phase name="planning">x</phase></def>"#);
        assert!(d.is_empty());
    }

    #[test]
    fn strip_text_examples() {
        assert_eq!(strip_tags_text(r#"a <phase name="planning">b</phase> c"#), "a b c");
        assert_eq!(strip_tags_text(r#"x <ref name="cost"/> y"#), "x  y");
        assert_eq!(strip_tags_text(r#"<pha<ref name="a"/>se name="p">q</phase>"#), "q");
    }
}
