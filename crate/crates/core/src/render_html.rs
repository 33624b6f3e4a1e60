//! HTML pages for scenario documents and the corpus index.
//!
//! The body is rendered in three steps. Segments are flattened into a
//! placeholder string where every tag becomes an inline marker, the markdown
//! subset is parsed over that string into an event stream, and a serializer
//! balances the stream: marking spans are closed at block and inline element
//! boundaries and reopened (without the anchor id) where text resumes.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use crate::document::{word_count, Dimension, RefKind, RefTarget, ScenarioDocument};
use crate::markup::{BodySegment, Tag};
use crate::ontology::{Corpus, OntologyGraph};
use crate::scenario_space::{Level, Phase};
use crate::visual::render_volumetric_svg;

pub const STYLESHEET: &str = "\
body { font-family: sans-serif; max-width: 60em; margin: 2em auto; padding: 0 1em; line-height: 1.5; color: #222; }
header { border-bottom: 1px solid #ccc; margin-bottom: 1.5em; }
.identifier { color: #666; }
.phase { background: #eaf5e1; }
.phase > sup { color: #4b7f2a; }
.level { background: #f9e3ea; }
.level > sup { color: #a3244d; }
.def, .model { border-left: 3px solid #6b93c9; padding-left: 0.8em; margin: 1em 0; }
.broken { color: #b00; text-decoration: line-through; }
pre { background: #f5f5f5; padding: 0.6em; overflow-x: auto; }
table { border-collapse: collapse; margin-bottom: 1em; }
td, th { border: 1px solid #ddd; padding: 0.2em 0.6em; text-align: left; }
.thumbnail svg { vertical-align: middle; }
";

pub fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
    out
}

const MARK_START: char = '\u{E000}';
const MARK_END: char = '\u{E001}';

#[derive(Debug, Clone, Copy)]
enum Marker<'a> {
    Open(&'a Tag),
    Close(&'a Tag),
    Void(&'a Tag),
    /// A source character that collides with the placeholder encoding.
    Literal(char),
}

impl Marker<'_> {
    fn is_declaration(&self) -> bool {
        matches!(self, Marker::Open(t) | Marker::Close(t) if t.kind.is_declaration())
    }
}

struct Flattened<'a> {
    text: String,
    markers: Vec<Marker<'a>>,
}

impl<'a> Flattened<'a> {
    fn push_marker(&mut self, m: Marker<'a>) {
        let declaration = m.is_declaration();
        if declaration {
            self.text.push('\n');
        }
        let _ = write!(self.text, "{MARK_START}{}{MARK_END}", self.markers.len());
        if declaration {
            self.text.push('\n');
        }
        self.markers.push(m);
    }

    fn push_text(&mut self, s: &str) {
        for c in s.chars() {
            if c == MARK_START || c == MARK_END {
                self.push_marker(Marker::Literal(c));
            } else {
                self.text.push(c);
            }
        }
    }

    fn walk(&mut self, file_text: &str, segments: &'a [BodySegment]) {
        for seg in segments {
            match seg {
                BodySegment::Text(t) => self.push_text(&t.text),
                BodySegment::Invalid { range, .. } => self.push_text(&file_text[range.clone()]),
                BodySegment::Tag(tag) if tag.kind.is_container() => {
                    self.push_marker(Marker::Open(tag));
                    self.walk(file_text, &tag.children);
                    if tag.close.is_some() {
                        self.push_marker(Marker::Close(tag));
                    }
                }
                BodySegment::Tag(tag) => self.push_marker(Marker::Void(tag)),
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum El {
    P,
    H(usize),
    Ul,
    Ol,
    Li,
    Pre,
    Code,
    Em,
    Strong,
    A(String),
}

impl El {
    fn name(&self) -> String {
        match self {
            El::P => "p".into(),
            El::H(n) => format!("h{n}"),
            El::Ul => "ul".into(),
            El::Ol => "ol".into(),
            El::Li => "li".into(),
            El::Pre => "pre".into(),
            El::Code => "code".into(),
            El::Em => "em".into(),
            El::Strong => "strong".into(),
            El::A(_) => "a".into(),
        }
    }

    fn open_tag(&self) -> String {
        match self {
            El::A(href) => format!("<a href=\"{}\">", escape(href)),
            other => format!("<{}>", other.name()),
        }
    }

    fn is_inline(&self) -> bool {
        matches!(self, El::Code | El::Em | El::Strong | El::A(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Ev {
    Start(El),
    End(El),
    /// Already escaped text.
    Text(String),
    Marker(usize),
    Newline,
}

/// Parses a placeholder at the start of `s`, returning (index, byte length).
fn parse_placeholder(s: &str) -> Option<(usize, usize)> {
    let rest = s.strip_prefix(MARK_START)?;
    let end = rest.find(MARK_END)?;
    let idx = rest[..end].parse().ok()?;
    Some((idx, MARK_START.len_utf8() + end + MARK_END.len_utf8()))
}

/// Leading placeholders and spaces of a line, for block-syntax detection.
fn leading_markers(line: &str) -> usize {
    let mut at = 0;
    loop {
        let rest = &line[at..];
        if let Some((_, len)) = parse_placeholder(rest) {
            at += len;
        } else if rest.starts_with(' ') || rest.starts_with('\t') {
            at += 1;
        } else {
            return at;
        }
    }
}

fn find_unescaped(s: &str, pat: &str, from: usize) -> Option<usize> {
    s[from..].find(pat).map(|i| i + from)
}

/// Finds a closing emphasis delimiter that follows a non-space character.
fn find_closing(s: &str, delim: &str, from: usize) -> Option<usize> {
    let mut at = from;
    while let Some(i) = find_unescaped(s, delim, at) {
        let prev_ok = s[..i].chars().last().is_some_and(|c| !c.is_whitespace());
        let next_char = s[i + delim.len()..].chars().next();
        let single_ok = delim != "*" || (next_char != Some('*') && !s[..i].ends_with('*'));
        if i > from && prev_ok && single_ok {
            return Some(i);
        }
        at = i + delim.len();
    }
    None
}

fn inline(s: &str, out: &mut Vec<Ev>) {
    let mut text = String::new();
    let flush = |text: &mut String, out: &mut Vec<Ev>| {
        if !text.is_empty() {
            out.push(Ev::Text(escape(text)));
            text.clear();
        }
    };
    let mut i = 0;
    while i < s.len() {
        let rest = &s[i..];
        if let Some((idx, len)) = parse_placeholder(rest) {
            flush(&mut text, out);
            out.push(Ev::Marker(idx));
            i += len;
            continue;
        }
        if rest.starts_with('\n') {
            flush(&mut text, out);
            out.push(Ev::Newline);
            i += 1;
            continue;
        }
        if rest.starts_with('`') {
            if let Some(end) = find_unescaped(s, "`", i + 1) {
                flush(&mut text, out);
                out.push(Ev::Start(El::Code));
                code_text(&s[i + 1..end], out);
                out.push(Ev::End(El::Code));
                i = end + 1;
                continue;
            }
        }
        let delim = if rest.starts_with("**") { "**" } else { "*" };
        if rest.starts_with(delim) && !rest[delim.len()..].starts_with(char::is_whitespace) {
            if let Some(end) = find_closing(s, delim, i + delim.len()) {
                let el = if delim == "**" { El::Strong } else { El::Em };
                flush(&mut text, out);
                out.push(Ev::Start(el.clone()));
                inline(&s[i + delim.len()..end], out);
                out.push(Ev::End(el));
                i = end + delim.len();
                continue;
            }
        }
        if rest.starts_with('[') {
            if let Some(link) = parse_link(s, i) {
                flush(&mut text, out);
                out.push(Ev::Start(El::A(link.href.to_string())));
                inline(link.label, out);
                out.push(Ev::End(El::A(link.href.to_string())));
                i = link.end;
                continue;
            }
        }
        let c = rest.chars().next().expect("non-empty rest");
        text.push(c);
        i += c.len_utf8();
    }
    flush(&mut text, out);
}

struct Link<'s> {
    label: &'s str,
    href: &'s str,
    end: usize,
}

fn parse_link(s: &str, at: usize) -> Option<Link<'_>> {
    let close = find_unescaped(s, "](", at + 1)?;
    let label = &s[at + 1..close];
    if label.contains('[') || label.contains('\n') {
        return None;
    }
    let href_start = close + 2;
    let href_end = find_unescaped(s, ")", href_start)?;
    let href = &s[href_start..href_end];
    if href.is_empty() || href.contains(char::is_whitespace) || href.contains(MARK_START) {
        return None;
    }
    Some(Link { label, href, end: href_end + 1 })
}

/// Escaped code text; placeholders still produce their markers.
fn code_text(s: &str, out: &mut Vec<Ev>) {
    let mut text = String::new();
    let mut i = 0;
    while i < s.len() {
        if let Some((idx, len)) = parse_placeholder(&s[i..]) {
            if !text.is_empty() {
                out.push(Ev::Text(escape(&text)));
                text.clear();
            }
            out.push(Ev::Marker(idx));
            i += len;
            continue;
        }
        let c = s[i..].chars().next().expect("non-empty");
        text.push(c);
        i += c.len_utf8();
    }
    if !text.is_empty() {
        out.push(Ev::Text(escape(&text)));
    }
}

#[derive(Debug)]
struct ListItem {
    text: String,
    nested: Option<(bool, Vec<String>)>,
}

#[derive(Debug)]
enum Block {
    Heading(usize, String),
    Para(Vec<String>),
    List(bool, Vec<ListItem>),
    Code(Vec<String>),
    Decl(usize),
}

struct ListMarker<'s> {
    indent: usize,
    ordered: bool,
    content: &'s str,
}

fn list_marker(line: &str) -> Option<ListMarker<'_>> {
    let trimmed = line.trim_start_matches(' ');
    let indent = line.len() - trimmed.len();
    let (ordered, content) = if let Some(c) = trimmed.strip_prefix("- ").or_else(|| trimmed.strip_prefix("* ")) {
        (false, c)
    } else {
        let digits = trimmed.len() - trimmed.trim_start_matches(|c: char| c.is_ascii_digit()).len();
        if digits == 0 {
            return None;
        }
        (true, trimmed[digits..].strip_prefix(". ")?)
    };
    Some(ListMarker { indent, ordered, content })
}

fn heading(line: &str) -> Option<(usize, &str)> {
    let trimmed = line.trim_start_matches(' ');
    let hashes = trimmed.len() - trimmed.trim_start_matches('#').len();
    if !(1..=6).contains(&hashes) {
        return None;
    }
    let rest = &trimmed[hashes..];
    if rest.is_empty() || rest.starts_with([' ', '\t']) {
        Some((hashes, rest.trim()))
    } else {
        None
    }
}

/// Splits a line into its leading placeholders and the remainder used for
/// block-syntax detection.
fn split_prefix(line: &str) -> (&str, &str) {
    let at = leading_markers(line);
    let at = line[..at].trim_end_matches([' ', '\t']).len();
    (&line[..at], &line[at..])
}

fn parse_blocks(text: &str, markers: &[Marker<'_>]) -> Vec<Block> {
    let mut blocks = Vec::new();
    let mut para: Vec<String> = Vec::new();
    let mut list: Option<(bool, Vec<ListItem>)> = None;
    let mut code: Option<Vec<String>> = None;

    fn end_para(para: &mut Vec<String>, blocks: &mut Vec<Block>) {
        if !para.is_empty() {
            blocks.push(Block::Para(std::mem::take(para)));
        }
    }
    fn end_list(list: &mut Option<(bool, Vec<ListItem>)>, blocks: &mut Vec<Block>) {
        if let Some((ordered, items)) = list.take() {
            blocks.push(Block::List(ordered, items));
        }
    }

    for line in text.split('\n') {
        if let Some(lines) = code.as_mut() {
            if line.trim_start().starts_with("```") {
                let (_, info) = line.trim_start().split_at(3);
                if info.contains(MARK_START) {
                    lines.push(info.to_string());
                }
                blocks.push(Block::Code(code.take().expect("open code block")));
            } else {
                lines.push(line.to_string());
            }
            continue;
        }

        let only_marker = parse_placeholder(line.trim()).filter(|(_, len)| *len == line.trim().len());
        if let Some((idx, _)) = only_marker {
            if markers.get(idx).is_some_and(Marker::is_declaration) {
                end_para(&mut para, &mut blocks);
                end_list(&mut list, &mut blocks);
                blocks.push(Block::Decl(idx));
                continue;
            }
        }

        if line.trim().is_empty() {
            end_para(&mut para, &mut blocks);
            end_list(&mut list, &mut blocks);
            continue;
        }

        let (prefix, rest) = split_prefix(line);
        if rest.trim_start().starts_with("```") {
            end_para(&mut para, &mut blocks);
            end_list(&mut list, &mut blocks);
            let info = &rest.trim_start()[3..];
            let mut first = prefix.to_string();
            if info.contains(MARK_START) {
                first.push_str(info);
            }
            code = Some(if first.is_empty() { Vec::new() } else { vec![first] });
            continue;
        }
        if let Some((level, content)) = heading(rest) {
            end_para(&mut para, &mut blocks);
            end_list(&mut list, &mut blocks);
            blocks.push(Block::Heading(level, format!("{prefix}{content}")));
            continue;
        }
        if let Some(m) = list_marker(rest) {
            end_para(&mut para, &mut blocks);
            let content = format!("{prefix}{}", m.content.trim_end());
            let nested = m.indent >= 2 && list.as_ref().is_some_and(|(_, items)| !items.is_empty());
            if nested {
                let (_, items) = list.as_mut().expect("open list");
                let last = items.last_mut().expect("non-empty list");
                match &mut last.nested {
                    Some((_, sub)) => sub.push(content),
                    None => last.nested = Some((m.ordered, vec![content])),
                }
                continue;
            }
            if list.as_ref().is_some_and(|(ordered, _)| *ordered != m.ordered) {
                end_list(&mut list, &mut blocks);
            }
            list.get_or_insert_with(|| (m.ordered, Vec::new())).1.push(ListItem { text: content, nested: None });
            continue;
        }
        if let Some((_, items)) = list.as_mut() {
            let last = items.last_mut().expect("non-empty list");
            let target = match &mut last.nested {
                Some((_, sub)) => sub.last_mut().expect("non-empty sublist"),
                None => &mut last.text,
            };
            target.push('\n');
            target.push_str(line.trim());
            continue;
        }
        para.push(line.trim().to_string());
    }
    if let Some(lines) = code.take() {
        blocks.push(Block::Code(lines));
    }
    end_para(&mut para, &mut blocks);
    end_list(&mut list, &mut blocks);
    blocks
}

fn block_events(blocks: &[Block]) -> Vec<Ev> {
    let mut ev = Vec::new();
    for block in blocks {
        match block {
            Block::Heading(n, text) => {
                ev.push(Ev::Start(El::H(*n)));
                inline(text, &mut ev);
                ev.push(Ev::End(El::H(*n)));
            }
            Block::Para(lines) => {
                ev.push(Ev::Start(El::P));
                inline(&lines.join("\n"), &mut ev);
                ev.push(Ev::End(El::P));
            }
            Block::List(ordered, items) => {
                let el = if *ordered { El::Ol } else { El::Ul };
                ev.push(Ev::Start(el.clone()));
                for item in items {
                    ev.push(Ev::Start(El::Li));
                    inline(&item.text, &mut ev);
                    if let Some((sub_ordered, sub)) = &item.nested {
                        let sub_el = if *sub_ordered { El::Ol } else { El::Ul };
                        ev.push(Ev::Start(sub_el.clone()));
                        for text in sub {
                            ev.push(Ev::Start(El::Li));
                            inline(text, &mut ev);
                            ev.push(Ev::End(El::Li));
                        }
                        ev.push(Ev::End(sub_el));
                    }
                    ev.push(Ev::End(El::Li));
                }
                ev.push(Ev::End(el));
            }
            Block::Code(lines) => {
                ev.push(Ev::Start(El::Pre));
                ev.push(Ev::Start(El::Code));
                code_text(&lines.join("\n"), &mut ev);
                ev.push(Ev::End(El::Code));
                ev.push(Ev::End(El::Pre));
            }
            Block::Decl(idx) => ev.push(Ev::Marker(*idx)),
        }
    }
    ev
}

/// Renders semantic tags against a document and its corpus.
pub struct TagRenderer<'a> {
    pub doc: &'a ScenarioDocument,
    pub corpus: &'a Corpus,
}

impl TagRenderer<'_> {
    fn marking_open(&self, tag: &Tag, with_anchor: bool) -> String {
        let class = tag.kind.as_str();
        let value = escape(&tag.name);
        match self.doc.marking_at(tag.open.start).filter(|_| with_anchor) {
            Some(m) => format!("<span class=\"{class}\" data-value=\"{value}\" id=\"{}\">", m.anchor_id),
            None => format!("<span class=\"{class}\" data-value=\"{value}\">"),
        }
    }

    fn marking_close(&self, tag: &Tag) -> String {
        format!("<sup>{}</sup></span>", escape(&tag.name))
    }

    fn declaration_open(&self, tag: &Tag) -> String {
        let class = tag.kind.as_str();
        let name = escape(&tag.name);
        format!("<div class=\"{class}\" id=\"{class}-{name}\"><strong>{name}</strong>: ")
    }

    /// Link for a void reference tag, or a `broken` span when unresolved.
    pub fn reference(&self, tag: &Tag) -> String {
        let broken = || format!("<span class=\"broken\">{}</span>", escape(&tag.name));
        let Some(r) = self.doc.references.iter().find(|r| r.offset == tag.open.start) else {
            return broken();
        };
        let anchor = match r.kind {
            RefKind::Ref => "def",
            RefKind::ModelRef => "model",
            RefKind::ScenarioRef => {
                return match self.corpus.get(&r.raw_name) {
                    Some(target) => format!(
                        "<a href=\"../{}/scenario.html\">{}</a>",
                        escape(&target.identifier),
                        escape(target.title())
                    ),
                    None => broken(),
                };
            }
        };
        let has = |doc: &ScenarioDocument| match r.kind {
            RefKind::Ref => doc.definitions.contains_key(&r.target_name),
            _ => doc.models.contains_key(&r.target_name),
        };
        let name = escape(&r.target_name);
        match &r.target_scenario {
            RefTarget::Local if has(self.doc) => format!("<a href=\"#{anchor}-{name}\">{name}</a>"),
            RefTarget::Scenario(sid) if self.corpus.get(sid).is_some_and(has) => {
                format!("<a href=\"../{}/scenario.html#{anchor}-{name}\">{name}</a>", escape(sid))
            }
            _ => broken(),
        }
    }
}

enum Open {
    El(El),
    Mark(usize),
    Decl(usize),
}

struct Serializer<'a, 'r> {
    out: String,
    stack: Vec<Open>,
    pending: Vec<usize>,
    markers: &'r [Marker<'a>],
    tags: &'r TagRenderer<'r>,
}

impl<'a> Serializer<'a, '_> {
    fn tag(&self, idx: usize) -> &'a Tag {
        match self.markers[idx] {
            Marker::Open(t) | Marker::Close(t) | Marker::Void(t) => t,
            Marker::Literal(_) => unreachable!("literal markers carry no tag"),
        }
    }

    fn flush_pending(&mut self) {
        for idx in std::mem::take(&mut self.pending) {
            let open = self.tags.marking_open(self.tag(idx), false);
            self.out.push_str(&open);
            self.stack.push(Open::Mark(idx));
        }
    }

    /// Pops everything above the first entry matching `is_target`, closing
    /// it. Returns the popped marks and inline elements, outermost first.
    fn unwind(&mut self, is_target: impl Fn(&Open) -> bool) -> Option<(Open, Vec<Open>)> {
        let pos = self.stack.iter().rposition(is_target)?;
        let mut above = Vec::new();
        while self.stack.len() > pos + 1 {
            let top = self.stack.pop().expect("above target");
            match &top {
                Open::El(el) => {
                    let _ = write!(self.out, "</{}>", el.name());
                }
                Open::Mark(_) => self.out.push_str("</span>"),
                Open::Decl(_) => self.out.push_str("</div>"),
            }
            above.push(top);
        }
        above.reverse();
        Some((self.stack.pop().expect("target"), above))
    }

    fn reopen_inline(&mut self, items: Vec<Open>) {
        for item in items {
            match item {
                Open::El(el) if el.is_inline() => {
                    self.out.push_str(&el.open_tag());
                    self.stack.push(Open::El(el));
                }
                Open::Mark(idx) => {
                    let open = self.tags.marking_open(self.tag(idx), false);
                    self.out.push_str(&open);
                    self.stack.push(Open::Mark(idx));
                }
                _ => {}
            }
        }
    }

    fn defer_marks(&mut self, items: Vec<Open>) {
        let marks: Vec<usize> = items
            .into_iter()
            .filter_map(|o| if let Open::Mark(i) = o { Some(i) } else { None })
            .collect();
        let mut pending = marks;
        pending.append(&mut self.pending);
        self.pending = pending;
    }

    fn event(&mut self, ev: Ev) {
        match ev {
            Ev::Start(el) => {
                if el.is_inline() {
                    self.flush_pending();
                }
                self.out.push_str(&el.open_tag());
                if matches!(el, El::Ul | El::Ol) {
                    self.out.push('\n');
                }
                self.stack.push(Open::El(el));
            }
            Ev::End(el) => {
                let Some((_, above)) = self.unwind(|o| matches!(o, Open::El(e) if *e == el)) else { return };
                let _ = write!(self.out, "</{}>", el.name());
                if el.is_inline() {
                    self.reopen_inline(above);
                } else {
                    self.defer_marks(above);
                    if el != El::Code {
                        self.out.push('\n');
                    }
                }
            }
            Ev::Text(t) => {
                self.flush_pending();
                self.out.push_str(&t);
            }
            Ev::Newline => self.out.push('\n'),
            Ev::Marker(idx) => self.marker(idx),
        }
    }

    fn marker(&mut self, idx: usize) {
        match self.markers[idx] {
            Marker::Literal(c) => {
                self.flush_pending();
                let _ = write!(self.out, "&#x{:X};", c as u32);
            }
            Marker::Void(tag) => {
                self.flush_pending();
                let link = self.tags.reference(tag);
                self.out.push_str(&link);
            }
            Marker::Open(tag) if tag.kind.is_declaration() => {
                let open = self.tags.declaration_open(tag);
                self.out.push_str(&open);
                self.stack.push(Open::Decl(idx));
            }
            Marker::Close(tag) if tag.kind.is_declaration() => {
                let open_idx = idx_of_open(self.markers, tag);
                if let Some((_, above)) = self.unwind(|o| matches!(o, Open::Decl(i) if Some(*i) == open_idx)) {
                    self.out.push_str("</div>\n");
                    self.defer_marks(above);
                }
            }
            Marker::Open(tag) => {
                self.flush_pending();
                let open = self.tags.marking_open(tag, true);
                self.out.push_str(&open);
                self.stack.push(Open::Mark(idx));
            }
            Marker::Close(tag) => {
                let open_idx = idx_of_open(self.markers, tag);
                if let Some(p) = self.pending.iter().position(|i| Some(*i) == open_idx) {
                    // Reopen the span so the superscript stays inside it.
                    let mut inner = self.pending.split_off(p);
                    inner.remove(0);
                    self.pending.truncate(p);
                    let open = self.tags.marking_open(tag, false);
                    self.out.push_str(&open);
                    self.out.push_str(&self.tags.marking_close(tag));
                    self.pending.extend(inner);
                    return;
                }
                if let Some((_, above)) = self.unwind(|o| matches!(o, Open::Mark(i) if Some(*i) == open_idx)) {
                    let close = self.tags.marking_close(tag);
                    self.out.push_str(&close);
                    self.reopen_inline(above);
                }
            }
        }
    }

    fn finish(mut self) -> String {
        while let Some(top) = self.stack.pop() {
            match top {
                Open::El(el) => {
                    let _ = write!(self.out, "</{}>", el.name());
                }
                Open::Mark(_) => self.out.push_str("</span>"),
                Open::Decl(_) => self.out.push_str("</div>"),
            }
        }
        self.out
    }
}

fn idx_of_open(markers: &[Marker<'_>], tag: &Tag) -> Option<usize> {
    markers
        .iter()
        .position(|m| matches!(m, Marker::Open(t) if std::ptr::eq(*t, tag)))
}

/// Renders the markdown subset with semantic tags to an HTML fragment.
pub fn render_markdown(segments: &[BodySegment], tags: &TagRenderer<'_>) -> String {
    let mut flat = Flattened {
        text: String::new(),
        markers: Vec::new(),
    };
    flat.walk(tags.doc.file.text(), segments);
    let blocks = parse_blocks(&flat.text, &flat.markers);
    let mut ser = Serializer {
        out: String::new(),
        stack: Vec::new(),
        pending: Vec::new(),
        markers: &flat.markers,
        tags,
    };
    for ev in block_events(&blocks) {
        ser.event(ev);
    }
    ser.finish()
}

/// Anchors of the marked passages per dimension value, in document order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MarkingIndex {
    pub phases: BTreeMap<Phase, Vec<String>>,
    pub levels: BTreeMap<Level, Vec<String>>,
}

impl MarkingIndex {
    pub fn of(doc: &ScenarioDocument) -> Self {
        let mut index = MarkingIndex::default();
        for m in &doc.markings {
            match (m.dimension, m.value) {
                (Dimension::Phase, crate::scenario_space::AxisValue::Phase(p)) => {
                    index.phases.entry(p).or_default().push(m.anchor_id.clone())
                }
                (Dimension::Level, crate::scenario_space::AxisValue::Level(l)) => {
                    index.levels.entry(l).or_default().push(m.anchor_id.clone())
                }
                _ => {}
            }
        }
        index
    }

    pub fn anchors(&self) -> impl Iterator<Item = &String> {
        self.phases.values().chain(self.levels.values()).flatten()
    }
}

fn index_table<K: std::fmt::Display>(out: &mut String, class: &str, heading: &str, rows: &BTreeMap<K, Vec<String>>) {
    let _ = writeln!(out, "<table class=\"{class}\">");
    let _ = writeln!(out, "<thead><tr><th>{heading}</th><th>Occurrences</th></tr></thead>");
    out.push_str("<tbody>\n");
    for (value, anchors) in rows {
        let links: Vec<String> = anchors
            .iter()
            .enumerate()
            .map(|(i, a)| format!("<a href=\"#{a}\">{}</a>", i + 1))
            .collect();
        let _ = writeln!(out, "<tr><td>{}</td><td>{}</td></tr>", escape(&value.to_string()), links.join(" "));
    }
    out.push_str("</tbody>\n</table>\n");
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RenderedPage {
    pub identifier: String,
    pub html: String,
    /// Relative to the output directory.
    pub path: PathBuf,
}

fn page_head(out: &mut String, title: &str) {
    out.push_str("<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n");
    let _ = writeln!(out, "<title>{}</title>", escape(title));
    let _ = write!(out, "<style>\n{STYLESHEET}</style>\n</head>\n<body>\n");
}

/// A standalone page: header, rendered body, marking index, footer.
pub fn render_page(doc: &ScenarioDocument, corpus: &Corpus, graph: &OntologyGraph) -> RenderedPage {
    let mut out = String::new();
    page_head(&mut out, doc.title());

    out.push_str("<header>\n");
    let _ = writeln!(out, "<h1 class=\"title\">{}</h1>", escape(doc.title()));
    let _ = writeln!(out, "<p class=\"identifier\"><code>{}</code></p>", escape(&doc.identifier));
    if let Some(contact) = doc.meta.contact.as_deref().filter(|c| !c.trim().is_empty()) {
        let _ = writeln!(out, "<p class=\"contact\">Contact: {}</p>", escape(contact.trim()));
    }
    let _ = writeln!(
        out,
        "<p class=\"volumetric\"><img src=\"volumetric.svg\" alt=\"Volumetric of {}\"></p>",
        escape(doc.title())
    );
    out.push_str("<section class=\"relations\">\n<h2>Relations</h2>\n<ul>\n");
    for edge in graph.outgoing(&doc.identifier) {
        let label = corpus.get(&edge.target).map_or(edge.target.as_str(), |d| d.title());
        let _ = writeln!(
            out,
            "<li><span class=\"nature\">{}</span> <a href=\"../{}/scenario.html\">{}</a></li>",
            escape(&edge.nature),
            escape(&edge.target),
            escape(label)
        );
    }
    out.push_str("</ul>\n</section>\n</header>\n<main>\n");

    let tags = TagRenderer { doc, corpus };
    out.push_str(&render_markdown(&doc.segments, &tags));
    out.push_str("</main>\n");

    let index = MarkingIndex::of(doc);
    out.push_str("<section class=\"marking-index\">\n<h2>Index</h2>\n<h3>Phases</h3>\n");
    index_table(&mut out, "phases", "Phase", &index.phases);
    out.push_str("<h3>Levels</h3>\n");
    index_table(&mut out, "levels", "Level", &index.levels);
    out.push_str("</section>\n");

    out.push_str("<footer>\n<p><a href=\"../index.html\">All scenarios</a></p>\n</footer>\n</body>\n</html>\n");
    RenderedPage {
        identifier: doc.identifier.clone(),
        html: out,
        path: PathBuf::from(&doc.identifier).join("scenario.html"),
    }
}

/// The corpus index: one row per scenario plus the ontology graph.
pub fn render_corpus_index(corpus: &Corpus, _graph: &OntologyGraph) -> RenderedPage {
    let mut out = String::new();
    page_head(&mut out, "Scenarios");
    out.push_str("<header>\n<h1 class=\"title\">Scenarios</h1>\n</header>\n<main>\n");
    out.push_str("<table class=\"scenarios\">\n<thead><tr><th>Volumetric</th><th>Scenario</th><th>Identifier</th><th>Words</th></tr></thead>\n<tbody>\n");
    for doc in corpus.iter() {
        let id = escape(&doc.identifier);
        let _ = writeln!(
            out,
            "<tr><td class=\"thumbnail\"><a href=\"{id}/volumetric.svg\">{}</a></td><td><a href=\"{id}/scenario.html\">{}</a></td><td><code>{id}</code></td><td>{}</td></tr>",
            render_volumetric_svg(&doc.volumetric, true).trim_end(),
            escape(doc.title()),
            word_count(doc),
        );
    }
    out.push_str("</tbody>\n</table>\n");
    out.push_str("<h2>Ontology</h2>\n<p><img src=\"ontology.svg\" alt=\"Scenario ontology\"></p>\n");
    out.push_str("</main>\n</body>\n</html>\n");
    RenderedPage {
        identifier: String::new(),
        html: out,
        path: PathBuf::from("index.html"),
    }
}
