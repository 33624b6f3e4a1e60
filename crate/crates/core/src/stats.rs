//! Corpus metrics: word counts, marking and definition counts, degrees.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::document::{word_count, Dimension, IfcVocabulary, ScenarioDocument};
use crate::ontology::{degree_stats, Corpus, OntologyGraph};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioStats {
    pub identifier: String,
    pub word_count: usize,
    pub phase_markings: usize,
    pub level_markings: usize,
    pub definitions: usize,
    pub ifc_matched: usize,
    pub in_degree: usize,
    pub out_degree: usize,
}

/// Word-count buckets over [0,500), [500,1000] and (1000,inf).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordBuckets {
    pub under_500: usize,
    pub from_500_to_1000: usize,
    pub over_1000: usize,
}

impl WordBuckets {
    pub fn add(&mut self, words: usize) {
        match words {
            0..500 => self.under_500 += 1,
            500..=1000 => self.from_500_to_1000 += 1,
            _ => self.over_1000 += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.under_500 + self.from_500_to_1000 + self.over_1000
    }
}

/// Number of scenarios per count value.
pub type Histogram = BTreeMap<usize, usize>;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Totals {
    pub scenarios: usize,
    pub word_buckets: WordBuckets,
    pub phase_marking_histogram: Histogram,
    pub level_marking_histogram: Histogram,
    pub in_degree_histogram: Histogram,
    pub out_degree_histogram: Histogram,
    pub definitions: usize,
    pub ifc_matched: usize,
    pub ifc_match_ratio: f64,
    pub edges: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub scenarios: Vec<ScenarioStats>,
    pub totals: Totals,
}

/// Definitions with at least one IFC token in the vocabulary.
pub fn ifc_matched_definitions(doc: &ScenarioDocument, vocabulary: &IfcVocabulary) -> usize {
    doc.definitions
        .values()
        .filter(|d| d.ifc_tokens.iter().any(|t| vocabulary.contains(&t.text)))
        .count()
}

pub fn corpus_stats(corpus: &Corpus, graph: &OntologyGraph, vocabulary: &IfcVocabulary) -> CorpusStats {
    let degrees = degree_stats(graph);
    let scenarios: Vec<ScenarioStats> = corpus
        .iter()
        .map(|doc| {
            let degree = degrees.get(&doc.identifier).copied().unwrap_or_default();
            ScenarioStats {
                identifier: doc.identifier.clone(),
                word_count: word_count(doc),
                phase_markings: doc.markings_of(Dimension::Phase).count(),
                level_markings: doc.markings_of(Dimension::Level).count(),
                definitions: doc.definitions.len(),
                ifc_matched: ifc_matched_definitions(doc, vocabulary),
                in_degree: degree.in_degree,
                out_degree: degree.out_degree,
            }
        })
        .collect();

    let mut totals = Totals {
        scenarios: scenarios.len(),
        edges: graph.edges.len(),
        ..Totals::default()
    };
    for s in &scenarios {
        totals.word_buckets.add(s.word_count);
        *totals.phase_marking_histogram.entry(s.phase_markings).or_default() += 1;
        *totals.level_marking_histogram.entry(s.level_markings).or_default() += 1;
        *totals.in_degree_histogram.entry(s.in_degree).or_default() += 1;
        *totals.out_degree_histogram.entry(s.out_degree).or_default() += 1;
        totals.definitions += s.definitions;
        totals.ifc_matched += s.ifc_matched;
    }
    if totals.definitions > 0 {
        totals.ifc_match_ratio = totals.ifc_matched as f64 / totals.definitions as f64;
    }
    CorpusStats { scenarios, totals }
}

/// Pretty-printed JSON with a trailing newline.
pub fn emit_stats_json(stats: &CorpusStats) -> String {
    let mut out = serde_json::to_string_pretty(stats).expect("stats serialize");
    out.push('\n');
    out
}

/// Plain-text summary for `stats --format text`.
pub fn emit_stats_text(stats: &CorpusStats) -> String {
    use std::fmt::Write as _;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<24} {:>6} {:>6} {:>6} {:>5} {:>4} {:>4} {:>4}",
        "scenario", "words", "phase", "level", "defs", "ifc", "in", "out"
    );
    for s in &stats.scenarios {
        let _ = writeln!(
            out,
            "{:<24} {:>6} {:>6} {:>6} {:>5} {:>4} {:>4} {:>4}",
            s.identifier, s.word_count, s.phase_markings, s.level_markings, s.definitions, s.ifc_matched, s.in_degree, s.out_degree
        );
    }
    let t = &stats.totals;
    let _ = writeln!(
        out,
        "{} scenario(s), {} edge(s); words <500: {}, 500-1000: {}, >1000: {}; {} of {} definition(s) IFC-matched ({:.0}%)",
        t.scenarios,
        t.edges,
        t.word_buckets.under_500,
        t.word_buckets.from_500_to_1000,
        t.word_buckets.over_1000,
        t.ifc_matched,
        t.definitions,
        t.ifc_match_ratio * 100.0
    );
    out
}
