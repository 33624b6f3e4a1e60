//! Corpus discovery, cross-scenario resolution and the relation graph.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::diagnostics::{Code, Diagnostic};
use crate::document::{is_valid_identifier, RefKind, RefTarget, ScenarioDocument};

pub const SCENARIO_FILE: &str = "scenario.md";

pub const DEFAULT_NATURES: [&str; 4] = ["uses", "refines", "is-step-of", "bundles"];

/// A discovered scenario file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Discovered {
    pub identifier: String,
    pub path: PathBuf,
}

/// Renders a path with `/` separators for diagnostics and output.
pub fn display_path(path: &Path) -> String {
    path.components()
        .map(|c| c.as_os_str().to_string_lossy())
        .collect::<Vec<_>>()
        .join("/")
        .replace("//", "/")
}

/// Finds every `scenario.md` under `dir`. The result is sorted by identifier
/// and does not depend on directory enumeration order.
pub fn discover(dir: &Path) -> std::io::Result<(Vec<Discovered>, Vec<Diagnostic>)> {
    let mut found = Vec::new();
    for entry in walkdir::WalkDir::new(dir).sort_by_file_name() {
        let entry = entry.map_err(std::io::Error::other)?;
        if !entry.file_type().is_file() || entry.file_name() != SCENARIO_FILE {
            continue;
        }
        let identifier = entry
            .path()
            .parent()
            .and_then(|p| p.file_name())
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        found.push(Discovered {
            identifier,
            path: entry.path().to_path_buf(),
        });
    }
    found.sort_by(|a, b| (&a.identifier, &a.path).cmp(&(&b.identifier, &b.path)));

    let mut diags = Vec::new();
    let mut kept: Vec<Discovered> = Vec::new();
    for d in found {
        if !is_valid_identifier(&d.identifier) {
            diags.push(Diagnostic::in_file(
                Code::E010,
                format!("scenario identifier '{}' must match [a-z0-9_]+", d.identifier),
                display_path(&d.path),
            ));
            continue;
        }
        if let Some(first) = kept.iter().find(|k| k.identifier == d.identifier) {
            diags.push(Diagnostic::in_file(
                Code::E010,
                format!(
                    "duplicate scenario identifier '{}' (also {})",
                    d.identifier,
                    display_path(&first.path)
                ),
                display_path(&d.path),
            ));
            continue;
        }
        kept.push(d);
    }
    Ok((kept, diags))
}

/// All successfully built documents, keyed and ordered by identifier.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    pub documents: BTreeMap<String, ScenarioDocument>,
}

impl Corpus {
    pub fn new(docs: impl IntoIterator<Item = ScenarioDocument>) -> Self {
        Corpus {
            documents: docs.into_iter().map(|d| (d.identifier.clone(), d)).collect(),
        }
    }

    pub fn get(&self, id: &str) -> Option<&ScenarioDocument> {
        self.documents.get(id)
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &ScenarioDocument> {
        self.documents.values()
    }
}

/// Directed relation from the declaring scenario to its target.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Edge {
    pub source: String,
    pub target: String,
    pub nature: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OntologyGraph {
    pub nodes: Vec<String>,
    pub edges: Vec<Edge>,
}

impl OntologyGraph {
    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.nodes.binary_search_by(|n| n.as_str().cmp(id)).ok()
    }

    pub fn outgoing<'a>(&'a self, id: &'a str) -> impl Iterator<Item = &'a Edge> {
        self.edges.iter().filter(move |e| e.source == id)
    }
}

/// One edge per relation whose target exists; E008 for the others and W102
/// for natures outside `natures`.
pub fn build_graph(corpus: &Corpus, natures: &[String]) -> (OntologyGraph, Vec<Diagnostic>) {
    let mut graph = OntologyGraph {
        nodes: corpus.documents.keys().cloned().collect(),
        edges: Vec::new(),
    };
    let mut diags = Vec::new();
    for doc in corpus.iter() {
        for rel in &doc.meta.relations {
            let target = rel.target.trim();
            let nature = rel.nature.trim();
            if !natures.iter().any(|n| n == nature) {
                diags.push(Diagnostic::at(
                    Code::W102,
                    format!("relation to '{target}' has non-canonical nature '{nature}'"),
                    &doc.meta_span,
                ));
            }
            if corpus.get(target).is_none() {
                diags.push(Diagnostic::at(
                    Code::E008,
                    format!("relation target '{target}' is not a scenario in the corpus"),
                    &doc.meta_span,
                ));
                continue;
            }
            graph.edges.push(Edge {
                source: doc.identifier.clone(),
                target: target.to_string(),
                nature: nature.to_string(),
            });
        }
    }
    (graph, diags)
}

/// Checks qualified symbol references and scenario references.
pub fn resolve_cross(corpus: &Corpus) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    for doc in corpus.iter() {
        for r in &doc.references {
            let RefTarget::Scenario(sid) = &r.target_scenario else { continue };
            let Some(target) = corpus.get(sid) else {
                diags.push(Diagnostic::at(
                    Code::E007,
                    format!("reference '{}' names unknown scenario '{sid}'", r.raw_name),
                    &r.span,
                ));
                continue;
            };
            let (found, what) = match r.kind {
                RefKind::Ref => (target.definitions.contains_key(&r.target_name), "definition"),
                RefKind::ModelRef => (target.models.contains_key(&r.target_name), "model"),
                RefKind::ScenarioRef => continue,
            };
            if !found {
                diags.push(Diagnostic::at(
                    Code::E006,
                    format!("unresolved {what} reference '{}': '{sid}' has no {what} '{}'", r.raw_name, r.target_name),
                    &r.span,
                ));
            }
        }
    }
    diags
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Degree {
    pub in_degree: usize,
    pub out_degree: usize,
}

pub type DegreeStats = BTreeMap<String, Degree>;

/// In/out degree per node; parallel edges count separately.
pub fn degree_stats(graph: &OntologyGraph) -> DegreeStats {
    let mut stats: DegreeStats = graph.nodes.iter().map(|n| (n.clone(), Degree::default())).collect();
    for e in &graph.edges {
        if let Some(d) = stats.get_mut(&e.source) {
            d.out_degree += 1;
        }
        if let Some(d) = stats.get_mut(&e.target) {
            d.in_degree += 1;
        }
    }
    stats
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::document::tests::doc_from;
    use proptest::prelude::*;

    fn natures() -> Vec<String> {
        DEFAULT_NATURES.iter().map(|s| s.to_string()).collect()
    }

    fn doc(id: &str, relations: &[(&str, &str)], body: &str) -> ScenarioDocument {
        let rels: Vec<String> = relations
            .iter()
            .map(|(t, n)| format!("{{\"target\":\"{t}\",\"nature\":\"{n}\"}}"))
            .collect();
        let src = format!(
            "<rasaeco-meta>{{\"title\":\"{id}\",\"relations\":[{}]}}</rasaeco-meta>\n{body}",
            rels.join(",")
        );
        doc_from(id, &src).0
    }

    #[test]
    fn discovery_order_and_duplicates() {
        let dir = tempfile::tempdir().unwrap();
        assert_eq!(discover(dir.path()).unwrap(), (vec![], vec![]));
        for rel in ["truck_guidance", "cost_tracking", "a/x", "b/x", "Bad-Name"] {
            std::fs::create_dir_all(dir.path().join(rel)).unwrap();
            std::fs::write(dir.path().join(rel).join(SCENARIO_FILE), "").unwrap();
        }
        let (found, diags) = discover(dir.path()).unwrap();
        let ids: Vec<_> = found.iter().map(|d| d.identifier.as_str()).collect();
        assert_eq!(ids, vec!["cost_tracking", "truck_guidance", "x"]);
        assert!(found[2].path.ends_with("a/x/scenario.md"));
        assert_eq!(diags.len(), 2);
        assert!(diags.iter().all(|d| d.code == Code::E010));
    }

    #[test]
    fn refinement_graph() {
        let corpus = Corpus::new([
            doc("risk_management", &[], ""),
            doc("risk_planning", &[("risk_management", "refines")], ""),
            doc("risk_tracking", &[("risk_management", "refines")], ""),
        ]);
        let (graph, diags) = build_graph(&corpus, &natures());
        assert!(diags.is_empty());
        assert_eq!(graph.edges.len(), 2);
        let deg = degree_stats(&graph);
        assert_eq!(deg["risk_management"].in_degree, 2);
        assert_eq!(deg["risk_planning"].out_degree, 1);
        assert_eq!(deg["risk_tracking"].out_degree, 1);
    }

    #[test]
    fn dangling_and_noncanonical() {
        let corpus = Corpus::new([doc("a", &[("nonexistent", "uses"), ("a", "inspired-by")], "")]);
        let (graph, diags) = build_graph(&corpus, &natures());
        let codes: Vec<_> = diags.iter().map(|d| d.code).collect();
        assert_eq!(codes, vec![Code::E008, Code::W102]);
        assert_eq!(graph.edges.len(), 1);
    }

    #[test]
    fn cross_references() {
        let corpus = Corpus::new([
            doc("cost_tracking", &[], "<def name=\"cost\">c</def>"),
            doc(
                "truck_guidance",
                &[],
                "<scenarioref name=\"truck_guidance\"/> <ref name=\"cost_tracking#cost\"/> <ref name=\"ghost#cost\"/> <ref name=\"cost_tracking#nope\"/> <scenarioref name=\"ghost\"/>",
            ),
        ]);
        let codes: Vec<_> = resolve_cross(&corpus).iter().map(|d| d.code).collect();
        assert_eq!(codes, vec![Code::E007, Code::E006, Code::E007]);
    }

    #[test]
    fn cycles_are_fine() {
        let corpus = Corpus::new([doc("a", &[("b", "uses")], ""), doc("b", &[("a", "uses")], "")]);
        let (_, diags) = build_graph(&corpus, &natures());
        assert!(diags.is_empty());
    }

    #[test]
    fn empty_graph_degrees() {
        assert!(degree_stats(&OntologyGraph::default()).is_empty());
    }

    proptest! {
        #[test]
        fn degrees_match_brute_force(n in 1usize..=6, pairs in prop::collection::vec((0usize..6, 0usize..6), 0..20)) {
            let nodes: Vec<String> = (0..n).map(|i| format!("n{i}")).collect();
            let edges: Vec<Edge> = pairs
                .iter()
                .filter(|(s, t)| *s < n && *t < n)
                .map(|(s, t)| Edge { source: nodes[*s].clone(), target: nodes[*t].clone(), nature: "uses".into() })
                .collect();
            let graph = OntologyGraph { nodes: nodes.clone(), edges };
            let deg = degree_stats(&graph);
            for v in &nodes {
                let mut i = 0;
                let mut o = 0;
                for e in &graph.edges {
                    if &e.target == v { i += 1; }
                    if &e.source == v { o += 1; }
                }
                prop_assert_eq!(deg[v], Degree { in_degree: i, out_degree: o });
            }
            let sum_in: usize = deg.values().map(|d| d.in_degree).sum();
            let sum_out: usize = deg.values().map(|d| d.out_degree).sum();
            prop_assert_eq!(sum_in, graph.edges.len());
            prop_assert_eq!(sum_out, graph.edges.len());
        }
    }
}
