//! Corpus compilation and output-tree writing.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::diagnostics::{Code, Diagnostic, Report};
use crate::document::{build_document, lint_ifc, resolve_local, IfcVocabulary, ScenarioDocument};
use crate::markup::{extract_meta, parse_meta, parse_tags, tokenize_body};
use crate::ontology::{build_graph, discover, display_path, resolve_cross, Corpus, Discovered, OntologyGraph, DEFAULT_NATURES};
use crate::render_html::{render_corpus_index, render_page};
use crate::source::SourceFile;
use crate::stats::{corpus_stats, CorpusStats};
use crate::visual::{layout_graph, render_graph_svg, render_volumetric_svg};

/// Setting this to `1` runs every parallel stage on a single worker.
pub const NO_PARALLEL_ENV: &str = "RASAECO_NO_PARALLEL";

#[derive(Debug, Clone)]
pub struct Settings {
    pub ifc_vocabulary: IfcVocabulary,
    pub natures: Vec<String>,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            ifc_vocabulary: IfcVocabulary::default(),
            natures: DEFAULT_NATURES.iter().map(|s| s.to_string()).collect(),
        }
    }
}

/// Runs `f` on a pool sized by the environment: one worker when
/// `RASAECO_NO_PARALLEL=1`, the global pool otherwise.
pub fn with_pool<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    if std::env::var(NO_PARALLEL_ENV).is_ok_and(|v| v == "1") {
        rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .expect("single-thread pool")
            .install(f)
    } else {
        f()
    }
}

/// Parses and builds one scenario file. Returns no document when the header
/// is missing or unusable.
pub fn load_scenario(identifier: &str, path: &str, raw: &str, vocabulary: &IfcVocabulary) -> (Option<ScenarioDocument>, Vec<Diagnostic>) {
    let file = SourceFile::new(path, raw);
    let split = match extract_meta(&file) {
        Ok(split) => split,
        Err(d) => return (None, vec![d]),
    };
    let (meta, mut diags) = parse_meta(&file, split.meta.clone());
    let Some(meta) = meta else { return (None, diags) };
    let (tokens, d) = tokenize_body(&file, split.body.clone());
    diags.extend(d);
    let (segments, d) = parse_tags(&file, tokens);
    diags.extend(d);
    let meta_span = file.span(split.meta.clone());
    let (doc, d) = build_document(identifier, file, meta, meta_span, split.body, segments);
    diags.extend(d);
    diags.extend(resolve_local(&doc));
    diags.extend(lint_ifc(&doc, vocabulary));
    (Some(doc), diags)
}

fn read_scenario(d: &Discovered, vocabulary: &IfcVocabulary) -> (Option<ScenarioDocument>, Vec<Diagnostic>) {
    let path = display_path(&d.path);
    let bytes = match fs::read(&d.path) {
        Ok(b) => b,
        Err(e) => return (None, vec![Diagnostic::in_file(Code::E002, format!("cannot read file: {e}"), path)]),
    };
    match String::from_utf8(bytes) {
        Ok(raw) => load_scenario(&d.identifier, &path, &raw, vocabulary),
        Err(e) => {
            let valid = &e.as_bytes()[..e.utf8_error().valid_up_to()];
            let prefix = String::from_utf8_lossy(valid).replace("\r\n", "\n");
            let line = prefix.matches('\n').count() as u32 + 1;
            let col = prefix.rsplit('\n').next().map_or(0, |l| l.chars().count()) as u32 + 1;
            (None, vec![Diagnostic::new(Code::E002, "file is not valid UTF-8", path, line, col)])
        }
    }
}

/// A compiled corpus: every document that could be built, the relation
/// graph, and the full diagnostic report.
#[derive(Debug, Clone)]
pub struct Compiled {
    pub corpus: Corpus,
    pub graph: OntologyGraph,
    pub report: Report,
}

impl Compiled {
    pub fn stats(&self, settings: &Settings) -> CorpusStats {
        corpus_stats(&self.corpus, &self.graph, &settings.ifc_vocabulary)
    }
}

/// Discovers, parses, builds and resolves every scenario under `dir`.
pub fn compile(dir: &Path, settings: &Settings) -> io::Result<Compiled> {
    let (found, mut diags) = discover(dir)?;
    let loaded: Vec<_> = with_pool(|| {
        found
            .par_iter()
            .map(|d| read_scenario(d, &settings.ifc_vocabulary))
            .collect()
    });
    let mut docs = Vec::new();
    for (doc, d) in loaded {
        diags.extend(d);
        docs.extend(doc);
    }
    let corpus = Corpus::new(docs);
    let (graph, d) = build_graph(&corpus, &settings.natures);
    diags.extend(d);
    diags.extend(resolve_cross(&corpus));
    Ok(Compiled {
        corpus,
        graph,
        report: Report::new(diags),
    })
}

/// One output file, relative to the output directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputFile {
    pub path: PathBuf,
    pub contents: String,
}

/// Every file of the output tree, sorted by path.
pub fn render_all(compiled: &Compiled) -> Vec<OutputFile> {
    let Compiled { corpus, graph, .. } = compiled;
    let mut files: Vec<OutputFile> = with_pool(|| {
        corpus
            .documents
            .par_iter()
            .flat_map_iter(|(id, doc)| {
                let page = render_page(doc, corpus, graph);
                [
                    OutputFile { path: page.path, contents: page.html },
                    OutputFile {
                        path: PathBuf::from(id).join("volumetric.svg"),
                        contents: render_volumetric_svg(&doc.volumetric, false),
                    },
                ]
            })
            .collect()
    });
    let index = render_corpus_index(corpus, graph);
    files.push(OutputFile { path: index.path, contents: index.html });
    files.push(OutputFile {
        path: PathBuf::from("ontology.svg"),
        contents: render_graph_svg(&layout_graph(graph), graph, corpus),
    });
    files.sort_by(|a, b| a.path.cmp(&b.path));
    files
}

/// Writes `files` into a staging directory next to `out`, then swaps it into
/// place. A failure before the swap leaves `out` untouched.
pub fn write_output(out: &Path, files: &[OutputFile]) -> io::Result<()> {
    let parent = match out.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&parent)?;
    let staging = tempfile::Builder::new().prefix(".rasaeco-staging-").tempdir_in(&parent)?;
    for f in files {
        let target = staging.path().join(&f.path);
        if let Some(dir) = target.parent() {
            fs::create_dir_all(dir)?;
        }
        fs::write(&target, &f.contents)?;
    }
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        fs::set_permissions(staging.path(), fs::Permissions::from_mode(0o755))?;
    }

    let staged = staging.keep();
    let backup = if out.exists() {
        let holder = tempfile::Builder::new().prefix(".rasaeco-old-").tempdir_in(&parent)?;
        let backup = holder.path().join("out");
        fs::rename(out, &backup)?;
        Some(holder)
    } else {
        None
    };
    if let Err(e) = fs::rename(&staged, out) {
        if let Some(holder) = &backup {
            let _ = fs::rename(holder.path().join("out"), out);
        }
        let _ = fs::remove_dir_all(&staged);
        return Err(e);
    }
    drop(backup);
    Ok(())
}
