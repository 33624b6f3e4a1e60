//! Command-line entry point: `render`, `check` and `stats`.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::diagnostics::{exit_code, format_json, format_text};
use crate::document::IfcVocabulary;
use crate::ontology::DEFAULT_NATURES;
use crate::pipeline::{compile, render_all, write_output, Settings};
use crate::stats::{emit_stats_json, emit_stats_text};

pub const CONFIG_FILE: &str = "rasaeco.config.json";

pub const EXIT_USAGE: i32 = 64;
pub const EXIT_NO_INPUT: i32 = 66;
pub const EXIT_IO: i32 = 74;
pub const EXIT_CONFIG: i32 = 78;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "rasaeco", version, about = "Compile, lint and render scenario corpora")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Render the corpus to an HTML and SVG output tree.
    Render {
        #[command(flatten)]
        common: CommonArgs,
        /// Output directory, replaced as a whole on success.
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
        /// Treat warnings as failures (exit 1).
        #[arg(long)]
        strict: bool,
    },
    /// Lint the corpus and print the diagnostic report.
    Check {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Treat warnings as failures (exit 1).
        #[arg(long)]
        strict: bool,
    },
    /// Print corpus statistics.
    Stats {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Directory holding one `<identifier>/scenario.md` per scenario.
    #[arg(long, value_name = "DIR")]
    scenarios_dir: PathBuf,
    /// File of IFC entity names, one per line.
    #[arg(long, value_name = "FILE")]
    ifc_vocabulary: Option<PathBuf>,
    /// Comma-separated relation natures.
    #[arg(long, value_name = "LIST", value_delimiter = ',')]
    nature_vocabulary: Option<Vec<String>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Render,
    Check,
    Stats,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Config {
    pub mode: Mode,
    pub scenarios_dir: PathBuf,
    pub out_dir: Option<PathBuf>,
    pub ifc_vocabulary_path: Option<PathBuf>,
    pub nature_vocabulary: Vec<String>,
    pub strict: bool,
    pub format: Format,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    ifc_vocabulary_path: Option<PathBuf>,
    nature_vocabulary: Option<Vec<String>>,
}

/// A failure that ends the run before any report is produced.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    NoInput(String),
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::NoInput(_) => EXIT_NO_INPUT,
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

/// Merges command-line flags with the optional config file in the scenarios
/// directory. Flags win; relative paths in the file resolve against that
/// directory.
fn load_config(cli: Cli) -> Result<Config, CliError> {
    let (mode, common, out_dir, strict, format) = match cli.command {
        Command::Render { common, out, strict } => (Mode::Render, common, Some(out), strict, Format::Text),
        Command::Check { common, format, strict } => (Mode::Check, common, None, strict, format),
        Command::Stats { common, format } => (Mode::Stats, common, None, false, format),
    };
    let dir = common.scenarios_dir;
    if !dir.is_dir() {
        return Err(CliError::NoInput(format!("scenarios directory '{}' does not exist", dir.display())));
    }
    let file = read_config_file(&dir)?;
    let ifc_vocabulary_path = common
        .ifc_vocabulary
        .or_else(|| file.ifc_vocabulary_path.map(|p| dir.join(p)));
    let nature_vocabulary = common
        .nature_vocabulary
        .or(file.nature_vocabulary)
        .unwrap_or_else(|| DEFAULT_NATURES.iter().map(|s| s.to_string()).collect());
    Ok(Config {
        mode,
        scenarios_dir: dir,
        out_dir,
        ifc_vocabulary_path,
        nature_vocabulary,
        strict,
        format,
    })
}

fn read_config_file(dir: &Path) -> Result<ConfigFile, CliError> {
    let path = dir.join(CONFIG_FILE);
    let text = match std::fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(ConfigFile::default()),
        Err(e) => return Err(CliError::Config(format!("{}: {e}", path.display()))),
    };
    serde_json::from_str(&text).map_err(|e| {
        CliError::Config(format!(
            "{}:{}:{}: E002 error: malformed configuration: {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    })
}

fn settings(config: &Config) -> Result<Settings, CliError> {
    let ifc_vocabulary = match &config.ifc_vocabulary_path {
        Some(p) => IfcVocabulary::load(p)
            .map_err(|e| CliError::NoInput(format!("cannot read IFC vocabulary '{}': {e}", p.display())))?,
        None => IfcVocabulary::default(),
    };
    Ok(Settings {
        ifc_vocabulary,
        natures: config.nature_vocabulary.clone(),
    })
}

fn execute(config: &Config, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, CliError> {
    let settings = settings(config)?;
    let compiled = compile(&config.scenarios_dir, &settings)
        .map_err(|e| CliError::Io(format!("cannot read '{}': {e}", config.scenarios_dir.display())))?;
    let report = &compiled.report;
    let io = |e: std::io::Error| CliError::Io(e.to_string());
    match config.mode {
        Mode::Check => match config.format {
            Format::Text => {
                for line in format_text(report) {
                    writeln!(stdout, "{line}").map_err(io)?;
                }
            }
            Format::Json => writeln!(stdout, "{}", format_json(report)).map_err(io)?,
        },
        Mode::Render => {
            for line in format_text(report) {
                writeln!(stdout, "{line}").map_err(io)?;
            }
            if !report.has_errors() {
                let out = config.out_dir.as_deref().expect("render has an output directory");
                write_output(out, &render_all(&compiled))
                    .map_err(|e| CliError::Io(format!("cannot write '{}': {e}", out.display())))?;
            }
        }
        Mode::Stats => {
            if !report.diagnostics().is_empty() {
                for line in format_text(report) {
                    writeln!(stderr, "{line}").map_err(io)?;
                }
            }
            let stats = compiled.stats(&settings);
            let text = match config.format {
                Format::Json => emit_stats_json(&stats),
                Format::Text => emit_stats_text(&stats),
            };
            stdout.write_all(text.as_bytes()).map_err(io)?;
        }
    }
    Ok(exit_code(report, config.strict))
}

/// Runs the tool on `argv` (including the program name) and returns the
/// process exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{}", e.render());
                    0
                }
                _ => {
                    let _ = write!(stderr, "{}", e.render());
                    EXIT_USAGE
                }
            };
        }
    };
    let result = load_config(cli).and_then(|config| execute(&config, stdout, stderr));
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "rasaeco: {e}");
            e.exit_code()
        }
    }
}
