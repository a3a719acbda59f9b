//! Command-line driver: `extract`, `learn`, `infer` and `show`.
//!
//! Exit codes: 0 success, 1 usage error, 2 input error, 3 inference
//! stopped at the round limit (partial results are still written).

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::dataset::{extract_dataset, AttributeName};
use crate::fuzzy::{learn_fuzzy_rules, FuzzyConfig};
use crate::induction::{LearnError, LearnerConfig};
use crate::inference::{self, InferenceStatus, DEFAULT_MAX_ROUNDS};
use crate::kb::{KnowledgeBase, Provenance};
use crate::ontology::{parse_ontology, OntologyFormat, OntologyGraph};

pub const ALGORITHM_ID: &str = "cover-beam-v1";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_ROUND_LIMIT: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "ontorules",
    version,
    about = "Induce fuzzy IF-THEN rules from ontologies and reason with them"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write the class/property/incoming/outgoing dataset of an ontology as CSV
    Extract {
        ontology: PathBuf,
        /// Output CSV (stdout when omitted)
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Input syntax; guessed from the extension when omitted
        #[arg(long)]
        format: Option<OntologyFormat>,
    },
    /// Learn rules from one or more ontologies into a knowledge base file
    ///
    /// Each ontology is processed on its own and the resulting rules are
    /// merged into one knowledge base; the ontologies themselves are never
    /// merged. An existing output file is loaded and extended.
    Learn {
        #[arg(required = true)]
        ontologies: Vec<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
        /// Attribute to predict; all four in turn when omitted
        #[arg(long)]
        target: Option<AttributeName>,
        /// Drop rules with min(a, b) below this degree
        #[arg(long, default_value_t = 0.0)]
        alpha: f64,
        #[arg(long, default_value_t = LearnerConfig::DEFAULT_MIN_COVERAGE)]
        min_coverage: usize,
        #[arg(long, default_value_t = LearnerConfig::DEFAULT_MIN_LAPLACE)]
        min_laplace: f64,
        #[arg(long, default_value_t = LearnerConfig::DEFAULT_BEAM_WIDTH)]
        beam_width: usize,
        #[arg(long, default_value_t = LearnerConfig::DEFAULT_MAX_ANTECEDENT_LEN)]
        max_antecedent: usize,
        /// Provenance timestamp (defaults to the current UTC time)
        #[arg(long)]
        created_at: Option<String>,
        #[arg(long)]
        format: Option<OntologyFormat>,
    },
    /// Derive facts from a knowledge base and a facts file
    Infer {
        kb: PathBuf,
        /// One `attribute=value [mu]` per line
        #[arg(long)]
        facts: PathBuf,
        /// Output fact base (stdout when omitted)
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Write the derivations as JSON lines
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Only report these statements (`attribute=value`, repeatable)
        #[arg(long)]
        query: Vec<String>,
        #[arg(long, default_value_t = DEFAULT_MAX_ROUNDS)]
        max_rounds: usize,
    },
    /// Print the rules of a knowledge base
    Show { kb: PathBuf },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Input(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Input(_) => EXIT_INPUT,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Input(m) => m,
        }
    }
}

/// Runs the CLI with process stdout/stderr.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// Runs the CLI writing normal output to `out` and diagnostics to `err`.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
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
                    let _ = write!(out, "{}", e.render());
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    EXIT_USAGE
                }
            };
        }
    };
    let result = match cli.command {
        Command::Extract {
            ontology,
            output,
            format,
        } => extract(&ontology, output.as_deref(), format, out),
        Command::Learn {
            ontologies,
            output,
            target,
            alpha,
            min_coverage,
            min_laplace,
            beam_width,
            max_antecedent,
            created_at,
            format,
        } => {
            let configs = learner_configs(
                target,
                min_coverage,
                min_laplace,
                beam_width,
                max_antecedent,
            );
            let fuzzy =
                FuzzyConfig::new(alpha).map_err(|e| Failure::Usage(format!("--alpha: {e}")));
            match (configs, fuzzy) {
                (Ok(configs), Ok(fuzzy)) => {
                    let created_at = created_at.unwrap_or_else(|| {
                        chrono::Utc::now().format("%Y-%m-%dT%H:%M:%SZ").to_string()
                    });
                    learn(
                        &ontologies,
                        &output,
                        &configs,
                        &fuzzy,
                        &created_at,
                        format,
                        out,
                        err,
                    )
                }
                (Err(e), _) | (_, Err(e)) => Err(e),
            }
        }
        Command::Infer {
            kb,
            facts,
            output,
            trace,
            query,
            max_rounds,
        } => infer(
            &kb,
            &facts,
            output.as_deref(),
            trace.as_deref(),
            &query,
            max_rounds,
            out,
            err,
        ),
        Command::Show { kb } => show(&kb, out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message());
            f.code()
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

/// Writes through a temporary file in the destination directory.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    let fail = |e: std::io::Error| Failure::Input(format!("{}: {e}", path.display()));
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(fail)?;
    tmp.write_all(bytes).map_err(fail)?;
    tmp.persist(path).map_err(|e| fail(e.error))?;
    Ok(())
}

fn emit(path: Option<&Path>, text: &str, out: &mut dyn Write) -> Result<(), Failure> {
    match path {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Input(format!("stdout: {e}"))),
    }
}

fn load_ontology(path: &Path, format: Option<OntologyFormat>) -> Result<OntologyGraph, Failure> {
    let text = read(path)?;
    let format = format.unwrap_or_else(|| OntologyFormat::from_path(path));
    let id = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    parse_ontology(&text, format, &id)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_kb(path: &Path) -> Result<KnowledgeBase, Failure> {
    KnowledgeBase::load(&read(path)?)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn extract(
    path: &Path,
    output: Option<&Path>,
    format: Option<OntologyFormat>,
    out: &mut dyn Write,
) -> Result<i32, Failure> {
    let graph = load_ontology(path, format)?;
    emit(output, &extract_dataset(&graph).to_csv_string(), out)?;
    Ok(EXIT_OK)
}

fn learner_configs(
    target: Option<AttributeName>,
    min_coverage: usize,
    min_laplace: f64,
    beam_width: usize,
    max_antecedent: usize,
) -> Result<Vec<LearnerConfig>, Failure> {
    let usage = |e: crate::induction::ConfigError| Failure::Usage(e.to_string());
    let base = LearnerConfig::new(AttributeName::Class)
        .with_min_coverage(min_coverage)
        .and_then(|c| c.with_min_laplace(min_laplace))
        .and_then(|c| c.with_beam_width(beam_width))
        .and_then(|c| c.with_max_antecedent_len(max_antecedent))
        .map_err(usage)?;
    let targets: Vec<AttributeName> = match target {
        Some(t) => vec![t],
        None => AttributeName::ALL.to_vec(),
    };
    Ok(targets
        .into_iter()
        .map(|t| base.clone().with_target(t))
        .collect())
}

#[allow(clippy::too_many_arguments)]
fn learn(
    ontologies: &[PathBuf],
    output: &Path,
    configs: &[LearnerConfig],
    fuzzy: &FuzzyConfig,
    created_at: &str,
    format: Option<OntologyFormat>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, Failure> {
    let mut kb = if output.exists() {
        load_kb(output)?
    } else {
        KnowledgeBase::new()
    };
    for path in ontologies {
        let graph = load_ontology(path, format)?;
        let dataset = extract_dataset(&graph);
        for config in configs {
            let rules = match learn_fuzzy_rules(&dataset, config, fuzzy) {
                Ok(rules) => rules,
                Err(LearnError::EmptyDataset) => {
                    let _ = writeln!(err, "warning: {}: no data to learn from", path.display());
                    break;
                }
            };
            let provenance =
                Provenance::new(graph.source_id(), ALGORITHM_ID, config.target(), created_at)
                    .map_err(|e| Failure::Usage(e.to_string()))?;
            let learned = rules.len();
            let report = kb.add_rules(rules, &provenance);
            let _ = writeln!(
                out,
                "{}: target {}: {} rules ({} added, {} merged)",
                graph.source_id(),
                config.target(),
                learned,
                report.added,
                report.merged
            );
        }
    }
    write_atomic(output, kb.save().as_bytes())?;
    Ok(EXIT_OK)
}

#[allow(clippy::too_many_arguments)]
fn infer(
    kb_path: &Path,
    facts_path: &Path,
    output: Option<&Path>,
    trace: Option<&Path>,
    query: &[String],
    max_rounds: usize,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, Failure> {
    if max_rounds == 0 {
        return Err(Failure::Usage("--max-rounds must be positive".into()));
    }
    let query = query
        .iter()
        .map(|q| inference::parse_statement(q).map_err(|e| Failure::Usage(format!("--query: {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    let kb = load_kb(kb_path)?;
    let facts = inference::parse_facts(&read(facts_path)?)
        .map_err(|e| Failure::Input(format!("{}: {e}", facts_path.display())))?;
    let result = inference::infer(&kb, &facts, max_rounds);
    emit(output, &result.facts.to_text(&query), out)?;
    if let Some(trace) = trace {
        write_atomic(
            trace,
            inference::trace_lines(&result.derivations).as_bytes(),
        )?;
    }
    Ok(match result.status {
        InferenceStatus::Fixpoint => EXIT_OK,
        InferenceStatus::RoundLimitExceeded => {
            let _ = writeln!(
                err,
                "warning: no fixpoint after {max_rounds} rounds; results are partial"
            );
            EXIT_ROUND_LIMIT
        }
    })
}

fn show(kb_path: &Path, out: &mut dyn Write) -> Result<i32, Failure> {
    let kb = load_kb(kb_path)?;
    emit(None, &kb.to_string(), out)?;
    Ok(EXIT_OK)
}
