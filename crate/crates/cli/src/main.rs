use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use sroiqc::batch::map_items;
use sroiqc::constraint::ConstraintSystemDef;
use sroiqc::emit::{extension_json, model_dot, model_json, stats_json};
use sroiqc::kb_model::{Document, Query};
use sroiqc::kb_text::{parse_concept, parse_document, query_to_string, ParsedDocument};
use sroiqc::preprocess::{preprocess, print_reduced};
use sroiqc::query::{answer_traced, Answer, QueryResult};
use sroiqc::tableau::ResourceLimits;

mod corpus;

const EXIT_YES: u8 = 0;
const EXIT_NO: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_LIMIT: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "reason", version, about = "Reasoner for SROIQ(C) knowledge bases with grounded circumscription")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Most live abstract nodes per tableau run.
    #[arg(long, global = true, default_value_t = 50_000, value_parser = clap::value_parser!(u64).range(1..))]
    max_nodes: u64,
    /// Wall-clock budget per tableau run, in seconds.
    #[arg(long, global = true, default_value_t = 60, value_parser = clap::value_parser!(u64).range(1..))]
    timeout_s: u64,
    /// Print one JSON document instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Also print the witness model.
    #[arg(long, global = true, value_enum)]
    emit_model: Option<ModelFormat>,
    /// Print the rule applications of each tableau run.
    #[arg(long, global = true)]
    trace: bool,
    /// Constraint system: allen, rcc8, point, or a TSV table file.
    #[arg(long, global = true)]
    system: Option<String>,
    /// Report zero elapsed time so that output is byte-identical across runs.
    #[arg(long, global = true)]
    stable_output: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModelFormat {
    Dot,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Knowledge-base satisfiability.
    Sat { file: PathBuf },
    /// Concept satisfiability; without --concept, the file's concept-sat queries.
    ConceptSat {
        file: PathBuf,
        #[arg(long)]
        concept: Option<String>,
    },
    /// Concept subsumption; without flags, the file's subsumes queries.
    Subsumes {
        file: PathBuf,
        #[arg(long)]
        sub: Option<String>,
        #[arg(long = "super")]
        sup: Option<String>,
    },
    /// Instance checking; without flags, the file's instance queries.
    Instance {
        file: PathBuf,
        #[arg(long)]
        individual: Option<String>,
        #[arg(long)]
        concept: Option<String>,
    },
    /// Existence of a model under grounded circumscription.
    GcSat { file: PathBuf },
    /// Instance checking under grounded circumscription.
    GcInstance {
        file: PathBuf,
        #[arg(long)]
        individual: Option<String>,
        #[arg(long)]
        concept: Option<String>,
    },
    /// Subsumption under grounded circumscription.
    GcSubsumes {
        file: PathBuf,
        #[arg(long)]
        sub: Option<String>,
        #[arg(long = "super")]
        sup: Option<String>,
    },
    /// Concept satisfiability under grounded circumscription.
    GcConceptSat {
        file: PathBuf,
        #[arg(long)]
        concept: Option<String>,
    },
    /// Runs every `.kbx` file of a directory against its `; expect:` header.
    Corpus { dir: PathBuf },
    /// Prints the knowledge base after preprocessing.
    DumpReduced { file: PathBuf },
}

/// An input problem, reported on stderr with exit code 2.
#[derive(Debug)]
struct InputError(String);

impl Cli {
    fn limits(&self) -> ResourceLimits {
        ResourceLimits { max_nodes: self.max_nodes as usize, timeout: Duration::from_secs(self.timeout_s) }
    }
}

fn load(path: &Path) -> Result<ParsedDocument, InputError> {
    let text = std::fs::read_to_string(path).map_err(|e| InputError(format!("{}: {e}", path.display())))?;
    let parsed = parse_document(&text).map_err(|e| {
        let lines: Vec<String> = e.diagnostics().iter().map(|d| format!("{}:{d}", path.display())).collect();
        InputError(lines.join("\n"))
    })?;
    for w in &parsed.warnings {
        eprintln!("{}:{w}", path.display());
    }
    Ok(parsed)
}

/// `--system` wins over the document's `(constraint-system ...)`; Allen is the default.
fn resolve_system(flag: Option<&str>, doc: &Document) -> Result<ConstraintSystemDef, InputError> {
    let name = flag.or(doc.kb.constraint_system.as_deref()).unwrap_or("allen");
    if name.ends_with(".tsv") {
        let text = std::fs::read_to_string(name).map_err(|e| InputError(format!("{name}: {e}")))?;
        let stem = Path::new(name).file_stem().and_then(|s| s.to_str()).unwrap_or("custom");
        return ConstraintSystemDef::from_tsv(stem, &text).map_err(|e| InputError(format!("{name}: {e}")));
    }
    ConstraintSystemDef::by_name(name).map_err(|e| InputError(e.to_string()))
}

fn concept_arg(text: &str) -> Result<sroiqc::kb_model::Concept, InputError> {
    parse_concept(text).map_err(|e| InputError(format!("in `{text}`: {e}")))
}

fn both<T>(a: Option<T>, b: Option<T>, what: &str) -> Result<Option<(T, T)>, InputError> {
    match (a, b) {
        (Some(a), Some(b)) => Ok(Some((a, b))),
        (None, None) => Ok(None),
        _ => Err(InputError(format!("{what} must be given together"))),
    }
}

/// The queries a subcommand asks: from its flags, else the matching queries of the file.
fn queries_for(cmd: &Command, doc: &Document) -> Result<Vec<Query>, InputError> {
    let from_file = |kind: &str| -> Result<Vec<Query>, InputError> {
        let qs: Vec<Query> = doc.queries.iter().filter(|q| q.kind() == kind).cloned().collect();
        if qs.is_empty() {
            return Err(InputError(format!("no {kind} query given on the command line or in the file")));
        }
        Ok(qs)
    };
    let unary = |concept: &Option<String>, make: fn(sroiqc::kb_model::Concept) -> Query, kind| match concept {
        Some(c) => Ok(vec![make(concept_arg(c)?)]),
        None => from_file(kind),
    };
    let binary = |sub: &Option<String>, sup: &Option<String>, make: fn(_, _) -> Query, kind| {
        match both(sub.as_ref(), sup.as_ref(), "--sub and --super")? {
            Some((c, d)) => Ok(vec![make(concept_arg(c)?, concept_arg(d)?)]),
            None => from_file(kind),
        }
    };
    let instance = |ind: &Option<String>, concept: &Option<String>, make: fn(String, _) -> Query, kind| {
        match both(ind.as_ref(), concept.as_ref(), "--individual and --concept")? {
            Some((a, c)) => Ok(vec![make(a.clone(), concept_arg(c)?)]),
            None => from_file(kind),
        }
    };
    match cmd {
        Command::Sat { .. } => Ok(vec![Query::KbSat]),
        Command::GcSat { .. } => Ok(vec![Query::GcSat]),
        Command::ConceptSat { concept, .. } => unary(concept, Query::ConceptSat, "concept-sat"),
        Command::GcConceptSat { concept, .. } => unary(concept, Query::GcConceptSat, "gc-concept-sat"),
        Command::Subsumes { sub, sup, .. } => binary(sub, sup, Query::Subsumes, "subsumes"),
        Command::GcSubsumes { sub, sup, .. } => binary(sub, sup, Query::GcSubsumes, "gc-subsumes"),
        Command::Instance { individual, concept, .. } => instance(individual, concept, Query::Instance, "instance"),
        Command::GcInstance { individual, concept, .. } => {
            instance(individual, concept, Query::GcInstance, "gc-instance")
        }
        Command::Corpus { .. } | Command::DumpReduced { .. } => Ok(Vec::new()),
    }
}

fn verdict_word(q: &Query, a: &Answer) -> String {
    let sat_like = matches!(q, Query::KbSat | Query::ConceptSat(_) | Query::GcSat | Query::GcConceptSat(_));
    match (a, sat_like) {
        (Answer::Yes, true) => "satisfiable".into(),
        (Answer::No, true) => "unsatisfiable".into(),
        (Answer::Yes, false) => "entailed".into(),
        (Answer::No, false) => "not entailed".into(),
        (Answer::ResourceLimitExceeded(_), _) => "resource limit exceeded".into(),
    }
}

fn exit_code(a: &Answer) -> u8 {
    match a {
        Answer::Yes => EXIT_YES,
        Answer::No => EXIT_NO,
        Answer::ResourceLimitExceeded(_) => EXIT_LIMIT,
    }
}

fn result_json(cli: &Cli, q: &Query, r: &QueryResult) -> Value {
    let mut stats = r.stats;
    if cli.stable_output {
        stats.millis = 0;
    }
    let mut v = json!({
        "query": query_to_string(q),
        "verdict": verdict_word(q, &r.answer),
        "statistics": stats_json(&stats),
    });
    if let Answer::ResourceLimitExceeded(why) = &r.answer {
        v["reason"] = json!(why);
    }
    if let (Some(fmt), Some(m)) = (cli.emit_model, &r.model) {
        v["model"] = match fmt {
            ModelFormat::Json => model_json(m),
            ModelFormat::Dot => json!(model_dot(m)),
        };
    }
    if let Some(e) = &r.extension {
        v["extensions"] = extension_json(e);
    }
    if let Some(i) = r.iterations {
        v["iterations"] = json!(i);
    }
    if cli.trace {
        v["trace"] = json!(r.trace);
    }
    v
}

fn print_text(cli: &Cli, q: &Query, r: &QueryResult) {
    if cli.trace {
        for line in &r.trace {
            println!("trace {line}");
        }
    }
    let mut line = format!("{}: {}", query_to_string(q), verdict_word(q, &r.answer));
    if let Answer::ResourceLimitExceeded(why) = &r.answer {
        line.push_str(&format!(" ({why})"));
    }
    println!("{line}");
    let millis = if cli.stable_output { 0 } else { r.stats.millis };
    println!(
        "  nodes={} rule_applications={} branches={} millis={millis}",
        r.stats.nodes, r.stats.rule_applications, r.stats.branches
    );
    if let (Some(e), Some(i)) = (&r.extension, r.iterations) {
        println!("  extensions={} iterations={i}", extension_json(e));
    }
    if let (Some(fmt), Some(m)) = (cli.emit_model, &r.model) {
        match fmt {
            ModelFormat::Dot => print!("{}", model_dot(m)),
            ModelFormat::Json => println!("{}", serde_json::to_string_pretty(&model_json(m)).unwrap_or_default()),
        }
    }
}

fn file_of(cmd: &Command) -> &Path {
    match cmd {
        Command::Sat { file }
        | Command::ConceptSat { file, .. }
        | Command::Subsumes { file, .. }
        | Command::Instance { file, .. }
        | Command::GcSat { file }
        | Command::GcInstance { file, .. }
        | Command::GcSubsumes { file, .. }
        | Command::GcConceptSat { file, .. }
        | Command::DumpReduced { file } => file,
        Command::Corpus { dir } => dir,
    }
}

fn run(cli: &Cli) -> Result<u8, InputError> {
    if let Command::Corpus { dir } = &cli.command {
        return corpus::run_corpus(dir, cli.system.as_deref(), cli.limits()).map_err(InputError);
    }
    let parsed = load(file_of(&cli.command))?;
    let doc = parsed.document;
    let sys = resolve_system(cli.system.as_deref(), &doc)?;
    if let Command::DumpReduced { .. } = &cli.command {
        let rkb = preprocess(&doc.kb, &sys).map_err(|e| InputError(e.to_string()))?;
        print!("{}", print_reduced(&rkb));
        return Ok(EXIT_YES);
    }
    let queries = queries_for(&cli.command, &doc)?;
    let limits = cli.limits();
    let results = map_items(&queries, |q| answer_traced(&doc.kb, q, &sys, limits, cli.trace));
    let mut code = EXIT_YES;
    let mut values = Vec::new();
    for (q, r) in queries.iter().zip(results) {
        let r = r.map_err(|e| InputError(e.to_string()))?;
        code = code.max(exit_code(&r.answer));
        if cli.json {
            values.push(result_json(cli, q, &r));
        } else {
            print_text(cli, q, &r);
        }
    }
    if cli.json {
        let out = if values.len() == 1 { values.remove(0) } else { Value::Array(values) };
        println!("{}", serde_json::to_string_pretty(&out).unwrap_or_default());
    }
    Ok(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(InputError(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
