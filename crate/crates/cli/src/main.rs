//! `gostcite` command-line front end.
//!
//! Exit codes: 0 success, 1 fatal error, 2 usage error, 3 at least one
//! document failed a pipeline stage (its error sidecar was written).

use std::fs;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use gostcite::features::{featurize, render_feature_tsv};
use gostcite::labeler::{evaluate, token_accuracy, train, FieldReport, TrainingExample};
use gostcite::lexicons::{mine_candidate_names, NameLexicon};
use gostcite::linker::{link_reference, promote, Link, LinkKind, LinkRecord};
use gostcite::normalize::{find_cyrillic_span, is_cyrillic, tokenize};
use gostcite::pipeline::{discover_inputs, document_id_for, Outcome};
use gostcite::ref_parser::{parse_line, Fields, ParsedReference};
use gostcite::training_data::{load_annotations, render_columns, LabeledSequence};
use gostcite::{Collection, Config, DocumentId, FeatureContext, Lexicons, Model, Pipeline, Registry, TrainConfig};

const EXIT_FATAL: u8 = 1;
const EXIT_STAGE_FAILURE: u8 = 3;

#[derive(Parser)]
#[command(name = "gostcite", version, about = "Extract, parse and link references from Russian scientific papers")]
struct Cli {
    /// TOML config file (lexicons, years, headings, context width, linking)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// More log output (repeat for more)
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a labeling model from annotation files
    Train(TrainArgs),
    /// Label reference lines, one token per output line
    Tag(TagArgs),
    /// Parse reference lines into author, title and year (JSON lines)
    ParseRefs(ModelInput),
    /// Process one document, or every document under a directory
    Process(ProcessArgs),
    /// Process a directory tree of documents in parallel
    Batch(ProcessArgs),
    /// Link parsed references (JSON lines from parse-refs) to a collection
    Link(LinkArgs),
    /// Replace a temporary handle by a real one in stored citation files
    Promote(PromoteArgs),
    /// Mine surname candidates from reference lines
    MineNames(MineArgs),
    /// Per-field confidence table (count, mean, var, min, max)
    Report(ReportArgs),
    /// Line counts by script
    Stats(InputArg),
    /// Dump token and row features as TSV
    Features(InputArg),
}

#[derive(Args)]
struct TrainArgs {
    /// Annotation files, one <r> fragment per line
    #[arg(long = "annotations", required = true, num_args = 1..)]
    annotations: Vec<PathBuf>,
    /// Where to write the model
    #[arg(short, long)]
    output: PathBuf,
    #[arg(long, default_value_t = TrainConfig::default().epochs)]
    epochs: usize,
    #[arg(long, default_value_t = TrainConfig::default().seed)]
    seed: u64,
}

#[derive(Args)]
struct InputArg {
    /// Input file with one reference per line; `-` or nothing for stdin
    input: Option<PathBuf>,
}

#[derive(Args)]
struct ModelInput {
    #[arg(short, long)]
    model: PathBuf,
    #[command(flatten)]
    input: InputArg,
}

#[derive(Args)]
struct TagArgs {
    #[command(flatten)]
    common: ModelInput,
    /// Add a third column with the label confidence
    #[arg(long)]
    confidence: bool,
}

#[derive(Args)]
struct ProcessArgs {
    #[arg(short, long)]
    model: PathBuf,
    /// Metadata collection (JSON lines: handle, authors, title, year)
    #[arg(long)]
    collection: Option<PathBuf>,
    /// Unlinked-reference registry file [default: <out>/unlinked.jsonl]
    #[arg(long)]
    registry: Option<PathBuf>,
    /// Output root
    #[arg(short, long)]
    out: PathBuf,
    /// Worker threads; 0 means one per logical CPU [default: 1 for process, 0 for batch]
    #[arg(short, long)]
    jobs: Option<usize>,
    /// Collection name for a single input file [default: its parent directory name]
    #[arg(long)]
    collection_name: Option<String>,
    /// A page/item JSON document or a directory of them
    input: PathBuf,
}

#[derive(Args)]
struct LinkArgs {
    #[arg(long)]
    collection: PathBuf,
    /// Register unlinked references in this registry file
    #[arg(long)]
    registry: Option<PathBuf>,
    /// Citing document id written into the records
    #[arg(long, default_value = "")]
    citing: String,
    #[command(flatten)]
    input: InputArg,
}

#[derive(Args)]
struct PromoteArgs {
    /// Temporary handle, e.g. spz:cyrkitec:references:3
    temp: String,
    /// Handle of the collection record that the reference turned out to be
    real: String,
    #[arg(long)]
    registry: PathBuf,
    #[arg(long)]
    collection: PathBuf,
    /// Output root holding the *-refs.xml files
    #[arg(long)]
    store: PathBuf,
}

#[derive(Args)]
struct MineArgs {
    /// Surname list to start from (TSV); the bundled seed list if omitted
    #[arg(long)]
    seed: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    min_count: usize,
    /// Output TSV; stdout if omitted
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    input: InputArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    /// Plain reference lines
    Lines,
    /// Annotation fragments (tags are stripped before tagging)
    Annotations,
}

#[derive(Args)]
struct ReportArgs {
    #[command(flatten)]
    common: ModelInput,
    #[arg(long, value_enum, default_value_t = ReportFormat::Lines)]
    format: ReportFormat,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_FATAL)
        }
    }
}

struct Env {
    config: Config,
    lexicons: Lexicons,
}

impl Env {
    fn load(path: Option<&Path>) -> Result<Env> {
        let config = match path {
            Some(p) => Config::load(p).with_context(|| format!("loading {}", p.display()))?,
            None => Config::default(),
        };
        let lexicons = config.load_lexicons()?;
        Ok(Env { config, lexicons })
    }

    fn ctx(&self) -> FeatureContext<'_> {
        FeatureContext::new(&self.lexicons, self.config.year_range())
    }

    fn collection(&self, path: Option<&Path>) -> Result<Collection> {
        match path {
            Some(p) => Collection::load(p, &self.lexicons.homoglyphs).with_context(|| format!("loading collection {}", p.display())),
            None => Ok(Collection::default()),
        }
    }
}

fn read_input(input: &InputArg) -> Result<String> {
    match input.input.as_deref() {
        None => read_stdin(),
        Some(p) if p == Path::new("-") => read_stdin(),
        Some(p) => fs::read_to_string(p).with_context(|| format!("reading {}", p.display())),
    }
}

fn read_stdin() -> Result<String> {
    let mut s = String::new();
    io::stdin().read_to_string(&mut s).context("reading stdin")?;
    Ok(s)
}

fn input_lines(text: &str) -> impl Iterator<Item = &str> {
    text.lines().filter(|l| !l.trim().is_empty())
}

fn load_model(path: &Path) -> Result<Model> {
    Model::load(path).with_context(|| format!("loading model {}", path.display()))
}

fn stdout() -> BufWriter<io::StdoutLock<'static>> {
    BufWriter::new(io::stdout().lock())
}

fn run(cli: Cli) -> Result<u8> {
    let env = Env::load(cli.config.as_deref())?;
    match cli.command {
        Command::Train(a) => cmd_train(&env, a),
        Command::Tag(a) => cmd_tag(&env, a),
        Command::ParseRefs(a) => cmd_parse_refs(&env, a),
        Command::Process(a) => cmd_process(&env, a, false),
        Command::Batch(a) => cmd_process(&env, a, true),
        Command::Link(a) => cmd_link(&env, a),
        Command::Promote(a) => cmd_promote(&env, a),
        Command::MineNames(a) => cmd_mine(&env, a),
        Command::Report(a) => cmd_report(&env, a),
        Command::Stats(a) => cmd_stats(&env, a),
        Command::Features(a) => cmd_features(&env, a),
    }
}

fn cmd_train(env: &Env, a: TrainArgs) -> Result<u8> {
    let ctx = env.ctx();
    let mut examples = Vec::new();
    for p in &a.annotations {
        let seqs = load_annotations(p).with_context(|| format!("reading {}", p.display()))?;
        examples.extend(seqs.into_iter().map(|s| TrainingExample::featurize(s, &ctx)));
    }
    let started = Instant::now();
    let model = train(&examples, TrainConfig { epochs: a.epochs, seed: a.seed })?;
    model.save(&a.output).with_context(|| format!("writing {}", a.output.display()))?;
    eprintln!(
        "trained on {} references in {:.2}s: {} features, training token accuracy {:.4}",
        examples.len(),
        started.elapsed().as_secs_f64(),
        model.feature_count(),
        token_accuracy(&model, &examples)
    );
    Ok(0)
}

fn cmd_tag(env: &Env, a: TagArgs) -> Result<u8> {
    let model = load_model(&a.common.model)?;
    let text = read_input(&a.common.input)?;
    let ctx = env.ctx();
    let mut out = stdout();
    let mut first = true;
    for line in input_lines(&text) {
        let tokens: Vec<String> = tokenize(line).into_iter().map(|t| t.text).collect();
        let tagged = model.predict(&tokens, &featurize(&tokens, &ctx));
        if !first {
            writeln!(out)?;
        }
        first = false;
        if a.confidence {
            for ((t, l), c) in tagged.sequence.pairs().zip(&tagged.confidence) {
                writeln!(out, "{t}\t{l}\t{c:.4}")?;
            }
        } else {
            writeln!(out, "{}", render_columns(&tagged.sequence))?;
        }
    }
    out.flush()?;
    Ok(0)
}

fn parse_numbered(line: &str, num: usize, model: &Model, ctx: &FeatureContext<'_>) -> ParsedReference {
    let Fields { author, title, year, unparsed_tail } = parse_line(line, model, ctx).fields;
    ParsedReference { num, raw: line.to_string(), span: 0..line.chars().count(), author, title, year, unparsed_tail }
}

fn cmd_parse_refs(env: &Env, a: ModelInput) -> Result<u8> {
    let model = load_model(&a.model)?;
    let text = read_input(&a.input)?;
    let ctx = env.ctx();
    let mut out = stdout();
    for (i, line) in input_lines(&text).enumerate() {
        serde_json::to_writer(&mut out, &parse_numbered(line, i + 1, &model, &ctx))?;
        writeln!(out)?;
    }
    out.flush()?;
    Ok(0)
}

fn cmd_process(env: &Env, a: ProcessArgs, batch: bool) -> Result<u8> {
    let model = load_model(&a.model)?;
    let collection = env.collection(a.collection.as_deref())?;
    let registry_path = a.registry.clone().unwrap_or_else(|| a.out.join("unlinked.jsonl"));

    let inputs: Vec<(PathBuf, DocumentId)> = if a.input.is_dir() {
        discover_inputs(&a.input).with_context(|| format!("listing {}", a.input.display()))?
    } else if batch {
        bail!("batch expects a directory, got {}", a.input.display());
    } else if a.input.is_file() {
        let parent = a.input.parent().unwrap_or(Path::new("."));
        let mut id = document_id_for(parent, &a.input);
        if let Some(name) = &a.collection_name {
            id.collection = name.clone();
        }
        vec![(a.input.clone(), id)]
    } else {
        bail!("no such input: {}", a.input.display());
    };
    if inputs.is_empty() {
        eprintln!("no documents found under {}", a.input.display());
        return Ok(0);
    }

    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let mut registry = Registry::open(&registry_path).with_context(|| format!("opening registry {}", registry_path.display()))?;
    let pipeline = Pipeline { model: &model, lexicons: &env.lexicons, collection: &collection, config: &env.config };
    let jobs = a.jobs.unwrap_or(if batch { 0 } else { 1 });

    let started = Instant::now();
    let outcomes = pipeline.process_batch(&inputs, &mut registry, &a.out, jobs);
    let mut failed = 0;
    for o in &outcomes {
        match o {
            Outcome::Written { id, references, linked, intext, .. } => {
                log::info!("{id}: {references} references ({linked} linked), {intext} in-text references");
            }
            Outcome::Failed { id, error, sidecar } => {
                failed += 1;
                eprintln!("{id}: {error} (see {})", sidecar.display());
            }
        }
    }
    eprintln!(
        "{} documents, {} processed, {} failed in {:.2}s",
        outcomes.len(),
        outcomes.len() - failed,
        failed,
        started.elapsed().as_secs_f64()
    );
    Ok(if failed > 0 { EXIT_STAGE_FAILURE } else { 0 })
}

fn cmd_link(env: &Env, a: LinkArgs) -> Result<u8> {
    let collection = env.collection(Some(&a.collection))?;
    let mut registry = a.registry.as_deref().map(Registry::open).transpose()?;
    let text = read_input(&a.input)?;
    let table = &env.lexicons.homoglyphs;
    let mut out = stdout();
    for (i, line) in input_lines(&text).enumerate() {
        let r: ParsedReference = serde_json::from_str(line).with_context(|| format!("input line {}", i + 1))?;
        let link = match link_reference(&r, &collection, table, &env.config.link) {
            Some(handle) => Some(Link { handle, kind: LinkKind::Linked }),
            None => match &mut registry {
                Some(reg) if !r.title.trim().is_empty() => Some(reg.register(&r, table)?),
                _ => None,
            },
        };
        serde_json::to_writer(&mut out, &LinkRecord { citing: a.citing.clone(), reference: r, link })?;
        writeln!(out)?;
    }
    out.flush()?;
    Ok(0)
}

fn cmd_promote(env: &Env, a: PromoteArgs) -> Result<u8> {
    let collection = env.collection(Some(&a.collection))?;
    let mut registry = Registry::open(&a.registry)?;
    let n = promote(&a.temp, &a.real, &mut registry, &collection, &a.store)?;
    println!("{n}");
    Ok(0)
}

fn cmd_mine(env: &Env, a: MineArgs) -> Result<u8> {
    let seed = match &a.seed {
        Some(p) => NameLexicon::load(p).with_context(|| format!("reading {}", p.display()))?,
        None => env.lexicons.names.clone(),
    };
    let text = read_input(&a.input)?;
    let mined = mine_candidate_names(input_lines(&text), &seed, &env.lexicons.homoglyphs, a.min_count);
    eprintln!("{} names ({} new)", mined.len(), mined.len() - seed.len());
    match &a.output {
        Some(p) => fs::write(p, mined.to_tsv()).with_context(|| format!("writing {}", p.display()))?,
        None => {
            let mut out = stdout();
            out.write_all(mined.to_tsv().as_bytes())?;
            out.flush()?;
        }
    }
    Ok(0)
}

fn cmd_report(env: &Env, a: ReportArgs) -> Result<u8> {
    let model = load_model(&a.common.model)?;
    let text = read_input(&a.common.input)?;
    let ctx = env.ctx();
    let token_rows: Vec<Vec<String>> = match a.format {
        ReportFormat::Lines => input_lines(&text)
            .map(|l| tokenize(l).into_iter().map(|t| t.text).collect())
            .collect(),
        ReportFormat::Annotations => gostcite::training_data::parse_annotation_lines(&text)?
            .into_iter()
            .map(|s: LabeledSequence| s.tokens().to_vec())
            .collect(),
    };
    let rows: Vec<(Vec<String>, _)> = token_rows
        .into_iter()
        .map(|t| {
            let f = featurize(&t, &ctx);
            (t, f)
        })
        .collect();
    let report: FieldReport = evaluate(&model, &rows);
    print!("{report}");
    Ok(0)
}

fn cmd_stats(env: &Env, a: InputArg) -> Result<u8> {
    let text = read_input(&a)?;
    let (mut total, mut non_cyrillic, mut with_span) = (0usize, 0usize, 0usize);
    for line in input_lines(&text) {
        total += 1;
        if !line.chars().any(is_cyrillic) {
            non_cyrillic += 1;
        }
        if find_cyrillic_span(&tokenize(line), &env.lexicons.homoglyphs).is_some() {
            with_span += 1;
        }
    }
    println!("lines\t{total}");
    println!("non_cyrillic\t{non_cyrillic}");
    println!("cyrillic_span\t{with_span}");
    Ok(0)
}

fn cmd_features(env: &Env, a: InputArg) -> Result<u8> {
    let text = read_input(&a)?;
    let ctx = env.ctx();
    let mut out = stdout();
    let mut first = true;
    for line in input_lines(&text) {
        let tokens: Vec<String> = tokenize(line).into_iter().map(|t| t.text).collect();
        if !first {
            writeln!(out)?;
        }
        first = false;
        out.write_all(render_feature_tsv(&tokens, &featurize(&tokens, &ctx), None).as_bytes())?;
    }
    out.flush()?;
    Ok(0)
}
