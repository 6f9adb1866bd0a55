//! `gtpm`: build word graphs, embed documents and run classification
//! experiments from the command line.

mod settings;

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};
use gtpm::classifier::{self, LabeledData, MlpModel};
use gtpm::corpus::{self, DocumentRecord, Split};
use gtpm::embedding::{self, EmbeddingTable};
use gtpm::experiments::{self, RunRecord};
use gtpm::graph::{self, TailTarget, WordGraph};
use gtpm::metrics;
use gtpm::persistence::{self, check_chain, load_artifact, save_artifact};
use gtpm::synth::{self, SynthConfig};
use gtpm::walker;
use settings::Settings;

#[derive(Parser, Debug)]
#[command(name = "gtpm", version = gtpm::VERSION, about = "Word-graph walk embeddings for text classification")]
struct Cli {
    /// Flat `key = value` settings file; `gtpm keys` lists the keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed (overrides the config file).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for all outputs.
    #[arg(long, global = true, default_value = "gtpm-out")]
    out_dir: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Extra settings, `key=value`; may repeat and wins over --config.
    #[arg(long = "set", short = 's', global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct CorpusArg {
    /// Corpus file (JSONL or TSV).
    corpus: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Normalize a corpus and write it back as JSONL.
    Ingest(CorpusArg),
    /// Build the word graph from the training documents.
    BuildGraph(CorpusArg),
    /// Degree histogram and power-law fit of a graph file.
    Stats { graph: PathBuf },
    /// Sample walks from a graph file.
    Walk { graph: PathBuf },
    /// Embed a corpus with a graph file.
    Embed {
        graph: PathBuf,
        corpus: PathBuf,
        /// Only embed documents of this split.
        #[arg(long)]
        split: Option<Split>,
    },
    /// Train a classifier on embeddings; labels come from the corpus.
    Train { embeddings: PathBuf, corpus: PathBuf },
    /// Score a model on embeddings; labels come from the corpus.
    Eval { model: PathBuf, embeddings: PathBuf, corpus: PathBuf },
    /// Full pipeline with repeats.
    Run(CorpusArg),
    /// Full pipeline over every walk_length x walks_per_node pair.
    Sweep(CorpusArg),
    /// Full pipeline at shrinking training fractions.
    Robustness(CorpusArg),
    /// 2D principal-component projection of an embeddings file.
    Project { embeddings: PathBuf, corpus: PathBuf },
    /// Write a synthetic labeled corpus with Zipfian topics.
    Synth {
        #[arg(long, default_value_t = 2)]
        classes: usize,
        #[arg(long, default_value_t = 500)]
        docs_per_class: usize,
        #[arg(long, default_value_t = 200)]
        topic_words: usize,
        #[arg(long, default_value_t = 100)]
        shared_words: usize,
    },
    /// List configuration keys.
    Keys,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Ingest(_) => "ingest",
            Command::BuildGraph(_) => "build-graph",
            Command::Stats { .. } => "stats",
            Command::Walk { .. } => "walk",
            Command::Embed { .. } => "embed",
            Command::Train { .. } => "train",
            Command::Eval { .. } => "eval",
            Command::Run(_) => "run",
            Command::Sweep(_) => "sweep",
            Command::Robustness(_) => "robustness",
            Command::Project { .. } => "project",
            Command::Synth { .. } => "synth",
            Command::Keys => "keys",
        }
    }
}

/// Error tagged with the pipeline phase it came from.
#[derive(Debug)]
struct PhaseError {
    phase: &'static str,
    source: anyhow::Error,
}

trait Phase<T> {
    fn phase(self, phase: &'static str) -> Result<T, PhaseError>;
}

impl<T, E: Into<anyhow::Error>> Phase<T> for Result<T, E> {
    fn phase(self, phase: &'static str) -> Result<T, PhaseError> {
        self.map_err(|e| PhaseError { phase, source: e.into() })
    }
}

type Out<T> = Result<T, PhaseError>;

struct Ctx {
    settings: Settings,
    out_dir: PathBuf,
}

impl Ctx {
    fn header(&self, command: &str) -> String {
        format!("# gtpm {}\n# command={command} config: {}\n", gtpm::VERSION, self.settings.summary())
    }

    fn write(&self, name: &str, text: &str) -> Result<PathBuf> {
        fs::create_dir_all(&self.out_dir).with_context(|| format!("creating {}", self.out_dir.display()))?;
        let path = self.out_dir.join(name);
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }

    fn write_tsv(&self, command: &str, name: &str, body: &str) -> Result<PathBuf> {
        self.write(name, &format!("{}{body}", self.header(command)))
    }

    fn load_corpus(&self, path: &Path) -> Out<Vec<DocumentRecord>> {
        let format = self.settings.format(path).phase("config")?;
        let mut docs = corpus::load_corpus(path, format).phase("load")?;
        let pipeline = self.settings.pipeline().phase("config")?;
        corpus::normalize_corpus(&mut docs, &pipeline, self.settings.execution().phase("config")?);
        Ok(docs)
    }
}

/// Documents marked as training data, or all of them when nothing is marked.
fn training_docs(docs: &[DocumentRecord]) -> Vec<DocumentRecord> {
    if docs.iter().any(|d| d.split.is_some()) {
        docs.iter().filter(|d| d.split == Some(Split::Train)).cloned().collect()
    } else {
        docs.to_vec()
    }
}

fn average_tokens(docs: &[DocumentRecord]) -> f64 {
    docs.iter().map(DocumentRecord::token_count).sum::<usize>() as f64 / docs.len().max(1) as f64
}

/// Labels for every table row, looked up by document id.
fn labels_for(table: &EmbeddingTable, docs: &[DocumentRecord]) -> Result<Vec<String>> {
    let by_id: HashMap<&str, &str> = docs.iter().map(|d| (d.id.as_str(), d.label.as_str())).collect();
    table
        .ids
        .iter()
        .map(|id| {
            by_id
                .get(id.as_str())
                .map(|l| l.to_string())
                .ok_or_else(|| anyhow!("document {id:?} is in the embeddings but not in the corpus"))
        })
        .collect()
}

fn ingest(ctx: &Ctx, corpus_path: &Path) -> Out<()> {
    let docs = ctx.load_corpus(corpus_path)?;
    let normalized: Vec<DocumentRecord> = docs
        .iter()
        .map(|d| {
            let text = d.sentences.iter().map(|s| s.join(" ")).collect::<Vec<_>>().join(". ");
            DocumentRecord { raw_text: text, ..d.clone() }
        })
        .collect();
    let path = ctx.write("normalized.jsonl", &synth::to_jsonl(&normalized)).phase("persist")?;
    let tokens: usize = docs.iter().map(DocumentRecord::token_count).sum();
    let empty = docs.iter().filter(|d| d.is_empty()).count();
    let mut labels: Vec<&str> = docs.iter().map(|d| d.label.as_str()).collect();
    labels.sort_unstable();
    labels.dedup();
    let body = format!(
        "documents\ttokens\tempty_documents\tclasses\n{}\t{tokens}\t{empty}\t{}\n",
        docs.len(),
        labels.len()
    );
    ctx.write_tsv("ingest", "ingest.tsv", &body).phase("persist")?;
    println!("{} documents, {tokens} tokens, {empty} empty -> {}", docs.len(), path.display());
    Ok(())
}

fn build_graph(ctx: &Ctx, corpus_path: &Path) -> Out<()> {
    let docs = training_docs(&ctx.load_corpus(corpus_path)?);
    let pipeline = ctx.settings.pipeline().phase("config")?;
    let vocab = corpus::build_vocabulary(&docs, &pipeline).phase("vocabulary")?;
    let g = graph::build_graph(&docs, &vocab);
    let config = persistence::config_digest(&pipeline.canonical());
    let path = ctx.out_dir.join("graph.tsv");
    let digest = save_artifact(&g, config, &path).phase("persist")?;
    let s = g.stats();
    println!(
        "graph from {} documents: {} nodes, {} edges, {} oov tokens -> {} ({digest:016x})",
        docs.len(),
        g.node_count(),
        g.edge_count(),
        s.oov_tokens,
        path.display()
    );
    Ok(())
}

fn stats(ctx: &Ctx, graph_path: &Path) -> Out<()> {
    let (g, _) = load_artifact::<WordGraph>(graph_path).phase("load")?;
    let hist = graph::degree_histogram(&g);
    let floor = ctx.settings.floor().phase("config")?;
    let mut body = String::from("degree\tnodes\n");
    for (d, c) in &hist {
        let _ = writeln!(body, "{d}\t{c}");
    }
    ctx.write_tsv("stats", "degree_histogram.tsv", &body).phase("persist")?;
    let mut fits = String::from("target\tfloor\tslope\tintercept\tr_squared\tpoints\n");
    println!("nodes {}  edges {}  total weight {}", g.node_count(), g.edge_count(), g.total_weight());
    for (name, target) in [("ccdf", TailTarget::Ccdf), ("pmf", TailTarget::Pmf)] {
        match graph::power_law_fit(&hist, floor, target) {
            Some(f) => {
                let _ = writeln!(fits, "{name}\t{floor}\t{}\t{}\t{}\t{}", f.slope, f.intercept, f.r_squared, f.points);
                println!("{name} fit (degree >= {floor}): slope {:.4}  R^2 {:.4}  over {} degrees", f.slope, f.r_squared, f.points);
            }
            None => println!("{name} fit: fewer than two distinct degrees >= {floor}"),
        }
    }
    ctx.write_tsv("stats", "power_law_fit.tsv", &fits).phase("persist")?;
    Ok(())
}

fn walk(ctx: &Ctx, graph_path: &Path) -> Out<()> {
    let (g, _) = load_artifact::<WordGraph>(graph_path).phase("load")?;
    let avg = g.total_weight() as f64 / g.node_count().max(1) as f64;
    let cfg = ctx.settings.walk_config(avg).phase("config")?;
    if ctx.settings.walks_per_node().phase("config")?.is_empty() {
        bail_phase("config", "walk needs walks_per_node (no corpus to pick it from)")?;
    }
    let walks = walker::generate_walks_with(&g, &cfg, ctx.settings.execution().phase("config")?).phase("walk")?;
    let header = format!(
        "{}# walk_length={} walks_per_node={} seed={} graph={:016x}\n",
        ctx.header("walk"),
        cfg.walk_length,
        cfg.walks_per_node,
        cfg.master_seed,
        persistence::graph_digest(&g)
    );
    let path = ctx.write("walks.txt", &(header + &walks.dump())).phase("persist")?;
    println!("{} walks -> {}", walks.len(), path.display());
    Ok(())
}

fn bail_phase(phase: &'static str, msg: &str) -> Out<()> {
    Err(PhaseError { phase, source: anyhow!(msg.to_string()) })
}

fn embed(ctx: &Ctx, graph_path: &Path, corpus_path: &Path, split: Option<Split>) -> Out<()> {
    let (g, _) = load_artifact::<WordGraph>(graph_path).phase("load")?;
    let mut docs = ctx.load_corpus(corpus_path)?;
    // Pick the automatic walk count before filtering so every split agrees.
    let cfg = ctx.settings.walk_config(average_tokens(&training_docs(&docs))).phase("config")?;
    if let Some(s) = split {
        docs.retain(|d| d.split == Some(s));
    }
    let exec = ctx.settings.execution().phase("config")?;
    let (table, report) = embedding::embed_corpus(&docs, &g, &cfg, exec).phase("embed")?;
    let name = match split {
        Some(s) => format!("embeddings_{}.tsv", if s == Split::Train { "train" } else { "test" }),
        None => "embeddings.tsv".to_string(),
    };
    let path = ctx.out_dir.join(name);
    save_artifact(&table, persistence::graph_digest(&g), &path).phase("persist")?;
    println!(
        "{} documents x {} dims (m={}, n={}) -> {}; oov rate {:.4}, {} zero vectors",
        table.len(),
        table.dim,
        cfg.walk_length,
        cfg.walks_per_node,
        path.display(),
        report.oov_rate(),
        report.zero_documents.len()
    );
    Ok(())
}

fn train(ctx: &Ctx, emb_path: &Path, corpus_path: &Path) -> Out<()> {
    let (table, _) = load_artifact::<EmbeddingTable>(emb_path).phase("load")?;
    let docs = ctx.load_corpus(corpus_path)?;
    let labels = labels_for(&table, &docs).phase("load")?;
    let data = LabeledData::new(table.matrix(), &labels).phase("train")?;
    let cfg = ctx.settings.train().phase("config")?;
    let (model, log) = if ctx.settings.grid_search().phase("config")? {
        let (m, l, grid) =
            classifier::train_with_grid(&data, &cfg, &classifier::LEARNING_RATES, &classifier::DROPOUT_RATES).phase("train")?;
        let mut body = String::from("learning_rate\tdropout\tvalidation_micro_f1\tbest_epoch\n");
        for r in &grid {
            let _ = writeln!(body, "{}\t{}\t{:.6}\t{}", r.learning_rate, r.dropout, r.validation_micro_f1, r.best_epoch);
        }
        ctx.write_tsv("train", "grid.tsv", &body).phase("persist")?;
        (m, l)
    } else {
        classifier::train_classifier(&data, &cfg).phase("train")?
    };
    let mut body = String::from("epoch\ttrain_loss\tval_loss\n");
    for e in &log.epochs {
        let _ = writeln!(body, "{}\t{:.6}\t{:.6}", e.epoch, e.train_loss, e.val_loss);
    }
    ctx.write_tsv("train", "train_log.tsv", &body).phase("persist")?;
    // The model remembers how its features were produced.
    let path = ctx.out_dir.join("model.bin");
    save_artifact(&model, persistence::feature_digest(&table), &path).phase("persist")?;
    println!(
        "trained on {} documents, {} classes; best epoch {} (val loss {:.4}) -> {}",
        log.train_size,
        model.classes.len(),
        log.best_epoch,
        log.best_val_loss,
        path.display()
    );
    Ok(())
}

fn eval(ctx: &Ctx, model_path: &Path, emb_path: &Path, corpus_path: &Path) -> Out<()> {
    let (model, mh) = load_artifact::<MlpModel>(model_path).phase("load")?;
    let (table, _) = load_artifact::<EmbeddingTable>(emb_path).phase("load")?;
    check_chain("embedding features", mh.config_digest, persistence::feature_digest(&table)).phase("load")?;
    let docs = ctx.load_corpus(corpus_path)?;
    let truth = labels_for(&table, &docs).phase("load")?;
    let x = table.matrix();
    let pred = classifier::predict(&model, x.view()).phase("evaluate")?;
    let predicted: Vec<String> = pred.labels(&model).into_iter().map(String::from).collect();
    let report = metrics::evaluate(&predicted, &truth).phase("evaluate")?;
    let header = vec![format!("gtpm {}", gtpm::VERSION), format!("command=eval config: {}", ctx.settings.summary())];
    ctx.write("report.tsv", &report.to_tsv(&header)).phase("persist")?;
    let mut preds = String::from("id\tlabel\tpredicted\n");
    for ((id, t), p) in table.ids.iter().zip(&truth).zip(&predicted) {
        let _ = writeln!(preds, "{id}\t{t}\t{p}");
    }
    ctx.write_tsv("eval", "predictions.tsv", &preds).phase("persist")?;
    print!("{}", report.to_text());
    Ok(())
}

fn print_record(r: &RunRecord) {
    println!(
        "m={} n={} f={}: micro-F1 {:.4} +/- {:.4}, macro-F1 {:.4} +/- {:.4} ({} runs; V={} E={} train={} test={})",
        r.walk_length,
        r.walks_per_node,
        r.train_fraction,
        r.micro_mean,
        r.micro_sd,
        r.macro_mean,
        r.macro_sd,
        r.repeats,
        r.vocab_size,
        r.edges,
        r.train_docs,
        r.test_docs
    );
    for w in &r.warnings {
        println!("warning: {w}");
    }
}

fn run(ctx: &Ctx, corpus_path: &Path) -> Out<()> {
    let spec = ctx.settings.experiment(corpus_path, Some(ctx.out_dir.clone())).phase("config")?;
    let rec = experiments::run_experiment(&spec).phase("run")?;
    fs::write(ctx.out_dir.join("runs.tsv"), experiments::records_tsv(&spec, std::slice::from_ref(&rec)))
        .phase("persist")?;
    print_record(&rec);
    Ok(())
}

fn sweep(ctx: &Ctx, corpus_path: &Path) -> Out<()> {
    let spec = ctx.settings.experiment(corpus_path, Some(ctx.out_dir.clone())).phase("config")?;
    let recs = experiments::sweep(&spec).phase("sweep")?;
    fs::write(ctx.out_dir.join("runs.tsv"), experiments::records_tsv(&spec, &recs)).phase("persist")?;
    recs.iter().for_each(print_record);
    println!("-> {}", ctx.out_dir.join("sweep.tsv").display());
    Ok(())
}

fn robustness(ctx: &Ctx, corpus_path: &Path) -> Out<()> {
    let spec = ctx.settings.experiment(corpus_path, Some(ctx.out_dir.clone())).phase("config")?;
    let fractions = ctx.settings.fractions().phase("config")?;
    let recs = experiments::robustness_curve(&spec, &fractions).phase("robustness")?;
    fs::write(ctx.out_dir.join("runs.tsv"), experiments::records_tsv(&spec, &recs)).phase("persist")?;
    recs.iter().for_each(print_record);
    println!("-> {}", ctx.out_dir.join("robustness.tsv").display());
    Ok(())
}

fn project(ctx: &Ctx, emb_path: &Path, corpus_path: &Path) -> Out<()> {
    let (table, _) = load_artifact::<EmbeddingTable>(emb_path).phase("load")?;
    let docs = ctx.load_corpus(corpus_path)?;
    let labels = labels_for(&table, &docs).phase("load")?;
    let points = experiments::project_2d(&table.ids, &table.matrix(), &labels).phase("project")?;
    let p = ctx.write_tsv("project", "projection.tsv", &experiments::projection_tsv(&points)).phase("persist")?;
    ctx.write_tsv("project", "vectors.tsv", &experiments::labeled_vectors_tsv(&table, &labels)).phase("persist")?;
    println!("{} points -> {}", points.len(), p.display());
    Ok(())
}

fn synth_corpus(ctx: &Ctx, classes: usize, docs_per_class: usize, topic_words: usize, shared_words: usize) -> Out<()> {
    let cfg = SynthConfig {
        docs_per_class,
        topic_words,
        shared_words,
        ..SynthConfig::new(classes, ctx.settings.seed().phase("config")?)
    };
    let docs = synth::generate(&cfg).phase("synth")?;
    let path = ctx.write("synthetic.jsonl", &synth::to_jsonl(&docs)).phase("persist")?;
    println!("{} documents in {classes} classes -> {}", docs.len(), path.display());
    Ok(())
}

fn dispatch(cli: Cli) -> Out<()> {
    let mut settings = match &cli.config {
        Some(p) => Settings::load(p).phase("config")?,
        None => Settings::default(),
    };
    for pair in &cli.set {
        settings.set_pair(pair).phase("config")?;
    }
    if let Some(seed) = cli.seed {
        settings.set("seed", &seed.to_string()).phase("config")?;
    }
    if let Some(n) = cli.threads {
        if n == 0 {
            bail_phase("config", "--threads must be >= 1")?;
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().phase("config")?;
    }
    let ctx = Ctx { settings, out_dir: cli.out_dir };
    match &cli.command {
        Command::Ingest(a) => ingest(&ctx, &a.corpus),
        Command::BuildGraph(a) => build_graph(&ctx, &a.corpus),
        Command::Stats { graph } => stats(&ctx, graph),
        Command::Walk { graph } => walk(&ctx, graph),
        Command::Embed { graph, corpus, split } => embed(&ctx, graph, corpus, *split),
        Command::Train { embeddings, corpus } => train(&ctx, embeddings, corpus),
        Command::Eval { model, embeddings, corpus } => eval(&ctx, model, embeddings, corpus),
        Command::Run(a) => run(&ctx, &a.corpus),
        Command::Sweep(a) => sweep(&ctx, &a.corpus),
        Command::Robustness(a) => robustness(&ctx, &a.corpus),
        Command::Project { embeddings, corpus } => project(&ctx, embeddings, corpus),
        Command::Synth { classes, docs_per_class, topic_words, shared_words } => {
            synth_corpus(&ctx, *classes, *docs_per_class, *topic_words, *shared_words)
        }
        Command::Keys => {
            for (k, help) in settings::KEYS {
                println!("{k:<20} {help}");
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let command = cli.command.name();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gtpm {command}: error in phase {}: {:#}", e.phase, e.source);
            ExitCode::FAILURE
        }
    }
}
