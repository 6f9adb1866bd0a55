//! End-to-end runs, parameter sweeps, reduced-training robustness curves
//! and 2D projection.
//!
//! A run is: normalize, split, (optionally) subsample the training split,
//! build vocabulary and graph from the training documents only, then for
//! each repeat derive a seed, walk, embed train and test documents, train
//! the classifier and score the test split.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use ndarray::Array2;
use rand::seq::SliceRandom;

use crate::classifier::{self, LabeledData, TrainConfig, DROPOUT_RATES, LEARNING_RATES};
use crate::corpus::{self, CorpusFormat, DocumentRecord, PipelineConfig, Split};
use crate::embedding::{self, EmbeddingTable, NodeEmbeddings};
use crate::error::{Error, PhaseExt, Result};
use crate::graph::{self, WordGraph};
use crate::metrics;
use crate::par::Execution;
use crate::persistence::{self, save_artifact};
use crate::seed::{self, tag};
use crate::walker::{self, WalkConfig};

/// Training fractions used for robustness curves when none are given.
pub const DEFAULT_FRACTIONS: [f64; 5] = [0.10, 0.08, 0.06, 0.04, 0.02];

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SplitMode {
    /// Use each record's `split` field.
    Given,
    /// Stratified seeded holdout of this fraction as test.
    Holdout { test_fraction: f64 },
}

#[derive(Clone, Debug)]
pub struct ExperimentSpec {
    pub corpus_path: Option<PathBuf>,
    pub format: Option<CorpusFormat>,
    pub split_mode: SplitMode,
    /// Fraction of the training split actually used, in (0, 1].
    pub train_fraction: f64,
    pub walk_lengths: Vec<usize>,
    /// Empty means: pick from the average training document length.
    pub walks_per_node: Vec<usize>,
    pub train: TrainConfig,
    pub grid_search: bool,
    pub repeats: usize,
    /// When false every repeat uses `master_seed` itself.
    pub vary_seeds: bool,
    pub master_seed: u64,
    pub pipeline: PipelineConfig,
    pub out_dir: Option<PathBuf>,
    pub exec: Execution,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            corpus_path: None,
            format: None,
            split_mode: SplitMode::Given,
            train_fraction: 1.0,
            walk_lengths: vec![15],
            walks_per_node: Vec::new(),
            train: TrainConfig::default(),
            grid_search: false,
            repeats: 5,
            vary_seeds: true,
            master_seed: 0,
            pipeline: PipelineConfig::default(),
            out_dir: None,
            exec: Execution::Parallel,
        }
    }
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.train_fraction > 0.0 && self.train_fraction <= 1.0) {
            return Err(Error::Config("train_fraction must be in (0, 1]".into()));
        }
        if self.walk_lengths.is_empty() {
            return Err(Error::Config("walk length grid is empty".into()));
        }
        if self.repeats == 0 {
            return Err(Error::Config("repeats must be >= 1".into()));
        }
        if let SplitMode::Holdout { test_fraction } = self.split_mode {
            if !(test_fraction > 0.0 && test_fraction < 1.0) {
                return Err(Error::Config("test_fraction must be in (0, 1)".into()));
            }
        }
        self.pipeline.validate()?;
        self.train.validate()
    }

    /// Digest of everything that shapes the vocabulary and graph.
    pub fn pipeline_digest(&self) -> u64 {
        persistence::config_digest(&format!(
            "{};split={:?};train_fraction={};seed={}",
            self.pipeline.canonical(),
            self.split_mode,
            self.train_fraction,
            self.master_seed
        ))
    }

    /// Seed for repeat `r`.
    pub fn repeat_seed(&self, r: usize) -> u64 {
        if self.vary_seeds {
            seed::mix(self.master_seed, &[tag::REPEAT, r as u64])
        } else {
            self.master_seed
        }
    }

    fn header_lines(&self) -> Vec<String> {
        vec![
            format!("gtpm {}", crate::VERSION),
            format!(
                "corpus={} split={:?} train_fraction={} repeats={} vary_seeds={} seed={}",
                self.corpus_path.as_deref().map_or("<memory>".into(), |p| p.display().to_string()),
                self.split_mode,
                self.train_fraction,
                self.repeats,
                self.vary_seeds,
                self.master_seed
            ),
            format!("train: {}", self.train.canonical()),
            format!("grid_search={} min_count={} stemming={}", self.grid_search, self.pipeline.min_count, self.pipeline.stemming),
        ]
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PhaseTimings {
    pub prepare: Duration,
    pub embed: Duration,
    pub train: Duration,
    pub evaluate: Duration,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunRecord {
    pub walk_length: usize,
    pub walks_per_node: usize,
    pub train_fraction: f64,
    pub repeats: usize,
    pub master_seed: u64,
    pub learning_rate: f64,
    pub dropout: f64,
    pub micro_f1: Vec<f64>,
    pub macro_f1: Vec<f64>,
    pub micro_mean: f64,
    pub micro_sd: f64,
    pub macro_mean: f64,
    pub macro_sd: f64,
    pub vocab_size: usize,
    pub edges: usize,
    pub train_docs: usize,
    pub test_docs: usize,
    pub test_oov_rate: f64,
    /// Content digest of each repeat's training-document embeddings.
    pub embedding_digests: Vec<u64>,
    pub timings: PhaseTimings,
    pub warnings: Vec<String>,
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

impl RunRecord {
    pub const TSV_HEADER: &'static str = "walk_length\twalks_per_node\ttrain_fraction\trepeats\tseed\tlearning_rate\tdropout\tmicro_f1_mean\tmicro_f1_sd\tmacro_f1_mean\tmacro_f1_sd\tvocab\tedges\ttrain_docs\ttest_docs\ttest_oov_rate\tprepare_s\tembed_s\ttrain_s\teval_s";

    pub fn tsv_row(&self) -> String {
        format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{}\t{}\t{}\t{}\t{:.6}\t{:.3}\t{:.3}\t{:.3}\t{:.3}",
            self.walk_length,
            self.walks_per_node,
            self.train_fraction,
            self.repeats,
            self.master_seed,
            self.learning_rate,
            self.dropout,
            self.micro_mean,
            self.micro_sd,
            self.macro_mean,
            self.macro_sd,
            self.vocab_size,
            self.edges,
            self.train_docs,
            self.test_docs,
            self.test_oov_rate,
            self.timings.prepare.as_secs_f64(),
            self.timings.embed.as_secs_f64(),
            self.timings.train.as_secs_f64(),
            self.timings.evaluate.as_secs_f64(),
        )
    }
}

fn write_with_header(path: &Path, header: &[String], body: &str) -> Result<()> {
    let mut out = String::new();
    for h in header {
        let _ = writeln!(out, "# {h}");
    }
    out.push_str(body);
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn records_tsv(spec: &ExperimentSpec, records: &[RunRecord]) -> String {
    let mut out = String::new();
    for h in spec.header_lines() {
        let _ = writeln!(out, "# {h}");
    }
    out.push_str(RunRecord::TSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&r.tsv_row());
        out.push('\n');
    }
    out
}

/// Train/test documents ready for embedding.
#[derive(Clone, Debug)]
pub struct PreparedData {
    pub train: Vec<DocumentRecord>,
    pub test: Vec<DocumentRecord>,
    pub graph: WordGraph,
    pub warnings: Vec<String>,
    pub prepare_time: Duration,
}

pub fn load_documents(spec: &ExperimentSpec) -> Result<Vec<DocumentRecord>> {
    let path = spec
        .corpus_path
        .as_deref()
        .ok_or_else(|| Error::Config("no corpus path given".into()))?;
    let format = spec.format.unwrap_or_else(|| CorpusFormat::from_path(path));
    corpus::load_corpus(path, format)
}

/// Splits normalized documents into (train, test).
pub fn split_documents(docs: Vec<DocumentRecord>, mode: SplitMode, seed_value: u64) -> Result<(Vec<DocumentRecord>, Vec<DocumentRecord>)> {
    match mode {
        SplitMode::Given => {
            let mut train = Vec::new();
            let mut test = Vec::new();
            for d in docs {
                match d.split {
                    Some(Split::Train) => train.push(d),
                    Some(Split::Test) => test.push(d),
                    None => return Err(Error::Config(format!("document {:?} has no split; use a holdout split mode", d.id))),
                }
            }
            Ok((train, test))
        }
        SplitMode::Holdout { test_fraction } => {
            let labels: Vec<&str> = docs.iter().map(|d| d.label.as_str()).collect();
            let test_idx: BTreeSet<usize> = stratified_sample(&labels, test_fraction, seed_value, tag::SPLIT, false)
                .into_iter()
                .collect();
            let (test, train): (Vec<_>, Vec<_>) = docs
                .into_iter()
                .enumerate()
                .partition(|(i, _)| test_idx.contains(i));
            Ok((train.into_iter().map(|p| p.1).collect(), test.into_iter().map(|p| p.1).collect()))
        }
    }
}

/// Per label, a seeded shuffle keeps `round(fraction * count)` items;
/// `keep_one` forces at least one per nonempty label. Returns sorted
/// indices; a fraction of 1 returns everything.
pub fn stratified_sample(labels: &[&str], fraction: f64, seed_value: u64, stream: u64, keep_one: bool) -> Vec<usize> {
    if fraction >= 1.0 {
        return (0..labels.len()).collect();
    }
    let mut by_label: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, l) in labels.iter().enumerate() {
        by_label.entry(l).or_default().push(i);
    }
    let mut kept = Vec::new();
    for (k, (_, mut idx)) in by_label.into_iter().enumerate() {
        let mut rng = seed::rng(seed_value, &[stream, k as u64]);
        idx.shuffle(&mut rng);
        let mut n = (fraction * idx.len() as f64).round() as usize;
        if keep_one {
            n = n.max(1);
        }
        kept.extend_from_slice(&idx[..n.min(idx.len())]);
    }
    kept.sort_unstable();
    kept
}

/// Loads nothing: takes raw documents, normalizes, splits, subsamples and
/// builds the training graph.
pub fn prepare(docs: Vec<DocumentRecord>, spec: &ExperimentSpec) -> Result<PreparedData> {
    spec.validate()?;
    let start = Instant::now();
    let mut docs = docs;
    corpus::normalize_corpus(&mut docs, &spec.pipeline, spec.exec);
    let (train_full, test) = split_documents(docs, spec.split_mode, spec.master_seed).phase("split")?;
    let mut warnings = Vec::new();

    let labels: Vec<&str> = train_full.iter().map(|d| d.label.as_str()).collect();
    let keep = stratified_sample(&labels, spec.train_fraction, spec.master_seed, tag::SUBSAMPLE, true);
    let keep: BTreeSet<usize> = keep.into_iter().collect();
    let train: Vec<DocumentRecord> = train_full
        .into_iter()
        .enumerate()
        .filter(|(i, _)| keep.contains(i))
        .map(|p| p.1)
        .collect();

    let train_classes: BTreeSet<&str> = train.iter().map(|d| d.label.as_str()).collect();
    for missing in test.iter().map(|d| d.label.as_str()).collect::<BTreeSet<_>>().difference(&train_classes) {
        let w = format!("class {missing:?} has no training documents; dropped from training");
        log::warn!("{w}");
        warnings.push(w);
    }

    let vocab = corpus::build_vocabulary(&train, &spec.pipeline).phase("vocabulary")?;
    let graph = graph::build_graph(&train, &vocab);
    Ok(PreparedData { train, test, graph, warnings, prepare_time: start.elapsed() })
}

fn labeled(table: &EmbeddingTable, docs: &[DocumentRecord]) -> Result<LabeledData> {
    let labels: Vec<String> = docs.iter().map(|d| d.label.clone()).collect();
    LabeledData::new(table.matrix(), &labels)
}

/// Runs all repeats of one (walk length, walks per node) point on prepared data.
pub fn run_point(data: &PreparedData, spec: &ExperimentSpec, walk_length: usize, walks_per_node: usize) -> Result<RunRecord> {
    let mut rec = RunRecord {
        walk_length,
        walks_per_node,
        train_fraction: spec.train_fraction,
        repeats: spec.repeats,
        master_seed: spec.master_seed,
        learning_rate: spec.train.learning_rate,
        dropout: spec.train.dropout,
        vocab_size: data.graph.node_count(),
        edges: data.graph.edge_count(),
        train_docs: data.train.len(),
        test_docs: data.test.len(),
        warnings: data.warnings.clone(),
        ..Default::default()
    };
    rec.timings.prepare = data.prepare_time;
    let config_digest = spec.pipeline_digest();
    let point_dir = spec.out_dir.as_ref().map(|d| d.join(format!("m{walk_length}_n{walks_per_node}_f{}", spec.train_fraction)));
    if let Some(dir) = &point_dir {
        save_artifact(&data.graph, config_digest, &dir.join("graph.tsv")).phase("persist")?;
    }

    for r in 0..spec.repeats {
        let seed_r = spec.repeat_seed(r);
        let t0 = Instant::now();
        let wcfg = WalkConfig { walk_length, walks_per_node, master_seed: seed_r };
        let walks = walker::generate_walks_with(&data.graph, &wcfg, spec.exec).phase("walk")?;
        let nodes = NodeEmbeddings::from_walks(&walks, walk_length, spec.exec).phase("embed")?;
        let (train_emb, _) = embedding::embed_documents(&data.train, &nodes, &data.graph, &wcfg, spec.exec);
        let (test_emb, test_report) = embedding::embed_documents(&data.test, &nodes, &data.graph, &wcfg, spec.exec);
        rec.test_oov_rate = test_report.oov_rate();
        rec.embedding_digests.push(persistence::digest64(&persistence::Artifact::encode(&train_emb, config_digest)));
        rec.timings.embed += t0.elapsed();

        let t1 = Instant::now();
        let train_data = labeled(&train_emb, &data.train).phase("train")?;
        let tcfg = TrainConfig { seed: seed_r, ..spec.train.clone() };
        let (model, _log) = if spec.grid_search {
            let (m, l, grid) = classifier::train_with_grid(&train_data, &tcfg, &LEARNING_RATES, &DROPOUT_RATES).phase("train")?;
            log::info!(
                "repeat {r}: grid picked learning_rate={} dropout={} ({} candidates)",
                m.config.learning_rate,
                m.config.dropout,
                grid.len()
            );
            (m, l)
        } else {
            classifier::train_classifier(&train_data, &tcfg).phase("train")?
        };
        rec.learning_rate = model.config.learning_rate;
        rec.dropout = model.config.dropout;
        rec.timings.train += t1.elapsed();

        let t2 = Instant::now();
        let x_test = test_emb.matrix();
        let pred = classifier::predict(&model, x_test.view()).phase("evaluate")?;
        let predicted: Vec<&str> = pred.labels(&model);
        let truth: Vec<&str> = data.test.iter().map(|d| d.label.as_str()).collect();
        let report = metrics::evaluate(&predicted, &truth).phase("evaluate")?;
        rec.micro_f1.push(report.micro_f1);
        rec.macro_f1.push(report.macro_f1);
        rec.timings.evaluate += t2.elapsed();

        if let Some(dir) = &point_dir {
            save_artifact(&train_emb, config_digest, &dir.join(format!("embeddings_train_r{r}.tsv"))).phase("persist")?;
            save_artifact(&test_emb, config_digest, &dir.join(format!("embeddings_test_r{r}.tsv"))).phase("persist")?;
            save_artifact(&model, persistence::feature_digest(&train_emb), &dir.join(format!("model_r{r}.bin"))).phase("persist")?;
            let mut header = spec.header_lines();
            header.push(format!("walk_length={walk_length} walks_per_node={walks_per_node} repeat={r} seed={seed_r}"));
            fs::write(dir.join(format!("report_r{r}.tsv")), report.to_tsv(&header)).map_err(|e| Error::io(dir, e))?;
        }
    }
    (rec.micro_mean, rec.micro_sd) = mean_sd(&rec.micro_f1);
    (rec.macro_mean, rec.macro_sd) = mean_sd(&rec.macro_f1);
    if let Some(dir) = &point_dir {
        write_with_header(
            &dir.join("run.tsv"),
            &spec.header_lines(),
            &format!("{}\n{}\n", RunRecord::TSV_HEADER, rec.tsv_row()),
        )?;
    }
    Ok(rec)
}

fn resolve_walks_per_node(spec: &ExperimentSpec, data: &PreparedData) -> Vec<usize> {
    if !spec.walks_per_node.is_empty() {
        return spec.walks_per_node.clone();
    }
    let tokens: usize = data.train.iter().map(DocumentRecord::token_count).sum();
    let avg = tokens as f64 / data.train.len().max(1) as f64;
    vec![WalkConfig::default_walks_per_node(avg)]
}

/// Single run at the first grid point.
pub fn run_experiment_on(docs: Vec<DocumentRecord>, spec: &ExperimentSpec) -> Result<RunRecord> {
    let data = prepare(docs, spec)?;
    let n = resolve_walks_per_node(spec, &data)[0];
    run_point(&data, spec, spec.walk_lengths[0], n)
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<RunRecord> {
    let docs = load_documents(spec).phase("load")?;
    run_experiment_on(docs, spec)
}

/// One record per (walk length, walks per node) pair; the graph is built once.
pub fn sweep_on(docs: Vec<DocumentRecord>, spec: &ExperimentSpec) -> Result<Vec<RunRecord>> {
    let data = prepare(docs, spec)?;
    let ns = resolve_walks_per_node(spec, &data);
    let mut out = Vec::new();
    for &m in &spec.walk_lengths {
        for &n in &ns {
            out.push(run_point(&data, spec, m, n)?);
        }
    }
    if let Some(dir) = &spec.out_dir {
        write_with_header(&dir.join("sweep.tsv"), &spec.header_lines(), &sweep_tsv(&out))?;
    }
    Ok(out)
}

pub fn sweep(spec: &ExperimentSpec) -> Result<Vec<RunRecord>> {
    let docs = load_documents(spec).phase("load")?;
    sweep_on(docs, spec)
}

pub fn sweep_tsv(records: &[RunRecord]) -> String {
    let mut out = String::from("walk_length\twalks_per_node\tmicro_f1_mean\tmicro_f1_sd\tmacro_f1_mean\tmacro_f1_sd\tembed_s\n");
    for r in records {
        let _ = writeln!(
            out,
            "{}\t{}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.3}",
            r.walk_length,
            r.walks_per_node,
            r.micro_mean,
            r.micro_sd,
            r.macro_mean,
            r.macro_sd,
            r.timings.embed.as_secs_f64()
        );
    }
    out
}

/// One record per training fraction; each fraction rebuilds the graph from
/// its own subsample and is scored on the full test split.
pub fn robustness_curve_on(docs: Vec<DocumentRecord>, spec: &ExperimentSpec, fractions: &[f64]) -> Result<Vec<RunRecord>> {
    if fractions.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::Config("fractions must be sorted in descending order".into()));
    }
    let mut out = Vec::new();
    for &f in fractions {
        let s = ExperimentSpec { train_fraction: f, ..spec.clone() };
        out.push(run_experiment_on(docs.clone(), &s)?);
    }
    if let Some(dir) = &spec.out_dir {
        write_with_header(&dir.join("robustness.tsv"), &spec.header_lines(), &curve_tsv(&out))?;
    }
    Ok(out)
}

pub fn robustness_curve(spec: &ExperimentSpec, fractions: &[f64]) -> Result<Vec<RunRecord>> {
    let docs = load_documents(spec).phase("load")?;
    robustness_curve_on(docs, spec, fractions)
}

pub fn curve_tsv(records: &[RunRecord]) -> String {
    let mut out = String::from("train_fraction\ttrain_docs\tvocab\tmicro_f1_mean\tmicro_f1_sd\tmacro_f1_mean\tmacro_f1_sd\ttest_oov_rate\n");
    for r in records {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.6}",
            r.train_fraction, r.train_docs, r.vocab_size, r.micro_mean, r.micro_sd, r.macro_mean, r.macro_sd, r.test_oov_rate
        );
    }
    out
}

// ---- projection --------------------------------------------------------

pub const POWER_TOLERANCE: f64 = 1e-9;
pub const POWER_MAX_ITER: usize = 1000;

/// Top principal axes found by power iteration with deflation.
#[derive(Clone, Debug, PartialEq)]
pub struct Pca2 {
    pub mean: Vec<f64>,
    /// Unit-length, mutually orthogonal.
    pub axes: [Vec<f64>; 2],
    pub variances: [f64; 2],
}

fn matvec(c: &Array2<f64>, v: &[f64]) -> Vec<f64> {
    c.rows().into_iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn orthogonalize(v: &mut [f64], against: Option<&[f64]>) {
    if let Some(u) = against {
        let d: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
        v.iter_mut().zip(u).for_each(|(a, b)| *a -= d * b);
    }
}

/// Power iteration on `c`, kept orthogonal to `against`.
fn dominant(c: &Array2<f64>, against: Option<&[f64]>) -> (Vec<f64>, f64) {
    let d = c.nrows();
    let mut rng = seed::rng(0x5043_4132, &[d as u64]);
    let mut v: Vec<f64> = (0..d).map(|_| rand::Rng::random::<f64>(&mut rng) - 0.5).collect();
    orthogonalize(&mut v, against);
    let n0 = norm(&v);
    v.iter_mut().for_each(|x| *x /= n0);
    for _ in 0..POWER_MAX_ITER {
        let mut w = matvec(c, &v);
        orthogonalize(&mut w, against);
        let nw = norm(&w);
        if nw < 1e-300 {
            break;
        }
        w.iter_mut().for_each(|x| *x /= nw);
        let diff = v.iter().zip(&w).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        v = w;
        if diff < POWER_TOLERANCE {
            break;
        }
    }
    orthogonalize(&mut v, against);
    let nv = norm(&v);
    v.iter_mut().for_each(|x| *x /= nv);
    // Sign convention: largest-magnitude coordinate positive.
    let pivot = v.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
    if pivot < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    let lambda: f64 = matvec(c, &v).iter().zip(&v).map(|(a, b)| a * b).sum();
    (v, lambda)
}

pub fn pca2(x: &Array2<f64>) -> Result<Pca2> {
    let (n, d) = x.dim();
    if n < 2 {
        return Err(Error::Config("projection needs at least two vectors".into()));
    }
    if d < 2 {
        return Err(Error::Config("projection needs at least two dimensions".into()));
    }
    let mean: Vec<f64> = (0..d).map(|j| x.column(j).sum() / n as f64).collect();
    let centered = x - &ndarray::Array1::from(mean.clone());
    let cov = centered.t().dot(&centered) / (n - 1) as f64;
    let trace: f64 = cov.diag().sum();
    if trace <= 0.0 {
        return Err(Error::ZeroVariance);
    }
    let (v1, l1) = dominant(&cov, None);
    let mut deflated = cov.clone();
    for i in 0..d {
        for j in 0..d {
            deflated[[i, j]] -= l1 * v1[i] * v1[j];
        }
    }
    let (v2, _) = dominant(&deflated, Some(&v1));
    let l2: f64 = matvec(&cov, &v2).iter().zip(&v2).map(|(a, b)| a * b).sum();
    Ok(Pca2 { mean, axes: [v1, v2], variances: [l1, l2.max(0.0)] })
}

impl Pca2 {
    pub fn project(&self, row: &[f64]) -> (f64, f64) {
        let dot = |axis: &[f64]| row.iter().zip(&self.mean).zip(axis).map(|((x, m), a)| (x - m) * a).sum::<f64>();
        (dot(&self.axes[0]), dot(&self.axes[1]))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProjectedPoint {
    pub id: String,
    pub x: f64,
    pub y: f64,
    pub label: String,
}

/// Projects labeled vectors onto their top two principal components.
pub fn project_2d(ids: &[String], vectors: &Array2<f64>, labels: &[String]) -> Result<Vec<ProjectedPoint>> {
    if ids.len() != vectors.nrows() || labels.len() != vectors.nrows() {
        return Err(Error::LengthMismatch { predictions: vectors.nrows(), labels: labels.len() });
    }
    let pca = pca2(vectors)?;
    Ok(vectors
        .rows()
        .into_iter()
        .zip(ids.iter().zip(labels))
        .map(|(row, (id, label))| {
            let (x, y) = pca.project(row.as_slice().expect("contiguous"));
            ProjectedPoint { id: id.clone(), x, y, label: label.clone() }
        })
        .collect())
}

pub fn projection_tsv(points: &[ProjectedPoint]) -> String {
    let mut out = String::from("id\tx\ty\tlabel\n");
    for p in points {
        let _ = writeln!(out, "{}\t{}\t{}\t{}", p.id, p.x, p.y, p.label);
    }
    out
}

/// Raw vectors with labels, for external dimensionality reduction tools.
pub fn labeled_vectors_tsv(table: &EmbeddingTable, labels: &[String]) -> String {
    let mut out = String::from("id\tlabel");
    for i in 0..table.dim {
        let _ = write!(out, "\tv{i}");
    }
    out.push('\n');
    for ((id, row), label) in table.rows().zip(labels) {
        let _ = write!(out, "{id}\t{label}");
        for v in row {
            let _ = write!(out, "\t{v}");
        }
        out.push('\n');
    }
    out
}
