mod common;

use common::*;
use gtpm::classifier::{self, LabeledData, MlpModel, TrainConfig};
use gtpm::corpus::{CorpusFormat, DocumentRecord, Split};
use gtpm::embedding::{self, EmbeddingTable};
use gtpm::experiments::{self, ExperimentSpec, SplitMode};
use gtpm::graph::WordGraph;
use gtpm::persistence::{self, check_chain, graph_digest, load_artifact, save_artifact};
use gtpm::synth::{self, SynthConfig};
use gtpm::walker::WalkConfig;
use gtpm::{Error, Execution};
use ndarray::Array2;

#[test]
fn toy_corpus_embeddings_are_deterministic() {
    let g = toy_graph();
    let cfg = WalkConfig { walk_length: 3, walks_per_node: 2, master_seed: 11 };
    let (a, report) = embedding::embed_corpus(&toy_docs(), &g, &cfg, Execution::Parallel).unwrap();
    let (b, _) = embedding::embed_corpus(&toy_docs(), &g, &cfg, Execution::Sequential).unwrap();
    assert_eq!(a.len(), 4);
    assert_eq!(a.dim, 16);
    assert_eq!(report.oov_tokens, 0);
    assert_eq!(a, b);
    assert_eq!(a.graph_digest, graph_digest(&g));
}

#[test]
fn same_multiset_same_embedding() {
    let g = toy_graph();
    let cfg = WalkConfig { walk_length: 4, walks_per_node: 1, master_seed: 3 };
    let docs = vec![
        DocumentRecord::from_tokens("x", "a", &["w1 w2 w3", "w3"]),
        DocumentRecord::from_tokens("y", "a", &["w3 w3 w2 w1"]),
        DocumentRecord::from_tokens("z", "a", &["nothing here"]),
    ];
    let (t, report) = embedding::embed_corpus(&docs, &g, &cfg, Execution::Sequential).unwrap();
    assert_eq!(t.row(0), t.row(1));
    assert!(t.row(2).iter().all(|&v| v == 0.0));
    assert_eq!(report.zero_documents, vec!["z".to_string()]);
}

#[test]
fn artifact_chain_detects_foreign_graph() {
    let dir = tempfile::tempdir().unwrap();
    let g = toy_graph();
    let digest = save_artifact(&g, 1, &dir.path().join("g.tsv")).unwrap();
    assert_eq!(digest, graph_digest(&g));
    let (loaded, header) = load_artifact::<WordGraph>(&dir.path().join("g.tsv")).unwrap();
    assert_eq!(header.digest, digest);
    assert_eq!(loaded, g);

    let cfg = WalkConfig { walk_length: 3, walks_per_node: 1, master_seed: 0 };
    let (t, _) = embedding::embed_corpus(&toy_docs(), &loaded, &cfg, Execution::Sequential).unwrap();
    save_artifact(&t, 1, &dir.path().join("e.tsv")).unwrap();
    let (e, _) = load_artifact::<EmbeddingTable>(&dir.path().join("e.tsv")).unwrap();
    check_chain("graph", e.graph_digest, digest).unwrap();

    let other = graph_from_edges(3, &[(0, 1, 1)]);
    assert!(matches!(
        check_chain("graph", e.graph_digest, graph_digest(&other)),
        Err(Error::DigestMismatch { .. })
    ));
}

#[test]
fn tampered_files_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.tsv");
    save_artifact(&toy_graph(), 0, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::write(&path, text.replace("\t3\n", "\t4\n")).unwrap();
    assert!(matches!(load_artifact::<WordGraph>(&path), Err(Error::DigestMismatch { .. })));
    std::fs::write(&path, "").unwrap();
    assert!(load_artifact::<WordGraph>(&path).is_err());
}

#[test]
fn model_round_trip_predicts_identically() {
    let x = Array2::from_shape_fn((40, 3), |(i, j)| ((i * 7 + j * 3) % 11) as f64 / 11.0 + if i % 2 == 0 { 1.0 } else { 0.0 });
    let labels: Vec<String> = (0..40).map(|i| if i % 2 == 0 { "p" } else { "q" }.to_string()).collect();
    let data = LabeledData::new(x.clone(), &labels).unwrap();
    let cfg = TrainConfig { hidden: vec![6, 5], max_epochs: 5, ..Default::default() };
    let (model, _) = classifier::train_classifier(&data, &cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.bin");
    save_artifact(&model, 9, &path).unwrap();
    let (back, header) = load_artifact::<MlpModel>(&path).unwrap();
    assert_eq!(header.config_digest, 9);
    assert_eq!(back.scores(x.view()).unwrap(), model.scores(x.view()).unwrap());
    let mut bytes = std::fs::read(&path).unwrap();
    bytes.truncate(bytes.len() - 9);
    assert!(persistence::load_artifact::<MlpModel>(&{
        std::fs::write(&path, &bytes).unwrap();
        path.clone()
    })
    .is_err());
}

fn small_synth(classes: usize, seed: u64) -> Vec<DocumentRecord> {
    let cfg = SynthConfig { docs_per_class: 60, topic_words: 60, shared_words: 30, ..SynthConfig::new(classes, seed) };
    synth::generate(&cfg).unwrap()
}

fn small_spec() -> ExperimentSpec {
    ExperimentSpec {
        walk_lengths: vec![5],
        walks_per_node: vec![1],
        repeats: 2,
        train: TrainConfig { hidden: vec![16, 16], max_epochs: 30, ..Default::default() },
        master_seed: 5,
        ..Default::default()
    }
}

#[test]
fn experiment_writes_artifacts_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let spec = ExperimentSpec { out_dir: Some(dir.path().to_path_buf()), ..small_spec() };
    let rec = experiments::run_experiment_on(small_synth(2, 1), &spec).unwrap();
    assert_eq!(rec.micro_f1.len(), 2);
    assert_eq!(rec.embedding_digests.len(), 2);
    assert_ne!(rec.embedding_digests[0], rec.embedding_digests[1]);
    assert!(rec.micro_mean > 0.5, "{rec:?}");
    let point = dir.path().join("m5_n1_f1");
    for f in ["graph.tsv", "embeddings_train_r0.tsv", "embeddings_test_r1.tsv", "model_r0.bin", "report_r0.tsv", "run.tsv"] {
        assert!(point.join(f).exists(), "{f}");
    }
    let run = std::fs::read_to_string(point.join("run.tsv")).unwrap();
    assert!(run.starts_with("# gtpm "));
}

#[test]
fn corpus_file_round_trip_through_experiment() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.jsonl");
    std::fs::write(&path, synth::to_jsonl(&small_synth(2, 2))).unwrap();
    let spec = ExperimentSpec { corpus_path: Some(path.clone()), repeats: 1, ..small_spec() };
    let from_file = experiments::run_experiment(&spec).unwrap();
    let in_memory = experiments::run_experiment_on(small_synth(2, 2), &spec).unwrap();
    assert_eq!(from_file.micro_f1, in_memory.micro_f1);
    assert_eq!(CorpusFormat::from_path(&path), CorpusFormat::Jsonl);
}

#[test]
fn holdout_split_ignores_markers() {
    let docs: Vec<DocumentRecord> = small_synth(2, 3).into_iter().map(|d| DocumentRecord { split: None, ..d }).collect();
    let spec = ExperimentSpec { split_mode: SplitMode::Holdout { test_fraction: 0.25 }, repeats: 1, ..small_spec() };
    let rec = experiments::run_experiment_on(docs, &spec).unwrap();
    assert_eq!(rec.test_docs, 30);
    assert_eq!(rec.train_docs, 90);
}

#[test]
fn sweep_and_curve_shapes() {
    let spec = ExperimentSpec { walk_lengths: vec![3, 5], walks_per_node: vec![1, 2], repeats: 1, ..small_spec() };
    let recs = experiments::sweep_on(small_synth(2, 4), &spec).unwrap();
    let grid: Vec<(usize, usize)> = recs.iter().map(|r| (r.walk_length, r.walks_per_node)).collect();
    assert_eq!(grid, vec![(3, 1), (3, 2), (5, 1), (5, 2)]);
    assert_eq!(experiments::sweep_tsv(&recs).lines().count(), 5);

    let curve = experiments::robustness_curve_on(small_synth(2, 4), &small_spec(), &[1.0, 0.5, 0.1]).unwrap();
    let sizes: Vec<usize> = curve.iter().map(|r| r.train_docs).collect();
    assert_eq!(sizes, vec![96, 48, 10]);
    assert!(curve.iter().all(|r| r.test_docs == 24));
    assert!(experiments::robustness_curve_on(small_synth(2, 4), &small_spec(), &[0.1, 0.5]).is_err());
}

#[test]
fn projection_separates_easy_classes() {
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for i in 0..20 {
        let c = i % 2;
        rows.extend([c as f64 * 5.0 + (i as f64 * 0.37).sin() * 0.1, (i as f64).cos() * 0.2, 1.0, c as f64]);
        labels.push(format!("c{c}"));
    }
    let x = Array2::from_shape_vec((20, 4), rows).unwrap();
    let ids: Vec<String> = (0..20).map(|i| format!("d{i}")).collect();
    let pts = experiments::project_2d(&ids, &x, &labels).unwrap();
    let mean_x = |c: &str| {
        let xs: Vec<f64> = pts.iter().filter(|p| p.label == c).map(|p| p.x).collect();
        xs.iter().sum::<f64>() / xs.len() as f64
    };
    assert!((mean_x("c0") - mean_x("c1")).abs() > 4.0);
    let pca = experiments::pca2(&x).unwrap();
    let dot: f64 = pca.axes[0].iter().zip(&pca.axes[1]).map(|(a, b)| a * b).sum();
    assert!(dot.abs() < 1e-9);
    assert!(pca.variances[0] >= pca.variances[1]);
    assert_eq!(experiments::projection_tsv(&pts).lines().count(), 21);
}

#[test]
fn split_markers_survive_generation() {
    let docs = small_synth(3, 9);
    let test = docs.iter().filter(|d| d.split == Some(Split::Test)).count();
    assert_eq!(test, 36);
}
