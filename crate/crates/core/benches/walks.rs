use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use gtpm::corpus::{self, DocumentRecord, PipelineConfig};
use gtpm::embedding::{self, NodeEmbeddings};
use gtpm::graph::{self, WordGraph};
use gtpm::synth::{self, SynthConfig};
use gtpm::walker::{self, WalkConfig};
use gtpm::Execution;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn fixture(topic_words: usize) -> (Vec<DocumentRecord>, WordGraph) {
    let cfg = SynthConfig { topic_words, shared_words: topic_words / 2, docs_per_class: 200, ..SynthConfig::new(2, 1) };
    let mut docs = synth::generate(&cfg).unwrap();
    let pipeline = PipelineConfig::default();
    corpus::normalize_corpus(&mut docs, &pipeline, Execution::Sequential);
    let vocab = corpus::build_vocabulary(&docs, &pipeline).unwrap();
    let g = graph::build_graph(&docs, &vocab);
    (docs, g)
}

fn walks(c: &mut Criterion) {
    let mut group = c.benchmark_group("generate_walks");
    for topic_words in [200, 1000] {
        let (_, g) = fixture(topic_words);
        let cfg = WalkConfig { walk_length: 15, walks_per_node: 4, master_seed: 7 };
        group.throughput(Throughput::Elements((g.node_count() * cfg.walks_per_node) as u64));
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, g.node_count()), &g, |b, g| {
                b.iter(|| walker::generate_walks_with(black_box(g), &cfg, exec).unwrap())
            });
        }
    }
    group.finish();
}

fn node_embeddings(c: &mut Criterion) {
    let mut group = c.benchmark_group("node_embeddings");
    let (_, g) = fixture(1000);
    let cfg = WalkConfig { walk_length: 15, walks_per_node: 4, master_seed: 7 };
    let ws = walker::generate_walks(&g, &cfg).unwrap();
    for (name, exec) in MODES {
        group.bench_function(name, |b| b.iter(|| NodeEmbeddings::from_walks(black_box(&ws), 15, exec).unwrap()));
    }
    group.finish();
}

fn embed_corpus(c: &mut Criterion) {
    let mut group = c.benchmark_group("embed_corpus");
    group.sample_size(10);
    let (docs, g) = fixture(1000);
    let cfg = WalkConfig { walk_length: 15, walks_per_node: 1, master_seed: 7 };
    group.throughput(Throughput::Elements(docs.len() as u64));
    for (name, exec) in MODES {
        group.bench_function(name, |b| b.iter(|| embedding::embed_corpus(black_box(&docs), &g, &cfg, exec).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, walks, node_embeddings, embed_corpus);
criterion_main!(benches);
