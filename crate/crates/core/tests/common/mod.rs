#![allow(dead_code)]

use gtpm::corpus::{self, DocumentRecord, PipelineConfig, Vocabulary};
use gtpm::graph::{self, WordGraph};

pub const TOY_DOCS: [&str; 4] = ["w1 w2 w3", "w4 w2 w3 w5 w4", "w6 w5 w4 w3", "w6 w1 w3 w5 w4"];

/// Hand-counted consecutive pairs of the four toy documents.
pub const TOY_EDGES: [(&str, &str, u64); 9] = [
    ("w1", "w2", 1),
    ("w2", "w3", 2),
    ("w2", "w4", 1),
    ("w3", "w5", 2),
    ("w4", "w5", 3),
    ("w5", "w6", 1),
    ("w3", "w4", 1),
    ("w1", "w6", 1),
    ("w1", "w3", 1),
];

pub fn toy_docs() -> Vec<DocumentRecord> {
    TOY_DOCS
        .iter()
        .enumerate()
        .map(|(i, t)| DocumentRecord::from_tokens(&format!("d{}", i + 1), if i % 2 == 0 { "a" } else { "b" }, &[t]))
        .collect()
}

pub fn toy_pipeline() -> PipelineConfig {
    PipelineConfig { min_count: 1, ..Default::default() }
}

pub fn toy_vocab() -> Vocabulary {
    corpus::build_vocabulary(&toy_docs(), &toy_pipeline()).unwrap()
}

pub fn toy_graph() -> WordGraph {
    graph::build_graph(&toy_docs(), &toy_vocab())
}

pub fn id(g: &WordGraph, w: &str) -> u32 {
    g.vocabulary().id(w).unwrap()
}

/// Graph over `0..n` with the given weighted edges; node words are `n0, n1, ...`.
pub fn graph_from_edges(n: usize, edges: &[(u32, u32, u64)]) -> WordGraph {
    let vocab = Vocabulary::from_entries((0..n).map(|i| (format!("n{i}"), 1)).collect());
    let mut g = WordGraph::new(vocab);
    for &(a, b, c) in edges {
        if a != b && c > 0 {
            g.add_edge(a, b, c);
        }
    }
    g
}

/// First-occurrence relabeling written independently of the library:
/// a node's label is the number of distinct nodes seen up to and including
/// its first appearance.
pub fn brute_anonymize(walk: &[u32]) -> Vec<u32> {
    walk.iter()
        .map(|v| {
            let first = walk.iter().position(|u| u == v).unwrap();
            let mut seen = walk[..=first].to_vec();
            seen.sort_unstable();
            seen.dedup();
            seen.len() as u32
        })
        .collect()
}

/// Pooled transition counts, normalized per nonzero row, flattened.
pub fn brute_embedding(walks: &[Vec<u32>], m: usize) -> Vec<f64> {
    let side = m + 1;
    let mut counts = vec![vec![0u64; side]; side];
    for w in walks {
        let a = brute_anonymize(w);
        for k in 1..a.len() {
            counts[a[k - 1] as usize - 1][a[k] as usize - 1] += 1;
        }
    }
    let mut out = Vec::with_capacity(side * side);
    for row in counts {
        let total: u64 = row.iter().sum();
        for c in row {
            out.push(if total == 0 { 0.0 } else { c as f64 / total as f64 });
        }
    }
    out
}
