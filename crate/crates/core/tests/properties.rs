mod common;

use common::*;
use gtpm::corpus::{self, DocumentRecord, PipelineConfig, Vocabulary};
use gtpm::embedding::{self, anonymize_walk, node_embedding, NodeEmbeddings};
use gtpm::graph::{self, WordGraph};
use gtpm::metrics;
use gtpm::persistence::{load_artifact, Artifact};
use gtpm::walker::{self, sample_walk, Walk, WalkConfig, WalkIndex};
use gtpm::Execution;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn token() -> impl Strategy<Value = String> {
    (0u8..8).prop_map(|i| format!("t{i}"))
}

fn sentences() -> impl Strategy<Value = Vec<Vec<String>>> {
    prop::collection::vec(prop::collection::vec(token(), 0..8), 0..4)
}

fn docs() -> impl Strategy<Value = Vec<DocumentRecord>> {
    prop::collection::vec(sentences(), 1..8).prop_map(|all| {
        all.into_iter()
            .enumerate()
            .map(|(i, s)| {
                let joined: Vec<String> = s.iter().map(|t| t.join(" ")).collect();
                let refs: Vec<&str> = joined.iter().map(String::as_str).collect();
                DocumentRecord::from_tokens(&format!("d{i}"), "x", &refs)
            })
            .collect()
    })
}

fn fixed_vocab() -> Vocabulary {
    Vocabulary::from_entries((0..6).map(|i| (format!("t{i}"), 1)).collect())
}

fn edges(n: u32) -> impl Strategy<Value = Vec<(u32, u32, u64)>> {
    prop::collection::vec((0..n, 0..n, 1u64..5), 0..40)
}

fn walk_over(nodes: u32, max_len: usize) -> impl Strategy<Value = Vec<u32>> {
    prop::collection::vec(0..nodes, 1..=max_len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn graph_invariants_hold(ds in docs()) {
        // t6, t7 are out of vocabulary.
        let g = graph::build_graph(&ds, &fixed_vocab());
        prop_assert!(g.check_invariants().is_ok(), "{:?}", g.check_invariants());
        for (a, b, c) in g.edges() {
            prop_assert!(a < b);
            prop_assert_eq!(g.count(b, a), c);
        }
    }

    #[test]
    fn graph_ignores_document_order(ds in docs(), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let mut shuffled = ds.clone();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(graph::build_graph(&ds, &fixed_vocab()), graph::build_graph(&shuffled, &fixed_vocab()));
    }

    #[test]
    fn vocabulary_ids_are_a_permutation(ds in docs()) {
        let cfg = PipelineConfig { min_count: 1, ..Default::default() };
        if let Ok(v) = corpus::build_vocabulary(&ds, &cfg) {
            let mut ids: Vec<u32> = v.words().iter().map(|w| v.id(w).unwrap()).collect();
            ids.sort_unstable();
            prop_assert_eq!(ids, (0..v.len() as u32).collect::<Vec<_>>());
            prop_assert_eq!(corpus::build_vocabulary(&ds, &cfg).unwrap(), v);
        }
    }

    #[test]
    fn anonymize_matches_oracle(w in walk_over(6, 12)) {
        prop_assert_eq!(anonymize_walk(&w).unwrap().0, brute_anonymize(&w));
    }

    #[test]
    fn anonymize_ignores_node_identity(w in walk_over(6, 12), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let mut perm: Vec<u32> = (0..6).map(|i| i * 11 + 3).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let renamed: Vec<u32> = w.iter().map(|&v| perm[v as usize]).collect();
        prop_assert_eq!(anonymize_walk(&w).unwrap(), anonymize_walk(&renamed).unwrap());
    }

    #[test]
    fn node_embedding_matches_oracle(ws in prop::collection::vec(walk_over(5, 6), 1..4)) {
        let m = 5;
        let walks: Vec<Walk> = ws.iter().cloned().map(Walk).collect();
        let got = node_embedding(&walks, m).unwrap();
        prop_assert_eq!(got.len(), (m + 1) * (m + 1));
        prop_assert_eq!(got, brute_embedding(&ws, m));
    }

    #[test]
    fn tpm_rows_are_stochastic(es in edges(12), seed in any::<u64>(), m in 1usize..10, n in 1usize..4) {
        let g = graph_from_edges(12, &es);
        let cfg = WalkConfig { walk_length: m, walks_per_node: n, master_seed: seed };
        let walks = walker::generate_walks(&g, &cfg).unwrap();
        let nodes = NodeEmbeddings::from_walks(&walks, m, Execution::Sequential).unwrap();
        prop_assert_eq!(nodes.dim(), (m + 1) * (m + 1));
        for v in 0..12 {
            for row in nodes.get(v).chunks(m + 1) {
                prop_assert!(row.iter().all(|&p| (0.0..=1.0).contains(&p)));
                let s: f64 = row.iter().sum();
                prop_assert!(s == 0.0 || (s - 1.0).abs() <= 1e-12, "row sum {}", s);
            }
        }
    }

    #[test]
    fn walk_index_reproduces_reference_sampler(es in edges(10), seed in any::<u64>(), steps in 0usize..20) {
        let g = graph_from_edges(10, &es);
        let index = WalkIndex::new(&g);
        for start in 0..10 {
            let mut a = ChaCha8Rng::seed_from_u64(seed ^ start as u64);
            let mut b = a.clone();
            let w = sample_walk(&g, start, steps, &mut a).unwrap();
            prop_assert_eq!(&w, &index.walk(start, steps, &mut b));
            for pair in w.windows(2) {
                prop_assert!(g.count(pair[0], pair[1]) > 0);
            }
            prop_assert!(w.len() == steps + 1 || g.degree(*w.last().unwrap()) == 0);
        }
    }

    #[test]
    fn sequential_and_parallel_walks_agree(es in edges(15), seed in any::<u64>()) {
        let g = graph_from_edges(15, &es);
        let cfg = WalkConfig { walk_length: 7, walks_per_node: 3, master_seed: seed };
        let a = walker::generate_walks_with(&g, &cfg, Execution::Sequential).unwrap();
        let b = walker::generate_walks_with(&g, &cfg, Execution::Parallel).unwrap();
        prop_assert_eq!(a.dump(), b.dump());
    }

    #[test]
    fn document_embedding_ignores_token_order(ds in docs(), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let g = graph::build_graph(&ds, &fixed_vocab());
        let walks = walker::generate_walks(&g, &WalkConfig { walk_length: 4, walks_per_node: 2, master_seed: seed }).unwrap();
        let nodes = NodeEmbeddings::from_walks(&walks, 4, Execution::Sequential).unwrap();
        for d in &ds {
            let mut toks: Vec<&str> = d.tokens().collect();
            toks.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            let joined = toks.join(" ");
            let shuffled = DocumentRecord::from_tokens("s", "x", &[&joined]);
            prop_assert_eq!(
                embedding::embed_document(d, &nodes, g.vocabulary()),
                embedding::embed_document(&shuffled, &nodes, g.vocabulary())
            );
        }
    }

    #[test]
    fn micro_f1_is_accuracy(pairs in prop::collection::vec((0u8..5, 0u8..5), 1..100)) {
        let (p, l): (Vec<u8>, Vec<u8>) = pairs.into_iter().unzip();
        let acc = p.iter().zip(&l).filter(|(a, b)| a == b).count() as f64 / p.len() as f64;
        let r = metrics::evaluate(&p, &l).unwrap();
        prop_assert_eq!(r.micro_f1, acc);
        prop_assert_eq!(r.accuracy, acc);
    }

    #[test]
    fn macro_f1_ignores_class_names(pairs in prop::collection::vec((0u8..5, 0u8..5), 1..100), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let mut names: Vec<u8> = (10..15).collect();
        names.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let (p, l): (Vec<u8>, Vec<u8>) = pairs.into_iter().unzip();
        let rp: Vec<u8> = p.iter().map(|&c| names[c as usize]).collect();
        let rl: Vec<u8> = l.iter().map(|&c| names[c as usize]).collect();
        let a = metrics::macro_f1(&p, &l).unwrap();
        let b = metrics::macro_f1(&rp, &rl).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn normalization_is_idempotent(raw in "[A-Za-z .!?,0-9']{0,80}") {
        let cfg = PipelineConfig::default();
        let once = corpus::normalize_text(&raw, &cfg);
        let rejoined = once.iter().map(|s| s.join(" ")).collect::<Vec<_>>().join(". ");
        prop_assert_eq!(corpus::normalize_text(&rejoined, &cfg), once.clone());
        let stop = corpus::parse_stopwords(corpus::STOPWORDS_EN_V1);
        prop_assert!(once.iter().flatten().all(|t| !stop.contains(t) && !t.is_empty()));
    }

    #[test]
    fn graph_round_trips(es in edges(9)) {
        let g = graph_from_edges(9, &es);
        let bytes = g.encode(42);
        let (back, header) = WordGraph::decode(&bytes).unwrap();
        prop_assert_eq!(header.config_digest, 42);
        prop_assert_eq!(&back, &g);
        prop_assert_eq!(back.encode(42), bytes);
    }

    #[test]
    fn embeddings_round_trip(es in edges(8), seed in any::<u64>()) {
        let g = graph_from_edges(8, &es);
        let d = DocumentRecord::from_tokens("only", "x", &["n0 n1 n2 n7"]);
        let cfg = WalkConfig { walk_length: 3, walks_per_node: 1, master_seed: seed };
        let (table, _) = embedding::embed_corpus(&[d], &g, &cfg, Execution::Sequential).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("e.tsv");
        gtpm::persistence::save_artifact(&table, 7, &path).unwrap();
        let (back, _) = load_artifact::<gtpm::embedding::EmbeddingTable>(&path).unwrap();
        prop_assert_eq!(&back, &table);
        prop_assert_eq!(back.encode(7), std::fs::read(&path).unwrap());
    }
}
