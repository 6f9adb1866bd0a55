//! The universal weighted word graph.
//!
//! Nodes are vocabulary ids. Each undirected edge stores how many times its
//! two words appeared next to each other inside a sentence. Neighbor lists
//! are kept sorted by neighbor id so sampling and serialization are
//! deterministic.

use std::collections::BTreeMap;

use crate::corpus::{DocumentRecord, Vocabulary};
use crate::error::{Error, Result};

/// Counters describing what the builder saw.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BuildStats {
    pub documents: u64,
    /// Adjacent in-sentence pairs that incremented an edge.
    pub pairs_counted: u64,
    /// Token occurrences not in a closed vocabulary.
    pub oov_tokens: u64,
    /// Adjacent pairs skipped because one side was out of vocabulary.
    pub oov_pairs: u64,
    /// Adjacent pairs of the same word ("very very").
    pub self_pairs: u64,
}

#[derive(Clone, Debug)]
pub struct WordGraph {
    vocab: Vocabulary,
    adjacency: Vec<Vec<(u32, u64)>>,
    weighted_degree: Vec<u64>,
    open_vocabulary: bool,
    stats: BuildStats,
}

/// Equality covers vocabulary and edge state; build counters and the
/// open-vocabulary flag are not compared.
impl PartialEq for WordGraph {
    fn eq(&self, other: &Self) -> bool {
        self.vocab == other.vocab
            && self.adjacency == other.adjacency
            && self.weighted_degree == other.weighted_degree
    }
}

impl Eq for WordGraph {}

#[derive(Clone, Debug, PartialEq)]
pub struct TransitionDistribution {
    pub source: u32,
    /// `(neighbor, probability)` in increasing neighbor order.
    pub pairs: Vec<(u32, f64)>,
}

impl TransitionDistribution {
    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn probability(&self, neighbor: u32) -> f64 {
        self.pairs
            .binary_search_by_key(&neighbor, |&(n, _)| n)
            .map(|i| self.pairs[i].1)
            .unwrap_or(0.0)
    }
}

impl WordGraph {
    /// Empty graph over `vocab` (every word an isolated node).
    pub fn new(vocab: Vocabulary) -> Self {
        let n = vocab.len();
        WordGraph {
            vocab,
            adjacency: vec![Vec::new(); n],
            weighted_degree: vec![0; n],
            open_vocabulary: false,
            stats: BuildStats::default(),
        }
    }

    /// Allow [`update_graph`] to add unseen words as new nodes.
    pub fn with_open_vocabulary(mut self, open: bool) -> Self {
        self.open_vocabulary = open;
        self
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Sum of all undirected edge counts.
    pub fn total_weight(&self) -> u64 {
        self.weighted_degree.iter().sum::<u64>() / 2
    }

    pub fn neighbors(&self, node: u32) -> &[(u32, u64)] {
        &self.adjacency[node as usize]
    }

    pub fn degree(&self, node: u32) -> usize {
        self.adjacency[node as usize].len()
    }

    pub fn weighted_degree(&self, node: u32) -> u64 {
        self.weighted_degree[node as usize]
    }

    pub fn count(&self, a: u32, b: u32) -> u64 {
        let Some(list) = self.adjacency.get(a as usize) else { return 0 };
        list.binary_search_by_key(&b, |&(n, _)| n)
            .map(|i| list[i].1)
            .unwrap_or(0)
    }

    pub fn stats(&self) -> &BuildStats {
        &self.stats
    }

    pub fn contains(&self, node: u32) -> bool {
        (node as usize) < self.adjacency.len()
    }

    /// Each undirected edge once, as `(a, b, count)` with `a < b`.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32, u64)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(a, list)| {
            list.iter()
                .filter(move |&&(b, _)| (a as u32) < b)
                .map(move |&(b, c)| (a as u32, b, c))
        })
    }

    /// Adds `by` to the undirected edge `a`-`b`, creating it if needed.
    pub fn add_edge(&mut self, a: u32, b: u32, by: u64) {
        debug_assert_ne!(a, b);
        for (x, y) in [(a, b), (b, a)] {
            let list = &mut self.adjacency[x as usize];
            match list.binary_search_by_key(&y, |&(n, _)| n) {
                Ok(i) => list[i].1 += by,
                Err(i) => list.insert(i, (y, by)),
            }
            self.weighted_degree[x as usize] += by;
        }
    }

    fn ensure_node(&mut self, word: &str) -> u32 {
        let id = self.vocab.get_or_insert(word);
        if id as usize >= self.adjacency.len() {
            self.adjacency.push(Vec::new());
            self.weighted_degree.push(0);
        }
        id
    }

    fn resolve(&mut self, token: &str) -> Option<u32> {
        if self.open_vocabulary {
            let id = self.ensure_node(token);
            self.vocab.bump(id, 1);
            Some(id)
        } else {
            self.vocab.id(token)
        }
    }

    pub(crate) fn set_stats(&mut self, stats: BuildStats) {
        self.stats = stats;
    }

    /// Checks symmetry, absence of self-loops, sorted neighbor lists and the
    /// degree-sum identity. Returns a description of the first violation.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        for (a, list) in self.adjacency.iter().enumerate() {
            let a = a as u32;
            if list.windows(2).any(|w| w[0].0 >= w[1].0) {
                return Err(format!("neighbor list of {a} not strictly increasing"));
            }
            let mut sum = 0u64;
            for &(b, c) in list {
                if b == a {
                    return Err(format!("self-loop on {a}"));
                }
                if c == 0 {
                    return Err(format!("zero count on {a}-{b}"));
                }
                if self.count(b, a) != c {
                    return Err(format!("asymmetric edge {a}-{b}"));
                }
                sum += c;
            }
            if sum != self.weighted_degree[a as usize] {
                return Err(format!("weighted degree of {a} is {} but neighbors sum to {sum}", self.weighted_degree[a as usize]));
            }
        }
        if self.total_weight() != self.stats.pairs_counted {
            return Err(format!(
                "total weight {} != counted pairs {}",
                self.total_weight(),
                self.stats.pairs_counted
            ));
        }
        Ok(())
    }
}

/// Counts adjacent in-sentence word pairs of every document into a fresh
/// graph over `vocab`.
pub fn build_graph<'a, I>(docs: I, vocab: &Vocabulary) -> WordGraph
where
    I: IntoIterator<Item = &'a DocumentRecord>,
{
    let mut graph = WordGraph::new(vocab.clone());
    for doc in docs {
        update_graph(&mut graph, doc);
    }
    graph
}

/// Adds one document's co-occurrences. Existing counts only grow.
pub fn update_graph(graph: &mut WordGraph, doc: &DocumentRecord) {
    graph.stats.documents += 1;
    let mut oov = 0u64;
    for sentence in &doc.sentences {
        let ids: Vec<Option<u32>> = sentence.iter().map(|t| graph.resolve(t)).collect();
        oov += ids.iter().filter(|i| i.is_none()).count() as u64;
        for w in ids.windows(2) {
            match (w[0], w[1]) {
                (Some(a), Some(b)) if a == b => graph.stats.self_pairs += 1,
                (Some(a), Some(b)) => {
                    graph.add_edge(a, b, 1);
                    graph.stats.pairs_counted += 1;
                }
                _ => graph.stats.oov_pairs += 1,
            }
        }
    }
    if oov > 0 {
        log::debug!("document {}: {oov} out-of-vocabulary token(s) skipped", doc.id);
    }
    graph.stats.oov_tokens += oov;
}

/// Normalized neighbor weights `p(j | i) = count(i, j) / weighted_degree(i)`.
/// Isolated nodes give an empty distribution.
pub fn transition_distribution(graph: &WordGraph, node: u32) -> Result<TransitionDistribution> {
    if !graph.contains(node) {
        return Err(Error::UnknownNode { node, nodes: graph.node_count() });
    }
    let total = graph.weighted_degree(node) as f64;
    let pairs = graph
        .neighbors(node)
        .iter()
        .map(|&(j, c)| (j, c as f64 / total))
        .collect();
    Ok(TransitionDistribution { source: node, pairs })
}

/// `(degree, node count)` over unweighted degrees, ascending by degree.
/// Isolated nodes appear with degree 0.
pub fn degree_histogram(graph: &WordGraph) -> Vec<(usize, usize)> {
    let mut hist: BTreeMap<usize, usize> = BTreeMap::new();
    for list in &graph.adjacency {
        *hist.entry(list.len()).or_default() += 1;
    }
    hist.into_iter().collect()
}

/// Least-squares line through `(ln x, ln y)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerLawFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// What the log-log line is fitted to.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TailTarget {
    /// Fraction of nodes with degree >= d. Slope is `1 - alpha`.
    #[default]
    Ccdf,
    /// Raw node count at degree d. Slope is `-alpha`; noisy in the tail.
    Pmf,
}

/// Fits a line in log-log space over histogram entries with
/// `degree >= floor` (and degree > 0). Needs two distinct degrees;
/// returns `None` otherwise.
pub fn power_law_fit(histogram: &[(usize, usize)], floor: usize, target: TailTarget) -> Option<PowerLawFit> {
    let floor = floor.max(1);
    let pts: Vec<(f64, f64)> = match target {
        TailTarget::Pmf => histogram
            .iter()
            .filter(|&&(d, c)| d >= floor && c > 0)
            .map(|&(d, c)| ((d as f64).ln(), (c as f64).ln()))
            .collect(),
        TailTarget::Ccdf => {
            let total: usize = histogram.iter().map(|h| h.1).sum();
            let mut at_least = total;
            let mut pts = Vec::new();
            for &(d, c) in histogram {
                if d >= floor && c > 0 {
                    pts.push(((d as f64).ln(), (at_least as f64 / total as f64).ln()));
                }
                at_least -= c;
            }
            pts
        }
    };
    least_squares(&pts)
}

/// CCDF fit over degrees `>= floor`.
pub fn power_law_tail_fit(histogram: &[(usize, usize)], floor: usize) -> Option<PowerLawFit> {
    power_law_fit(histogram, floor, TailTarget::Ccdf)
}

fn least_squares(pts: &[(f64, f64)]) -> Option<PowerLawFit> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Some(PowerLawFit { slope, intercept, r_squared, points: pts.len() })
}
