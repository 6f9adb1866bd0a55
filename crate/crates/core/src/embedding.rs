//! Anonymous walks, transition probability matrices and document pooling.

use std::collections::BTreeMap;

use ndarray::Array2;

use crate::corpus::{DocumentRecord, Vocabulary};
use crate::error::{Error, Result};
use crate::graph::WordGraph;
use crate::par::{self, Execution};
use crate::persistence;
use crate::walker::{self, Walk, WalkConfig, WalkSet};

/// Walk with node ids replaced by 1-based first-occurrence labels.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AnonymousWalk(pub Vec<u32>);

impl AnonymousWalk {
    pub fn labels(&self) -> &[u32] {
        &self.0
    }

    /// Largest label, i.e. the number of distinct nodes visited.
    pub fn distinct(&self) -> u32 {
        self.0.iter().copied().max().unwrap_or(0)
    }
}

pub fn anonymize_walk(walk: &[u32]) -> Result<AnonymousWalk> {
    if walk.is_empty() {
        return Err(Error::EmptyWalk);
    }
    let mut seen: Vec<u32> = Vec::with_capacity(walk.len());
    let labels = walk
        .iter()
        .map(|&v| match seen.iter().position(|&s| s == v) {
            Some(i) => i as u32 + 1,
            None => {
                seen.push(v);
                seen.len() as u32
            }
        })
        .collect();
    Ok(AnonymousWalk(labels))
}

/// Row-stochastic `side x side` matrix; row `a` holds the distribution of
/// the label following label `a + 1`. Rows without observations stay zero.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionProbabilityMatrix {
    side: usize,
    data: Vec<f64>,
}

impl TransitionProbabilityMatrix {
    /// Pools label transitions of all walks, then normalizes each nonzero row.
    pub fn from_anonymous_walks(walks: &[AnonymousWalk], side: usize) -> Result<Self> {
        let mut counts = vec![0u64; side * side];
        for w in walks {
            if w.0.len() > side {
                return Err(Error::DimensionMismatch { expected: side, got: w.0.len() });
            }
            for pair in w.0.windows(2) {
                let (a, b) = (pair[0] as usize - 1, pair[1] as usize - 1);
                counts[a * side + b] += 1;
            }
        }
        let mut data = vec![0.0; side * side];
        for r in 0..side {
            let row = &counts[r * side..(r + 1) * side];
            let total: u64 = row.iter().sum();
            if total > 0 {
                for (dst, &c) in data[r * side..(r + 1) * side].iter_mut().zip(row) {
                    *dst = c as f64 / total as f64;
                }
            }
        }
        Ok(TransitionProbabilityMatrix { side, data })
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn get(&self, from_label: usize, to_label: usize) -> f64 {
        self.data[(from_label - 1) * self.side + (to_label - 1)]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.side..(r + 1) * self.side]
    }

    /// Row-major flattening.
    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }
}

/// Node signature: flattened TPM of the node's pooled anonymous walks.
/// A node whose walks never leave it gets the zero vector.
pub fn node_embedding(walks: &[Walk], walk_length: usize) -> Result<Vec<f64>> {
    if walks.is_empty() {
        return Err(Error::Config("node_embedding needs at least one walk".into()));
    }
    let anon = walks
        .iter()
        .map(|w| anonymize_walk(w))
        .collect::<Result<Vec<_>>>()?;
    Ok(TransitionProbabilityMatrix::from_anonymous_walks(&anon, walk_length + 1)?.into_vec())
}

/// Embeddings of every graph node, row-major by node id.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeEmbeddings {
    dim: usize,
    data: Vec<f64>,
}

impl NodeEmbeddings {
    pub fn from_walks(walks: &WalkSet, walk_length: usize, exec: Execution) -> Result<Self> {
        let dim = (walk_length + 1) * (walk_length + 1);
        let rows = par::map_range(walks.node_count(), exec, |v| node_embedding(walks.for_node(v as u32), walk_length));
        let mut data = Vec::with_capacity(rows.len() * dim);
        for r in rows {
            data.extend(r?);
        }
        Ok(NodeEmbeddings { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn get(&self, node: u32) -> &[f64] {
        &self.data[node as usize * self.dim..(node as usize + 1) * self.dim]
    }
}

/// Mean of node embeddings over in-vocabulary token occurrences. Tokens are
/// tallied per word id first, so the result does not depend on token order.
/// Returns the vector and the number of in-vocabulary occurrences; zero
/// occurrences yield the zero vector.
pub fn embed_document(doc: &DocumentRecord, nodes: &NodeEmbeddings, vocab: &Vocabulary) -> (Vec<f64>, u64) {
    let mut tally: BTreeMap<u32, u64> = BTreeMap::new();
    for t in doc.tokens() {
        if let Some(id) = vocab.id(t) {
            if (id as usize) < nodes.len() {
                *tally.entry(id).or_default() += 1;
            }
        }
    }
    let mut acc = vec![0.0; nodes.dim()];
    let total: u64 = tally.values().sum();
    if total == 0 {
        return (acc, 0);
    }
    for (&id, &c) in &tally {
        let c = c as f64;
        for (a, &x) in acc.iter_mut().zip(nodes.get(id)) {
            *a += c * x;
        }
    }
    let total_f = total as f64;
    acc.iter_mut().for_each(|a| *a /= total_f);
    (acc, total)
}

/// Document embeddings plus the parameters that produced them.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingTable {
    pub walk_length: usize,
    pub walks_per_node: usize,
    pub seed: u64,
    pub graph_digest: u64,
    pub dim: usize,
    pub ids: Vec<String>,
    /// Row-major, `ids.len() * dim`.
    pub data: Vec<f64>,
}

impl EmbeddingTable {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id)
    }

    pub fn rows(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.ids.iter().map(String::as_str).zip(self.data.chunks(self.dim.max(1)))
    }

    /// Copy as a `len x dim` matrix.
    pub fn matrix(&self) -> Array2<f64> {
        Array2::from_shape_vec((self.len(), self.dim), self.data.clone()).expect("table shape")
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct EmbedReport {
    /// Documents without any in-vocabulary token (zero vectors).
    pub zero_documents: Vec<String>,
    pub tokens: u64,
    pub oov_tokens: u64,
}

impl EmbedReport {
    pub fn oov_rate(&self) -> f64 {
        if self.tokens == 0 {
            0.0
        } else {
            self.oov_tokens as f64 / self.tokens as f64
        }
    }
}

/// Embeds documents with precomputed node embeddings.
pub fn embed_documents(
    docs: &[DocumentRecord],
    nodes: &NodeEmbeddings,
    graph: &WordGraph,
    cfg: &WalkConfig,
    exec: Execution,
) -> (EmbeddingTable, EmbedReport) {
    let vocab = graph.vocabulary();
    let rows = par::map_slice(docs, exec, |d| embed_document(d, nodes, vocab));
    let mut report = EmbedReport::default();
    let mut data = Vec::with_capacity(docs.len() * nodes.dim());
    for (doc, (vec, hits)) in docs.iter().zip(rows) {
        let n = doc.token_count() as u64;
        report.tokens += n;
        report.oov_tokens += n - hits;
        if hits == 0 {
            report.zero_documents.push(doc.id.clone());
        }
        data.extend(vec);
    }
    if !report.zero_documents.is_empty() {
        log::warn!("{} document(s) have no in-vocabulary token; embedded as zero vectors", report.zero_documents.len());
    }
    let table = EmbeddingTable {
        walk_length: cfg.walk_length,
        walks_per_node: cfg.walks_per_node,
        seed: cfg.master_seed,
        graph_digest: persistence::graph_digest(graph),
        dim: nodes.dim(),
        ids: docs.iter().map(|d| d.id.clone()).collect(),
        data,
    };
    (table, report)
}

/// walks -> node embeddings -> document embeddings.
pub fn embed_corpus(
    docs: &[DocumentRecord],
    graph: &WordGraph,
    cfg: &WalkConfig,
    exec: Execution,
) -> Result<(EmbeddingTable, EmbedReport)> {
    let walks = walker::generate_walks_with(graph, cfg, exec)?;
    let nodes = NodeEmbeddings::from_walks(&walks, cfg.walk_length, exec)?;
    Ok(embed_documents(docs, &nodes, graph, cfg, exec))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn anon(v: &[u32]) -> AnonymousWalk {
        AnonymousWalk(v.to_vec())
    }

    #[test]
    fn anonymize_examples() {
        // w3 w5 w4 w5
        assert_eq!(anonymize_walk(&[2, 4, 3, 4]).unwrap(), anon(&[1, 2, 3, 2]));
        assert_eq!(anonymize_walk(&[7, 9, 7, 1]).unwrap(), anon(&[1, 2, 1, 3]));
        assert_eq!(anonymize_walk(&[0]).unwrap(), anon(&[1]));
        assert!(matches!(anonymize_walk(&[]), Err(Error::EmptyWalk)));
    }

    #[test]
    fn pooled_tpm_example() {
        let tpm =
            TransitionProbabilityMatrix::from_anonymous_walks(&[anon(&[1, 2, 1, 3]), anon(&[1, 2, 3, 2])], 4).unwrap();
        assert_eq!(tpm.row(0), &[0.0, 2.0 / 3.0, 1.0 / 3.0, 0.0]);
        assert_eq!(tpm.row(1), &[0.5, 0.0, 0.5, 0.0]);
        assert_eq!(tpm.row(2), &[0.0, 1.0, 0.0, 0.0]);
        assert_eq!(tpm.row(3), &[0.0; 4]);
        assert_eq!(tpm.get(1, 2), 2.0 / 3.0);
    }

    #[test]
    fn single_transition_and_sentinel() {
        assert_eq!(node_embedding(&[Walk(vec![5, 6])], 1).unwrap(), vec![0.0, 1.0, 0.0, 0.0]);
        assert_eq!(node_embedding(&[Walk(vec![5])], 3).unwrap(), vec![0.0; 16]);
        assert!(node_embedding(&[], 3).is_err());
        assert!(node_embedding(&[Walk(vec![1, 2, 3])], 1).is_err());
    }

    fn nodes2() -> (NodeEmbeddings, Vocabulary) {
        let v = Vocabulary::from_entries(vec![("u".into(), 1), ("v".into(), 1)]);
        (NodeEmbeddings { dim: 4, data: vec![0.0, 1.0, 0.5, 0.25, 1.0, 0.0, 0.125, 0.75] }, v)
    }

    #[test]
    fn document_pooling() {
        let (nodes, vocab) = nodes2();
        let one = DocumentRecord::from_tokens("a", "x", &["u zz"]);
        assert_eq!(embed_document(&one, &nodes, &vocab), (nodes.get(0).to_vec(), 1));
        let twice = DocumentRecord::from_tokens("b", "x", &["u", "u"]);
        assert_eq!(embed_document(&twice, &nodes, &vocab).0, nodes.get(0));
        let both = DocumentRecord::from_tokens("c", "x", &["v u"]);
        let want: Vec<f64> = nodes.get(0).iter().zip(nodes.get(1)).map(|(a, b)| (a + b) / 2.0).collect();
        assert_eq!(embed_document(&both, &nodes, &vocab).0, want);
        let none = DocumentRecord::from_tokens("d", "x", &["zz"]);
        assert_eq!(embed_document(&none, &nodes, &vocab), (vec![0.0; 4], 0));
    }
}
