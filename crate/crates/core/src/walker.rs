//! Weighted random walks on a frozen word graph.
//!
//! Step semantics: from node `i` draw `r` uniformly from
//! `0..weighted_degree(i)` and move to the first neighbor (in id order)
//! whose running count sum exceeds `r`. This is exact inverse-CDF sampling
//! of `count(i, j) / weighted_degree(i)` in integer arithmetic.
//!
//! Walk `(v, k)` draws from its own ChaCha8 stream seeded with
//! [`seed::walk_seed`]`(master_seed, v, k)`, so output does not depend on
//! scheduling.

use std::fmt::Write as _;
use std::ops::Deref;

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::WordGraph;
use crate::par::{self, Execution};
use crate::seed;

/// Average document length (tokens) at or above which one walk per node is
/// the default; shorter documents default to four.
pub const LONG_DOCUMENT_TOKENS: f64 = 40.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WalkConfig {
    /// Steps per walk; a full walk visits `walk_length + 1` nodes.
    pub walk_length: usize,
    pub walks_per_node: usize,
    pub master_seed: u64,
}

impl Default for WalkConfig {
    fn default() -> Self {
        WalkConfig { walk_length: 15, walks_per_node: 1, master_seed: 0 }
    }
}

impl WalkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.walk_length < 1 {
            return Err(Error::Config("walk_length must be >= 1".into()));
        }
        if self.walks_per_node < 1 {
            return Err(Error::Config("walks_per_node must be >= 1".into()));
        }
        Ok(())
    }

    pub fn default_walks_per_node(avg_document_tokens: f64) -> usize {
        if avg_document_tokens >= LONG_DOCUMENT_TOKENS {
            1
        } else {
            4
        }
    }

    /// Embedding side `walk_length + 1`.
    pub fn tpm_side(&self) -> usize {
        self.walk_length + 1
    }
}

/// Node ids visited by one walk, starting node first.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Walk(pub Vec<u32>);

impl Deref for Walk {
    type Target = [u32];
    fn deref(&self) -> &[u32] {
        &self.0
    }
}

impl From<Vec<u32>> for Walk {
    fn from(v: Vec<u32>) -> Self {
        Walk(v)
    }
}

/// Picks the neighbor for draw `r` by a linear scan of the cumulative counts.
fn pick_linear(neighbors: &[(u32, u64)], r: u64) -> u32 {
    let mut acc = 0u64;
    for &(j, c) in neighbors {
        acc += c;
        if r < acc {
            return j;
        }
    }
    unreachable!("draw {r} beyond total weight {acc}")
}

/// Reference walk sampler.
pub fn sample_walk<R: Rng + ?Sized>(graph: &WordGraph, start: u32, steps: usize, rng: &mut R) -> Result<Walk> {
    if !graph.contains(start) {
        return Err(Error::UnknownNode { node: start, nodes: graph.node_count() });
    }
    let mut walk = Vec::with_capacity(steps + 1);
    walk.push(start);
    let mut cur = start;
    for _ in 0..steps {
        let total = graph.weighted_degree(cur);
        if total == 0 {
            break;
        }
        let r = rng.random_range(0..total);
        cur = pick_linear(graph.neighbors(cur), r);
        walk.push(cur);
    }
    Ok(Walk(walk))
}

/// Compressed cumulative-count index for fast sampling; produces exactly
/// the same walks as [`sample_walk`].
#[derive(Clone, Debug)]
pub struct WalkIndex {
    offsets: Vec<usize>,
    targets: Vec<u32>,
    cumulative: Vec<u64>,
}

impl WalkIndex {
    pub fn new(graph: &WordGraph) -> Self {
        let n = graph.node_count();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::new();
        let mut cumulative = Vec::new();
        offsets.push(0);
        for v in 0..n as u32 {
            let mut acc = 0u64;
            for &(j, c) in graph.neighbors(v) {
                acc += c;
                targets.push(j);
                cumulative.push(acc);
            }
            offsets.push(targets.len());
        }
        WalkIndex { offsets, targets, cumulative }
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    fn step<R: Rng + ?Sized>(&self, cur: u32, rng: &mut R) -> Option<u32> {
        let (lo, hi) = (self.offsets[cur as usize], self.offsets[cur as usize + 1]);
        if lo == hi {
            return None;
        }
        let cum = &self.cumulative[lo..hi];
        let r = rng.random_range(0..cum[cum.len() - 1]);
        // first position with cum > r
        let pos = cum.partition_point(|&c| c <= r);
        Some(self.targets[lo + pos])
    }

    pub fn walk<R: Rng + ?Sized>(&self, start: u32, steps: usize, rng: &mut R) -> Walk {
        let mut walk = Vec::with_capacity(steps + 1);
        walk.push(start);
        let mut cur = start;
        for _ in 0..steps {
            match self.step(cur, rng) {
                Some(next) => {
                    walk.push(next);
                    cur = next;
                }
                None => break,
            }
        }
        Walk(walk)
    }
}

/// All walks of a run, node-major: walk `k` of node `v` is at `v * n + k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WalkSet {
    walks_per_node: usize,
    walks: Vec<Walk>,
}

impl WalkSet {
    pub fn walks_per_node(&self) -> usize {
        self.walks_per_node
    }

    pub fn node_count(&self) -> usize {
        self.walks.len() / self.walks_per_node.max(1)
    }

    pub fn for_node(&self, node: u32) -> &[Walk] {
        let n = self.walks_per_node;
        &self.walks[node as usize * n..(node as usize + 1) * n]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Walk> {
        self.walks.iter()
    }

    pub fn len(&self) -> usize {
        self.walks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.walks.is_empty()
    }

    /// One line per walk, node ids separated by single spaces.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for w in &self.walks {
            for (i, v) in w.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                let _ = write!(out, "{v}");
            }
            out.push('\n');
        }
        out
    }
}

/// `walks_per_node` walks from every node of the graph.
pub fn generate_walks(graph: &WordGraph, cfg: &WalkConfig) -> Result<WalkSet> {
    generate_walks_with(graph, cfg, Execution::Parallel)
}

pub fn generate_walks_with(graph: &WordGraph, cfg: &WalkConfig, exec: Execution) -> Result<WalkSet> {
    cfg.validate()?;
    let index = WalkIndex::new(graph);
    let n = cfg.walks_per_node;
    let walks = par::map_range(index.node_count() * n, exec, |i| {
        let (v, k) = ((i / n) as u32, (i % n) as u32);
        let mut rng = seed::rng(seed::walk_seed(cfg.master_seed, v, k), &[]);
        index.walk(v, cfg.walk_length, &mut rng)
    });
    Ok(WalkSet { walks_per_node: n, walks })
}
