//! On-disk artifacts and the format version registry.
//!
//! | artifact   | encoding | first line / magic                               |
//! |------------|----------|--------------------------------------------------|
//! | graph      | UTF-8    | `#gtpm-graph v1 nodes=<V> edges=<E>`             |
//! | embeddings | UTF-8    | `#gtpm-embeddings v1 m=.. n=.. seed=.. graph=..` |
//! | model      | binary   | `GTPMMODL` + u32 LE version                      |
//!
//! Every artifact carries a 64-bit content digest (first 8 bytes of SHA-256,
//! big-endian) that is verified on load, and the digest of the pipeline
//! configuration that produced it. Floats in text formats use Rust's
//! shortest round-trip representation; binary floats are little-endian
//! IEEE-754 doubles.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2};
use sha2::{Digest, Sha256};

use crate::classifier::{Dense, MlpModel, OutputKind, TrainConfig};
use crate::corpus::Vocabulary;
use crate::embedding::EmbeddingTable;
use crate::error::{Error, Result};
use crate::graph::{BuildStats, WordGraph};

pub const GRAPH_FORMAT: &str = "gtpm-graph";
pub const GRAPH_VERSION: u32 = 1;
pub const EMBEDDING_FORMAT: &str = "gtpm-embeddings";
pub const EMBEDDING_VERSION: u32 = 1;
pub const MODEL_FORMAT: &str = "gtpm-model";
pub const MODEL_MAGIC: &[u8; 8] = b"GTPMMODL";
pub const MODEL_VERSION: u32 = 1;

pub fn digest64(bytes: &[u8]) -> u64 {
    let h = Sha256::digest(bytes);
    u64::from_be_bytes(h[..8].try_into().expect("8 bytes"))
}

/// Digest of an arbitrary canonical configuration string.
pub fn config_digest(canonical: &str) -> u64 {
    digest64(canonical.as_bytes())
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ArtifactHeader {
    pub format: String,
    pub version: u32,
    pub digest: u64,
    pub config_digest: u64,
    pub params: BTreeMap<String, String>,
}

impl ArtifactHeader {
    pub fn param(&self, key: &str) -> Option<&str> {
        self.params.get(key).map(String::as_str)
    }
}

pub trait Artifact: Sized {
    const FORMAT: &'static str;
    const VERSION: u32;
    fn encode(&self, config_digest: u64) -> Vec<u8>;
    fn decode(bytes: &[u8]) -> Result<(Self, ArtifactHeader)>;
}

/// Writes the artifact and returns its content digest.
pub fn save_artifact<A: Artifact>(artifact: &A, config_digest: u64, path: &Path) -> Result<u64> {
    let bytes = artifact.encode(config_digest);
    let (_, header) = A::decode(&bytes)?;
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, &bytes).map_err(|e| Error::io(path, e))?;
    Ok(header.digest)
}

pub fn load_artifact<A: Artifact>(path: &Path) -> Result<(A, ArtifactHeader)> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    A::decode(&bytes)
}

/// Hard error when a downstream artifact was built from a different upstream.
pub fn check_chain(what: &str, expected: u64, found: u64) -> Result<()> {
    if expected != found {
        return Err(Error::DigestMismatch { what: what.to_string(), expected, found });
    }
    Ok(())
}

fn hex(v: u64) -> String {
    format!("{v:016x}")
}

fn parse_hex(format: &'static str, s: &str) -> Result<u64> {
    u64::from_str_radix(s, 16).map_err(|_| Error::Truncated { format, detail: format!("bad digest {s:?}") })
}

/// Parses `#<format> v<version> key=value ...`.
fn parse_text_header(format: &'static str, supported: u32, line: &str) -> Result<(u32, BTreeMap<String, String>)> {
    let trunc = |d: &str| Error::Truncated { format, detail: d.to_string() };
    let mut parts = line.split_whitespace();
    let tag = parts.next().ok_or_else(|| trunc("missing header"))?;
    if tag != format!("#{format}") {
        return Err(trunc(&format!("expected #{format} header, found {tag:?}")));
    }
    let v = parts.next().ok_or_else(|| trunc("missing version"))?;
    let version: u32 = v
        .strip_prefix('v')
        .and_then(|n| n.parse().ok())
        .ok_or_else(|| trunc(&format!("bad version {v:?}")))?;
    if version != supported {
        return Err(Error::Version { format, found: v.to_string(), supported });
    }
    let params = parts
        .filter_map(|kv| kv.split_once('='))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect();
    Ok((version, params))
}

fn required<'a>(format: &'static str, params: &'a BTreeMap<String, String>, key: &str) -> Result<&'a str> {
    params
        .get(key)
        .map(String::as_str)
        .ok_or_else(|| Error::Truncated { format, detail: format!("header lacks {key}") })
}

fn parse_num<T: std::str::FromStr>(format: &'static str, s: &str, what: &str) -> Result<T> {
    s.parse().map_err(|_| Error::Truncated { format, detail: format!("bad {what} {s:?}") })
}

/// Splits text into (first line, second line, rest) on '\n'.
fn split_header<'a>(format: &'static str, bytes: &'a [u8]) -> Result<(&'a str, &'a str, &'a str)> {
    let text = std::str::from_utf8(bytes).map_err(|_| Error::Truncated { format, detail: "not UTF-8".into() })?;
    let (first, rest) = text
        .split_once('\n')
        .ok_or_else(|| Error::Truncated { format, detail: "missing header line".into() })?;
    let (second, body) = rest
        .split_once('\n')
        .ok_or_else(|| Error::Truncated { format, detail: "missing digest line".into() })?;
    Ok((first, second, body))
}

// ---- graph -------------------------------------------------------------

fn graph_body(graph: &WordGraph) -> String {
    let vocab = graph.vocabulary();
    let mut out = String::new();
    for (id, w) in vocab.words().iter().enumerate() {
        let _ = writeln!(out, "#node\t{w}\t{}", vocab.count(id as u32));
    }
    let mut edges: Vec<(&str, &str, u64)> = graph
        .edges()
        .map(|(a, b, c)| {
            let (wa, wb) = (vocab.word(a), vocab.word(b));
            if wa < wb {
                (wa, wb, c)
            } else {
                (wb, wa, c)
            }
        })
        .collect();
    edges.sort_unstable();
    for (a, b, c) in edges {
        let _ = writeln!(out, "{a}\t{b}\t{c}");
    }
    out
}

/// Content digest of a graph, as recorded in its file.
pub fn graph_digest(graph: &WordGraph) -> u64 {
    digest64(graph_body(graph).as_bytes())
}

/// Identifies how a set of document vectors was produced: the graph plus
/// the walk parameters. Models store it so they are only applied to
/// compatible features.
pub fn feature_digest(table: &EmbeddingTable) -> u64 {
    config_digest(&format!(
        "graph={:016x};walk_length={};walks_per_node={};seed={};dim={}",
        table.graph_digest, table.walk_length, table.walks_per_node, table.seed, table.dim
    ))
}

impl Artifact for WordGraph {
    const FORMAT: &'static str = GRAPH_FORMAT;
    const VERSION: u32 = GRAPH_VERSION;

    fn encode(&self, config_digest: u64) -> Vec<u8> {
        let body = graph_body(self);
        format!(
            "#{GRAPH_FORMAT} v{GRAPH_VERSION} nodes={} edges={}\n#digest={} config={}\n{body}",
            self.node_count(),
            self.edge_count(),
            hex(digest64(body.as_bytes())),
            hex(config_digest)
        )
        .into_bytes()
    }

    fn decode(bytes: &[u8]) -> Result<(Self, ArtifactHeader)> {
        const F: &str = GRAPH_FORMAT;
        let trunc = |d: String| Error::Truncated { format: F, detail: d };
        let (first, second, body) = split_header(F, bytes)?;
        let (version, mut params) = parse_text_header(F, GRAPH_VERSION, first)?;
        let nodes: usize = parse_num(F, required(F, &params, "nodes")?, "node count")?;
        let edges: usize = parse_num(F, required(F, &params, "edges")?, "edge count")?;
        let meta: BTreeMap<String, String> = second
            .trim_start_matches('#')
            .split_whitespace()
            .filter_map(|kv| kv.split_once('='))
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        let digest = parse_hex(F, required(F, &meta, "digest")?)?;
        let config = parse_hex(F, required(F, &meta, "config")?)?;
        let found = digest64(body.as_bytes());
        check_chain("graph content", digest, found)?;

        let mut entries = Vec::with_capacity(nodes);
        let mut edge_lines = Vec::with_capacity(edges);
        for (i, line) in body.lines().enumerate() {
            let cols: Vec<&str> = line.split('\t').collect();
            if let Some(tag) = cols.first().filter(|c| c.starts_with('#')) {
                if *tag != "#node" || cols.len() != 3 {
                    return Err(trunc(format!("bad node line {}", i + 3)));
                }
                entries.push((cols[1].to_string(), parse_num::<u64>(F, cols[2], "frequency")?));
            } else {
                if cols.len() != 3 {
                    return Err(trunc(format!("bad edge line {}", i + 3)));
                }
                edge_lines.push((cols[0], cols[1], parse_num::<u64>(F, cols[2], "count")?));
            }
        }
        if entries.len() != nodes || edge_lines.len() != edges {
            return Err(trunc(format!(
                "header promises {nodes} nodes / {edges} edges, found {} / {}",
                entries.len(),
                edge_lines.len()
            )));
        }
        let vocab = Vocabulary::from_entries(entries);
        let mut graph = WordGraph::new(vocab);
        for (a, b, c) in edge_lines {
            let lookup = |w: &str| graph.vocabulary().id(w).ok_or_else(|| trunc(format!("edge names unknown word {w:?}")));
            let (ia, ib) = (lookup(a)?, lookup(b)?);
            if ia == ib || c == 0 {
                return Err(trunc(format!("invalid edge {a}-{b}")));
            }
            graph.add_edge(ia, ib, c);
        }
        let total = graph.total_weight();
        graph.set_stats(BuildStats { pairs_counted: total, ..Default::default() });
        params.insert("digest".into(), hex(digest));
        Ok((graph, ArtifactHeader { format: F.into(), version, digest, config_digest: config, params }))
    }
}

// ---- embeddings --------------------------------------------------------

fn embedding_body(t: &EmbeddingTable) -> String {
    let mut out = String::from("id");
    for i in 0..t.dim {
        let _ = write!(out, "\tv{i}");
    }
    out.push('\n');
    for (id, row) in t.rows() {
        out.push_str(id);
        for v in row {
            let _ = write!(out, "\t{v}");
        }
        out.push('\n');
    }
    out
}

impl Artifact for EmbeddingTable {
    const FORMAT: &'static str = EMBEDDING_FORMAT;
    const VERSION: u32 = EMBEDDING_VERSION;

    fn encode(&self, config_digest: u64) -> Vec<u8> {
        let body = embedding_body(self);
        format!(
            "#{EMBEDDING_FORMAT} v{EMBEDDING_VERSION} m={} n={} seed={} graph={} dim={} rows={}\n#digest={} config={}\n{body}",
            self.walk_length,
            self.walks_per_node,
            self.seed,
            hex(self.graph_digest),
            self.dim,
            self.len(),
            hex(digest64(body.as_bytes())),
            hex(config_digest),
        )
        .into_bytes()
    }

    fn decode(bytes: &[u8]) -> Result<(Self, ArtifactHeader)> {
        const F: &str = EMBEDDING_FORMAT;
        let trunc = |d: String| Error::Truncated { format: F, detail: d };
        let (first, second, body) = split_header(F, bytes)?;
        let (version, params) = parse_text_header(F, EMBEDDING_VERSION, first)?;
        let meta: BTreeMap<String, String> = second
            .trim_start_matches('#')
            .split_whitespace()
            .filter_map(|kv| kv.split_once('='))
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        let digest = parse_hex(F, required(F, &meta, "digest")?)?;
        let config = parse_hex(F, required(F, &meta, "config")?)?;
        check_chain("embedding content", digest, digest64(body.as_bytes()))?;

        let dim: usize = parse_num(F, required(F, &params, "dim")?, "dim")?;
        let rows: usize = parse_num(F, required(F, &params, "rows")?, "rows")?;
        let mut lines = body.lines();
        let cols = lines.next().ok_or_else(|| trunc("missing column header".into()))?;
        if cols.split('\t').count() != dim + 1 {
            return Err(trunc("column header does not match dim".into()));
        }
        let mut ids = Vec::with_capacity(rows);
        let mut data = Vec::with_capacity(rows * dim);
        for (i, line) in lines.enumerate() {
            let mut it = line.split('\t');
            ids.push(it.next().unwrap_or_default().to_string());
            let before = data.len();
            for v in it {
                data.push(parse_num::<f64>(F, v, "value")?);
            }
            if data.len() - before != dim {
                return Err(trunc(format!("row {} has {} values, expected {dim}", i + 1, data.len() - before)));
            }
        }
        if ids.len() != rows {
            return Err(trunc(format!("header promises {rows} rows, found {}", ids.len())));
        }
        let table = EmbeddingTable {
            walk_length: parse_num(F, required(F, &params, "m")?, "m")?,
            walks_per_node: parse_num(F, required(F, &params, "n")?, "n")?,
            seed: parse_num(F, required(F, &params, "seed")?, "seed")?,
            graph_digest: parse_hex(F, required(F, &params, "graph")?)?,
            dim,
            ids,
            data,
        };
        Ok((table, ArtifactHeader { format: F.into(), version, digest, config_digest: config, params }))
    }
}

// ---- model -------------------------------------------------------------

fn model_meta(m: &MlpModel, config_digest: u64) -> String {
    let c = &m.config;
    let sizes = m.layer_sizes().iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",");
    let classes = serde_json::to_string(&m.classes).expect("strings serialize");
    format!(
        "layers={sizes}\nhidden_activation=relu\noutput_activation={}\nclasses={classes}\nconfig={}\nlearning_rate={}\ndropout={}\nbatch_size={}\npatience={}\nmax_epochs={}\nvalidation_fraction={}\nseed={}\n",
        m.output.tag(),
        hex(config_digest),
        c.learning_rate,
        c.dropout,
        c.batch_size,
        c.patience,
        c.max_epochs,
        c.validation_fraction,
        c.seed
    )
}

impl Artifact for MlpModel {
    const FORMAT: &'static str = MODEL_FORMAT;
    const VERSION: u32 = MODEL_VERSION;

    fn encode(&self, config_digest: u64) -> Vec<u8> {
        let meta = model_meta(self, config_digest);
        let mut out = Vec::new();
        out.extend_from_slice(MODEL_MAGIC);
        out.extend_from_slice(&MODEL_VERSION.to_le_bytes());
        out.extend_from_slice(&(meta.len() as u32).to_le_bytes());
        out.extend_from_slice(meta.as_bytes());
        out.extend_from_slice(&(self.parameter_count() as u64).to_le_bytes());
        for l in &self.layers {
            for v in l.weights.iter().chain(l.bias.iter()) {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        let d = digest64(&out);
        out.extend_from_slice(&d.to_le_bytes());
        out
    }

    fn decode(bytes: &[u8]) -> Result<(Self, ArtifactHeader)> {
        const F: &str = MODEL_FORMAT;
        let trunc = |d: &str| Error::Truncated { format: F, detail: d.to_string() };
        if bytes.len() < 16 + 8 + 8 || &bytes[..8] != MODEL_MAGIC {
            return Err(trunc("missing magic or too short"));
        }
        let version = u32::from_le_bytes(bytes[8..12].try_into().expect("4"));
        if version != MODEL_VERSION {
            return Err(Error::Version { format: F, found: version.to_string(), supported: MODEL_VERSION });
        }
        let (payload, tail) = bytes.split_at(bytes.len() - 8);
        let stored = u64::from_le_bytes(tail.try_into().expect("8"));
        let meta_len = u32::from_le_bytes(bytes[12..16].try_into().expect("4")) as usize;
        if 16 + meta_len + 8 > payload.len() {
            return Err(trunc("metadata runs past end of file"));
        }
        let meta = std::str::from_utf8(&bytes[16..16 + meta_len]).map_err(|_| trunc("metadata not UTF-8"))?;
        let kv: BTreeMap<String, String> = meta
            .lines()
            .filter_map(|l| l.split_once('='))
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        let get = |k: &str| required(F, &kv, k);
        let sizes: Vec<usize> = get("layers")?
            .split(',')
            .map(|s| parse_num(F, s, "layer size"))
            .collect::<Result<_>>()?;
        let params_at = 16 + meta_len;
        let count = u64::from_le_bytes(payload[params_at..params_at + 8].try_into().expect("8")) as usize;
        let expected: usize = sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum();
        if count != expected || payload.len() != params_at + 8 + count * 8 {
            return Err(trunc("parameter block length does not match layer sizes"));
        }
        check_chain("model content", stored, digest64(payload))?;

        let output = match get("output_activation")? {
            "sigmoid" => OutputKind::Logistic,
            "softmax" => OutputKind::Softmax,
            other => return Err(trunc(&format!("unknown output activation {other:?}"))),
        };
        let classes: Vec<String> = serde_json::from_str(get("classes")?).map_err(|_| trunc("bad class list"))?;
        let mut values = payload[params_at + 8..]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8")));
        let layers = sizes
            .windows(2)
            .map(|w| {
                let weights = Array2::from_shape_vec((w[0], w[1]), values.by_ref().take(w[0] * w[1]).collect())
                    .expect("length checked");
                let bias = Array1::from_iter(values.by_ref().take(w[1]));
                Dense { weights, bias }
            })
            .collect();
        let config = TrainConfig {
            learning_rate: parse_num(F, get("learning_rate")?, "learning_rate")?,
            dropout: parse_num(F, get("dropout")?, "dropout")?,
            batch_size: parse_num(F, get("batch_size")?, "batch_size")?,
            patience: parse_num(F, get("patience")?, "patience")?,
            max_epochs: parse_num(F, get("max_epochs")?, "max_epochs")?,
            validation_fraction: parse_num(F, get("validation_fraction")?, "validation_fraction")?,
            hidden: sizes[1..sizes.len() - 1].to_vec(),
            seed: parse_num(F, get("seed")?, "seed")?,
        };
        let config_digest = parse_hex(F, get("config")?)?;
        let model = MlpModel { layers, output, classes, config };
        Ok((model, ArtifactHeader { format: F.into(), version, digest: stored, config_digest, params: kv }))
    }
}
