//! Labeled corpora: loading, text normalization and the frequency-filtered
//! vocabulary.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::{self, Execution};
use crate::stem::porter_stem;

/// Versioned English stopword list shipped with the crate.
pub const STOPWORDS_EN_V1: &str = include_str!("../data/stopwords_en_v1.txt");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

impl FromStr for Split {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "train" | "training" => Ok(Split::Train),
            "test" | "testing" => Ok(Split::Test),
            other => Err(format!("unknown split {other:?}")),
        }
    }
}

/// One labeled document. `sentences` is empty until [`normalize_document`] runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DocumentRecord {
    pub id: String,
    pub label: String,
    pub raw_text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<Split>,
    #[serde(default)]
    pub sentences: Vec<Vec<String>>,
}

impl DocumentRecord {
    pub fn new(id: impl Into<String>, label: impl Into<String>, raw_text: impl Into<String>) -> Self {
        DocumentRecord {
            id: id.into(),
            label: label.into(),
            raw_text: raw_text.into(),
            split: None,
            sentences: Vec::new(),
        }
    }

    /// Builds an already-tokenized record; sentences are whitespace-split.
    pub fn from_tokens(id: &str, label: &str, sentences: &[&str]) -> Self {
        let sentences: Vec<Vec<String>> = sentences
            .iter()
            .map(|s| s.split_whitespace().map(str::to_string).collect::<Vec<_>>())
            .filter(|s| !s.is_empty())
            .collect();
        let raw_text = sentences
            .iter()
            .map(|s| s.join(" "))
            .collect::<Vec<_>>()
            .join(". ");
        DocumentRecord {
            id: id.to_string(),
            label: label.to_string(),
            raw_text,
            split: None,
            sentences,
        }
    }

    pub fn with_split(mut self, split: Split) -> Self {
        self.split = Some(split);
        self
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.sentences.iter().flatten().map(String::as_str)
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(Vec::len).sum()
    }

    /// True when normalization removed every token.
    pub fn is_empty(&self) -> bool {
        self.token_count() == 0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineConfig {
    pub min_count: usize,
    pub stopwords: HashSet<String>,
    pub stemming: bool,
    pub sentence_delimiters: Vec<char>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            min_count: 5,
            stopwords: parse_stopwords(STOPWORDS_EN_V1),
            stemming: true,
            sentence_delimiters: vec!['.', '!', '?'],
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_count < 1 {
            return Err(Error::Config("min_count must be >= 1".into()));
        }
        Ok(())
    }

    /// Canonical text form, used for config digests.
    pub fn canonical(&self) -> String {
        let mut stop: Vec<&str> = self.stopwords.iter().map(String::as_str).collect();
        stop.sort_unstable();
        format!(
            "min_count={};stemming={};delimiters={};stopwords={}",
            self.min_count,
            self.stemming,
            self.sentence_delimiters.iter().collect::<String>(),
            stop.join(",")
        )
    }
}

/// One word per line; blank lines ignored.
pub fn parse_stopwords(text: &str) -> HashSet<String> {
    text.lines()
        .map(|l| l.trim().to_lowercase())
        .filter(|l| !l.is_empty())
        .collect()
}

pub fn load_stopwords(path: &Path) -> Result<HashSet<String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_stopwords(&text))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CorpusFormat {
    Jsonl,
    Tsv,
}

impl CorpusFormat {
    pub fn from_path(path: &Path) -> CorpusFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some("tsv") | Some("txt") => CorpusFormat::Tsv,
            _ => CorpusFormat::Jsonl,
        }
    }
}

impl FromStr for CorpusFormat {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "jsonl" | "json" => Ok(CorpusFormat::Jsonl),
            "tsv" => Ok(CorpusFormat::Tsv),
            other => Err(format!("unknown corpus format {other:?}")),
        }
    }
}

#[derive(Deserialize)]
struct JsonRecord {
    id: serde_json::Value,
    label: serde_json::Value,
    text: String,
    #[serde(default)]
    split: Option<String>,
}

fn opaque_string(v: &serde_json::Value) -> Option<String> {
    match v {
        serde_json::Value::String(s) => Some(s.clone()),
        serde_json::Value::Number(n) => Some(n.to_string()),
        serde_json::Value::Bool(b) => Some(b.to_string()),
        _ => None,
    }
}

/// Loads raw records. JSONL lines carry `id`, `label`, `text` and an
/// optional `split`; TSV rows are `id<TAB>label<TAB>text[<TAB>split]`.
/// Blank lines are skipped.
pub fn load_corpus(path: &Path, format: CorpusFormat) -> Result<Vec<DocumentRecord>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_corpus(&text, format, path)
}

pub fn parse_corpus(text: &str, format: CorpusFormat, path: &Path) -> Result<Vec<DocumentRecord>> {
    let malformed = |line: usize, reason: String| Error::MalformedRecord {
        path: path.to_path_buf(),
        line,
        reason,
    };
    let mut out = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let record = match format {
            CorpusFormat::Jsonl => {
                let r: JsonRecord =
                    serde_json::from_str(line).map_err(|e| malformed(lineno, e.to_string()))?;
                let id = opaque_string(&r.id).ok_or_else(|| malformed(lineno, "id must be a string or number".into()))?;
                let label = opaque_string(&r.label)
                    .ok_or_else(|| malformed(lineno, "label must be a string or number".into()))?;
                let split = r
                    .split
                    .as_deref()
                    .map(Split::from_str)
                    .transpose()
                    .map_err(|e| malformed(lineno, e))?;
                DocumentRecord { split, ..DocumentRecord::new(id, label, r.text) }
            }
            CorpusFormat::Tsv => {
                let cols: Vec<&str> = line.split('\t').collect();
                if idx == 0 && cols.len() >= 3 && cols[0] == "id" && cols[1] == "label" {
                    continue;
                }
                let split = match cols.len() {
                    3 => None,
                    4 => Some(Split::from_str(cols[3]).map_err(|e| malformed(lineno, e))?),
                    n => return Err(malformed(lineno, format!("expected 3 or 4 tab-separated columns, found {n}"))),
                };
                DocumentRecord { split, ..DocumentRecord::new(cols[0], cols[1], cols[2]) }
            }
        };
        if record.id.is_empty() {
            return Err(malformed(lineno, "empty id".into()));
        }
        if seen.insert(record.id.clone(), lineno).is_some() {
            return Err(Error::DuplicateId { path: path.to_path_buf(), line: lineno, id: record.id });
        }
        out.push(record);
    }
    Ok(out)
}

/// Splits on sentence delimiters, then lowercases, replaces every
/// non-alphabetic character with a token break, removes stopwords and
/// stems. Stemming is iterated to a fixed point and stopwords are filtered
/// again afterwards, which makes the function idempotent on its own output.
pub fn normalize_text(raw: &str, cfg: &PipelineConfig) -> Vec<Vec<String>> {
    raw.split(|c| cfg.sentence_delimiters.contains(&c))
        .map(|sentence| normalize_sentence(sentence, cfg))
        .filter(|s| !s.is_empty())
        .collect()
}

fn normalize_sentence(sentence: &str, cfg: &PipelineConfig) -> Vec<String> {
    let mut cleaned = String::with_capacity(sentence.len());
    for c in sentence.chars() {
        if c.is_alphabetic() {
            cleaned.extend(c.to_lowercase());
        } else {
            cleaned.push(' ');
        }
    }
    cleaned
        .split_whitespace()
        .filter(|t| !cfg.stopwords.contains(*t))
        .filter_map(|t| {
            let t = if cfg.stemming { stem_to_fixed_point(t) } else { t.to_string() };
            (!t.is_empty() && !cfg.stopwords.contains(&t)).then_some(t)
        })
        .collect()
}

fn stem_to_fixed_point(token: &str) -> String {
    let mut cur = porter_stem(token);
    // Each pass either shortens the word or leaves it unchanged.
    loop {
        let next = porter_stem(&cur);
        if next == cur {
            return cur;
        }
        cur = next;
    }
}

pub fn normalize_document(doc: &mut DocumentRecord, cfg: &PipelineConfig) {
    doc.sentences = normalize_text(&doc.raw_text, cfg);
}

/// Normalizes every record in place (per-document work runs in parallel).
pub fn normalize_corpus(docs: &mut [DocumentRecord], cfg: &PipelineConfig, exec: Execution) {
    let sentences = par::map_slice(docs, exec, |d| normalize_text(&d.raw_text, cfg));
    for (doc, s) in docs.iter_mut().zip(sentences) {
        doc.sentences = s;
    }
    let empty = docs.iter().filter(|d| d.is_empty()).count();
    if empty > 0 {
        log::warn!("{empty} document(s) have no tokens after normalization");
    }
}

/// Bijection between retained words and ids `0..len`, with corpus frequencies.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Vocabulary {
    words: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, u32>,
}

impl Vocabulary {
    /// Builds from `(word, count)` pairs in id order.
    pub fn from_entries(entries: Vec<(String, u64)>) -> Self {
        let mut v = Vocabulary::default();
        for (w, c) in entries {
            v.push(w, c);
        }
        v
    }

    fn push(&mut self, word: String, count: u64) -> u32 {
        let id = self.words.len() as u32;
        self.index.insert(word.clone(), id);
        self.words.push(word);
        self.counts.push(count);
        id
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn id(&self, word: &str) -> Option<u32> {
        self.index.get(word).copied()
    }

    pub fn word(&self, id: u32) -> &str {
        &self.words[id as usize]
    }

    pub fn count(&self, id: u32) -> u64 {
        self.counts[id as usize]
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    /// Returns the id of `word`, appending it if absent (open vocabulary).
    pub fn get_or_insert(&mut self, word: &str) -> u32 {
        match self.id(word) {
            Some(id) => id,
            None => self.push(word.to_string(), 0),
        }
    }

    pub(crate) fn bump(&mut self, id: u32, by: u64) {
        self.counts[id as usize] += by;
    }
}

/// Keeps words with frequency >= `min_count`; ids by descending frequency,
/// ties broken lexicographically.
pub fn build_vocabulary(docs: &[DocumentRecord], cfg: &PipelineConfig) -> Result<Vocabulary> {
    cfg.validate()?;
    let mut freq: BTreeMap<&str, u64> = BTreeMap::new();
    for doc in docs {
        for t in doc.tokens() {
            *freq.entry(t).or_default() += 1;
        }
    }
    let mut kept: Vec<(&str, u64)> = freq
        .into_iter()
        .filter(|&(_, c)| c >= cfg.min_count as u64)
        .collect();
    if kept.is_empty() {
        return Err(Error::EmptyVocabulary { min_count: cfg.min_count });
    }
    kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    Ok(Vocabulary::from_entries(
        kept.into_iter().map(|(w, c)| (w.to_string(), c)).collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> PipelineConfig {
        PipelineConfig::default()
    }

    #[test]
    fn normalizes_example_sentence() {
        assert_eq!(normalize_text("The cats are running!", &cfg()), vec![vec!["cat", "run"]]);
    }

    #[test]
    fn empty_and_all_stopword_inputs() {
        assert!(normalize_text("", &cfg()).is_empty());
        let mut c = cfg();
        c.stopwords = ["a", "b"].iter().map(|s| s.to_string()).collect();
        assert!(normalize_text("A. B!", &c).is_empty());
    }

    #[test]
    fn sentences_split_before_cleaning() {
        let out = normalize_text("Stocks rallied today. Bonds 42 fell? Oil!", &cfg());
        assert_eq!(out, vec![vec!["stock", "ralli", "todai"], vec!["bond", "fell"], vec!["oil"]]);
    }

    #[test]
    fn stemming_can_be_disabled() {
        let mut c = cfg();
        c.stemming = false;
        assert_eq!(normalize_text("The cats are running", &c), vec![vec!["cats", "running"]]);
    }

    #[test]
    fn stem_that_is_a_stopword_is_dropped() {
        // "others" is not a stopword but stems to "other", which is.
        assert!(normalize_text("others", &cfg()).is_empty());
    }

    #[test]
    fn vocabulary_threshold() {
        let mut docs = vec![DocumentRecord::from_tokens("d", "x", &["a a a a a a b b"])];
        let mut c = cfg();
        c.stopwords.clear();
        let v = build_vocabulary(&docs, &c).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v.id("a"), Some(0));
        assert_eq!(v.count(0), 6);

        docs[0].sentences.clear();
        assert!(matches!(build_vocabulary(&docs, &c), Err(Error::EmptyVocabulary { min_count: 5 })));
    }

    #[test]
    fn vocabulary_ties_are_lexicographic() {
        let docs = vec![DocumentRecord::from_tokens("d", "x", &["b a c c"])];
        let mut c = cfg();
        c.min_count = 1;
        let v = build_vocabulary(&docs, &c).unwrap();
        assert_eq!(v.words(), &["c", "a", "b"]);
    }

    #[test]
    fn jsonl_and_tsv_parsing() {
        let p = Path::new("mem.jsonl");
        let docs = parse_corpus(
            "{\"id\":\"d1\",\"label\":\"sport\",\"text\":\"w1 w2 w3\"}\n\n{\"id\":2,\"label\":7,\"text\":\"x\",\"split\":\"test\"}\n",
            CorpusFormat::Jsonl,
            p,
        )
        .unwrap();
        assert_eq!(docs.len(), 2);
        assert_eq!(docs[0], DocumentRecord::new("d1", "sport", "w1 w2 w3"));
        assert_eq!(docs[1].id, "2");
        assert_eq!(docs[1].label, "7");
        assert_eq!(docs[1].split, Some(Split::Test));

        let docs = parse_corpus("id\tlabel\ttext\na\tx\thello there\nb\ty\tbye\ttrain\n", CorpusFormat::Tsv, p).unwrap();
        assert_eq!(docs.len(), 2);
        assert_eq!(docs[1].split, Some(Split::Train));

        assert!(parse_corpus("", CorpusFormat::Jsonl, p).unwrap().is_empty());
    }

    #[test]
    fn parse_errors_name_the_line() {
        let p = Path::new("c.jsonl");
        let err = parse_corpus("{\"id\":\"a\",\"label\":\"x\",\"text\":\"t\"}\nnot json\n", CorpusFormat::Jsonl, p)
            .unwrap_err();
        assert!(matches!(err, Error::MalformedRecord { line: 2, .. }), "{err}");
        let err = parse_corpus("a\tx\tt\na\ty\tu\n", CorpusFormat::Tsv, p).unwrap_err();
        assert!(matches!(err, Error::DuplicateId { line: 2, .. }), "{err}");
        let err = parse_corpus("a\tx\n", CorpusFormat::Tsv, p).unwrap_err();
        assert!(matches!(err, Error::MalformedRecord { line: 1, .. }));
    }
}
