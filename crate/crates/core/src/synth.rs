//! Synthetic labeled corpora with Zipfian word draws.
//!
//! Each class owns a disjoint topic vocabulary; all classes share one
//! common vocabulary. Every token is drawn independently: from the shared
//! list with probability `shared_probability`, otherwise from the class
//! topic list, each by a Zipf law over word rank. Classes use different
//! topic exponents. Graph-walk features only see the shape of the
//! neighborhood, not word identity, so classes that are exact relabelings
//! of each other would be indistinguishable to them.
//!
//! Words are built from consonant-vowel syllables ending in a, o or u so
//! that neither the stopword filter nor the stemmer alters them.

use rand::Rng;
use rand_distr::{Distribution, Zipf};

use crate::corpus::{DocumentRecord, Split};
use crate::error::{Error, Result};
use crate::seed::{self, tag};

const CONSONANTS: &[u8] = b"bdfgkmnprtvz";
const VOWELS: &[u8] = b"aou";

#[derive(Clone, Debug, PartialEq)]
pub struct SynthConfig {
    pub classes: usize,
    pub topic_words: usize,
    pub shared_words: usize,
    pub docs_per_class: usize,
    /// Inclusive ranges.
    pub sentences_per_doc: (usize, usize),
    pub words_per_sentence: (usize, usize),
    pub shared_probability: f64,
    pub shared_exponent: f64,
    /// One Zipf exponent per class.
    pub topic_exponents: Vec<f64>,
    /// Fraction of each class marked as test split.
    pub test_fraction: f64,
    pub seed: u64,
}

impl SynthConfig {
    /// `classes` classes with topic exponents spread over [0.6, 1.6].
    pub fn new(classes: usize, seed: u64) -> Self {
        let topic_exponents = if classes <= 1 {
            vec![1.0]
        } else {
            (0..classes).map(|c| 0.6 + c as f64 / (classes - 1) as f64).collect()
        };
        SynthConfig {
            classes,
            topic_words: 200,
            shared_words: 100,
            docs_per_class: 500,
            sentences_per_doc: (3, 6),
            words_per_sentence: (6, 14),
            shared_probability: 0.3,
            shared_exponent: 1.0,
            topic_exponents,
            test_fraction: 0.2,
            seed,
        }
    }
}

/// Deterministic pseudo-word for an index.
pub fn synthetic_word(mut index: usize) -> String {
    let syllables = CONSONANTS.len() * VOWELS.len();
    let mut out = Vec::new();
    for _ in 0..3 {
        let s = index % syllables;
        index /= syllables;
        out.push(CONSONANTS[s / VOWELS.len()]);
        out.push(VOWELS[s % VOWELS.len()]);
    }
    while index > 0 {
        let s = index % syllables;
        index /= syllables;
        out.push(CONSONANTS[s / VOWELS.len()]);
        out.push(VOWELS[s % VOWELS.len()]);
    }
    String::from_utf8(out).expect("ascii")
}

pub fn class_name(c: usize) -> String {
    format!("topic{c}")
}

pub fn generate(cfg: &SynthConfig) -> Result<Vec<DocumentRecord>> {
    if cfg.classes == 0 || cfg.topic_exponents.len() != cfg.classes {
        return Err(Error::Config("need one topic exponent per class".into()));
    }
    if cfg.topic_words == 0 || cfg.sentences_per_doc.0 == 0 || cfg.words_per_sentence.0 == 0 {
        return Err(Error::Config("synthetic corpus sizes must be positive".into()));
    }
    let bad = |e| Error::Config(format!("invalid Zipf parameters: {e}"));
    let shared = if cfg.shared_words > 0 {
        Some(Zipf::new(cfg.shared_words as f64, cfg.shared_exponent).map_err(bad)?)
    } else {
        None
    };
    let topics = cfg
        .topic_exponents
        .iter()
        .map(|&s| Zipf::new(cfg.topic_words as f64, s).map_err(bad))
        .collect::<Result<Vec<_>>>()?;
    let test_per_class = (cfg.test_fraction * cfg.docs_per_class as f64).round() as usize;

    let mut docs = Vec::with_capacity(cfg.classes * cfg.docs_per_class);
    for i in 0..cfg.docs_per_class {
        for (c, topic) in topics.iter().enumerate() {
            let mut rng = seed::rng(cfg.seed, &[tag::SYNTH, c as u64, i as u64]);
            let sentences = rng.random_range(cfg.sentences_per_doc.0..=cfg.sentences_per_doc.1);
            let mut text = String::new();
            for _ in 0..sentences {
                let len = rng.random_range(cfg.words_per_sentence.0..=cfg.words_per_sentence.1);
                let words: Vec<String> = (0..len)
                    .map(|_| {
                        let rank = match &shared {
                            Some(z) if rng.random::<f64>() < cfg.shared_probability => z.sample(&mut rng) as usize - 1,
                            _ => cfg.shared_words + c * cfg.topic_words + topic.sample(&mut rng) as usize - 1,
                        };
                        synthetic_word(rank)
                    })
                    .collect();
                text.push_str(&words.join(" "));
                text.push_str(". ");
            }
            let split = if i < cfg.docs_per_class - test_per_class { Split::Train } else { Split::Test };
            let id = format!("c{c}-d{i}");
            docs.push(DocumentRecord::new(id, class_name(c), text.trim_end()).with_split(split));
        }
    }
    Ok(docs)
}

/// JSONL export in the loader's input format.
pub fn to_jsonl(docs: &[DocumentRecord]) -> String {
    let mut out = String::new();
    for d in docs {
        let mut obj = serde_json::json!({ "id": d.id, "label": d.label, "text": d.raw_text });
        if let Some(s) = d.split {
            obj["split"] = serde_json::to_value(s).expect("enum serializes");
        }
        out.push_str(&obj.to_string());
        out.push('\n');
    }
    out
}
