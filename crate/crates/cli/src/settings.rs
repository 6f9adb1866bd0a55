//! Flat `key = value` configuration shared by all subcommands.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use gtpm::classifier::TrainConfig;
use gtpm::corpus::{self, CorpusFormat, PipelineConfig};
use gtpm::experiments::{ExperimentSpec, SplitMode, DEFAULT_FRACTIONS};
use gtpm::walker::WalkConfig;
use gtpm::Execution;

/// Every key a config file or `--set` may use.
pub const KEYS: &[(&str, &str)] = &[
    ("format", "corpus format: jsonl or tsv (default: from extension)"),
    ("min_count", "minimum corpus frequency for a vocabulary word (5)"),
    ("stemming", "apply Porter stemming (true)"),
    ("stopwords", "path to a stopword list, one word per line (built-in English list)"),
    ("walk_length", "steps per walk; a comma list sweeps (15)"),
    ("walks_per_node", "walks started from every word; a comma list sweeps (auto: 1 for long documents, else 4)"),
    ("learning_rate", "Adam step size (0.001)"),
    ("dropout", "dropout probability on hidden layers (0.2)"),
    ("batch_size", "minibatch size (64)"),
    ("patience", "early-stopping patience in epochs (10)"),
    ("max_epochs", "epoch cap (200)"),
    ("validation_fraction", "held-out share of the training split (0.1)"),
    ("hidden", "hidden layer widths (64,128,256,512)"),
    ("grid_search", "search the learning-rate x dropout grid (false)"),
    ("repeats", "runs per configuration (5)"),
    ("vary_seeds", "derive a different seed per repeat (true)"),
    ("train_fraction", "share of the training split to use (1.0)"),
    ("test_fraction", "hold out this share as test instead of using record splits"),
    ("fractions", "robustness training fractions, descending (0.10,0.08,0.06,0.04,0.02)"),
    ("execution", "parallel or sequential (parallel)"),
    ("floor", "smallest degree in the power-law fit (1)"),
    ("seed", "master seed (0)"),
];

#[derive(Clone, Debug, Default)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut s = Settings::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .with_context(|| format!("{origin}:{}: expected key = value", n + 1))?;
            s.set(k.trim(), v.trim()).with_context(|| format!("{origin}:{}", n + 1))?;
        }
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Settings::parse(&text, &path.display().to_string())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if !KEYS.iter().any(|(k, _)| *k == key) {
            bail!("unknown setting {key:?}; known: {}", KEYS.iter().map(|k| k.0).collect::<Vec<_>>().join(", "));
        }
        self.values.insert(key.to_string(), value.to_string());
        Ok(())
    }

    pub fn set_pair(&mut self, pair: &str) -> Result<()> {
        let (k, v) = pair.split_once('=').with_context(|| format!("--set expects key=value, got {pair:?}"))?;
        self.set(k.trim(), v.trim())
    }

    fn get<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        match self.values.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|e| anyhow::anyhow!("setting {key}={v:?}: {e}")),
        }
    }

    fn list<T: std::str::FromStr>(&self, key: &str) -> Result<Option<Vec<T>>>
    where
        T::Err: std::fmt::Display,
    {
        let Some(v) = self.values.get(key) else { return Ok(None) };
        v.split(',')
            .map(|x| x.trim().parse().map_err(|e| anyhow::anyhow!("setting {key}={v:?}: {e}")))
            .collect::<Result<Vec<T>>>()
            .map(Some)
    }

    pub fn seed(&self) -> Result<u64> {
        self.get("seed", 0)
    }

    pub fn format(&self, path: &Path) -> Result<CorpusFormat> {
        match self.values.get("format") {
            Some(f) => f.parse().map_err(anyhow::Error::msg),
            None => Ok(CorpusFormat::from_path(path)),
        }
    }

    pub fn execution(&self) -> Result<Execution> {
        match self.values.get("execution").map(String::as_str) {
            None | Some("parallel") => Ok(Execution::Parallel),
            Some("sequential") => Ok(Execution::Sequential),
            Some(o) => bail!("execution must be parallel or sequential, got {o:?}"),
        }
    }

    pub fn floor(&self) -> Result<usize> {
        self.get("floor", 1)
    }

    pub fn pipeline(&self) -> Result<PipelineConfig> {
        let mut p = PipelineConfig {
            min_count: self.get("min_count", 5)?,
            stemming: self.get("stemming", true)?,
            ..Default::default()
        };
        if let Some(path) = self.values.get("stopwords") {
            p.stopwords = corpus::load_stopwords(Path::new(path))?;
        }
        p.validate()?;
        Ok(p)
    }

    pub fn walk_lengths(&self) -> Result<Vec<usize>> {
        Ok(self.list("walk_length")?.unwrap_or_else(|| vec![15]))
    }

    /// Empty means pick from the corpus.
    pub fn walks_per_node(&self) -> Result<Vec<usize>> {
        Ok(self.list("walks_per_node")?.unwrap_or_default())
    }

    /// A single walk configuration; `avg_tokens` resolves the automatic walk count.
    pub fn walk_config(&self, avg_tokens: f64) -> Result<WalkConfig> {
        let m = self.walk_lengths()?;
        let n = self.walks_per_node()?;
        if m.len() > 1 || n.len() > 1 {
            bail!("walk_length and walks_per_node take single values here; use `sweep` for grids");
        }
        let cfg = WalkConfig {
            walk_length: m[0],
            walks_per_node: n.first().copied().unwrap_or_else(|| WalkConfig::default_walks_per_node(avg_tokens)),
            master_seed: self.seed()?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn train(&self) -> Result<TrainConfig> {
        let d = TrainConfig::default();
        let cfg = TrainConfig {
            learning_rate: self.get("learning_rate", d.learning_rate)?,
            dropout: self.get("dropout", d.dropout)?,
            batch_size: self.get("batch_size", d.batch_size)?,
            patience: self.get("patience", d.patience)?,
            max_epochs: self.get("max_epochs", d.max_epochs)?,
            validation_fraction: self.get("validation_fraction", d.validation_fraction)?,
            hidden: self.list("hidden")?.unwrap_or(d.hidden),
            seed: self.seed()?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn grid_search(&self) -> Result<bool> {
        self.get("grid_search", false)
    }

    pub fn fractions(&self) -> Result<Vec<f64>> {
        Ok(self.list("fractions")?.unwrap_or_else(|| DEFAULT_FRACTIONS.to_vec()))
    }

    pub fn experiment(&self, corpus: &Path, out_dir: Option<PathBuf>) -> Result<ExperimentSpec> {
        let split_mode = match self.values.get("test_fraction") {
            Some(_) => SplitMode::Holdout { test_fraction: self.get("test_fraction", 0.2)? },
            None => SplitMode::Given,
        };
        let spec = ExperimentSpec {
            corpus_path: Some(corpus.to_path_buf()),
            format: Some(self.format(corpus)?),
            split_mode,
            train_fraction: self.get("train_fraction", 1.0)?,
            walk_lengths: self.walk_lengths()?,
            walks_per_node: self.walks_per_node()?,
            train: self.train()?,
            grid_search: self.grid_search()?,
            repeats: self.get("repeats", 5)?,
            vary_seeds: self.get("vary_seeds", true)?,
            master_seed: self.seed()?,
            pipeline: self.pipeline()?,
            out_dir,
            exec: self.execution()?,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// `key=value` pairs that were set, for output headers.
    pub fn summary(&self) -> String {
        if self.values.is_empty() {
            return "defaults".to_string();
        }
        self.values.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(" ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_rejects() {
        let s = Settings::parse("# comment\nwalk_length = 5, 15\nseed=3\n\nhidden=8,4\n", "t").unwrap();
        assert_eq!(s.walk_lengths().unwrap(), vec![5, 15]);
        assert_eq!(s.seed().unwrap(), 3);
        assert_eq!(s.train().unwrap().hidden, vec![8, 4]);
        assert!(s.walk_config(10.0).is_err());
        assert!(Settings::parse("walk_lenght=5", "t").is_err());
        assert!(Settings::parse("just words", "t").is_err());
        let bad = Settings::parse("dropout=lots", "t").unwrap();
        assert!(bad.train().is_err());
    }

    #[test]
    fn automatic_walk_count() {
        let s = Settings::default();
        assert_eq!(s.walk_config(100.0).unwrap().walks_per_node, 1);
        assert_eq!(s.walk_config(12.0).unwrap().walks_per_node, 4);
    }
}
