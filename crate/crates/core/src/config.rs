//! Pipeline settings.
//!
//! A config file is flat `key=value` text with `#` comments. Keys are the
//! long CLI flag names (`threshold`, `workers`, `k-features`, ...). Values
//! resolve as: flag, then `STREAMPREP_WORKERS` (workers only), then the file,
//! then the defaults.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::runtime::default_workers;

pub const WORKERS_ENV: &str = "STREAMPREP_WORKERS";
pub const DEFAULT_THRESHOLD: usize = 2500;
pub const DEFAULT_TREES: usize = 10;
pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PipelineConfig {
    pub lexicon_dir: PathBuf,
    pub corpus_dir: PathBuf,
    pub threshold: usize,
    pub workers: usize,
    pub seed: u64,
    pub n_trees: usize,
    /// `None` picks `floor(log2(schema_len)) + 1` once the schema is known.
    pub k_features: Option<usize>,
    pub output_dir: PathBuf,
    pub arff: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            lexicon_dir: PathBuf::from("lexicon"),
            corpus_dir: PathBuf::from("corpus"),
            threshold: DEFAULT_THRESHOLD,
            workers: default_workers(),
            seed: DEFAULT_SEED,
            n_trees: DEFAULT_TREES,
            k_features: None,
            output_dir: PathBuf::from("out"),
            arff: false,
        }
    }
}

/// Partial settings from one source; `None` leaves the lower layer alone.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConfigLayer {
    pub lexicon_dir: Option<PathBuf>,
    pub corpus_dir: Option<PathBuf>,
    pub threshold: Option<usize>,
    pub workers: Option<usize>,
    pub seed: Option<u64>,
    pub n_trees: Option<usize>,
    pub k_features: Option<usize>,
    pub output_dir: Option<PathBuf>,
    pub arff: Option<bool>,
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("bad value {:?} for {}", value, key)))
}

impl ConfigLayer {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        match key.as_str() {
            "lexicon-dir" => self.lexicon_dir = Some(value.into()),
            "corpus-dir" => self.corpus_dir = Some(value.into()),
            "threshold" => self.threshold = Some(parse_value(&key, value)?),
            "workers" => self.workers = Some(parse_value(&key, value)?),
            "seed" => self.seed = Some(parse_value(&key, value)?),
            "trees" => self.n_trees = Some(parse_value(&key, value)?),
            "k-features" => {
                self.k_features = match value {
                    "" | "auto" => None,
                    v => Some(parse_value(&key, v)?),
                }
            }
            "out" => self.output_dir = Some(value.into()),
            "arff" => self.arff = Some(parse_value(&key, value)?),
            _ => return Err(Error::Config(format!("unknown key {:?}", key))),
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut layer = ConfigLayer::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key=value", i + 1)))?;
            layer
                .set(key, value)
                .map_err(|e| Error::Config(format!("line {}: {}", i + 1, e)))?;
        }
        Ok(layer)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// The worker count from `STREAMPREP_WORKERS`, if set.
    pub fn from_env_value(value: Option<&str>) -> Result<Self> {
        let mut layer = ConfigLayer::default();
        if let Some(v) = value {
            layer.workers = Some(parse_value(WORKERS_ENV, v.trim())?);
        }
        Ok(layer)
    }

    fn apply(&self, cfg: &mut PipelineConfig) {
        macro_rules! take {
            ($($field:ident),*) => {
                $(if let Some(v) = &self.$field { cfg.$field = v.clone(); })*
            };
        }
        take!(
            lexicon_dir,
            corpus_dir,
            threshold,
            workers,
            seed,
            n_trees,
            output_dir,
            arff
        );
        if self.k_features.is_some() {
            cfg.k_features = self.k_features;
        }
    }
}

impl PipelineConfig {
    /// Layers applied lowest first: defaults, `file`, `env`, `flags`.
    pub fn resolve(file: Option<&ConfigLayer>, env: &ConfigLayer, flags: &ConfigLayer) -> Self {
        let mut cfg = PipelineConfig::default();
        for layer in file.into_iter().chain([env, flags]) {
            layer.apply(&mut cfg);
        }
        cfg
    }

    /// Checks the numeric settings and that the input directories exist.
    pub fn validate(&self) -> Result<()> {
        self.validate_numbers()?;
        for dir in [&self.lexicon_dir, &self.corpus_dir] {
            if !dir.is_dir() {
                return Err(Error::MissingDirectory(dir.clone()));
            }
        }
        Ok(())
    }

    pub fn validate_numbers(&self) -> Result<()> {
        if self.threshold == 0 {
            return Err(Error::Config("threshold must be positive".into()));
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be positive".into()));
        }
        if self.n_trees == 0 {
            return Err(Error::Config("trees must be positive".into()));
        }
        if self.k_features == Some(0) {
            return Err(Error::Config("k-features must be positive".into()));
        }
        Ok(())
    }

    pub fn key_values(&self) -> Vec<(&'static str, String)> {
        vec![
            ("lexicon-dir", self.lexicon_dir.display().to_string()),
            ("corpus-dir", self.corpus_dir.display().to_string()),
            ("threshold", self.threshold.to_string()),
            ("workers", self.workers.to_string()),
            ("seed", self.seed.to_string()),
            ("trees", self.n_trees.to_string()),
            (
                "k-features",
                self.k_features.map_or_else(|| "auto".to_string(), |k| k.to_string()),
            ),
            ("out", self.output_dir.display().to_string()),
            ("arff", self.arff.to_string()),
        ]
    }
}

/// Writes the config in the file format, so it can be read back.
impl fmt::Display for PipelineConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.key_values() {
            writeln!(f, "{}={}", k, v)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = PipelineConfig::default();
        assert_eq!(c.threshold, 2500);
        assert_eq!(c.n_trees, 10);
        assert_eq!(c.workers, default_workers());
        assert_eq!(c.k_features, None);
    }

    #[test]
    fn flags_beat_env_beat_file() {
        let file = ConfigLayer::parse("# comment\nthreshold = 7\nworkers=3\nseed=5\n\nk_features=4\n").unwrap();
        let env = ConfigLayer::from_env_value(Some("6")).unwrap();
        let flags = ConfigLayer {
            seed: Some(9),
            ..ConfigLayer::default()
        };
        let c = PipelineConfig::resolve(Some(&file), &env, &flags);
        assert_eq!((c.threshold, c.workers, c.seed, c.k_features), (7, 6, 9, Some(4)));
        let c = PipelineConfig::resolve(Some(&file), &ConfigLayer::default(), &flags);
        assert_eq!(c.workers, 3);
    }

    #[test]
    fn display_reads_back() {
        let c = PipelineConfig {
            k_features: Some(3),
            arff: true,
            ..PipelineConfig::default()
        };
        let back = PipelineConfig::resolve(
            Some(&ConfigLayer::parse(&c.to_string()).unwrap()),
            &ConfigLayer::default(),
            &ConfigLayer::default(),
        );
        assert_eq!(back, c);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ConfigLayer::parse("colour=blue").is_err());
        assert!(ConfigLayer::parse("threshold").is_err());
        assert!(ConfigLayer::parse("threshold=-1").is_err());
        assert!(ConfigLayer::from_env_value(Some("many")).is_err());
        let c = PipelineConfig {
            threshold: 0,
            ..PipelineConfig::default()
        };
        assert!(c.validate_numbers().is_err());
        let c = PipelineConfig {
            lexicon_dir: "/no/such/dir".into(),
            ..PipelineConfig::default()
        };
        assert!(matches!(c.validate(), Err(Error::MissingDirectory(_))));
    }
}
