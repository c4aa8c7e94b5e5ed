use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::analytics::AnalyticsConfig;
use crate::corpus::LoadFilter;
use crate::error::{Error, Result};
use crate::seedex::ExpansionConfig;
use crate::topics::TopicModelConfig;

/// Environment variable that replaces `output_dir`.
pub const OUT_DIR_ENV: &str = "DISCOURSE_OUT_DIR";

/// One pipeline run. Relative paths in a config file are taken relative to
/// the file's directory.
///
/// ```toml
/// corpus = "corpus.jsonl"
/// begin = "2021-01-01"
/// end = "2021-04-10"
/// query = "impfung"
/// word_embeddings = "words.vec"
/// lexicon = "lexicon.tsv"
/// output_dir = "out"
///
/// [expansion]
/// min_similarity = 0.6
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub corpus: PathBuf,
    /// First day of the study window (UTC, inclusive).
    pub begin: NaiveDate,
    /// Last day of the study window (UTC, inclusive).
    pub end: NaiveDate,
    #[serde(default = "default_lang")]
    pub lang: String,
    pub query: String,
    #[serde(default)]
    pub expansion: ExpansionConfig,
    #[serde(default = "default_exclusion")]
    pub exclusion: Vec<String>,
    #[serde(default)]
    pub substring_match: bool,
    #[serde(default)]
    pub lemma_table: Option<PathBuf>,
    pub lexicon: PathBuf,
    pub word_embeddings: PathBuf,
    /// Precomputed per-document vectors. Without them documents are embedded
    /// as the mean of their word vectors.
    #[serde(default)]
    pub doc_embeddings: Option<PathBuf>,
    #[serde(default)]
    pub topics: TopicModelConfig,
    #[serde(default)]
    pub theme_map: Option<PathBuf>,
    #[serde(default)]
    pub phases_rki: Option<PathBuf>,
    #[serde(default)]
    pub phases_policy: Option<PathBuf>,
    #[serde(default)]
    pub events: Option<PathBuf>,
    #[serde(default)]
    pub analytics: AnalyticsConfig,
    #[serde(default = "default_out")]
    pub output_dir: PathBuf,
    #[serde(default = "default_seed")]
    pub random_seed: u64,
}

fn default_lang() -> String {
    "de".into()
}

fn default_exclusion() -> Vec<String> {
    vec!["infektion".into()]
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

fn default_seed() -> u64 {
    42
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("run config: {e}")))
    }

    /// Reads a TOML config and resolves its relative paths against the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::parse(&text)?;
        if let Some(dir) = path.parent() {
            cfg.rebase(dir);
        }
        Ok(cfg)
    }

    /// Prefixes every relative path with `dir`.
    pub fn rebase(&mut self, dir: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        };
        fix(&mut self.corpus);
        fix(&mut self.lexicon);
        fix(&mut self.word_embeddings);
        fix(&mut self.output_dir);
        for p in [
            &mut self.lemma_table,
            &mut self.doc_embeddings,
            &mut self.theme_map,
            &mut self.phases_rki,
            &mut self.phases_policy,
            &mut self.events,
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
    }

    /// Applies `DISCOURSE_OUT_DIR` when it is set and nonempty.
    pub fn with_env_overrides(mut self) -> Self {
        if let Some(dir) = std::env::var_os(OUT_DIR_ENV).filter(|v| !v.is_empty()) {
            self.output_dir = PathBuf::from(dir);
        }
        self
    }

    pub fn load_filter(&self) -> Result<LoadFilter> {
        LoadFilter::from_days(self.begin, self.end, &self.lang)
    }

    /// Topic settings with the run seed applied.
    pub fn topic_config(&self) -> TopicModelConfig {
        TopicModelConfig {
            random_seed: self.random_seed,
            ..self.topics.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.begin > self.end {
            return Err(Error::Config(format!(
                "window begin {} is after end {}",
                self.begin, self.end
            )));
        }
        if self.query.trim().is_empty() {
            return Err(Error::Config("query is empty".into()));
        }
        if self.lang.trim().is_empty() {
            return Err(Error::Config("lang is empty".into()));
        }
        self.expansion.validate()?;
        self.topic_config().validate()?;
        let a = &self.analytics;
        if !(a.alpha > 0.0 && a.alpha < 1.0) {
            return Err(Error::Config(format!("alpha {} outside (0, 1)", a.alpha)));
        }
        if !(a.peak_multiplier >= 0.0 && a.peak_multiplier.is_finite()) {
            return Err(Error::Config(format!(
                "peak_multiplier {} must be >= 0",
                a.peak_multiplier
            )));
        }
        if let Some(p) = a.penalty {
            if p.is_nan() || p < 0.0 {
                return Err(Error::Config(format!("penalty {p} must be >= 0")));
            }
        }
        if a.window_days < 0 {
            return Err(Error::Config("window_days must be >= 0".into()));
        }
        let required = [
            ("corpus", Some(&self.corpus)),
            ("lexicon", Some(&self.lexicon)),
            ("word_embeddings", Some(&self.word_embeddings)),
            ("lemma_table", self.lemma_table.as_ref()),
            ("doc_embeddings", self.doc_embeddings.as_ref()),
            ("theme_map", self.theme_map.as_ref()),
            ("phases_rki", self.phases_rki.as_ref()),
            ("phases_policy", self.phases_policy.as_ref()),
            ("events", self.events.as_ref()),
        ];
        for (key, path) in required {
            if let Some(p) = path {
                if !p.is_file() {
                    return Err(Error::Config(format!("{key}: no such file {}", p.display())));
                }
            }
        }
        Ok(())
    }
}
