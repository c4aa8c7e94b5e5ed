//! Topic extraction: embed documents, project to a few dimensions,
//! density-cluster, then describe each cluster by class-based term weights.

mod cluster;
mod embed;
mod reduce;
mod terms;
mod themes;

pub use cluster::{cluster, hdbscan};
pub use embed::{embed_docs, load_doc_vectors, DocVector, EmbedStrategy, Embedded};
pub use reduce::reduce;
pub use terms::{class_term_weights, rank_topics, topic_terms, Topic, TopicRow};
pub use themes::{map_themes, theme_phase_table, ThemeBreakdown, ThemeMap, ThemePhaseRow, ThemeSummary};

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Topic id used for documents outside every cluster.
pub const OUTLIER: i64 = -1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TopicModelConfig {
    pub n_topics_target: usize,
    pub min_cluster_size: usize,
    pub reduced_dim: usize,
    pub ngram_max: usize,
    pub diversity: f64,
    pub top_n_terms: usize,
    pub random_seed: u64,
    /// Terms ignored during term weighting. Empty by default.
    pub stopwords: Vec<String>,
}

impl Default for TopicModelConfig {
    fn default() -> Self {
        Self {
            n_topics_target: 150,
            min_cluster_size: 10,
            reduced_dim: 5,
            ngram_max: 2,
            diversity: 1.0,
            top_n_terms: 10,
            random_seed: 42,
            stopwords: Vec::new(),
        }
    }
}

impl TopicModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_cluster_size < 2 {
            return Err(Error::Config("min_cluster_size must be at least 2".into()));
        }
        if self.reduced_dim == 0 {
            return Err(Error::Config("reduced_dim must be at least 1".into()));
        }
        if self.n_topics_target == 0 {
            return Err(Error::Config("n_topics_target must be at least 1".into()));
        }
        if !(1..=2).contains(&self.ngram_max) {
            return Err(Error::Config("ngram_max must be 1 or 2".into()));
        }
        if !(0.0..=1.0).contains(&self.diversity) {
            return Err(Error::Config("diversity must be in [0, 1]".into()));
        }
        Ok(())
    }
}

/// One topic id per document, in corpus order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TopicAssignment {
    ids: Vec<String>,
    topics: Vec<i64>,
    index: HashMap<String, usize>,
}

impl TopicAssignment {
    pub fn new(pairs: impl IntoIterator<Item = (String, i64)>) -> Result<Self> {
        let mut a = Self::default();
        for (id, topic) in pairs {
            if topic < OUTLIER {
                return Err(Error::Invalid(format!("topic id {topic} for '{id}'")));
            }
            if a.index.insert(id.clone(), a.ids.len()).is_some() {
                return Err(Error::Invalid(format!("document '{id}' assigned twice")));
            }
            a.ids.push(id);
            a.topics.push(topic);
        }
        Ok(a)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<i64> {
        self.index.get(id).map(|&i| self.topics[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, i64)> {
        self.ids
            .iter()
            .map(String::as_str)
            .zip(self.topics.iter().copied())
    }

    /// Sorted non-outlier topic ids.
    pub fn topic_ids(&self) -> Vec<i64> {
        let mut ids: Vec<i64> = self.topics.iter().copied().filter(|&t| t != OUTLIER).collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    pub fn size(&self, topic: i64) -> usize {
        self.topics.iter().filter(|&&t| t == topic).count()
    }

    pub fn outliers(&self) -> usize {
        self.size(OUTLIER)
    }

    /// CSV with columns `tweet_id, topic`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        let err = |e: csv::Error| Error::Invalid(format!("csv write: {e}"));
        w.write_record(["tweet_id", "topic"]).map_err(err)?;
        for (id, t) in self.iter() {
            w.write_record([id, &t.to_string()]).map_err(err)?;
        }
        w.flush().map_err(|e| Error::Invalid(e.to_string()))
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut r =
            csv::Reader::from_path(path).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))?;
        let mut pairs = Vec::new();
        for (i, row) in r.records().enumerate() {
            let row = row.map_err(|e| Error::parse(path, i + 2, e.to_string()))?;
            let topic = row
                .get(1)
                .unwrap_or_default()
                .parse()
                .map_err(|_| Error::parse(path, i + 2, "bad topic id"))?;
            pairs.push((row.get(0).unwrap_or_default().to_string(), topic));
        }
        Self::new(pairs)
    }
}

/// Embeds nothing itself: takes document vectors, projects the nonzero ones
/// and clusters them. Zero vectors become outliers.
pub fn fit_topics(docs: &[DocVector], config: &TopicModelConfig) -> Result<TopicAssignment> {
    config.validate()?;
    let nonzero: Vec<usize> = (0..docs.len()).filter(|&i| !docs[i].is_zero()).collect();
    let vectors: Vec<Vec<f64>> = nonzero.iter().map(|&i| docs[i].vector.clone()).collect();
    let reduced = reduce(&vectors, config.reduced_dim, config.random_seed)?;
    let labels = cluster(&reduced, config);
    let mut topics = vec![OUTLIER; docs.len()];
    for (k, &i) in nonzero.iter().enumerate() {
        topics[i] = labels[k];
    }
    TopicAssignment::new(docs.iter().map(|d| d.tweet_id.clone()).zip(topics))
}
