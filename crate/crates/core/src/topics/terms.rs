//! Class-based term weighting.
//!
//! For class `c` and term `t` (unigram or bigram):
//!
//! ```text
//! w(t, c) = tf(t, c) * ln(1 + A / f(t))
//! ```
//!
//! with `tf(t, c)` the count of `t` in `c` over the number of terms in `c`,
//! `f(t)` the count of `t` over all classes and `A` the mean number of terms
//! per class. The outlier class takes part in the counts but gets no topic.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::{TopicAssignment, TopicModelConfig, OUTLIER};
use crate::corpus::{tokenize, TweetRecord};
use crate::sentiment::SentimentScore;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topic {
    pub id: i64,
    pub size: usize,
    pub top_terms: Vec<(String, f64)>,
    pub label: Option<String>,
}

fn doc_terms(text: &str, ngram_max: usize, stopwords: &HashSet<String>) -> Vec<String> {
    let words: Vec<String> = tokenize(text)
        .into_iter()
        .map(|t| t.surface)
        .filter(|w| !stopwords.contains(w))
        .collect();
    let mut terms = words.clone();
    if ngram_max >= 2 {
        terms.extend(words.windows(2).map(|w| format!("{} {}", w[0], w[1])));
    }
    terms
}

/// Term weights per class, keyed by class id.
pub fn class_term_weights(
    classes: &BTreeMap<i64, Vec<&str>>,
    ngram_max: usize,
    stopwords: &HashSet<String>,
) -> BTreeMap<i64, BTreeMap<String, f64>> {
    let mut counts: BTreeMap<i64, BTreeMap<String, usize>> = BTreeMap::new();
    let mut overall: HashMap<String, usize> = HashMap::new();
    for (&class, docs) in classes {
        let c = counts.entry(class).or_default();
        for doc in docs {
            for t in doc_terms(doc, ngram_max, stopwords) {
                *overall.entry(t.clone()).or_default() += 1;
                *c.entry(t).or_default() += 1;
            }
        }
    }
    let total: usize = overall.values().sum();
    let avg = if counts.is_empty() {
        0.0
    } else {
        total as f64 / counts.len() as f64
    };
    counts
        .into_iter()
        .map(|(class, terms)| {
            let in_class: usize = terms.values().sum();
            let weights = terms
                .into_iter()
                .map(|(t, n)| {
                    let tf = n as f64 / in_class as f64;
                    let w = tf * (1.0 + avg / overall[&t] as f64).ln();
                    (t, w)
                })
                .collect();
            (class, weights)
        })
        .collect()
}

fn unigrams(term: &str) -> BTreeSet<&str> {
    term.split(' ').collect()
}

/// Greedy pick in weight order; a term is skipped when its unigram overlap
/// (Jaccard) with an already picked term exceeds `1 - diversity`. At
/// diversity 1.0 any shared word disqualifies; at 0.0 nothing does.
fn diverse_top(weights: &BTreeMap<String, f64>, n: usize, diversity: f64) -> Vec<(String, f64)> {
    let mut ranked: Vec<(&String, f64)> = weights.iter().map(|(t, &w)| (t, w)).collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let mut picked: Vec<(String, f64)> = Vec::new();
    for (term, w) in ranked {
        if picked.len() == n {
            break;
        }
        let words = unigrams(term);
        let clash = picked.iter().any(|(p, _)| {
            let other = unigrams(p);
            let shared = words.intersection(&other).count() as f64;
            let union = words.union(&other).count() as f64;
            shared / union > 1.0 - diversity
        });
        if !clash {
            picked.push((term.clone(), w));
        }
    }
    picked
}

/// Describes every non-outlier topic by its highest weighted terms.
pub fn topic_terms(
    assignment: &TopicAssignment,
    corpus: &[TweetRecord],
    config: &TopicModelConfig,
    labels: &BTreeMap<i64, String>,
) -> Vec<Topic> {
    let stopwords: HashSet<String> = config.stopwords.iter().map(|s| s.to_lowercase()).collect();
    let mut classes: BTreeMap<i64, Vec<&str>> = BTreeMap::new();
    for r in corpus {
        if let Some(t) = assignment.get(&r.id) {
            classes.entry(t).or_default().push(&r.text);
        }
    }
    let weights = class_term_weights(&classes, config.ngram_max, &stopwords);
    let mut topics = Vec::new();
    for (id, docs) in &classes {
        if *id == OUTLIER {
            continue;
        }
        let Some(w) = weights.get(id) else { continue };
        if w.is_empty() {
            log::warn!(target: "topics", "topic has no terms topic={id}");
            continue;
        }
        topics.push(Topic {
            id: *id,
            size: docs.len(),
            top_terms: diverse_top(w, config.top_n_terms, config.diversity),
            label: labels.get(id).cloned(),
        });
    }
    topics
}

/// One row of the topic frequency table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicRow {
    pub rank: usize,
    pub topic_id: i64,
    pub label: String,
    pub size: usize,
    pub mean_rel: f64,
}

/// Topics by size (largest first) with the mean rescaled sentiment per document.
pub fn rank_topics(
    assignment: &TopicAssignment,
    topics: &[Topic],
    scores: &HashMap<String, SentimentScore>,
) -> Vec<TopicRow> {
    let mut sums: BTreeMap<i64, (usize, i64)> = BTreeMap::new();
    for (id, t) in assignment.iter() {
        if t == OUTLIER {
            continue;
        }
        let e = sums.entry(t).or_default();
        e.0 += 1;
        e.1 += scores.get(id).map_or(0, |s| s.combined());
    }
    let label_of = |id: i64| {
        topics
            .iter()
            .find(|t| t.id == id)
            .and_then(|t| {
                t.label.clone().or_else(|| {
                    let words: Vec<&str> = t.top_terms.iter().take(3).map(|(w, _)| w.as_str()).collect();
                    (!words.is_empty()).then(|| words.join("_"))
                })
            })
            .unwrap_or_else(|| format!("topic {id}"))
    };
    let mut rows: Vec<TopicRow> = sums
        .into_iter()
        .map(|(id, (size, sum))| TopicRow {
            rank: 0,
            topic_id: id,
            label: label_of(id),
            size,
            mean_rel: sum as f64 / size as f64,
        })
        .collect();
    rows.sort_by(|a, b| b.size.cmp(&a.size).then(a.topic_id.cmp(&b.topic_id)));
    for (i, r) in rows.iter_mut().enumerate() {
        r.rank = i + 1;
    }
    rows
}
