use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{TopicAssignment, OUTLIER};
use crate::analytics::PhaseTable;
use crate::corpus::TweetRecord;
use crate::error::{Error, Result};
use crate::sentiment::{DailySeries, SentimentScore};

/// Analyst-defined grouping of topics, plus optional manual topic labels.
///
/// ```toml
/// [themes]
/// "specific vaccines" = [0, 4]
/// "freedom and civic liberties" = [2]
///
/// [labels]
/// 0 = "AstraZeneca"
/// ```
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ThemeMap {
    #[serde(default)]
    pub themes: BTreeMap<String, Vec<i64>>,
    #[serde(default)]
    pub labels: BTreeMap<i64, String>,
}

impl ThemeMap {
    pub fn parse(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Raw {
            #[serde(default)]
            themes: BTreeMap<String, Vec<i64>>,
            #[serde(default)]
            labels: BTreeMap<String, String>,
        }
        let raw: Raw = toml::from_str(text).map_err(|e| Error::Config(format!("theme map: {e}")))?;
        let mut labels = BTreeMap::new();
        for (k, v) in raw.labels {
            let id: i64 = k
                .parse()
                .map_err(|_| Error::Config(format!("theme map: label key '{k}' is not a topic id")))?;
            labels.insert(id, v);
        }
        let map = Self {
            themes: raw.themes,
            labels,
        };
        let mut owner: HashMap<i64, &str> = HashMap::new();
        for (theme, ids) in &map.themes {
            for id in ids {
                if let Some(prev) = owner.insert(*id, theme) {
                    return Err(Error::Config(format!(
                        "topic {id} mapped to both '{prev}' and '{theme}'"
                    )));
                }
            }
        }
        Ok(map)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Fails when a theme names a topic the model does not have.
    pub fn validate(&self, assignment: &TopicAssignment) -> Result<()> {
        let known = assignment.topic_ids();
        for (theme, ids) in &self.themes {
            for id in ids {
                if *id == OUTLIER || known.binary_search(id).is_err() {
                    return Err(Error::Config(format!("theme '{theme}' names unknown topic {id}")));
                }
            }
        }
        Ok(())
    }

    pub fn theme_of(&self, topic: i64) -> Option<&str> {
        self.themes
            .iter()
            .find(|(_, ids)| ids.contains(&topic))
            .map(|(name, _)| name.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThemeSummary {
    pub theme: String,
    pub topics: Vec<i64>,
    pub size: usize,
    pub mean_rel: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThemeBreakdown {
    pub summaries: Vec<ThemeSummary>,
    /// Daily document counts per theme.
    pub series: Vec<(String, DailySeries)>,
}

fn theme_members<'a>(
    assignment: &TopicAssignment,
    map: &ThemeMap,
    corpus: &'a [TweetRecord],
) -> BTreeMap<String, Vec<&'a TweetRecord>> {
    let mut members: BTreeMap<String, Vec<&TweetRecord>> =
        map.themes.keys().map(|k| (k.clone(), Vec::new())).collect();
    for r in corpus {
        let Some(topic) = assignment.get(&r.id) else {
            continue;
        };
        if let Some(theme) = map.theme_of(topic) {
            members.get_mut(theme).unwrap().push(r);
        }
    }
    members
}

fn mean_rel(docs: &[&TweetRecord], scores: &HashMap<String, SentimentScore>) -> f64 {
    if docs.is_empty() {
        return 0.0;
    }
    let sum: i64 = docs
        .iter()
        .filter_map(|r| scores.get(&r.id))
        .map(|s| s.combined())
        .sum();
    sum as f64 / docs.len() as f64
}

/// Per-theme size, mean sentiment and daily counts over `first..=last`.
/// Outliers and documents of unmapped topics are left out.
pub fn map_themes(
    assignment: &TopicAssignment,
    map: &ThemeMap,
    corpus: &[TweetRecord],
    scores: &HashMap<String, SentimentScore>,
    first: NaiveDate,
    last: NaiveDate,
) -> Result<ThemeBreakdown> {
    map.validate(assignment)?;
    if first > last {
        return Err(Error::Config(format!("window {first}..{last} is reversed")));
    }
    let days = (last - first).num_days() as usize + 1;
    let members = theme_members(assignment, map, corpus);
    let mut summaries = Vec::new();
    let mut series = Vec::new();
    for (theme, docs) in &members {
        let mut counts = vec![0u64; days];
        for r in docs {
            let d = r.day();
            if d >= first && d <= last {
                counts[(d - first).num_days() as usize] += 1;
            }
        }
        summaries.push(ThemeSummary {
            theme: theme.clone(),
            topics: map.themes[theme].clone(),
            size: docs.len(),
            mean_rel: mean_rel(docs, scores),
        });
        series.push((theme.clone(), DailySeries::from_counts(first, &counts)));
    }
    summaries.sort_by(|a, b| b.size.cmp(&a.size).then_with(|| a.theme.cmp(&b.theme)));
    Ok(ThemeBreakdown { summaries, series })
}

/// One row of the theme-by-phase table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThemePhaseRow {
    pub phase: String,
    pub theme: String,
    pub count: usize,
    /// Percentage of all themed documents in this phase.
    pub share: f64,
    pub mean_rel: f64,
}

/// Theme frequencies and mean sentiment for each phase of `phases`.
pub fn theme_phase_table(
    assignment: &TopicAssignment,
    map: &ThemeMap,
    corpus: &[TweetRecord],
    scores: &HashMap<String, SentimentScore>,
    phases: &PhaseTable,
) -> Vec<ThemePhaseRow> {
    let members = theme_members(assignment, map, corpus);
    let mut rows = Vec::new();
    for phase in phases.rows() {
        let in_phase: Vec<(&String, Vec<&TweetRecord>)> = members
            .iter()
            .map(|(theme, docs)| {
                let docs = docs
                    .iter()
                    .copied()
                    .filter(|r| {
                        phases
                            .phase_of(r.day())
                            .map(|p| p.name == phase.name)
                            .unwrap_or(false)
                    })
                    .collect();
                (theme, docs)
            })
            .collect();
        let total: usize = in_phase.iter().map(|(_, d)| d.len()).sum();
        for (theme, docs) in in_phase {
            rows.push(ThemePhaseRow {
                phase: phase.name.clone(),
                theme: theme.clone(),
                count: docs.len(),
                share: if total == 0 {
                    0.0
                } else {
                    100.0 * docs.len() as f64 / total as f64
                },
                mean_rel: mean_rel(&docs, scores),
            });
        }
    }
    rows
}
