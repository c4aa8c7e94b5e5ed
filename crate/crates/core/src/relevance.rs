//! Seed-term matching with exclusion-term suppression.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::corpus::{tokenize, TweetRecord};
use crate::seedex::SeedList;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchLocation {
    Text,
    Hashtag,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MatchResult {
    pub tweet_id: String,
    pub matched_terms: BTreeSet<String>,
    pub locations: BTreeSet<MatchLocation>,
}

/// Documents whose matches are all exclusion terms are dropped.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExclusionRule {
    pub terms: BTreeSet<String>,
}

impl ExclusionRule {
    pub fn new<I, S>(terms: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Self {
            terms: terms.into_iter().map(|t| t.as_ref().to_lowercase()).collect(),
        }
    }
}

impl Default for ExclusionRule {
    fn default() -> Self {
        Self::new(["infektion"])
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterStats {
    pub total: usize,
    pub matched: usize,
    pub excluded: usize,
    pub relevant: usize,
}

/// Seed terms prepared for matching.
#[derive(Debug, Clone)]
pub struct Matcher {
    terms: HashSet<String>,
    substring: bool,
}

impl Matcher {
    pub fn new<I, S>(terms: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Self {
            terms: terms.into_iter().map(|t| t.as_ref().to_lowercase()).collect(),
            substring: false,
        }
    }

    pub fn from_seeds(seeds: &SeedList) -> Self {
        Self::new(seeds.match_terms())
    }

    /// Also match seed terms occurring inside longer tokens (compounds). Off by default.
    pub fn with_substring(mut self, on: bool) -> Self {
        self.substring = on;
        self
    }

    fn hits<'a>(&'a self, token: &'a str) -> impl Iterator<Item = &'a String> + 'a {
        self.terms
            .iter()
            .filter(move |t| t.as_str() == token || (self.substring && token.contains(t.as_str())))
    }

    /// Seed terms equal to a text token or a whole hashtag, with where they were found.
    /// `#tag` tokens inside the text count as hashtag hits.
    pub fn match_record(&self, record: &TweetRecord) -> MatchResult {
        let mut result = MatchResult {
            tweet_id: record.id.clone(),
            ..Default::default()
        };
        for token in tokenize(&record.text) {
            let location = if token.is_hashtag {
                MatchLocation::Hashtag
            } else {
                MatchLocation::Text
            };
            for t in self.hits(&token.surface) {
                result.matched_terms.insert(t.clone());
                result.locations.insert(location);
            }
        }
        for tag in &record.hashtags {
            let tag = tag.to_lowercase();
            for t in self.hits(&tag) {
                result.matched_terms.insert(t.clone());
                result.locations.insert(MatchLocation::Hashtag);
            }
        }
        result
    }
}

/// Matches one record against a seed list, token-exact and case-insensitive.
pub fn match_record(record: &TweetRecord, seeds: &SeedList) -> MatchResult {
    Matcher::from_seeds(seeds).match_record(record)
}

/// True when at least one matched term is not an exclusion term.
pub fn is_relevant(m: &MatchResult, excl: &ExclusionRule) -> bool {
    m.matched_terms.iter().any(|t| !excl.terms.contains(t))
}

/// Keeps relevant records in input order.
pub fn filter_corpus(
    corpus: &[TweetRecord],
    matcher: &Matcher,
    excl: &ExclusionRule,
) -> (Vec<TweetRecord>, FilterStats) {
    let mut stats = FilterStats {
        total: corpus.len(),
        ..Default::default()
    };
    let mut relevant = Vec::new();
    for record in corpus {
        let m = matcher.match_record(record);
        if m.matched_terms.is_empty() {
            continue;
        }
        stats.matched += 1;
        if is_relevant(&m, excl) {
            relevant.push(record.clone());
        } else {
            stats.excluded += 1;
        }
    }
    stats.relevant = relevant.len();
    (relevant, stats)
}
