//! Corpus ingest, tokenization and table-driven lemmatization.
//!
//! The corpus is line-delimited JSON, one record per line:
//!
//! ```text
//! {"id":"1","created_at":"2021-03-15T08:00:00Z","lang":"de","text":"Die Impfung!","hashtags":["impfung"]}
//! ```

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use chrono::{DateTime, NaiveDate, SecondsFormat, Timelike, Utc};
use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};

/// One corpus document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TweetRecord {
    pub id: String,
    #[serde(with = "utc_seconds")]
    pub created_at: DateTime<Utc>,
    pub lang: String,
    pub text: String,
    pub hashtags: Vec<String>,
}

impl TweetRecord {
    /// UTC calendar day of `created_at`.
    pub fn day(&self) -> NaiveDate {
        self.created_at.date_naive()
    }

    pub fn tokens(&self) -> Vec<Token> {
        tokenize(&self.text)
    }
}

mod utc_seconds {
    use chrono::{DateTime, SecondsFormat, Utc};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(t: &DateTime<Utc>, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&t.to_rfc3339_opts(SecondsFormat::Secs, true))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DateTime<Utc>, D::Error> {
        let raw = String::deserialize(d)?;
        super::parse_timestamp(&raw).map_err(serde::de::Error::custom)
    }
}

/// Parses an ISO-8601 instant, truncated to whole seconds.
pub fn parse_timestamp(raw: &str) -> std::result::Result<DateTime<Utc>, String> {
    let parsed = DateTime::parse_from_rfc3339(raw.trim())
        .map(|t| t.with_timezone(&Utc))
        .or_else(|_| {
            chrono::NaiveDateTime::parse_from_str(raw.trim(), "%Y-%m-%dT%H:%M:%S").map(|t| t.and_utc())
        })
        .map_err(|e| format!("bad timestamp '{raw}': {e}"))?;
    Ok(parsed.with_nanosecond(0).unwrap_or(parsed))
}

pub fn format_timestamp(t: &DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::Secs, true)
}

#[derive(Deserialize)]
struct RawRecord {
    id: String,
    created_at: String,
    lang: String,
    text: String,
    #[serde(default)]
    hashtags: Vec<String>,
}

impl RawRecord {
    fn validate(self) -> std::result::Result<TweetRecord, String> {
        let id = self.id.trim().to_string();
        if id.is_empty() {
            return Err("empty id".into());
        }
        let created_at = parse_timestamp(&self.created_at)?;
        let mut hashtags = Vec::with_capacity(self.hashtags.len());
        for tag in self.hashtags {
            let tag = tag.trim().trim_start_matches('#').to_lowercase();
            if tag.is_empty() || tag.contains('#') || tag.chars().any(char::is_whitespace) {
                return Err(format!("invalid hashtag '{tag}'"));
            }
            hashtags.push(tag.nfc().collect());
        }
        Ok(TweetRecord {
            id,
            created_at,
            lang: self.lang.trim().to_lowercase(),
            text: self.text.nfc().collect(),
            hashtags,
        })
    }
}

/// Inclusive time window plus language tag applied at ingest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadFilter {
    pub begin: DateTime<Utc>,
    pub end: DateTime<Utc>,
    pub lang: String,
}

impl LoadFilter {
    pub fn new(begin: DateTime<Utc>, end: DateTime<Utc>, lang: impl Into<String>) -> Result<Self> {
        if begin > end {
            return Err(Error::Config(format!("window begin {begin} is after end {end}")));
        }
        Ok(Self {
            begin,
            end,
            lang: lang.into().to_lowercase(),
        })
    }

    /// Window covering whole UTC days `first..=last`.
    pub fn from_days(first: NaiveDate, last: NaiveDate, lang: impl Into<String>) -> Result<Self> {
        let begin = first.and_hms_opt(0, 0, 0).unwrap().and_utc();
        let end = last.and_hms_opt(23, 59, 59).unwrap().and_utc();
        Self::new(begin, end, lang)
    }

    pub fn admits(&self, record: &TweetRecord) -> bool {
        self.in_window(record) && record.lang == self.lang
    }

    fn in_window(&self, record: &TweetRecord) -> bool {
        self.begin <= record.created_at && record.created_at <= self.end
    }
}

/// Line accounting for one ingest pass. The five outcome counts partition `read`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadStats {
    pub read: usize,
    pub kept: usize,
    pub dropped_time: usize,
    pub dropped_lang: usize,
    pub malformed: usize,
    pub duplicates: usize,
}

impl LoadStats {
    pub fn outcome_total(&self) -> usize {
        self.kept + self.dropped_time + self.dropped_lang + self.malformed + self.duplicates
    }

    /// Adds another partial count; order-independent.
    pub fn merge(&mut self, other: &LoadStats) {
        self.read += other.read;
        self.kept += other.kept;
        self.dropped_time += other.dropped_time;
        self.dropped_lang += other.dropped_lang;
        self.malformed += other.malformed;
        self.duplicates += other.duplicates;
    }
}

/// Reads and filters a corpus file. Malformed lines are counted, never fatal.
pub fn load_corpus(path: &Path, filter: &LoadFilter) -> Result<(Vec<TweetRecord>, LoadStats)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_corpus(BufReader::new(file), filter).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

/// Same as [`load_corpus`] over any buffered reader. Blank lines are ignored.
pub fn read_corpus<R: BufRead>(reader: R, filter: &LoadFilter) -> Result<(Vec<TweetRecord>, LoadStats)> {
    let mut stats = LoadStats::default();
    let mut seen = HashSet::new();
    let mut records = Vec::new();
    for line in reader.lines() {
        let line = line.map_err(|e| Error::io("<corpus>", e))?;
        if line.trim().is_empty() {
            continue;
        }
        stats.read += 1;
        let record = match serde_json::from_str::<RawRecord>(&line)
            .map_err(|e| e.to_string())
            .and_then(RawRecord::validate)
        {
            Ok(r) => r,
            Err(_) => {
                stats.malformed += 1;
                continue;
            }
        };
        if !seen.insert(record.id.clone()) {
            stats.duplicates += 1;
        } else if !filter.in_window(&record) {
            stats.dropped_time += 1;
        } else if record.lang != filter.lang {
            stats.dropped_lang += 1;
        } else {
            stats.kept += 1;
            records.push(record);
        }
    }
    Ok((records, stats))
}

/// Writes records in the ingest format, preserving order.
pub fn write_corpus<W: Write>(mut out: W, records: &[TweetRecord]) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// A single case-folded word unit.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Token {
    pub surface: String,
    pub lemma: String,
    pub is_hashtag: bool,
}

impl Token {
    fn new(surface: String, is_hashtag: bool) -> Self {
        Self {
            lemma: surface.clone(),
            surface,
            is_hashtag,
        }
    }
}

/// Splits on anything that is not a letter or digit and lowercases each run.
/// A run directly preceded by `#` is a hashtag token.
pub fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    let mut hashtag = false;
    let mut prev: Option<char> = None;
    for c in text.chars() {
        if c.is_alphanumeric() {
            if current.is_empty() {
                hashtag = prev == Some('#');
            }
            current.extend(c.to_lowercase());
        } else if !current.is_empty() {
            tokens.push(Token::new(std::mem::take(&mut current), hashtag));
        }
        prev = Some(c);
    }
    if !current.is_empty() {
        tokens.push(Token::new(current, hashtag));
    }
    tokens
}

/// Coarse part-of-speech class carried by the lemma table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PosClass {
    Verb,
    Adj,
    Noun,
    Propn,
    Other,
}

impl PosClass {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Verb => "verb",
            Self::Adj => "adj",
            Self::Noun => "noun",
            Self::Propn => "propn",
            Self::Other => "other",
        }
    }
}

impl FromStr for PosClass {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_lowercase().as_str() {
            "verb" => Ok(Self::Verb),
            "adj" => Ok(Self::Adj),
            "noun" => Ok(Self::Noun),
            "propn" => Ok(Self::Propn),
            "other" => Ok(Self::Other),
            other => Err(format!("unknown pos class '{other}'")),
        }
    }
}

impl std::fmt::Display for PosClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Surface → (lemma, pos class) lookup. Keys are lowercase.
#[derive(Debug, Clone, Default)]
pub struct LemmaTable {
    entries: HashMap<String, (String, PosClass)>,
}

impl LemmaTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, surface: &str, lemma: &str, pos: PosClass) {
        self.entries
            .insert(surface.to_lowercase(), (lemma.to_lowercase(), pos));
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Reads a TSV file with columns `surface`, `lemma`, `pos-class`.
    /// Lines starting with `#` are comments.
    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut table = Self::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 3 {
                return Err(Error::parse(path, i + 1, "expected 3 tab-separated columns"));
            }
            if i == 0 && cols[0].eq_ignore_ascii_case("surface") {
                continue;
            }
            let pos = cols[2].parse().map_err(|e| Error::parse(path, i + 1, e))?;
            table.insert(cols[0].trim(), cols[1].trim(), pos);
        }
        Ok(table)
    }

    pub fn lookup(&self, surface: &str) -> Option<(&str, PosClass)> {
        self.entries
            .get(&surface.to_lowercase())
            .map(|(l, p)| (l.as_str(), *p))
    }

    /// Lemma and class for a surface form; unknown forms map to themselves as nouns.
    pub fn resolve(&self, surface: &str) -> (String, PosClass) {
        match self.lookup(surface) {
            Some((lemma, pos)) => (lemma.to_string(), pos),
            None => (surface.to_lowercase(), PosClass::Noun),
        }
    }
}

/// Fills in the token's lemma from the table, falling back to the surface form.
pub fn lemmatize(mut token: Token, table: &LemmaTable) -> Token {
    token.lemma = table.resolve(&token.surface).0;
    token
}

#[cfg(test)]
mod tests {
    use super::*;

    fn surfaces(text: &str) -> Vec<String> {
        tokenize(text).into_iter().map(|t| t.surface).collect()
    }

    fn window() -> LoadFilter {
        LoadFilter::from_days(
            NaiveDate::from_ymd_opt(2021, 1, 1).unwrap(),
            NaiveDate::from_ymd_opt(2021, 12, 31).unwrap(),
            "de",
        )
        .unwrap()
    }

    #[test]
    fn tokenize_splits_and_folds() {
        assert_eq!(surfaces("Die Impfung war gut."), ["die", "impfung", "war", "gut"]);
        assert!(tokenize("").is_empty());
        assert!(tokenize(" ,.!? ").is_empty());
    }

    #[test]
    fn tokenize_hashtags() {
        let toks = tokenize("#Impfpflicht jetzt!");
        assert_eq!(toks.len(), 2);
        assert_eq!(toks[0].surface, "impfpflicht");
        assert!(toks[0].is_hashtag);
        assert_eq!(toks[1].surface, "jetzt");
        assert!(!toks[1].is_hashtag);
    }

    #[test]
    fn tokenize_keeps_umlauts_and_digits() {
        assert_eq!(
            surfaces("Impfschäden 2021: COVID-19"),
            ["impfschäden", "2021", "covid", "19"]
        );
    }

    #[test]
    fn lemmatize_is_case_insensitive_with_identity_fallback() {
        let mut table = LemmaTable::new();
        table.insert("impfungen", "impfung", PosClass::Noun);
        table.insert("impfung", "impfung", PosClass::Noun);
        let t = lemmatize(tokenize("Impfungen")[0].clone(), &table);
        assert_eq!(t.lemma, "impfung");
        let t = lemmatize(tokenize("xyzzy")[0].clone(), &table);
        assert_eq!(t.lemma, "xyzzy");
        let t = lemmatize(tokenize("IMPFUNG")[0].clone(), &table);
        assert_eq!(t.lemma, "impfung");
        assert_eq!(table.resolve("unbekannt").1, PosClass::Noun);
    }

    #[test]
    fn read_corpus_partitions_lines() {
        let input = r##"{"id":"1","created_at":"2021-03-15T10:00:00Z","lang":"de","text":"a","hashtags":["#Impfung"]}
{"id":"2","created_at":"2021-03-15T10:00:00Z","lang":"en","text":"b","hashtags":[]}
{"id":"3","created_at":"not a time","lang":"de","text":"c","hashtags":[]}
{"id":"4","created_at":"2019-03-15T10:00:00Z","lang":"de","text":"d","hashtags":[]}
{"id":"1","created_at":"2021-03-16T10:00:00Z","lang":"de","text":"dup","hashtags":[]}

garbage
{"id":"5","created_at":"2021-03-15T10:00:00.750Z","lang":"DE","text":"e","hashtags":["two words"]}
"##;
        let (records, stats) = read_corpus(input.as_bytes(), &window()).unwrap();
        assert_eq!(records.len(), 1);
        assert_eq!(records[0].hashtags, ["impfung"]);
        assert_eq!(
            stats,
            LoadStats {
                read: 7,
                kept: 1,
                dropped_time: 1,
                dropped_lang: 1,
                malformed: 3,
                duplicates: 1,
            }
        );
        assert_eq!(stats.outcome_total(), stats.read);
    }

    #[test]
    fn timestamps_truncate_to_seconds() {
        let t = parse_timestamp("2021-03-15T10:00:00.750+01:00").unwrap();
        assert_eq!(format_timestamp(&t), "2021-03-15T09:00:00Z");
    }

    #[test]
    fn reversed_window_is_rejected() {
        let a = NaiveDate::from_ymd_opt(2021, 2, 1).unwrap();
        let b = NaiveDate::from_ymd_opt(2021, 1, 1).unwrap();
        assert!(matches!(LoadFilter::from_days(a, b, "de"), Err(Error::Config(_))));
    }

    #[test]
    fn lemma_table_rejects_unknown_class() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("l.tsv");
        std::fs::write(&p, "surface\tlemma\tpos\nimpfen\timpfen\tverb\nfoo\tfoo\tbar\n").unwrap();
        let err = LemmaTable::load(&p).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
    }
}
