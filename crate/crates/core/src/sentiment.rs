//! Dual-polarity lexicon scoring and daily metric aggregation.
//!
//! Every document gets a positive strength in `1..=5` and a negative
//! strength in `-5..=-1`. The strongest sentiment word of each polarity
//! decides the score. A negator directly in front of a sentiment word flips
//! its sign, a booster directly in front raises its magnitude by one (capped
//! at 5).

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use chrono::{Days, NaiveDate};
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::corpus::Token;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Default)]
pub struct SentimentLexicon {
    entries: HashMap<String, i8>,
    boosters: HashSet<String>,
    negators: HashSet<String>,
}

impl SentimentLexicon {
    pub fn new() -> Self {
        Self::default()
    }

    fn ensure_fresh(&self, term: &str) -> Result<()> {
        if self.entries.contains_key(term) || self.boosters.contains(term) || self.negators.contains(term) {
            return Err(Error::Invalid(format!("lexicon term '{term}' listed twice")));
        }
        Ok(())
    }

    /// Adds a sentiment term. Strength must be in `2..=5` or `-5..=-2`.
    pub fn add_term(&mut self, term: &str, strength: i8) -> Result<()> {
        let term = term.to_lowercase();
        if !(2..=5).contains(&strength.unsigned_abs()) {
            return Err(Error::Invalid(format!(
                "strength {strength} of '{term}' outside 2..5 / -5..-2"
            )));
        }
        self.ensure_fresh(&term)?;
        self.entries.insert(term, strength);
        Ok(())
    }

    pub fn add_booster(&mut self, term: &str) -> Result<()> {
        let term = term.to_lowercase();
        self.ensure_fresh(&term)?;
        self.boosters.insert(term);
        Ok(())
    }

    pub fn add_negator(&mut self, term: &str) -> Result<()> {
        let term = term.to_lowercase();
        self.ensure_fresh(&term)?;
        self.negators.insert(term);
        Ok(())
    }

    pub fn strength(&self, term: &str) -> Option<i8> {
        self.entries.get(term).copied()
    }

    /// Reads a TSV lexicon: `term`, `class` (sentiment|booster|negator), `strength`.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut lex = Self::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
            if i == 0 && cols[0].eq_ignore_ascii_case("term") {
                continue;
            }
            let bad = |m: String| Error::parse(path, i + 1, m);
            let class = cols.get(1).copied().unwrap_or_default();
            let strength = cols.get(2).copied().unwrap_or_default();
            match class {
                "sentiment" => {
                    let s: i8 = strength
                        .parse()
                        .map_err(|_| bad(format!("bad strength '{strength}'")))?;
                    lex.add_term(cols[0], s).map_err(|e| bad(e.to_string()))?;
                }
                "booster" => lex.add_booster(cols[0]).map_err(|e| bad(e.to_string()))?,
                "negator" => lex.add_negator(cols[0]).map_err(|e| bad(e.to_string()))?,
                other => return Err(bad(format!("unknown class '{other}'"))),
            }
        }
        Ok(lex)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SentimentScore {
    pub pos: i8,
    pub neg: i8,
}

impl SentimentScore {
    pub const NEUTRAL: Self = Self { pos: 1, neg: -1 };

    pub fn new(pos: i8, neg: i8) -> Result<Self> {
        if !(1..=5).contains(&pos) || !(-5..=-1).contains(&neg) {
            return Err(Error::Invalid(format!("score ({pos}, {neg}) out of range")));
        }
        Ok(Self { pos, neg })
    }

    pub fn pos_rescaled(self) -> i8 {
        self.pos - 1
    }

    pub fn neg_rescaled(self) -> i8 {
        self.neg + 1
    }

    /// Rescaled positive plus rescaled negative, in `-4..=4`.
    pub fn combined(self) -> i64 {
        i64::from(self.pos_rescaled()) + i64::from(self.neg_rescaled())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Positive,
    Negative,
    NeutralMixed,
}

pub fn score(tokens: &[Token], lexicon: &SentimentLexicon) -> SentimentScore {
    let mut pos = 1i8;
    let mut neg = 1i8;
    for (i, token) in tokens.iter().enumerate() {
        let Some(mut s) = lexicon.strength(&token.surface) else {
            continue;
        };
        if let Some(prev) = i.checked_sub(1).map(|j| tokens[j].surface.as_str()) {
            if lexicon.negators.contains(prev) {
                s = -s;
            } else if lexicon.boosters.contains(prev) {
                s = s.signum() * (s.abs() + 1).min(5);
            }
        }
        if s > 0 {
            pos = pos.max(s);
        } else {
            neg = neg.max(-s);
        }
    }
    SentimentScore { pos, neg: -neg }
}

pub fn label(s: SentimentScore) -> Label {
    let neg = s.neg.abs();
    if s.pos > neg {
        Label::Positive
    } else if neg > s.pos {
        Label::Negative
    } else {
        Label::NeutralMixed
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Metric {
    Sum,
    Rel,
    Pos,
    Neg,
    Count,
}

impl Metric {
    pub const SENTIMENT: [Metric; 4] = [Metric::Sum, Metric::Rel, Metric::Pos, Metric::Neg];
    pub const ALL: [Metric; 5] = [Metric::Sum, Metric::Rel, Metric::Pos, Metric::Neg, Metric::Count];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Sum => "SUM",
            Self::Rel => "REL",
            Self::Pos => "POS",
            Self::Neg => "NEG",
            Self::Count => "COUNT",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Invalid(format!("unknown metric '{s}'")))
    }
}

/// Per-day partial sums; merging is associative and commutative.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DayTotals {
    pub count: u64,
    pub sum: i64,
    pub pos: u64,
    pub neg: u64,
}

impl DayTotals {
    pub fn add(&mut self, s: SentimentScore) {
        self.count += 1;
        self.sum += s.combined();
        match label(s) {
            Label::Positive => self.pos += 1,
            Label::Negative => self.neg += 1,
            Label::NeutralMixed => {}
        }
    }

    pub fn merge(&mut self, other: &DayTotals) {
        self.count += other.count;
        self.sum += other.sum;
        self.pos += other.pos;
        self.neg += other.neg;
    }

    fn metric(&self, metric: Metric) -> Ratio<i64> {
        match metric {
            Metric::Sum => Ratio::from_integer(self.sum),
            Metric::Rel if self.count == 0 => Ratio::from_integer(0),
            Metric::Rel => Ratio::new(self.sum, self.count as i64),
            Metric::Pos => Ratio::from_integer(self.pos as i64),
            Metric::Neg => Ratio::from_integer(self.neg as i64),
            Metric::Count => Ratio::from_integer(self.count as i64),
        }
    }
}

/// One value per calendar day over a contiguous date range. Values are kept
/// as exact rationals; [`DailySeries::value`] gives the rounded float.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DailySeries {
    pub metric: Metric,
    pub begin: NaiveDate,
    exact: Vec<Ratio<i64>>,
    counts: Vec<u64>,
    pub empty_days: BTreeSet<NaiveDate>,
}

impl DailySeries {
    pub fn from_totals(metric: Metric, begin: NaiveDate, days: &[DayTotals]) -> Self {
        let empty_days = days
            .iter()
            .enumerate()
            .filter(|(_, d)| d.count == 0)
            .map(|(i, _)| begin + Days::new(i as u64))
            .collect();
        Self {
            metric,
            begin,
            exact: days.iter().map(|d| d.metric(metric)).collect(),
            counts: days.iter().map(|d| d.count).collect(),
            empty_days,
        }
    }

    /// Integer-valued series (e.g. theme counts) where `counts` are the documents behind each value.
    pub fn from_counts(begin: NaiveDate, counts: &[u64]) -> Self {
        let totals: Vec<DayTotals> = counts
            .iter()
            .map(|&c| DayTotals {
                count: c,
                ..Default::default()
            })
            .collect();
        Self::from_totals(Metric::Count, begin, &totals)
    }

    pub fn len(&self) -> usize {
        self.exact.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exact.is_empty()
    }

    pub fn end(&self) -> NaiveDate {
        self.date(self.len().saturating_sub(1))
    }

    pub fn date(&self, i: usize) -> NaiveDate {
        self.begin + Days::new(i as u64)
    }

    pub fn dates(&self) -> Vec<NaiveDate> {
        (0..self.len()).map(|i| self.date(i)).collect()
    }

    pub fn index_of(&self, date: NaiveDate) -> Option<usize> {
        let i = (date - self.begin).num_days();
        (i >= 0 && (i as usize) < self.len()).then_some(i as usize)
    }

    pub fn exact(&self, i: usize) -> Ratio<i64> {
        self.exact[i]
    }

    pub fn count(&self, i: usize) -> u64 {
        self.counts[i]
    }

    pub fn value(&self, i: usize) -> f64 {
        ratio_to_f64(self.exact[i])
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.value(i)).collect()
    }

    /// CSV with columns `date, value, count, empty_flag`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        let io = |e: csv::Error| Error::Invalid(format!("csv write: {e}"));
        w.write_record(["date", "value", "count", "empty_flag"])
            .map_err(io)?;
        for i in 0..self.len() {
            let d = self.date(i);
            w.write_record([
                d.to_string(),
                self.value(i).to_string(),
                self.counts[i].to_string(),
                u8::from(self.empty_days.contains(&d)).to_string(),
            ])
            .map_err(io)?;
        }
        w.flush().map_err(|e| Error::Invalid(format!("csv write: {e}")))?;
        Ok(())
    }

    pub fn read_csv(path: &Path, metric: Metric) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut r = csv::Reader::from_reader(file);
        let mut begin = None;
        let mut exact = Vec::new();
        let mut counts = Vec::new();
        let mut empty_days = BTreeSet::new();
        for (i, row) in r.records().enumerate() {
            let line = i + 2;
            let row = row.map_err(|e| Error::parse(path, line, e.to_string()))?;
            let bad = |m: &str| Error::parse(path, line, m.to_string());
            let date: NaiveDate = row
                .get(0)
                .unwrap_or_default()
                .parse()
                .map_err(|_| bad("bad date"))?;
            let value: f64 = row
                .get(1)
                .unwrap_or_default()
                .parse()
                .map_err(|_| bad("bad value"))?;
            let count: u64 = row
                .get(2)
                .unwrap_or_default()
                .parse()
                .map_err(|_| bad("bad count"))?;
            let start = *begin.get_or_insert(date);
            if date != start + Days::new(exact.len() as u64) {
                return Err(bad("dates are not contiguous"));
            }
            if row.get(3) == Some("1") {
                empty_days.insert(date);
            }
            let v = if metric == Metric::Rel && count > 0 {
                Ratio::new((value * count as f64).round() as i64, count as i64)
            } else {
                Ratio::from_integer(value.round() as i64)
            };
            exact.push(v);
            counts.push(count);
        }
        let begin = begin.ok_or_else(|| Error::parse(path, 1, "empty series"))?;
        Ok(Self {
            metric,
            begin,
            exact,
            counts,
            empty_days,
        })
    }
}

pub(crate) fn ratio_to_f64(r: Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Per-day totals for dated scores over `first..=last`.
pub fn daily_totals(
    scored: &[(NaiveDate, SentimentScore)],
    first: NaiveDate,
    last: NaiveDate,
) -> Result<Vec<DayTotals>> {
    if first > last {
        return Err(Error::Config(format!("window {first}..{last} is reversed")));
    }
    let n = (last - first).num_days() as usize + 1;
    let mut days = vec![DayTotals::default(); n];
    let mut partial: BTreeMap<usize, DayTotals> = BTreeMap::new();
    for (date, s) in scored {
        if *date < first || *date > last {
            return Err(Error::Invalid(format!(
                "record dated {date} outside {first}..{last}"
            )));
        }
        partial
            .entry((*date - first).num_days() as usize)
            .or_default()
            .add(*s);
    }
    for (i, t) in partial {
        days[i].merge(&t);
    }
    Ok(days)
}

/// Aggregates dated scores into one contiguous daily series.
pub fn aggregate(
    scored: &[(NaiveDate, SentimentScore)],
    metric: Metric,
    first: NaiveDate,
    last: NaiveDate,
) -> Result<DailySeries> {
    let days = daily_totals(scored, first, last)?;
    Ok(DailySeries::from_totals(metric, first, &days))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tokenize;

    fn lexicon() -> SentimentLexicon {
        let mut l = SentimentLexicon::new();
        l.add_term("super", 3).unwrap();
        l.add_term("schrecklich", -4).unwrap();
        l.add_term("gut", 2).unwrap();
        l.add_negator("nicht").unwrap();
        l.add_booster("sehr").unwrap();
        l
    }

    fn s(text: &str) -> SentimentScore {
        score(&tokenize(text), &lexicon())
    }

    fn d(day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(2021, 3, day).unwrap()
    }

    #[test]
    fn scoring_rules() {
        let none = s("ganz normale worte");
        assert_eq!(none, SentimentScore::NEUTRAL);
        assert_eq!((none.pos_rescaled(), none.neg_rescaled()), (0, 0));

        let mixed = s("Super, aber schrecklich");
        assert_eq!((mixed.pos, mixed.neg), (3, -4));
        assert_eq!(label(mixed), Label::Negative);

        assert_eq!(s("nicht super"), SentimentScore { pos: 1, neg: -3 });
        assert_eq!(s("sehr super"), SentimentScore { pos: 4, neg: -1 });
        assert_eq!(s("nicht schrecklich"), SentimentScore { pos: 4, neg: -1 });
    }

    #[test]
    fn booster_caps_at_five() {
        let mut l = lexicon();
        l.add_term("grauenhaft", -5).unwrap();
        assert_eq!(score(&tokenize("sehr grauenhaft"), &l).neg, -5);
    }

    #[test]
    fn labels() {
        assert_eq!(label(SentimentScore { pos: 3, neg: -1 }), Label::Positive);
        assert_eq!(label(SentimentScore { pos: 2, neg: -2 }), Label::NeutralMixed);
        assert_eq!(label(SentimentScore { pos: 1, neg: -4 }), Label::Negative);
    }

    #[test]
    fn lexicon_rejects_duplicates_and_bad_strengths() {
        let mut l = lexicon();
        assert!(l.add_term("super", 4).is_err());
        assert!(l.add_booster("nicht").is_err());
        assert!(l.add_term("lau", 1).is_err());
        assert!(l.add_term("mies", -6).is_err());
    }

    #[test]
    fn aggregate_single_and_pair() {
        let one = [(d(1), SentimentScore { pos: 3, neg: -1 })];
        for (m, v) in [
            (Metric::Sum, 2.0),
            (Metric::Rel, 2.0),
            (Metric::Pos, 1.0),
            (Metric::Neg, 0.0),
            (Metric::Count, 1.0),
        ] {
            assert_eq!(aggregate(&one, m, d(1), d(1)).unwrap().value(0), v, "{m}");
        }
        let two = [
            (d(1), SentimentScore { pos: 3, neg: -1 }),
            (d(1), SentimentScore { pos: 1, neg: -4 }),
        ];
        for (m, v) in [
            (Metric::Sum, -1.0),
            (Metric::Rel, -0.5),
            (Metric::Pos, 1.0),
            (Metric::Neg, 1.0),
        ] {
            assert_eq!(aggregate(&two, m, d(1), d(1)).unwrap().value(0), v, "{m}");
        }
    }

    #[test]
    fn empty_days_are_flagged() {
        let one = [(d(2), SentimentScore { pos: 3, neg: -1 })];
        let rel = aggregate(&one, Metric::Rel, d(1), d(3)).unwrap();
        assert_eq!(rel.values(), [0.0, 2.0, 0.0]);
        assert_eq!(rel.empty_days, [d(1), d(3)].into_iter().collect());
        assert!(aggregate(&one, Metric::Rel, d(3), d(4)).is_err());
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let scores = [
            (d(1), SentimentScore { pos: 2, neg: -1 }),
            (d(1), SentimentScore { pos: 1, neg: -1 }),
            (d(1), SentimentScore { pos: 1, neg: -1 }),
            (d(3), SentimentScore { pos: 2, neg: -5 }),
        ];
        let dir = tempfile::tempdir().unwrap();
        for m in Metric::ALL {
            let series = aggregate(&scores, m, d(1), d(4)).unwrap();
            let p = dir.path().join(format!("{m}.csv"));
            series.write_csv(std::fs::File::create(&p).unwrap()).unwrap();
            let back = DailySeries::read_csv(&p, m).unwrap();
            assert_eq!(back, series, "{m}");
        }
        let rel = aggregate(&scores, Metric::Rel, d(1), d(4)).unwrap();
        let p = dir.path().join("rel.csv");
        rel.write_csv(std::fs::File::create(&p).unwrap()).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert_eq!(
            text,
            "date,value,count,empty_flag\n2021-03-01,0.3333333333333333,3,0\n2021-03-02,0,0,1\n2021-03-03,-3,1,0\n2021-03-04,0,0,1\n"
        );
    }
}
