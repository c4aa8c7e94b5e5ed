//! Phase tables and policy-event lists.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A named closed date interval.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Phase {
    pub name: String,
    pub begin: NaiveDate,
    pub end: NaiveDate,
}

/// Ordered, non-overlapping phases. Neighbouring rows may share their
/// boundary day; that day belongs to the later phase.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseTable {
    pub name: String,
    rows: Vec<Phase>,
}

impl PhaseTable {
    pub fn new(name: impl Into<String>, rows: Vec<Phase>) -> Result<Self> {
        for p in &rows {
            if p.begin > p.end {
                return Err(Error::Invalid(format!(
                    "phase '{}' begins {} after it ends {}",
                    p.name, p.begin, p.end
                )));
            }
        }
        for w in rows.windows(2) {
            if w[1].begin < w[0].end {
                return Err(Error::Invalid(format!(
                    "phases '{}' and '{}' overlap",
                    w[0].name, w[1].name
                )));
            }
        }
        Ok(Self {
            name: name.into(),
            rows,
        })
    }

    pub fn rows(&self) -> &[Phase] {
        &self.rows
    }

    pub fn phase_of(&self, date: NaiveDate) -> Option<&Phase> {
        self.rows.iter().rev().find(|p| p.begin <= date && date <= p.end)
    }

    /// Distinct begin and end dates, sorted.
    pub fn boundaries(&self) -> Vec<NaiveDate> {
        let mut b: Vec<NaiveDate> = self.rows.iter().flat_map(|p| [p.begin, p.end]).collect();
        b.sort();
        b.dedup();
        b
    }

    /// CSV with columns `name, begin, end`.
    pub fn load(path: &Path, name: impl Into<String>) -> Result<Self> {
        let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
        let mut rows = Vec::new();
        for (i, rec) in r.deserialize::<Phase>().enumerate() {
            rows.push(rec.map_err(|e| Error::parse(path, i + 2, e.to_string()))?);
        }
        Self::new(name, rows).map_err(|e| Error::parse(path, 0, e.to_string()))
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        for p in &self.rows {
            w.serialize(p).map_err(|e| Error::Invalid(e.to_string()))?;
        }
        w.flush().map_err(|e| Error::Invalid(e.to_string()))
    }
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::parse(path, 0, format!("{other:?}")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Country {
    DE,
    AT,
    CH,
}

impl fmt::Display for Country {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::DE => "DE",
            Self::AT => "AT",
            Self::CH => "CH",
        })
    }
}

impl FromStr for Country {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_uppercase().as_str() {
            "DE" | "D" => Ok(Self::DE),
            "AT" | "A" => Ok(Self::AT),
            "CH" => Ok(Self::CH),
            other => Err(Error::Invalid(format!("unknown country '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolicyEvent {
    pub date: NaiveDate,
    pub description: String,
    pub country: Country,
    pub source: String,
    pub rki_phase: String,
    pub policy_phase: String,
}

/// CSV with columns `date, description, country, source, rki_phase, policy_phase`.
pub fn load_events(path: &Path) -> Result<Vec<PolicyEvent>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    r.deserialize::<PolicyEvent>()
        .enumerate()
        .map(|(i, e)| e.map_err(|e| Error::parse(path, i + 2, e.to_string())))
        .collect()
}

pub fn write_events<W: Write>(out: W, events: &[PolicyEvent]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    for e in events {
        w.serialize(e).map_err(|e| Error::Invalid(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::Invalid(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    fn phase(name: &str, b: NaiveDate, e: NaiveDate) -> Phase {
        Phase {
            name: name.into(),
            begin: b,
            end: e,
        }
    }

    #[test]
    fn shared_boundary_goes_to_later_phase() {
        let t = PhaseTable::new(
            "rki",
            vec![
                phase("Wave 2", d(2020, 9, 28), d(2021, 3, 1)),
                phase("Wave 3", d(2021, 3, 1), d(2021, 6, 14)),
            ],
        )
        .unwrap();
        assert_eq!(t.phase_of(d(2021, 3, 1)).unwrap().name, "Wave 3");
        assert_eq!(t.phase_of(d(2021, 2, 28)).unwrap().name, "Wave 2");
        assert!(t.phase_of(d(2021, 7, 1)).is_none());
        assert_eq!(t.boundaries().len(), 3);
    }

    #[test]
    fn overlap_and_reversed_rows_are_rejected() {
        assert!(PhaseTable::new(
            "x",
            vec![
                phase("a", d(2021, 1, 1), d(2021, 2, 1)),
                phase("b", d(2021, 1, 15), d(2021, 3, 1)),
            ]
        )
        .is_err());
        assert!(PhaseTable::new("x", vec![phase("a", d(2021, 2, 1), d(2021, 1, 1))]).is_err());
    }

    #[test]
    fn country_codes() {
        assert_eq!("ch".parse::<Country>().unwrap(), Country::CH);
        assert_eq!("D".parse::<Country>().unwrap(), Country::DE);
        assert!("UK".parse::<Country>().is_err());
    }
}
