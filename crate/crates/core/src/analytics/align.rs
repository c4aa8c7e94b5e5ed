use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::calendar::{PhaseTable, PolicyEvent};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointKind {
    Peak,
    Changepoint,
}

impl PointKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Peak => "peak",
            Self::Changepoint => "changepoint",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DetectedPoint {
    pub kind: PointKind,
    pub date: NaiveDate,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventMatch {
    pub event: PolicyEvent,
    pub distance_days: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignedPoint {
    pub kind: PointKind,
    pub date: NaiveDate,
    /// Containing phase per supplied table, in table order.
    pub phases: Vec<Option<String>>,
    pub events: Vec<EventMatch>,
}

pub type AlignmentReport = Vec<AlignedPoint>;

/// Attaches the containing phases and all events within `window_days`
/// (ordered by distance, then country) to each point.
pub fn align(
    points: &[DetectedPoint],
    events: &[PolicyEvent],
    phases: &[&PhaseTable],
    window_days: i64,
) -> AlignmentReport {
    points
        .iter()
        .map(|p| {
            let mut matched: Vec<EventMatch> = events
                .iter()
                .filter_map(|e| {
                    let distance = (e.date - p.date).num_days().abs();
                    (distance <= window_days).then(|| EventMatch {
                        event: e.clone(),
                        distance_days: distance,
                    })
                })
                .collect();
            matched.sort_by(|a, b| {
                a.distance_days
                    .cmp(&b.distance_days)
                    .then(a.event.country.cmp(&b.event.country))
                    .then(a.event.date.cmp(&b.event.date))
                    .then_with(|| a.event.description.cmp(&b.event.description))
            });
            AlignedPoint {
                kind: p.kind,
                date: p.date,
                phases: phases
                    .iter()
                    .map(|t| t.phase_of(p.date).map(|ph| ph.name.clone()))
                    .collect(),
                events: matched,
            }
        })
        .collect()
}
