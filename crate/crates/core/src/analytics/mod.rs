//! Trend, peak and change-point detection on daily series, and alignment
//! of detected points with phase tables and policy events.

mod align;
mod calendar;
mod changepoint;
mod peaks;
mod trend;

pub use align::{align, AlignedPoint, AlignmentReport, DetectedPoint, EventMatch, PointKind};
pub use calendar::{load_events, write_events, Country, Phase, PhaseTable, PolicyEvent};
pub use changepoint::{default_penalty, pelt, segmentation_cost, ChangePointResult};
pub use peaks::{detect_peaks, find_peaks, mean_std, thresholds, Peak, PeakSet, PeakSide};
pub use trend::{mann_kendall, mann_kendall_s, two_sided_p, TrendDirection, TrendResult};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::sentiment::DailySeries;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalyticsConfig {
    pub alpha: f64,
    pub peak_multiplier: f64,
    /// `None` selects [`default_penalty`] per series.
    pub penalty: Option<f64>,
    pub window_days: i64,
}

impl Default for AnalyticsConfig {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            peak_multiplier: 1.5,
            penalty: None,
            window_days: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChangePoints {
    #[serde(flatten)]
    pub result: ChangePointResult,
    pub penalty_source: String,
    pub dates: Vec<NaiveDate>,
}

/// Everything detected on one series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesReport {
    pub series: String,
    pub trend: Option<TrendResult>,
    pub peaks: PeakSet,
    pub change_points: ChangePoints,
    pub alignment: AlignmentReport,
}

impl SeriesReport {
    pub fn points(&self) -> Vec<DetectedPoint> {
        let mut pts: Vec<DetectedPoint> = self
            .peaks
            .peaks
            .iter()
            .filter_map(|p| p.date)
            .map(|date| DetectedPoint {
                kind: PointKind::Peak,
                date,
            })
            .collect();
        pts.extend(self.change_points.dates.iter().map(|&date| DetectedPoint {
            kind: PointKind::Changepoint,
            date,
        }));
        pts
    }
}

/// Runs all detectors on `series` and aligns the detected points.
pub fn analyze_series(
    name: &str,
    series: &DailySeries,
    config: &AnalyticsConfig,
    events: &[PolicyEvent],
    phases: &[&PhaseTable],
) -> Result<SeriesReport> {
    let values = series.values();
    let trend = if values.len() >= 4 {
        Some(mann_kendall(&values, config.alpha)?)
    } else {
        None
    };
    let peaks = detect_peaks(series, config.peak_multiplier)?;
    let (penalty, penalty_source) = match config.penalty {
        Some(p) => (p, "configured".to_string()),
        None => (default_penalty(&values), "2*variance*ln(n)".to_string()),
    };
    let result = pelt(&values, penalty)?;
    let dates = result.change_points().iter().map(|&i| series.date(i)).collect();
    let mut report = SeriesReport {
        series: name.to_string(),
        trend,
        peaks,
        change_points: ChangePoints {
            result,
            penalty_source,
            dates,
        },
        alignment: Vec::new(),
    };
    report.alignment = align(&report.points(), events, phases, config.window_days);
    Ok(report)
}
