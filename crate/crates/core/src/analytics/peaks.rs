//! Threshold peaks: values outside the band `mean ± std`, widened on each
//! side by `multiplier` times the absolute band edge.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sentiment::DailySeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PeakSide {
    High,
    Low,
}

impl PeakSide {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::High => "high",
            Self::Low => "low",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub index: usize,
    pub date: Option<NaiveDate>,
    pub value: f64,
    pub side: PeakSide,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakSet {
    pub multiplier: f64,
    pub mean: f64,
    pub std: f64,
    pub upper_threshold: f64,
    pub lower_threshold: f64,
    pub peaks: Vec<Peak>,
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// `(upper, lower)` thresholds for given band statistics.
pub fn thresholds(mean: f64, std: f64, multiplier: f64) -> (f64, f64) {
    let hi = mean + std;
    let lo = mean - std;
    (hi + multiplier * hi.abs(), lo - multiplier * lo.abs())
}

pub fn find_peaks(values: &[f64], multiplier: f64) -> Result<PeakSet> {
    if values.len() < 2 {
        return Err(Error::Invalid(format!(
            "peak detection needs at least 2 values, got {}",
            values.len()
        )));
    }
    if multiplier < 0.0 || !multiplier.is_finite() {
        return Err(Error::Config(format!(
            "peak multiplier {multiplier} must be finite and >= 0"
        )));
    }
    let (mean, std) = mean_std(values);
    let (upper, lower) = thresholds(mean, std, multiplier);
    let peaks = values
        .iter()
        .enumerate()
        .filter_map(|(index, &value)| {
            let side = if value > upper {
                PeakSide::High
            } else if value < lower {
                PeakSide::Low
            } else {
                return None;
            };
            Some(Peak {
                index,
                date: None,
                value,
                side,
            })
        })
        .collect();
    Ok(PeakSet {
        multiplier,
        mean,
        std,
        upper_threshold: upper,
        lower_threshold: lower,
        peaks,
    })
}

/// Peaks of a daily series, dated.
pub fn detect_peaks(series: &DailySeries, multiplier: f64) -> Result<PeakSet> {
    let mut set = find_peaks(&series.values(), multiplier)?;
    for p in &mut set.peaks {
        p.date = Some(series.date(p.index));
    }
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thresholds_for_flat_band() {
        assert_eq!(thresholds(5.0, 0.0, 1.5), (12.5, -2.5));
        let classify = |v: f64| {
            let (u, l) = thresholds(5.0, 0.0, 1.5);
            (v > u, v < l)
        };
        assert_eq!(classify(13.0), (true, false));
        assert_eq!(classify(12.0), (false, false));
        assert_eq!(classify(-3.0), (false, true));
    }

    #[test]
    fn constant_series_has_no_peaks() {
        assert!(find_peaks(&[4.0; 30], 1.5).unwrap().peaks.is_empty());
    }

    #[test]
    fn zero_series_degenerate_band() {
        let set = find_peaks(&[0.0; 10], 1.5).unwrap();
        assert_eq!((set.upper_threshold, set.lower_threshold), (0.0, 0.0));
        assert!(set.peaks.is_empty());
    }

    #[test]
    fn spike_is_found() {
        let mut v = vec![10.0; 50];
        v[20] = 100.0;
        let set = find_peaks(&v, 1.5).unwrap();
        assert_eq!(set.peaks.len(), 1);
        assert_eq!(set.peaks[0].index, 20);
        assert_eq!(set.peaks[0].side, PeakSide::High);
    }

    #[test]
    fn too_short() {
        assert!(find_peaks(&[1.0], 1.5).is_err());
    }
}
