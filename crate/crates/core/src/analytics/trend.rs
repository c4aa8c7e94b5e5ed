//! Mann-Kendall trend test with tie-corrected variance and continuity
//! correction. No seasonal or serial-correlation adjustment.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrendDirection {
    Increasing,
    Decreasing,
    NoTrend,
}

impl TrendDirection {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Increasing => "increasing",
            Self::Decreasing => "decreasing",
            Self::NoTrend => "no_trend",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrendResult {
    pub direction: TrendDirection,
    pub s: i64,
    pub var_s: f64,
    pub z: f64,
    pub p: f64,
    pub alpha: f64,
}

/// Counts pairs `i < j` with `x[i] > x[j]` by merge sort.
fn strict_inversions(values: &mut [f64], scratch: &mut [f64]) -> u64 {
    let n = values.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut count = {
        let (l, r) = values.split_at_mut(mid);
        let (sl, sr) = scratch.split_at_mut(mid);
        strict_inversions(l, sl) + strict_inversions(r, sr)
    };
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        // equal values are not inversions: take from the left first
        if values[i] <= values[j] {
            scratch[k] = values[i];
            i += 1;
        } else {
            count += (mid - i) as u64;
            scratch[k] = values[j];
            j += 1;
        }
        k += 1;
    }
    scratch[k..k + mid - i].copy_from_slice(&values[i..mid]);
    k += mid - i;
    scratch[k..k + n - j].copy_from_slice(&values[j..n]);
    values.copy_from_slice(scratch);
    count
}

/// Sizes of groups of exactly equal values.
fn tie_groups(values: &[f64]) -> Vec<u64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut groups = Vec::new();
    let mut run = 1u64;
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            run += 1;
        } else {
            if run > 1 {
                groups.push(run);
            }
            run = 1;
        }
    }
    if run > 1 {
        groups.push(run);
    }
    groups
}

/// Kendall's S statistic: concordant minus discordant pairs in time order.
pub fn mann_kendall_s(series: &[f64]) -> i64 {
    let n = series.len() as u64;
    let pairs = n * n.saturating_sub(1) / 2;
    let tied: u64 = tie_groups(series).iter().map(|t| t * (t - 1) / 2).sum();
    let mut values = series.to_vec();
    let mut scratch = vec![0.0; values.len()];
    let discordant = strict_inversions(&mut values, &mut scratch);
    let concordant = pairs - tied - discordant;
    concordant as i64 - discordant as i64
}

pub fn mann_kendall(series: &[f64], alpha: f64) -> Result<TrendResult> {
    if series.len() < 4 {
        return Err(Error::Invalid(format!(
            "trend test needs at least 4 values, got {}",
            series.len()
        )));
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::Invalid("trend test on non-finite values".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Config(format!("alpha {alpha} outside (0, 1)")));
    }
    let n = series.len() as f64;
    let s = mann_kendall_s(series);
    let tie_term: f64 = tie_groups(series)
        .iter()
        .map(|&t| {
            let t = t as f64;
            t * (t - 1.0) * (2.0 * t + 5.0)
        })
        .sum();
    let var_s = (n * (n - 1.0) * (2.0 * n + 5.0) - tie_term) / 18.0;
    if var_s <= 0.0 {
        return Ok(TrendResult {
            direction: TrendDirection::NoTrend,
            s,
            var_s: 0.0,
            z: 0.0,
            p: 1.0,
            alpha,
        });
    }
    let sd = var_s.sqrt();
    let z = match s.signum() {
        1 => (s - 1) as f64 / sd,
        -1 => (s + 1) as f64 / sd,
        _ => 0.0,
    };
    let p = two_sided_p(z);
    let direction = if s == 0 || p >= alpha {
        TrendDirection::NoTrend
    } else if s > 0 {
        TrendDirection::Increasing
    } else {
        TrendDirection::Decreasing
    };
    Ok(TrendResult {
        direction,
        s,
        var_s,
        z,
        p,
        alpha,
    })
}

/// Two-sided standard normal tail probability.
pub fn two_sided_p(z: f64) -> f64 {
    let normal = Normal::standard();
    (2.0 * normal.sf(z.abs())).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_s(x: &[f64]) -> i64 {
        let mut s = 0;
        for i in 0..x.len() {
            for j in i + 1..x.len() {
                s += (x[j] - x[i]).partial_cmp(&0.0).map_or(0, |o| o as i64);
            }
        }
        s
    }

    #[test]
    fn increasing_five() {
        let r = mann_kendall(&[1.0, 2.0, 3.0, 4.0, 5.0], 0.05).unwrap();
        assert_eq!(r.s, 10);
        assert!((r.var_s - 50.0 / 3.0).abs() < 1e-12);
        assert!((r.z - 2.2045).abs() < 1e-4);
        assert!((r.p - 0.0275).abs() < 1e-4);
        assert_eq!(r.direction, TrendDirection::Increasing);
    }

    #[test]
    fn decreasing_mirrors_increasing() {
        let up = mann_kendall(&[1.0, 2.0, 3.0, 4.0, 5.0], 0.05).unwrap();
        let down = mann_kendall(&[5.0, 4.0, 3.0, 2.0, 1.0], 0.05).unwrap();
        assert_eq!(down.s, -10);
        assert_eq!(down.z, -up.z);
        assert_eq!(down.direction, TrendDirection::Decreasing);
    }

    #[test]
    fn constant_series_has_no_trend() {
        let r = mann_kendall(&[3.0; 5], 0.05).unwrap();
        assert_eq!(r.s, 0);
        assert_eq!(r.p, 1.0);
        assert_eq!(r.direction, TrendDirection::NoTrend);
    }

    #[test]
    fn short_series_is_an_error() {
        assert!(mann_kendall(&[1.0, 2.0, 3.0], 0.05).is_err());
    }

    #[test]
    fn merge_count_matches_pairs() {
        let cases: [&[f64]; 4] = [
            &[1.0, 1.0, 2.0, 0.0, 2.0, 2.0],
            &[3.0, 1.0, 2.0],
            &[0.0, -0.0, 1.0, -1.0],
            &[5.0, 5.0, 5.0, 4.0],
        ];
        for c in cases {
            assert_eq!(mann_kendall_s(c), brute_s(c), "{c:?}");
        }
    }

    #[test]
    fn tie_correction() {
        // one group of 2 ties: var = (4*3*13 - 2*1*9) / 18
        let r = mann_kendall(&[1.0, 2.0, 2.0, 3.0], 0.05).unwrap();
        assert!((r.var_s - (156.0 - 18.0) / 18.0).abs() < 1e-12);
        assert_eq!(r.s, 5);
    }
}
