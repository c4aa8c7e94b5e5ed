//! Pruned exact linear time (PELT) segmentation under a squared-error cost.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChangePointResult {
    /// Exclusive segment ends; the last one is the series length.
    pub indices: Vec<usize>,
    pub penalty: f64,
    /// Sum of segment costs plus `penalty` per segment.
    pub total_cost: f64,
}

impl ChangePointResult {
    /// Segment boundaries strictly inside the series.
    pub fn change_points(&self) -> &[usize] {
        &self.indices[..self.indices.len().saturating_sub(1)]
    }
}

/// Squared deviation from the segment mean, from prefix sums.
struct SegmentCost {
    sum: Vec<f64>,
    sq: Vec<f64>,
}

impl SegmentCost {
    fn new(series: &[f64]) -> Self {
        // centring keeps the prefix sums small; the cost is translation invariant
        let mean = series.iter().sum::<f64>() / series.len() as f64;
        let mut sum = vec![0.0; series.len() + 1];
        let mut sq = vec![0.0; series.len() + 1];
        for (i, v) in series.iter().enumerate() {
            let x = v - mean;
            sum[i + 1] = sum[i] + x;
            sq[i + 1] = sq[i] + x * x;
        }
        Self { sum, sq }
    }

    /// Cost of `start..end`.
    fn cost(&self, start: usize, end: usize) -> f64 {
        let n = (end - start) as f64;
        let s = self.sum[end] - self.sum[start];
        (self.sq[end] - self.sq[start] - s * s / n).max(0.0)
    }
}

/// Default penalty: `2 * variance * ln(n)` with the population variance.
pub fn default_penalty(series: &[f64]) -> f64 {
    let n = series.len() as f64;
    if series.len() < 2 {
        return 0.0;
    }
    let mean = series.iter().sum::<f64>() / n;
    let var = series.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    2.0 * var * n.ln()
}

pub fn pelt(series: &[f64], penalty: f64) -> Result<ChangePointResult> {
    let n = series.len();
    if n < 2 {
        return Err(Error::Invalid(format!(
            "change-point search needs at least 2 values, got {n}"
        )));
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::Invalid("change-point search on non-finite values".into()));
    }
    if penalty.is_nan() || penalty < 0.0 {
        return Err(Error::Config(format!("penalty {penalty} must be >= 0")));
    }
    let cost = SegmentCost::new(series);
    if penalty.is_infinite() {
        return Ok(ChangePointResult {
            indices: vec![n],
            penalty,
            total_cost: f64::INFINITY,
        });
    }

    let mut best = vec![0.0f64; n + 1];
    let mut last = vec![0usize; n + 1];
    let mut candidates = vec![0usize];
    for t in 1..=n {
        let mut f_t = f64::INFINITY;
        let mut arg = 0;
        let mut totals = Vec::with_capacity(candidates.len());
        for &s in &candidates {
            let partial = best[s] + cost.cost(s, t);
            totals.push(partial);
            if partial + penalty < f_t {
                f_t = partial + penalty;
                arg = s;
            }
        }
        best[t] = f_t;
        last[t] = arg;
        // a start that is already worse than the optimum can never win later
        let slack = 1e-9 * (1.0 + f_t.abs());
        let mut kept: Vec<usize> = candidates
            .iter()
            .zip(&totals)
            .filter(|(_, &partial)| partial <= f_t + slack)
            .map(|(&s, _)| s)
            .collect();
        kept.push(t);
        candidates = kept;
    }

    let mut indices = vec![n];
    let mut t = n;
    while last[t] > 0 {
        t = last[t];
        indices.push(t);
    }
    indices.reverse();
    Ok(ChangePointResult {
        indices,
        penalty,
        total_cost: best[n],
    })
}

/// Objective of a given segmentation, recomputed directly.
pub fn segmentation_cost(series: &[f64], indices: &[usize], penalty: f64) -> f64 {
    let mut start = 0;
    let mut total = 0.0;
    for &end in indices {
        let seg = &series[start..end];
        let mean = seg.iter().sum::<f64>() / seg.len() as f64;
        total += seg.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() + penalty;
        start = end;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step() -> Vec<f64> {
        let mut v = vec![0.0; 10];
        v.extend([10.0; 10]);
        v
    }

    #[test]
    fn planted_step() {
        let r = pelt(&step(), 5.0).unwrap();
        assert_eq!(r.indices, [10, 20]);
        assert_eq!(r.change_points(), [10]);
        assert_eq!(r.total_cost, 10.0);
    }

    #[test]
    fn constant_series_is_one_segment() {
        for pen in [0.5, 5.0, 1e6] {
            let r = pelt(&[3.0; 12], pen).unwrap();
            assert!(r.change_points().is_empty());
        }
    }

    #[test]
    fn infinite_penalty() {
        let r = pelt(&step(), f64::INFINITY).unwrap();
        assert_eq!(r.indices, [20]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(pelt(&[1.0], 1.0).is_err());
        assert!(pelt(&[1.0, 2.0], -1.0).is_err());
        assert!(pelt(&[1.0, f64::NAN], 1.0).is_err());
    }

    #[test]
    fn zero_penalty_splits_everything_distinct() {
        let r = pelt(&[1.0, 2.0, 3.0], 0.0).unwrap();
        assert_eq!(r.total_cost, 0.0);
    }

    #[test]
    fn reported_cost_matches_direct_evaluation() {
        let v = [1.0, 1.2, 0.8, 5.0, 5.1, 4.9, 5.2, -2.0, -2.1];
        let r = pelt(&v, 1.0).unwrap();
        assert_eq!(r.change_points(), [3, 7]);
        assert!((r.total_cost - segmentation_cost(&v, &r.indices, 1.0)).abs() < 1e-9);
    }
}
