// Trend, peak and change-point detection on a small hand-made series.
//
// cargo run --example detect_trends

use discourse::analytics::{
    default_penalty, find_peaks, mann_kendall, pelt, ChangePointResult, PeakSet, TrendResult,
};

pub fn run_example() -> discourse::Result<(TrendResult, PeakSet, ChangePointResult)> {
    // slow rise, a one-day burst at index 20, level shift at index 30
    let series: Vec<f64> = (0..45)
        .map(|i| {
            let base = 10.0 + 0.1 * i as f64 + if i >= 30 { 8.0 } else { 0.0 };
            base + if i == 20 { 55.0 } else { 0.0 } + [0.4, -0.3, 0.1][i % 3]
        })
        .collect();

    let trend = mann_kendall(&series, 0.05)?;
    println!(
        "trend {} S={} z={:.3} p={:.2e}",
        trend.direction.as_str(),
        trend.s,
        trend.z,
        trend.p
    );

    let peaks = find_peaks(&series, 1.5)?;
    println!(
        "peak band ({:.2}, {:.2}); peaks at {:?}",
        peaks.lower_threshold,
        peaks.upper_threshold,
        peaks
            .peaks
            .iter()
            .map(|p| (p.index, p.side.as_str()))
            .collect::<Vec<_>>()
    );

    // the default penalty scales with the variance, which the burst inflates;
    // a smaller fixed penalty also picks up the level shift
    let mut last = None;
    for penalty in [default_penalty(&series), 50.0] {
        let cps = pelt(&series, penalty)?;
        println!(
            "penalty {penalty:.2}: change points {:?}, cost {:.2}",
            cps.change_points(),
            cps.total_cost
        );
        last = Some(cps);
    }
    Ok((trend, peaks, last.unwrap()))
}

fn main() -> discourse::Result<()> {
    run_example().map(|_| ())
}
