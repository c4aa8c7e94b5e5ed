//! Static SVG line charts with phase gridlines, change-point markers and peak dots.

use std::fmt::Write as _;

use chrono::{Datelike, NaiveDate};

use crate::sentiment::DailySeries;

const WIDTH: f64 = 960.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 180.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 56.0;

const COLOURS: [&str; 8] = [
    "#1f3a93", "#d35400", "#16a085", "#8e44ad", "#7f8c8d", "#c0392b", "#2c3e50", "#b7950b",
];
const DASHES: [&str; 3] = ["none", "6 3", "2 3"];

/// Vertical and point markers drawn over the series.
#[derive(Debug, Clone, Default)]
pub struct Marks {
    pub phase_boundaries: Vec<NaiveDate>,
    pub change_points: Vec<NaiveDate>,
    pub peaks: Vec<(NaiveDate, f64)>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Renders `series` (all on one date axis) as a standalone SVG document.
/// Markers outside the plotted date range are not drawn.
pub fn plot_svg(title: &str, series: &[(String, &DailySeries)], marks: &Marks) -> String {
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text class="title" x="{LEFT}" y="22" font-size="14">{}</text>"#,
        escape(title)
    );
    if series.is_empty() {
        svg.push_str("</svg>\n");
        return svg;
    }

    let first = series.iter().map(|(_, s)| s.begin).min().unwrap();
    let last = series.iter().map(|(_, s)| s.end()).max().unwrap();
    let span = ((last - first).num_days() as f64).max(1.0);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (_, s) in series {
        for v in s.values() {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    for &(_, v) in &marks.peaks {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if lo == hi {
        lo -= 1.0;
        hi += 1.0;
    }
    let pad = 0.05 * (hi - lo);
    let (lo, hi) = (lo - pad, hi + pad);
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let x = |d: NaiveDate| LEFT + plot_w * (d - first).num_days() as f64 / span;
    let y = |v: f64| TOP + plot_h * (hi - v) / (hi - lo);
    let in_range = |d: NaiveDate| first <= d && d <= last;

    // axes
    let _ = writeln!(
        svg,
        r##"<g class="axes" stroke="#333"><line x1="{LEFT}" y1="{b}" x2="{r}" y2="{b}"/><line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{b}"/></g>"##,
        b = TOP + plot_h,
        r = LEFT + plot_w
    );
    svg.push_str("<g class=\"date-axis\">\n");
    let mut tick = NaiveDate::from_ymd_opt(first.year(), first.month(), 1).unwrap();
    while tick <= last {
        if tick >= first {
            let tx = x(tick);
            let _ = writeln!(
                svg,
                r##"<line x1="{tx:.2}" y1="{b}" x2="{tx:.2}" y2="{b2}" stroke="#333"/><text x="{tx:.2}" y="{ty}" text-anchor="middle">{}</text>"##,
                tick.format("%Y-%m-%d"),
                b = TOP + plot_h,
                b2 = TOP + plot_h + 5.0,
                ty = TOP + plot_h + 18.0
            );
        }
        tick = tick.checked_add_months(chrono::Months::new(1)).unwrap();
    }
    svg.push_str("</g>\n");
    for frac in [0.0, 0.5, 1.0] {
        let v = lo + frac * (hi - lo);
        let _ = writeln!(
            svg,
            r#"<text class="value-tick" x="{tx}" y="{ty:.2}" text-anchor="end">{v:.2}</text>"#,
            tx = LEFT - 6.0,
            ty = y(v) + 4.0
        );
    }

    for &d in marks.phase_boundaries.iter().filter(|&&d| in_range(d)) {
        let _ = writeln!(
            svg,
            r##"<line class="phase" x1="{px:.2}" y1="{TOP}" x2="{px:.2}" y2="{b}" stroke="#999" stroke-width="1"/>"##,
            px = x(d),
            b = TOP + plot_h
        );
    }
    for &d in marks.change_points.iter().filter(|&&d| in_range(d)) {
        let _ = writeln!(
            svg,
            r##"<line class="changepoint" x1="{px:.2}" y1="{TOP}" x2="{px:.2}" y2="{b}" stroke="#d62728" stroke-width="1.5"/>"##,
            px = x(d),
            b = TOP + plot_h
        );
    }

    for (i, (name, s)) in series.iter().enumerate() {
        let points: Vec<String> = (0..s.len())
            .map(|k| format!("{:.2},{:.2}", x(s.date(k)), y(s.value(k))))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline class="series" data-name="{}" fill="none" stroke="{}" stroke-width="1.5" stroke-dasharray="{}" points="{}"/>"#,
            escape(name),
            COLOURS[i % COLOURS.len()],
            DASHES[(i / COLOURS.len()) % DASHES.len()],
            points.join(" ")
        );
    }
    for &(d, v) in marks.peaks.iter().filter(|(d, _)| in_range(*d)) {
        let _ = writeln!(
            svg,
            r##"<circle class="peak" cx="{:.2}" cy="{:.2}" r="3.5" fill="#1f77b4"/>"##,
            x(d),
            y(v)
        );
    }

    svg.push_str("<g class=\"legend\">\n");
    let lx = WIDTH - RIGHT + 16.0;
    for (i, (name, _)) in series.iter().enumerate() {
        let ly = TOP + 8.0 + 18.0 * i as f64;
        let _ = writeln!(
            svg,
            r#"<g class="legend-entry"><line x1="{lx}" y1="{ly}" x2="{lx2}" y2="{ly}" stroke="{}" stroke-width="2" stroke-dasharray="{}"/><text x="{tx}" y="{ty}">{}</text></g>"#,
            COLOURS[i % COLOURS.len()],
            DASHES[(i / COLOURS.len()) % DASHES.len()],
            escape(name),
            lx2 = lx + 22.0,
            tx = lx + 28.0,
            ty = ly + 4.0
        );
    }
    svg.push_str("</g>\n</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(2021, m, day).unwrap()
    }

    fn series(n: usize) -> DailySeries {
        let counts: Vec<u64> = (0..n as u64).map(|i| i % 7).collect();
        DailySeries::from_counts(d(3, 1), &counts)
    }

    fn count(svg: &str, class: &str) -> usize {
        svg.matches(&format!("class=\"{class}\"")).count()
    }

    #[test]
    fn one_series_two_boundaries() {
        let s = series(30);
        let marks = Marks {
            phase_boundaries: vec![d(3, 10), d(3, 20)],
            ..Default::default()
        };
        let svg = plot_svg("count", &[("count".into(), &s)], &marks);
        assert_eq!(count(&svg, "series"), 1);
        assert_eq!(count(&svg, "phase"), 2);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn peaks_and_change_points() {
        let s = series(30);
        let marks = Marks {
            change_points: vec![d(3, 15)],
            peaks: vec![(d(3, 2), 1.0), (d(3, 9), 1.0), (d(3, 16), 1.0)],
            // outside the plotted range
            phase_boundaries: vec![d(1, 1)],
        };
        let svg = plot_svg("x", &[("a".into(), &s)], &marks);
        assert_eq!(count(&svg, "peak"), 3);
        assert_eq!(count(&svg, "changepoint"), 1);
        assert_eq!(count(&svg, "phase"), 0);
    }

    #[test]
    fn four_series_are_styled_apart() {
        let all: Vec<DailySeries> = (0..4).map(|k| series(10 + k)).collect();
        let named: Vec<(String, &DailySeries)> = all
            .iter()
            .enumerate()
            .map(|(i, s)| (format!("theme {i} <&>"), s))
            .collect();
        let svg = plot_svg("themes", &named, &Marks::default());
        assert_eq!(count(&svg, "series"), 4);
        assert_eq!(count(&svg, "legend-entry"), 4);
        let strokes: std::collections::BTreeSet<&str> = svg
            .lines()
            .filter(|l| l.contains("class=\"series\""))
            .map(|l| l.split("stroke=\"").nth(1).unwrap().split('"').next().unwrap())
            .collect();
        assert_eq!(strokes.len(), 4);
        assert!(svg.contains("theme 0 &lt;&amp;&gt;"));
    }
}
