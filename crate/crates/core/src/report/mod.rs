//! Pipeline orchestration, stage caches, CSV sections and SVG plots.

mod config;
mod pipeline;
mod plot;

pub use config::{RunConfig, OUT_DIR_ENV};
pub use pipeline::{
    load_bundle, run, run_stage, stage_analyze, stage_expand, stage_filter, stage_report, stage_sentiment,
    stage_topics, Stage,
};
pub use plot::{plot_svg, Marks};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::analytics::{AlignedPoint, PointKind, SeriesReport};
use crate::corpus::LoadStats;
use crate::error::{Error, Result};
use crate::relevance::FilterStats;
use crate::seedex::SeedList;
use crate::sentiment::{DailySeries, Metric};
use crate::topics::{ThemePhaseRow, ThemeSummary, Topic, TopicRow};

/// A named table of the report bundle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Section {
    LoadStats,
    Seeds,
    FilterStats,
    Series(Metric),
    TopicTable,
    TopicTerms,
    ThemeSummary,
    ThemeSeries,
    ThemePhaseRki,
    ThemePhasePolicy,
    Trends,
    Peaks,
    ChangePoints,
    Alignment,
}

impl Section {
    pub fn all() -> Vec<Section> {
        let mut v = vec![Self::LoadStats, Self::Seeds, Self::FilterStats];
        v.extend(Metric::ALL.map(Self::Series));
        v.extend([
            Self::TopicTable,
            Self::TopicTerms,
            Self::ThemeSummary,
            Self::ThemeSeries,
            Self::ThemePhaseRki,
            Self::ThemePhasePolicy,
            Self::Trends,
            Self::Peaks,
            Self::ChangePoints,
            Self::Alignment,
        ]);
        v
    }

    pub fn name(self) -> String {
        match self {
            Self::LoadStats => "load_stats".into(),
            Self::Seeds => "seeds".into(),
            Self::FilterStats => "filter_stats".into(),
            Self::Series(m) => format!("series_{}", m.as_str().to_lowercase()),
            Self::TopicTable => "topic_table".into(),
            Self::TopicTerms => "topic_terms".into(),
            Self::ThemeSummary => "theme_summary".into(),
            Self::ThemeSeries => "theme_series".into(),
            Self::ThemePhaseRki => "theme_phase_rki".into(),
            Self::ThemePhasePolicy => "theme_phase_policy".into(),
            Self::Trends => "trends".into(),
            Self::Peaks => "peaks".into(),
            Self::ChangePoints => "changepoints".into(),
            Self::Alignment => "alignment".into(),
        }
    }

    pub fn file_name(self) -> String {
        format!("{}.csv", self.name())
    }
}

impl fmt::Display for Section {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for Section {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_lowercase();
        Self::all()
            .into_iter()
            .find(|sec| sec.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown report section '{s}'")))
    }
}

/// Everything one run produced. Sections that could not be produced are
/// listed in `skipped` with the reason.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportBundle {
    pub load_stats: LoadStats,
    pub seeds: SeedList,
    pub filter_stats: FilterStats,
    pub series: BTreeMap<Metric, DailySeries>,
    pub topics: Vec<Topic>,
    pub topic_table: Vec<TopicRow>,
    pub theme_summary: Vec<ThemeSummary>,
    pub theme_series: Vec<(String, DailySeries)>,
    pub theme_phases: BTreeMap<String, Vec<ThemePhaseRow>>,
    pub analytics: Vec<SeriesReport>,
    pub plots: Vec<PathBuf>,
    pub skipped: BTreeMap<Section, String>,
}

impl ReportBundle {
    /// Sections with content, in declaration order.
    pub fn sections(&self) -> Vec<Section> {
        Section::all()
            .into_iter()
            .filter(|s| !self.skipped.contains_key(s))
            .collect()
    }

    pub fn analytics_for(&self, series: &str) -> Option<&SeriesReport> {
        self.analytics.iter().find(|r| r.series == series)
    }

    /// The CSV text of one section.
    pub fn render_csv(&self, section: Section) -> Result<String> {
        if let Some(reason) = self.skipped.get(&section) {
            return Err(Error::Invalid(format!("section {section} was skipped: {reason}")));
        }
        match section {
            Section::LoadStats => load_stats_csv(&self.load_stats),
            Section::Seeds => seeds_csv(&self.seeds),
            Section::FilterStats => filter_stats_csv(&self.filter_stats),
            Section::Series(m) => {
                let s = self
                    .series
                    .get(&m)
                    .ok_or_else(|| Error::Invalid(format!("series {m} missing from bundle")))?;
                series_csv(s)
            }
            Section::TopicTable => topic_table_csv(&self.topic_table),
            Section::TopicTerms => topic_terms_csv(&self.topics),
            Section::ThemeSummary => theme_summary_csv(&self.theme_summary),
            Section::ThemeSeries => theme_series_csv(&self.theme_series),
            Section::ThemePhaseRki => theme_phase_csv(self.theme_phases.get("rki").map_or(&[], |v| v)),
            Section::ThemePhasePolicy => theme_phase_csv(self.theme_phases.get("policy").map_or(&[], |v| v)),
            Section::Trends => trends_csv(&self.analytics),
            Section::Peaks => peaks_csv(&self.analytics),
            Section::ChangePoints => changepoints_csv(&self.analytics),
            Section::Alignment => alignment_csv(&self.analytics),
        }
    }
}

/// Writes one named section as `<dir>/<section>.csv`.
pub fn emit_csv(bundle: &ReportBundle, section: &str, dir: &Path) -> Result<PathBuf> {
    let section: Section = section.parse()?;
    let text = bundle.render_csv(section)?;
    let path = dir.join(section.file_name());
    write_atomic(&path, text.as_bytes())?;
    Ok(path)
}

/// Writes to a sibling temporary file, then renames over `path`.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let write = || -> std::io::Result<()> {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        std::fs::rename(&tmp, path)
    };
    write().map_err(|e| {
        let _ = std::fs::remove_file(&tmp);
        Error::io(path, e)
    })
}

fn csv_text<I>(header: &[&str], rows: I) -> Result<String>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let err = |e: csv::Error| Error::Invalid(format!("csv write: {e}"));
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header).map_err(err)?;
    for row in rows {
        w.write_record(&row).map_err(err)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Invalid(format!("csv write: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::Invalid(e.to_string()))
}

fn opt_date(d: Option<chrono::NaiveDate>) -> String {
    d.map(|d| d.to_string()).unwrap_or_default()
}

pub(crate) fn load_stats_csv(s: &LoadStats) -> Result<String> {
    csv_text(
        &[
            "read",
            "kept",
            "dropped_time",
            "dropped_lang",
            "malformed",
            "duplicates",
        ],
        [vec![
            s.read.to_string(),
            s.kept.to_string(),
            s.dropped_time.to_string(),
            s.dropped_lang.to_string(),
            s.malformed.to_string(),
            s.duplicates.to_string(),
        ]],
    )
}

pub(crate) fn seeds_csv(seeds: &SeedList) -> Result<String> {
    csv_text(
        &["rank", "term", "pos_class", "cooccurrence", "similarity"],
        seeds.terms.iter().enumerate().map(|(i, t)| {
            vec![
                (i + 1).to_string(),
                t.lemma.clone(),
                t.pos_class.as_str().to_string(),
                t.cooccurrence.to_string(),
                t.similarity.to_string(),
            ]
        }),
    )
}

pub(crate) fn filter_stats_csv(s: &FilterStats) -> Result<String> {
    csv_text(
        &["total", "matched", "excluded", "relevant"],
        [vec![
            s.total.to_string(),
            s.matched.to_string(),
            s.excluded.to_string(),
            s.relevant.to_string(),
        ]],
    )
}

pub(crate) fn series_csv(s: &DailySeries) -> Result<String> {
    let mut buf = Vec::new();
    s.write_csv(&mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::Invalid(e.to_string()))
}

pub(crate) fn topic_table_csv(rows: &[TopicRow]) -> Result<String> {
    csv_text(
        &["rank", "label", "size", "mean_rel"],
        rows.iter().map(|r| {
            vec![
                r.rank.to_string(),
                r.label.clone(),
                r.size.to_string(),
                r.mean_rel.to_string(),
            ]
        }),
    )
}

pub(crate) fn topic_terms_csv(topics: &[Topic]) -> Result<String> {
    csv_text(
        &["topic_id", "label", "size", "term_rank", "term", "weight"],
        topics.iter().flat_map(|t| {
            t.top_terms.iter().enumerate().map(move |(i, (term, w))| {
                vec![
                    t.id.to_string(),
                    t.label.clone().unwrap_or_default(),
                    t.size.to_string(),
                    (i + 1).to_string(),
                    term.clone(),
                    w.to_string(),
                ]
            })
        }),
    )
}

pub(crate) fn theme_summary_csv(rows: &[ThemeSummary]) -> Result<String> {
    csv_text(
        &["theme", "topics", "size", "mean_rel"],
        rows.iter().map(|r| {
            vec![
                r.theme.clone(),
                r.topics.iter().map(i64::to_string).collect::<Vec<_>>().join(" "),
                r.size.to_string(),
                r.mean_rel.to_string(),
            ]
        }),
    )
}

pub(crate) fn theme_series_csv(series: &[(String, DailySeries)]) -> Result<String> {
    csv_text(
        &["theme", "date", "value", "count", "empty_flag"],
        series.iter().flat_map(|(theme, s)| {
            (0..s.len()).map(move |i| {
                let d = s.date(i);
                vec![
                    theme.clone(),
                    d.to_string(),
                    s.value(i).to_string(),
                    s.count(i).to_string(),
                    u8::from(s.empty_days.contains(&d)).to_string(),
                ]
            })
        }),
    )
}

pub(crate) fn theme_phase_csv(rows: &[ThemePhaseRow]) -> Result<String> {
    csv_text(
        &["phase", "theme", "count", "share", "mean_rel"],
        rows.iter().map(|r| {
            vec![
                r.phase.clone(),
                r.theme.clone(),
                r.count.to_string(),
                r.share.to_string(),
                r.mean_rel.to_string(),
            ]
        }),
    )
}

pub(crate) fn trends_csv(reports: &[SeriesReport]) -> Result<String> {
    csv_text(
        &["series", "direction", "s", "var_s", "z", "p", "alpha"],
        reports.iter().filter_map(|r| {
            r.trend.map(|t| {
                vec![
                    r.series.clone(),
                    t.direction.as_str().to_string(),
                    t.s.to_string(),
                    t.var_s.to_string(),
                    t.z.to_string(),
                    t.p.to_string(),
                    t.alpha.to_string(),
                ]
            })
        }),
    )
}

pub(crate) fn peaks_csv(reports: &[SeriesReport]) -> Result<String> {
    csv_text(
        &[
            "series",
            "date",
            "index",
            "value",
            "side",
            "upper_threshold",
            "lower_threshold",
        ],
        reports.iter().flat_map(|r| {
            r.peaks.peaks.iter().map(move |p| {
                vec![
                    r.series.clone(),
                    opt_date(p.date),
                    p.index.to_string(),
                    p.value.to_string(),
                    p.side.as_str().to_string(),
                    r.peaks.upper_threshold.to_string(),
                    r.peaks.lower_threshold.to_string(),
                ]
            })
        }),
    )
}

pub(crate) fn changepoints_csv(reports: &[SeriesReport]) -> Result<String> {
    csv_text(
        &[
            "series",
            "date",
            "index",
            "penalty",
            "penalty_source",
            "total_cost",
        ],
        reports.iter().flat_map(|r| {
            let cp = &r.change_points;
            cp.result
                .change_points()
                .iter()
                .zip(&cp.dates)
                .map(move |(i, d)| {
                    vec![
                        r.series.clone(),
                        d.to_string(),
                        i.to_string(),
                        cp.result.penalty.to_string(),
                        cp.penalty_source.clone(),
                        cp.result.total_cost.to_string(),
                    ]
                })
        }),
    )
}

/// Aligned points across all series, one per (kind, date), by date.
pub(crate) fn merged_alignment(reports: &[SeriesReport]) -> Vec<&AlignedPoint> {
    let mut seen: BTreeSet<(chrono::NaiveDate, PointKind)> = BTreeSet::new();
    let mut out: Vec<&AlignedPoint> = reports
        .iter()
        .flat_map(|r| r.alignment.iter())
        .filter(|p| seen.insert((p.date, p.kind)))
        .collect();
    out.sort_by_key(|p| (p.date, p.kind));
    out
}

pub(crate) fn alignment_csv(reports: &[SeriesReport]) -> Result<String> {
    let mut rows = Vec::new();
    for p in merged_alignment(reports) {
        let phase = |i: usize| p.phases.get(i).cloned().flatten().unwrap_or_default();
        let head = vec![
            p.kind.as_str().to_string(),
            p.date.to_string(),
            phase(0),
            phase(1),
        ];
        if p.events.is_empty() {
            let mut row = head.clone();
            row.extend([String::new(), String::new(), String::new()]);
            rows.push(row);
        }
        for m in &p.events {
            let mut row = head.clone();
            row.extend([
                m.event.date.to_string(),
                m.event.description.clone(),
                m.distance_days.to_string(),
            ]);
            rows.push(row);
        }
    }
    csv_text(
        &[
            "kind",
            "date",
            "phase_rki",
            "phase_policy",
            "event_date",
            "event_desc",
            "distance_days",
        ],
        rows,
    )
}

/// Status of one section in the run manifest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SectionStatus {
    Present { file: String },
    Skipped { reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub sections: BTreeMap<String, SectionStatus>,
    pub plots: Vec<String>,
}
