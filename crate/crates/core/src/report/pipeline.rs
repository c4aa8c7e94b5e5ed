//! Stage functions. Each stage reads the caches of the stages before it from
//! the output directory and writes its own, so any stage can be re-run alone.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use super::plot::{plot_svg, Marks};
use super::{
    alignment_csv, changepoints_csv, peaks_csv, series_csv, theme_phase_csv, theme_series_csv,
    theme_summary_csv, topic_table_csv, topic_terms_csv, trends_csv, write_atomic, Manifest, ReportBundle,
    Section, SectionStatus,
};
use crate::analytics::{analyze_series, load_events, PhaseTable, PointKind, SeriesReport};
use crate::corpus::{load_corpus, write_corpus, LemmaTable, LoadFilter, LoadStats, TweetRecord};
use crate::error::{Error, Result};
use crate::relevance::{filter_corpus, ExclusionRule, FilterStats, Matcher};
use crate::seedex::{collect_candidates, expand, load_embeddings, ExpansionDiagnostics, SeedList};
use crate::sentiment::{
    aggregate, label, score, DailySeries, Label, Metric, SentimentLexicon, SentimentScore,
};
use crate::topics::{
    embed_docs, fit_topics, load_doc_vectors, map_themes, rank_topics, theme_phase_table, topic_terms,
    EmbedStrategy, ThemeMap, ThemePhaseRow, ThemeSummary, Topic, TopicAssignment, TopicRow,
};

const INGESTED: &str = "ingested.jsonl";
const LOAD_STATS: &str = "load_stats.json";
const SEEDS: &str = "seeds.tsv";
const EXPANSION: &str = "expansion.json";
const RELEVANT: &str = "relevant.jsonl";
const FILTER_STATS: &str = "filter_stats.json";
const SCORES: &str = "scores.csv";
const ASSIGNMENTS: &str = "assignments.csv";
const TOPICS: &str = "topics.json";
const THEMES: &str = "themes.json";
const ANALYTICS: &str = "analytics.json";
const MANIFEST: &str = "report.json";
const PLOTS: &str = "plots";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stage {
    Expand,
    Filter,
    Sentiment,
    Topics,
    Analyze,
    Report,
}

impl Stage {
    pub const ALL: [Stage; 6] = [
        Stage::Expand,
        Stage::Filter,
        Stage::Sentiment,
        Stage::Topics,
        Stage::Analyze,
        Stage::Report,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Expand => "expand",
            Self::Filter => "filter",
            Self::Sentiment => "sentiment",
            Self::Topics => "topics",
            Self::Analyze => "analyze",
            Self::Report => "report",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown stage '{s}'")))
    }
}

/// Validates the config, then runs every stage in order.
pub fn run(config: &RunConfig) -> Result<ReportBundle> {
    config.validate()?;
    for stage in Stage::ALL {
        if stage != Stage::Report {
            run_one(config, stage)?;
        }
    }
    stage_report(config).map_err(|e| e.in_stage("report"))
}

/// Validates the config and runs a single stage against existing caches.
pub fn run_stage(config: &RunConfig, stage: Stage) -> Result<()> {
    config.validate()?;
    run_one(config, stage)
}

fn run_one(config: &RunConfig, stage: Stage) -> Result<()> {
    let started = std::time::Instant::now();
    log::info!(target: stage.as_str(), "start out_dir={}", config.output_dir.display());
    let res = match stage {
        Stage::Expand => stage_expand(config).map(|_| ()),
        Stage::Filter => stage_filter(config).map(|_| ()),
        Stage::Sentiment => stage_sentiment(config).map(|_| ()),
        Stage::Topics => stage_topics(config).map(|_| ()),
        Stage::Analyze => stage_analyze(config).map(|_| ()),
        Stage::Report => stage_report(config).map(|_| ()),
    };
    match &res {
        Ok(()) => log::info!(
            target: stage.as_str(),
            "done elapsed_ms={}",
            started.elapsed().as_millis()
        ),
        Err(e) => log::error!(target: stage.as_str(), "failed error=\"{e}\""),
    }
    res.map_err(|e| e.in_stage(stage.as_str()))
}

fn out(config: &RunConfig, name: &str) -> PathBuf {
    config.output_dir.join(name)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Invalid(e.to_string()))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_reader(BufReader::new(file)).map_err(|e| Error::parse(path, e.line(), e.to_string()))
}

fn write_records(path: &Path, records: &[TweetRecord]) -> Result<()> {
    let mut buf = Vec::new();
    write_corpus(&mut buf, records).map_err(|e| Error::io(path, e))?;
    write_atomic(path, &buf)
}

fn read_records(config: &RunConfig, name: &str) -> Result<Vec<TweetRecord>> {
    // cached records already passed the ingest filter; this only re-validates them
    let filter = config.load_filter()?;
    let (records, stats) = load_corpus(&out(config, name), &filter)?;
    if stats.kept != stats.read {
        return Err(Error::Invalid(format!(
            "cache {name} has {} rejected lines; rerun the earlier stages",
            stats.read - stats.kept
        )));
    }
    Ok(records)
}

fn remove_stale(path: &Path) -> Result<()> {
    match std::fs::remove_file(path) {
        Ok(()) => Ok(()),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(()),
        Err(e) => Err(Error::io(path, e)),
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct ExpansionReport {
    query: String,
    diagnostics: ExpansionDiagnostics,
}

/// Ingest plus seed expansion.
pub fn stage_expand(config: &RunConfig) -> Result<SeedList> {
    let filter: LoadFilter = config.load_filter()?;
    let (corpus, stats) = load_corpus(&config.corpus, &filter)?;
    log::info!(
        target: "expand",
        "ingested read={} kept={} dropped_time={} dropped_lang={} malformed={} duplicates={}",
        stats.read, stats.kept, stats.dropped_time, stats.dropped_lang, stats.malformed, stats.duplicates
    );
    write_records(&out(config, INGESTED), &corpus)?;
    write_json(&out(config, LOAD_STATS), &stats)?;

    let lemmas = match &config.lemma_table {
        Some(p) => LemmaTable::load(p)?,
        None => LemmaTable::new(),
    };
    let embeddings = load_embeddings(&config.word_embeddings)?;
    if embeddings.duplicates > 0 {
        log::warn!(target: "expand", "duplicate embedding rows duplicates={}", embeddings.duplicates);
    }
    let candidates = collect_candidates(&corpus, &config.query, &lemmas, &config.expansion.pos_classes);
    let (seeds, diagnostics) = expand(&config.query, &candidates, &embeddings, &config.expansion)?;
    log::info!(
        target: "expand",
        "seeds query={} terms={} candidates={} below_threshold={} missing_embedding={}",
        seeds.query,
        seeds.terms.len(),
        diagnostics.candidates,
        diagnostics.below_threshold,
        diagnostics.missing_embedding.len()
    );
    let mut buf = Vec::new();
    seeds
        .write_tsv(&mut buf)
        .map_err(|e| Error::io(out(config, SEEDS), e))?;
    write_atomic(&out(config, SEEDS), &buf)?;
    write_json(
        &out(config, EXPANSION),
        &ExpansionReport {
            query: seeds.query.clone(),
            diagnostics,
        },
    )?;
    Ok(seeds)
}

/// Relevance filter over the ingested corpus.
pub fn stage_filter(config: &RunConfig) -> Result<FilterStats> {
    let corpus = read_records(config, INGESTED)?;
    let seeds = SeedList::read_tsv(&out(config, SEEDS), &config.query, config.expansion.clone())?;
    let matcher = Matcher::from_seeds(&seeds).with_substring(config.substring_match);
    let exclusion = ExclusionRule::new(&config.exclusion);
    let (relevant, stats) = filter_corpus(&corpus, &matcher, &exclusion);
    log::info!(
        target: "filter",
        "filtered total={} matched={} excluded={} relevant={}",
        stats.total, stats.matched, stats.excluded, stats.relevant
    );
    write_records(&out(config, RELEVANT), &relevant)?;
    write_json(&out(config, FILTER_STATS), &stats)?;
    Ok(stats)
}

fn scores_csv(rows: &[(String, NaiveDate, SentimentScore)]) -> Result<String> {
    let label_str = |l: Label| match l {
        Label::Positive => "positive",
        Label::Negative => "negative",
        Label::NeutralMixed => "neutral_mixed",
    };
    super::csv_text(
        &["tweet_id", "date", "pos", "neg", "label"],
        rows.iter().map(|(id, d, s)| {
            vec![
                id.clone(),
                d.to_string(),
                s.pos.to_string(),
                s.neg.to_string(),
                label_str(label(*s)).to_string(),
            ]
        }),
    )
}

fn read_scores(path: &Path) -> Result<HashMap<String, SentimentScore>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = csv::Reader::from_reader(file);
    let mut map = HashMap::new();
    for (i, row) in r.records().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| Error::parse(path, line, e.to_string()))?;
        let field = |k: usize| row.get(k).unwrap_or_default();
        let pos: i8 = field(2)
            .parse()
            .map_err(|_| Error::parse(path, line, "bad pos"))?;
        let neg: i8 = field(3)
            .parse()
            .map_err(|_| Error::parse(path, line, "bad neg"))?;
        let s = SentimentScore::new(pos, neg).map_err(|e| Error::parse(path, line, e.to_string()))?;
        map.insert(field(0).to_string(), s);
    }
    Ok(map)
}

/// Document scores and the daily SUM/REL/POS/NEG/COUNT series.
pub fn stage_sentiment(config: &RunConfig) -> Result<BTreeMap<Metric, DailySeries>> {
    let relevant = read_records(config, RELEVANT)?;
    let lexicon = SentimentLexicon::load(&config.lexicon)?;
    let rows: Vec<(String, NaiveDate, SentimentScore)> = relevant
        .iter()
        .map(|r| (r.id.clone(), r.day(), score(&r.tokens(), &lexicon)))
        .collect();
    write_atomic(&out(config, SCORES), scores_csv(&rows)?.as_bytes())?;
    let dated: Vec<(NaiveDate, SentimentScore)> = rows.iter().map(|(_, d, s)| (*d, *s)).collect();
    let mut all = BTreeMap::new();
    for metric in Metric::ALL {
        let series = aggregate(&dated, metric, config.begin, config.end)?;
        write_atomic(
            &out(config, &Section::Series(metric).file_name()),
            series_csv(&series)?.as_bytes(),
        )?;
        all.insert(metric, series);
    }
    let positive = rows
        .iter()
        .filter(|(_, _, s)| label(*s) == Label::Positive)
        .count();
    let negative = rows
        .iter()
        .filter(|(_, _, s)| label(*s) == Label::Negative)
        .count();
    log::info!(
        target: "sentiment",
        "scored documents={} positive={} negative={} days={}",
        rows.len(), positive, negative, all[&Metric::Count].len()
    );
    Ok(all)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
struct TopicsCache {
    topics: Vec<Topic>,
    table: Vec<TopicRow>,
    outliers: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
struct ThemesCache {
    summary: Vec<ThemeSummary>,
    phases: BTreeMap<String, Vec<ThemePhaseRow>>,
}

fn load_phases(config: &RunConfig) -> Result<(PhaseTable, PhaseTable)> {
    let rki = match &config.phases_rki {
        Some(p) => PhaseTable::load(p, "rki")?,
        None => PhaseTable::new("rki", Vec::new())?,
    };
    let policy = match &config.phases_policy {
        Some(p) => PhaseTable::load(p, "policy")?,
        None => PhaseTable::new("policy", Vec::new())?,
    };
    Ok((rki, policy))
}

/// Embedding, clustering, term extraction, topic table and theme tables.
pub fn stage_topics(config: &RunConfig) -> Result<TopicAssignment> {
    let relevant = read_records(config, RELEVANT)?;
    let scores = read_scores(&out(config, SCORES))?;
    let topic_config = config.topic_config();

    let embedded = match &config.doc_embeddings {
        Some(p) => {
            let table = load_doc_vectors(p)?;
            embed_docs(&relevant, &EmbedStrategy::Precomputed(&table))?
        }
        None => {
            let table = load_embeddings(&config.word_embeddings)?;
            embed_docs(&relevant, &EmbedStrategy::MeanWordVector(&table))?
        }
    };
    if !embedded.missing.is_empty() {
        log::warn!(target: "topics", "documents without vectors missing={}", embedded.missing.len());
    }
    let assignment = fit_topics(&embedded.vectors, &topic_config)?;
    let mut buf = Vec::new();
    assignment.write_csv(&mut buf)?;
    write_atomic(&out(config, ASSIGNMENTS), &buf)?;

    let theme_map = match &config.theme_map {
        Some(p) => Some(ThemeMap::load(p)?),
        None => None,
    };
    let labels = theme_map.as_ref().map(|m| m.labels.clone()).unwrap_or_default();
    let topics = topic_terms(&assignment, &relevant, &topic_config, &labels);
    let table = rank_topics(&assignment, &topics, &scores);
    log::info!(
        target: "topics",
        "clustered documents={} topics={} outliers={}",
        assignment.len(),
        table.len(),
        assignment.outliers()
    );
    write_atomic(
        &out(config, &Section::TopicTable.file_name()),
        topic_table_csv(&table)?.as_bytes(),
    )?;
    write_atomic(
        &out(config, &Section::TopicTerms.file_name()),
        topic_terms_csv(&topics)?.as_bytes(),
    )?;
    write_json(
        &out(config, TOPICS),
        &TopicsCache {
            topics,
            table,
            outliers: assignment.outliers(),
        },
    )?;

    let theme_files = [
        Section::ThemeSummary,
        Section::ThemeSeries,
        Section::ThemePhaseRki,
        Section::ThemePhasePolicy,
    ];
    let Some(map) = theme_map else {
        for s in theme_files {
            remove_stale(&out(config, &s.file_name()))?;
        }
        remove_stale(&out(config, THEMES))?;
        return Ok(assignment);
    };
    let breakdown = map_themes(&assignment, &map, &relevant, &scores, config.begin, config.end)?;
    let (rki, policy) = load_phases(config)?;
    let mut phases = BTreeMap::new();
    for (key, table, section, configured) in [
        ("rki", &rki, Section::ThemePhaseRki, config.phases_rki.is_some()),
        (
            "policy",
            &policy,
            Section::ThemePhasePolicy,
            config.phases_policy.is_some(),
        ),
    ] {
        if configured {
            let rows = theme_phase_table(&assignment, &map, &relevant, &scores, table);
            write_atomic(
                &out(config, &section.file_name()),
                theme_phase_csv(&rows)?.as_bytes(),
            )?;
            phases.insert(key.to_string(), rows);
        } else {
            remove_stale(&out(config, &section.file_name()))?;
        }
    }
    write_atomic(
        &out(config, &Section::ThemeSummary.file_name()),
        theme_summary_csv(&breakdown.summaries)?.as_bytes(),
    )?;
    write_atomic(
        &out(config, &Section::ThemeSeries.file_name()),
        theme_series_csv(&breakdown.series)?.as_bytes(),
    )?;
    log::info!(target: "topics", "themes themes={} phase_tables={}", breakdown.summaries.len(), phases.len());
    write_json(
        &out(config, THEMES),
        &ThemesCache {
            summary: breakdown.summaries,
            phases,
        },
    )?;
    Ok(assignment)
}

fn read_theme_series(path: &Path) -> Result<Vec<(String, DailySeries)>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = csv::Reader::from_reader(file);
    let mut grouped: Vec<(String, NaiveDate, Vec<u64>)> = Vec::new();
    for (i, row) in r.records().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| Error::parse(path, line, e.to_string()))?;
        let theme = row.get(0).unwrap_or_default();
        let date: NaiveDate = row
            .get(1)
            .unwrap_or_default()
            .parse()
            .map_err(|_| Error::parse(path, line, "bad date"))?;
        let count: u64 = row
            .get(3)
            .unwrap_or_default()
            .parse()
            .map_err(|_| Error::parse(path, line, "bad count"))?;
        match grouped.last_mut() {
            Some((t, begin, counts)) if t == theme => {
                if date != *begin + chrono::Days::new(counts.len() as u64) {
                    return Err(Error::parse(path, line, "dates are not contiguous"));
                }
                counts.push(count);
            }
            _ => grouped.push((theme.to_string(), date, vec![count])),
        }
    }
    Ok(grouped
        .into_iter()
        .map(|(t, begin, counts)| (t, DailySeries::from_counts(begin, &counts)))
        .collect())
}

fn read_series(config: &RunConfig) -> Result<BTreeMap<Metric, DailySeries>> {
    Metric::ALL
        .into_iter()
        .map(|m| {
            Ok((
                m,
                DailySeries::read_csv(&out(config, &Section::Series(m).file_name()), m)?,
            ))
        })
        .collect()
}

fn alignment_configured(config: &RunConfig) -> bool {
    config.events.is_some() || config.phases_rki.is_some() || config.phases_policy.is_some()
}

/// Trend, peak and change-point detection on every daily series, with alignment.
pub fn stage_analyze(config: &RunConfig) -> Result<Vec<SeriesReport>> {
    let series = read_series(config)?;
    let themes = if config.theme_map.is_some() {
        read_theme_series(&out(config, &Section::ThemeSeries.file_name()))?
    } else {
        Vec::new()
    };
    let events = match &config.events {
        Some(p) => load_events(p)?,
        None => Vec::new(),
    };
    let (rki, policy) = load_phases(config)?;
    let tables = [&rki, &policy];

    let mut named: Vec<(String, &DailySeries)> =
        series.iter().map(|(m, s)| (m.as_str().to_string(), s)).collect();
    named.extend(themes.iter().map(|(t, s)| (format!("theme:{t}"), s)));
    let mut reports = Vec::new();
    for (name, s) in named {
        let r = analyze_series(&name, s, &config.analytics, &events, &tables)?;
        log::info!(
            target: "analyze",
            "series name={} trend={} p={} peaks={} change_points={}",
            name,
            r.trend.map_or("none", |t| t.direction.as_str()),
            r.trend.map_or(f64::NAN, |t| t.p),
            r.peaks.peaks.len(),
            r.change_points.dates.len()
        );
        reports.push(r);
    }
    write_json(&out(config, ANALYTICS), &reports)?;
    write_atomic(
        &out(config, &Section::Trends.file_name()),
        trends_csv(&reports)?.as_bytes(),
    )?;
    write_atomic(
        &out(config, &Section::Peaks.file_name()),
        peaks_csv(&reports)?.as_bytes(),
    )?;
    write_atomic(
        &out(config, &Section::ChangePoints.file_name()),
        changepoints_csv(&reports)?.as_bytes(),
    )?;
    let alignment_path = out(config, &Section::Alignment.file_name());
    if alignment_configured(config) {
        write_atomic(&alignment_path, alignment_csv(&reports)?.as_bytes())?;
    } else {
        remove_stale(&alignment_path)?;
    }
    Ok(reports)
}

/// Reads every stage cache into a bundle without writing anything.
pub fn load_bundle(config: &RunConfig) -> Result<ReportBundle> {
    let load_stats: LoadStats = read_json(&out(config, LOAD_STATS))?;
    let seeds = SeedList::read_tsv(&out(config, SEEDS), &config.query, config.expansion.clone())?;
    let filter_stats: FilterStats = read_json(&out(config, FILTER_STATS))?;
    let series = read_series(config)?;
    let topics: TopicsCache = read_json(&out(config, TOPICS))?;
    let analytics: Vec<SeriesReport> = read_json(&out(config, ANALYTICS))?;

    let mut skipped = BTreeMap::new();
    let (theme_summary, theme_series, theme_phases) = if config.theme_map.is_some() {
        let cache: ThemesCache = read_json(&out(config, THEMES))?;
        let series = read_theme_series(&out(config, &Section::ThemeSeries.file_name()))?;
        (cache.summary, series, cache.phases)
    } else {
        for s in [
            Section::ThemeSummary,
            Section::ThemeSeries,
            Section::ThemePhaseRki,
            Section::ThemePhasePolicy,
        ] {
            skipped.insert(s, "no theme_map configured".to_string());
        }
        (Vec::new(), Vec::new(), BTreeMap::new())
    };
    if config.phases_rki.is_none() {
        skipped
            .entry(Section::ThemePhaseRki)
            .or_insert_with(|| "no phases_rki configured".into());
    }
    if config.phases_policy.is_none() {
        skipped
            .entry(Section::ThemePhasePolicy)
            .or_insert_with(|| "no phases_policy configured".into());
    }
    if !alignment_configured(config) {
        skipped.insert(Section::Alignment, "no events or phase tables configured".into());
    }
    Ok(ReportBundle {
        load_stats,
        seeds,
        filter_stats,
        series,
        topics: topics.topics,
        topic_table: topics.table,
        theme_summary,
        theme_series,
        theme_phases,
        analytics,
        plots: Vec::new(),
        skipped,
    })
}

fn marks_for(report: &SeriesReport, boundaries: &[NaiveDate]) -> Marks {
    Marks {
        phase_boundaries: boundaries.to_vec(),
        change_points: report.change_points.dates.clone(),
        peaks: report
            .peaks
            .peaks
            .iter()
            .filter_map(|p| p.date.map(|d| (d, p.value)))
            .collect(),
    }
}

/// Plots, section CSVs and the run manifest.
pub fn stage_report(config: &RunConfig) -> Result<ReportBundle> {
    let mut bundle = load_bundle(config)?;
    let (rki, policy) = load_phases(config)?;
    let boundaries = if policy.rows().is_empty() {
        rki.boundaries()
    } else {
        policy.boundaries()
    };

    let plot_dir = out(config, PLOTS);
    let mut plots = Vec::new();
    for (metric, series) in &bundle.series {
        let name = metric.as_str();
        let marks = bundle
            .analytics_for(name)
            .map(|r| marks_for(r, &boundaries))
            .unwrap_or_default();
        let svg = plot_svg(name, &[(name.to_string(), series)], &marks);
        let path = plot_dir.join(format!("series_{}.svg", name.to_lowercase()));
        write_atomic(&path, svg.as_bytes())?;
        plots.push(path);
    }
    let pos_neg: Vec<(String, &DailySeries)> = [Metric::Pos, Metric::Neg]
        .into_iter()
        .filter_map(|m| bundle.series.get(&m).map(|s| (m.as_str().to_string(), s)))
        .collect();
    let marks = Marks {
        phase_boundaries: boundaries.clone(),
        ..Default::default()
    };
    let path = plot_dir.join("pos_neg.svg");
    write_atomic(&path, plot_svg("POS and NEG", &pos_neg, &marks).as_bytes())?;
    plots.push(path);
    if !bundle.theme_series.is_empty() {
        let named: Vec<(String, &DailySeries)> =
            bundle.theme_series.iter().map(|(t, s)| (t.clone(), s)).collect();
        let path = plot_dir.join("themes.svg");
        write_atomic(&path, plot_svg("Theme frequency", &named, &marks).as_bytes())?;
        plots.push(path);
    }
    bundle.plots = plots;

    let mut manifest = Manifest {
        sections: BTreeMap::new(),
        plots: bundle
            .plots
            .iter()
            .map(|p| format!("{PLOTS}/{}", p.file_name().unwrap().to_string_lossy()))
            .collect(),
    };
    for section in Section::all() {
        let status = match bundle.skipped.get(&section) {
            Some(reason) => SectionStatus::Skipped {
                reason: reason.clone(),
            },
            None => {
                let path = super::emit_csv(&bundle, &section.name(), &config.output_dir)?;
                SectionStatus::Present {
                    file: path.file_name().unwrap().to_string_lossy().into_owned(),
                }
            }
        };
        manifest.sections.insert(section.name(), status);
    }
    write_json(&out(config, MANIFEST), &manifest)?;
    let peaks_on_events = bundle
        .analytics
        .iter()
        .flat_map(|r| &r.alignment)
        .filter(|p| p.kind == PointKind::Peak && p.events.iter().any(|m| m.distance_days == 0))
        .count();
    log::info!(
        target: "report",
        "bundle sections={} skipped={} plots={} peaks_on_event_day={}",
        bundle.sections().len(),
        bundle.skipped.len(),
        bundle.plots.len(),
        peaks_on_events
    );
    Ok(bundle)
}
