use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use discourse::report::{self, RunConfig, Section, Stage};
use discourse::sentiment::{DailySeries, Metric};
use discourse::synthetic;
use discourse::Error;

fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/synthetic")
}

fn config(out: &Path) -> RunConfig {
    let mut cfg = RunConfig::load(&fixture_dir().join("run.toml")).unwrap();
    cfg.output_dir = out.to_path_buf();
    cfg
}

/// Relative path -> bytes for every file under `dir`.
fn snapshot(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, acc: &mut BTreeMap<PathBuf, Vec<u8>>) {
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(root, &path, acc);
            } else {
                acc.insert(
                    path.strip_prefix(root).unwrap().to_path_buf(),
                    std::fs::read(&path).unwrap(),
                );
            }
        }
    }
    let mut acc = BTreeMap::new();
    walk(dir, dir, &mut acc);
    acc
}

#[test]
fn committed_fixture_matches_generator() {
    for (name, text) in synthetic::fixture_files(synthetic::DEFAULT_SEED, "../../data") {
        let on_disk = std::fs::read_to_string(fixture_dir().join(name)).unwrap();
        assert!(
            on_disk == text,
            "fixtures/synthetic/{name} is stale; regenerate with generate-fixture"
        );
    }
}

#[test]
fn rerun_is_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    report::run(&config(a.path())).unwrap();
    let first = snapshot(a.path());
    report::run(&config(a.path())).unwrap();
    assert_eq!(first, snapshot(a.path()));
    report::run(&config(b.path())).unwrap();
    assert_eq!(first, snapshot(b.path()));
    assert!(first.keys().any(|p| p.starts_with("plots")));
}

#[test]
fn stages_run_alone_reproduce_run_all() {
    let whole = tempfile::tempdir().unwrap();
    report::run(&config(whole.path())).unwrap();
    let expected = snapshot(whole.path());

    let staged = tempfile::tempdir().unwrap();
    let cfg = config(staged.path());
    for stage in Stage::ALL {
        report::run_stage(&cfg, stage).unwrap();
    }
    assert_eq!(expected, snapshot(staged.path()));

    // drop everything downstream of the filter cache and rebuild it
    for path in expected.keys() {
        let keep = ["ingested.jsonl", "load_stats.json", "seeds.tsv", "expansion.json"];
        if !keep.iter().any(|k| path == Path::new(k)) {
            std::fs::remove_file(staged.path().join(path)).unwrap();
        }
    }
    for stage in &Stage::ALL[1..] {
        report::run_stage(&cfg, *stage).unwrap();
    }
    assert_eq!(expected, snapshot(staged.path()));
}

#[test]
fn reversed_window_fails_before_any_stage() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never");
    let mut cfg = config(&out);
    std::mem::swap(&mut cfg.begin, &mut cfg.end);
    let err = report::run(&cfg).unwrap_err();
    assert!(matches!(err, Error::Config(_)), "{err:?}");
    assert_eq!(err.exit_code(), 1);
    assert!(!out.exists());
}

#[test]
fn missing_cache_names_the_stage() {
    let dir = tempfile::tempdir().unwrap();
    let err = report::run_stage(&config(dir.path()), Stage::Sentiment).unwrap_err();
    assert!(err.to_string().contains("sentiment"), "{err}");
    assert_eq!(err.exit_code(), 3);
}

#[test]
fn sections_are_present_or_skipped_with_reason() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = report::run(&config(dir.path())).unwrap();
    assert!(bundle.skipped.is_empty(), "{:?}", bundle.skipped);
    assert_eq!(bundle.sections(), Section::all());
    for s in Section::all() {
        assert!(dir.path().join(s.file_name()).is_file(), "{s} not written");
    }

    let bare = tempfile::tempdir().unwrap();
    let mut cfg = config(bare.path());
    cfg.theme_map = None;
    cfg.events = None;
    cfg.phases_rki = None;
    cfg.phases_policy = None;
    let bundle = report::run(&cfg).unwrap();
    let skipped: Vec<Section> = bundle.skipped.keys().copied().collect();
    assert_eq!(
        skipped,
        [
            Section::ThemeSummary,
            Section::ThemeSeries,
            Section::ThemePhaseRki,
            Section::ThemePhasePolicy,
            Section::Alignment
        ]
    );
    assert!(bundle.skipped.values().all(|r| !r.is_empty()));
    assert_eq!(bundle.sections().len() + skipped.len(), Section::all().len());
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(bare.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(
        manifest["sections"]["alignment"]["status"], "skipped",
        "{manifest:#}"
    );
    assert!(!bare.path().join("alignment.csv").exists());
    assert!(bundle.render_csv(Section::Alignment).is_err());
}

#[test]
fn section_csvs_round_trip_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = report::run(&config(dir.path())).unwrap();
    for m in Metric::ALL {
        let path = dir.path().join(Section::Series(m).file_name());
        let back = DailySeries::read_csv(&path, m).unwrap();
        assert_eq!(back.values(), bundle.series[&m].values(), "{m}");
        assert_eq!(back.empty_days, bundle.series[&m].empty_days);
    }

    let mut trends = csv::Reader::from_path(dir.path().join("trends.csv")).unwrap();
    let header = trends.headers().unwrap().clone();
    assert_eq!(
        header.iter().collect::<Vec<_>>(),
        ["series", "direction", "s", "var_s", "z", "p", "alpha"]
    );
    let mut rows = 0;
    for row in trends.records() {
        let row = row.unwrap();
        let r = bundle.analytics_for(&row[0]).unwrap();
        let t = r.trend.unwrap();
        assert_eq!(row[1].to_string(), t.direction.as_str());
        assert_eq!(row[4].parse::<f64>().unwrap(), t.z);
        assert_eq!(row[5].parse::<f64>().unwrap(), t.p);
        rows += 1;
    }
    assert_eq!(rows, bundle.analytics.len());

    let mut peaks = csv::Reader::from_path(dir.path().join("peaks.csv")).unwrap();
    for row in peaks.records() {
        let row = row.unwrap();
        let r = bundle.analytics_for(&row[0]).unwrap();
        assert_eq!(row[6].parse::<f64>().unwrap(), r.peaks.lower_threshold);
        assert_eq!(row[5].parse::<f64>().unwrap(), r.peaks.upper_threshold);
    }

    let table = std::fs::read_to_string(dir.path().join("topic_table.csv")).unwrap();
    assert!(table.starts_with("rank,label,size,mean_rel\n"));
    assert!(!table.contains('\r'));
    let series = std::fs::read_to_string(dir.path().join("series_rel.csv")).unwrap();
    assert!(series.starts_with("date,value,count,empty_flag\n"));
}

#[test]
fn emit_rejects_unknown_section() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = report::run(&config(dir.path())).unwrap();
    let err = report::emit_csv(&bundle, "table_12", dir.path()).unwrap_err();
    assert_eq!(err.exit_code(), 1);
    let path = report::emit_csv(&bundle, "changepoints", dir.path()).unwrap();
    assert!(std::fs::read_to_string(path)
        .unwrap()
        .starts_with("series,date,index,penalty,penalty_source,total_cost\n"));
}

#[test]
fn plots_carry_markers() {
    let dir = tempfile::tempdir().unwrap();
    report::run(&config(dir.path())).unwrap();
    let rel = std::fs::read_to_string(dir.path().join("plots/series_rel.svg")).unwrap();
    assert_eq!(rel.matches("class=\"changepoint\"").count(), 1);
    // the fixture window lies inside one policy phase
    assert_eq!(rel.matches("class=\"phase\"").count(), 0);
    let count = std::fs::read_to_string(dir.path().join("plots/series_count.svg")).unwrap();
    assert!(count.contains("class=\"peak\""));
    let themes = std::fs::read_to_string(dir.path().join("plots/themes.svg")).unwrap();
    assert_eq!(themes.matches("class=\"series\"").count(), 3);
    assert_eq!(themes.matches("class=\"legend-entry\"").count(), 3);
}

#[test]
fn phase_gridlines_follow_the_policy_table() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(dir.path());
    cfg.end = chrono::NaiveDate::from_ymd_opt(2021, 5, 31).unwrap();
    report::run(&cfg).unwrap();
    let policy =
        discourse::analytics::PhaseTable::load(cfg.phases_policy.as_ref().unwrap(), "policy").unwrap();
    let inside = policy
        .boundaries()
        .into_iter()
        .filter(|d| (cfg.begin..=cfg.end).contains(d))
        .count();
    assert!(inside >= 1);
    let svg = std::fs::read_to_string(dir.path().join("plots/series_count.svg")).unwrap();
    assert_eq!(svg.matches("class=\"phase\"").count(), inside);
}
