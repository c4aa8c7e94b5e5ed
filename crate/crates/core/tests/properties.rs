use chrono::{Days, NaiveDate, TimeZone, Utc};
use proptest::prelude::*;

use discourse::analytics::{
    find_peaks, mann_kendall_s, pelt, segmentation_cost, PeakSide, Phase, PhaseTable,
};
use discourse::corpus::{read_corpus, tokenize, write_corpus, LoadFilter, TweetRecord};
use discourse::relevance::{filter_corpus, ExclusionRule, Matcher};
use discourse::seedex::{cosine, EmbeddingTable};
use discourse::sentiment::{aggregate, DailySeries, Metric, SentimentScore};

fn day0() -> NaiveDate {
    NaiveDate::from_ymd_opt(2021, 3, 1).unwrap()
}

fn record(id: usize, day: u64, text: String) -> TweetRecord {
    let date = day0() + Days::new(day);
    TweetRecord {
        id: format!("t{id}"),
        created_at: Utc.from_utc_datetime(&date.and_hms_opt(12, 0, 0).unwrap()),
        lang: "de".into(),
        text,
        hashtags: Vec::new(),
    }
}

fn word() -> impl Strategy<Value = String> {
    prop::sample::select(vec![
        "impfung",
        "Impfung",
        "#impfung",
        "infektion",
        "termin",
        "Impfstoff",
        "maske",
        "und",
        "Grüße",
        "straße",
        "ÄRZTE",
        "covid19",
        "2021",
        "!!",
        "...",
        "-",
        "impfungen",
    ])
    .prop_map(String::from)
}

fn text() -> impl Strategy<Value = String> {
    prop::collection::vec(word(), 0..12).prop_map(|w| w.join(" "))
}

fn score() -> impl Strategy<Value = SentimentScore> {
    (1i8..=5, -5i8..=-1).prop_map(|(p, n)| SentimentScore::new(p, n).unwrap())
}

proptest! {
    #[test]
    fn tokens_are_lowercase_alphanumeric_and_stable(t in ".{0,80}") {
        let tokens = tokenize(&t);
        for tok in &tokens {
            prop_assert!(!tok.surface.is_empty());
            prop_assert!(tok.surface.chars().all(char::is_alphanumeric));
            prop_assert_eq!(tok.surface.to_lowercase(), tok.surface.clone());
        }
        let joined: Vec<String> = tokens.iter().map(|t| t.surface.clone()).collect();
        let again: Vec<String> = tokenize(&joined.join(" ")).into_iter().map(|t| t.surface).collect();
        prop_assert_eq!(again, joined);
    }

    #[test]
    fn ingest_outcomes_partition_the_lines(
        lines in prop::collection::vec((0u8..6, 0u64..40, text()), 0..40)
    ) {
        let mut input = String::new();
        for (i, (kind, day, t)) in lines.iter().enumerate() {
            let mut r = record(i % 25, *day, t.clone());
            match kind {
                0 => r.lang = "en".into(),
                1 => { input.push_str("{not json\n"); continue; }
                _ => {}
            }
            let mut buf = Vec::new();
            write_corpus(&mut buf, &[r]).unwrap();
            input.push_str(std::str::from_utf8(&buf).unwrap());
        }
        let window = LoadFilter::from_days(day0(), day0() + Days::new(29), "de").unwrap();
        let (records, stats) = read_corpus(input.as_bytes(), &window).unwrap();
        prop_assert_eq!(stats.read, lines.len());
        prop_assert_eq!(stats.outcome_total(), stats.read);
        prop_assert_eq!(stats.kept, records.len());
    }

    #[test]
    fn filtering_is_idempotent(texts in prop::collection::vec(text(), 0..30), substring: bool) {
        let corpus: Vec<TweetRecord> = texts.into_iter().enumerate().map(|(i, t)| record(i, 0, t)).collect();
        let matcher = Matcher::new(["impfung", "termin", "infektion"]).with_substring(substring);
        let excl = ExclusionRule::default();
        let (once, stats) = filter_corpus(&corpus, &matcher, &excl);
        let (twice, again) = filter_corpus(&once, &matcher, &excl);
        prop_assert_eq!(&once, &twice);
        prop_assert_eq!(again.relevant, stats.relevant);
        prop_assert_eq!(stats.matched, stats.excluded + stats.relevant);
    }

    #[test]
    fn mann_kendall_s_is_antisymmetric_and_rank_based(x in prop::collection::vec(-5i32..5, 2..40)) {
        let xf: Vec<f64> = x.iter().map(|&v| v as f64).collect();
        let rev: Vec<f64> = xf.iter().rev().copied().collect();
        prop_assert_eq!(mann_kendall_s(&rev), -mann_kendall_s(&xf));
        let cubed: Vec<f64> = xf.iter().map(|v| v * v * v + 7.0).collect();
        prop_assert_eq!(mann_kendall_s(&cubed), mann_kendall_s(&xf));
    }

    #[test]
    fn pelt_never_loses_to_no_change(
        x in prop::collection::vec(-20.0f64..20.0, 2..60),
        penalty in 0.0f64..50.0,
    ) {
        let r = pelt(&x, penalty).unwrap();
        let direct = segmentation_cost(&x, &r.indices, penalty);
        prop_assert!((direct - r.total_cost).abs() <= 1e-8 * (1.0 + direct.abs()));
        let flat = segmentation_cost(&x, &[x.len()], penalty);
        prop_assert!(r.total_cost <= flat + 1e-8 * (1.0 + flat.abs()));
        prop_assert!(r.indices.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn peaks_lie_outside_their_thresholds(
        x in prop::collection::vec(-100.0f64..100.0, 2..80),
        m in 0.0f64..3.0,
        extra in 0.0f64..2.0,
    ) {
        let set = find_peaks(&x, m).unwrap();
        for p in &set.peaks {
            match p.side {
                PeakSide::High => prop_assert!(p.value > set.upper_threshold),
                PeakSide::Low => prop_assert!(p.value < set.lower_threshold),
            }
        }
        let wider = find_peaks(&x, m + extra).unwrap();
        prop_assert!(wider.peaks.iter().all(|p| set.peaks.iter().any(|q| q.index == p.index)));
    }

    #[test]
    fn daily_identities_hold(rows in prop::collection::vec((0u64..20, score()), 0..80)) {
        let dated: Vec<_> = rows.iter().map(|(d, s)| (day0() + Days::new(*d), *s)).collect();
        let last = day0() + Days::new(19);
        let get = |m| aggregate(&dated, m, day0(), last).unwrap();
        let (sum, rel, pos, neg, count) =
            (get(Metric::Sum), get(Metric::Rel), get(Metric::Pos), get(Metric::Neg), get(Metric::Count));
        prop_assert_eq!(count.len(), 20);
        for i in 0..20 {
            prop_assert_eq!(rel.exact(i) * count.exact(i), sum.exact(i));
            prop_assert!(pos.exact(i) + neg.exact(i) <= count.exact(i));
            prop_assert_eq!(count.empty_days.contains(&count.date(i)), count.count(i) == 0);
        }
        let mut reversed = dated.clone();
        reversed.reverse();
        prop_assert_eq!(aggregate(&reversed, Metric::Rel, day0(), last).unwrap(), rel);
    }

    #[test]
    fn series_csv_round_trips_exactly(rows in prop::collection::vec((0u64..15, score()), 0..60)) {
        let dated: Vec<_> = rows.iter().map(|(d, s)| (day0() + Days::new(*d), *s)).collect();
        let dir = tempfile::tempdir().unwrap();
        for m in Metric::ALL {
            let s = aggregate(&dated, m, day0(), day0() + Days::new(14)).unwrap();
            let path = dir.path().join("s.csv");
            let mut buf = Vec::new();
            s.write_csv(&mut buf).unwrap();
            std::fs::write(&path, &buf).unwrap();
            let back = DailySeries::read_csv(&path, m).unwrap();
            prop_assert_eq!(back.values(), s.values());
            prop_assert_eq!(back.empty_days, s.empty_days);
        }
    }

    #[test]
    fn cosine_is_bounded_and_scale_free(
        a in prop::collection::vec(-10.0f64..10.0, 4),
        b in prop::collection::vec(-10.0f64..10.0, 4),
        k in 1e-3f64..1e3,
    ) {
        prop_assume!(a.iter().any(|v| v.abs() > 1e-6) && b.iter().any(|v| v.abs() > 1e-6));
        let c = cosine(&a, &b).unwrap();
        prop_assert!((-1.0..=1.0).contains(&c));
        let mut t = EmbeddingTable::new(4);
        t.insert("a", a.clone()).unwrap();
        t.insert("b", b.clone()).unwrap();
        let s = t.scaled(k);
        let c2 = cosine(s.get("a").unwrap(), s.get("b").unwrap()).unwrap();
        prop_assert!((c - c2).abs() <= 1e-12);
    }

    #[test]
    fn phase_lookup_finds_the_containing_row(
        lengths in prop::collection::vec(1u64..40, 1..8),
        probe in 0u64..300,
    ) {
        let mut rows = Vec::new();
        let mut begin = day0();
        for (i, len) in lengths.iter().enumerate() {
            let end = begin + Days::new(*len);
            rows.push(Phase { name: format!("p{i}"), begin, end });
            begin = end;
        }
        let table = PhaseTable::new("t", rows.clone()).unwrap();
        let date = day0() + Days::new(probe);
        match table.phase_of(date) {
            Some(p) => {
                prop_assert!(p.begin <= date && date <= p.end);
                // a shared boundary day belongs to the later phase
                prop_assert!(!rows.iter().any(|q| q.begin == date && q.name != p.name));
            }
            None => prop_assert!(rows.iter().all(|q| date < q.begin || date > q.end)),
        }
    }
}
