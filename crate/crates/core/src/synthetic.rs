//! Deterministic synthetic corpus with planted structure, used by the
//! examples and the end-to-end tests.
//!
//! What is planted:
//! - relevant documents per day grow linearly over the window (trend),
//! - 80 extra documents on 2021-03-15 (spike),
//! - sentiment flips from mostly positive to mostly negative on 2021-02-15 (step),
//! - three topic clusters of different sizes, with matching word and document vectors,
//! - noise lines: off-topic, English, out-of-window, exclusion-only, malformed, duplicate.

use std::path::Path;

use chrono::{Days, NaiveDate};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::corpus::TweetRecord;
use crate::error::{Error, Result};
use crate::seedex::EmbeddingTable;

pub const DEFAULT_SEED: u64 = 20210315;
pub const TOTAL_LINES: usize = 1000;
pub const WINDOW_DAYS: u64 = 100;
pub const SPIKE_DOCS: usize = 80;
const DOC_DIM: usize = 8;
const WORD_DIM: usize = 10;

pub fn first_day() -> NaiveDate {
    NaiveDate::from_ymd_opt(2021, 1, 1).unwrap()
}

pub fn last_day() -> NaiveDate {
    first_day() + Days::new(WINDOW_DAYS - 1)
}

pub fn spike_day() -> NaiveDate {
    NaiveDate::from_ymd_opt(2021, 3, 15).unwrap()
}

pub fn step_day() -> NaiveDate {
    NaiveDate::from_ymd_opt(2021, 2, 15).unwrap()
}

pub const LEXICON_TSV: &str = "term\tclass\tstrength
gut\tsentiment\t2
super\tsentiment\t3
toll\tsentiment\t3
hilfreich\tsentiment\t2
danke\tsentiment\t2
endlich\tsentiment\t3
froh\tsentiment\t3
schlecht\tsentiment\t-2
schrecklich\tsentiment\t-4
gefährlich\tsentiment\t-3
chaos\tsentiment\t-3
wütend\tsentiment\t-4
angst\tsentiment\t-3
skandal\tsentiment\t-4
sehr\tbooster\t
extrem\tbooster\t
nicht\tnegator\t
kein\tnegator\t
keine\tnegator\t
";

pub const LEMMAS_TSV: &str = "surface\tlemma\tpos
impfungen\timpfung\tnoun
geimpft\timpfen\tverb
impfe\timpfen\tverb
impfstoffe\timpfstoff\tnoun
impftermine\timpftermin\tnoun
astrazeneca\tastrazeneca\tpropn
biontech\tbiontech\tpropn
die\tdie\tother
der\tder\tother
das\tdas\tother
ist\tsein\tverb
war\tsein\tverb
und\tund\tother
mit\tmit\tother
vor\tvor\tother
nach\tnach\tother
heute\theute\tother
wieder\twieder\tother
zur\tzur\tother
für\tfür\tother
meine\tmein\tother
wir\twir\tother
ich\tich\tother
gut\tgut\tadj
super\tsuper\tadj
toll\ttoll\tadj
schlecht\tschlecht\tadj
";

pub const THEMES_TOML: &str = r#"[themes]
"Vaccine safety" = [0]
"Access to vaccination" = [1]
"Freedom and civic liberties" = [2]

[labels]
0 = "AstraZeneca safety"
1 = "Appointments"
2 = "Mandates and liberties"
"#;

const CLUSTER_WORDS: [[&str; 5]; 3] = [
    ["thrombose", "nebenwirkungen", "risiko", "stopp", "blutgerinnsel"],
    ["hausarzt", "warteliste", "anmeldung", "praxis", "hotline"],
    ["freiheit", "grundrechte", "zwang", "privilegien", "demo"],
];
const CLUSTER_SEEDS: [[&str; 2]; 3] = [
    ["astrazeneca", "impfstoff"],
    ["impftermin", "impfzentrum"],
    ["impfpflicht", "impfstoff"],
];
const CLUSTER_SHARE: [f64; 3] = [0.5, 0.3, 0.2];
const OPENINGS: [&str; 6] = [
    "Die Impfung",
    "Meine Impfung",
    "#Impfung",
    "Impfung heute",
    "Zur Impfung",
    "Die Impfungen",
];
const OPENINGS_NO_QUERY: [&str; 3] = ["Heute geimpft", "Der Impfstoff", "Wieder Impftermine"];
const EXTRAS: [&str; 4] = ["biontech", "dosis", "vor infektion", "maske"];
const POSITIVE: [&str; 7] = ["gut", "super", "toll", "hilfreich", "danke", "endlich", "froh"];
const NEGATIVE: [&str; 7] = [
    "schlecht",
    "schrecklich",
    "gefährlich",
    "chaos",
    "wütend",
    "angst",
    "skandal",
];
const OFF_TOPIC: [&str; 6] = [
    "Das Wetter ist heute schön",
    "Fußball am Wochenende mit Freunden",
    "Neues Rezept für Kuchen",
    "Stau auf der Autobahn wieder",
    "Der Zug war pünktlich",
    "Konzert in der Halle",
];

/// Word vectors: `impfung` is the query axis; each word's cosine to it is fixed.
pub fn word_embeddings() -> EmbeddingTable {
    // (word, cosine to the query, direction of the remainder)
    let rows: [(&str, f64, usize); 27] = [
        ("impfstoff", 0.9, 5),
        ("impfen", 0.85, 6),
        ("impftermin", 0.75, 2),
        ("biontech", 0.72, 7),
        ("impfzentrum", 0.7, 2),
        ("astrazeneca", 0.68, 1),
        ("dosis", 0.66, 8),
        ("impfpflicht", 0.64, 3),
        ("virus", 0.58, 9),
        ("maske", 0.55, 9),
        ("nebenwirkungen", 0.45, 1),
        ("hausarzt", 0.4, 2),
        ("thrombose", 0.35, 1),
        ("risiko", 0.3, 1),
        ("blutgerinnsel", 0.3, 1),
        ("warteliste", 0.3, 2),
        ("anmeldung", 0.25, 2),
        ("zwang", 0.25, 3),
        ("grundrechte", 0.2, 3),
        ("privilegien", 0.2, 3),
        ("praxis", 0.2, 2),
        ("freiheit", 0.15, 3),
        ("hotline", 0.15, 2),
        ("stopp", 0.1, 1),
        ("demo", 0.1, 3),
        ("wetter", 0.0, 9),
        ("fußball", 0.0, 8),
    ];
    let mut t = EmbeddingTable::new(WORD_DIM);
    let mut q = vec![0.0; WORD_DIM];
    q[0] = 5.0;
    t.insert("impfung", q).unwrap();
    // integer vector at cosine exactly 0.6
    let mut inf = vec![0.0; WORD_DIM];
    inf[0] = 3.0;
    inf[4] = 4.0;
    t.insert("infektion", inf).unwrap();
    for (word, c, axis) in rows {
        let mut v = [0.0; WORD_DIM];
        v[0] = c;
        v[axis] = (1.0 - c * c).sqrt();
        t.insert(word, v.iter().map(|x| round6(*x)).collect()).unwrap();
    }
    t
}

fn round6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

/// Counts behind the generated lines.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Planted {
    /// In-window German documents that mention a seed term.
    pub relevant: usize,
    pub cluster_sizes: [usize; 3],
    pub daily_relevant: Vec<usize>,
    pub off_topic: usize,
    pub english: usize,
    pub out_of_window: usize,
    pub exclusion_only: usize,
    pub malformed: usize,
    pub duplicates: usize,
}

pub struct Fixture {
    /// Line-delimited corpus, shuffled.
    pub corpus: String,
    pub doc_vectors: EmbeddingTable,
    pub planted: Planted,
}

struct Gen {
    rng: ChaCha8Rng,
    noise: Normal<f64>,
    records: Vec<TweetRecord>,
    vectors: EmbeddingTable,
}

impl Gen {
    fn record(
        &mut self,
        day: NaiveDate,
        lang: &str,
        text: String,
        hashtags: Vec<String>,
        centre: usize,
    ) -> TweetRecord {
        let id = format!("t{:05}", self.records.len() + 1);
        let secs = self.rng.random_range(0..86_400u32);
        let created_at = day
            .and_hms_opt(secs / 3600, (secs / 60) % 60, secs % 60)
            .unwrap()
            .and_utc();
        let mut v = vec![0.0; DOC_DIM];
        v[centre] = 1.0;
        for x in v.iter_mut() {
            *x = round6(*x + self.noise.sample(&mut self.rng));
        }
        self.vectors.insert(id.clone(), v).unwrap();
        let r = TweetRecord {
            id,
            created_at,
            lang: lang.into(),
            text,
            hashtags,
        };
        self.records.push(r.clone());
        r
    }

    fn pick<'a>(&mut self, xs: &[&'a str]) -> &'a str {
        xs.choose(&mut self.rng).unwrap()
    }

    fn sentiment(&mut self, negative_era: bool) -> String {
        let roll: f64 = self.rng.random();
        let (main, other) = if negative_era {
            (&NEGATIVE, &POSITIVE)
        } else {
            (&POSITIVE, &NEGATIVE)
        };
        let word = if roll < 0.88 {
            self.pick(main)
        } else if roll < 0.93 {
            self.pick(other)
        } else {
            return String::new();
        };
        if self.rng.random_bool(0.15) {
            format!("sehr {word}")
        } else {
            word.to_string()
        }
    }

    fn relevant_text(&mut self, cluster: usize, negative_era: bool) -> (String, Vec<String>) {
        let opening = if self.rng.random_bool(0.85) {
            self.pick(&OPENINGS)
        } else {
            self.pick(&OPENINGS_NO_QUERY)
        };
        let mut words: Vec<&str> = CLUSTER_WORDS[cluster].to_vec();
        let a = self.rng.random_range(0..words.len());
        let w1 = words.remove(a);
        let w2 = words[self.rng.random_range(0..words.len())];
        let seed = self.pick(&CLUSTER_SEEDS[cluster]);
        let mut text = format!("{opening} {seed} {w1} und {w2}");
        if self.rng.random_bool(0.3) {
            let extra = self.pick(&EXTRAS);
            text = format!("{text} {extra}");
        }
        let s = self.sentiment(negative_era);
        if !s.is_empty() {
            text = format!("{text} {s}");
        }
        let mut tags = Vec::new();
        if self.rng.random_bool(0.25) {
            tags.push(if self.rng.random_bool(0.5) {
                "#Impfung".into()
            } else {
                w1.to_string()
            });
        }
        (text, tags)
    }
}

/// Builds the 1,000-line fixture for `seed`.
pub fn generate(seed: u64) -> Fixture {
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(seed),
        noise: Normal::new(0.0, 0.07).unwrap(),
        records: Vec::new(),
        vectors: EmbeddingTable::new(DOC_DIM),
    };
    let mut planted = Planted::default();
    let mut lines: Vec<String> = Vec::new();
    let line_of = |r: &TweetRecord| serde_json::to_string(r).unwrap();

    for d in 0..WINDOW_DAYS {
        let day = first_day() + Days::new(d);
        let mut n = 2 + (d as usize * 7) / (WINDOW_DAYS as usize - 1) + g.rng.random_range(0..2usize);
        let spike = day == spike_day();
        if spike {
            n += SPIKE_DOCS;
        }
        planted.daily_relevant.push(n);
        for k in 0..n {
            let cluster = if spike && k < SPIKE_DOCS {
                0
            } else {
                let u: f64 = g.rng.random();
                if u < CLUSTER_SHARE[0] {
                    0
                } else if u < CLUSTER_SHARE[0] + CLUSTER_SHARE[1] {
                    1
                } else {
                    2
                }
            };
            let (text, tags) = g.relevant_text(cluster, day >= step_day());
            let r = g.record(day, "de", text, tags, cluster);
            lines.push(line_of(&r));
            planted.cluster_sizes[cluster] += 1;
            planted.relevant += 1;
        }
    }

    let noise_total = TOTAL_LINES - planted.relevant;
    planted.english = 50;
    planted.out_of_window = 40;
    planted.exclusion_only = 40;
    planted.malformed = 30;
    planted.duplicates = 20;
    planted.off_topic = noise_total
        - planted.english
        - planted.out_of_window
        - planted.exclusion_only
        - planted.malformed
        - planted.duplicates;

    let random_day = |rng: &mut ChaCha8Rng| first_day() + Days::new(rng.random_range(0..WINDOW_DAYS));
    for _ in 0..planted.off_topic {
        let day = random_day(&mut g.rng);
        let text = g.pick(&OFF_TOPIC).to_string();
        let r = g.record(day, "de", text, Vec::new(), 5);
        lines.push(line_of(&r));
    }
    for _ in 0..planted.english {
        let day = random_day(&mut g.rng);
        let text = format!(
            "Vaccination news: Impfung {} today",
            g.pick(&["astrazeneca", "biontech"])
        );
        let r = g.record(day, "en", text, Vec::new(), 5);
        lines.push(line_of(&r));
    }
    for i in 0..planted.out_of_window {
        let day = if i % 2 == 0 {
            first_day() - Days::new(g.rng.random_range(1..30))
        } else {
            last_day() + Days::new(g.rng.random_range(1..30))
        };
        let (text, tags) = g.relevant_text(i % 3, false);
        let r = g.record(day, "de", text, tags, i % 3);
        lines.push(line_of(&r));
    }
    for _ in 0..planted.exclusion_only {
        let day = random_day(&mut g.rng);
        let text = format!(
            "Infektion {} wieder",
            g.pick(&["zahlen steigen", "im Büro", "bei Kindern"])
        );
        let r = g.record(day, "de", text, Vec::new(), 5);
        lines.push(line_of(&r));
    }
    let bad = [
        r#"{"id":"bad-ts","created_at":"15.03.2021","lang":"de","text":"Impfung","hashtags":[]}"#,
        r#"{"id":"","created_at":"2021-03-15T10:00:00Z","lang":"de","text":"Impfung","hashtags":[]}"#,
        r#"{"id":"bad-tag","created_at":"2021-03-15T10:00:00Z","lang":"de","text":"Impfung","hashtags":["zwei worte"]}"#,
        r#"{"id":"no-text","created_at":"2021-03-15T10:00:00Z","lang":"de"}"#,
        r#"{"id":"cut","created_at":"2021-03-15T10:00:00Z","lang":"de","text":"Impf"#,
        "not json at all",
    ];
    for i in 0..planted.malformed {
        lines.push(bad[i % bad.len()].to_string());
    }
    // duplicates repeat earlier lines verbatim, so first-wins does not change content
    for _ in 0..planted.duplicates {
        let k = g.rng.random_range(0..planted.relevant);
        lines.push(lines[k].clone());
    }

    use rand::seq::SliceRandom;
    lines.shuffle(&mut g.rng);
    let mut corpus = lines.join("\n");
    corpus.push('\n');
    Fixture {
        corpus,
        doc_vectors: g.vectors,
        planted,
    }
}

fn table_text(t: &EmbeddingTable) -> String {
    let mut buf = Vec::new();
    t.write(&mut buf).expect("write to memory");
    String::from_utf8(buf).expect("utf-8")
}

/// Run config for the fixture directory. `data_dir` holds the phase and event
/// tables and is written as given (relative paths are relative to `dir`).
pub fn run_toml(data_dir: &str) -> String {
    format!(
        r#"corpus = "corpus.jsonl"
begin = "{first}"
end = "{last}"
lang = "de"
query = "impfung"
exclusion = ["infektion"]
lemma_table = "lemmas.tsv"
lexicon = "lexicon.tsv"
word_embeddings = "words.vec"
doc_embeddings = "docs.vec"
theme_map = "themes.toml"
phases_rki = "{data_dir}/phases_rki.csv"
phases_policy = "{data_dir}/phases_policy.csv"
events = "{data_dir}/events.csv"
output_dir = "out"
random_seed = 42

[expansion]
min_similarity = 0.6
top_k = 30

[topics]
min_cluster_size = 10
n_topics_target = 150
reduced_dim = 5

[analytics]
alpha = 0.05
peak_multiplier = 1.5
window_days = 3
"#,
        first = first_day(),
        last = last_day(),
    )
}

/// File name and content of every fixture file.
pub fn fixture_files(seed: u64, data_dir: &str) -> Vec<(&'static str, String)> {
    let f = generate(seed);
    vec![
        ("corpus.jsonl", f.corpus),
        ("docs.vec", table_text(&f.doc_vectors)),
        ("words.vec", table_text(&word_embeddings())),
        ("lexicon.tsv", LEXICON_TSV.to_string()),
        ("lemmas.tsv", LEMMAS_TSV.to_string()),
        ("themes.toml", THEMES_TOML.to_string()),
        ("run.toml", run_toml(data_dir)),
    ]
}

/// Writes the fixture into `dir` and returns what was planted.
pub fn write_fixture(dir: &Path, seed: u64, data_dir: &str) -> Result<Planted> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (name, text) in fixture_files(seed, data_dir) {
        let path = dir.join(name);
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    }
    Ok(generate(seed).planted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{read_corpus, LoadFilter};
    use crate::seedex::cosine;

    #[test]
    fn line_budget_and_partition() {
        let f = generate(DEFAULT_SEED);
        assert_eq!(f.corpus.lines().count(), TOTAL_LINES);
        let filter = LoadFilter::from_days(first_day(), last_day(), "de").unwrap();
        let (records, stats) = read_corpus(f.corpus.as_bytes(), &filter).unwrap();
        let p = &f.planted;
        assert_eq!(stats.read, TOTAL_LINES);
        assert_eq!(stats.malformed, p.malformed);
        assert_eq!(stats.duplicates, p.duplicates);
        assert_eq!(stats.dropped_lang, p.english);
        assert_eq!(stats.dropped_time, p.out_of_window);
        assert_eq!(records.len(), p.relevant + p.off_topic + p.exclusion_only);
        assert_eq!(p.daily_relevant.iter().sum::<usize>(), p.relevant);
        assert_eq!(p.cluster_sizes.iter().sum::<usize>(), p.relevant);
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate(7);
        let b = generate(7);
        assert_eq!(a.corpus, b.corpus);
        assert_ne!(a.corpus, generate(8).corpus);
    }

    #[test]
    fn planted_cosines() {
        let t = word_embeddings();
        let q = t.get("impfung").unwrap();
        assert_eq!(cosine(q, t.get("infektion").unwrap()).unwrap(), 0.6);
        assert!(cosine(q, t.get("maske").unwrap()).unwrap() < 0.6);
        assert!(cosine(q, t.get("impfpflicht").unwrap()).unwrap() > 0.6);
    }
}
