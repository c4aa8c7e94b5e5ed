// Relevance filtering of the synthetic corpus with a hand-picked seed list,
// with and without compound (substring) matching.
//
// cargo run --example filter_corpus

use std::path::Path;

use discourse::corpus::load_corpus;
use discourse::relevance::{filter_corpus, ExclusionRule, FilterStats, Matcher};
use discourse::report::RunConfig;

pub fn run_example() -> discourse::Result<(FilterStats, FilterStats)> {
    let cfg = RunConfig::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/synthetic/run.toml"))?;
    let (corpus, _) = load_corpus(&cfg.corpus, &cfg.load_filter()?)?;
    let seeds = ["impfung", "impfstoff", "impftermin", "infektion"];
    let exclusion = ExclusionRule::new(["infektion"]);

    let exact = Matcher::new(seeds);
    let (kept, exact_stats) = filter_corpus(&corpus, &exact, &exclusion);
    println!("token match:     {exact_stats:?}");
    if let Some(r) = kept.first() {
        println!("  e.g. {} {:?}", r.id, exact.match_record(r).matched_terms);
    }

    let loose = Matcher::new(seeds).with_substring(true);
    let (_, loose_stats) = filter_corpus(&corpus, &loose, &exclusion);
    println!("substring match: {loose_stats:?}");
    Ok((exact_stats, loose_stats))
}

fn main() -> discourse::Result<()> {
    run_example().map(|_| ())
}
