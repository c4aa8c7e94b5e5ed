// Seed expansion on the bundled 50-document fixture.
//
// cargo run --example expand_seeds

use std::path::Path;

use discourse::corpus::{load_corpus, LemmaTable, LoadFilter};
use discourse::seedex::{collect_candidates, expand, load_embeddings, ExpansionConfig, SeedList};

pub fn run_example() -> discourse::Result<SeedList> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/seedex");
    let window = LoadFilter::from_days("2021-03-01".parse().unwrap(), "2021-03-31".parse().unwrap(), "de")?;
    let (corpus, stats) = load_corpus(&dir.join("corpus.jsonl"), &window)?;
    println!("loaded {} of {} lines", stats.kept, stats.read);

    let lemmas = LemmaTable::load(&dir.join("lemmas.tsv"))?;
    let words = load_embeddings(&dir.join("words.vec"))?;
    let config = ExpansionConfig::default();
    let candidates = collect_candidates(&corpus, "impfung", &lemmas, &config.pos_classes);
    let (seeds, diag) = expand("impfung", &candidates, &words, &config)?;
    println!(
        "{} candidates: {} kept, {} below {}, no vector for {:?}, zero vector {:?}",
        diag.candidates,
        seeds.terms.len(),
        diag.below_threshold,
        config.min_similarity,
        diag.missing_embedding,
        diag.zero_vector
    );
    let mut tsv = Vec::new();
    seeds.write_tsv(&mut tsv).expect("write to memory");
    print!("{}", String::from_utf8_lossy(&tsv));
    Ok(seeds)
}

fn main() -> discourse::Result<()> {
    run_example().map(|_| ())
}
