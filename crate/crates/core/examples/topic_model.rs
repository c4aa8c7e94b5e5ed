// Topic clustering on the synthetic fixture's document vectors, then
// c-TF-IDF terms per topic. Every loaded document is clustered here, the
// off-topic ones included; the pipeline clusters only the relevant set and
// attaches theme labels (see run_pipeline).
//
// cargo run --example topic_model

use std::collections::BTreeMap;
use std::path::Path;

use discourse::corpus::load_corpus;
use discourse::report::RunConfig;
use discourse::topics::{embed_docs, fit_topics, load_doc_vectors, topic_terms, EmbedStrategy, Topic};

pub fn run_example() -> discourse::Result<Vec<Topic>> {
    let cfg = RunConfig::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/synthetic/run.toml"))?;
    let (corpus, _) = load_corpus(&cfg.corpus, &cfg.load_filter()?)?;
    let vectors = load_doc_vectors(cfg.doc_embeddings.as_ref().expect("fixture has doc vectors"))?;
    // only the relevant documents have precomputed vectors
    let docs: Vec<_> = corpus
        .into_iter()
        .filter(|r| vectors.get(&r.id).is_some())
        .collect();
    let embedded = embed_docs(&docs, &EmbedStrategy::Precomputed(&vectors))?;

    let config = cfg.topic_config();
    let assignment = fit_topics(&embedded.vectors, &config)?;
    println!(
        "{} documents, {} outliers",
        assignment.len(),
        assignment.outliers()
    );

    let topics = topic_terms(&assignment, &docs, &config, &BTreeMap::new());
    for t in &topics {
        let terms: Vec<&str> = t.top_terms.iter().take(6).map(|(w, _)| w.as_str()).collect();
        println!("topic {} ({} docs): {}", t.id, t.size, terms.join(", "));
    }
    Ok(topics)
}

fn main() -> discourse::Result<()> {
    run_example().map(|_| ())
}
