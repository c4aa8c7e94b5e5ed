use std::path::Path;

use rayon::prelude::*;

use crate::corpus::{tokenize, TweetRecord};
use crate::error::{Error, Result};
use crate::seedex::{read_vector_file, EmbeddingTable};

#[derive(Debug, Clone, PartialEq)]
pub struct DocVector {
    pub tweet_id: String,
    /// Unit length, or all zeros when nothing was embeddable.
    pub vector: Vec<f64>,
}

impl DocVector {
    pub fn is_zero(&self) -> bool {
        self.vector.iter().all(|&v| v == 0.0)
    }
}

pub enum EmbedStrategy<'a> {
    /// Vectors keyed by tweet id, e.g. from a sentence encoder run elsewhere.
    Precomputed(&'a EmbeddingTable),
    /// Average of the word vectors of in-vocabulary tokens.
    MeanWordVector(&'a EmbeddingTable),
}

#[derive(Debug, Clone, Default)]
pub struct Embedded {
    pub vectors: Vec<DocVector>,
    /// Documents with no precomputed vector; they are given a zero vector.
    pub missing: Vec<String>,
}

/// Reads a document vector file (header `N D`, rows `tweet_id v1 .. vD`).
pub fn load_doc_vectors(path: &Path) -> Result<EmbeddingTable> {
    read_vector_file(path, false)
}

fn normalized(mut v: Vec<f64>) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    v
}

pub fn embed_docs(corpus: &[TweetRecord], strategy: &EmbedStrategy<'_>) -> Result<Embedded> {
    match strategy {
        EmbedStrategy::Precomputed(table) => {
            let mut out = Embedded::default();
            for r in corpus {
                let vector = match table.get(&r.id) {
                    Some(v) => normalized(v.to_vec()),
                    None => {
                        out.missing.push(r.id.clone());
                        vec![0.0; table.dim()]
                    }
                };
                out.vectors.push(DocVector {
                    tweet_id: r.id.clone(),
                    vector,
                });
            }
            Ok(out)
        }
        EmbedStrategy::MeanWordVector(words) => {
            if words.dim() == 0 {
                return Err(Error::Invalid("word embeddings have dimension 0".into()));
            }
            let vectors = corpus
                .par_iter()
                .map(|r| {
                    let mut sum = vec![0.0; words.dim()];
                    let mut n = 0usize;
                    for t in tokenize(&r.text) {
                        if let Some(v) = words.get(&t.surface) {
                            sum.iter_mut().zip(v).for_each(|(s, x)| *s += x);
                            n += 1;
                        }
                    }
                    if n > 0 {
                        sum.iter_mut().for_each(|s| *s /= n as f64);
                    }
                    DocVector {
                        tweet_id: r.id.clone(),
                        vector: normalized(sum),
                    }
                })
                .collect();
            Ok(Embedded {
                vectors,
                missing: Vec::new(),
            })
        }
    }
}
