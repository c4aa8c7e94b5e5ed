//! Query expansion: builds a seed list from one keyword by collecting
//! co-occurring lemmas and keeping those close to the keyword in a word
//! embedding space.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{tokenize, LemmaTable, PosClass, TweetRecord};
use crate::error::{Error, Result};

/// Dense vectors keyed by token (or document id).
#[derive(Debug, Clone, Default)]
pub struct EmbeddingTable {
    dim: usize,
    vectors: HashMap<String, Vec<f64>>,
    /// Rows skipped because their key was already present.
    pub duplicates: usize,
}

impl EmbeddingTable {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            ..Self::default()
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, key: &str) -> Option<&[f64]> {
        self.vectors.get(key).map(Vec::as_slice)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.vectors.keys().map(String::as_str)
    }

    /// Inserts a vector; returns `false` (and counts a duplicate) if the key exists.
    pub fn insert(&mut self, key: impl Into<String>, vector: Vec<f64>) -> Result<bool> {
        if vector.len() != self.dim {
            return Err(Error::Invalid(format!(
                "vector of length {} in a table of dimension {}",
                vector.len(),
                self.dim
            )));
        }
        if vector.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("non-finite vector component".into()));
        }
        let key = key.into();
        if self.vectors.contains_key(&key) {
            self.duplicates += 1;
            return Ok(false);
        }
        self.vectors.insert(key, vector);
        Ok(true)
    }

    /// Returns a copy with every vector multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            dim: self.dim,
            vectors: self
                .vectors
                .iter()
                .map(|(k, v)| (k.clone(), v.iter().map(|x| x * factor).collect()))
                .collect(),
            duplicates: self.duplicates,
        }
    }

    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let mut keys: Vec<&String> = self.vectors.keys().collect();
        keys.sort();
        writeln!(out, "{} {}", keys.len(), self.dim)?;
        for k in keys {
            write!(out, "{k}")?;
            for v in &self.vectors[k] {
                write!(out, " {v}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Reads a word-vector file: header `V D`, then rows `token v1 .. vD`.
/// Tokens are lowercased.
pub fn load_embeddings(path: &Path) -> Result<EmbeddingTable> {
    read_vector_file(path, true)
}

/// Shared reader for word and document vector files. With `fold_keys`
/// the first column is lowercased.
pub(crate) fn read_vector_file(path: &Path, fold_keys: bool) -> Result<EmbeddingTable> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file).lines().enumerate();
    let header = loop {
        match lines.next() {
            Some((_, Ok(l))) if l.trim().is_empty() => continue,
            Some((_, Ok(l))) => break l,
            Some((_, Err(e))) => return Err(Error::io(path, e)),
            None => return Err(Error::parse(path, 1, "missing header")),
        }
    };
    let (size, dim) = parse_header(&header)
        .ok_or_else(|| Error::parse(path, 1, format!("header must be 'V D', got '{header}'")))?;
    let mut table = EmbeddingTable::new(dim);
    let mut rows = 0usize;
    for (i, line) in lines {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        rows += 1;
        if rows > size {
            return Err(Error::parse(
                path,
                i + 1,
                format!("more rows than the declared {size}"),
            ));
        }
        let mut fields = line.split_whitespace();
        let key = fields.next().unwrap_or_default();
        let values: Vec<&str> = fields.collect();
        if values.len() != dim {
            return Err(Error::parse(
                path,
                i + 1,
                format!("expected {} fields, found {}", dim + 1, values.len() + 1),
            ));
        }
        let vector = values
            .iter()
            .map(|v| v.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::parse(path, i + 1, e.to_string()))?;
        let key = if fold_keys {
            key.to_lowercase()
        } else {
            key.to_string()
        };
        table
            .insert(key, vector)
            .map_err(|e| Error::parse(path, i + 1, e.to_string()))?;
    }
    Ok(table)
}

fn parse_header(line: &str) -> Option<(usize, usize)> {
    let mut it = line.split_whitespace();
    let size = it.next()?.parse().ok()?;
    let dim: usize = it.next()?.parse().ok()?;
    if it.next().is_some() || dim == 0 {
        return None;
    }
    Some((size, dim))
}

/// Cosine similarity, clamped to `[-1, 1]`.
pub fn cosine(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Invalid(format!(
            "cosine of vectors with lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok((dot / (na * nb)).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExpansionConfig {
    pub min_similarity: f64,
    pub top_k: usize,
    pub pos_classes: BTreeSet<PosClass>,
}

impl Default for ExpansionConfig {
    fn default() -> Self {
        Self {
            min_similarity: 0.6,
            top_k: 30,
            pos_classes: [PosClass::Verb, PosClass::Adj, PosClass::Noun, PosClass::Propn]
                .into_iter()
                .collect(),
        }
    }
}

impl ExpansionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(-1.0..=1.0).contains(&self.min_similarity) {
            return Err(Error::Config(format!(
                "min_similarity {} outside [-1, 1]",
                self.min_similarity
            )));
        }
        if self.top_k == 0 {
            return Err(Error::Config("top_k must be at least 1".into()));
        }
        Ok(())
    }
}

/// A co-occurring lemma before similarity scoring.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub lemma: String,
    pub pos_class: PosClass,
    /// Number of query documents containing the lemma.
    pub cooccurrence: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateTerm {
    pub lemma: String,
    pub pos_class: PosClass,
    pub cooccurrence: usize,
    pub similarity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedList {
    pub query: String,
    pub terms: Vec<CandidateTerm>,
    pub config: ExpansionConfig,
}

impl SeedList {
    /// Terms used for matching: the query itself followed by the expansion terms.
    pub fn match_terms(&self) -> Vec<String> {
        let mut terms = vec![self.query.to_lowercase()];
        for t in &self.terms {
            if !terms.contains(&t.lemma) {
                terms.push(t.lemma.clone());
            }
        }
        terms
    }

    /// TSV with columns `term, pos_class, cooccurrence, similarity`.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "term\tpos_class\tcooccurrence\tsimilarity")?;
        for t in &self.terms {
            writeln!(
                out,
                "{}\t{}\t{}\t{}",
                t.lemma, t.pos_class, t.cooccurrence, t.similarity
            )?;
        }
        Ok(())
    }

    pub fn read_tsv(path: &Path, query: &str, config: ExpansionConfig) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut terms = Vec::new();
        for (i, line) in text.lines().enumerate().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            let bad = |m: String| Error::parse(path, i + 1, m);
            if cols.len() != 4 {
                return Err(bad(format!("expected 4 columns, found {}", cols.len())));
            }
            terms.push(CandidateTerm {
                lemma: cols[0].to_string(),
                pos_class: cols[1].parse().map_err(bad)?,
                cooccurrence: cols[2].parse().map_err(|e| bad(format!("{e}")))?,
                similarity: cols[3].parse().map_err(|e| bad(format!("{e}")))?,
            });
        }
        Ok(Self {
            query: query.to_lowercase(),
            terms,
            config,
        })
    }
}

/// Whether any token of the text equals `query` (case-insensitive, whole token).
pub fn contains_query(record: &TweetRecord, query: &str) -> bool {
    let query = query.to_lowercase();
    tokenize(&record.text).iter().any(|t| t.surface == query)
}

/// Collects lemmas of eligible classes from the documents that contain the
/// query, counting each lemma at most once per document.
pub fn collect_candidates(
    corpus: &[TweetRecord],
    query: &str,
    lemmas: &LemmaTable,
    pos_classes: &BTreeSet<PosClass>,
) -> Vec<Candidate> {
    let query = query.to_lowercase();
    let query_lemma = lemmas.resolve(&query).0;
    let per_doc: Vec<BTreeMap<String, PosClass>> = corpus
        .par_iter()
        .filter_map(|record| {
            let tokens = tokenize(&record.text);
            if !tokens.iter().any(|t| t.surface == query) {
                return None;
            }
            let mut seen: BTreeMap<String, PosClass> = BTreeMap::new();
            for t in &tokens {
                let (lemma, pos) = lemmas.resolve(&t.surface);
                if !pos_classes.contains(&pos) || lemma == query || lemma == query_lemma {
                    continue;
                }
                seen.entry(lemma)
                    .and_modify(|p| *p = (*p).min(pos))
                    .or_insert(pos);
            }
            Some(seen)
        })
        .collect();

    let mut merged: BTreeMap<String, (PosClass, usize)> = BTreeMap::new();
    for doc in per_doc {
        for (lemma, pos) in doc {
            let e = merged.entry(lemma).or_insert((pos, 0));
            e.0 = e.0.min(pos);
            e.1 += 1;
        }
    }
    merged
        .into_iter()
        .map(|(lemma, (pos_class, cooccurrence))| Candidate {
            lemma,
            pos_class,
            cooccurrence,
        })
        .collect()
}

/// What `expand` dropped and why.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExpansionDiagnostics {
    pub candidates: usize,
    pub missing_embedding: Vec<String>,
    pub zero_vector: Vec<String>,
    pub below_threshold: usize,
    pub truncated: usize,
}

/// Rounding slack on the similarity threshold. A cosine that is exactly on the
/// threshold in real arithmetic can land one ulp below it once the vectors are
/// rescaled.
pub const SIMILARITY_SLACK: f64 = 1e-12;

/// Filters candidates by cosine similarity to the query (inclusive threshold,
/// up to [`SIMILARITY_SLACK`]), ranks by co-occurrence (ties by lemma) and keeps the top `config.top_k`.
pub fn expand(
    query: &str,
    candidates: &[Candidate],
    embeddings: &EmbeddingTable,
    config: &ExpansionConfig,
) -> Result<(SeedList, ExpansionDiagnostics)> {
    config.validate()?;
    let query = query.to_lowercase();
    let query_vec = embeddings
        .get(&query)
        .ok_or_else(|| Error::QueryNotEmbedded(query.clone()))?;
    let mut diag = ExpansionDiagnostics {
        candidates: candidates.len(),
        ..Default::default()
    };
    let mut kept = Vec::new();
    for c in candidates {
        let Some(v) = embeddings.get(&c.lemma) else {
            diag.missing_embedding.push(c.lemma.clone());
            continue;
        };
        let similarity = match cosine(query_vec, v) {
            Ok(s) => s,
            Err(Error::ZeroVector) => {
                diag.zero_vector.push(c.lemma.clone());
                continue;
            }
            Err(e) => return Err(e),
        };
        if similarity < config.min_similarity - SIMILARITY_SLACK {
            diag.below_threshold += 1;
            continue;
        }
        kept.push(CandidateTerm {
            lemma: c.lemma.clone(),
            pos_class: c.pos_class,
            cooccurrence: c.cooccurrence,
            similarity,
        });
    }
    kept.sort_by(|a, b| {
        b.cooccurrence
            .cmp(&a.cooccurrence)
            .then_with(|| a.lemma.cmp(&b.lemma))
    });
    diag.truncated = kept.len().saturating_sub(config.top_k);
    kept.truncate(config.top_k);
    Ok((
        SeedList {
            query,
            terms: kept,
            config: config.clone(),
        },
        diag,
    ))
}
