//! Bridge between any external embedding encoder and the interaction
//! stage. The interchange unit is a similarity matrix, not embeddings:
//! downstream only ever consumes similarities, so every neural choice
//! stays outside the toolkit. Any score convention works as long as
//! larger means more similar.
//!
//! A character-trigram name matcher is included as a non-neural
//! stand-in encoder so the pipeline runs end to end with no external
//! dependency.

use std::collections::HashMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::kg::{EntityId, KnowledgeGraph};
use crate::matrix::{read_easim, SimilarityMatrix};

pub use crate::matrix::write_easim;

/// Loads a dense encoder matrix and checks every surface resolves
/// against the two graphs. Row/col order is taken from the file; the
/// result is tagged raw.
pub fn load_encoder_matrix(
    path: &Path,
    kg1: &KnowledgeGraph,
    kg2: &KnowledgeGraph,
) -> Result<SimilarityMatrix> {
    let m = read_easim(path)?;
    for s in m.row_surfaces() {
        if kg1.entity(s).is_none() {
            return Err(Error::UnknownSurface { surface: s.clone() });
        }
    }
    for s in m.col_surfaces() {
        if kg2.entity(s).is_none() {
            return Err(Error::UnknownSurface { surface: s.clone() });
        }
    }
    Ok(m)
}

/// Entity name: the local part of an IRI (after the last `/` or `#`),
/// lowercased. Non-IRI surfaces are used whole.
pub fn entity_name(surface: &str) -> String {
    let local = surface
        .rfind(['/', '#'])
        .map(|i| &surface[i + 1..])
        .unwrap_or(surface);
    local.to_lowercase()
}

/// Character trigram counts of a name; names shorter than three
/// characters contribute a single whole-string gram.
fn trigram_counts(name: &str) -> HashMap<String, f64> {
    let chars: Vec<char> = name.chars().collect();
    let mut counts = HashMap::new();
    if chars.is_empty() {
        return counts;
    }
    if chars.len() < 3 {
        counts.insert(name.to_owned(), 1.0);
        return counts;
    }
    for w in chars.windows(3) {
        *counts.entry(w.iter().collect::<String>()).or_insert(0.0) += 1.0;
    }
    counts
}

fn cosine(a: &HashMap<String, f64>, b: &HashMap<String, f64>) -> f64 {
    let dot: f64 = a
        .iter()
        .filter_map(|(g, &va)| b.get(g).map(|&vb| va * vb))
        .sum();
    if dot == 0.0 {
        return 0.0;
    }
    let na: f64 = a.values().map(|v| v * v).sum::<f64>().sqrt();
    let nb: f64 = b.values().map(|v| v * v).sum::<f64>().sqrt();
    dot / (na * nb)
}

/// Trigram cosine similarity of two entity names. Equal names score
/// exactly 1; names with disjoint trigram sets score 0.
pub fn name_similarity(name1: &str, name2: &str) -> f64 {
    if name1 == name2 {
        return if name1.is_empty() { 0.0 } else { 1.0 };
    }
    cosine(&trigram_counts(name1), &trigram_counts(name2))
}

/// Dense name-similarity matrix over the given source and target
/// entities. Deterministic; tagged raw like any other encoder output.
pub fn baseline_literal_encoder(
    kg1: &KnowledgeGraph,
    kg2: &KnowledgeGraph,
    rows: &[EntityId],
    cols: &[EntityId],
) -> Result<SimilarityMatrix> {
    let row_surfaces: Vec<String> = rows
        .iter()
        .map(|&e| kg1.entity_surface(e).to_owned())
        .collect();
    let col_surfaces: Vec<String> = cols
        .iter()
        .map(|&e| kg2.entity_surface(e).to_owned())
        .collect();
    let row_names: Vec<String> = row_surfaces.iter().map(|s| entity_name(s)).collect();
    let col_names: Vec<String> = col_surfaces.iter().map(|s| entity_name(s)).collect();
    let row_grams: Vec<HashMap<String, f64>> =
        row_names.iter().map(|n| trigram_counts(n)).collect();
    let col_grams: Vec<HashMap<String, f64>> =
        col_names.iter().map(|n| trigram_counts(n)).collect();

    let mut scores = Vec::with_capacity(rows.len() * cols.len());
    for (rn, rg) in row_names.iter().zip(&row_grams) {
        for (cn, cg) in col_names.iter().zip(&col_grams) {
            let s = if rn == cn {
                if rn.is_empty() {
                    0.0
                } else {
                    1.0
                }
            } else {
                cosine(rg, cg)
            };
            scores.push(s);
        }
    }
    SimilarityMatrix::new_dense(
        row_surfaces,
        col_surfaces,
        scores,
        crate::matrix::ScoreDomain::Raw,
    )
}
