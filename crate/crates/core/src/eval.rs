//! Ranking evaluation over the test split: Hits@k, MRR, and top-1
//! accuracy for prediction sets that carry no full ranking.
//!
//! The candidate pool for each source is the set of target entities of
//! the evaluated pairs, ranking is source-to-target, and score ties
//! break by ascending column index so reports are reproducible.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::matrix::SimilarityMatrix;

/// Gold-target ranks (1-based) for each evaluated pair, in pair order.
pub fn rank(matrix: &SimilarityMatrix, pairs: &[(String, String)]) -> Result<Vec<usize>> {
    let row_of: HashMap<&str, usize> = matrix
        .row_surfaces()
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i))
        .collect();
    let col_of: HashMap<&str, usize> = matrix
        .col_surfaces()
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i))
        .collect();

    let mut candidate_cols = Vec::with_capacity(pairs.len());
    for (_, t) in pairs {
        let &c = col_of
            .get(t.as_str())
            .ok_or_else(|| Error::UnknownSurface { surface: t.clone() })?;
        candidate_cols.push(c);
    }
    candidate_cols.sort_unstable();
    candidate_cols.dedup();

    let mut ranks = Vec::with_capacity(pairs.len());
    for (s, t) in pairs {
        let &row = row_of
            .get(s.as_str())
            .ok_or_else(|| Error::UnknownSurface { surface: s.clone() })?;
        let gold_col = col_of[t.as_str()];
        let gold_score = matrix.score_or_zero(row, gold_col);
        let mut r = 1usize;
        for &c in &candidate_cols {
            if c == gold_col {
                continue;
            }
            let score = matrix.score_or_zero(row, c);
            if score > gold_score || (score == gold_score && c < gold_col) {
                r += 1;
            }
        }
        ranks.push(r);
    }
    Ok(ranks)
}

/// Hits@k over 1-based ranks.
pub fn hits_at(ranks: &[usize], k: usize) -> f64 {
    if ranks.is_empty() {
        return 0.0;
    }
    ranks.iter().filter(|&&r| r <= k).count() as f64 / ranks.len() as f64
}

/// Mean reciprocal rank over 1-based ranks.
pub fn mrr(ranks: &[usize]) -> f64 {
    if ranks.is_empty() {
        return 0.0;
    }
    ranks.iter().map(|&r| 1.0 / r as f64).sum::<f64>() / ranks.len() as f64
}

/// Aggregate metrics plus per-source ranks and run metadata.
#[derive(Debug, Clone)]
pub struct RankingReport {
    /// (k, Hits@k), ascending in k.
    pub hits_at: Vec<(usize, f64)>,
    pub mrr: f64,
    /// (source surface, gold rank), in evaluated-pair order.
    pub per_source: Vec<(String, usize)>,
    pub dataset: String,
    pub method: String,
    pub config_hash: String,
}

impl RankingReport {
    pub fn hits(&self, k: usize) -> Option<f64> {
        self.hits_at
            .iter()
            .find(|&&(kk, _)| kk == k)
            .map(|&(_, v)| v)
    }

    /// Report body as TSV, metadata in leading comment lines.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# dataset={}\n", self.dataset));
        out.push_str(&format!("# method={}\n", self.method));
        out.push_str(&format!("# config={}\n", self.config_hash));
        for &(k, v) in &self.hits_at {
            out.push_str(&format!("hits@{k}\t{v}\n"));
        }
        out.push_str(&format!("mrr\t{}\n", self.mrr));
        out
    }

    /// Small human-readable table.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        if !(self.dataset.is_empty() && self.method.is_empty() && self.config_hash.is_empty()) {
            out.push_str(&format!(
                "dataset: {}  method: {}  config: {}\n",
                self.dataset, self.method, self.config_hash
            ));
        }
        let header: Vec<String> = self
            .hits_at
            .iter()
            .map(|&(k, _)| format!("H@{k}"))
            .chain(["MRR".to_string()])
            .collect();
        out.push_str(&header.join("\t"));
        out.push('\n');
        let row: Vec<String> = self
            .hits_at
            .iter()
            .map(|&(_, v)| format!("{:.1}", v * 100.0))
            .chain([format!("{:.3}", self.mrr)])
            .collect();
        out.push_str(&row.join("\t"));
        out.push('\n');
        out
    }
}

/// Builds the report from per-pair ranks.
pub fn metrics(
    pairs: &[(String, String)],
    ranks: &[usize],
    ks: &[usize],
    dataset: &str,
    method: &str,
    config_hash: &str,
) -> Result<RankingReport> {
    if ranks.is_empty() {
        return Err(Error::NoRanks);
    }
    let mut ks: Vec<usize> = ks.to_vec();
    ks.sort_unstable();
    ks.dedup();
    let hits: Vec<(usize, f64)> = ks.iter().map(|&k| (k, hits_at(ranks, k))).collect();
    Ok(RankingReport {
        hits_at: hits,
        mrr: mrr(ranks),
        per_source: pairs
            .iter()
            .zip(ranks)
            .map(|((s, _), &r)| (s.clone(), r))
            .collect(),
        dataset: dataset.to_owned(),
        method: method.to_owned(),
        config_hash: config_hash.to_owned(),
    })
}

/// Top-1 accuracy of a prediction set against gold pairs; the only
/// metric a replacement-style prediction (no full ranking) supports.
pub fn metrics_top1(predictions: &[(String, String)], gold: &[(String, String)]) -> Result<f64> {
    if gold.is_empty() {
        return Err(Error::NoRanks);
    }
    let pred_of: HashMap<&str, &str> = predictions
        .iter()
        .map(|(s, t)| (s.as_str(), t.as_str()))
        .collect();
    let mut correct = 0usize;
    for (s, t) in gold {
        let p = pred_of
            .get(s.as_str())
            .ok_or_else(|| Error::MissingPrediction { surface: s.clone() })?;
        if *p == t.as_str() {
            correct += 1;
        }
    }
    Ok(correct as f64 / gold.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{ScoreDomain, SimilarityMatrix};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn names(prefix: &str, n: usize) -> Vec<String> {
        (0..n).map(|i| format!("{prefix}{i}")).collect()
    }

    fn pairs(n: usize) -> Vec<(String, String)> {
        (0..n).map(|i| (format!("s{i}"), format!("t{i}"))).collect()
    }

    #[test]
    fn identity_matrix_ranks_all_first() {
        let n = 4;
        let mut scores = vec![0.0; n * n];
        for i in 0..n {
            scores[i * n + i] = 1.0;
        }
        let m = SimilarityMatrix::new_dense(names("s", n), names("t", n), scores, ScoreDomain::Raw)
            .unwrap();
        assert_eq!(rank(&m, &pairs(n)).unwrap(), vec![1; n]);
    }

    #[test]
    fn second_highest_gold_ranks_two() {
        // Row s0 scores its gold t0 below t1.
        let m = SimilarityMatrix::new_dense(
            names("s", 3),
            names("t", 3),
            vec![
                0.5, 0.9, 0.1, //
                0.0, 1.0, 0.0, //
                0.0, 0.0, 1.0,
            ],
            ScoreDomain::Raw,
        )
        .unwrap();
        let ranks = rank(&m, &pairs(3)).unwrap();
        assert_eq!(ranks, vec![2, 1, 1]);
    }

    #[test]
    fn ties_break_by_column_index() {
        let m = SimilarityMatrix::new_dense(
            names("s", 2),
            names("t", 2),
            vec![0.7, 0.7, 0.7, 0.7],
            ScoreDomain::Raw,
        )
        .unwrap();
        let ranks = rank(&m, &pairs(2)).unwrap();
        // Row 0: gold t0 ties t1, lower index wins -> rank 1.
        // Row 1: gold t1 ties t0, t0 has lower index -> rank 2.
        assert_eq!(ranks, vec![1, 2]);
    }

    #[test]
    fn missing_test_entity_is_named() {
        let m =
            SimilarityMatrix::new_dense(names("s", 1), names("t", 1), vec![1.0], ScoreDomain::Raw)
                .unwrap();
        let p = vec![("sX".to_string(), "t0".to_string())];
        match rank(&m, &p) {
            Err(Error::UnknownSurface { surface }) => assert_eq!(surface, "sX"),
            other => panic!("expected unknown surface, got {other:?}"),
        }
    }

    /// Brute-force oracle: explicit stable sort of (score, col) per row.
    fn rank_oracle(m: &SimilarityMatrix, p: &[(String, String)]) -> Vec<usize> {
        let col_of: HashMap<&str, usize> = m
            .col_surfaces()
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i))
            .collect();
        let row_of: HashMap<&str, usize> = m
            .row_surfaces()
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i))
            .collect();
        let mut pool: Vec<usize> = p.iter().map(|(_, t)| col_of[t.as_str()]).collect();
        pool.sort_unstable();
        pool.dedup();
        p.iter()
            .map(|(s, t)| {
                let row = row_of[s.as_str()];
                let mut scored: Vec<(f64, usize)> =
                    pool.iter().map(|&c| (m.score_or_zero(row, c), c)).collect();
                scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
                scored
                    .iter()
                    .position(|&(_, c)| c == col_of[t.as_str()])
                    .unwrap()
                    + 1
            })
            .collect()
    }

    #[test]
    fn random_matrix_matches_sort_oracle() {
        let mut rng = StdRng::seed_from_u64(12);
        let n = 12;
        let scores: Vec<f64> = (0..n * n).map(|_| rng.random::<f64>()).collect();
        let m = SimilarityMatrix::new_dense(names("s", n), names("t", n), scores, ScoreDomain::Raw)
            .unwrap();
        let p = pairs(n);
        assert_eq!(rank(&m, &p).unwrap(), rank_oracle(&m, &p));
    }

    #[test]
    fn ranking_invariant_under_monotone_transform() {
        let mut rng = StdRng::seed_from_u64(5);
        let n = 10;
        let scores: Vec<f64> = (0..n * n).map(|_| rng.random::<f64>()).collect();
        let cubed: Vec<f64> = scores.iter().map(|&v| v * v * v).collect();
        let m1 =
            SimilarityMatrix::new_dense(names("s", n), names("t", n), scores, ScoreDomain::Raw)
                .unwrap();
        let m2 = SimilarityMatrix::new_dense(names("s", n), names("t", n), cubed, ScoreDomain::Raw)
            .unwrap();
        let p = pairs(n);
        assert_eq!(rank(&m1, &p).unwrap(), rank(&m2, &p).unwrap());
    }

    #[test]
    fn metric_arithmetic_on_known_ranks() {
        let ranks = [1usize, 1, 2, 20];
        assert_eq!(hits_at(&ranks, 1), 0.5);
        assert_eq!(hits_at(&ranks, 10), 0.75);
        assert_eq!(mrr(&ranks), (1.0 + 1.0 + 0.5 + 0.05) / 4.0);
        assert_eq!(mrr(&ranks), 0.6375);
    }

    #[test]
    fn all_rank_one_is_perfect() {
        let ranks = [1usize; 5];
        assert_eq!(hits_at(&ranks, 1), 1.0);
        assert_eq!(mrr(&ranks), 1.0);
    }

    #[test]
    fn single_rank_two_halves_mrr() {
        assert_eq!(mrr(&[2]), 0.5);
    }

    #[test]
    fn top1_fractions() {
        let gold: Vec<(String, String)> = (0..10)
            .map(|i| (format!("s{i}"), format!("t{i}")))
            .collect();
        let mut preds = gold.clone();
        for p in preds.iter_mut().take(3) {
            p.1 = "wrong".to_string();
        }
        assert_eq!(metrics_top1(&gold, &gold).unwrap(), 1.0);
        assert_eq!(metrics_top1(&preds, &gold).unwrap(), 0.7);
        let none: Vec<(String, String)> = gold
            .iter()
            .map(|(s, _)| (s.clone(), "x".to_string()))
            .collect();
        assert_eq!(metrics_top1(&none, &gold).unwrap(), 0.0);
    }

    #[test]
    fn missing_prediction_is_an_error() {
        let gold = vec![("a".to_string(), "b".to_string())];
        match metrics_top1(&[], &gold) {
            Err(Error::MissingPrediction { surface }) => assert_eq!(surface, "a"),
            other => panic!("expected missing prediction, got {other:?}"),
        }
    }
}
