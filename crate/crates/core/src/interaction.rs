//! Fusion of the encoder similarity matrix with the attribute
//! similarity matrix.
//!
//! Two interaction methods are provided. Result correction (RC) keeps
//! the encoder's top-1 predictions and replaces a row's prediction
//! whenever the attribute evidence for that row clears a confidence
//! threshold. Parameter search (PS) treats both matrices as belief
//! statements over the same pairs, pools each cell with the revision
//! rule for disjoint evidence bases, scores cells by belief
//! expectation, and grid-searches the two confidence parameters on the
//! validation split.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::eval;
use crate::matrix::{ScoreDomain, SimilarityMatrix};

/// Smallest confidence distance from the [0,1] boundary; the revision
/// rule is singular at confidence-1 premises.
pub const CONFIDENCE_EPSILON: f64 = 1e-6;

/// A statement qualified by frequency (proportion of positive
/// evidence) and confidence (how much evidence backs it), both in
/// [0,1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Belief {
    pub f: f64,
    pub c: f64,
}

impl Belief {
    /// Clamps both components into [0,1].
    pub fn new(f: f64, c: f64) -> Self {
        Belief {
            f: f.clamp(0.0, 1.0),
            c: c.clamp(0.0, 1.0),
        }
    }

    /// Pools this belief with another whose evidence base is disjoint:
    ///
    /// f = (f1 c1 (1-c2) + f2 c2 (1-c1)) / (c1 (1-c2) + c2 (1-c1))
    /// c = (c1 (1-c2) + c2 (1-c1)) / (c1 (1-c2) + c2 (1-c1) + (1-c1)(1-c2))
    ///
    /// A zero-confidence premise is inert and the other premise comes
    /// back unchanged. Both premises at confidence 0 (or both at 1)
    /// make the frequency quotient 0/0; those degenerate cases resolve
    /// to the premise-frequency mean.
    pub fn revise(self, other: Belief) -> Belief {
        self.revise_flagged(other).0
    }

    /// Like `revise`, also reporting whether the degenerate 0/0 rule
    /// fired.
    pub fn revise_flagged(self, other: Belief) -> (Belief, bool) {
        let (f1, c1) = (self.f, self.c);
        let (f2, c2) = (other.f, other.c);
        if c1 == 0.0 && c2 == 0.0 {
            return (
                Belief {
                    f: (f1 + f2) / 2.0,
                    c: 0.0,
                },
                true,
            );
        }
        if c1 == 1.0 && c2 == 1.0 {
            return (
                Belief {
                    f: (f1 + f2) / 2.0,
                    c: 1.0,
                },
                true,
            );
        }
        if c2 == 0.0 {
            return (self, false);
        }
        if c1 == 0.0 {
            return (other, false);
        }
        if c1 == 1.0 {
            return (self, false);
        }
        if c2 == 1.0 {
            return (other, false);
        }
        let w1 = c1 * (1.0 - c2);
        let w2 = c2 * (1.0 - c1);
        let f = (f1 * w1 + f2 * w2) / (w1 + w2);
        let c = (w1 + w2) / (w1 + w2 + (1.0 - c1) * (1.0 - c2));
        (Belief { f, c }, false)
    }

    /// Decision-ready scalar c (f - 1/2) + 1/2; 0.5 under total
    /// ignorance.
    pub fn expectation(self) -> f64 {
        self.c * (self.f - 0.5) + 0.5
    }
}

/// Confidence parameters of the PS interaction, clamped away from the
/// singular boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsConfig {
    pub c_ea: f64,
    pub c_at: f64,
}

impl PsConfig {
    pub fn new(c_ea: f64, c_at: f64) -> Self {
        let clamp = |c: f64| c.clamp(CONFIDENCE_EPSILON, 1.0 - CONFIDENCE_EPSILON);
        PsConfig {
            c_ea: clamp(c_ea),
            c_at: clamp(c_at),
        }
    }
}

/// Default confidence grid for the parameter search: 0.05 to 0.95 in
/// steps of 0.05.
pub fn default_grid() -> Vec<f64> {
    (1..20).map(|i| i as f64 * 0.05).collect()
}

fn check_frequency_domain(m: &SimilarityMatrix, which: &str) -> Result<()> {
    if m.domain() != ScoreDomain::FrequencyNormalized {
        return Err(Error::NotFrequencyNormalized {
            context: format!("{which} matrix is tagged raw"),
        });
    }
    Ok(())
}

/// Combines the dense encoder matrix with the sparse attribute matrix
/// cellwise: where attribute evidence exists the two beliefs are
/// revised and scored by expectation; absent cells fall back to the
/// encoder belief alone. Both inputs must be frequency-normalized and
/// share row/col orders.
pub fn ps_combine(
    s_ea: &SimilarityMatrix,
    s_at: &SimilarityMatrix,
    cfg: PsConfig,
) -> Result<SimilarityMatrix> {
    check_frequency_domain(s_ea, "encoder")?;
    check_frequency_domain(s_at, "attribute")?;
    if !s_ea.is_dense() {
        return Err(Error::NotFrequencyNormalized {
            context: "encoder matrix must be dense".into(),
        });
    }
    if s_ea.row_surfaces() != s_at.row_surfaces() || s_ea.col_surfaces() != s_at.col_surfaces() {
        return Err(Error::OrderMismatch {
            reason: format!(
                "encoder is {}x{}, attribute is {}x{}, or surfaces differ",
                s_ea.n_rows(),
                s_ea.n_cols(),
                s_at.n_rows(),
                s_at.n_cols()
            ),
        });
    }

    let n_cols = s_ea.n_cols();
    let mut scores = Vec::with_capacity(s_ea.n_rows() * n_cols);
    for row in 0..s_ea.n_rows() {
        for col in 0..n_cols {
            let ea = Belief::new(s_ea.get(row, col).unwrap(), cfg.c_ea);
            scores.push(ea.expectation());
        }
    }
    if let Some(entries) = s_at.sparse_entries() {
        for &(r, c, f_at) in entries {
            let ea = Belief::new(s_ea.get(r as usize, c as usize).unwrap(), cfg.c_ea);
            let at = Belief::new(f_at, cfg.c_at);
            scores[r as usize * n_cols + c as usize] = ea.revise(at).expectation();
        }
    } else {
        for row in 0..s_ea.n_rows() {
            for col in 0..n_cols {
                let ea = Belief::new(s_ea.get(row, col).unwrap(), cfg.c_ea);
                let at = Belief::new(s_at.get(row, col).unwrap(), cfg.c_at);
                scores[row * n_cols + col] = ea.revise(at).expectation();
            }
        }
    }
    SimilarityMatrix::new_dense(
        s_ea.row_surfaces().to_vec(),
        s_ea.col_surfaces().to_vec(),
        scores,
        ScoreDomain::FrequencyNormalized,
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub c_ea: f64,
    pub c_at: f64,
    pub hits1: f64,
}

#[derive(Debug, Clone)]
pub struct GridSearchResult {
    pub best: PsConfig,
    pub best_hits1: f64,
    /// Full validation surface in grid x grid order.
    pub surface: Vec<GridPoint>,
}

/// Evaluates validation Hits@1 for every (c_ea, c_at) in grid x grid
/// and returns the maximizer; ties prefer smaller c_at, then smaller
/// c_ea. The matrices are projected onto the validation pairs once, so
/// only the rows and columns that can affect Hits@1 are combined.
pub fn grid_search(
    s_ea: &SimilarityMatrix,
    s_at: &SimilarityMatrix,
    validation: &[(String, String)],
    grid: &[f64],
) -> Result<GridSearchResult> {
    if validation.is_empty() {
        return Err(Error::NoValidationPairs);
    }
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    for &g in grid {
        if !(g > 0.0 && g < 1.0) {
            return Err(Error::BadGridValue { value: g });
        }
    }
    check_frequency_domain(s_ea, "encoder")?;
    check_frequency_domain(s_at, "attribute")?;

    let mut val_rows: Vec<String> = Vec::new();
    let mut val_cols: Vec<String> = Vec::new();
    for (s, t) in validation {
        if s_ea.row_index(s).is_none() {
            return Err(Error::UnknownSurface { surface: s.clone() });
        }
        if !s_ea.col_surfaces().iter().any(|c| c == t) {
            return Err(Error::UnknownSurface { surface: t.clone() });
        }
        if !val_rows.contains(s) {
            val_rows.push(s.clone());
        }
        if !val_cols.contains(t) {
            val_cols.push(t.clone());
        }
    }
    let ea_v = s_ea.project_onto(&val_rows, &val_cols);
    let at_v = s_at.project_onto(&val_rows, &val_cols);

    let mut surface = Vec::with_capacity(grid.len() * grid.len());
    let mut best: Option<GridPoint> = None;
    for &c_ea in grid {
        for &c_at in grid {
            let combined = ps_combine(&ea_v, &at_v, PsConfig::new(c_ea, c_at))?;
            let ranks = eval::rank(&combined, validation)?;
            let hits1 = eval::hits_at(&ranks, 1);
            let point = GridPoint { c_ea, c_at, hits1 };
            surface.push(point);
            let better = match best {
                None => true,
                Some(b) => {
                    hits1 > b.hits1
                        || (hits1 == b.hits1
                            && (c_at < b.c_at || (c_at == b.c_at && c_ea < b.c_ea)))
                }
            };
            if better {
                best = Some(point);
            }
        }
    }
    let best = best.expect("grid is nonempty");
    Ok(GridSearchResult {
        best: PsConfig::new(best.c_ea, best.c_at),
        best_hits1: best.hits1,
        surface,
    })
}

/// RC thresholds: an attribute row overrides the encoder prediction
/// when its best score reaches `tau` and beats the second best by at
/// least `margin`.
#[derive(Debug, Clone, Copy)]
pub struct RcConfig {
    pub tau: f64,
    pub margin: f64,
}

impl RcConfig {
    pub fn new(tau: f64, margin: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&tau) {
            return Err(Error::Config {
                reason: format!("tau {tau} outside [0,1]"),
            });
        }
        if margin < 0.0 {
            return Err(Error::Config {
                reason: format!("margin {margin} negative"),
            });
        }
        Ok(RcConfig { tau, margin })
    }
}

/// One corrected top-1 prediction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RcPrediction {
    pub source: String,
    pub target: String,
    /// True when the attribute evidence replaced the encoder's answer.
    pub overridden: bool,
}

/// Applies result correction to per-source encoder predictions. Rows
/// without attribute evidence, and rows whose best attribute score
/// misses the threshold, keep the encoder prediction. The output is
/// top-1 only; RC produces no full ranking.
pub fn rc_combine(
    predictions: &[(String, String)],
    s_at: &SimilarityMatrix,
    cfg: &RcConfig,
) -> Vec<RcPrediction> {
    let row_of: HashMap<&str, usize> = s_at
        .row_surfaces()
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i))
        .collect();
    predictions
        .iter()
        .map(|(src, enc_tgt)| {
            let mut target = enc_tgt.clone();
            let mut overridden = false;
            if let Some(&row) = row_of.get(src.as_str()) {
                if let Some((best_col, best_score)) = s_at.row_argmax(row) {
                    let second = s_at
                        .sparse_row(row)
                        .iter()
                        .filter(|&&(_, c, _)| c as usize != best_col)
                        .map(|&(_, _, v)| v)
                        .fold(0.0_f64, f64::max);
                    if best_score >= cfg.tau && best_score - second >= cfg.margin {
                        target = s_at.col_surfaces()[best_col].clone();
                        overridden = true;
                    }
                }
            }
            RcPrediction {
                source: src.clone(),
                target,
                overridden,
            }
        })
        .collect()
}

/// Per-row argmax predictions of a matrix, as (source, target) pairs;
/// the encoder side of RC.
pub fn argmax_predictions(m: &SimilarityMatrix) -> Vec<(String, String)> {
    (0..m.n_rows())
        .map(|r| {
            let source = m.row_surfaces()[r].clone();
            let target = match m.row_argmax(r) {
                Some((c, _)) => m.col_surfaces()[c].clone(),
                None => String::new(),
            };
            (source, target)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    const TOL: f64 = 1e-12;

    #[test]
    fn equal_premises_keep_frequency_and_pool_confidence() {
        // Same-premise revision leaves f and maps c to 2c/(1+c);
        // verified against the closed form across a sweep.
        for f in [0.0, 0.3, 1.0] {
            for c in [0.1, 0.5, 0.9] {
                let b = Belief::new(f, c);
                let r = b.revise(b);
                assert!((r.f - f).abs() < TOL);
                assert!((r.c - 2.0 * c / (1.0 + c)).abs() < TOL);
            }
        }
        let r = Belief::new(0.7, 0.5).revise(Belief::new(0.7, 0.5));
        assert!((r.c - 2.0 / 3.0).abs() < TOL);
    }

    #[test]
    fn zero_confidence_premise_is_inert() {
        let b1 = Belief::new(0.37, 0.81);
        let r = b1.revise(Belief::new(0.99, 0.0));
        assert_eq!(r, b1);
        let r = Belief::new(0.99, 0.0).revise(b1);
        assert_eq!(r, b1);
    }

    #[test]
    fn double_zero_confidence_is_degenerate() {
        let (r, degenerate) = Belief::new(0.2, 0.0).revise_flagged(Belief::new(0.8, 0.0));
        assert!(degenerate);
        assert_eq!(r.f, 0.5);
        assert_eq!(r.c, 0.0);
    }

    #[test]
    fn revision_is_commutative() {
        let mut rng = StdRng::seed_from_u64(42);
        for _ in 0..500 {
            let b1 = Belief::new(rng.random(), rng.random());
            let b2 = Belief::new(rng.random(), rng.random());
            let a = b1.revise(b2);
            let b = b2.revise(b1);
            assert!((a.f - b.f).abs() < TOL);
            assert!((a.c - b.c).abs() < TOL);
        }
    }

    #[test]
    fn confidence_grows_and_frequency_stays_contained() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..500 {
            let b1 = Belief::new(rng.random(), rng.random_range(0.01..0.99));
            let b2 = Belief::new(rng.random(), rng.random_range(0.01..0.99));
            let r = b1.revise(b2);
            assert!(r.c >= b1.c.max(b2.c) - TOL);
            assert!(r.f >= b1.f.min(b2.f) - TOL);
            assert!(r.f <= b1.f.max(b2.f) + TOL);
            assert!((0.0..=1.0).contains(&r.f));
            assert!((0.0..=1.0).contains(&r.c));
        }
    }

    #[test]
    fn expectation_substitutions() {
        assert_eq!(Belief::new(1.0, 1.0).expectation(), 1.0);
        assert_eq!(Belief::new(0.12, 0.0).expectation(), 0.5);
        assert_eq!(Belief::new(0.0, 1.0).expectation(), 0.0);
    }

    fn freq_dense(rows: usize, cols: usize, scores: Vec<f64>) -> SimilarityMatrix {
        SimilarityMatrix::new_dense(
            (0..rows).map(|i| format!("s{i}")).collect(),
            (0..cols).map(|i| format!("t{i}")).collect(),
            scores,
            ScoreDomain::FrequencyNormalized,
        )
        .unwrap()
    }

    fn freq_sparse(rows: usize, cols: usize, entries: Vec<(u32, u32, f64)>) -> SimilarityMatrix {
        SimilarityMatrix::new_sparse(
            (0..rows).map(|i| format!("s{i}")).collect(),
            (0..cols).map(|i| format!("t{i}")).collect(),
            entries,
            ScoreDomain::FrequencyNormalized,
        )
        .unwrap()
    }

    /// Scalar reference path: revision formula plus expectation written
    /// straight from the definitions, no Belief type involved.
    fn scalar_reference(f1: f64, c1: f64, f2: f64, c2: f64) -> f64 {
        let num_f = f1 * c1 * (1.0 - c2) + f2 * c2 * (1.0 - c1);
        let den_f = c1 * (1.0 - c2) + c2 * (1.0 - c1);
        let f = num_f / den_f;
        let den_c = c1 * (1.0 - c2) + c2 * (1.0 - c1) + (1.0 - c1) * (1.0 - c2);
        let c = (c1 * (1.0 - c2) + c2 * (1.0 - c1)) / den_c;
        c * (f - 0.5) + 0.5
    }

    #[test]
    fn ps_cell_matches_scalar_reference() {
        let cfg = PsConfig::new(0.5, 0.9);
        let ea = freq_dense(1, 1, vec![0.1]);
        let at = freq_sparse(1, 1, vec![(0, 0, 1.0)]);
        let combined = ps_combine(&ea, &at, cfg).unwrap();
        let expected = scalar_reference(0.1, 0.5, 1.0, 0.9);
        assert!((combined.get(0, 0).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn inert_attribute_preserves_encoder_ranking() {
        let mut rng = StdRng::seed_from_u64(3);
        let (n, m) = (6, 6);
        let ea = freq_dense(n, m, (0..n * m).map(|_| rng.random()).collect());
        let at = freq_sparse(
            n,
            m,
            (0..n as u32)
                .map(|i| (i, (i + 1) % m as u32, rng.random()))
                .collect(),
        );
        let combined = ps_combine(&ea, &at, PsConfig::new(0.5, 0.0)).unwrap();
        for r in 0..n {
            assert_eq!(
                combined.row_argmax(r).unwrap().0,
                ea.row_argmax(r).unwrap().0,
                "row {r}"
            );
        }
    }

    #[test]
    fn empty_attribute_matrix_gives_encoder_expectations() {
        let ea = freq_dense(2, 2, vec![0.2, 0.8, 0.6, 0.4]);
        let at = freq_sparse(2, 2, vec![]);
        let cfg = PsConfig::new(0.7, 0.7);
        let combined = ps_combine(&ea, &at, cfg).unwrap();
        for r in 0..2 {
            for c in 0..2 {
                let expected = Belief::new(ea.get(r, c).unwrap(), cfg.c_ea).expectation();
                assert_eq!(combined.get(r, c), Some(expected));
            }
        }
    }

    #[test]
    fn order_mismatch_rejected() {
        let ea = freq_dense(2, 2, vec![0.0; 4]);
        let at = freq_sparse(2, 3, vec![]);
        match ps_combine(&ea, &at, PsConfig::new(0.5, 0.5)) {
            Err(Error::OrderMismatch { .. }) => {}
            other => panic!("expected order mismatch, got {other:?}"),
        }
    }

    #[test]
    fn raw_domain_rejected() {
        let ea = SimilarityMatrix::new_dense(
            vec!["s0".into()],
            vec!["t0".into()],
            vec![2.0],
            ScoreDomain::Raw,
        )
        .unwrap();
        let at = freq_sparse(1, 1, vec![]);
        match ps_combine(&ea, &at, PsConfig::new(0.5, 0.5)) {
            Err(Error::NotFrequencyNormalized { .. }) => {}
            other => panic!("expected domain error, got {other:?}"),
        }
    }

    fn diag_pairs(n: usize) -> Vec<(String, String)> {
        (0..n).map(|i| (format!("s{i}"), format!("t{i}"))).collect()
    }

    #[test]
    fn singleton_grid_returns_it() {
        let ea = freq_dense(2, 2, vec![1.0, 0.0, 0.0, 1.0]);
        let at = freq_sparse(2, 2, vec![]);
        let res = grid_search(&ea, &at, &diag_pairs(2), &[0.5]).unwrap();
        assert_eq!(res.best, PsConfig::new(0.5, 0.5));
        assert_eq!(res.surface.len(), 1);
    }

    #[test]
    fn perfect_attribute_evidence_pushes_c_at_high() {
        // Ten-entity fixture checked exhaustively over the grid. Five
        // rows are encoder rows (gold on top, no attribute evidence);
        // five rows have the encoder fully backing a wrong column
        // while perfect attribute evidence (1.0 vs 0.95 noise) marks
        // the gold one. Only high attribute confidence over low
        // encoder confidence recovers those rows, so the unique
        // maximizer has the largest c_at in the grid.
        let n = 10;
        let mut ea_scores = vec![0.0; n * n];
        let mut at_entries = Vec::new();
        for r in 0..n {
            if r < 5 {
                ea_scores[r * n + r] = 1.0;
            } else {
                let noise = (r + 1) % n;
                ea_scores[r * n + noise] = 1.0;
                at_entries.push((r as u32, r as u32, 1.0));
                at_entries.push((r as u32, noise as u32, 0.95));
            }
        }
        let ea = freq_dense(n, n, ea_scores);
        let at = freq_sparse(n, n, at_entries);
        let grid = [0.1, 0.5, 0.9];
        let res = grid_search(&ea, &at, &diag_pairs(n), &grid).unwrap();
        assert_eq!(res.best.c_at, 0.9);
        assert_eq!(res.best.c_ea, 0.1);
        assert_eq!(res.best_hits1, 1.0);
        for p in &res.surface {
            if (p.c_ea, p.c_at) != (0.1, 0.9) {
                assert!(
                    p.hits1 < 1.0,
                    "({}, {}) unexpectedly perfect",
                    p.c_ea,
                    p.c_at
                );
            }
        }
    }

    #[test]
    fn best_equals_surface_max() {
        let mut rng = StdRng::seed_from_u64(8);
        let n = 5;
        let ea = freq_dense(n, n, (0..n * n).map(|_| rng.random()).collect());
        let at = freq_sparse(n, n, (0..n as u32).map(|i| (i, i, rng.random())).collect());
        let res = grid_search(&ea, &at, &diag_pairs(n), &[0.2, 0.4, 0.6, 0.8]).unwrap();
        let max = res
            .surface
            .iter()
            .map(|p| p.hits1)
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(res.best_hits1, max);
    }

    #[test]
    fn grid_ties_prefer_smaller_c_at_then_smaller_c_ea() {
        // Identity encoder and no attribute evidence: every grid point
        // scores hits@1 = 1.0, so the tie rule alone picks the winner.
        let ea = freq_dense(2, 2, vec![1.0, 0.0, 0.0, 1.0]);
        let at = freq_sparse(2, 2, vec![]);
        let res = grid_search(&ea, &at, &diag_pairs(2), &[0.9, 0.3]).unwrap();
        assert_eq!(res.best, PsConfig::new(0.3, 0.3));
        assert!(res.surface.iter().all(|p| p.hits1 == 1.0));
    }

    #[test]
    fn empty_grid_rejected() {
        let ea = freq_dense(1, 1, vec![1.0]);
        let at = freq_sparse(1, 1, vec![]);
        match grid_search(&ea, &at, &diag_pairs(1), &[]) {
            Err(Error::EmptyGrid) => {}
            other => panic!("expected empty grid error, got {other:?}"),
        }
    }

    fn rc_fixture() -> (Vec<(String, String)>, SimilarityMatrix) {
        // Encoder predicts t0 for every source; attribute rows carry
        // varying strength.
        let preds: Vec<(String, String)> = (0..6)
            .map(|i| (format!("s{i}"), "t0".to_string()))
            .collect();
        let at = freq_sparse(
            6,
            6,
            vec![
                (0, 1, 1.0),  // unique-value row, overrides at any tau <= 1
                (1, 2, 0.95), // overrides at tau <= 0.95
                (2, 3, 0.5),  // below tau 0.9
                (3, 4, 0.92),
                (3, 5, 0.91), // margin 0.05 would block this row
                              // rows 4, 5 have no attribute evidence
            ],
        );
        (preds, at)
    }

    #[test]
    fn unreachable_tau_changes_nothing() {
        let (preds, at) = rc_fixture();
        let out = rc_combine(&preds, &at, &RcConfig::new(1.0, 0.0).unwrap());
        // tau = 1.0 is reachable only by the exact-1.0 row.
        assert!(out[0].overridden);
        for p in &out[1..] {
            assert!(!p.overridden);
            assert_eq!(p.target, "t0");
        }
        // Strictly unreachable threshold via margin above any gap.
        let out = rc_combine(&preds, &at, &RcConfig::new(1.0, 2.0).unwrap());
        assert!(out.iter().all(|p| !p.overridden));
    }

    #[test]
    fn zero_tau_overrides_every_evidenced_row() {
        let (preds, at) = rc_fixture();
        let out = rc_combine(&preds, &at, &RcConfig::new(0.0, 0.0).unwrap());
        assert_eq!(out[0].target, "t1");
        assert_eq!(out[1].target, "t2");
        assert_eq!(out[2].target, "t3");
        assert_eq!(out[3].target, "t4");
        assert!(!out[4].overridden);
        assert!(!out[5].overridden);
    }

    #[test]
    fn tau_point_nine_matches_hand_enumeration() {
        // By hand: best scores per row are 1.0, 0.95, 0.5, 0.92, none,
        // none; rows 0, 1, 3 clear tau = 0.9.
        let (preds, at) = rc_fixture();
        let out = rc_combine(&preds, &at, &RcConfig::new(0.9, 0.0).unwrap());
        let flags: Vec<bool> = out.iter().map(|p| p.overridden).collect();
        assert_eq!(flags, vec![true, true, false, true, false, false]);
        assert_eq!(out[3].target, "t4");
    }

    #[test]
    fn margin_blocks_close_seconds() {
        let (preds, at) = rc_fixture();
        let out = rc_combine(&preds, &at, &RcConfig::new(0.9, 0.05).unwrap());
        let flags: Vec<bool> = out.iter().map(|p| p.overridden).collect();
        // Row 3's gap is 0.92 - 0.91 = 0.01 < 0.05.
        assert_eq!(flags, vec![true, true, false, false, false, false]);
    }
}
