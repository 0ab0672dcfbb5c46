//! Attribute-value uniqueness scoring: a value occurring k times in a
//! graph carries frequency 1/k, and a value occurring exactly once is a
//! crucial distinguishing value — two entities sharing it should align.
//!
//! Entity pairs are scored over the normalized values they share, with
//! no attribute pre-alignment and no training data: attribute names are
//! ignored, only value equality matters. Pair generation goes through
//! an inverted index (value -> bearing entities), never an all-pairs
//! scan.

use std::collections::HashMap;

use unicode_normalization::UnicodeNormalization;

use crate::error::Result;
use crate::kg::{AttributeId, EntityId, KnowledgeGraph};
use crate::matrix::{ScoreDomain, SimilarityMatrix};

/// Value canonicalization switches. Defaults: NFC, trim, lowercase,
/// collapse internal whitespace; tag stripping off (datatype and
/// language tags are preserved unless asked for).
#[derive(Debug, Clone, Copy)]
pub struct NormalizeOptions {
    pub nfc: bool,
    pub trim: bool,
    pub lowercase: bool,
    pub collapse_whitespace: bool,
    pub strip_datatype: bool,
    pub strip_lang: bool,
}

impl Default for NormalizeOptions {
    fn default() -> Self {
        NormalizeOptions {
            nfc: true,
            trim: true,
            lowercase: true,
            collapse_whitespace: true,
            strip_datatype: false,
            strip_lang: false,
        }
    }
}

/// Deterministic canonical form of a raw attribute value.
pub fn normalize_value(raw: &str, opts: &NormalizeOptions) -> String {
    let mut s: String = if opts.nfc {
        raw.nfc().collect()
    } else {
        raw.to_owned()
    };
    if opts.trim {
        s = s.trim().to_owned();
    }
    if opts.lowercase {
        s = s.to_lowercase();
    }
    if opts.collapse_whitespace {
        s = s.split_whitespace().collect::<Vec<_>>().join(" ");
    }
    if opts.strip_datatype {
        if let Some(pos) = s.rfind("^^") {
            s.truncate(pos);
        }
    }
    if opts.strip_lang {
        if let Some(pos) = s.rfind('@') {
            let tag = &s[pos + 1..];
            let plausible = !tag.is_empty()
                && tag.len() <= 8
                && tag.chars().all(|c| c.is_ascii_alphanumeric() || c == '-');
            if plausible {
                s.truncate(pos);
            }
        }
    }
    if opts.strip_datatype || opts.strip_lang {
        // Tagged literals are usually quoted; drop one matching pair.
        if s.len() >= 2 && s.starts_with('"') && s.ends_with('"') {
            s = s[1..s.len() - 1].to_owned();
        }
    }
    s
}

/// Identifier of a normalized value within one index.
pub type NormId = u32;

/// Per-graph occurrence statistics and inverted index over normalized
/// attribute values. Occurrences are counted per triple, so an entity
/// repeating a value under two attributes contributes twice to k.
#[derive(Debug, Clone)]
pub struct ValueFrequencyIndex {
    norm_surfaces: Vec<String>,
    norm_index: HashMap<String, NormId>,
    norm_of_value: Vec<NormId>,
    counts: Vec<u32>,
    postings: Vec<Vec<(EntityId, AttributeId)>>,
    entities_by_norm: Vec<Vec<EntityId>>,
    values_by_entity: Vec<Vec<NormId>>,
}

impl ValueFrequencyIndex {
    pub fn norm_len(&self) -> usize {
        self.norm_surfaces.len()
    }

    pub fn norm_surface(&self, n: NormId) -> &str {
        &self.norm_surfaces[n as usize]
    }

    pub fn norm_id(&self, normalized: &str) -> Option<NormId> {
        self.norm_index.get(normalized).copied()
    }

    /// Normalized form of a raw vocabulary value.
    pub fn norm_of(&self, v: crate::kg::ValueId) -> NormId {
        self.norm_of_value[v.index()]
    }

    /// Occurrence count of a raw value's normalized form.
    pub fn k_of_value(&self, v: crate::kg::ValueId) -> u32 {
        self.counts[self.norm_of(v) as usize]
    }

    /// Occurrence count k of a normalized value.
    pub fn k(&self, n: NormId) -> u32 {
        self.counts[n as usize]
    }

    /// Value frequency 1/k, in (0, 1].
    pub fn v_fre(&self, n: NormId) -> f64 {
        1.0 / f64::from(self.counts[n as usize])
    }

    /// A value occurring exactly once distinguishes its entity.
    pub fn is_crucial(&self, n: NormId) -> bool {
        self.counts[n as usize] == 1
    }

    pub fn postings(&self, n: NormId) -> &[(EntityId, AttributeId)] {
        &self.postings[n as usize]
    }

    /// Entities bearing the value, sorted, deduplicated.
    pub fn entities(&self, n: NormId) -> &[EntityId] {
        &self.entities_by_norm[n as usize]
    }

    /// Normalized values of one entity, sorted by NormId.
    pub fn entity_values(&self, e: EntityId) -> &[NormId] {
        self.values_by_entity
            .get(e.index())
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    fn entity_has(&self, e: EntityId, n: NormId) -> bool {
        self.entity_values(e).binary_search(&n).is_ok()
    }

    /// Total postings; equals the attribute-triple count of the graph.
    pub fn posting_count(&self) -> usize {
        self.postings.iter().map(Vec::len).sum()
    }
}

/// Builds the occurrence index for one graph. k counts occurrences of
/// the normalized value over that graph's attribute triples.
pub fn build_index(kg: &KnowledgeGraph, opts: &NormalizeOptions) -> ValueFrequencyIndex {
    let mut norm_surfaces: Vec<String> = Vec::new();
    let mut norm_index: HashMap<String, NormId> = HashMap::new();
    let mut norm_of_value = Vec::with_capacity(kg.values.len());
    for raw in kg.values.surfaces() {
        let normalized = normalize_value(raw, opts);
        let id = *norm_index.entry(normalized.clone()).or_insert_with(|| {
            norm_surfaces.push(normalized);
            (norm_surfaces.len() - 1) as NormId
        });
        norm_of_value.push(id);
    }

    let n = norm_surfaces.len();
    let mut counts = vec![0u32; n];
    let mut postings = vec![Vec::new(); n];
    let mut values_by_entity = vec![Vec::new(); kg.entities.len()];
    for &(e, a, v) in kg.attr_triples() {
        let norm = norm_of_value[v.index()];
        counts[norm as usize] += 1;
        postings[norm as usize].push((e, a));
        values_by_entity[e.index()].push(norm);
    }
    let mut entities_by_norm: Vec<Vec<EntityId>> = postings
        .iter()
        .map(|p| {
            let mut ents: Vec<EntityId> = p.iter().map(|&(e, _)| e).collect();
            ents.sort_unstable();
            ents.dedup();
            ents
        })
        .collect();
    for v in &mut values_by_entity {
        v.sort_unstable();
        v.dedup();
    }
    entities_by_norm.shrink_to_fit();

    ValueFrequencyIndex {
        norm_surfaces,
        norm_index,
        norm_of_value,
        counts,
        postings,
        entities_by_norm,
        values_by_entity,
    }
}

/// How the scalar per-value evidences turn into a pair score.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScoreMode {
    /// Plain sum of per-value evidence; can exceed 1.
    Sum,
    /// Independent-evidence union 1 - prod(1 - p); stays in [0,1].
    NoisyOr,
    /// Sum clamped to 1.
    SumClamped,
}

impl ScoreMode {
    pub fn domain(self) -> ScoreDomain {
        match self {
            ScoreMode::Sum => ScoreDomain::Raw,
            ScoreMode::NoisyOr | ScoreMode::SumClamped => ScoreDomain::FrequencyNormalized,
        }
    }
}

/// How the two per-graph frequencies of one shared value combine into
/// per-value evidence p.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Combiner {
    /// p = v_fre1 * v_fre2: the chance both occurrences pick out the
    /// aligned pair.
    Product,
    /// p = min(v_fre1, v_fre2), for ablation.
    Min,
}

#[derive(Debug, Clone, Copy)]
pub struct AttrSimConfig {
    pub mode: ScoreMode,
    pub combiner: Combiner,
    /// Values with v_fre below this on either side are skipped.
    /// Performance knob, off by default.
    pub min_vfre: Option<f64>,
}

impl Default for AttrSimConfig {
    fn default() -> Self {
        AttrSimConfig {
            mode: ScoreMode::NoisyOr,
            combiner: Combiner::Product,
            min_vfre: None,
        }
    }
}

impl AttrSimConfig {
    fn evidence(&self, f1: f64, f2: f64) -> Option<f64> {
        if let Some(floor) = self.min_vfre {
            if f1 < floor || f2 < floor {
                return None;
            }
        }
        Some(match self.combiner {
            Combiner::Product => f1 * f2,
            Combiner::Min => f1.min(f2),
        })
    }
}

/// Accumulates per-value evidence in a mode-appropriate way; insertion
/// order is ascending first-graph NormId everywhere, so index-join and
/// all-pairs computations agree bit for bit.
#[derive(Clone, Copy)]
struct Accumulator {
    sum: f64,
    complement: f64,
}

impl Accumulator {
    fn new() -> Self {
        Accumulator {
            sum: 0.0,
            complement: 1.0,
        }
    }

    fn add(&mut self, p: f64) {
        self.sum += p;
        self.complement *= 1.0 - p;
    }

    fn finish(self, mode: ScoreMode) -> f64 {
        match mode {
            ScoreMode::Sum => self.sum,
            ScoreMode::NoisyOr => 1.0 - self.complement,
            ScoreMode::SumClamped => self.sum.min(1.0),
        }
    }
}

/// Scores one entity pair over the normalized values both entities
/// bear. Entities with no attribute triples score 0.
pub fn pair_score(
    idx1: &ValueFrequencyIndex,
    idx2: &ValueFrequencyIndex,
    e1: EntityId,
    e2: EntityId,
    cfg: &AttrSimConfig,
) -> f64 {
    let mut acc = Accumulator::new();
    for &n1 in idx1.entity_values(e1) {
        let Some(n2) = idx2.norm_id(idx1.norm_surface(n1)) else {
            continue;
        };
        if !idx2.entity_has(e2, n2) {
            continue;
        }
        if let Some(p) = cfg.evidence(idx1.v_fre(n1), idx2.v_fre(n2)) {
            acc.add(p);
        }
    }
    acc.finish(cfg.mode)
}

/// Builds the sparse attribute similarity matrix for the given row and
/// column entities via the inverted-index join. Cells appear only for
/// pairs sharing at least one surviving normalized value; absence means
/// no evidence.
pub fn build_attr_matrix(
    kg1: &KnowledgeGraph,
    kg2: &KnowledgeGraph,
    idx1: &ValueFrequencyIndex,
    idx2: &ValueFrequencyIndex,
    rows: &[EntityId],
    cols: &[EntityId],
    cfg: &AttrSimConfig,
) -> Result<SimilarityMatrix> {
    let row_pos: HashMap<EntityId, u32> = rows
        .iter()
        .enumerate()
        .map(|(i, &e)| (e, i as u32))
        .collect();
    let col_pos: HashMap<EntityId, u32> = cols
        .iter()
        .enumerate()
        .map(|(i, &e)| (e, i as u32))
        .collect();

    let mut acc: HashMap<(u32, u32), Accumulator> = HashMap::new();
    for n1 in 0..idx1.norm_len() as NormId {
        let Some(n2) = idx2.norm_id(idx1.norm_surface(n1)) else {
            continue;
        };
        let Some(p) = cfg.evidence(idx1.v_fre(n1), idx2.v_fre(n2)) else {
            continue;
        };
        for e1 in idx1.entities(n1) {
            let Some(&r) = row_pos.get(e1) else { continue };
            for e2 in idx2.entities(n2) {
                let Some(&c) = col_pos.get(e2) else { continue };
                acc.entry((r, c)).or_insert_with(Accumulator::new).add(p);
            }
        }
    }

    let entries: Vec<(u32, u32, f64)> = acc
        .into_iter()
        .map(|((r, c), a)| (r, c, a.finish(cfg.mode)))
        .collect();
    let row_surfaces = rows
        .iter()
        .map(|&e| kg1.entity_surface(e).to_owned())
        .collect();
    let col_surfaces = cols
        .iter()
        .map(|&e| kg2.entity_surface(e).to_owned())
        .collect();
    SimilarityMatrix::new_sparse(row_surfaces, col_surfaces, entries, cfg.mode.domain())
}

/// All entities of a graph in interning order; the default row/col set.
pub fn all_entities(kg: &KnowledgeGraph) -> Vec<EntityId> {
    (0..kg.entities.len() as u32).map(EntityId).collect()
}
