//! Coverage rate of aligned entity pairs and the coverage-reducing
//! transformation that manufactures heterogeneous benchmark variants.
//!
//! The coverage of a pair is |shared neighbors| / min(|N1|, |N2|).
//! Neighbor identity across the two graphs is established through the
//! gold alignment: a source neighbor counts as shared iff the gold
//! links map it to a neighbor of the target entity. Self-loops are
//! excluded from neighbor sets. Pairs where either side has no
//! neighbors score 0 and are flagged degenerate.

use std::collections::{BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::kg::{EntityId, KnowledgeGraph};

/// One-to-one gold alignment viewed as a source-to-target map.
#[derive(Debug, Clone, Default)]
pub struct GoldLinks {
    forward: HashMap<EntityId, EntityId>,
}

impl GoldLinks {
    pub fn new(pairs: &[(EntityId, EntityId)]) -> Self {
        GoldLinks {
            forward: pairs.iter().copied().collect(),
        }
    }

    pub fn target_of(&self, source: EntityId) -> Option<EntityId> {
        self.forward.get(&source).copied()
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }
}

/// Entities adjacent to `e` through a relation triple in either
/// direction, excluding `e` itself.
pub fn neighbor_set(kg: &KnowledgeGraph, e: EntityId) -> Result<BTreeSet<EntityId>> {
    if !kg.contains_entity(e) {
        return Err(Error::UnknownEntity {
            index: e.0,
            count: kg.entities.len(),
        });
    }
    let mut out = BTreeSet::new();
    for &(h, _, t) in kg.rel_triples() {
        if h == e && t != e {
            out.insert(t);
        }
        if t == e && h != e {
            out.insert(h);
        }
    }
    Ok(out)
}

/// Coverage value with the degenerate-input marker for pairs where a
/// neighbor set was empty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageValue {
    pub value: f64,
    pub degenerate: bool,
}

fn coverage_of_sets(
    n1: &BTreeSet<EntityId>,
    n2: &BTreeSet<EntityId>,
    links: &GoldLinks,
) -> CoverageValue {
    if n1.is_empty() || n2.is_empty() {
        return CoverageValue {
            value: 0.0,
            degenerate: true,
        };
    }
    let shared = n1
        .iter()
        .filter(|&&n| links.target_of(n).is_some_and(|m| n2.contains(&m)))
        .count();
    CoverageValue {
        value: shared as f64 / n1.len().min(n2.len()) as f64,
        degenerate: false,
    }
}

/// Coverage rate of one gold pair.
pub fn coverage(
    kg1: &KnowledgeGraph,
    kg2: &KnowledgeGraph,
    pair: (EntityId, EntityId),
    links: &GoldLinks,
) -> Result<CoverageValue> {
    let n1 = neighbor_set(kg1, pair.0)?;
    let n2 = neighbor_set(kg2, pair.1)?;
    Ok(coverage_of_sets(&n1, &n2, links))
}

pub const HISTOGRAM_BUCKETS: usize = 10;

/// Per-pair coverage plus decile histogram over [0,10%), ..., [90,100%].
#[derive(Debug, Clone)]
pub struct CoverageProfile {
    pub pairs: Vec<PairCoverage>,
    pub histogram: [usize; HISTOGRAM_BUCKETS],
}

#[derive(Debug, Clone)]
pub struct PairCoverage {
    pub source: EntityId,
    pub target: EntityId,
    pub coverage: f64,
    pub degenerate: bool,
}

impl CoverageProfile {
    /// Bucket shares in percent; all zero when no pairs were scored.
    pub fn percentages(&self) -> [f64; HISTOGRAM_BUCKETS] {
        let total: usize = self.histogram.iter().sum();
        let mut out = [0.0; HISTOGRAM_BUCKETS];
        if total == 0 {
            return out;
        }
        for (o, &c) in out.iter_mut().zip(&self.histogram) {
            *o = c as f64 / total as f64 * 100.0;
        }
        out
    }
}

pub fn bucket_of(coverage: f64) -> usize {
    ((coverage * HISTOGRAM_BUCKETS as f64) as usize).min(HISTOGRAM_BUCKETS - 1)
}

/// Scores every gold pair and bins the results into deciles.
pub fn profile(
    kg1: &KnowledgeGraph,
    kg2: &KnowledgeGraph,
    pairs: &[(EntityId, EntityId)],
) -> Result<CoverageProfile> {
    let links = GoldLinks::new(pairs);
    let adj1 = Adjacency::new(kg1);
    let adj2 = Adjacency::new(kg2);
    let mut out = Vec::with_capacity(pairs.len());
    let mut histogram = [0usize; HISTOGRAM_BUCKETS];
    for &(s, t) in pairs {
        if !kg1.contains_entity(s) {
            return Err(Error::UnknownEntity {
                index: s.0,
                count: kg1.entities.len(),
            });
        }
        if !kg2.contains_entity(t) {
            return Err(Error::UnknownEntity {
                index: t.0,
                count: kg2.entities.len(),
            });
        }
        let cv = coverage_of_adj(&adj1, &adj2, (s, t), &links);
        histogram[bucket_of(cv.value)] += 1;
        out.push(PairCoverage {
            source: s,
            target: t,
            coverage: cv.value,
            degenerate: cv.degenerate,
        });
    }
    Ok(CoverageProfile {
        pairs: out,
        histogram,
    })
}

fn coverage_of_adj(
    adj1: &Adjacency,
    adj2: &Adjacency,
    pair: (EntityId, EntityId),
    links: &GoldLinks,
) -> CoverageValue {
    let n1 = adj1.neighbors(pair.0);
    let n2 = adj2.neighbors(pair.1);
    if n1.is_empty() || n2.is_empty() {
        return CoverageValue {
            value: 0.0,
            degenerate: true,
        };
    }
    let shared = n1
        .keys()
        .filter(|&&n| {
            links
                .target_of(EntityId(n))
                .is_some_and(|m| n2.contains_key(&m.0))
        })
        .count();
    CoverageValue {
        value: shared as f64 / n1.len().min(n2.len()) as f64,
        degenerate: false,
    }
}

/// Neighbor multiplicity index over relation triples, self-loops
/// excluded from adjacency but counted in degrees.
struct Adjacency {
    adj: Vec<HashMap<u32, u32>>,
}

impl Adjacency {
    fn new(kg: &KnowledgeGraph) -> Self {
        let mut adj = vec![HashMap::new(); kg.entities.len()];
        for &(h, _, t) in kg.rel_triples() {
            if h != t {
                *adj[h.index()].entry(t.0).or_insert(0) += 1;
                *adj[t.index()].entry(h.0).or_insert(0) += 1;
            }
        }
        Adjacency { adj }
    }

    fn neighbors(&self, e: EntityId) -> &HashMap<u32, u32> {
        &self.adj[e.index()]
    }
}

/// Parameters of the coverage-reducing transformation.
#[derive(Debug, Clone, Copy)]
pub struct HeterogenizeConfig {
    /// Pairs above this coverage get relation triples removed.
    pub target_max_coverage: f64,
    /// No entity's relation degree may drop below this floor.
    pub min_degree: u32,
    pub seed: u64,
    /// Alternate removals between the graphs instead of always taking
    /// from the currently larger one.
    pub alternate_sides: bool,
}

impl HeterogenizeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.target_max_coverage) {
            return Err(Error::Config {
                reason: format!("target coverage {} outside [0,1]", self.target_max_coverage),
            });
        }
        if self.min_degree < 1 {
            return Err(Error::Config {
                reason: "min degree must be at least 1".into(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct RemovalRecord {
    pub graph: u8,
    pub head: String,
    pub relation: String,
    pub tail: String,
}

#[derive(Debug, Clone)]
pub struct UnreachedPair {
    pub source: String,
    pub target: String,
    pub coverage: f64,
}

#[derive(Debug)]
pub struct HeterogenizeOutcome {
    pub kg1: KnowledgeGraph,
    pub kg2: KnowledgeGraph,
    pub removals: Vec<RemovalRecord>,
    pub unreached: Vec<UnreachedPair>,
}

/// A relation triple as raw vocabulary indices (head, rel, tail).
type RawTriple = (u32, u32, u32);

/// Mutable relation-triple store used during removal.
struct WorkingGraph {
    adj: Vec<HashMap<u32, u32>>,
    degree: Vec<u32>,
    between: HashMap<(u32, u32), Vec<RawTriple>>,
    live: BTreeSet<RawTriple>,
    n_triples: usize,
}

impl WorkingGraph {
    fn new(kg: &KnowledgeGraph) -> Self {
        let mut adj = vec![HashMap::new(); kg.entities.len()];
        let mut degree = vec![0u32; kg.entities.len()];
        let mut between: HashMap<(u32, u32), Vec<RawTriple>> = HashMap::new();
        let mut live = BTreeSet::new();
        for &(h, r, t) in kg.rel_triples() {
            degree[h.index()] += 1;
            if t != h {
                degree[t.index()] += 1;
                *adj[h.index()].entry(t.0).or_insert(0) += 1;
                *adj[t.index()].entry(h.0).or_insert(0) += 1;
            }
            let key = (h.0.min(t.0), h.0.max(t.0));
            between.entry(key).or_default().push((h.0, r.0, t.0));
            live.insert((h.0, r.0, t.0));
        }
        let n_triples = live.len();
        WorkingGraph {
            adj,
            degree,
            between,
            live,
            n_triples,
        }
    }

    fn candidates(&self, a: u32, b: u32) -> Vec<RawTriple> {
        self.between
            .get(&(a.min(b), a.max(b)))
            .cloned()
            .unwrap_or_default()
    }

    fn can_remove(&self, triple: RawTriple, min_degree: u32) -> bool {
        let (h, _, t) = triple;
        if self.degree[h as usize] <= min_degree {
            return false;
        }
        t == h || self.degree[t as usize] > min_degree
    }

    fn remove(&mut self, triple: RawTriple) {
        let (h, _, t) = triple;
        assert!(self.live.remove(&triple), "removing dead triple");
        self.n_triples -= 1;
        self.degree[h as usize] -= 1;
        if t != h {
            self.degree[t as usize] -= 1;
            for (x, y) in [(h, t), (t, h)] {
                let m = self.adj[x as usize].get_mut(&y).unwrap();
                *m -= 1;
                if *m == 0 {
                    self.adj[x as usize].remove(&y);
                }
            }
        }
        let key = (h.min(t), h.max(t));
        let v = self.between.get_mut(&key).unwrap();
        v.retain(|&tr| tr != triple);
        if v.is_empty() {
            self.between.remove(&key);
        }
    }
}

/// Lowers per-pair coverage by removing relation triples incident to
/// shared aligned neighbors until each gold pair sits at or below the
/// target, subject to the degree floor. Deterministic for a fixed
/// seed; pairs that cannot reach the target end up in `unreached`.
pub fn heterogenize(
    kg1: &KnowledgeGraph,
    kg2: &KnowledgeGraph,
    pairs: &[(EntityId, EntityId)],
    cfg: &HeterogenizeConfig,
) -> Result<HeterogenizeOutcome> {
    cfg.validate()?;
    let links = GoldLinks::new(pairs);
    let mut g1 = WorkingGraph::new(kg1);
    let mut g2 = WorkingGraph::new(kg2);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut removals = Vec::new();
    let mut unreached = Vec::new();

    for &(e1, e2) in pairs {
        if !kg1.contains_entity(e1) {
            return Err(Error::UnknownEntity {
                index: e1.0,
                count: kg1.entities.len(),
            });
        }
        if !kg2.contains_entity(e2) {
            return Err(Error::UnknownEntity {
                index: e2.0,
                count: kg2.entities.len(),
            });
        }
        // When alternating, start on the currently larger side.
        let mut next_side = if g1.n_triples >= g2.n_triples {
            1u8
        } else {
            2u8
        };
        loop {
            let n1 = &g1.adj[e1.index()];
            let n2 = &g2.adj[e2.index()];
            if n1.is_empty() || n2.is_empty() {
                break;
            }
            let mut shared: Vec<(u32, u32)> = n1
                .keys()
                .filter_map(|&n| {
                    links
                        .target_of(EntityId(n))
                        .filter(|m| n2.contains_key(&m.0))
                        .map(|m| (n, m.0))
                })
                .collect();
            let cov = shared.len() as f64 / n1.len().min(n2.len()) as f64;
            if cov <= cfg.target_max_coverage {
                break;
            }
            // Highest combined degree first; ties by source index.
            shared.sort_unstable_by_key(|&(n, m)| {
                (
                    std::cmp::Reverse(g1.degree[n as usize] + g2.degree[m as usize]),
                    n,
                )
            });

            let side_order: [u8; 2] = if cfg.alternate_sides {
                [next_side, 3 - next_side]
            } else if g1.n_triples >= g2.n_triples {
                [1, 2]
            } else {
                [2, 1]
            };

            let mut removed = None;
            'sides: for side in side_order {
                let (g, anchor) = match side {
                    1 => (&mut g1, e1.0),
                    _ => (&mut g2, e2.0),
                };
                for &(n, m) in &shared {
                    let nb = if side == 1 { n } else { m };
                    let mut cands = g.candidates(anchor, nb);
                    cands.shuffle(&mut rng);
                    for tr in cands {
                        if g.can_remove(tr, cfg.min_degree) {
                            g.remove(tr);
                            removed = Some((side, tr));
                            break 'sides;
                        }
                    }
                }
            }

            match removed {
                Some((side, (h, r, t))) => {
                    let (kg, _) = if side == 1 { (kg1, ()) } else { (kg2, ()) };
                    removals.push(RemovalRecord {
                        graph: side,
                        head: kg.entity_surface(EntityId(h)).to_owned(),
                        relation: kg.relations.surface(r).to_owned(),
                        tail: kg.entity_surface(EntityId(t)).to_owned(),
                    });
                    if cfg.alternate_sides {
                        next_side = 3 - side;
                    }
                }
                None => {
                    unreached.push(UnreachedPair {
                        source: kg1.entity_surface(e1).to_owned(),
                        target: kg2.entity_surface(e2).to_owned(),
                        coverage: cov,
                    });
                    break;
                }
            }
        }
    }

    let out1 = rebuild(kg1, &g1);
    let out2 = rebuild(kg2, &g2);
    Ok(HeterogenizeOutcome {
        kg1: out1,
        kg2: out2,
        removals,
        unreached,
    })
}

/// Rebuilds a graph from the surviving relation triples; attribute
/// triples pass through unchanged.
fn rebuild(kg: &KnowledgeGraph, working: &WorkingGraph) -> KnowledgeGraph {
    let rel: Vec<(String, String, String)> = working
        .live
        .iter()
        .map(|&(h, r, t)| {
            (
                kg.entity_surface(EntityId(h)).to_owned(),
                kg.relations.surface(r).to_owned(),
                kg.entity_surface(EntityId(t)).to_owned(),
            )
        })
        .collect();
    let attr: Vec<(String, String, String)> = kg
        .attr_triples()
        .iter()
        .map(|&(e, a, v)| {
            (
                kg.entity_surface(e).to_owned(),
                kg.attributes.surface(a.0).to_owned(),
                kg.values.surface(v.0).to_owned(),
            )
        })
        .collect();
    KnowledgeGraph::from_triples(rel, attr)
}
