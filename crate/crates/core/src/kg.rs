//! In-memory knowledge graph with interned identifiers, plus loaders and
//! writers for the tab-separated triple files both benchmark families
//! ship in (one triple per line, three fields; one links file per
//! alignment).
//!
//! Attribute values are stored verbatim at this layer; normalization is
//! the similarity module's concern, so ingestion stays lossless. Loaded
//! graphs are immutable and safe to share across threads.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{io_err, Error, Result};

macro_rules! id_type {
    ($name:ident) => {
        /// Dense per-graph index for an interned surface form.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(pub u32);

        impl $name {
            pub fn index(self) -> usize {
                self.0 as usize
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", self.0)
            }
        }
    };
}

id_type!(EntityId);
id_type!(RelationId);
id_type!(AttributeId);
id_type!(ValueId);

/// Bijective interner: distinct surfaces get distinct dense indices.
#[derive(Debug, Default, Clone)]
pub struct Vocab {
    surfaces: Vec<String>,
    index: HashMap<String, u32>,
}

impl Vocab {
    pub fn intern(&mut self, surface: &str) -> u32 {
        if let Some(&id) = self.index.get(surface) {
            return id;
        }
        let id = self.surfaces.len() as u32;
        self.surfaces.push(surface.to_owned());
        self.index.insert(surface.to_owned(), id);
        id
    }

    pub fn get(&self, surface: &str) -> Option<u32> {
        self.index.get(surface).copied()
    }

    pub fn surface(&self, id: u32) -> &str {
        &self.surfaces[id as usize]
    }

    pub fn len(&self) -> usize {
        self.surfaces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.surfaces.is_empty()
    }

    pub fn surfaces(&self) -> &[String] {
        &self.surfaces
    }
}

/// A knowledge graph: interned vocabularies plus deduplicated,
/// sorted relation and attribute triple stores.
#[derive(Debug, Default, Clone)]
pub struct KnowledgeGraph {
    pub entities: Vocab,
    pub relations: Vocab,
    pub attributes: Vocab,
    pub values: Vocab,
    rel_triples: Vec<(EntityId, RelationId, EntityId)>,
    attr_triples: Vec<(EntityId, AttributeId, ValueId)>,
}

impl KnowledgeGraph {
    pub fn rel_triples(&self) -> &[(EntityId, RelationId, EntityId)] {
        &self.rel_triples
    }

    pub fn attr_triples(&self) -> &[(EntityId, AttributeId, ValueId)] {
        &self.attr_triples
    }

    pub fn entity(&self, surface: &str) -> Option<EntityId> {
        self.entities.get(surface).map(EntityId)
    }

    pub fn entity_surface(&self, e: EntityId) -> &str {
        self.entities.surface(e.0)
    }

    pub fn contains_entity(&self, e: EntityId) -> bool {
        e.index() < self.entities.len()
    }

    /// Builds a graph from raw triples, interning surfaces and
    /// deduplicating under set semantics.
    pub fn from_triples<R, A>(rel: R, attr: A) -> Self
    where
        R: IntoIterator<Item = (String, String, String)>,
        A: IntoIterator<Item = (String, String, String)>,
    {
        let mut kg = KnowledgeGraph::default();
        for (h, r, t) in rel {
            kg.add_rel_triple(&h, &r, &t);
        }
        for (e, a, v) in attr {
            kg.add_attr_triple(&e, &a, &v);
        }
        kg.finish();
        kg
    }

    fn add_rel_triple(&mut self, head: &str, rel: &str, tail: &str) {
        let h = EntityId(self.entities.intern(head));
        let r = RelationId(self.relations.intern(rel));
        let t = EntityId(self.entities.intern(tail));
        self.rel_triples.push((h, r, t));
    }

    fn add_attr_triple(&mut self, ent: &str, attr: &str, value: &str) {
        let e = EntityId(self.entities.intern(ent));
        let a = AttributeId(self.attributes.intern(attr));
        let v = ValueId(self.values.intern(value));
        self.attr_triples.push((e, a, v));
    }

    fn finish(&mut self) {
        self.rel_triples.sort_unstable();
        self.rel_triples.dedup();
        self.attr_triples.sort_unstable();
        self.attr_triples.dedup();
    }

    /// Table-style counts: (entities, relations, attributes, values,
    /// rel triples, attr triples).
    pub fn stats(&self) -> GraphStats {
        GraphStats {
            entities: self.entities.len(),
            relations: self.relations.len(),
            attributes: self.attributes.len(),
            values: self.values.len(),
            rel_triples: self.rel_triples.len(),
            attr_triples: self.attr_triples.len(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GraphStats {
    pub entities: usize,
    pub relations: usize,
    pub attributes: usize,
    pub values: usize,
    pub rel_triples: usize,
    pub attr_triples: usize,
}

fn read_triple_file(path: &Path) -> Result<Vec<(String, String, String)>> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    if text.is_empty() {
        log::warn!("{}: empty triple file", path.display());
        return Ok(Vec::new());
    }
    let mut triples = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::TripleArity {
                path: path.to_owned(),
                line: i + 1,
                found: fields.len(),
            });
        }
        if fields.iter().any(|f| f.is_empty()) {
            return Err(Error::EmptyField {
                path: path.to_owned(),
                line: i + 1,
            });
        }
        triples.push((
            fields[0].to_owned(),
            fields[1].to_owned(),
            fields[2].to_owned(),
        ));
    }
    Ok(triples)
}

/// Loads a graph from one relation-triple file and one attribute-triple
/// file. Duplicate lines are deduplicated; malformed lines abort with
/// the offending line number.
pub fn load_kg(rel_path: &Path, attr_path: &Path) -> Result<KnowledgeGraph> {
    let rel = read_triple_file(rel_path)?;
    let attr = read_triple_file(attr_path)?;
    Ok(KnowledgeGraph::from_triples(rel, attr))
}

/// Writes the two triple files back out, lines sorted lexicographically
/// so output is byte-stable. `load_kg(write_kg(g))` reproduces `g`'s
/// triple sets exactly.
pub fn write_kg(kg: &KnowledgeGraph, rel_path: &Path, attr_path: &Path) -> Result<()> {
    let mut rel_lines: Vec<String> = kg
        .rel_triples
        .iter()
        .map(|&(h, r, t)| {
            format!(
                "{}\t{}\t{}",
                kg.entities.surface(h.0),
                kg.relations.surface(r.0),
                kg.entities.surface(t.0)
            )
        })
        .collect();
    let mut attr_lines: Vec<String> = kg
        .attr_triples
        .iter()
        .map(|&(e, a, v)| {
            format!(
                "{}\t{}\t{}",
                kg.entities.surface(e.0),
                kg.attributes.surface(a.0),
                kg.values.surface(v.0)
            )
        })
        .collect();
    rel_lines.sort_unstable();
    attr_lines.sort_unstable();
    write_lines(rel_path, &rel_lines)?;
    write_lines(attr_path, &attr_lines)
}

pub(crate) fn write_lines(path: &Path, lines: &[String]) -> Result<()> {
    let file = fs::File::create(path).map_err(io_err(path))?;
    let mut out = BufWriter::new(file);
    for line in lines {
        writeln!(out, "{line}").map_err(io_err(path))?;
    }
    out.flush().map_err(io_err(path))
}

/// Which split a gold pair landed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Validation,
    Test,
}

/// Gold alignment: 1-to-1 entity pairs partitioned into
/// train/validation/test by a seeded shuffle.
#[derive(Debug, Clone)]
pub struct AlignmentSet {
    pairs: Vec<(EntityId, EntityId)>,
    partition: Vec<Split>,
}

impl AlignmentSet {
    pub fn pairs(&self) -> &[(EntityId, EntityId)] {
        &self.pairs
    }

    pub fn partition(&self) -> &[Split] {
        &self.partition
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn split_pairs(&self, split: Split) -> Vec<(EntityId, EntityId)> {
        self.pairs
            .iter()
            .zip(&self.partition)
            .filter(|(_, &s)| s == split)
            .map(|(&p, _)| p)
            .collect()
    }

    /// Pairs of a split as (source surface, target surface).
    pub fn split_surfaces(
        &self,
        split: Split,
        kg1: &KnowledgeGraph,
        kg2: &KnowledgeGraph,
    ) -> Vec<(String, String)> {
        self.split_pairs(split)
            .into_iter()
            .map(|(s, t)| {
                (
                    kg1.entity_surface(s).to_owned(),
                    kg2.entity_surface(t).to_owned(),
                )
            })
            .collect()
    }
}

/// Reads a `src<TAB>tgt` links file against two loaded graphs and
/// partitions the pairs by `ratio` after a seed-determined shuffle.
/// The same (file, ratio, seed) always yields the same partition.
pub fn load_alignment(
    links_path: &Path,
    kg1: &KnowledgeGraph,
    kg2: &KnowledgeGraph,
    ratio: (u32, u32, u32),
    seed: u64,
) -> Result<AlignmentSet> {
    let raw = read_link_file(links_path)?;
    let mut pairs = Vec::with_capacity(raw.len());
    let mut seen_src: HashMap<EntityId, ()> = HashMap::new();
    let mut seen_tgt: HashMap<EntityId, ()> = HashMap::new();
    for (src, tgt) in &raw {
        let s = kg1.entity(src).ok_or_else(|| Error::UnknownSurface {
            surface: src.clone(),
        })?;
        let t = kg2.entity(tgt).ok_or_else(|| Error::UnknownSurface {
            surface: tgt.clone(),
        })?;
        if seen_src.insert(s, ()).is_some() {
            return Err(Error::DuplicateLink {
                side: "source",
                surface: src.clone(),
            });
        }
        if seen_tgt.insert(t, ()).is_some() {
            return Err(Error::DuplicateLink {
                side: "target",
                surface: tgt.clone(),
            });
        }
        pairs.push((s, t));
    }

    let (tr, va, te) = ratio;
    if tr == 0 || va == 0 || te == 0 {
        return Err(Error::BadRatio);
    }
    let total = (tr + va + te) as u64;
    let n = pairs.len() as u64;
    // Cumulative-floor partition: split sizes are exact whenever the
    // ratio divides n, and off by at most one otherwise.
    let n_train = (n * tr as u64 / total) as usize;
    let n_valid = (n * (tr + va) as u64 / total) as usize - n_train;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    pairs.shuffle(&mut rng);

    let partition = pairs
        .iter()
        .enumerate()
        .map(|(i, _)| {
            if i < n_train {
                Split::Train
            } else if i < n_train + n_valid {
                Split::Validation
            } else {
                Split::Test
            }
        })
        .collect();

    Ok(AlignmentSet { pairs, partition })
}

/// Reads a links file as raw (source surface, target surface) pairs,
/// without resolving against any graph.
pub fn read_link_file(path: &Path) -> Result<Vec<(String, String)>> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let mut links = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 2 {
            return Err(Error::LinkArity {
                path: path.to_owned(),
                line: i + 1,
                found: fields.len(),
            });
        }
        links.push((fields[0].to_owned(), fields[1].to_owned()));
    }
    Ok(links)
}

/// Writes (source, target) surface pairs, one per line, tab-separated.
pub fn write_link_file(path: &Path, links: &[(String, String)]) -> Result<()> {
    let lines: Vec<String> = links.iter().map(|(s, t)| format!("{s}\t{t}")).collect();
    write_lines(path, &lines)
}
