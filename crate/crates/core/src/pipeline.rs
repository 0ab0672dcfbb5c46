//! End-to-end experiment pipeline driven by a flat key=value config
//! file. Stages communicate only through the documented file formats,
//! so each one is independently rerunnable; a canonical config hash is
//! written into reports and into a per-run manifest for stale-artifact
//! detection.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::attrsim::{self, AttrSimConfig, Combiner, NormalizeOptions, ScoreMode};
use crate::coverage::{heterogenize, HeterogenizeConfig};
use crate::encoder;
use crate::error::{io_err, Error, Result};
use crate::eval::{self, RankingReport};
use crate::interaction::{self, RcConfig};
use crate::kg::{self, EntityId, Split};
use crate::matrix::{self, SimilarityMatrix};

#[derive(Debug, Clone, PartialEq)]
pub enum EncoderSource {
    Baseline,
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub enum InteractionMethod {
    Ps { grid: Vec<f64> },
    Rc { tau: f64, margin: f64 },
}

/// Fully resolved experiment description. Serializes to a canonical
/// text whose hash stamps every report.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub dataset: String,
    pub kg1_rel: PathBuf,
    pub kg1_attr: PathBuf,
    pub kg2_rel: PathBuf,
    pub kg2_attr: PathBuf,
    pub links: PathBuf,
    pub ratio: (u32, u32, u32),
    pub seed: u64,
    pub normalize: NormalizeOptions,
    pub attrsim: AttrSimConfig,
    pub encoder: EncoderSource,
    pub interaction: InteractionMethod,
    pub heterogenize: Option<HeterogenizeConfig>,
    pub eval_ks: Vec<usize>,
    pub out_dir: PathBuf,
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(Error::Config {
            reason: format!("{key}: expected true or false, got {v:?}"),
        }),
    }
}

/// Parses `t:v:s` ratio strings.
pub fn parse_ratio(s: &str) -> Result<(u32, u32, u32)> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::BadRatio);
    }
    let nums: Vec<u32> = parts
        .iter()
        .map(|p| p.parse().map_err(|_| Error::BadRatio))
        .collect::<Result<_>>()?;
    if nums.contains(&0) {
        return Err(Error::BadRatio);
    }
    Ok((nums[0], nums[1], nums[2]))
}

/// Parses a confidence grid: either `start:end:step` or a comma list.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let bad = |reason: String| Error::Config { reason };
    let values: Vec<f64> = if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(bad(format!("grid {s:?}: expected start:end:step")));
        }
        let nums: Vec<f64> = parts
            .iter()
            .map(|p| {
                p.parse()
                    .map_err(|_| bad(format!("grid {s:?}: bad number {p:?}")))
            })
            .collect::<Result<_>>()?;
        let (start, end, step) = (nums[0], nums[1], nums[2]);
        if step <= 0.0 || end < start {
            return Err(bad(format!("grid {s:?}: need start <= end and step > 0")));
        }
        let n = ((end - start) / step).round() as usize;
        (0..=n)
            .map(|i| start + i as f64 * step)
            .filter(|&v| v <= end + 1e-9)
            .collect()
    } else {
        s.split(',')
            .map(|p| {
                p.trim()
                    .parse()
                    .map_err(|_| bad(format!("grid {s:?}: bad number {p:?}")))
            })
            .collect::<Result<_>>()?
    };
    if values.is_empty() {
        return Err(Error::EmptyGrid);
    }
    Ok(values)
}

pub fn parse_ks(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|p| {
            p.trim().parse().map_err(|_| Error::Config {
                reason: format!("eval.k: bad number {p:?}"),
            })
        })
        .collect()
}

pub fn parse_mode(s: &str) -> Result<ScoreMode> {
    match s {
        "sum" => Ok(ScoreMode::Sum),
        "noisy-or" => Ok(ScoreMode::NoisyOr),
        "sum-clamp" => Ok(ScoreMode::SumClamped),
        _ => Err(Error::Config {
            reason: format!("attrsim.mode: unknown mode {s:?} (sum | noisy-or | sum-clamp)"),
        }),
    }
}

pub fn parse_combiner(s: &str) -> Result<Combiner> {
    match s {
        "product" => Ok(Combiner::Product),
        "min" => Ok(Combiner::Min),
        _ => Err(Error::Config {
            reason: format!("attrsim.combiner: unknown combiner {s:?} (product | min)"),
        }),
    }
}

impl ExperimentConfig {
    /// Reads a flat `key = value` config file. Unknown keys are
    /// rejected so typos cannot silently fall back to defaults.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        let mut map: BTreeMap<String, String> = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::Config {
                    reason: format!("{}:{}: expected key = value", path.display(), i + 1),
                });
            };
            if map
                .insert(k.trim().to_owned(), v.trim().to_owned())
                .is_some()
            {
                return Err(Error::Config {
                    reason: format!("{}:{}: duplicate key {}", path.display(), i + 1, k.trim()),
                });
            }
        }
        Self::from_map(map, path.parent().unwrap_or(Path::new(".")))
    }

    fn from_map(mut map: BTreeMap<String, String>, base: &Path) -> Result<Self> {
        let mut take = |k: &str| map.remove(k);
        let required_path = |k: &str, v: Option<String>| -> Result<PathBuf> {
            let v = v.ok_or_else(|| Error::Config {
                reason: format!("missing required key {k}"),
            })?;
            let p = PathBuf::from(&v);
            Ok(if p.is_absolute() { p } else { base.join(p) })
        };
        let rel_path = |v: String| {
            let p = PathBuf::from(&v);
            if p.is_absolute() {
                p
            } else {
                base.join(p)
            }
        };

        let kg1_rel = required_path("kg1.rel", take("kg1.rel"))?;
        let kg1_attr = required_path("kg1.attr", take("kg1.attr"))?;
        let kg2_rel = required_path("kg2.rel", take("kg2.rel"))?;
        let kg2_attr = required_path("kg2.attr", take("kg2.attr"))?;
        let links = required_path("links", take("links"))?;
        let out_dir = required_path("out", take("out"))?;
        let dataset = take("dataset").unwrap_or_else(|| "unnamed".to_owned());
        let ratio = match take("split.ratio") {
            Some(v) => parse_ratio(&v)?,
            None => (2, 1, 7),
        };
        let seed: u64 = match take("split.seed") {
            Some(v) => v.parse().map_err(|_| Error::Config {
                reason: format!("split.seed: bad integer {v:?}"),
            })?,
            None => 42,
        };
        let normalize = NormalizeOptions {
            strip_datatype: match take("normalize.strip-datatype") {
                Some(v) => parse_bool("normalize.strip-datatype", &v)?,
                None => false,
            },
            strip_lang: match take("normalize.strip-lang") {
                Some(v) => parse_bool("normalize.strip-lang", &v)?,
                None => false,
            },
            ..NormalizeOptions::default()
        };
        let attrsim = AttrSimConfig {
            mode: match take("attrsim.mode") {
                Some(v) => parse_mode(&v)?,
                None => ScoreMode::NoisyOr,
            },
            combiner: match take("attrsim.combiner") {
                Some(v) => parse_combiner(&v)?,
                None => Combiner::Product,
            },
            min_vfre: match take("attrsim.min-vfre") {
                Some(v) => Some(v.parse().map_err(|_| Error::Config {
                    reason: format!("attrsim.min-vfre: bad number {v:?}"),
                })?),
                None => None,
            },
        };
        let encoder = match take("encoder") {
            None => EncoderSource::Baseline,
            Some(v) if v == "baseline" => EncoderSource::Baseline,
            Some(v) => EncoderSource::File(rel_path(v)),
        };
        let interaction = match take("interaction").as_deref() {
            None | Some("ps") => InteractionMethod::Ps {
                grid: match take("ps.grid") {
                    Some(v) => parse_grid(&v)?,
                    None => interaction::default_grid(),
                },
            },
            Some("rc") => {
                let tau: f64 = match take("rc.tau") {
                    Some(v) => v.parse().map_err(|_| Error::Config {
                        reason: format!("rc.tau: bad number {v:?}"),
                    })?,
                    None => 0.9,
                };
                let margin: f64 = match take("rc.margin") {
                    Some(v) => v.parse().map_err(|_| Error::Config {
                        reason: format!("rc.margin: bad number {v:?}"),
                    })?,
                    None => 0.0,
                };
                RcConfig::new(tau, margin)?;
                InteractionMethod::Rc { tau, margin }
            }
            Some(other) => {
                return Err(Error::Config {
                    reason: format!("interaction: unknown method {other:?} (ps | rc)"),
                })
            }
        };
        let heterogenize = match take("heterogenize.target") {
            None => None,
            Some(v) => {
                let target: f64 = v.parse().map_err(|_| Error::Config {
                    reason: format!("heterogenize.target: bad number {v:?}"),
                })?;
                let cfg = HeterogenizeConfig {
                    target_max_coverage: target,
                    min_degree: match take("heterogenize.min-degree") {
                        Some(v) => v.parse().map_err(|_| Error::Config {
                            reason: format!("heterogenize.min-degree: bad integer {v:?}"),
                        })?,
                        None => 1,
                    },
                    seed: match take("heterogenize.seed") {
                        Some(v) => v.parse().map_err(|_| Error::Config {
                            reason: format!("heterogenize.seed: bad integer {v:?}"),
                        })?,
                        None => seed,
                    },
                    alternate_sides: match take("heterogenize.alternate-sides") {
                        Some(v) => parse_bool("heterogenize.alternate-sides", &v)?,
                        None => false,
                    },
                };
                cfg.validate()?;
                Some(cfg)
            }
        };
        let eval_ks = match take("eval.k") {
            Some(v) => parse_ks(&v)?,
            None => vec![1, 10],
        };

        if let Some(k) = map.keys().next() {
            return Err(Error::Config {
                reason: format!("unknown key {k}"),
            });
        }

        Ok(ExperimentConfig {
            dataset,
            kg1_rel,
            kg1_attr,
            kg2_rel,
            kg2_attr,
            links,
            ratio,
            seed,
            normalize,
            attrsim,
            encoder,
            interaction,
            heterogenize,
            eval_ks,
            out_dir,
        })
    }

    /// Canonical text form: every effective setting, sorted by key.
    pub fn canonical_text(&self) -> String {
        let mut kv: BTreeMap<String, String> = BTreeMap::new();
        kv.insert("dataset".into(), self.dataset.clone());
        kv.insert("kg1.rel".into(), self.kg1_rel.display().to_string());
        kv.insert("kg1.attr".into(), self.kg1_attr.display().to_string());
        kv.insert("kg2.rel".into(), self.kg2_rel.display().to_string());
        kv.insert("kg2.attr".into(), self.kg2_attr.display().to_string());
        kv.insert("links".into(), self.links.display().to_string());
        kv.insert(
            "split.ratio".into(),
            format!("{}:{}:{}", self.ratio.0, self.ratio.1, self.ratio.2),
        );
        kv.insert("split.seed".into(), self.seed.to_string());
        kv.insert(
            "normalize.strip-datatype".into(),
            self.normalize.strip_datatype.to_string(),
        );
        kv.insert(
            "normalize.strip-lang".into(),
            self.normalize.strip_lang.to_string(),
        );
        kv.insert(
            "attrsim.mode".into(),
            match self.attrsim.mode {
                ScoreMode::Sum => "sum",
                ScoreMode::NoisyOr => "noisy-or",
                ScoreMode::SumClamped => "sum-clamp",
            }
            .into(),
        );
        kv.insert(
            "attrsim.combiner".into(),
            match self.attrsim.combiner {
                Combiner::Product => "product",
                Combiner::Min => "min",
            }
            .into(),
        );
        if let Some(floor) = self.attrsim.min_vfre {
            kv.insert("attrsim.min-vfre".into(), floor.to_string());
        }
        kv.insert(
            "encoder".into(),
            match &self.encoder {
                EncoderSource::Baseline => "baseline".into(),
                EncoderSource::File(p) => p.display().to_string(),
            },
        );
        match &self.interaction {
            InteractionMethod::Ps { grid } => {
                kv.insert("interaction".into(), "ps".into());
                kv.insert(
                    "ps.grid".into(),
                    grid.iter()
                        .map(f64::to_string)
                        .collect::<Vec<_>>()
                        .join(","),
                );
            }
            InteractionMethod::Rc { tau, margin } => {
                kv.insert("interaction".into(), "rc".into());
                kv.insert("rc.tau".into(), tau.to_string());
                kv.insert("rc.margin".into(), margin.to_string());
            }
        }
        if let Some(h) = &self.heterogenize {
            kv.insert(
                "heterogenize.target".into(),
                h.target_max_coverage.to_string(),
            );
            kv.insert("heterogenize.min-degree".into(), h.min_degree.to_string());
            kv.insert("heterogenize.seed".into(), h.seed.to_string());
            kv.insert(
                "heterogenize.alternate-sides".into(),
                h.alternate_sides.to_string(),
            );
        }
        kv.insert(
            "eval.k".into(),
            self.eval_ks
                .iter()
                .map(usize::to_string)
                .collect::<Vec<_>>()
                .join(","),
        );
        kv.insert("out".into(), self.out_dir.display().to_string());
        let mut out = String::new();
        for (k, v) in kv {
            out.push_str(&format!("{k} = {v}\n"));
        }
        out
    }

    pub fn hash(&self) -> String {
        sha256_hex(self.canonical_text().as_bytes())[..12].to_owned()
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// What a pipeline run produced: a full ranking report (PS and plain
/// encoder evaluation) or a top-1 report (RC, which has no ranking).
#[derive(Debug, Clone)]
pub enum PipelineOutcome {
    Ranked(RankingReport),
    Top1 {
        hits1: f64,
        dataset: String,
        method: String,
        config_hash: String,
    },
}

impl PipelineOutcome {
    pub fn to_tsv(&self) -> String {
        match self {
            PipelineOutcome::Ranked(r) => r.to_tsv(),
            PipelineOutcome::Top1 {
                hits1,
                dataset,
                method,
                config_hash,
            } => {
                format!(
                    "# dataset={dataset}\n# method={method}\n# config={config_hash}\nhits@1\t{hits1}\n"
                )
            }
        }
    }

    pub fn to_table(&self) -> String {
        match self {
            PipelineOutcome::Ranked(r) => r.to_table(),
            PipelineOutcome::Top1 {
                hits1,
                dataset,
                method,
                config_hash,
            } => format!(
                "dataset: {dataset}  method: {method}  config: {config_hash}\nH@1\n{:.1}\n",
                hits1 * 100.0
            ),
        }
    }

    pub fn hits1(&self) -> Option<f64> {
        match self {
            PipelineOutcome::Ranked(r) => r.hits(1),
            PipelineOutcome::Top1 { hits1, .. } => Some(*hits1),
        }
    }
}

struct RunPaths {
    out: PathBuf,
}

impl RunPaths {
    fn file(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }
}

fn preflight(cfg: &ExperimentConfig) -> Result<()> {
    let mut paths = vec![
        &cfg.kg1_rel,
        &cfg.kg1_attr,
        &cfg.kg2_rel,
        &cfg.kg2_attr,
        &cfg.links,
    ];
    if let EncoderSource::File(p) = &cfg.encoder {
        paths.push(p);
    }
    for p in paths {
        if !p.exists() {
            return Err(Error::Io {
                path: p.clone(),
                source: std::io::Error::new(std::io::ErrorKind::NotFound, "missing input"),
            });
        }
    }
    Ok(())
}

/// Runs ingest, optional heterogenization, attribute similarity,
/// encoder import or baseline, interaction, and evaluation, writing
/// every intermediate artifact under the config's output directory.
pub fn run_pipeline(cfg: &ExperimentConfig) -> Result<PipelineOutcome> {
    preflight(cfg).map_err(|e| e.in_stage("preflight"))?;
    fs::create_dir_all(&cfg.out_dir).map_err(io_err(&cfg.out_dir))?;
    let paths = RunPaths {
        out: cfg.out_dir.clone(),
    };
    let config_hash = cfg.hash();
    check_manifest(&paths, &config_hash);
    fs::write(
        paths.file("config.resolved.txt"),
        format!("# config={config_hash}\n{}", cfg.canonical_text()),
    )
    .map_err(io_err(paths.file("config.resolved.txt")))?;

    // ingest
    let mut kg1 = kg::load_kg(&cfg.kg1_rel, &cfg.kg1_attr).map_err(|e| e.in_stage("ingest"))?;
    let mut kg2 = kg::load_kg(&cfg.kg2_rel, &cfg.kg2_attr).map_err(|e| e.in_stage("ingest"))?;

    // heterogenize (optional)
    if let Some(hcfg) = &cfg.heterogenize {
        let mut run = || -> Result<()> {
            let raw = kg::read_link_file(&cfg.links)?;
            let mut pairs = Vec::with_capacity(raw.len());
            for (s, t) in &raw {
                let a = kg1
                    .entity(s)
                    .ok_or_else(|| Error::UnknownSurface { surface: s.clone() })?;
                let b = kg2
                    .entity(t)
                    .ok_or_else(|| Error::UnknownSurface { surface: t.clone() })?;
                pairs.push((a, b));
            }
            let out = heterogenize(&kg1, &kg2, &pairs, hcfg)?;
            kg::write_kg(
                &out.kg1,
                &paths.file("rel_triples_1"),
                &paths.file("attr_triples_1"),
            )?;
            kg::write_kg(
                &out.kg2,
                &paths.file("rel_triples_2"),
                &paths.file("attr_triples_2"),
            )?;
            let removal_lines: Vec<String> = out
                .removals
                .iter()
                .map(|r| format!("{}\t{}\t{}\t{}", r.graph, r.head, r.relation, r.tail))
                .collect();
            kg::write_lines(&paths.file("removals.tsv"), &removal_lines)?;
            let unreached_lines: Vec<String> = out
                .unreached
                .iter()
                .map(|u| format!("{}\t{}\t{}", u.source, u.target, u.coverage))
                .collect();
            kg::write_lines(&paths.file("unreached.tsv"), &unreached_lines)?;
            kg1 = out.kg1;
            kg2 = out.kg2;
            Ok(())
        };
        run().map_err(|e| e.in_stage("heterogenize"))?;
    }

    // split
    let alignment = kg::load_alignment(&cfg.links, &kg1, &kg2, cfg.ratio, cfg.seed)
        .map_err(|e| e.in_stage("split"))?;
    let valid_ids = alignment.split_pairs(Split::Validation);
    let valid_pairs = alignment.split_surfaces(Split::Validation, &kg1, &kg2);
    let test_ids = alignment.split_pairs(Split::Test);
    let test_pairs = alignment.split_surfaces(Split::Test, &kg1, &kg2);
    for (name, split) in [
        ("links.train", Split::Train),
        ("links.valid", Split::Validation),
        ("links.test", Split::Test),
    ] {
        kg::write_link_file(
            &paths.file(name),
            &alignment.split_surfaces(split, &kg1, &kg2),
        )
        .map_err(|e| e.in_stage("split"))?;
    }

    // Row/col universe: validation sources/targets first, then test.
    let row_ids: Vec<EntityId> = valid_ids
        .iter()
        .map(|&(s, _)| s)
        .chain(test_ids.iter().map(|&(s, _)| s))
        .collect();
    let col_ids: Vec<EntityId> = valid_ids
        .iter()
        .map(|&(_, t)| t)
        .chain(test_ids.iter().map(|&(_, t)| t))
        .collect();

    // attr-sim
    let attr = {
        let idx1 = attrsim::build_index(&kg1, &cfg.normalize);
        let idx2 = attrsim::build_index(&kg2, &cfg.normalize);
        let m =
            attrsim::build_attr_matrix(&kg1, &kg2, &idx1, &idx2, &row_ids, &col_ids, &cfg.attrsim)
                .map_err(|e| e.in_stage("attr-sim"))?;
        matrix::write_simsp(&m, &paths.file("attr.simsp")).map_err(|e| e.in_stage("attr-sim"))?;
        m
    };

    // encoder
    let enc = {
        let m = match &cfg.encoder {
            EncoderSource::Baseline => {
                encoder::baseline_literal_encoder(&kg1, &kg2, &row_ids, &col_ids)
                    .map_err(|e| e.in_stage("encoder"))?
            }
            EncoderSource::File(path) => {
                let loaded = encoder::load_encoder_matrix(path, &kg1, &kg2)
                    .map_err(|e| e.in_stage("encoder"))?;
                for s in attr.row_surfaces() {
                    if loaded.row_index(s).is_none() {
                        return Err(
                            Error::UnknownSurface { surface: s.clone() }.in_stage("encoder")
                        );
                    }
                }
                for s in attr.col_surfaces() {
                    if !loaded.col_surfaces().iter().any(|c| c == s) {
                        return Err(
                            Error::UnknownSurface { surface: s.clone() }.in_stage("encoder")
                        );
                    }
                }
                loaded.project_onto(attr.row_surfaces(), attr.col_surfaces())
            }
        };
        matrix::write_easim(&m, &paths.file("encoder.easim")).map_err(|e| e.in_stage("encoder"))?;
        m
    };

    // interaction + evaluate
    let outcome = match &cfg.interaction {
        InteractionMethod::Ps { grid } => {
            let enc_freq = enc
                .minmax_to_frequency()
                .map_err(|e| e.in_stage("interaction"))?;
            let attr_freq = ensure_frequency(&attr).map_err(|e| e.in_stage("interaction"))?;
            let search = interaction::grid_search(&enc_freq, &attr_freq, &valid_pairs, grid)
                .map_err(|e| e.in_stage("interaction"))?;
            let surface_lines: Vec<String> = search
                .surface
                .iter()
                .map(|p| format!("{}\t{}\t{}", p.c_ea, p.c_at, p.hits1))
                .collect();
            kg::write_lines(&paths.file("gridsearch.tsv"), &surface_lines)
                .map_err(|e| e.in_stage("interaction"))?;
            let combined = interaction::ps_combine(&enc_freq, &attr_freq, search.best)
                .map_err(|e| e.in_stage("interaction"))?;
            matrix::write_easim(&combined, &paths.file("combined.easim"))
                .map_err(|e| e.in_stage("interaction"))?;

            let ranks = eval::rank(&combined, &test_pairs).map_err(|e| e.in_stage("evaluate"))?;
            let method = format!("ps(c_ea={},c_at={})", search.best.c_ea, search.best.c_at);
            let report = eval::metrics(
                &test_pairs,
                &ranks,
                &cfg.eval_ks,
                &cfg.dataset,
                &method,
                &config_hash,
            )
            .map_err(|e| e.in_stage("evaluate"))?;
            let rank_lines: Vec<String> = report
                .per_source
                .iter()
                .map(|(s, r)| format!("{s}\t{r}"))
                .collect();
            kg::write_lines(&paths.file("ranks.tsv"), &rank_lines)
                .map_err(|e| e.in_stage("evaluate"))?;
            PipelineOutcome::Ranked(report)
        }
        InteractionMethod::Rc { tau, margin } => {
            let rc_cfg = RcConfig::new(*tau, *margin)?;
            let test_rows: Vec<String> = test_pairs.iter().map(|(s, _)| s.clone()).collect();
            let test_cols: Vec<String> = test_pairs.iter().map(|(_, t)| t.clone()).collect();
            let enc_test = enc.project_onto(&test_rows, &test_cols);
            let attr_test = attr.project_onto(&test_rows, &test_cols);
            let enc_preds = interaction::argmax_predictions(&enc_test);
            let corrected = interaction::rc_combine(&enc_preds, &attr_test, &rc_cfg);
            let pred_lines: Vec<String> = corrected
                .iter()
                .map(|p| {
                    format!(
                        "{}\t{}\t{}",
                        p.source,
                        p.target,
                        if p.overridden { "attribute" } else { "encoder" }
                    )
                })
                .collect();
            kg::write_lines(&paths.file("predictions.tsv"), &pred_lines)
                .map_err(|e| e.in_stage("interaction"))?;
            let pred_pairs: Vec<(String, String)> = corrected
                .iter()
                .map(|p| (p.source.clone(), p.target.clone()))
                .collect();
            let hits1 =
                eval::metrics_top1(&pred_pairs, &test_pairs).map_err(|e| e.in_stage("evaluate"))?;
            PipelineOutcome::Top1 {
                hits1,
                dataset: cfg.dataset.clone(),
                method: format!("rc(tau={tau},margin={margin})"),
                config_hash: config_hash.clone(),
            }
        }
    };

    fs::write(paths.file("report.tsv"), outcome.to_tsv())
        .map_err(io_err(paths.file("report.tsv")))?;
    write_manifest(&paths, &config_hash)?;
    Ok(outcome)
}

/// Sparse attribute matrices in a raw domain (sum mode) cannot feed
/// the belief combination; fail with guidance instead of guessing.
fn ensure_frequency(m: &SimilarityMatrix) -> Result<SimilarityMatrix> {
    if m.domain() == crate::matrix::ScoreDomain::FrequencyNormalized {
        Ok(m.clone())
    } else {
        Err(Error::NotFrequencyNormalized {
            context: "attribute matrix was built in sum mode; use noisy-or or sum-clamp".into(),
        })
    }
}

const MANIFEST: &str = "manifest.tsv";

fn check_manifest(paths: &RunPaths, config_hash: &str) {
    let p = paths.file(MANIFEST);
    if let Ok(text) = fs::read_to_string(&p) {
        if let Some(line) = text.lines().next() {
            if let Some(old) = line.strip_prefix("config\t") {
                if old != config_hash {
                    log::warn!(
                        "{}: existing artifacts were produced by config {old}, \
                         rerunning with {config_hash}; stale files will be overwritten",
                        paths.out.display()
                    );
                }
            }
        }
    }
}

fn write_manifest(paths: &RunPaths, config_hash: &str) -> Result<()> {
    let mut names: Vec<String> = fs::read_dir(&paths.out)
        .map_err(io_err(&paths.out))?
        .filter_map(|e| e.ok())
        .filter(|e| e.path().is_file())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n != MANIFEST)
        .collect();
    names.sort();
    let mut lines = vec![format!("config\t{config_hash}")];
    for n in names {
        let bytes = fs::read(paths.file(&n)).map_err(io_err(paths.file(&n)))?;
        lines.push(format!("{n}\t{}", sha256_hex(&bytes)));
    }
    kg::write_lines(&paths.file(MANIFEST), &lines)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_parsing() {
        assert_eq!(parse_ratio("2:1:7").unwrap(), (2, 1, 7));
        assert!(parse_ratio("2:1").is_err());
        assert!(parse_ratio("0:1:9").is_err());
    }

    #[test]
    fn grid_range_parsing() {
        let g = parse_grid("0.05:0.95:0.05").unwrap();
        assert_eq!(g.len(), 19);
        assert!((g[0] - 0.05).abs() < 1e-12);
        assert!((g[18] - 0.95).abs() < 1e-9);
        let g = parse_grid("0.1,0.5,0.9").unwrap();
        assert_eq!(g, vec![0.1, 0.5, 0.9]);
        assert!(parse_grid("oops").is_err());
    }

    #[test]
    fn config_round_trip_and_hash_stability() {
        let dir = tempfile::TempDir::new().unwrap();
        let conf = dir.path().join("exp.conf");
        fs::write(
            &conf,
            "dataset = demo\nkg1.rel = r1\nkg1.attr = a1\nkg2.rel = r2\nkg2.attr = a2\n\
             links = l\nout = o\ninteraction = ps\nps.grid = 0.5\n",
        )
        .unwrap();
        let c1 = ExperimentConfig::from_file(&conf).unwrap();
        let c2 = ExperimentConfig::from_file(&conf).unwrap();
        assert_eq!(c1.hash(), c2.hash());
        assert_eq!(c1.canonical_text(), c2.canonical_text());
        assert_eq!(c1.ratio, (2, 1, 7));
    }

    #[test]
    fn unknown_key_rejected() {
        let dir = tempfile::TempDir::new().unwrap();
        let conf = dir.path().join("exp.conf");
        fs::write(
            &conf,
            "kg1.rel = r1\nkg1.attr = a1\nkg2.rel = r2\nkg2.attr = a2\nlinks = l\nout = o\nbogus = 1\n",
        )
        .unwrap();
        match ExperimentConfig::from_file(&conf) {
            Err(Error::Config { reason }) => assert!(reason.contains("bogus")),
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn missing_input_fails_preflight() {
        let dir = tempfile::TempDir::new().unwrap();
        let conf = dir.path().join("exp.conf");
        fs::write(
            &conf,
            "kg1.rel = nope\nkg1.attr = a1\nkg2.rel = r2\nkg2.attr = a2\nlinks = l\nout = o\n",
        )
        .unwrap();
        let cfg = ExperimentConfig::from_file(&conf).unwrap();
        match run_pipeline(&cfg) {
            Err(Error::Stage {
                stage: "preflight", ..
            }) => {}
            other => panic!("expected preflight failure, got {other:?}"),
        }
    }
}
