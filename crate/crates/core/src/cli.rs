//! Subcommand front end. Exit codes: 0 success, 1 usage error, 2 data
//! error, 3 internal fault.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::attrsim::{self, AttrSimConfig, NormalizeOptions};
use crate::coverage::{self, HeterogenizeConfig};
use crate::encoder;
use crate::error::{io_err, Error, Result};
use crate::eval;
use crate::interaction::{self, PsConfig, RcConfig};
use crate::kg::{self, EntityId, KnowledgeGraph};
use crate::matrix::{self, SimilarityMatrix};
use crate::pipeline::{self, ExperimentConfig};

#[derive(Parser, Debug)]
#[command(
    name = "attr-int",
    version,
    about = "Entity alignment via attribute-value uniqueness, belief-revision matrix fusion, \
             and heterogeneous benchmark construction"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// The four triple files of a graph pair.
#[derive(Args, Debug)]
struct KgPairArgs {
    /// Relation triples of the source graph
    #[arg(long, value_name = "FILE")]
    kg1_rel: PathBuf,
    /// Attribute triples of the source graph
    #[arg(long, value_name = "FILE")]
    kg1_attr: PathBuf,
    /// Relation triples of the target graph
    #[arg(long, value_name = "FILE")]
    kg2_rel: PathBuf,
    /// Attribute triples of the target graph
    #[arg(long, value_name = "FILE")]
    kg2_attr: PathBuf,
}

impl KgPairArgs {
    fn load(&self) -> Result<(KnowledgeGraph, KnowledgeGraph)> {
        Ok((
            kg::load_kg(&self.kg1_rel, &self.kg1_attr)?,
            kg::load_kg(&self.kg2_rel, &self.kg2_attr)?,
        ))
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Load triple files, report statistics, optionally split links
    Ingest {
        /// Relation triples
        #[arg(long, value_name = "FILE")]
        rel: PathBuf,
        /// Attribute triples
        #[arg(long, value_name = "FILE")]
        attr: PathBuf,
        /// Second graph's relation triples (for link splitting)
        #[arg(long, value_name = "FILE", requires = "attr2")]
        rel2: Option<PathBuf>,
        /// Second graph's attribute triples
        #[arg(long, value_name = "FILE", requires = "rel2")]
        attr2: Option<PathBuf>,
        /// Gold links to split (needs both graphs)
        #[arg(long, value_name = "FILE", requires = "rel2")]
        links: Option<PathBuf>,
        /// train:valid:test ratio
        #[arg(long, default_value = "2:1:7")]
        ratio: String,
        /// Shuffle seed for the split
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Directory for links.train / links.valid / links.test
        #[arg(long, value_name = "DIR", requires = "links")]
        split_dir: Option<PathBuf>,
        /// Print per-graph statistics
        #[arg(long)]
        report: bool,
    },

    /// Coverage-rate histogram of the gold pairs
    Coverage {
        #[command(flatten)]
        kgs: KgPairArgs,
        /// Gold alignment links
        #[arg(long, value_name = "FILE")]
        links: PathBuf,
        /// Histogram TSV: bucket lower bound, percentage
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
        /// Optional per-pair coverage TSV
        #[arg(long, value_name = "FILE")]
        pairs_out: Option<PathBuf>,
    },

    /// Lower pair coverage by removing relation triples
    Heterogenize {
        #[command(flatten)]
        kgs: KgPairArgs,
        /// Gold alignment links
        #[arg(long, value_name = "FILE")]
        links: PathBuf,
        /// Target maximum coverage per pair
        #[arg(long)]
        target: f64,
        /// Relation-degree floor no entity may drop below
        #[arg(long, default_value_t = 1)]
        min_degree: u32,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Alternate removals between the two graphs
        #[arg(long)]
        alternate_sides: bool,
        /// Output directory for the reduced graphs and removal log
        #[arg(long, value_name = "DIR")]
        out_dir: PathBuf,
    },

    /// Build the sparse attribute similarity matrix
    AttrSim {
        #[command(flatten)]
        kgs: KgPairArgs,
        /// Restrict rows/cols to this links file's sources/targets
        #[arg(long, value_name = "FILE")]
        links: Option<PathBuf>,
        /// sum | noisy-or | sum-clamp
        #[arg(long, default_value = "noisy-or")]
        mode: String,
        /// product | min
        #[arg(long, default_value = "product")]
        combiner: String,
        /// Drop values with frequency below this floor
        #[arg(long)]
        min_vfre: Option<f64>,
        /// Strip ^^datatype suffixes before comparing values
        #[arg(long)]
        strip_datatype: bool,
        /// Strip @lang suffixes before comparing values
        #[arg(long)]
        strip_lang: bool,
        /// Output .simsp path (sidecars .rows/.cols written next to it)
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },

    /// Dense name-trigram similarity matrix (built-in encoder stand-in)
    EncodeBaseline {
        #[command(flatten)]
        kgs: KgPairArgs,
        /// Restrict rows/cols to this links file's sources/targets
        #[arg(long, value_name = "FILE")]
        links: Option<PathBuf>,
        /// Output .easim path
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },

    /// Validate an external encoder matrix, optionally rescale to [0,1]
    ImportMatrix {
        /// Input .easim file
        #[arg(long, value_name = "FILE")]
        matrix: PathBuf,
        #[command(flatten)]
        kgs: KgPairArgs,
        /// Apply global min-max rescaling to [0,1]
        #[arg(long)]
        normalize: bool,
        /// Output .easim path
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },

    /// Fuse encoder and attribute matrices
    Combine {
        #[command(subcommand)]
        method: CombineMethod,
    },

    /// Search PS confidence parameters on a validation split
    GridSearch {
        /// Encoder matrix (.easim); min-max normalized before use
        #[arg(long, value_name = "FILE")]
        ea: PathBuf,
        /// Attribute matrix (.simsp)
        #[arg(long, value_name = "FILE")]
        at: PathBuf,
        /// Validation links
        #[arg(long, value_name = "FILE")]
        valid: PathBuf,
        /// Grid: start:end:step or comma list
        #[arg(long, default_value = "0.05:0.95:0.05")]
        grid: String,
        /// Surface TSV: c_ea, c_at, hits@1
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },

    /// Rank a matrix (or score predictions) against gold links
    Evaluate {
        /// Similarity matrix (.easim or .simsp)
        #[arg(long, value_name = "FILE", conflicts_with = "predictions")]
        matrix: Option<PathBuf>,
        /// Top-1 predictions TSV (source, target[, origin])
        #[arg(long, value_name = "FILE")]
        predictions: Option<PathBuf>,
        /// Gold links of the evaluated split
        #[arg(long, value_name = "FILE")]
        links: PathBuf,
        /// Hits@k cutoffs
        #[arg(long, default_value = "1,10")]
        k: String,
        /// Report TSV output (stdout table is always printed)
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        /// Per-source rank TSV
        #[arg(long, value_name = "FILE")]
        ranks_out: Option<PathBuf>,
        /// Average source-to-target and target-to-source metrics
        #[arg(long)]
        bidirectional: bool,
        /// Dataset label for the report
        #[arg(long, default_value = "")]
        dataset: String,
        /// Method label for the report
        #[arg(long, default_value = "")]
        method: String,
    },

    /// Run the full pipeline from a config file
    Run {
        /// Flat key=value experiment config
        #[arg(long, value_name = "FILE")]
        config: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
enum CombineMethod {
    /// Belief-revision matrix combination
    Ps {
        /// Encoder matrix (.easim); min-max normalized before use
        #[arg(long, value_name = "FILE")]
        ea: PathBuf,
        /// Attribute matrix (.simsp), frequency domain
        #[arg(long, value_name = "FILE")]
        at: PathBuf,
        /// Encoder confidence
        #[arg(long)]
        c_ea: f64,
        /// Attribute confidence
        #[arg(long)]
        c_at: f64,
        /// Combined matrix output (.easim)
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
    /// Result correction of encoder top-1 predictions
    Rc {
        /// Encoder matrix (.easim)
        #[arg(long, value_name = "FILE")]
        ea: PathBuf,
        /// Attribute matrix (.simsp)
        #[arg(long, value_name = "FILE")]
        at: PathBuf,
        /// Attribute-score confidence threshold
        #[arg(long)]
        tau: f64,
        /// Required gap over the second-best attribute score
        #[arg(long, default_value_t = 0.0)]
        margin: f64,
        /// Predictions TSV output (source, target, origin)
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
}

pub fn parse() -> std::result::Result<Cli, clap::Error> {
    Cli::try_parse()
}

/// Entity lists for matrix rows/cols: a links file restricts them to
/// its sources/targets, otherwise every entity participates.
fn row_col_ids(
    kg1: &KnowledgeGraph,
    kg2: &KnowledgeGraph,
    links: Option<&Path>,
) -> Result<(Vec<EntityId>, Vec<EntityId>)> {
    match links {
        None => Ok((attrsim::all_entities(kg1), attrsim::all_entities(kg2))),
        Some(path) => {
            let raw = kg::read_link_file(path)?;
            let mut rows = Vec::new();
            let mut cols = Vec::new();
            let mut seen_rows = std::collections::HashSet::new();
            let mut seen_cols = std::collections::HashSet::new();
            for (s, t) in &raw {
                let r = kg1
                    .entity(s)
                    .ok_or_else(|| Error::UnknownSurface { surface: s.clone() })?;
                let c = kg2
                    .entity(t)
                    .ok_or_else(|| Error::UnknownSurface { surface: t.clone() })?;
                if seen_rows.insert(r) {
                    rows.push(r);
                }
                if seen_cols.insert(c) {
                    cols.push(c);
                }
            }
            Ok((rows, cols))
        }
    }
}

fn load_matrix(path: &Path) -> Result<SimilarityMatrix> {
    if path.extension().is_some_and(|e| e == "simsp") {
        matrix::read_simsp(path)
    } else {
        matrix::read_easim(path)
    }
}

fn attr_matrix_for_combination(path: &Path) -> Result<SimilarityMatrix> {
    let at = matrix::read_simsp(path)?;
    if at.domain() != matrix::ScoreDomain::FrequencyNormalized {
        return Err(Error::NotFrequencyNormalized {
            context: format!(
                "{}: scores exceed [0,1]; rebuild with --mode noisy-or or sum-clamp",
                path.display()
            ),
        });
    }
    Ok(at)
}

/// Projects the attribute matrix onto the encoder matrix's row/col
/// order so the two can be combined cellwise.
fn harmonized(ea: &SimilarityMatrix, at: &SimilarityMatrix) -> SimilarityMatrix {
    at.project_onto(ea.row_surfaces(), ea.col_surfaces())
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ingest {
            rel,
            attr,
            rel2,
            attr2,
            links,
            ratio,
            seed,
            split_dir,
            report,
        } => {
            let kg1 = kg::load_kg(&rel, &attr)?;
            let mut graphs = vec![("kg1", kg1)];
            if let (Some(r2), Some(a2)) = (rel2, attr2) {
                graphs.push(("kg2", kg::load_kg(&r2, &a2)?));
            }
            if report {
                for (name, g) in &graphs {
                    let s = g.stats();
                    println!("{name}\tentities\t{}", s.entities);
                    println!("{name}\trelations\t{}", s.relations);
                    println!("{name}\tattributes\t{}", s.attributes);
                    println!("{name}\tvalues\t{}", s.values);
                    println!("{name}\trel_triples\t{}", s.rel_triples);
                    println!("{name}\tattr_triples\t{}", s.attr_triples);
                }
            }
            if let Some(links_path) = links {
                let ratio = pipeline::parse_ratio(&ratio)?;
                if graphs.len() != 2 {
                    return Err(Error::Config {
                        reason: "splitting links requires --rel2/--attr2".into(),
                    });
                }
                let (g1, g2) = (&graphs[0].1, &graphs[1].1);
                let alignment = kg::load_alignment(&links_path, g1, g2, ratio, seed)?;
                if let Some(dir) = split_dir {
                    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
                    for (name, split) in [
                        ("links.train", kg::Split::Train),
                        ("links.valid", kg::Split::Validation),
                        ("links.test", kg::Split::Test),
                    ] {
                        kg::write_link_file(
                            &dir.join(name),
                            &alignment.split_surfaces(split, g1, g2),
                        )?;
                    }
                }
                println!(
                    "links\t{}\ttrain\t{}\tvalid\t{}\ttest\t{}",
                    alignment.len(),
                    alignment.split_pairs(kg::Split::Train).len(),
                    alignment.split_pairs(kg::Split::Validation).len(),
                    alignment.split_pairs(kg::Split::Test).len()
                );
            }
            Ok(())
        }

        Command::Coverage {
            kgs,
            links,
            out,
            pairs_out,
        } => {
            let (kg1, kg2) = kgs.load()?;
            let raw = kg::read_link_file(&links)?;
            let mut pairs = Vec::with_capacity(raw.len());
            for (s, t) in &raw {
                pairs.push((
                    kg1.entity(s)
                        .ok_or_else(|| Error::UnknownSurface { surface: s.clone() })?,
                    kg2.entity(t)
                        .ok_or_else(|| Error::UnknownSurface { surface: t.clone() })?,
                ));
            }
            let profile = coverage::profile(&kg1, &kg2, &pairs)?;
            let pct = profile.percentages();
            let lines: Vec<String> = pct
                .iter()
                .enumerate()
                .map(|(i, p)| format!("{:.1}\t{p}", i as f64 / 10.0))
                .collect();
            kg::write_lines(&out, &lines)?;
            if let Some(pairs_path) = pairs_out {
                let lines: Vec<String> = profile
                    .pairs
                    .iter()
                    .map(|p| {
                        format!(
                            "{}\t{}\t{}\t{}",
                            kg1.entity_surface(p.source),
                            kg2.entity_surface(p.target),
                            p.coverage,
                            if p.degenerate { "degenerate" } else { "ok" }
                        )
                    })
                    .collect();
                kg::write_lines(&pairs_path, &lines)?;
            }
            Ok(())
        }

        Command::Heterogenize {
            kgs,
            links,
            target,
            min_degree,
            seed,
            alternate_sides,
            out_dir,
        } => {
            let (kg1, kg2) = kgs.load()?;
            let raw = kg::read_link_file(&links)?;
            let mut pairs = Vec::with_capacity(raw.len());
            for (s, t) in &raw {
                pairs.push((
                    kg1.entity(s)
                        .ok_or_else(|| Error::UnknownSurface { surface: s.clone() })?,
                    kg2.entity(t)
                        .ok_or_else(|| Error::UnknownSurface { surface: t.clone() })?,
                ));
            }
            let cfg = HeterogenizeConfig {
                target_max_coverage: target,
                min_degree,
                seed,
                alternate_sides,
            };
            let outcome = coverage::heterogenize(&kg1, &kg2, &pairs, &cfg)?;
            fs::create_dir_all(&out_dir).map_err(io_err(&out_dir))?;
            kg::write_kg(
                &outcome.kg1,
                &out_dir.join("rel_triples_1"),
                &out_dir.join("attr_triples_1"),
            )?;
            kg::write_kg(
                &outcome.kg2,
                &out_dir.join("rel_triples_2"),
                &out_dir.join("attr_triples_2"),
            )?;
            let removal_lines: Vec<String> = outcome
                .removals
                .iter()
                .map(|r| format!("{}\t{}\t{}\t{}", r.graph, r.head, r.relation, r.tail))
                .collect();
            kg::write_lines(&out_dir.join("removals.tsv"), &removal_lines)?;
            let unreached_lines: Vec<String> = outcome
                .unreached
                .iter()
                .map(|u| format!("{}\t{}\t{}", u.source, u.target, u.coverage))
                .collect();
            kg::write_lines(&out_dir.join("unreached.tsv"), &unreached_lines)?;
            println!(
                "removed\t{}\tunreached\t{}",
                outcome.removals.len(),
                outcome.unreached.len()
            );
            Ok(())
        }

        Command::AttrSim {
            kgs,
            links,
            mode,
            combiner,
            min_vfre,
            strip_datatype,
            strip_lang,
            out,
        } => {
            let (kg1, kg2) = kgs.load()?;
            let (rows, cols) = row_col_ids(&kg1, &kg2, links.as_deref())?;
            let norm = NormalizeOptions {
                strip_datatype,
                strip_lang,
                ..NormalizeOptions::default()
            };
            let cfg = AttrSimConfig {
                mode: pipeline::parse_mode(&mode)?,
                combiner: pipeline::parse_combiner(&combiner)?,
                min_vfre,
            };
            let idx1 = attrsim::build_index(&kg1, &norm);
            let idx2 = attrsim::build_index(&kg2, &norm);
            let m = attrsim::build_attr_matrix(&kg1, &kg2, &idx1, &idx2, &rows, &cols, &cfg)?;
            matrix::write_simsp(&m, &out)?;
            println!(
                "rows\t{}\tcols\t{}\tentries\t{}",
                m.n_rows(),
                m.n_cols(),
                m.sparse_entries().map_or(0, <[_]>::len)
            );
            Ok(())
        }

        Command::EncodeBaseline { kgs, links, out } => {
            let (kg1, kg2) = kgs.load()?;
            let (rows, cols) = row_col_ids(&kg1, &kg2, links.as_deref())?;
            let m = encoder::baseline_literal_encoder(&kg1, &kg2, &rows, &cols)?;
            matrix::write_easim(&m, &out)?;
            println!("rows\t{}\tcols\t{}", m.n_rows(), m.n_cols());
            Ok(())
        }

        Command::ImportMatrix {
            matrix: matrix_path,
            kgs,
            normalize,
            out,
        } => {
            let (kg1, kg2) = kgs.load()?;
            let mut m = encoder::load_encoder_matrix(&matrix_path, &kg1, &kg2)?;
            if normalize {
                m = m.minmax_to_frequency()?;
            }
            matrix::write_easim(&m, &out)?;
            println!("rows\t{}\tcols\t{}", m.n_rows(), m.n_cols());
            Ok(())
        }

        Command::Combine { method } => match method {
            CombineMethod::Ps {
                ea,
                at,
                c_ea,
                c_at,
                out,
            } => {
                let enc = matrix::read_easim(&ea)?.minmax_to_frequency()?;
                let at = harmonized(&enc, &attr_matrix_for_combination(&at)?);
                let combined = interaction::ps_combine(&enc, &at, PsConfig::new(c_ea, c_at))?;
                matrix::write_easim(&combined, &out)?;
                Ok(())
            }
            CombineMethod::Rc {
                ea,
                at,
                tau,
                margin,
                out,
            } => {
                let enc = matrix::read_easim(&ea)?;
                let at = harmonized(&enc, &attr_matrix_for_combination(&at)?);
                let cfg = RcConfig::new(tau, margin)?;
                let preds = interaction::argmax_predictions(&enc);
                let corrected = interaction::rc_combine(&preds, &at, &cfg);
                let lines: Vec<String> = corrected
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
                kg::write_lines(&out, &lines)?;
                println!(
                    "predictions\t{}\toverridden\t{}",
                    corrected.len(),
                    corrected.iter().filter(|p| p.overridden).count()
                );
                Ok(())
            }
        },

        Command::GridSearch {
            ea,
            at,
            valid,
            grid,
            out,
        } => {
            let enc = matrix::read_easim(&ea)?.minmax_to_frequency()?;
            let at = harmonized(&enc, &attr_matrix_for_combination(&at)?);
            let grid = pipeline::parse_grid(&grid)?;
            let pairs = kg::read_link_file(&valid)?;
            let res = interaction::grid_search(&enc, &at, &pairs, &grid)?;
            let lines: Vec<String> = res
                .surface
                .iter()
                .map(|p| format!("{}\t{}\t{}", p.c_ea, p.c_at, p.hits1))
                .collect();
            kg::write_lines(&out, &lines)?;
            println!(
                "best\tc_ea\t{}\tc_at\t{}\thits@1\t{}",
                res.best.c_ea, res.best.c_at, res.best_hits1
            );
            Ok(())
        }

        Command::Evaluate {
            matrix: matrix_path,
            predictions,
            links,
            k,
            out,
            ranks_out,
            bidirectional,
            dataset,
            method,
        } => {
            let pairs = kg::read_link_file(&links)?;
            let report_text;
            match (matrix_path, predictions) {
                (Some(mp), None) => {
                    let m = load_matrix(&mp)?;
                    let ks = pipeline::parse_ks(&k)?;
                    let ranks = eval::rank(&m, &pairs)?;
                    let mut report = eval::metrics(&pairs, &ranks, &ks, &dataset, &method, "")?;
                    if bidirectional {
                        let swapped: Vec<(String, String)> =
                            pairs.iter().map(|(s, t)| (t.clone(), s.clone())).collect();
                        let rev = eval::rank(&m.transposed(), &swapped)?;
                        let rev_report = eval::metrics(&swapped, &rev, &ks, &dataset, &method, "")?;
                        for (h, rh) in report.hits_at.iter_mut().zip(&rev_report.hits_at) {
                            h.1 = (h.1 + rh.1) / 2.0;
                        }
                        report.mrr = (report.mrr + rev_report.mrr) / 2.0;
                    }
                    if let Some(ranks_path) = ranks_out {
                        let lines: Vec<String> = report
                            .per_source
                            .iter()
                            .map(|(s, r)| format!("{s}\t{r}"))
                            .collect();
                        kg::write_lines(&ranks_path, &lines)?;
                    }
                    print!("{}", report.to_table());
                    report_text = report.to_tsv();
                }
                (None, Some(pp)) => {
                    let text = fs::read_to_string(&pp).map_err(io_err(&pp))?;
                    let mut preds = Vec::new();
                    for (i, line) in text.lines().enumerate() {
                        if line.is_empty() {
                            continue;
                        }
                        let fields: Vec<&str> = line.split('\t').collect();
                        if fields.len() < 2 {
                            return Err(Error::LinkArity {
                                path: pp.clone(),
                                line: i + 1,
                                found: fields.len(),
                            });
                        }
                        preds.push((fields[0].to_owned(), fields[1].to_owned()));
                    }
                    let hits1 = eval::metrics_top1(&preds, &pairs)?;
                    println!("H@1\n{:.1}", hits1 * 100.0);
                    report_text = format!(
                        "# dataset={dataset}\n# method={method}\n# config=\nhits@1\t{hits1}\n"
                    );
                }
                _ => {
                    return Err(Error::Config {
                        reason: "evaluate needs exactly one of --matrix or --predictions".into(),
                    })
                }
            }
            if let Some(out_path) = out {
                fs::write(&out_path, report_text).map_err(io_err(&out_path))?;
            }
            Ok(())
        }

        Command::Run { config } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            let outcome = pipeline::run_pipeline(&cfg)?;
            print!("{}", outcome.to_table());
            Ok(())
        }
    }
}
