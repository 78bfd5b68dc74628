//! Pipeline commands: inject, train, score, eval, run, sweep.
//!
//! All commands share one output-directory layout. `run` chains the four
//! stages in one process; each stage command alone picks up its inputs from
//! explicit flags or from the conventional artifacts a previous stage left
//! in the output directory, so the composition and the one-shot `run` are
//! interchangeable.

use std::path::{Path, PathBuf};

use cola_core::detector::{scores_from_rounds, train, AnomalyScores};
use cola_core::eval::{aggregate_runs, auc, roc_curve, sweep, SweepAxis};
use cola_core::graph::AttributedGraph;
use cola_core::inject::inject_combined;
use cola_core::model::ModelParams;
use cola_core::rng::{SeedStream, STREAM_NODE_BASE};
use cola_core::sample::{make_negative_pair, make_positive_pair};

use crate::config::ResolvedConfig;
use crate::error::{CliError, Result};
use crate::io::{cache, checkpoint, rounds, tables, text};
use crate::manifest::{GraphInfo, InjectionRecord, RunManifest};
use crate::parallel::{default_workers, infer_scores_parallel};

pub const INJECTED_EDGES: &str = "injected.edges";
pub const INJECTED_ATTRS: &str = "injected.attrs";
pub const INJECTED_LABELS: &str = "injected.labels";
pub const CHECKPOINT: &str = "checkpoint.bin";
pub const TRAIN_LOG: &str = "train_log.csv";
pub const ROUNDS: &str = "rounds.bin";
pub const SCORES: &str = "scores.csv";
pub const AUC_TXT: &str = "auc.txt";
pub const ROC_CSV: &str = "roc.csv";

fn ensure_out_dir(cfg: &ResolvedConfig) -> Result<()> {
    std::fs::create_dir_all(&cfg.out_dir).map_err(|source| CliError::Io {
        path: cfg.out_dir.clone(),
        source,
    })
}

fn require_file(path: &Path, what: &str) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::runtime(format!(
            "missing {what}: `{}` not found",
            path.display()
        )))
    }
}

/// Where a command takes its graph from.
enum GraphSource {
    Cache(PathBuf),
    Text {
        edges: PathBuf,
        attrs: PathBuf,
        labels: Option<PathBuf>,
    },
}

impl GraphSource {
    /// Explicit flags first; otherwise the injected artifacts of a previous
    /// stage in the output directory (when `fallback_injected`).
    fn resolve(cfg: &ResolvedConfig, fallback_injected: bool) -> Result<Self> {
        if let Some(graph) = &cfg.graph {
            return Ok(GraphSource::Cache(graph.clone()));
        }
        if let (Some(edges), Some(attrs)) = (&cfg.edges, &cfg.attrs) {
            return Ok(GraphSource::Text {
                edges: edges.clone(),
                attrs: attrs.clone(),
                labels: cfg.labels.clone(),
            });
        }
        if fallback_injected {
            let edges = cfg.out_dir.join(INJECTED_EDGES);
            let attrs = cfg.out_dir.join(INJECTED_ATTRS);
            let labels = cfg.out_dir.join(INJECTED_LABELS);
            if edges.is_file() && attrs.is_file() {
                return Ok(GraphSource::Text {
                    edges,
                    attrs,
                    labels: labels.is_file().then_some(labels),
                });
            }
        }
        Err(CliError::usage(
            "no graph input: pass --graph <cache> or --edges <file> --attrs <file>".to_string(),
        ))
    }

    fn load(&self, manifest: &mut RunManifest) -> Result<AttributedGraph> {
        let (graph, info) = match self {
            GraphSource::Cache(path) => {
                require_file(path, "graph cache")?;
                manifest.record_input(path);
                let g = cache::load_cache(path)?;
                let stats = g.stats();
                let info = GraphInfo {
                    n: stats.n,
                    m: stats.m,
                    f: stats.f,
                    mean_degree: stats.mean_degree,
                    raw_edge_lines: stats.m,
                    self_loops_skipped: 0,
                    storage_bytes: g.storage_bytes(),
                };
                (g, info)
            }
            GraphSource::Text { edges, attrs, labels } => {
                require_file(edges, "edge file")?;
                require_file(attrs, "attribute file")?;
                manifest.record_input(edges);
                manifest.record_input(attrs);
                if let Some(l) = labels {
                    require_file(l, "label file")?;
                    manifest.record_input(l);
                }
                let (g, report) = text::load_graph(edges, attrs, labels.as_deref())?;
                let stats = g.stats();
                let info = GraphInfo {
                    n: stats.n,
                    m: stats.m,
                    f: stats.f,
                    mean_degree: stats.mean_degree,
                    raw_edge_lines: report.raw_edge_lines,
                    self_loops_skipped: report.self_loops_skipped,
                    storage_bytes: g.storage_bytes(),
                };
                (g, info)
            }
        };
        eprintln!(
            "loaded graph: n={} m={} f={} mean_degree={:.2} (raw edge lines {}, self-loops skipped {})",
            info.n, info.m, info.f, info.mean_degree, info.raw_edge_lines, info.self_loops_skipped
        );
        manifest.graph = Some(info);
        Ok(graph)
    }
}

fn maybe_normalize(cfg: &ResolvedConfig, g: AttributedGraph) -> AttributedGraph {
    if cfg.normalize_attrs {
        eprintln!("applying row L2 normalization to attributes");
        g.l2_normalized()
    } else {
        g
    }
}

// ---------------------------------------------------------------- stages --

fn stage_inject(cfg: &ResolvedConfig, manifest: &mut RunManifest, g: &AttributedGraph) -> Result<AttributedGraph> {
    let seeds = cfg.seeds();
    let inject_cfg = cfg.injection_config(seeds.inject);
    let mut rng = SeedStream::new(seeds.inject, 0);
    let (injected, labels) = inject_combined(g, &inject_cfg, &mut rng)?;

    let edges_path = cfg.out_dir.join(INJECTED_EDGES);
    let attrs_path = cfg.out_dir.join(INJECTED_ATTRS);
    let labels_path = cfg.out_dir.join(INJECTED_LABELS);
    text::write_edges(&injected, &edges_path)?;
    text::write_attributes(&injected, &attrs_path)?;
    text::write_labels(&labels, &labels_path)?;

    let anomalous_nodes: Vec<usize> = labels
        .iter()
        .enumerate()
        .filter_map(|(v, &l)| (l != 0).then_some(v))
        .collect();
    eprintln!(
        "injected {} anomalies ({} structural cliques of {} nodes, {} contextual swaps)",
        anomalous_nodes.len(),
        cfg.clique_count,
        cfg.clique_size,
        cfg.clique_size * cfg.clique_count
    );
    manifest.injection = Some(InjectionRecord {
        clique_size: cfg.clique_size,
        clique_count: cfg.clique_count,
        candidates: cfg.candidates,
        seed: seeds.inject,
        anomalous_nodes,
    });
    manifest.record_stage("inject", vec![edges_path, attrs_path, labels_path]);
    Ok(injected)
}

fn stage_train(cfg: &ResolvedConfig, manifest: &mut RunManifest, g: &AttributedGraph) -> Result<ModelParams> {
    let seeds = cfg.seeds();
    let train_cfg = cfg.train_config(seeds.train);
    let epochs = train_cfg.epochs;
    eprintln!(
        "training: {} epochs, batch {}, lr {}, c={}, d={}",
        epochs, train_cfg.batch_size, train_cfg.learning_rate, train_cfg.subgraph_size, train_cfg.embedding_dim
    );
    let (params, report) = train(g, &train_cfg)?;
    if let (Some(first), Some(last)) = (report.losses.first(), report.losses.last()) {
        eprintln!("loss: {first:.4} -> {last:.4} over {} iterations", report.losses.len());
    }

    let ckpt_path = cfg.out_dir.join(CHECKPOINT);
    checkpoint::save_checkpoint(&params, &ckpt_path)?;
    checkpoint::save_sidecar(
        &checkpoint::CheckpointSidecar {
            config_hash: cfg.hash(),
            config: cfg.clone(),
        },
        &ckpt_path,
    )?;
    let log_path = cfg.out_dir.join(TRAIN_LOG);
    tables::write_train_log(&report.losses, &log_path)?;
    manifest.record_stage(
        "train",
        vec![ckpt_path.clone(), checkpoint::sidecar_path(&ckpt_path), log_path],
    );
    Ok(params)
}

fn stage_score(
    cfg: &ResolvedConfig,
    manifest: &mut RunManifest,
    g: &AttributedGraph,
    params: &ModelParams,
) -> Result<AnomalyScores> {
    let seeds = cfg.seeds();
    let infer_cfg = cfg.train_config(seeds.infer);
    let workers = cfg.workers.unwrap_or_else(default_workers);
    eprintln!(
        "scoring {} nodes, {} rounds, estimation {} over {}, {} workers",
        g.node_count(),
        infer_cfg.rounds,
        infer_cfg.estimation.name(),
        infer_cfg.score_source.name(),
        workers
    );
    let scores = infer_scores_parallel(g, params, &infer_cfg, workers)?;

    let rounds_path = cfg.out_dir.join(ROUNDS);
    rounds::save_rounds(&scores.pos_rounds, &scores.neg_rounds, &rounds_path)?;
    let scores_path = cfg.out_dir.join(SCORES);
    tables::write_scores_csv(&scores.scores, &scores_path)?;
    manifest.record_stage("score", vec![rounds_path, scores_path]);
    Ok(scores)
}

fn stage_eval(
    cfg: &ResolvedConfig,
    manifest: &mut RunManifest,
    scores: &[f64],
    labels: &[u8],
) -> Result<f64> {
    let value = auc(scores, labels)?;
    let curve = roc_curve(scores, labels)?;
    let auc_path = cfg.out_dir.join(AUC_TXT);
    let roc_path = cfg.out_dir.join(ROC_CSV);
    tables::write_auc_txt(value, &auc_path)?;
    tables::write_roc_csv(&curve, &roc_path)?;
    manifest.record_stage("eval", vec![auc_path, roc_path]);
    manifest.auc = Some(value);
    println!("AUC: {value:.4}");
    Ok(value)
}

// -------------------------------------------------------------- commands --

pub fn cmd_inject(cfg: &ResolvedConfig) -> Result<()> {
    ensure_out_dir(cfg)?;
    let mut manifest = RunManifest::begin_in(&cfg.out_dir, "inject", cfg);
    manifest.save(&cfg.out_dir)?;
    let g = GraphSource::resolve(cfg, false)?.load(&mut manifest)?;
    stage_inject(cfg, &mut manifest, &g)?;
    manifest.finish(&cfg.out_dir)
}

pub fn cmd_train(cfg: &ResolvedConfig) -> Result<()> {
    ensure_out_dir(cfg)?;
    let mut manifest = RunManifest::begin_in(&cfg.out_dir, "train", cfg);
    manifest.save(&cfg.out_dir)?;
    let g = GraphSource::resolve(cfg, true)?.load(&mut manifest)?;
    let g = maybe_normalize(cfg, g);
    stage_train(cfg, &mut manifest, &g)?;
    manifest.finish(&cfg.out_dir)
}

pub struct ScoreOptions {
    pub checkpoint: Option<PathBuf>,
    pub from_rounds: Option<PathBuf>,
    pub dump_pairs: Option<usize>,
}

pub fn cmd_score(cfg: &ResolvedConfig, opts: &ScoreOptions) -> Result<()> {
    ensure_out_dir(cfg)?;
    let mut manifest = RunManifest::begin_in(&cfg.out_dir, "score", cfg);
    manifest.save(&cfg.out_dir)?;

    if let Some(rounds_path) = &opts.from_rounds {
        // Re-estimate from stored round matrices; no sampling, no model.
        require_file(rounds_path, "rounds file")?;
        manifest.record_input(rounds_path);
        let (pos, neg) = rounds::load_rounds(rounds_path)?;
        let seeds = cfg.seeds();
        let infer_cfg = cfg.train_config(seeds.infer);
        let estimated = scores_from_rounds(&pos, &neg, infer_cfg.estimation, infer_cfg.score_source)?;
        let scores_path = cfg.out_dir.join(SCORES);
        tables::write_scores_csv(&estimated.scores, &scores_path)?;
        manifest.record_stage("score", vec![scores_path]);
        return manifest.finish(&cfg.out_dir);
    }

    let g = GraphSource::resolve(cfg, true)?.load(&mut manifest)?;
    let g = maybe_normalize(cfg, g);
    let ckpt_path = opts
        .checkpoint
        .clone()
        .unwrap_or_else(|| cfg.out_dir.join(CHECKPOINT));
    require_file(&ckpt_path, "checkpoint")?;
    manifest.record_input(&ckpt_path);
    let params = checkpoint::load_checkpoint(&ckpt_path)?;
    if params.attr_dim() != g.attr_dim() {
        return Err(CliError::runtime(format!(
            "checkpoint expects {} attribute dims but graph has {}",
            params.attr_dim(),
            g.attr_dim()
        )));
    }
    if let Ok(sidecar) = checkpoint::load_sidecar(&ckpt_path) {
        if sidecar.config.readout != cfg.readout {
            eprintln!(
                "warning: checkpoint was trained with readout `{}`, scoring with `{}`",
                sidecar.config.readout, cfg.readout
            );
        }
    }

    if let Some(count) = opts.dump_pairs {
        dump_pairs(cfg, &g, count)?;
    }
    stage_score(cfg, &mut manifest, &g, &params)?;
    manifest.finish(&cfg.out_dir)
}

pub fn cmd_eval(cfg: &ResolvedConfig, scores_path: Option<&Path>) -> Result<()> {
    ensure_out_dir(cfg)?;
    let mut manifest = RunManifest::begin_in(&cfg.out_dir, "eval", cfg);
    manifest.save(&cfg.out_dir)?;

    let scores_path = scores_path
        .map(Path::to_path_buf)
        .unwrap_or_else(|| cfg.out_dir.join(SCORES));
    require_file(&scores_path, "scores file")?;
    manifest.record_input(&scores_path);
    let scores = tables::read_scores_csv(&scores_path)?;

    let labels = resolve_labels(cfg, scores.len(), &mut manifest)?;
    stage_eval(cfg, &mut manifest, &scores, &labels)?;
    manifest.finish(&cfg.out_dir)
}

fn resolve_labels(cfg: &ResolvedConfig, n: usize, manifest: &mut RunManifest) -> Result<Vec<u8>> {
    let labels = if let Some(path) = &cfg.labels {
        require_file(path, "label file")?;
        manifest.record_input(path);
        text::read_labels(path)?
    } else if let Some(graph) = &cfg.graph {
        let g = cache::load_cache(graph)?;
        g.labels()
            .ok_or_else(|| CliError::runtime(format!("graph cache `{}` has no labels", graph.display())))?
            .to_vec()
    } else {
        let path = cfg.out_dir.join(INJECTED_LABELS);
        require_file(&path, "label file")?;
        manifest.record_input(&path);
        text::read_labels(&path)?
    };
    if labels.len() != n {
        return Err(CliError::runtime(format!(
            "{} labels for {} scores",
            labels.len(),
            n
        )));
    }
    Ok(labels)
}

pub fn cmd_run(cfg: &ResolvedConfig, score_opts: &ScoreOptions) -> Result<()> {
    ensure_out_dir(cfg)?;
    let mut manifest = RunManifest::begin_in(&cfg.out_dir, "run", cfg);
    manifest.save(&cfg.out_dir)?;

    let clean = GraphSource::resolve(cfg, false)?.load(&mut manifest)?;
    let injected = stage_inject(cfg, &mut manifest, &clean)?;
    manifest.save(&cfg.out_dir)?;

    let working = maybe_normalize(cfg, injected);
    let params = stage_train(cfg, &mut manifest, &working)?;
    manifest.save(&cfg.out_dir)?;

    if let Some(count) = score_opts.dump_pairs {
        dump_pairs(cfg, &working, count)?;
    }
    let scores = stage_score(cfg, &mut manifest, &working, &params)?;
    manifest.save(&cfg.out_dir)?;

    let labels = working
        .labels()
        .expect("injected graph carries labels")
        .to_vec();
    stage_eval(cfg, &mut manifest, &scores.scores, &labels)?;
    manifest.finish(&cfg.out_dir)
}

pub fn cmd_sweep(cfg: &ResolvedConfig, axis: SweepAxis, values: &[usize], runs: usize) -> Result<()> {
    ensure_out_dir(cfg)?;
    let mut manifest = RunManifest::begin_in(&cfg.out_dir, "sweep", cfg);
    manifest.save(&cfg.out_dir)?;

    let g = GraphSource::resolve(cfg, true)?.load(&mut manifest)?;
    let g = maybe_normalize(cfg, g);
    if g.labels().is_none() {
        return Err(CliError::runtime(
            "sweep needs ground-truth labels; run `inject` first or pass --labels".to_string(),
        ));
    }
    let base = cfg.train_config(cfg.seeds().base);
    eprintln!(
        "sweeping {} over {:?} with {} run(s) per value",
        axis.name(),
        values,
        runs
    );
    let rows = sweep(&g, &base, axis, values, runs)?;
    for row in &rows {
        eprintln!("  {}={} auc={:.4} (+/- {:.4})", axis.name(), row.value, row.mean_auc, row.std_auc);
    }
    let path = cfg.out_dir.join(format!("sweep_{}.csv", axis.name()));
    tables::write_sweep_csv(&rows, &path)?;
    manifest.record_stage("sweep", vec![path]);
    let aucs: Vec<f64> = rows.iter().map(|r| r.mean_auc).collect();
    if let Ok((mean, _)) = aggregate_runs(&aucs) {
        manifest.auc = Some(mean);
    }
    manifest.finish(&cfg.out_dir)
}

/// Debug dump: for the first `count` nodes, one positive and one negative
/// pair drawn from the node's inference stream, serialized as JSON.
fn dump_pairs(cfg: &ResolvedConfig, g: &AttributedGraph, count: usize) -> Result<()> {
    #[derive(serde::Serialize)]
    struct PairDump {
        target: usize,
        label: u8,
        sub_nodes: Vec<usize>,
        adjacency: Vec<Vec<f64>>,
        attributes: Vec<Vec<f64>>,
        target_attr: Vec<f64>,
    }
    fn to_rows(m: &cola_core::dense::Matrix) -> Vec<Vec<f64>> {
        (0..m.rows()).map(|r| m.row(r).to_vec()).collect()
    }

    let seeds = cfg.seeds();
    let infer_cfg = cfg.train_config(seeds.infer);
    let mut dumps = Vec::new();
    for node in 0..count.min(g.node_count()) {
        let mut rng = SeedStream::new(infer_cfg.seed, STREAM_NODE_BASE + node as u64);
        for positive in [true, false] {
            let pair = if positive {
                make_positive_pair(
                    g,
                    node,
                    infer_cfg.subgraph_size,
                    infer_cfg.restart_prob,
                    infer_cfg.effective_max_steps(),
                    &mut rng,
                )?
            } else {
                make_negative_pair(
                    g,
                    node,
                    infer_cfg.subgraph_size,
                    infer_cfg.restart_prob,
                    infer_cfg.effective_max_steps(),
                    &mut rng,
                )?
            };
            dumps.push(PairDump {
                target: pair.target,
                label: pair.label,
                sub_nodes: pair.sub_nodes.clone(),
                adjacency: to_rows(&pair.adjacency),
                attributes: to_rows(&pair.attributes),
                target_attr: pair.target_attr.clone(),
            });
        }
    }
    let path = cfg.out_dir.join("pairs.json");
    let json = serde_json::to_string_pretty(&dumps)
        .map_err(|e| CliError::Runtime(format!("pair dump serialization failed: {e}")))?;
    std::fs::write(&path, json).map_err(|source| CliError::Io { path, source })?;
    Ok(())
}
