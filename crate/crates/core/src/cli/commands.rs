//! The five commands. Each one writes its manifest under
//! `<output_dir>/manifest/` whether it succeeds or not.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::data::{
    cold_input, filter_sparse, parse_canonical, parse_csv_ratings, parse_movielens, split_users, write_canonical,
    DatasetSplit, InteractionLog, RatingVector,
};
use crate::gan::{load_checkpoint, save_checkpoint, train, write_history_csv, GanModel};
use crate::metrics::{evaluate, write_per_user_csv, MetricsAtK, MetricsReport};
use crate::recommend::{popularity_baseline, recommend, RandomScorer};
use crate::rejuvenate::RejuvenationMode;
use crate::seed;

use super::config::{config_diff, DataFormat, RunConfig};
use super::manifest::{write_atomic, DatasetFingerprint, RunManifest};
use super::CliError;

/// Folder layout under the output directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputLayout {
    pub root: PathBuf,
}

impl OutputLayout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn checkpoints(&self) -> PathBuf {
        self.root.join("checkpoints")
    }

    pub fn reports(&self) -> PathBuf {
        self.root.join("reports")
    }

    pub fn history(&self) -> PathBuf {
        self.root.join("history")
    }

    pub fn manifests(&self) -> PathBuf {
        self.root.join("manifest")
    }

    pub fn checkpoint(&self) -> PathBuf {
        self.checkpoints().join("model.cgan")
    }

    pub fn manifest(&self, command: &str) -> PathBuf {
        self.manifests().join(format!("{command}.json"))
    }
}

/// Runs `body` with a fresh manifest and writes the manifest afterwards,
/// recording the failure reason when `body` fails.
fn with_manifest<T>(
    cfg: &RunConfig,
    command: &str,
    body: impl FnOnce(&mut RunManifest, &OutputLayout) -> Result<T, CliError>,
) -> Result<T, CliError> {
    let layout = OutputLayout::new(&cfg.output_dir);
    let mut manifest = RunManifest::new(command, &cfg.hash(), cfg.seed);
    prepare_layout(&layout)?;
    let result = body(&mut manifest, &layout);
    if let Err(e) = &result {
        manifest.fail(e.to_string(), e.exit_code());
    }
    manifest.write(&layout.manifest(command))?;
    result
}

fn relative(layout: &OutputLayout, path: &Path) -> String {
    path.strip_prefix(&layout.root).unwrap_or(path).display().to_string()
}

fn write_artifact(
    manifest: &mut RunManifest,
    layout: &OutputLayout,
    path: &Path,
    bytes: &[u8],
) -> Result<(), CliError> {
    write_atomic(path, bytes)?;
    manifest.artifacts.push(relative(layout, path));
    Ok(())
}

/// Parses a ratings file in the given format.
pub fn parse_ratings(bytes: &[u8], format: DataFormat) -> Result<InteractionLog, CliError> {
    Ok(match format {
        DataFormat::Movielens => parse_movielens(bytes)?,
        DataFormat::Csv => parse_csv_ratings(bytes)?,
        DataFormat::Canonical => parse_canonical(bytes)?,
    })
}

/// The raw and the filtered log.
fn load_dataset(cfg: &RunConfig, manifest: &mut RunManifest) -> Result<(InteractionLog, InteractionLog), CliError> {
    let path = &cfg.data.path;
    let bytes = fs::read(path).map_err(|e| CliError::Config(format!("data file {}: {e}", path.display())))?;
    let raw = manifest.time("parse", || parse_ratings(&bytes, cfg.data.format))?;
    manifest.dataset = Some(DatasetFingerprint::of(path, &bytes, raw.len()));
    let filtered = manifest.time("filter", || {
        filter_sparse(&raw, cfg.data.min_user_interactions, cfg.data.min_item_raters)
    })?;
    Ok((raw, filtered))
}

/// The train/test split every command uses for `cfg`.
pub fn split_for(cfg: &RunConfig, log: &InteractionLog) -> Result<DatasetSplit, CliError> {
    if log.is_empty() {
        return Err(CliError::Data("no interactions left after filtering".into()));
    }
    Ok(split_users(
        log,
        cfg.data.train_fraction,
        seed::derive(cfg.seed, seed::SPLIT),
    )?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogStats {
    pub users: usize,
    pub items: usize,
    pub ratings: usize,
    /// `1 − ratings / (users · items)`; 0 for an empty log.
    pub sparsity: f64,
}

impl LogStats {
    pub fn of(log: &InteractionLog) -> Self {
        Self {
            users: log.num_users(),
            items: log.num_items(),
            ratings: log.len(),
            sparsity: log.sparsity(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IngestStats {
    pub raw: LogStats,
    pub filtered: LogStats,
}

impl IngestStats {
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<9} {:>8} {:>8} {:>10} {:>9}",
            "", "users", "items", "ratings", "sparsity"
        );
        for (name, s) in [("raw", self.raw), ("filtered", self.filtered)] {
            let _ = writeln!(
                out,
                "{:<9} {:>8} {:>8} {:>10} {:>8.2}%",
                name,
                s.users,
                s.items,
                s.ratings,
                100.0 * s.sparsity
            );
        }
        out
    }
}

/// Parses and filters the dataset, writes the canonical dump and the stats.
/// An empty input still writes all-zero stats, then fails.
pub fn cmd_ingest(cfg: &RunConfig) -> Result<IngestStats, CliError> {
    with_manifest(cfg, "ingest", |manifest, layout| {
        let (raw, filtered) = load_dataset(cfg, manifest)?;
        let stats = IngestStats {
            raw: LogStats::of(&raw),
            filtered: LogStats::of(&filtered),
        };
        let json = serde_json::to_string_pretty(&stats).expect("stats serialize") + "\n";
        write_artifact(
            manifest,
            layout,
            &layout.reports().join("ingest_stats.json"),
            json.as_bytes(),
        )?;
        if raw.is_empty() {
            return Err(CliError::Data(format!("{} holds no ratings", cfg.data.path.display())));
        }
        let mut dump = Vec::new();
        write_canonical(&filtered, &mut dump)?;
        write_artifact(manifest, layout, &layout.reports().join("dataset.tsv"), &dump)?;
        Ok(stats)
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub checkpoint: PathBuf,
    pub epochs_run: usize,
    pub best_epoch: Option<usize>,
    pub train_users: usize,
    pub test_users: usize,
}

fn train_model(cfg: &RunConfig, log: &InteractionLog, split: &DatasetSplit) -> Result<GanModel, CliError> {
    Ok(train(log, split, &cfg.rejuvenation, &cfg.train_config(), &cfg.model)?)
}

/// Split, train, and write the best checkpoint and the loss history.
pub fn cmd_train(cfg: &RunConfig) -> Result<TrainOutcome, CliError> {
    with_manifest(cfg, "train", |manifest, layout| {
        let (_, log) = load_dataset(cfg, manifest)?;
        let split = split_for(cfg, &log)?;
        let model = manifest.time("train", || train_model(cfg, &log, &split))?;
        let path = layout.checkpoint();
        save_checkpoint(&model, &path, &cfg.hash(), cfg.evaluation.cold_keep, log.items().ids())?;
        manifest.artifacts.push(relative(layout, &path));
        manifest
            .artifacts
            .push(relative(layout, &crate::gan::manifest_path(&path)));
        let mut csv = Vec::new();
        write_history_csv(&model.history, &mut csv)?;
        write_artifact(manifest, layout, &layout.history().join("train.csv"), &csv)?;
        Ok(TrainOutcome {
            checkpoint: path,
            epochs_run: model.history.len(),
            best_epoch: model.best_epoch,
            train_users: split.train_users.len(),
            test_users: split.test_users.len(),
        })
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineReports {
    pub popularity: MetricsReport,
    pub random: MetricsReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluateOutcome {
    pub report: MetricsReport,
    pub baselines: Option<BaselineReports>,
}

/// Scores the test cohort with a checkpoint (default: the one `train`
/// wrote) and writes `metrics.json`, `metrics.txt` and optionally
/// `per_user.csv` and `baselines.json`.
pub fn cmd_evaluate(cfg: &RunConfig, checkpoint: Option<&Path>, baselines: bool) -> Result<EvaluateOutcome, CliError> {
    with_manifest(cfg, "evaluate", |manifest, layout| {
        let (_, log) = load_dataset(cfg, manifest)?;
        let split = split_for(cfg, &log)?;
        let path = checkpoint.map(Path::to_path_buf).unwrap_or_else(|| layout.checkpoint());
        let loaded = load_checkpoint(&path)?;
        if loaded.manifest.item_ids != log.items().ids() {
            return Err(CliError::Data(format!(
                "checkpoint {} was trained on a different item catalogue",
                path.display()
            )));
        }
        let protocol = cfg.protocol();
        let mut eval = manifest.time("evaluate", || evaluate(&loaded.generator, &log, &split, &protocol))?;
        eval.report.config_hash = cfg.hash();
        let reports = layout.reports();
        write_artifact(
            manifest,
            layout,
            &reports.join("metrics.json"),
            (eval.report.to_json() + "\n").as_bytes(),
        )?;
        write_artifact(
            manifest,
            layout,
            &reports.join("metrics.txt"),
            eval.report.to_table().as_bytes(),
        )?;
        if cfg.evaluation.per_user_csv {
            let mut csv = Vec::new();
            write_per_user_csv(&eval.per_user, &mut csv)?;
            write_artifact(manifest, layout, &reports.join("per_user.csv"), &csv)?;
        }
        let baselines = if baselines {
            let popularity = popularity_baseline(&log, &split.train_users);
            let mut pop = evaluate(&popularity, &log, &split, &protocol)?.report;
            let mut rnd = evaluate(&RandomScorer { seed: cfg.seed }, &log, &split, &protocol)?.report;
            pop.config_hash = cfg.hash();
            rnd.config_hash = cfg.hash();
            let b = BaselineReports {
                popularity: pop,
                random: rnd,
            };
            let json = serde_json::to_string_pretty(&b).expect("reports serialize") + "\n";
            write_artifact(manifest, layout, &reports.join("baselines.json"), json.as_bytes())?;
            Some(b)
        } else {
            None
        };
        Ok(EvaluateOutcome {
            report: eval.report,
            baselines,
        })
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecommendedItem {
    pub rank: usize,
    pub item_id: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecommendOutcome {
    pub items: Vec<RecommendedItem>,
    /// Item ids in the input that the checkpoint does not know.
    pub unknown_items: Vec<String>,
}

/// Parses `item_id,rating,timestamp` lines; a first line with a non-numeric
/// rating is a header.
pub fn parse_user_ratings(text: &str) -> Result<Vec<(String, f64, u64)>, CliError> {
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let bad = |m: &str| CliError::Data(format!("line {}: {m}", idx + 1));
        if fields.len() != 3 {
            return Err(bad("expected item_id,rating,timestamp"));
        }
        let Ok(rating) = fields[1].parse::<f64>() else {
            if rows.is_empty() && idx == 0 {
                continue;
            }
            return Err(bad("rating is not a number"));
        };
        if !(1.0..=5.0).contains(&rating) {
            return Err(bad("rating outside [1, 5]"));
        }
        let ts = fields[2]
            .parse::<u64>()
            .map_err(|_| bad("timestamp is not an unsigned integer"))?;
        rows.push((fields[0].to_owned(), rating, ts));
    }
    Ok(rows)
}

/// Top-`k` unrated items for a new user described by `ratings_csv`. Only
/// the earliest `cold_keep` ratings (from the checkpoint) are used.
pub fn cmd_recommend(checkpoint: &Path, ratings_csv: &str, k: usize) -> Result<RecommendOutcome, CliError> {
    if k == 0 {
        return Err(CliError::Config("k must be positive".into()));
    }
    let loaded = load_checkpoint(checkpoint)?;
    let ids = &loaded.manifest.item_ids;
    let index: std::collections::HashMap<&str, usize> = ids.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let mut timeline = Vec::new();
    let mut unknown_items = Vec::new();
    let mut seen = std::collections::HashMap::new();
    for (id, rating, ts) in parse_user_ratings(ratings_csv)? {
        match index.get(id.as_str()) {
            // Repeated items keep the latest rating.
            Some(&item) => match seen.get(&item) {
                Some(&(t, _)) if t > ts => {}
                _ => {
                    seen.insert(item, (ts, rating));
                }
            },
            None => unknown_items.push(id),
        }
    }
    for (&item, &(ts, rating)) in &seen {
        timeline.push((ts, item, rating));
    }
    timeline.sort_by_key(|a| (a.0, a.1));
    let pairs: Vec<(usize, f64)> = timeline.iter().map(|&(_, i, r)| (i, r)).collect();
    let warm = RatingVector::from_timeline(ids.len(), &pairs)?;
    let cold = cold_input(&warm, loaded.manifest.cold_keep);
    let list = recommend(&loaded.generator, 0, &cold, k)?;
    let items = list
        .items
        .iter()
        .zip(&list.scores)
        .enumerate()
        .map(|(r, (&item, &score))| RecommendedItem {
            rank: r + 1,
            item_id: ids[item].clone(),
            score,
        })
        .collect();
    Ok(RecommendOutcome { items, unknown_items })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub seed: u64,
    pub mode: RejuvenationMode,
    pub relevant_loss_weight: f64,
    pub config_hash: String,
    /// Hex SHA-256 of the train and test user lists.
    pub split_hash: String,
    pub metrics: Vec<MetricsAtK>,
    /// Config keys that differ from the seed's first variant.
    pub changed_keys: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationReport {
    pub rows: Vec<AblationRow>,
    /// True when every seed's variants share one split and differ only in
    /// `rejuvenation.mode` and `training.relevant_loss_weight`.
    pub audit_passed: bool,
}

/// Variant order within each seed.
pub const ABLATION_GRID: [(RejuvenationMode, f64); 4] = [
    (RejuvenationMode::TimeBased, 1.0),
    (RejuvenationMode::TimeBased, 0.0),
    (RejuvenationMode::RandomUniform, 1.0),
    (RejuvenationMode::RandomUniform, 0.0),
];

const TOGGLED_KEYS: [&str; 2] = ["rejuvenation.mode", "training.relevant_loss_weight"];

fn split_hash(split: &DatasetSplit) -> String {
    let mut h = Sha256::new();
    for u in &split.train_users {
        h.update((*u as u64).to_le_bytes());
    }
    h.update(u64::MAX.to_le_bytes());
    for u in &split.test_users {
        h.update((*u as u64).to_le_bytes());
    }
    hex::encode(h.finalize())
}

impl AblationReport {
    /// Mean over seeds of every variant, one row per variant.
    pub fn to_table(&self, ks: &[usize]) -> String {
        let mut out = String::new();
        let _ = write!(out, "{:<15} {:>6}", "mode", "lambda");
        for k in ks {
            let _ = write!(
                out,
                " {:>8} {:>8} {:>8}",
                format!("P@{k}"),
                format!("R@{k}"),
                format!("nDCG@{k}")
            );
        }
        out.push('\n');
        for (mode, weight) in ABLATION_GRID {
            let rows: Vec<&AblationRow> = self
                .rows
                .iter()
                .filter(|r| r.mode == mode && r.relevant_loss_weight == weight)
                .collect();
            if rows.is_empty() {
                continue;
            }
            let name = serde_json::to_value(mode).expect("mode serializes");
            let _ = write!(out, "{:<15} {:>6}", name.as_str().unwrap_or("?"), weight);
            for &k in ks {
                let mean = |f: fn(&MetricsAtK) -> f64| {
                    rows.iter()
                        .filter_map(|r| r.metrics.iter().find(|m| m.k == k).map(f))
                        .sum::<f64>()
                        / rows.len() as f64
                };
                let _ = write!(
                    out,
                    " {:>8.4} {:>8.4} {:>8.4}",
                    mean(|m| m.precision),
                    mean(|m| m.recall),
                    mean(|m| m.ndcg)
                );
            }
            out.push('\n');
        }
        let _ = writeln!(
            out,
            "seeds: {}  audit: {}",
            self.rows.len() / 4,
            if self.audit_passed { "ok" } else { "FAILED" }
        );
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("seed,mode,lambda,k,p,r,ndcg,config_hash,split_hash\n");
        for row in &self.rows {
            let mode = serde_json::to_value(row.mode).expect("mode serializes");
            for m in &row.metrics {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{}",
                    row.seed,
                    mode.as_str().unwrap_or("?"),
                    row.relevant_loss_weight,
                    m.k,
                    m.precision,
                    m.recall,
                    m.ndcg,
                    row.config_hash,
                    row.split_hash
                );
            }
        }
        out
    }
}

/// Runs the {time_based, random_uniform} × {λ = 1, λ = 0} grid for every
/// seed in `ablation.seeds`. Variants of one seed share the split.
pub fn cmd_ablate(cfg: &RunConfig) -> Result<AblationReport, CliError> {
    with_manifest(cfg, "ablate", |manifest, layout| {
        let (_, log) = load_dataset(cfg, manifest)?;
        let mut rows = Vec::new();
        let mut audit_passed = true;
        for &seed_value in &cfg.ablation.seeds {
            let base = RunConfig {
                seed: seed_value,
                ..cfg.clone()
            };
            let split = split_for(&base, &log)?;
            let split_id = split_hash(&split);
            let mut first: Option<RunConfig> = None;
            for (mode, weight) in ABLATION_GRID {
                let mut variant = base.clone();
                variant.rejuvenation.mode = mode;
                variant.training.relevant_loss_weight = weight;
                let reference = first.get_or_insert_with(|| variant.clone());
                let changed_keys = config_diff(reference, &variant);
                audit_passed &= changed_keys.iter().all(|k| TOGGLED_KEYS.contains(&k.as_str()));
                audit_passed &= split_for(&variant, &log)? == split;
                let phase = format!("seed {seed_value} {mode:?} lambda={weight}");
                let model = manifest.time(&phase, || train_model(&variant, &log, &split))?;
                let report = evaluate(&model.generator, &log, &split, &variant.protocol())?.report;
                rows.push(AblationRow {
                    seed: seed_value,
                    mode,
                    relevant_loss_weight: weight,
                    config_hash: variant.hash(),
                    split_hash: split_id.clone(),
                    metrics: report.metrics,
                    changed_keys,
                });
            }
        }
        let report = AblationReport { rows, audit_passed };
        let reports = layout.reports();
        let json = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
        write_artifact(manifest, layout, &reports.join("ablation.json"), json.as_bytes())?;
        write_artifact(
            manifest,
            layout,
            &reports.join("ablation.csv"),
            report.to_csv().as_bytes(),
        )?;
        write_artifact(
            manifest,
            layout,
            &reports.join("ablation.txt"),
            report.to_table(&cfg.evaluation.ks).as_bytes(),
        )?;
        Ok(report)
    })
}

/// Writes a recommendation list as `rank,item_id,score` lines.
pub fn write_recommendations<W: Write>(items: &[RecommendedItem], out: W) -> std::io::Result<()> {
    let mut out = BufWriter::new(out);
    for r in items {
        writeln!(out, "{},{},{}", r.rank, r.item_id, r.score)?;
    }
    out.flush()
}

/// Creates the four output folders.
pub fn prepare_layout(layout: &OutputLayout) -> std::io::Result<()> {
    for dir in [
        layout.checkpoints(),
        layout.reports(),
        layout.history(),
        layout.manifests(),
    ] {
        fs::create_dir_all(dir)?;
    }
    Ok(())
}
