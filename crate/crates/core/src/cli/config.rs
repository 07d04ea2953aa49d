//! Run configuration: one TOML file, optional `key=value` overrides, and the
//! `COLDGAN_SEED` environment variable.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::gan::{ModelConfig, TrainConfig};
use crate::metrics::EvalProtocol;
use crate::rejuvenate::RejuvenationConfig;

use super::CliError;

pub const SEED_ENV: &str = "COLDGAN_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DataFormat {
    /// `user::item::rating::timestamp`
    #[default]
    Movielens,
    /// `user,item,rating,timestamp` with an optional header.
    Csv,
    /// The tab-separated dump written by `ingest`.
    Canonical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    /// Ratings file. Relative paths are taken from the config file's folder.
    pub path: PathBuf,
    pub format: DataFormat,
    pub min_user_interactions: usize,
    pub min_item_raters: usize,
    /// Share of users in the train cohort.
    pub train_fraction: f64,
}

impl Default for DataConfig {
    fn default() -> Self {
        Self {
            path: PathBuf::from("ratings.dat"),
            format: DataFormat::Movielens,
            min_user_interactions: 15,
            min_item_raters: 3,
            train_fraction: 0.8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluationConfig {
    pub ks: Vec<usize>,
    /// Earliest ratings kept as the cold input, for validation and test.
    pub cold_keep: usize,
    /// Also write one CSV row per user and k.
    pub per_user_csv: bool,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        let p = EvalProtocol::default();
        Self {
            ks: p.ks,
            cold_keep: p.cold_keep,
            per_user_csv: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AblationConfig {
    /// Root seeds; every grid cell runs once per seed.
    pub seeds: Vec<u64>,
}

impl Default for AblationConfig {
    fn default() -> Self {
        Self { seeds: vec![1, 2, 3] }
    }
}

/// Everything a command needs. Every field has a default, so an empty file
/// is a valid config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Root seed. Split, init, rejuvenation, shuffling and validation each
    /// use a named substream of it.
    pub seed: u64,
    pub output_dir: PathBuf,
    pub data: DataConfig,
    pub rejuvenation: RejuvenationConfig,
    pub model: ModelConfig,
    pub training: TrainConfig,
    pub evaluation: EvaluationConfig,
    pub ablation: AblationConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            output_dir: PathBuf::from("out"),
            data: DataConfig::default(),
            rejuvenation: RejuvenationConfig::default(),
            model: ModelConfig::default(),
            training: TrainConfig::default(),
            evaluation: EvaluationConfig::default(),
            ablation: AblationConfig::default(),
        }
    }
}

impl RunConfig {
    /// Parses TOML text and applies `key=value` overrides (dotted keys,
    /// values in TOML syntax, bare words read as strings).
    pub fn from_toml_str(text: &str, overrides: &[String]) -> Result<Self, CliError> {
        let mut value: toml::Value = text
            .parse::<toml::Table>()
            .map(toml::Value::Table)
            .map_err(|e| CliError::Config(e.to_string()))?;
        for spec in overrides {
            apply_override(&mut value, spec)?;
        }
        let cfg: RunConfig = value
            .try_into()
            .map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads a config file, applies overrides and `COLDGAN_SEED`, and
    /// resolves relative paths against the file's folder. `seed_flag`, when
    /// given, beats both the file and the environment.
    pub fn load(path: &Path, overrides: &[String], seed_flag: Option<u64>) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml_str(&text, overrides)?;
        if let Ok(raw) = std::env::var(SEED_ENV) {
            cfg.seed = raw
                .trim()
                .parse()
                .map_err(|_| CliError::Config(format!("{SEED_ENV}={raw:?} is not an unsigned integer")))?;
        }
        if let Some(seed) = seed_flag {
            cfg.seed = seed;
        }
        let base = path.parent().unwrap_or(Path::new("."));
        if cfg.data.path.is_relative() {
            cfg.data.path = base.join(&cfg.data.path);
        }
        if cfg.output_dir.is_relative() {
            cfg.output_dir = base.join(&cfg.output_dir);
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.data.min_user_interactions == 0 || self.data.min_item_raters == 0 {
            return bad("data filter thresholds must be at least 1".into());
        }
        if !(self.data.train_fraction > 0.0 && self.data.train_fraction < 1.0) {
            return bad(format!(
                "data.train_fraction {} must lie in (0, 1)",
                self.data.train_fraction
            ));
        }
        if self.evaluation.ks.is_empty() || self.evaluation.ks.contains(&0) {
            return bad("evaluation.ks must be non-empty and positive".into());
        }
        if self.ablation.seeds.is_empty() {
            return bad("ablation.seeds must not be empty".into());
        }
        self.rejuvenation
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        self.train_config()
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        Ok(())
    }

    /// Canonical TOML text. Loading it back yields an equal config.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Hex SHA-256 of [`RunConfig::to_toml`] with `output_dir` blanked, so
    /// the same experiment written elsewhere keeps its hash.
    pub fn hash(&self) -> String {
        let anchored = RunConfig {
            output_dir: PathBuf::new(),
            ..self.clone()
        };
        hex::encode(Sha256::digest(anchored.to_toml().as_bytes()))
    }

    /// The training block with the root seed and evaluation cold size.
    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            seed: self.seed,
            cold_keep: self.evaluation.cold_keep,
            ..self.training.clone()
        }
    }

    pub fn protocol(&self) -> EvalProtocol {
        EvalProtocol {
            ks: self.evaluation.ks.clone(),
            cold_keep: self.evaluation.cold_keep,
        }
    }

    /// Dotted key → TOML value for every leaf, for config-diff audits.
    pub fn flatten(&self) -> BTreeMap<String, String> {
        let value = toml::Value::try_from(self).expect("config serializes");
        let mut out = BTreeMap::new();
        flatten_into(&value, String::new(), &mut out);
        out
    }
}

fn flatten_into(value: &toml::Value, prefix: String, out: &mut BTreeMap<String, String>) {
    match value {
        toml::Value::Table(t) => {
            for (k, v) in t {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten_into(v, key, out);
            }
        }
        other => {
            out.insert(prefix, other.to_string());
        }
    }
}

/// Keys whose values differ between `a` and `b`.
pub fn config_diff(a: &RunConfig, b: &RunConfig) -> Vec<String> {
    let (fa, fb) = (a.flatten(), b.flatten());
    let mut keys: Vec<String> = fa
        .keys()
        .chain(fb.keys())
        .filter(|k| fa.get(*k) != fb.get(*k))
        .cloned()
        .collect();
    keys.sort();
    keys.dedup();
    keys
}

fn apply_override(root: &mut toml::Value, spec: &str) -> Result<(), CliError> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override {spec:?} is not key=value")))?;
    let parsed = parse_value(raw.trim());
    let parts: Vec<&str> = key.trim().split('.').collect();
    let mut node = root;
    for (i, part) in parts.iter().enumerate() {
        let table = node
            .as_table_mut()
            .ok_or_else(|| CliError::Config(format!("override {key:?}: {part:?} is not inside a table")))?;
        if i + 1 == parts.len() {
            table.insert((*part).to_owned(), parsed);
            return Ok(());
        }
        node = table
            .entry((*part).to_owned())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
    }
    Err(CliError::Config(format!("empty override key in {spec:?}")))
}

fn parse_value(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_owned()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rejuvenate::RejuvenationMode;

    #[test]
    fn empty_file_is_default() {
        assert_eq!(RunConfig::from_toml_str("", &[]).unwrap(), RunConfig::default());
    }

    #[test]
    fn round_trip_keeps_hash() {
        let text =
            "seed = 7\n[training]\nepochs = 3\ngenerator_lr = 0.0025\n[rejuvenation]\nmode = \"random_uniform\"\n";
        let cfg = RunConfig::from_toml_str(text, &[]).unwrap();
        let again = RunConfig::from_toml_str(&cfg.to_toml(), &[]).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(cfg.hash(), again.hash());
        assert_eq!(cfg.hash().len(), 64);
        assert_ne!(cfg.hash(), RunConfig::default().hash());
        let moved = RunConfig {
            output_dir: "elsewhere".into(),
            ..cfg.clone()
        };
        assert_eq!(moved.hash(), cfg.hash());
    }

    #[test]
    fn overrides_win() {
        let cfg = RunConfig::from_toml_str(
            "[training]\nepochs = 3\n",
            &[
                "training.epochs=9".into(),
                "rejuvenation.mode=random_uniform".into(),
                "evaluation.ks=[1, 3]".into(),
                "data.path=/tmp/x.csv".into(),
            ],
        )
        .unwrap();
        assert_eq!(cfg.training.epochs, 9);
        assert_eq!(cfg.rejuvenation.mode, RejuvenationMode::RandomUniform);
        assert_eq!(cfg.evaluation.ks, vec![1, 3]);
        assert_eq!(cfg.data.path, PathBuf::from("/tmp/x.csv"));
    }

    #[test]
    fn bad_configs_are_config_errors() {
        for text in [
            "nonsense = 1",
            "[rejuvenation]\np_min = 0.95",
            "[data]\ntrain_fraction = 1.0",
            "seed = ",
        ] {
            assert!(
                matches!(RunConfig::from_toml_str(text, &[]), Err(CliError::Config(_))),
                "{text}"
            );
        }
        assert!(RunConfig::from_toml_str("", &["noequals".into()]).is_err());
    }

    #[test]
    fn diff_names_changed_keys() {
        let a = RunConfig::default();
        let mut b = a.clone();
        b.training.relevant_loss_weight = 0.0;
        b.rejuvenation.mode = RejuvenationMode::RandomUniform;
        assert_eq!(
            config_diff(&a, &b),
            vec!["rejuvenation.mode", "training.relevant_loss_weight"]
        );
        assert!(config_diff(&a, &a).is_empty());
    }
}
