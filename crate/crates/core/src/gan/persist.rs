//! Model checkpoints: the binary tensor file plus a JSON manifest next to it
//! (same path, `.json` extension).

use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::nn::checkpoint::{mlp_from_tensors, mlp_tensors, read_tensors, write_tensors, FORMAT_VERSION};
use crate::nn::Activation;

use super::{Discriminator, GanError, GanModel, Generator, ModelConfig};

const GENERATOR: &str = "generator";
const DISCRIMINATOR: &str = "discriminator";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorInfo {
    pub name: String,
    pub shape: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointManifest {
    pub format_version: u32,
    pub tensors: Vec<TensorInfo>,
    pub config_hash: String,
    pub num_items: usize,
    pub rating_scale: f64,
    pub model: ModelConfig,
    pub cold_keep: usize,
    pub best_epoch: Option<usize>,
    /// External item id of every item index.
    pub item_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedCheckpoint {
    pub generator: Generator,
    pub discriminator: Discriminator,
    pub manifest: CheckpointManifest,
}

pub fn manifest_path(checkpoint: &Path) -> PathBuf {
    checkpoint.with_extension("json")
}

/// Writes both networks of `model`. Optimizer state is not persisted.
pub fn save_checkpoint(
    model: &GanModel,
    path: &Path,
    config_hash: &str,
    cold_keep: usize,
    item_ids: &[String],
) -> Result<CheckpointManifest, GanError> {
    if item_ids.len() != model.num_items() {
        return Err(GanError::Manifest(format!(
            "{} item ids for a {}-item model",
            item_ids.len(),
            model.num_items()
        )));
    }
    let mut tensors = mlp_tensors(GENERATOR, &model.generator.net);
    tensors.extend(mlp_tensors(DISCRIMINATOR, &model.discriminator.net));
    let manifest = CheckpointManifest {
        format_version: FORMAT_VERSION,
        tensors: tensors
            .iter()
            .map(|t| TensorInfo {
                name: t.name.clone(),
                shape: t.dims.clone(),
            })
            .collect(),
        config_hash: config_hash.to_owned(),
        num_items: model.num_items(),
        rating_scale: model.generator.rating_scale,
        model: model.model_config.clone(),
        cold_keep,
        best_epoch: model.best_epoch,
        item_ids: item_ids.to_vec(),
    };
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    write_tensors(BufWriter::new(File::create(path)?), &tensors)?;
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| GanError::Manifest(e.to_string()))?;
    fs::write(manifest_path(path), json + "\n")?;
    Ok(manifest)
}

pub fn load_checkpoint(path: &Path) -> Result<LoadedCheckpoint, GanError> {
    let text = fs::read_to_string(manifest_path(path))?;
    let manifest: CheckpointManifest = serde_json::from_str(&text).map_err(|e| GanError::Manifest(e.to_string()))?;
    let tensors = read_tensors(BufReader::new(File::open(path)?))?;
    let acts = [manifest.model.hidden_activation, Activation::Identity];
    let generator = Generator::from_net(mlp_from_tensors(GENERATOR, &tensors, &acts)?, manifest.rating_scale)?;
    let discriminator = Discriminator::from_net(mlp_from_tensors(DISCRIMINATOR, &tensors, &acts)?)?;
    if generator.num_items() != manifest.num_items || manifest.item_ids.len() != manifest.num_items {
        return Err(GanError::Manifest("item count disagrees with tensors".into()));
    }
    Ok(LoadedCheckpoint {
        generator,
        discriminator,
        manifest,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gan::TrainConfig;

    #[test]
    fn save_and_load() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ckpt/model.cgan");
        let model_cfg = ModelConfig {
            generator_hidden: 3,
            discriminator_hidden: 2,
            hidden_activation: Activation::Sigmoid,
        };
        let model = GanModel::new(4, &model_cfg, &TrainConfig::default()).unwrap();
        let ids: Vec<String> = ["a", "b", "c", "d"].iter().map(|s| s.to_string()).collect();
        save_checkpoint(&model, &path, "abc", 10, &ids).unwrap();
        let loaded = load_checkpoint(&path).unwrap();
        assert_eq!(loaded.generator, model.generator);
        assert_eq!(loaded.discriminator, model.discriminator);
        assert_eq!(loaded.manifest.item_ids, ids);
        assert_eq!(loaded.manifest.tensors.len(), 8);
        assert_eq!(loaded.manifest.tensors[0].shape, vec![3, 4]);
        assert!(save_checkpoint(&model, &path, "abc", 10, &ids[..2]).is_err());
    }
}
