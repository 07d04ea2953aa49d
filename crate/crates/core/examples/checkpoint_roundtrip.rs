//! Save a model to the binary checkpoint format, list its tensors from the
//! JSON manifest and load it back.
//!
//!     cargo run --example checkpoint_roundtrip

use coldgan::gan::{load_checkpoint, manifest_path, save_checkpoint, GanModel, ModelConfig, TrainConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join(format!("coldgan-checkpoint-{}", std::process::id()));
    let path = dir.join("model.cgan");
    let model_cfg = ModelConfig {
        generator_hidden: 16,
        discriminator_hidden: 8,
        ..Default::default()
    };
    let model = GanModel::new(12, &model_cfg, &TrainConfig::default())?;
    let item_ids: Vec<String> = (0..12).map(|i| format!("movie-{i}")).collect();
    let manifest = save_checkpoint(&model, &path, "example", 10, &item_ids)?;

    println!("{} bytes at {}", std::fs::metadata(&path)?.len(), path.display());
    println!("manifest at {}", manifest_path(&path).display());
    for t in &manifest.tensors {
        println!("  {:<30} {:?}", t.name, t.shape);
    }
    let loaded = load_checkpoint(&path)?;
    assert_eq!(loaded.generator, model.generator);
    assert_eq!(loaded.discriminator, model.discriminator);
    println!("reloaded generator and discriminator are identical");
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}
