//! Train on a 50-user, 30-item dataset with two planted clusters and
//! compare test P@5 with a random ranking.
//!
//!     cargo run --release --example planted_clusters [seed]

use coldgan::data::split_users;
use coldgan::gan::{train, ModelConfig, TrainConfig};
use coldgan::metrics::{evaluate, expected_random_precision, EvalProtocol};
use coldgan::rejuvenate::RejuvenationConfig;
use coldgan::seed;
use coldgan::synthetic::{planted_clusters, PlantedConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root: u64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(1);
    let log = planted_clusters(&PlantedConfig::default(), root);
    let split = split_users(&log, 0.8, seed::derive(root, seed::SPLIT))?;
    let model_cfg = ModelConfig {
        generator_hidden: 32,
        discriminator_hidden: 16,
        ..Default::default()
    };
    let cfg = TrainConfig {
        epochs: 200,
        batch_size: 8,
        patience: 40,
        validation_fraction: 0.1,
        seed: root,
        ..Default::default()
    };
    let model = train(&log, &split, &RejuvenationConfig::default(), &cfg, &model_cfg)?;
    let protocol = EvalProtocol::default();
    let report = evaluate(&model.generator, &log, &split, &protocol)?.report;
    let random = expected_random_precision(&log, &split.test_users, protocol.cold_keep)?;
    let p5 = report.at(5).expect("k = 5 evaluated").precision;
    println!(
        "epochs run: {}  best epoch: {:?}",
        model.history.len(),
        model.best_epoch
    );
    print!("{}", report.to_table());
    println!("random expectation P@5 = {random:.4}  ratio = {:.2}x", p5 / random);
    Ok(())
}
