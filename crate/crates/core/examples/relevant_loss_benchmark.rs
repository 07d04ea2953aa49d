//! Compare ColdGAN with and without the relevant-item loss against the
//! popularity and untrained-generator baselines on a MovieLens-100K-sized
//! synthetic corpus.
//!
//!     cargo run --release --example relevant_loss_benchmark [seeds] [epochs]
//!
//! Each seed trains two models; with the defaults that is about half a
//! minute per seed on one core.

use coldgan::data::{filter_sparse, split_users, DatasetSplit, InteractionLog};
use coldgan::gan::{train, GanModel, ModelConfig, TrainConfig};
use coldgan::metrics::{evaluate, EvalProtocol};
use coldgan::recommend::{popularity_baseline, Scorer};
use coldgan::rejuvenate::RejuvenationConfig;
use coldgan::seed;
use coldgan::synthetic::{movielens_like, CorpusConfig};

fn p_at_5<S: Scorer>(
    scorer: &S,
    log: &InteractionLog,
    split: &DatasetSplit,
) -> Result<f64, Box<dyn std::error::Error>> {
    let report = evaluate(scorer, log, split, &EvalProtocol::default())?.report;
    Ok(report.at(5).expect("k = 5 evaluated").precision)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let seeds: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(3);
    let epochs: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(100);
    let model_cfg = ModelConfig {
        generator_hidden: 128,
        discriminator_hidden: 32,
        ..Default::default()
    };
    println!(
        "{:>4} {:>9} {:>9} {:>10} {:>9}",
        "seed", "lambda=1", "lambda=0", "popularity", "untrained"
    );
    for root in 1..=seeds {
        let log = filter_sparse(&movielens_like(&CorpusConfig::default(), root), 15, 3)?;
        let split = split_users(&log, 0.8, seed::derive(root, seed::SPLIT))?;
        let cfg = TrainConfig {
            epochs,
            batch_size: 32,
            generator_lr: 1e-2,
            patience: 20,
            seed: root,
            ..Default::default()
        };
        let rejuv = RejuvenationConfig::default();
        let with = train(&log, &split, &rejuv, &cfg, &model_cfg)?;
        let without_cfg = TrainConfig {
            relevant_loss_weight: 0.0,
            ..cfg.clone()
        };
        let without = train(&log, &split, &rejuv, &without_cfg, &model_cfg)?;
        let untrained = GanModel::new(log.num_items(), &model_cfg, &cfg)?;
        let popularity = popularity_baseline(&log, &split.train_users);
        println!(
            "{root:>4} {:>9.4} {:>9.4} {:>10.4} {:>9.4}",
            p_at_5(&with.generator, &log, &split)?,
            p_at_5(&without.generator, &log, &split)?,
            p_at_5(&popularity, &log, &split)?,
            p_at_5(&untrained.generator, &log, &split)?,
        );
    }
    Ok(())
}
