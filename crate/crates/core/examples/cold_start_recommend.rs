//! The command-line workflow end to end: write a config, `train`,
//! `evaluate`, then `recommend` for a brand-new user from a three-line CSV.
//!
//!     cargo run --release --example cold_start_recommend

use std::fs::File;
use std::io::BufWriter;

use clap::Parser;
use coldgan::cli::{run, Cli};
use coldgan::data::write_csv_ratings;
use coldgan::synthetic::{planted_clusters, PlantedConfig};

fn coldgan(args: &[&str]) -> Result<(), Box<dyn std::error::Error>> {
    let cli = Cli::try_parse_from(std::iter::once("coldgan").chain(args.iter().copied()))?;
    let code = run(cli, &mut std::io::stdout(), &mut std::io::stderr());
    if code != 0 {
        return Err(format!("coldgan {} exited with {code}", args[0]).into());
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join(format!("coldgan-workflow-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    // Users u0, u2, ... like items i0..i14; u1, u3, ... like i15..i29.
    let log = planted_clusters(&PlantedConfig::default(), 5);
    write_csv_ratings(&log, BufWriter::new(File::create(dir.join("ratings.csv"))?))?;
    std::fs::write(
        dir.join("run.toml"),
        r#"seed = 5
output_dir = "out"

[data]
path = "ratings.csv"
format = "csv"

[model]
generator_hidden = 32
discriminator_hidden = 16

[training]
epochs = 150
batch_size = 8
patience = 30
"#,
    )?;
    let config = dir.join("run.toml");
    let config = config.to_str().expect("utf-8 path");
    coldgan(&["train", "--config", config])?;
    coldgan(&["evaluate", "--config", config, "--baselines"])?;

    // A newcomer who has rated three items from the first block.
    let newcomer = dir.join("newcomer.csv");
    std::fs::write(&newcomer, "item_id,rating,timestamp\ni3,5,100\ni7,4,101\ni12,5,102\n")?;
    let checkpoint = dir.join("out/checkpoints/model.cgan");
    println!("rank,item_id,score");
    coldgan(&[
        "recommend",
        "--checkpoint",
        checkpoint.to_str().expect("utf-8 path"),
        "--ratings",
        newcomer.to_str().expect("utf-8 path"),
        "-k",
        "5",
    ])?;
    Ok(())
}
