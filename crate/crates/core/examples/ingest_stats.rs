//! Write a MovieLens-format ratings file, then run the `ingest` command on
//! it: parse, filter (15 ratings per user, 3 per item) and report sparsity.
//!
//!     cargo run --release --example ingest_stats [ratings.dat]
//!
//! Without an argument a MovieLens-100K-sized synthetic file is used.

use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use coldgan::cli::{cmd_ingest, RunConfig};
use coldgan::data::write_movielens;
use coldgan::synthetic::{movielens_like, CorpusConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::temp_dir().join(format!("coldgan-ingest-{}", std::process::id()));
    std::fs::create_dir_all(&out)?;
    let data = match std::env::args().nth(1) {
        Some(path) => PathBuf::from(path),
        None => {
            let path = out.join("ratings.dat");
            write_movielens(
                &movielens_like(&CorpusConfig::default(), 1),
                BufWriter::new(File::create(&path)?),
            )?;
            path
        }
    };
    let mut cfg = RunConfig::default();
    cfg.data.path = data;
    cfg.output_dir = out.clone();
    let stats = cmd_ingest(&cfg)?;
    print!("{}", stats.to_table());
    println!("canonical dump and stats under {}", out.join("reports").display());
    Ok(())
}
