//! A MovieLens-1M-shaped file (same user, item and rating counts) goes
//! through `ingest` with the expected totals.

use std::io::Write;

use coldgan::cli::{cmd_ingest, RunConfig};

#[test]
fn ml1m_shaped_file_reports_exact_counts() {
    let (users, items, ratings) = (6040usize, 3706usize, 1_000_209usize);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ratings.dat");
    let mut out = std::io::BufWriter::new(std::fs::File::create(&path).unwrap());
    let base = ratings / users;
    let mut written = 0;
    for u in 0..users {
        let count = base + usize::from(u < ratings - base * users);
        for j in 0..count {
            // Consecutive windows, so every item gets raters.
            let item = (u * base + j) % items;
            writeln!(out, "{}::{}::{}::{}", u + 1, item + 1, 1 + (u + j) % 5, 978_300_000 + j).unwrap();
            written += 1;
        }
    }
    out.flush().unwrap();
    drop(out);
    assert_eq!(written, ratings);

    let mut cfg = RunConfig::default();
    cfg.data.path = path;
    cfg.output_dir = dir.path().join("out");
    let stats = cmd_ingest(&cfg).unwrap();
    assert_eq!(
        (stats.raw.users, stats.raw.items, stats.raw.ratings),
        (users, items, ratings)
    );
    assert!(
        (100.0 * stats.raw.sparsity - 95.53).abs() < 0.01,
        "{}",
        stats.raw.sparsity
    );
}
