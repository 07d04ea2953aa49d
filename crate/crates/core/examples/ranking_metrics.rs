//! P@k, R@k and nDCG@k on a hand-sized ranking.
//!
//!     cargo run --example ranking_metrics

use std::collections::HashSet;

use coldgan::data::RatingVector;
use coldgan::metrics::{ndcg_at_k, precision_at_k, recall_at_k};
use coldgan::recommend::rank_unrated;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Items A..E are 0..4; the user found A and C relevant.
    let recs = [0, 1, 2, 3, 4];
    let relevant: HashSet<usize> = [0, 2].into_iter().collect();
    for k in [1, 3, 5] {
        println!(
            "k={k}: P={:.4} R={:.4} nDCG={:.4}",
            precision_at_k(&recs, &relevant, k)?,
            recall_at_k(&recs, &relevant, k)?,
            ndcg_at_k(&recs, &relevant, k)?,
        );
    }

    // Ranking skips items already in the cold input and breaks ties by index.
    let cold = RatingVector::from_timeline(6, &[(1, 5.0)])?;
    let scores = [0.3, 0.9, 0.7, 0.7, -1.0, 0.1];
    println!("top 4 unrated: {:?}", rank_unrated(&scores, &cold, 4)?);
    Ok(())
}
