//! Print the time-decayed retention curve and check it against sampled
//! keep rates, next to the uniform-dropout variant.
//!
//!     cargo run --example rejuvenation_curve

use coldgan::data::RatingVector;
use coldgan::rejuvenate::{rejuvenate, rejuvenate_random, retention_probability, RejuvenationConfig};
use coldgan::seed;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = RejuvenationConfig::default();
    let count = 20;
    let timeline: Vec<(usize, f64)> = (0..count).map(|i| (i, 4.0)).collect();
    let warm = RatingVector::from_timeline(count, &timeline)?;

    let trials = 20_000;
    let mut time_kept = vec![0usize; count];
    let mut random_kept = vec![0usize; count];
    let mut rng = seed::substream(7, seed::REJUVENATION);
    for _ in 0..trials {
        for item in rejuvenate(&warm, &cfg, &mut rng)?.rated_order() {
            time_kept[*item] += 1;
        }
        for item in rejuvenate_random(&warm, &cfg, &mut rng)?.rated_order() {
            random_kept[*item] += 1;
        }
    }

    println!("p_min={} p_max={} alpha={}", cfg.p_min, cfg.p_max, cfg.alpha);
    println!("{:>4} {:>9} {:>9} {:>9}", "rank", "p(i)", "sampled", "uniform");
    for rank in 0..count {
        println!(
            "{rank:>4} {:>9.4} {:>9.4} {:>9.4}",
            retention_probability(rank, count, &cfg)?,
            time_kept[rank] as f64 / trials as f64,
            random_kept[rank] as f64 / trials as f64,
        );
    }
    Ok(())
}
