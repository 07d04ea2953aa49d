//! Acceptance runner: one PASS/FAIL line per criterion and a summary line.
//!
//!     cargo test --release --test acceptance
//!
//! A failing criterion is reported but does not fail the process, so the rest
//! of `cargo test` still runs. Set `COLDGAN_ACCEPTANCE_STRICT=1` to exit 1
//! when any criterion fails.
//!
//! Criterion 6 reads the MovieLens-1M `ratings.dat` from `COLDGAN_ML1M`.

mod common;

use std::collections::HashSet;
use std::path::Path;
use std::time::{Duration, Instant};

use clap::Parser;
use coldgan::cli::{cmd_ablate, cmd_ingest, Cli, RunConfig};
use coldgan::data::{filter_sparse, split_users, write_csv_ratings, RatingVector};
use coldgan::gan::{
    d_loss_and_grad, g_loss_and_grad, train, train_step_g, AdversarialForm, Discriminator, GanModel, Generator,
    ModelConfig, TrainConfig,
};
use coldgan::metrics::{
    evaluate, expected_random_precision, held_out_target, ndcg_at_k, precision_at_k, recall_at_k, EvalProtocol,
};
use coldgan::nn::{grad_check, Mlp};
use coldgan::recommend::popularity_baseline;
use coldgan::rejuvenate::{rejuvenate, retention_probability, RejuvenationConfig, RejuvenationMode};
use coldgan::seed;
use coldgan::synthetic::{movielens_like, planted_clusters, CorpusConfig, PlantedConfig};
use common::{brute_ndcg, brute_precision, brute_recall, median, nonempty_subsets, permutations};
use rand::Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn within(limit: Duration, start: Instant) -> Result<String, String> {
    let took = start.elapsed();
    if took <= limit {
        Ok(format!("{:.1}s", took.as_secs_f64()))
    } else {
        Err(format!("took {:.1}s, limit {}s", took.as_secs_f64(), limit.as_secs()))
    }
}

fn jitter(net: &mut Mlp, rng: &mut seed::Rng) {
    let theta: Vec<f64> = net.flatten().iter().map(|p| p + rng.gen_range(-0.1..0.1)).collect();
    net.load_flat(&theta).unwrap();
}

fn gradients() -> Outcome {
    let start = Instant::now();
    let mut rng = seed::rng(2024);
    let mut worst = 0.0f64;
    let activation = ModelConfig::default().hidden_activation;
    for _ in 0..100 {
        let n = rng.gen_range(3..=20);
        let hidden = rng.gen_range(2..=8);
        let users = rng.gen_range(1..=4);
        let mut warm = Vec::new();
        let mut cold = Vec::new();
        let mut rel = Vec::new();
        for _ in 0..users {
            // Item 0 is always rated so no input is all zeros.
            let w: Vec<f64> = (0..n)
                .map(|j| {
                    if j == 0 || rng.gen_bool(0.5) {
                        rng.gen_range(1..=5) as f64 / 5.0
                    } else {
                        0.0
                    }
                })
                .collect();
            cold.push(
                w.iter()
                    .enumerate()
                    .map(|(j, &v)| if j == 0 || rng.gen_bool(0.5) { v } else { 0.0 })
                    .collect::<Vec<_>>(),
            );
            rel.push(w.iter().map(|&v| if v > 0.6 { 1.0 } else { 0.0 }).collect::<Vec<_>>());
            warm.push(w);
        }
        let mut g = Generator::new(n, hidden, activation, 5.0, &mut rng).unwrap();
        let mut d = Discriminator::new(n, hidden, activation, &mut rng).unwrap();
        jitter(&mut g.net, &mut rng);
        jitter(&mut d.net, &mut rng);

        let fake: Vec<Vec<f64>> = cold.iter().map(|c| g.generate(c).unwrap()).collect();
        let mut probe = d.clone();
        worst = worst.max(grad_check(
            |theta| {
                probe.net.load_flat(theta).unwrap();
                let (l, gr) = d_loss_and_grad(&probe, &warm, &fake).unwrap();
                (l, gr.flatten())
            },
            &d.net.flatten(),
            1e-5,
        ));
        for weight in [0.0, 1.0] {
            let mut probe = g.clone();
            worst = worst.max(grad_check(
                |theta| {
                    probe.net.load_flat(theta).unwrap();
                    let (l, gr) = g_loss_and_grad(&d, &probe, &cold, &rel, weight, AdversarialForm::Value).unwrap();
                    (l, gr.flatten())
                },
                &g.net.flatten(),
                1e-5,
            ));
        }
    }
    let time = within(Duration::from_secs(30), start)?;
    if worst < 1e-4 {
        Ok(format!("max relative error {worst:.2e} over 100 instances, {time}"))
    } else {
        Err(format!("max relative error {worst:.2e} >= 1e-4"))
    }
}

fn rejuvenation_fidelity() -> Outcome {
    let start = Instant::now();
    let cfg = RejuvenationConfig {
        p_min: 0.1,
        p_max: 0.9,
        alpha: 2.0,
        mode: RejuvenationMode::TimeBased,
        ..Default::default()
    };
    let count = 1000;
    // Item index equals time rank.
    let timeline: Vec<(usize, f64)> = (0..count).map(|i| (i, 3.0)).collect();
    let warm = RatingVector::from_timeline(count, &timeline).unwrap();
    let mut kept = vec![0u32; count];
    let mut rng = seed::rng(7);
    let trials = 100_000;
    for _ in 0..trials {
        for &i in rejuvenate(&warm, &cfg, &mut rng).unwrap().rated_order() {
            kept[i] += 1;
        }
    }
    let worst = (0..count)
        .map(|r| (kept[r] as f64 / trials as f64 - retention_probability(r, count, &cfg).unwrap()).abs())
        .fold(0.0, f64::max);
    let time = within(Duration::from_secs(60), start)?;
    if worst <= 0.01 {
        Ok(format!(
            "max |empirical - expected| {worst:.4} over {count} ranks, {time}"
        ))
    } else {
        Err(format!("max deviation {worst:.4} > 0.01"))
    }
}

fn metric_oracle() -> Outcome {
    let mut checked = 0usize;
    for n in 1..=6 {
        let subsets = nonempty_subsets(n);
        for recs in permutations(n) {
            for rel in &subsets {
                for k in 1..=5 {
                    let same = precision_at_k(&recs, rel, k).unwrap() == brute_precision(&recs, rel, k)
                        && recall_at_k(&recs, rel, k).unwrap() == brute_recall(&recs, rel, k)
                        && ndcg_at_k(&recs, rel, k).unwrap() == brute_ndcg(&recs, rel, k);
                    if !same {
                        return Err(format!("mismatch at recs {recs:?} relevant {rel:?} k {k}"));
                    }
                    checked += 1;
                }
            }
        }
    }
    let recs = [0, 1, 2, 3, 4];
    let rel: HashSet<usize> = [0, 2].into_iter().collect();
    let (p, r, g) = (
        precision_at_k(&recs, &rel, 5).unwrap(),
        recall_at_k(&recs, &rel, 5).unwrap(),
        ndcg_at_k(&recs, &rel, 5).unwrap(),
    );
    if (p - 0.4).abs() > 1e-12 || (r - 1.0).abs() > 1e-12 || (g - 0.9197).abs() > 1e-4 {
        return Err(format!("worked example gave P {p} R {r} nDCG {g}"));
    }
    Ok(format!(
        "{checked} exact agreements; worked example P@5 {p} R@5 {r} nDCG@5 {g:.4}"
    ))
}

fn planted_learning() -> Outcome {
    let start = Instant::now();
    let mut ratios = Vec::new();
    let mut ceilings = Vec::new();
    for root in 1..=5 {
        let log = planted_clusters(&PlantedConfig::default(), root);
        let split = split_users(&log, 0.8, seed::derive(root, seed::SPLIT)).unwrap();
        let model_cfg = ModelConfig {
            generator_hidden: 32,
            discriminator_hidden: 16,
            ..Default::default()
        };
        let cfg = TrainConfig {
            epochs: 200,
            batch_size: 8,
            patience: 40,
            seed: root,
            ..Default::default()
        };
        let model = train(&log, &split, &RejuvenationConfig::default(), &cfg, &model_cfg).unwrap();
        let protocol = EvalProtocol::default();
        let p5 = evaluate(&model.generator, &log, &split, &protocol)
            .unwrap()
            .report
            .at(5)
            .unwrap()
            .precision;
        let random = expected_random_precision(&log, &split.test_users, protocol.cold_keep).unwrap();
        // Best achievable P@5: every top-5 slot relevant when possible.
        let targets: Vec<usize> = split
            .test_users
            .iter()
            .filter_map(|&u| held_out_target(&log, u, protocol.cold_keep).unwrap())
            .map(|(_, rel)| rel.len().min(5))
            .collect();
        let perfect = targets.iter().sum::<usize>() as f64 / (5.0 * targets.len() as f64);
        ratios.push(p5 / random);
        ceilings.push(perfect / random);
    }
    let time = within(Duration::from_secs(120), start)?;
    let passes = ratios.iter().filter(|&&r| r >= 5.0).count();
    let fmt = |v: &[f64]| v.iter().map(|r| format!("{r:.2}")).collect::<Vec<_>>().join(" ");
    let detail = format!(
        "P@5 / random per seed [{}]; perfect-ranker ceiling [{}]; {time}",
        fmt(&ratios),
        fmt(&ceilings)
    );
    if passes >= 4 {
        Ok(detail)
    } else {
        Err(format!("{passes} of 5 seeds reach 5x: {detail}"))
    }
}

fn directional() -> Outcome {
    let start = Instant::now();
    let model_cfg = ModelConfig {
        generator_hidden: 128,
        discriminator_hidden: 32,
        ..Default::default()
    };
    let (mut with, mut without, mut pop, mut untrained) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for root in 1..=5 {
        let log = filter_sparse(&movielens_like(&CorpusConfig::default(), root), 15, 3).unwrap();
        let split = split_users(&log, 0.8, seed::derive(root, seed::SPLIT)).unwrap();
        let cfg = TrainConfig {
            epochs: 100,
            batch_size: 32,
            generator_lr: 1e-2,
            patience: 20,
            seed: root,
            ..Default::default()
        };
        let protocol = EvalProtocol::default();
        let p5 = |s: &dyn coldgan::recommend::Scorer| {
            evaluate(s, &log, &split, &protocol)
                .unwrap()
                .report
                .at(5)
                .unwrap()
                .precision
        };
        let rejuv = RejuvenationConfig::default();
        with.push(p5(&train(&log, &split, &rejuv, &cfg, &model_cfg).unwrap().generator));
        let zero = TrainConfig {
            relevant_loss_weight: 0.0,
            ..cfg.clone()
        };
        without.push(p5(&train(&log, &split, &rejuv, &zero, &model_cfg).unwrap().generator));
        pop.push(p5(&popularity_baseline(&log, &split.train_users)));
        untrained.push(p5(&GanModel::new(log.num_items(), &model_cfg, &cfg).unwrap().generator));
    }
    let time = within(Duration::from_secs(15 * 60), start)?;
    let (a, b, p, u) = (median(&with), median(&without), median(&pop), median(&untrained));
    let detail = format!("median P@5 with {a:.4} without {b:.4} popularity {p:.4} untrained {u:.4}; {time}");
    if a >= b && a > p && a > u {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn ml1m_ingest() -> Outcome {
    let Some(path) = std::env::var_os("COLDGAN_ML1M") else {
        return Err("COLDGAN_ML1M is not set; MovieLens-1M ratings.dat was not supplied".into());
    };
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::default();
    cfg.data.path = path.into();
    cfg.output_dir = dir.path().to_path_buf();
    let stats = cmd_ingest(&cfg).map_err(|e| e.to_string())?;
    let raw = stats.raw;
    let detail = format!(
        "{} users, {} items, {} ratings, sparsity {:.2}%",
        raw.users,
        raw.items,
        raw.ratings,
        100.0 * raw.sparsity
    );
    if raw.users == 6040 && raw.items == 3706 && raw.ratings == 1_000_209 && (100.0 * raw.sparsity - 95.5).abs() <= 0.1
    {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn run_cli(args: &[&str]) -> Result<(), String> {
    let cli = Cli::try_parse_from(args).map_err(|e| e.to_string())?;
    let (mut out, mut err) = (Vec::new(), Vec::new());
    match coldgan::cli::run(cli, &mut out, &mut err) {
        0 => Ok(()),
        code => Err(format!("{args:?} exited {code}: {}", String::from_utf8_lossy(&err))),
    }
}

fn small_workspace(dir: &Path, users: usize, items: usize, epochs: usize) -> std::path::PathBuf {
    let log = planted_clusters(
        &PlantedConfig {
            users,
            items,
            ..Default::default()
        },
        11,
    );
    write_csv_ratings(&log, std::fs::File::create(dir.join("ratings.csv")).unwrap()).unwrap();
    let config = dir.join("run.toml");
    std::fs::write(
        &config,
        format!(
            "seed = 11\n[data]\npath = \"ratings.csv\"\nformat = \"csv\"\n\
             [model]\ngenerator_hidden = 16\ndiscriminator_hidden = 8\n\
             [training]\nepochs = {epochs}\nbatch_size = 8\n[ablation]\nseeds = [1, 2]\n"
        ),
    )
    .unwrap();
    config
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let config = small_workspace(dir.path(), 50, 30, 20);
    let cfg = config.to_str().unwrap();
    let mut artifacts = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let out = out.to_str().unwrap();
        run_cli(&["coldgan", "train", "--config", cfg, "--out", out])?;
        run_cli(&["coldgan", "evaluate", "--config", cfg, "--out", out])?;
        let read = |f: &str| std::fs::read(Path::new(out).join(f)).unwrap();
        artifacts.push((read("checkpoints/model.cgan"), read("reports/metrics.json")));
    }
    if artifacts[0] == artifacts[1] {
        Ok(format!(
            "checkpoint ({} bytes) and metrics report byte-identical",
            artifacts[0].0.len()
        ))
    } else {
        Err("artifacts differ between identical runs".into())
    }
}

fn ablation_plumbing() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let config = small_workspace(dir.path(), 60, 30, 10);
    let cfg = RunConfig::load(&config, &[], None).map_err(|e| e.to_string())?;
    let report = cmd_ablate(&cfg).map_err(|e| e.to_string())?;
    if !report.audit_passed || report.rows.len() != 4 * cfg.ablation.seeds.len() {
        return Err(format!("audit {} with {} rows", report.audit_passed, report.rows.len()));
    }
    for &s in &cfg.ablation.seeds {
        let rows: Vec<_> = report.rows.iter().filter(|r| r.seed == s).collect();
        let cells: HashSet<_> = rows
            .iter()
            .map(|r| (r.mode, r.relevant_loss_weight.to_bits()))
            .collect();
        if rows.len() != 4 || cells.len() != 4 || rows.iter().any(|r| r.split_hash != rows[0].split_hash) {
            return Err(format!("seed {s}: grid or split sharing broken"));
        }
    }

    // Parameter isolation: same init under either weight, and a generator
    // step leaves the discriminator alone while the weight changes only the
    // generator update.
    let log = planted_clusters(&PlantedConfig::default(), 5);
    let model_cfg = ModelConfig::default();
    let one = TrainConfig::default();
    let zero = TrainConfig {
        relevant_loss_weight: 0.0,
        ..one.clone()
    };
    let a = GanModel::new(log.num_items(), &model_cfg, &one).unwrap();
    let b = GanModel::new(log.num_items(), &model_cfg, &zero).unwrap();
    if a != b {
        return Err("initialization depends on the relevant-loss weight".into());
    }
    let mut cold = Vec::new();
    let mut rel = Vec::new();
    for u in 0..8 {
        let w = coldgan::data::build_rating_vector(&log, u).unwrap();
        cold.push(coldgan::gan::normalize_ratings(&coldgan::data::cold_input(&w, 5), 5.0));
        rel.push(coldgan::data::relevance_vector(&w).to_targets());
    }
    let (mut with, mut without) = (a.clone(), b);
    train_step_g(&mut with, &cold, &rel, 1.0, one.adversarial_form).unwrap();
    train_step_g(&mut without, &cold, &rel, 0.0, one.adversarial_form).unwrap();
    if with.discriminator != a.discriminator || without.discriminator != a.discriminator {
        return Err("a generator step changed the discriminator".into());
    }
    if with.generator == without.generator {
        return Err("the relevant-loss weight had no effect on the generator step".into());
    }
    Ok(format!(
        "{} rows, shared split per seed, config audit ok, loss-path isolation ok",
        report.rows.len()
    ))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("1 gradient correctness", gradients),
        ("2 rejuvenation fidelity", rejuvenation_fidelity),
        ("3 metric oracle equivalence", metric_oracle),
        ("4 synthetic end-to-end learning", planted_learning),
        ("5 directional properties", directional),
        ("6 ingestion statistics (ML1M)", ml1m_ingest),
        ("7 determinism", determinism),
        ("8 ablation plumbing", ablation_plumbing),
    ];
    let only: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let (mut run, mut failed) = (0, 0);
    for (name, check) in criteria {
        if !only.is_empty() && !only.iter().any(|o| name.starts_with(o.as_str())) {
            continue;
        }
        run += 1;
        match check() {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name}: {detail}");
            }
        }
    }
    println!("acceptance: {} of {run} criteria pass, {failed} fail", run - failed);
    if failed > 0 && std::env::var_os("COLDGAN_ACCEPTANCE_STRICT").is_some() {
        std::process::exit(1);
    }
}
