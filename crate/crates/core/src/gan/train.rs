use std::io::Write;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::data::{build_rating_vector, relevance_vector, DatasetSplit, InteractionLog, RatingVector};
use crate::metrics::{evaluate_users, EvalError, EvalProtocol};
use crate::rejuvenate::{self, RejuvenationConfig};
use crate::seed;

use super::{
    d_loss_and_grad, g_loss_and_grad, normalize_ratings, AdversarialForm, GanError, GanModel, ModelConfig, TrainConfig,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: usize,
    /// Mean discriminator loss over the epoch's D steps.
    pub d_loss: f64,
    /// Mean generator loss over the epoch's G steps.
    pub g_loss: f64,
    /// `None` when there is no validation slice or no evaluable validation user.
    pub val_p_at_5: Option<f64>,
}

pub fn write_history_csv<W: Write>(history: &[EpochRecord], mut out: W) -> std::io::Result<()> {
    writeln!(out, "epoch,d_loss,g_loss,val_p_at_5")?;
    for r in history {
        let val = r.val_p_at_5.map(|v| v.to_string()).unwrap_or_default();
        writeln!(out, "{},{},{},{}", r.epoch, r.d_loss, r.g_loss, val)?;
    }
    Ok(())
}

/// A train user's warm vector and the targets derived from it.
#[derive(Debug, Clone)]
pub struct ColdStartExample {
    pub warm: RatingVector,
    /// `warm` divided by the rating scale.
    pub warm_normalized: Vec<f64>,
    /// Relevance bits as 0/1 targets.
    pub relevance: Vec<f64>,
}

impl ColdStartExample {
    pub fn new(warm: RatingVector, rating_scale: f64) -> Self {
        let warm_normalized = normalize_ratings(&warm, rating_scale);
        let relevance = relevance_vector(&warm).to_targets();
        Self {
            warm,
            warm_normalized,
            relevance,
        }
    }
}

/// One Adam step of the discriminator on `(warm, cold)` pairs, all
/// normalized. The generator is only run forward. Returns the loss before
/// the step.
pub fn train_step_d(model: &mut GanModel, real: &[Vec<f64>], cold: &[Vec<f64>]) -> Result<f64, GanError> {
    if real.len() != cold.len() {
        return Err(GanError::BatchMismatch(format!(
            "{} warm vs {} cold",
            real.len(),
            cold.len()
        )));
    }
    let fake = cold
        .iter()
        .map(|c| model.generator.generate(c))
        .collect::<Result<Vec<_>, _>>()?;
    let (loss, grads) = d_loss_and_grad(&model.discriminator, real, &fake)?;
    model
        .discriminator_optimizer
        .step(&mut model.discriminator.net.tensors_mut(), &grads.tensors())?;
    Ok(loss)
}

/// One Adam step of the generator on `(cold, relevance)` pairs. The
/// discriminator is frozen. Returns the loss before the step.
pub fn train_step_g(
    model: &mut GanModel,
    cold: &[Vec<f64>],
    relevance: &[Vec<f64>],
    relevant_loss_weight: f64,
    form: AdversarialForm,
) -> Result<f64, GanError> {
    let (loss, grads) = g_loss_and_grad(
        &model.discriminator,
        &model.generator,
        cold,
        relevance,
        relevant_loss_weight,
        form,
    )?;
    model
        .generator_optimizer
        .step(&mut model.generator.net.tensors_mut(), &grads.tensors())?;
    Ok(loss)
}

fn validation_p_at_5(
    model: &GanModel,
    log: &InteractionLog,
    users: &[usize],
    cold_keep: usize,
) -> Result<Option<f64>, GanError> {
    if users.is_empty() {
        return Ok(None);
    }
    let protocol = EvalProtocol { ks: vec![5], cold_keep };
    match evaluate_users(&model.generator, log, users, &protocol) {
        Ok(eval) => Ok(eval.report.at(5).map(|m| m.precision)),
        Err(EvalError::NoEvaluatedUsers { .. }) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn rejuvenate_all(
    examples: &[ColdStartExample],
    cfg: &RejuvenationConfig,
    rating_scale: f64,
    rng: &mut seed::Rng,
) -> Result<Vec<Vec<f64>>, GanError> {
    examples
        .iter()
        .map(|ex| {
            let cold = rejuvenate::apply(&ex.warm, cfg, rng)?;
            Ok(normalize_ratings(&cold, rating_scale))
        })
        .collect()
}

/// Adversarial training over the train cohort of `split`.
///
/// A `validation_fraction` slice of the train users is held out and scored
/// by P@5 under the cold-start protocol after every epoch. Training stops
/// after `epochs` or once validation P@5 has not improved for `patience`
/// epochs, and the best-validation parameters are returned together with
/// the full history. Without a validation slice the final parameters are
/// returned.
pub fn train(
    log: &InteractionLog,
    split: &DatasetSplit,
    rejuvenation: &RejuvenationConfig,
    cfg: &TrainConfig,
    model_cfg: &ModelConfig,
) -> Result<GanModel, GanError> {
    cfg.validate()?;
    rejuvenation.validate()?;
    let mut train_users = split.train_users.clone();
    if train_users.is_empty() {
        return Err(GanError::EmptyCohort);
    }
    train_users.shuffle(&mut seed::substream(cfg.seed, seed::VALIDATION));
    let num_val = (cfg.validation_fraction * train_users.len() as f64).floor() as usize;
    let (val_users, fit_users) = train_users.split_at(num_val);
    let mut val_users = val_users.to_vec();
    let mut fit_users = fit_users.to_vec();
    val_users.sort_unstable();
    fit_users.sort_unstable();

    let mut examples = Vec::with_capacity(fit_users.len());
    for &u in &fit_users {
        let warm = build_rating_vector(log, u)?;
        if warm.count() > 0 {
            examples.push(ColdStartExample::new(warm, cfg.rating_scale));
        }
    }
    if examples.is_empty() {
        return Err(GanError::EmptyCohort);
    }

    let mut model = GanModel::new(log.num_items(), model_cfg, cfg)?;
    if cfg.epochs == 0 {
        return Ok(model);
    }

    let mut rejuv_rng = seed::substream(cfg.seed, seed::REJUVENATION);
    let mut shuffle_rng = seed::substream(cfg.seed, seed::SHUFFLE);
    let mut colds = rejuvenate_all(&examples, rejuvenation, cfg.rating_scale, &mut rejuv_rng)?;
    let mut order: Vec<usize> = (0..examples.len()).collect();

    let mut history = Vec::new();
    let mut best: Option<(f64, GanModel)> = None;
    let mut stale = 0usize;
    for epoch in 1..=cfg.epochs {
        if epoch > 1 && cfg.resample_each_epoch {
            colds = rejuvenate_all(&examples, rejuvenation, cfg.rating_scale, &mut rejuv_rng)?;
        }
        order.shuffle(&mut shuffle_rng);
        let (mut d_sum, mut d_steps, mut g_sum, mut g_steps) = (0.0, 0usize, 0.0, 0usize);
        for (batch_idx, chunk) in order.chunks(cfg.batch_size).enumerate() {
            let real: Vec<Vec<f64>> = chunk.iter().map(|&i| examples[i].warm_normalized.clone()).collect();
            let cold: Vec<Vec<f64>> = chunk.iter().map(|&i| colds[i].clone()).collect();
            let relevance: Vec<Vec<f64>> = chunk.iter().map(|&i| examples[i].relevance.clone()).collect();
            let mut d_loss = 0.0;
            for _ in 0..cfg.d_steps_per_g_step {
                d_loss = train_step_d(&mut model, &real, &cold)?;
                d_sum += d_loss;
                d_steps += 1;
            }
            let g_loss = train_step_g(
                &mut model,
                &cold,
                &relevance,
                cfg.relevant_loss_weight,
                cfg.adversarial_form,
            )?;
            g_sum += g_loss;
            g_steps += 1;
            if !d_loss.is_finite() || !g_loss.is_finite() {
                return Err(GanError::NonFiniteLoss {
                    epoch,
                    batch: batch_idx,
                    d_loss,
                    g_loss,
                });
            }
        }
        let val = validation_p_at_5(&model, log, &val_users, cfg.cold_keep)?;
        history.push(EpochRecord {
            epoch,
            d_loss: d_sum / d_steps as f64,
            g_loss: g_sum / g_steps as f64,
            val_p_at_5: val,
        });
        if val_users.is_empty() {
            continue;
        }
        let score = val.unwrap_or(f64::NEG_INFINITY);
        match &best {
            Some((b, _)) if score <= *b => {
                stale += 1;
                if stale >= cfg.patience {
                    break;
                }
            }
            _ => {
                let mut snapshot = model.clone();
                snapshot.best_epoch = Some(epoch);
                best = Some((score, snapshot));
                stale = 0;
            }
        }
    }

    let mut result = match best {
        Some((_, snapshot)) => snapshot,
        None => model,
    };
    result.history = history;
    Ok(result)
}
