//! Discriminator and generator objectives with their parameter gradients.
//!
//! Batch terms are averaged over users. Gradients with respect to logits use
//! the unclamped closed forms (see [`nn::bce_logits_grad`]).

use crate::nn::{self, clamp_prob, sigmoid, Gradients};

use super::{AdversarialForm, Discriminator, GanError, Generator};

fn check_batches(a: usize, b: usize, what: &str) -> Result<(), GanError> {
    if a == 0 || b == 0 {
        return Err(GanError::EmptyBatch);
    }
    if a != b {
        return Err(GanError::BatchMismatch(format!("{a} vs {b} {what}")));
    }
    Ok(())
}

/// `mean(−log D(w) − log(1 − D(ŵ)))` over paired real and generated vectors.
pub fn d_loss(disc: &Discriminator, real: &[Vec<f64>], fake: &[Vec<f64>]) -> Result<f64, GanError> {
    check_batches(real.len(), fake.len(), "real/fake vectors")?;
    let mut total = 0.0;
    for (w, w_hat) in real.iter().zip(fake) {
        let p_real = clamp_prob(disc.probability(w)?);
        let p_fake = clamp_prob(disc.probability(w_hat)?);
        total += -p_real.ln() - (1.0 - p_fake).ln();
    }
    Ok(total / real.len() as f64)
}

/// [`d_loss`] and its gradient with respect to the discriminator parameters.
/// The generated vectors are constants.
pub fn d_loss_and_grad(
    disc: &Discriminator,
    real: &[Vec<f64>],
    fake: &[Vec<f64>],
) -> Result<(f64, Gradients), GanError> {
    check_batches(real.len(), fake.len(), "real/fake vectors")?;
    let scale = 1.0 / real.len() as f64;
    let mut grads = Gradients::zeros_like(&disc.net);
    let mut total = 0.0;
    for (w, w_hat) in real.iter().zip(fake) {
        let (out, cache) = disc.net.forward(w)?;
        let p = sigmoid(out[0]);
        total += -clamp_prob(p).ln();
        disc.net
            .backward_into(&cache, &[(p - 1.0) * scale], Some(&mut grads), false)?;

        let (out, cache) = disc.net.forward(w_hat)?;
        let p = sigmoid(out[0]);
        total += -(1.0 - clamp_prob(p)).ln();
        disc.net.backward_into(&cache, &[p * scale], Some(&mut grads), false)?;
    }
    Ok((total * scale, grads))
}

/// `bce(σ(ŵ), w_rel)` over all `N` positions.
pub fn relevant_loss(generated: &[f64], relevance: &[f64]) -> Result<f64, GanError> {
    if generated.len() != relevance.len() {
        return Err(GanError::BatchMismatch(format!(
            "{} scores for {} relevance bits",
            generated.len(),
            relevance.len()
        )));
    }
    let probs: Vec<f64> = generated.iter().map(|&z| sigmoid(z)).collect();
    Ok(nn::bce(&probs, relevance)?)
}

/// Gradient of [`relevant_loss`] with respect to the generated scores.
pub fn relevant_loss_grad(generated: &[f64], relevance: &[f64]) -> Result<Vec<f64>, GanError> {
    Ok(nn::bce_logits_grad(generated, relevance)?)
}

fn adversarial_term(logit: f64, form: AdversarialForm) -> (f64, f64) {
    let p = sigmoid(logit);
    match form {
        AdversarialForm::Value => (-p, -p * (1.0 - p)),
        AdversarialForm::Log => (-clamp_prob(p).ln(), p - 1.0),
    }
}

/// `mean(−D(G(c))) + λ · mean(relevant_loss(G(c), w_rel))`, or with the
/// adversarial term `−log D` under [`AdversarialForm::Log`].
pub fn g_loss(
    disc: &Discriminator,
    gen: &Generator,
    cold: &[Vec<f64>],
    relevance: &[Vec<f64>],
    weight: f64,
    form: AdversarialForm,
) -> Result<f64, GanError> {
    check_batches(cold.len(), relevance.len(), "cold/relevance vectors")?;
    let mut total = 0.0;
    for (c, rel) in cold.iter().zip(relevance) {
        let w_hat = gen.generate(c)?;
        total += adversarial_term(disc.logit(&w_hat)?, form).0;
        if weight != 0.0 {
            total += weight * relevant_loss(&w_hat, rel)?;
        }
    }
    Ok(total / cold.len() as f64)
}

/// [`g_loss`] and its gradient with respect to the generator parameters.
/// The discriminator only passes gradients through.
pub fn g_loss_and_grad(
    disc: &Discriminator,
    gen: &Generator,
    cold: &[Vec<f64>],
    relevance: &[Vec<f64>],
    weight: f64,
    form: AdversarialForm,
) -> Result<(f64, Gradients), GanError> {
    check_batches(cold.len(), relevance.len(), "cold/relevance vectors")?;
    let scale = 1.0 / cold.len() as f64;
    let mut grads = Gradients::zeros_like(&gen.net);
    let mut total = 0.0;
    for (c, rel) in cold.iter().zip(relevance) {
        let (w_hat, g_cache) = gen.net.forward(c)?;
        let (d_out, d_cache) = disc.net.forward(&w_hat)?;
        let (value, dlogit) = adversarial_term(d_out[0], form);
        total += value;
        let mut upstream = disc
            .net
            .backward_into(&d_cache, &[dlogit], None, true)?
            .expect("input gradient requested");
        if weight != 0.0 {
            total += weight * relevant_loss(&w_hat, rel)?;
            for (u, r) in upstream.iter_mut().zip(relevant_loss_grad(&w_hat, rel)?) {
                *u += weight * r;
            }
        }
        upstream.iter_mut().for_each(|u| *u *= scale);
        gen.net.backward_into(&g_cache, &upstream, Some(&mut grads), false)?;
    }
    Ok((total * scale, grads))
}
