//! Generator, discriminator and adversarial training.
//!
//! The generator is a denoising autoencoder `N → hidden → N` with raw
//! (identity) outputs; the discriminator is an MLP `N → hidden → 1` whose
//! logit passes through a sigmoid. The discriminator sees only a warm or a
//! generated vector, never the cold input.

mod loss;
mod persist;
mod train;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{DataError, RatingVector};
use crate::metrics::EvalError;
use crate::nn::{self, Activation, AdamConfig, AdamState, Mlp, NnError};
use crate::rejuvenate::RejuvenationError;

pub use loss::{d_loss, d_loss_and_grad, g_loss, g_loss_and_grad, relevant_loss, relevant_loss_grad};
pub use persist::{load_checkpoint, manifest_path, save_checkpoint, CheckpointManifest, LoadedCheckpoint, TensorInfo};
pub use train::{train, train_step_d, train_step_g, write_history_csv, ColdStartExample, EpochRecord};

#[derive(Debug, Error)]
pub enum GanError {
    #[error("empty batch")]
    EmptyBatch,
    #[error("batch mismatch: {0}")]
    BatchMismatch(String),
    #[error("training cohort is empty")]
    EmptyCohort,
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("non-finite loss at epoch {epoch}, batch {batch}: d_loss={d_loss}, g_loss={g_loss}")]
    NonFiniteLoss {
        epoch: usize,
        batch: usize,
        d_loss: f64,
        g_loss: f64,
    },
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Rejuvenation(#[from] RejuvenationError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Checkpoint(#[from] nn::checkpoint::CheckpointError),
    #[error("checkpoint manifest: {0}")]
    Manifest(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Generator adversarial term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum AdversarialForm {
    /// `−D(ŵ)`.
    #[default]
    Value,
    /// Non-saturating `−log D(ŵ)`.
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub generator_hidden: usize,
    pub discriminator_hidden: usize,
    pub hidden_activation: Activation,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            generator_hidden: 256,
            discriminator_hidden: 128,
            hidden_activation: Activation::Relu,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub generator_lr: f64,
    pub discriminator_lr: f64,
    pub d_steps_per_g_step: usize,
    /// Weight λ of the relevant-item term in the generator loss.
    pub relevant_loss_weight: f64,
    /// Ratings are divided by this before entering either network.
    pub rating_scale: f64,
    /// Root seed; init, rejuvenation, shuffling and the validation slice each
    /// draw from a named substream of it.
    #[serde(skip)]
    pub seed: u64,
    pub patience: usize,
    pub validation_fraction: f64,
    pub adversarial_form: AdversarialForm,
    /// Re-sample every user's cold state each epoch; otherwise sample once.
    pub resample_each_epoch: bool,
    /// Earliest ratings kept as the cold input when scoring validation users.
    /// Not read from config files; the run config supplies it.
    #[serde(skip)]
    pub cold_keep: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 300,
            batch_size: 64,
            generator_lr: 1e-3,
            discriminator_lr: 1e-3,
            d_steps_per_g_step: 1,
            relevant_loss_weight: 1.0,
            rating_scale: 5.0,
            seed: 42,
            patience: 10,
            validation_fraction: 0.1,
            adversarial_form: AdversarialForm::Value,
            resample_each_epoch: true,
            cold_keep: 10,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), GanError> {
        let bad = |m: &str| Err(GanError::InvalidConfig(m.to_owned()));
        if self.batch_size == 0 || self.d_steps_per_g_step == 0 || self.patience == 0 || self.cold_keep == 0 {
            return bad("batch_size, d_steps_per_g_step, patience and cold_keep must be positive");
        }
        if !(self.generator_lr > 0.0 && self.discriminator_lr > 0.0) {
            return bad("learning rates must be positive");
        }
        if !(self.relevant_loss_weight >= 0.0 && self.relevant_loss_weight.is_finite()) {
            return bad("relevant_loss_weight must be finite and non-negative");
        }
        if self.rating_scale.is_nan() || self.rating_scale <= 0.0 {
            return bad("rating_scale must be positive");
        }
        if !(0.0..=0.5).contains(&self.validation_fraction) {
            return bad("validation_fraction must lie in [0, 0.5]");
        }
        Ok(())
    }
}

/// Nonzero ratings divided by `scale`; zeros stay zero.
pub fn normalize_ratings(v: &RatingVector, scale: f64) -> Vec<f64> {
    v.values()
        .iter()
        .map(|&r| if r == 0.0 { 0.0 } else { r / scale })
        .collect()
}

/// Denoising-autoencoder generator.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    pub net: Mlp,
    pub rating_scale: f64,
}

impl Generator {
    pub fn new<R: Rng + ?Sized>(
        num_items: usize,
        hidden: usize,
        activation: Activation,
        rating_scale: f64,
        rng: &mut R,
    ) -> Result<Self, NnError> {
        let net = Mlp::glorot(
            &[num_items, hidden, num_items],
            &[activation, Activation::Identity],
            rng,
        )?;
        Ok(Self { net, rating_scale })
    }

    pub fn from_net(net: Mlp, rating_scale: f64) -> Result<Self, NnError> {
        if net.input_dim() != net.output_dim() {
            return Err(NnError::Shape(format!(
                "generator maps {} to {}",
                net.input_dim(),
                net.output_dim()
            )));
        }
        Ok(Self { net, rating_scale })
    }

    pub fn num_items(&self) -> usize {
        self.net.input_dim()
    }

    /// Raw scores `ŵ = G(c)` for a normalized cold vector.
    pub fn generate(&self, cold: &[f64]) -> Result<Vec<f64>, NnError> {
        Ok(self.net.forward(cold)?.0)
    }
}

/// MLP discriminator producing the probability that its input is a real warm
/// vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Discriminator {
    /// Ends in a single identity unit; the sigmoid is applied by
    /// [`Discriminator::probability`] and fused into the losses.
    pub net: Mlp,
}

impl Discriminator {
    pub fn new<R: Rng + ?Sized>(
        num_items: usize,
        hidden: usize,
        activation: Activation,
        rng: &mut R,
    ) -> Result<Self, NnError> {
        let net = Mlp::glorot(&[num_items, hidden, 1], &[activation, Activation::Identity], rng)?;
        Ok(Self { net })
    }

    pub fn from_net(net: Mlp) -> Result<Self, NnError> {
        if net.output_dim() != 1 {
            return Err(NnError::Shape(format!(
                "discriminator has {} outputs",
                net.output_dim()
            )));
        }
        Ok(Self { net })
    }

    pub fn logit(&self, x: &[f64]) -> Result<f64, NnError> {
        Ok(self.net.forward(x)?.0[0])
    }

    pub fn probability(&self, x: &[f64]) -> Result<f64, NnError> {
        Ok(nn::sigmoid(self.logit(x)?))
    }
}

/// Both networks, their optimizer states and the per-epoch history.
#[derive(Debug, Clone, PartialEq)]
pub struct GanModel {
    pub generator: Generator,
    pub discriminator: Discriminator,
    pub generator_optimizer: AdamState,
    pub discriminator_optimizer: AdamState,
    pub model_config: ModelConfig,
    pub history: Vec<EpochRecord>,
    /// Epoch whose parameters this model holds, when chosen by validation.
    pub best_epoch: Option<usize>,
}

fn tensor_shapes(net: &Mlp) -> Vec<usize> {
    net.tensors().iter().map(|t| t.len()).collect()
}

impl GanModel {
    /// Fresh Glorot-initialized model drawn from the `init` substream of
    /// `train.seed`.
    pub fn new(num_items: usize, model: &ModelConfig, train: &TrainConfig) -> Result<Self, GanError> {
        if num_items == 0 {
            return Err(GanError::InvalidConfig("dataset has no items".into()));
        }
        if model.generator_hidden == 0 || model.discriminator_hidden == 0 {
            return Err(GanError::InvalidConfig("hidden sizes must be positive".into()));
        }
        let mut rng = crate::seed::substream(train.seed, crate::seed::INIT);
        let generator = Generator::new(
            num_items,
            model.generator_hidden,
            model.hidden_activation,
            train.rating_scale,
            &mut rng,
        )?;
        let discriminator =
            Discriminator::new(num_items, model.discriminator_hidden, model.hidden_activation, &mut rng)?;
        Ok(Self::from_networks(generator, discriminator, model.clone(), train))
    }

    pub fn from_networks(
        generator: Generator,
        discriminator: Discriminator,
        model_config: ModelConfig,
        train: &TrainConfig,
    ) -> Self {
        let generator_optimizer = AdamState::new(
            AdamConfig::with_learning_rate(train.generator_lr),
            &tensor_shapes(&generator.net),
        );
        let discriminator_optimizer = AdamState::new(
            AdamConfig::with_learning_rate(train.discriminator_lr),
            &tensor_shapes(&discriminator.net),
        );
        Self {
            generator,
            discriminator,
            generator_optimizer,
            discriminator_optimizer,
            model_config,
            history: Vec::new(),
            best_epoch: None,
        }
    }

    pub fn num_items(&self) -> usize {
        self.generator.num_items()
    }
}
