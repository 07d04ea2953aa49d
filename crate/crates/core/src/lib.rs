//! Cold-start user recommendation with a generative adversarial network.
//!
//! A warm user's rating history is "rejuvenated" back into a plausible
//! cold-start state by a time-decayed retention rule. A denoising-autoencoder
//! generator learns to map that cold state back to the warm one while an MLP
//! discriminator tells real warm vectors from generated ones. A relevant-item
//! loss keeps the generator focused on each user's liked items. At inference
//! the generator scores unseen items for a new user from their first few
//! ratings.
//!
//! Module map:
//!
//! * [`data`] parses rating logs, filters, splits users and builds vectors.
//! * [`rejuvenate`] implements the warm → cold corruption.
//! * [`nn`] is a small dense-network engine with hand-written backward passes.
//! * [`gan`] assembles the generator/discriminator and the training loop.
//! * [`recommend`] and [`metrics`] cover top-N inference and evaluation.
//! * [`cli`] holds the run-config, manifests and the subcommand drivers used by
//!   the `coldgan` binary.

pub mod cli;
pub mod data;
pub mod gan;
pub mod metrics;
pub mod nn;
pub mod recommend;
pub mod rejuvenate;
pub mod seed;
pub mod synthetic;

pub use data::{InteractionLog, RatingVector, RelevanceVector};
pub use gan::{GanModel, TrainConfig};
pub use metrics::MetricsReport;
pub use rejuvenate::RejuvenationConfig;
