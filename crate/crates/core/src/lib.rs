//! Exact training for semi-quantum restricted Boltzmann machines.
//!
//! The model couples classical visible spins to hidden qubits carrying
//! transverse fields. Every marginal, expectation value, and
//! relative-entropy term has a closed form, so two trainers minimize the
//! visible KL divergence exactly: plain gradient descent and an
//! information-geometric alternating-projection (em) optimizer whose inner
//! step is a convex problem.
//!
//! Module map:
//! - [`spin`], [`dist`], [`numeric`]: configurations, probability tables,
//!   KL divergence, stable scalar helpers.
//! - [`params`], [`model`]: trainable parameters and all closed-form model
//!   quantities.
//! - [`oracle`]: a dense 2^(N+M) Gibbs-state simulator that certifies every
//!   closed form by brute force.
//! - [`training`]: the gradient-descent and em optimizers.
//! - [`datasets`]: seeded generators for the four benchmark distributions.
//! - [`experiments`]: the paired multi-run harness with CSV/SVG output.

pub mod datasets;
pub mod dist;
pub mod error;
pub mod experiments;
pub mod model;
pub mod numeric;
pub mod oracle;
pub mod params;
pub mod rng;
pub mod spin;
mod svg;
pub mod training;

pub use dist::{kl_divergence, VisibleDistribution};
pub use error::{Error, Result};
pub use params::{GradientVector, Params};
pub use rng::{Xoshiro256StarStar, PRNG_NAME};
pub use spin::{encode_config, SpinConfig};
pub use training::{Algorithm, TrainConfig, TrainRecord};
