//! Reverse-mode differentiation and the Adam optimizer.

mod adam;
mod tape;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use tape::{logsumexp, sqnorm_diff, AdError, Gradients, Result, Shape, Tape, Var};
