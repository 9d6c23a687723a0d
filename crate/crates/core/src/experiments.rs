//! Experiment matrices: one-shot constrained vs unconstrained runs per
//! task, and batch runs comparing unconstrained, train-only and
//! adversarial training on held-out scenes.

use serde::Serialize;

use crate::tasks::{builtin_spec, gen_dataset};
use crate::training::{evaluate, train, EvalMetrics, ModelConfig, TrainConfig, TrainError};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OneShotCell {
    pub task: String,
    pub seed: u64,
    pub unconstrained: EvalMetrics,
    pub constrained: EvalMetrics,
}

/// Trains one model on a single demonstration with `eta = 0` and another
/// with the task constraint, and evaluates both on that demonstration.
pub fn one_shot(task: &str, seed: u64, model: &ModelConfig, base: &TrainConfig) -> Result<OneShotCell, TrainError> {
    let spec = builtin_spec(task).map_err(|e| TrainError::Config(e.to_string()))?;
    let data = gen_dataset(task, 1, seed);
    let cfg = TrainConfig {
        seed,
        epsilon: 0.0,
        ..base.clone()
    };
    let run = |eta: f64| -> Result<EvalMetrics, TrainError> {
        let mut m = model.build(&data.schema, seed)?;
        train(&mut m, &data, None, Some(&spec), &TrainConfig { eta, ..cfg.clone() }, |_| {})?;
        evaluate(&m, &data, Some(&spec), &cfg.soft_loss())
    };
    Ok(OneShotCell {
        task: task.to_string(),
        seed,
        unconstrained: run(0.0)?,
        constrained: run(base.eta)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchCell {
    pub task: String,
    pub seed: u64,
    pub unconstrained: EvalMetrics,
    pub train_only: EvalMetrics,
    pub adversarial: EvalMetrics,
}

/// Trains on `train_count` scenes and evaluates on `test_count` unseen
/// ones, without the constraint, with it on training inputs only, and
/// with adversarial inputs of radius `base.epsilon`.
pub fn batch(
    task: &str,
    seed: u64,
    train_count: usize,
    test_count: usize,
    model: &ModelConfig,
    base: &TrainConfig,
) -> Result<BatchCell, TrainError> {
    let spec = builtin_spec(task).map_err(|e| TrainError::Config(e.to_string()))?;
    let mut data = gen_dataset(task, train_count + test_count, seed);
    let test = data.split_off(test_count);
    let run = |eta: f64, epsilon: f64| -> Result<EvalMetrics, TrainError> {
        let cfg = TrainConfig {
            eta,
            epsilon,
            seed,
            ..base.clone()
        };
        let mut m = model.build(&data.schema, seed)?;
        train(&mut m, &data, None, Some(&spec), &cfg, |_| {})?;
        evaluate(&m, &test, Some(&spec), &cfg.soft_loss())
    };
    Ok(BatchCell {
        task: task.to_string(),
        seed,
        unconstrained: run(0.0, 0.0)?,
        train_only: run(base.eta, 0.0)?,
        adversarial: run(base.eta, base.epsilon)?,
    })
}

/// Mean of `f` over cells.
pub fn mean<T>(cells: &[T], f: impl Fn(&T) -> f64) -> f64 {
    cells.iter().map(f).sum::<f64>() / cells.len().max(1) as f64
}

pub fn hard(m: &EvalMetrics) -> f64 {
    m.constraint_hard.unwrap_or(0.0)
}
