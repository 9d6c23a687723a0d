//! Adversarial training: imitation on clean inputs, constraint loss on
//! inputs perturbed within an L-infinity ball by projected sign-gradient
//! steps.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::autodiff::{adam_step, sqnorm_diff, AdamConfig, AdamState, Shape, Tape, Var};
use crate::dmp::DmpParams;
use crate::ltl::{eval_qualitative, to_nnf, Formula, LtlError};
use crate::model::{imitation_loss, Model, ModelError, NetVars};
use crate::quantloss::{constraint_loss, trace_loss, LossConfig, LossError, LossMode, UntilVariant};
use crate::tasks::{DataSchema, Dataset};

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("invalid training configuration: {0}")]
    Config(String),
    #[error("training diverged at epoch {epoch}: loss is {loss}")]
    Diverged { epoch: usize, loss: f64 },
    #[error("dataset does not match the model: {0}")]
    Schema(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Loss(#[from] LossError),
    #[error(transparent)]
    Ltl(#[from] LtlError),
}

impl From<crate::autodiff::AdError> for TrainError {
    fn from(e: crate::autodiff::AdError) -> Self {
        TrainError::Model(e.into())
    }
}

/// Network and primitive sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub hidden: Vec<usize>,
    pub n_basis: usize,
    /// Multiplier on the network output before it is used as basis weights.
    pub output_scale: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            hidden: vec![256, 256],
            n_basis: 30,
            output_scale: 1000.0,
        }
    }
}

impl ModelConfig {
    pub fn build(&self, schema: &DataSchema, seed: u64) -> Result<Model, TrainError> {
        if self.n_basis == 0 {
            return Err(TrainError::Config("n_basis must be positive".into()));
        }
        if !(self.output_scale > 0.0 && self.output_scale.is_finite()) {
            return Err(TrainError::Config("output_scale must be positive".into()));
        }
        Ok(Model::new(
            schema.input_schema(),
            DmpParams::new(self.n_basis, schema.t),
            self.hidden.clone(),
            self.output_scale,
            seed,
        )?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub lr: f64,
    pub eta: f64,
    pub gamma: f64,
    pub zeta: f64,
    /// Radius of the L-infinity ball around each input.
    pub epsilon: f64,
    pub adv_iterations: usize,
    /// Adversary step; `None` means `0.1 * epsilon`.
    pub adv_lr: Option<f64>,
    pub batch_size: usize,
    pub seed: u64,
    pub until_variant: UntilVariant,
    pub adversary_enabled: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 200,
            lr: 1e-3,
            eta: 1.0,
            gamma: 0.005,
            zeta: 1e-3,
            epsilon: 0.0,
            adv_iterations: 10,
            adv_lr: None,
            batch_size: 32,
            seed: 0,
            until_variant: UntilVariant::Witness,
            adversary_enabled: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |m: String| Err(TrainError::Config(m));
        if self.epochs == 0 {
            return bad("epochs must be at least 1".into());
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return bad(format!("lr must be positive, got {}", self.lr));
        }
        if !(self.eta >= 0.0 && self.eta.is_finite()) {
            return bad(format!("eta must be non-negative, got {}", self.eta));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return bad(format!("epsilon must be non-negative, got {}", self.epsilon));
        }
        if self.batch_size == 0 {
            return bad("batch size must be at least 1".into());
        }
        if let Some(s) = self.adv_lr {
            if !(s >= 0.0 && s.is_finite()) {
                return bad(format!("adversary step must be non-negative, got {s}"));
            }
        }
        self.soft_loss().validate()?;
        Ok(())
    }

    pub fn soft_loss(&self) -> LossConfig {
        LossConfig {
            gamma: self.gamma,
            zeta: self.zeta,
            mode: LossMode::Soft,
            until_variant: self.until_variant,
        }
    }

    pub fn hard_loss(&self) -> LossConfig {
        self.soft_loss().with_mode(LossMode::Hard)
    }

    pub fn adversary_step(&self) -> f64 {
        self.adv_lr.unwrap_or(0.1 * self.epsilon)
    }

    fn adversary_active(&self) -> bool {
        self.adversary_enabled && self.epsilon > 0.0
    }
}

/// Closed L-infinity ball.
#[derive(Debug, Clone, PartialEq)]
pub struct RobustBall {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl RobustBall {
    pub fn new(center: Vec<f64>, radius: f64) -> Self {
        RobustBall { center, radius }
    }

    pub fn contains(&self, z: &[f64]) -> bool {
        z.len() == self.center.len() && z.iter().zip(&self.center).all(|(a, c)| (a - c).abs() <= self.radius)
    }

    pub fn sample(&self, rng: &mut impl Rng) -> Vec<f64> {
        self.center
            .iter()
            .map(|c| if self.radius > 0.0 { c + rng.gen_range(-self.radius..=self.radius) } else { *c })
            .collect()
    }

    pub fn project(&self, z: &mut [f64]) {
        let r = self.radius;
        for (a, &c) in z.iter_mut().zip(&self.center) {
            let mut delta = (*a - c).clamp(-r, r);
            *a = c + delta;
            // c + delta can round outside the ball
            while (*a - c).abs() > r {
                delta -= delta.signum() * f64::EPSILON * c.abs().max(r);
                *a = c + delta;
            }
        }
    }
}

/// What the adversary minimises.
#[derive(Debug, Clone, PartialEq)]
pub enum Adversary {
    /// Loss of the negated specification, in negation normal form.
    Negated(Formula),
    /// Negation is not expressible; ascend the loss of the specification.
    Ascend(Formula),
}

impl Adversary {
    pub fn for_spec(formula: &Formula) -> Result<Self, TrainError> {
        match to_nnf(&Formula::not(formula.clone())) {
            Ok(neg) => Ok(Adversary::Negated(neg)),
            Err(LtlError::UnsupportedNegation(_)) => Ok(Adversary::Ascend(to_nnf(formula)?)),
            Err(e) => Err(e.into()),
        }
    }

    fn target(&self) -> (&Formula, f64) {
        match self {
            Adversary::Negated(f) => (f, 1.0),
            Adversary::Ascend(f) => (f, -1.0),
        }
    }
}

/// Result of one adversarial search.
#[derive(Debug, Clone)]
pub struct AdversarialSearch {
    pub z: Vec<f64>,
    /// Objective after each projected step, starting with the initial sample.
    pub objective: Vec<f64>,
}

/// Soft constraint loss of `formula` (in NNF) for the rollout of `input`,
/// with its gradient with respect to the input.
pub fn input_gradient(
    model: &Model,
    input: &[f64],
    formula: &Formula,
    cfg: &LossConfig,
) -> Result<(f64, Vec<f64>), TrainError> {
    let mut tape = Tape::new();
    let vars = model.net.bind(&mut tape, false)?;
    let z = tape.leaf(input.to_vec(), Shape::vector(input.len()))?;
    let tv = model.trajectory(&mut tape, &vars, z)?;
    let loss = constraint_loss(&mut tape, formula, &tv, 0, cfg)?;
    let grads = tape.backward(loss)?;
    Ok((tape.scalar(loss), grads.wrt(z)))
}

/// Samples a start point in the ball around `input` and takes
/// `adv_iterations` projected sign-gradient steps on the adversary's
/// objective. Returns `input` itself when the adversary is off.
pub fn adversarial_search(
    model: &Model,
    input: &[f64],
    adversary: &Adversary,
    cfg: &TrainConfig,
    rng: &mut impl Rng,
) -> Result<AdversarialSearch, TrainError> {
    if !cfg.adversary_active() {
        return Ok(AdversarialSearch {
            z: input.to_vec(),
            objective: Vec::new(),
        });
    }
    let ball = RobustBall::new(input.to_vec(), cfg.epsilon);
    let mut z = ball.sample(rng);
    let (target, sign) = adversary.target();
    let loss_cfg = cfg.soft_loss();
    let step = cfg.adversary_step();
    let mut objective = Vec::with_capacity(cfg.adv_iterations + 1);
    for _ in 0..cfg.adv_iterations {
        let (value, grad) = input_gradient(model, &z, target, &loss_cfg)?;
        objective.push(sign * value);
        for (a, g) in z.iter_mut().zip(grad) {
            // descend sign * loss
            let g = sign * g;
            if g > 0.0 {
                *a -= step;
            } else if g < 0.0 {
                *a += step;
            }
        }
        ball.project(&mut z);
    }
    if cfg.adv_iterations > 0 {
        objective.push(sign * input_gradient(model, &z, target, &loss_cfg)?.0);
    }
    Ok(AdversarialSearch { z, objective })
}

pub fn adversarial_input(
    model: &Model,
    input: &[f64],
    adversary: &Adversary,
    cfg: &TrainConfig,
    rng: &mut impl Rng,
) -> Result<Vec<f64>, TrainError> {
    Ok(adversarial_search(model, input, adversary, cfg, rng)?.z)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalMetrics {
    pub imitation: f64,
    pub constraint_hard: Option<f64>,
    pub constraint_soft: Option<f64>,
    pub satisfaction: Option<f64>,
}

/// Mean imitation loss, mean hard and soft constraint loss, and the
/// fraction of rollouts on which the specification holds.
pub fn evaluate(
    model: &Model,
    data: &Dataset,
    formula: Option<&Formula>,
    cfg: &LossConfig,
) -> Result<EvalMetrics, TrainError> {
    if data.is_empty() {
        return Err(TrainError::Schema("empty dataset".into()));
    }
    check_schema(model, &data.schema)?;
    let hard = cfg.with_mode(LossMode::Hard);
    let soft = cfg.with_mode(LossMode::Soft);
    let (mut ld, mut lh, mut ls, mut sat) = (0.0, 0.0, 0.0, 0usize);
    for demo in &data.demos {
        let tr = model.rollout(&demo.input)?;
        let err: f64 = tr
            .points()
            .iter()
            .zip(demo.trajectory.points())
            .map(|(a, b)| sqnorm_diff(a, b))
            .sum();
        ld += err / tr.len() as f64;
        if let Some(f) = formula {
            let objects = demo.objects(&data.schema);
            lh += trace_loss(f, &tr, &objects, &hard)?;
            ls += trace_loss(f, &tr, &objects, &soft)?;
            sat += eval_qualitative(f, &tr, 0, &objects)? as usize;
        }
    }
    let n = data.len() as f64;
    let with = |x: f64| formula.map(|_| x / n);
    Ok(EvalMetrics {
        imitation: ld / n,
        constraint_hard: with(lh),
        constraint_soft: with(ls),
        satisfaction: with(sat as f64),
    })
}

fn check_schema(model: &Model, schema: &DataSchema) -> Result<(), TrainError> {
    if schema.input_schema() != model.schema || schema.t != model.dmp.steps() {
        return Err(TrainError::Schema(format!(
            "data has d = {}, {} objects, {} steps; model expects d = {}, {} objects, {} steps",
            schema.d,
            schema.k_objects,
            schema.t,
            model.schema.dim,
            model.schema.objects,
            model.dmp.steps()
        )));
    }
    Ok(())
}

/// One line of the training history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    #[serde(rename = "train_Ld")]
    pub train_ld: f64,
    #[serde(rename = "train_Lc_hard")]
    pub train_lc_hard: Option<f64>,
    #[serde(rename = "train_Lc_soft")]
    pub train_lc_soft: Option<f64>,
    #[serde(rename = "test_Ld")]
    pub test_ld: Option<f64>,
    #[serde(rename = "test_Lc_hard")]
    pub test_lc_hard: Option<f64>,
    pub wall_ms: u64,
}

/// Trains `model` in place. With `eta = 0` or no formula the constraint
/// term and the adversary are skipped; the formula is still used for the
/// reported metrics. `on_epoch` sees each history line as it is produced.
pub fn train(
    model: &mut Model,
    data: &Dataset,
    test: Option<&Dataset>,
    formula: Option<&Formula>,
    cfg: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochMetrics),
) -> Result<Vec<EpochMetrics>, TrainError> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(TrainError::Schema("empty training set".into()));
    }
    check_schema(model, &data.schema)?;
    if let Some(t) = test {
        check_schema(model, &t.schema)?;
    }
    let constrained = match formula {
        Some(f) if cfg.eta > 0.0 => {
            f.check(&model.schema)?;
            Some((to_nnf(f)?, Adversary::for_spec(f)?))
        }
        Some(f) => {
            f.check(&model.schema)?;
            None
        }
        None => None,
    };

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let adam = AdamConfig::with_lr(cfg.lr);
    let mut states: Vec<AdamState> = model.net.tensors().iter().map(|t| AdamState::new(t.len())).collect();
    let soft = cfg.soft_loss();
    let started = Instant::now();
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut history = Vec::with_capacity(cfg.epochs);

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(cfg.batch_size) {
            let mut tape = Tape::new();
            let vars = model.net.bind(&mut tape, true)?;
            let mut terms = Vec::with_capacity(2 * batch.len());
            for &i in batch {
                let demo = &data.demos[i];
                let (ld, lc) = example_loss(
                    model,
                    &mut tape,
                    &vars,
                    &demo.input,
                    &demo.trajectory,
                    constrained.as_ref(),
                    cfg,
                    &soft,
                    &mut rng,
                )?;
                terms.push((ld, 1.0));
                if let Some(lc) = lc {
                    terms.push((lc, cfg.eta));
                }
            }
            let total = tape.lincomb(&terms)?;
            let loss = tape.scale(total, 1.0 / batch.len() as f64)?;
            let value = tape.scalar(loss);
            if !value.is_finite() {
                return Err(TrainError::Diverged { epoch, loss: value });
            }
            let grads = tape.backward(loss)?;
            for ((tensor, state), var) in model.net.tensors_mut().into_iter().zip(&mut states).zip(vars.all()) {
                adam_step(tensor, &grads.wrt(var), state, &adam)?;
            }
            if !model.net.is_finite() {
                return Err(TrainError::Diverged { epoch, loss: value });
            }
        }

        let tr = evaluate(model, data, formula, &soft)?;
        let te = test.map(|t| evaluate(model, t, formula, &soft)).transpose()?;
        if !tr.imitation.is_finite() {
            return Err(TrainError::Diverged {
                epoch,
                loss: tr.imitation,
            });
        }
        let line = EpochMetrics {
            epoch,
            train_ld: tr.imitation,
            train_lc_hard: tr.constraint_hard,
            train_lc_soft: tr.constraint_soft,
            test_ld: te.as_ref().map(|m| m.imitation),
            test_lc_hard: te.and_then(|m| m.constraint_hard),
            wall_ms: started.elapsed().as_millis() as u64,
        };
        on_epoch(&line);
        history.push(line);
    }
    Ok(history)
}

#[allow(clippy::too_many_arguments)]
fn example_loss(
    model: &Model,
    tape: &mut Tape,
    vars: &NetVars,
    input: &[f64],
    demo: &crate::ltl::Trace,
    constrained: Option<&(Formula, Adversary)>,
    cfg: &TrainConfig,
    soft: &LossConfig,
    rng: &mut ChaCha8Rng,
) -> Result<(Var, Option<Var>), TrainError> {
    let x = tape.constant(input.to_vec(), Shape::vector(input.len()))?;
    let clean = model.trajectory(tape, vars, x)?;
    let ld = imitation_loss(tape, &clean.points, demo)?;
    let Some((nnf, adversary)) = constrained else {
        return Ok((ld, None));
    };
    let tv = if cfg.adversary_active() {
        let z = adversarial_input(model, input, adversary, cfg, rng)?;
        let zv = tape.constant(z.clone(), Shape::vector(z.len()))?;
        model.trajectory(tape, vars, zv)?
    } else {
        clean
    };
    let lc = constraint_loss(tape, nnf, &tv, 0, soft)?;
    Ok((ld, Some(lc)))
}
