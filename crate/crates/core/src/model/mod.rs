//! Weight-generating network, rollout of its primitive, and the
//! imitation and combined training losses.

mod checkpoint;
mod network;

use thiserror::Error;

pub use checkpoint::{Checkpoint, CHECKPOINT_VERSION};
pub use network::{Layer, NetDims, NetVars, NetworkParams};

use crate::autodiff::{AdError, Shape, Tape, Var};
use crate::dmp::{Dmp, DmpError, DmpParams};
use crate::ltl::{Formula, InputSchema, Trace};
use crate::quantloss::{constraint_loss, LossConfig, LossError, TraceVars};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid model configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Dmp(#[from] DmpError),
    #[error(transparent)]
    Loss(#[from] LossError),
    #[error(transparent)]
    Autodiff(#[from] AdError),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Input layout: `[start (d), goal (d), o1 (d), .., oK (d)]`.
pub fn input_len(schema: &InputSchema) -> usize {
    schema.dim * (2 + schema.objects)
}

/// Network plus the primitive it parameterises.
#[derive(Debug, Clone)]
pub struct Model {
    pub net: NetworkParams,
    pub dmp: Dmp,
    pub schema: InputSchema,
    pub seed: u64,
}

impl Model {
    pub fn new(
        schema: InputSchema,
        dmp: DmpParams,
        hidden: Vec<usize>,
        output_scale: f64,
        seed: u64,
    ) -> Result<Self, ModelError> {
        let dims = NetDims {
            input: input_len(&schema),
            hidden,
            n_basis: dmp.n_basis(),
            dim: schema.dim,
        };
        let net = NetworkParams::init(seed, dims, output_scale)?;
        Ok(Model {
            net,
            dmp: Dmp::new(dmp)?,
            schema,
            seed,
        })
    }

    pub fn input_len(&self) -> usize {
        input_len(&self.schema)
    }

    fn check_input(&self, len: usize) -> Result<(), ModelError> {
        if len != self.input_len() {
            return Err(ModelError::Shape(format!(
                "input has length {len}, expected {} for d = {} with {} objects",
                self.input_len(),
                self.schema.dim,
                self.schema.objects
            )));
        }
        Ok(())
    }

    /// Rolls out the primitive for `input`, starting and ending at the
    /// input's start and goal fields. Objects are sliced from the input.
    pub fn trajectory(&self, tape: &mut Tape, vars: &NetVars, input: Var) -> Result<TraceVars, ModelError> {
        self.check_input(tape.shape(input).len())?;
        let d = self.schema.dim;
        let w = self.net.forward(tape, vars, input)?;
        let start = tape.slice(input, 0, d)?;
        let goal = tape.slice(input, d, d)?;
        let points = self.dmp.rollout(tape, w, start, goal)?;
        let objects = (0..self.schema.objects)
            .map(|k| tape.slice(input, (2 + k) * d, d))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(TraceVars::new(tape, points, objects)?)
    }

    /// Rolled-out trajectory on plain values.
    pub fn rollout(&self, input: &[f64]) -> Result<Trace, ModelError> {
        self.check_input(input.len())?;
        let mut tape = Tape::new();
        let vars = self.net.bind(&mut tape, false)?;
        let x = tape.constant(input.to_vec(), Shape::vector(input.len()))?;
        let tv = self.trajectory(&mut tape, &vars, x)?;
        let points = tv.points.iter().map(|p| tape.value(*p).to_vec()).collect();
        Trace::new(points, self.dmp.params().dt).map_err(|e| ModelError::Loss(e.into()))
    }
}

/// Objects stored in an input vector.
pub fn input_objects(input: &[f64], schema: &InputSchema) -> Vec<Vec<f64>> {
    let d = schema.dim;
    (0..schema.objects).map(|k| input[(2 + k) * d..(3 + k) * d].to_vec()).collect()
}

/// Mean squared distance between rolled-out points and a demonstration.
pub fn imitation_loss(tape: &mut Tape, points: &[Var], demo: &Trace) -> Result<Var, ModelError> {
    if points.len() != demo.len() {
        return Err(ModelError::Shape(format!(
            "rollout has {} points, demonstration has {}",
            points.len(),
            demo.len()
        )));
    }
    let mut terms = Vec::with_capacity(points.len());
    for (p, y) in points.iter().zip(demo.points()) {
        let y = tape.constant(y.clone(), Shape::vector(y.len()))?;
        terms.push(tape.sqnorm_diff(*p, y)?);
    }
    let all = tape.concat(&terms)?;
    let total = tape.sum(all)?;
    Ok(tape.scale(total, 1.0 / points.len() as f64)?)
}

/// Mean over examples of imitation loss plus `eta` times the constraint
/// loss at step 0. `formula` must be in negation normal form.
pub fn full_loss(
    tape: &mut Tape,
    model: &Model,
    vars: &NetVars,
    examples: &[(&[f64], &Trace)],
    formula: &Formula,
    cfg: &LossConfig,
    eta: f64,
) -> Result<Var, ModelError> {
    if examples.is_empty() {
        return Err(ModelError::Shape("no examples".into()));
    }
    let mut terms = Vec::with_capacity(examples.len());
    for (input, demo) in examples {
        let x = tape.constant(input.to_vec(), Shape::vector(input.len()))?;
        let tv = model.trajectory(tape, vars, x)?;
        let ld = imitation_loss(tape, &tv.points, demo)?;
        terms.push((ld, 1.0));
        if eta != 0.0 {
            let lc = constraint_loss(tape, formula, &tv, 0, cfg)?;
            terms.push((lc, eta));
        }
    }
    let total = tape.lincomb(&terms)?;
    Ok(tape.scale(total, 1.0 / examples.len() as f64)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(seed: u64) -> Model {
        Model::new(InputSchema::new(2, 1), DmpParams::new(4, 20), vec![8, 8], 1.0, seed).unwrap()
    }

    #[test]
    fn same_seed_same_params() {
        assert_eq!(tiny(3).net, tiny(3).net);
        assert_ne!(tiny(3).net, tiny(4).net);
    }

    #[test]
    fn zero_output_layer_emits_zero_weights() {
        let mut m = tiny(1);
        let last = m.net.layers.last_mut().unwrap();
        last.weight.iter_mut().for_each(|w| *w = 0.0);
        let w = m.net.forward_values(&[0.3, 0.1, 0.9, 0.4, 0.5, 0.5]).unwrap();
        assert_eq!(w, vec![0.0; 8]);
    }

    #[test]
    fn input_length_is_checked() {
        let m = tiny(1);
        assert!(m.rollout(&[0.0; 5]).is_err());
        assert!(m.net.forward_values(&[0.0; 7]).is_err());
    }

    #[test]
    fn hand_imitation_loss() {
        let demo = Trace::new(vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 0.0]], 0.5).unwrap();
        let mut tape = Tape::new();
        let pts: Vec<Var> = [[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]
            .iter()
            .map(|p| tape.constant(p.to_vec(), Shape::vector(2)).unwrap())
            .collect();
        let l = imitation_loss(&mut tape, &pts, &demo).unwrap();
        assert!((tape.scalar(l) - 1.0 / 3.0).abs() < 1e-15);
        assert!(imitation_loss(&mut tape, &pts[..2], &demo).is_err());
    }

    #[test]
    fn rollout_starts_at_input_start() {
        let m = tiny(2);
        let tr = m.rollout(&[0.2, 0.8, 0.9, 0.1, 0.5, 0.5]).unwrap();
        assert_eq!(tr.point(0), &[0.2, 0.8]);
        assert_eq!(tr.len(), 20);
    }
}
