use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::autodiff::{Shape, Tape, Var};

use super::ModelError;

/// Layer sizes of the weight-generating network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetDims {
    pub input: usize,
    pub hidden: Vec<usize>,
    pub n_basis: usize,
    pub dim: usize,
}

impl NetDims {
    /// Two hidden layers of 256 units.
    pub fn new(input: usize, n_basis: usize, dim: usize) -> Self {
        NetDims {
            input,
            hidden: vec![256, 256],
            n_basis,
            dim,
        }
    }

    pub fn output(&self) -> usize {
        self.n_basis * self.dim
    }

    /// `(fan_out, fan_in)` for each layer, input to output.
    pub fn layer_shapes(&self) -> Vec<(usize, usize)> {
        let mut sizes = vec![self.input];
        sizes.extend(&self.hidden);
        sizes.push(self.output());
        sizes.windows(2).map(|w| (w[1], w[0])).collect()
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.input == 0 || self.n_basis == 0 || self.dim == 0 || self.hidden.contains(&0) {
            return Err(ModelError::Config(format!("zero-sized layer in {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub rows: usize,
    pub cols: usize,
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
}

/// Fully connected ReLU network mapping an input vector to basis weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkParams {
    pub dims: NetDims,
    pub layers: Vec<Layer>,
    /// Multiplier on the final layer's output.
    pub output_scale: f64,
}

/// Parameters recorded on a tape, one `(weight, bias)` pair per layer.
#[derive(Debug, Clone)]
pub struct NetVars {
    pub layers: Vec<(Var, Var)>,
}

impl NetVars {
    pub fn all(&self) -> impl Iterator<Item = Var> + '_ {
        self.layers.iter().flat_map(|(w, b)| [*w, *b])
    }
}

impl NetworkParams {
    /// Glorot-uniform weights and zero biases.
    pub fn init(seed: u64, dims: NetDims, output_scale: f64) -> Result<Self, ModelError> {
        dims.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = dims
            .layer_shapes()
            .into_iter()
            .map(|(rows, cols)| {
                let limit = (6.0 / (rows + cols) as f64).sqrt();
                Layer {
                    rows,
                    cols,
                    weight: (0..rows * cols).map(|_| rng.gen_range(-limit..limit)).collect(),
                    bias: vec![0.0; rows],
                }
            })
            .collect();
        Ok(NetworkParams {
            dims,
            layers,
            output_scale,
        })
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(|l| l.weight.len() + l.bias.len()).sum()
    }

    /// Parameter tensors in a fixed order: weight then bias, per layer.
    pub fn tensors(&self) -> Vec<&[f64]> {
        self.layers.iter().flat_map(|l| [&l.weight[..], &l.bias[..]]).collect()
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut Vec<f64>> {
        self.layers.iter_mut().flat_map(|l| [&mut l.weight, &mut l.bias]).collect()
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.tensors().concat()
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.iter().all(|x| x.is_finite()))
    }

    /// Records the parameters as leaves (`trainable`) or constants.
    pub fn bind(&self, tape: &mut Tape, trainable: bool) -> Result<NetVars, ModelError> {
        let mut put = |v: &[f64], shape| {
            if trainable {
                tape.leaf(v.to_vec(), shape)
            } else {
                tape.constant(v.to_vec(), shape)
            }
        };
        let mut layers = Vec::with_capacity(self.layers.len());
        for l in &self.layers {
            let w = put(&l.weight, Shape::matrix(l.rows, l.cols))?;
            let b = put(&l.bias, Shape::vector(l.rows))?;
            layers.push((w, b));
        }
        Ok(NetVars { layers })
    }

    /// Basis weights `n_basis x dim` for `input`.
    pub fn forward(&self, tape: &mut Tape, vars: &NetVars, input: Var) -> Result<Var, ModelError> {
        let shape = tape.shape(input);
        if shape != Shape::vector(self.dims.input) {
            return Err(ModelError::Shape(format!(
                "input has shape {shape}, expected a vector of length {}",
                self.dims.input
            )));
        }
        let mut h = input;
        let last = vars.layers.len() - 1;
        for (k, (w, b)) in vars.layers.iter().enumerate() {
            let z = tape.matvec(*w, h)?;
            let z = tape.add(z, *b)?;
            h = if k < last { tape.relu(z)? } else { z };
        }
        if self.output_scale != 1.0 {
            h = tape.scale(h, self.output_scale)?;
        }
        Ok(tape.reshape(h, Shape::matrix(self.dims.n_basis, self.dims.dim))?)
    }

    /// Forward pass on plain values.
    pub fn forward_values(&self, input: &[f64]) -> Result<Vec<f64>, ModelError> {
        let mut tape = Tape::new();
        let vars = self.bind(&mut tape, false)?;
        let x = tape.constant(input.to_vec(), Shape::vector(input.len()))?;
        let w = self.forward(&mut tape, &vars, x)?;
        Ok(tape.value(w).to_vec())
    }
}
