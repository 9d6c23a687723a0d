use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dmp::{Dmp, DmpParams};
use crate::ltl::InputSchema;

use super::{Layer, Model, ModelError, NetDims, NetworkParams};

pub const CHECKPOINT_VERSION: u32 = 1;

/// On-disk form of a trained model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub schema: InputSchema,
    pub dims: NetDims,
    pub seed: u64,
    pub output_scale: f64,
    pub layer_shapes: Vec<(usize, usize)>,
    pub params: Vec<f64>,
    pub dmp: DmpParams,
}

impl Checkpoint {
    pub fn from_model(model: &Model) -> Self {
        Checkpoint {
            version: CHECKPOINT_VERSION,
            schema: model.schema,
            dims: model.net.dims.clone(),
            seed: model.seed,
            output_scale: model.net.output_scale,
            layer_shapes: model.net.layers.iter().map(|l| (l.rows, l.cols)).collect(),
            params: model.net.flatten(),
            dmp: model.dmp.params().clone(),
        }
    }

    pub fn into_model(self) -> Result<Model, ModelError> {
        if self.version != CHECKPOINT_VERSION {
            return Err(ModelError::Checkpoint(format!(
                "unsupported version {}, expected {CHECKPOINT_VERSION}",
                self.version
            )));
        }
        self.dims.validate()?;
        if self.dims.layer_shapes() != self.layer_shapes {
            return Err(ModelError::Checkpoint("layer shapes disagree with dims".into()));
        }
        if self.dims.input != super::input_len(&self.schema) || self.dims.dim != self.schema.dim {
            return Err(ModelError::Checkpoint("network dims disagree with input schema".into()));
        }
        if self.dims.n_basis != self.dmp.n_basis() {
            return Err(ModelError::Checkpoint("basis count disagrees with primitive".into()));
        }
        let expected: usize = self.layer_shapes.iter().map(|(r, c)| r * c + r).sum();
        if self.params.len() != expected {
            return Err(ModelError::Checkpoint(format!(
                "expected {expected} parameters, found {}",
                self.params.len()
            )));
        }
        let mut rest = &self.params[..];
        let mut layers = Vec::with_capacity(self.layer_shapes.len());
        for &(rows, cols) in &self.layer_shapes {
            let (w, r) = rest.split_at(rows * cols);
            let (b, r) = r.split_at(rows);
            rest = r;
            layers.push(Layer {
                rows,
                cols,
                weight: w.to_vec(),
                bias: b.to_vec(),
            });
        }
        let net = NetworkParams {
            dims: self.dims,
            layers,
            output_scale: self.output_scale,
        };
        if !net.is_finite() {
            return Err(ModelError::Checkpoint("non-finite parameter".into()));
        }
        Ok(Model {
            net,
            dmp: Dmp::new(self.dmp)?,
            schema: self.schema,
            seed: self.seed,
        })
    }
}

impl Model {
    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ModelError> {
        let text = serde_json::to_string(&Checkpoint::from_model(self))
            .map_err(|e| ModelError::Checkpoint(e.to_string()))?;
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Model, ModelError> {
        let text = std::fs::read_to_string(path)?;
        let ck: Checkpoint = serde_json::from_str(&text).map_err(|e| ModelError::Checkpoint(e.to_string()))?;
        ck.into_model()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_preserves_every_parameter() {
        let m = Model::new(InputSchema::new(2, 3), DmpParams::new(5, 30), vec![6, 7], 3.0, 11).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        m.save(&path).unwrap();
        let back = Model::load(&path).unwrap();
        assert_eq!(back.net, m.net);
        assert_eq!(back.dmp.params(), m.dmp.params());
    }

    #[test]
    fn version_and_size_are_checked() {
        let m = Model::new(InputSchema::new(2, 3), DmpParams::new(5, 30), vec![6], 1.0, 1).unwrap();
        let mut ck = Checkpoint::from_model(&m);
        ck.version = 9;
        assert!(ck.into_model().is_err());
        let mut ck = Checkpoint::from_model(&m);
        ck.params.pop();
        assert!(ck.into_model().is_err());
    }
}
