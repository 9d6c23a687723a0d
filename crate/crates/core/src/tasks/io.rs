use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::ltl::Trace;

use super::{DataSchema, Dataset, Demonstration, TaskError};

pub const FORMAT_VERSION: u64 = 1;

#[derive(Serialize, Deserialize)]
struct DatasetFile {
    version: u64,
    schema: DataSchema,
    demos: Vec<DemoRecord>,
}

#[derive(Serialize, Deserialize)]
struct DemoRecord {
    seed: u64,
    input: Vec<f64>,
    trajectory: Vec<Vec<f64>>,
    task: String,
}

/// A single recorded trajectory with the objects of its scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceFile {
    pub version: u64,
    pub schema: DataSchema,
    pub dt: f64,
    pub objects: Vec<Vec<f64>>,
    pub trajectory: Vec<Vec<f64>>,
    #[serde(default)]
    pub task: String,
}

impl TraceFile {
    pub fn new(trace: &Trace, objects: Vec<Vec<f64>>, task: &str) -> Self {
        TraceFile {
            version: FORMAT_VERSION,
            schema: DataSchema {
                d: trace.dim(),
                k_objects: objects.len(),
                t: trace.len(),
            },
            dt: trace.dt(),
            objects,
            trajectory: trace.points().to_vec(),
            task: task.to_string(),
        }
    }

    pub fn trace(&self) -> Result<Trace, TaskError> {
        Ok(Trace::new(self.trajectory.clone(), self.dt)?)
    }
}

fn parse_versioned<T: DeserializeOwned>(text: &str) -> Result<T, TaskError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| TaskError::Malformed(e.to_string()))?;
    let version = value
        .get("version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| TaskError::Malformed("missing integer `version`".into()))?;
    if version != FORMAT_VERSION {
        return Err(TaskError::Version {
            found: version,
            expected: FORMAT_VERSION,
        });
    }
    serde_json::from_value(value).map_err(|e| TaskError::Malformed(e.to_string()))
}

pub fn dataset_to_string(ds: &Dataset) -> String {
    let file = DatasetFile {
        version: FORMAT_VERSION,
        schema: ds.schema,
        demos: ds
            .demos
            .iter()
            .map(|d| DemoRecord {
                seed: d.seed,
                input: d.input.clone(),
                trajectory: d.trajectory.points().to_vec(),
                task: d.task.clone(),
            })
            .collect(),
    };
    serde_json::to_string(&file).expect("dataset serialises")
}

pub fn dataset_from_str(text: &str) -> Result<Dataset, TaskError> {
    let file: DatasetFile = parse_versioned(text)?;
    let dt = if file.schema.t > 1 { 1.0 / (file.schema.t - 1) as f64 } else { 1.0 };
    let demos = file
        .demos
        .into_iter()
        .map(|r| {
            Ok(Demonstration {
                seed: r.seed,
                input: r.input,
                trajectory: Trace::new(r.trajectory, dt).map_err(|e| TaskError::Malformed(e.to_string()))?,
                task: r.task,
            })
        })
        .collect::<Result<Vec<_>, TaskError>>()?;
    let ds = Dataset {
        schema: file.schema,
        demos,
    };
    ds.validate()?;
    Ok(ds)
}

pub fn save_dataset(ds: &Dataset, path: impl AsRef<Path>) -> Result<(), TaskError> {
    std::fs::write(path, dataset_to_string(ds))?;
    Ok(())
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset, TaskError> {
    dataset_from_str(&std::fs::read_to_string(path)?)
}

pub fn save_trace(file: &TraceFile, path: impl AsRef<Path>) -> Result<(), TaskError> {
    std::fs::write(path, serde_json::to_string(file).expect("trace serialises"))?;
    Ok(())
}

pub fn load_trace(path: impl AsRef<Path>) -> Result<TraceFile, TaskError> {
    let file: TraceFile = parse_versioned(&std::fs::read_to_string(path)?)?;
    let s = file.schema;
    if file.trajectory.len() != s.t || file.trajectory.iter().any(|p| p.len() != s.d) {
        return Err(TaskError::Schema(format!("trajectory does not match {}x{}", s.t, s.d)));
    }
    if file.objects.len() != s.k_objects || file.objects.iter().any(|o| o.len() != s.d) {
        return Err(TaskError::Schema(format!("expected {} objects of dimension {}", s.k_objects, s.d)));
    }
    file.trace()?;
    Ok(file)
}
