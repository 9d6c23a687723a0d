//! Synthetic 2-D benchmark curves, the built-in constraint templates, and
//! dataset and trace files.

mod io;
mod spline;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use io::{
    dataset_from_str, dataset_to_string, load_dataset, load_trace, save_dataset, save_trace, TraceFile, FORMAT_VERSION,
};
pub use spline::NaturalSpline;

use crate::ltl::{Cmp, Formula, InputSchema, LtlError, Term, Trace};

#[derive(Debug, Error)]
pub enum TaskError {
    #[error("unknown specification `{0}` (expected avoid, patrol, steady or slow)")]
    UnknownSpec(String),
    #[error("unsupported file version {found}, expected {expected}")]
    Version { found: u64, expected: u64 },
    #[error("schema mismatch: {0}")]
    Schema(String),
    #[error("malformed file: {0}")]
    Malformed(String),
    #[error(transparent)]
    Ltl(#[from] LtlError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Points per synthetic demonstration.
pub const STEPS: usize = 100;
/// Objects per synthetic scene.
pub const OBJECTS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataSchema {
    pub d: usize,
    pub k_objects: usize,
    pub t: usize,
}

impl DataSchema {
    pub fn input_schema(&self) -> InputSchema {
        InputSchema::new(self.d, self.k_objects)
    }

    pub fn input_len(&self) -> usize {
        self.d * (2 + self.k_objects)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Demonstration {
    pub seed: u64,
    pub input: Vec<f64>,
    pub trajectory: Trace,
    pub task: String,
}

impl Demonstration {
    pub fn objects(&self, schema: &DataSchema) -> Vec<Vec<f64>> {
        crate::model::input_objects(&self.input, &schema.input_schema())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub schema: DataSchema,
    pub demos: Vec<Demonstration>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.demos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.demos.is_empty()
    }

    /// Checks every demonstration against the schema.
    pub fn validate(&self) -> Result<(), TaskError> {
        let s = &self.schema;
        for (i, demo) in self.demos.iter().enumerate() {
            if demo.input.len() != s.input_len() {
                return Err(TaskError::Schema(format!(
                    "demo {i}: input has length {}, expected {}",
                    demo.input.len(),
                    s.input_len()
                )));
            }
            if demo.trajectory.len() != s.t || demo.trajectory.dim() != s.d {
                return Err(TaskError::Schema(format!(
                    "demo {i}: trajectory is {}x{}, expected {}x{}",
                    demo.trajectory.len(),
                    demo.trajectory.dim(),
                    s.t,
                    s.d
                )));
            }
            if !demo.input.iter().all(|x| x.is_finite()) {
                return Err(TaskError::Malformed(format!("demo {i}: non-finite input")));
            }
        }
        Ok(())
    }

    /// Splits off the last `n` demonstrations.
    pub fn split_off(&mut self, n: usize) -> Dataset {
        let at = self.demos.len().saturating_sub(n);
        Dataset {
            schema: self.schema,
            demos: self.demos.split_off(at),
        }
    }
}

fn point(rng: &mut ChaCha8Rng) -> Vec<f64> {
    vec![rng.gen::<f64>(), rng.gen::<f64>()]
}

/// A natural cubic spline through start, two interior points and end, all
/// uniform in the unit square, sampled at 100 equal parameter steps, with
/// three objects uniform in the unit square.
pub fn gen_demo(seed: u64) -> Demonstration {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let knots: Vec<Vec<f64>> = (0..4).map(|_| point(&mut rng)).collect();
    let objects: Vec<Vec<f64>> = (0..OBJECTS).map(|_| point(&mut rng)).collect();
    let spline = NaturalSpline::uniform(&knots);
    let points: Vec<Vec<f64>> = (0..STEPS)
        .map(|k| spline.eval(k as f64 / (STEPS - 1) as f64))
        .collect();
    let mut input = Vec::with_capacity(2 * (2 + OBJECTS));
    input.extend(&points[0]);
    input.extend(&points[STEPS - 1]);
    for o in &objects {
        input.extend(o);
    }
    let trajectory = Trace::new(points, 1.0 / (STEPS - 1) as f64).expect("spline samples are finite");
    Demonstration {
        seed,
        input,
        trajectory,
        task: String::new(),
    }
}

/// Whether the endpoints of `demo` leave the task's state constraint
/// satisfiable: a rollout always starts at the start and settles near the
/// goal, so neither may sit inside the avoided disk or outside the band.
/// For `compose` the patrol targets must also be reachable.
pub fn endpoints_feasible(task: &str, demo: &Demonstration) -> bool {
    let ends = [&demo.input[0..2], &demo.input[2..4]];
    match task {
        "avoid" => {
            let o2 = &demo.input[6..8];
            ends.iter().all(|p| crate::autodiff::sqnorm_diff(p, o2) >= 0.1)
        }
        "steady" => ends.iter().all(|p| (0.25..=0.75).contains(&p[1])),
        "compose" => {
            // avoid o1, stay in the band, and reach o2 and o3
            let o1 = &demo.input[4..6];
            let must_visit = [&demo.input[6..8], &demo.input[8..10]];
            ends.iter()
                .chain(&must_visit)
                .all(|p| crate::autodiff::sqnorm_diff(p, o1) >= 0.1 && (0.25..=0.75).contains(&p[1]))
        }
        _ => true,
    }
}

/// `count` demonstrations whose seeds are drawn from `seed`, skipping
/// scenes whose endpoints make the task's constraint unsatisfiable.
pub fn gen_dataset(task: &str, count: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut demos = Vec::with_capacity(count);
    while demos.len() < count {
        let mut demo = gen_demo(rng.gen());
        if endpoints_feasible(task, &demo) {
            demo.task = task.to_string();
            demos.push(demo);
        }
    }
    Dataset {
        schema: DataSchema {
            d: 2,
            k_objects: OBJECTS,
            t: STEPS,
        },
        demos,
    }
}

pub const BUILTIN_SPECS: [&str; 4] = ["avoid", "patrol", "steady", "slow"];

/// The four 2-D constraint templates.
pub fn builtin_spec(name: &str) -> Result<Formula, TaskError> {
    let py = || Term::Pos.component(1);
    Ok(match name {
        "avoid" => Formula::always(Formula::atom(
            Term::Pos.minus(Term::Object(1)).sqnorm(),
            Cmp::Ge,
            Term::Scalar(0.1),
        )),
        "patrol" => Formula::and(
            Formula::eventually(Formula::atom(Term::Pos, Cmp::Eq, Term::Object(1))),
            Formula::eventually(Formula::atom(Term::Pos, Cmp::Eq, Term::Object(2))),
        ),
        "steady" => Formula::always(Formula::and(
            Formula::atom(py(), Cmp::Ge, Term::Scalar(0.25)),
            Formula::atom(py(), Cmp::Le, Term::Scalar(0.75)),
        )),
        "slow" => Formula::always(Formula::atom(Term::Vel.norm(), Cmp::Le, Term::Scalar(0.015))),
        other => return Err(TaskError::UnknownSpec(other.to_string())),
    })
}

/// Right-folded conjunction.
pub fn compose_specs(specs: Vec<Formula>) -> Option<Formula> {
    specs.into_iter().rev().reduce(|acc, f| Formula::and(f, acc))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ltl::eval_qualitative;

    #[test]
    fn demos_are_deterministic_and_consistent() {
        let a = gen_demo(5);
        assert_eq!(a, gen_demo(5));
        assert_ne!(a, gen_demo(6));
        assert_eq!(a.trajectory.len(), 100);
        assert_eq!(&a.input[0..2], a.trajectory.point(0));
        assert_eq!(&a.input[2..4], a.trajectory.point(99));
        assert!(a.input.iter().all(|x| (0.0..=1.0).contains(x)));
    }

    #[test]
    fn unknown_spec_is_rejected() {
        assert!(matches!(builtin_spec("dance"), Err(TaskError::UnknownSpec(_))));
    }

    #[test]
    fn compose_folds_right() {
        let [a, b, c] = ["avoid", "steady", "patrol"].map(|n| builtin_spec(n).unwrap());
        assert_eq!(compose_specs(vec![a.clone()]), Some(a.clone()));
        assert_eq!(
            compose_specs(vec![a.clone(), b.clone(), c.clone()]),
            Some(Formula::and(a, Formula::and(b, c)))
        );
        assert_eq!(compose_specs(vec![]), None);
    }

    #[test]
    fn steady_holds_inside_band() {
        let tr = Trace::new((0..10).map(|t| vec![t as f64 / 9.0, 0.5]).collect(), 0.1).unwrap();
        assert!(eval_qualitative(&builtin_spec("steady").unwrap(), &tr, 0, &[]).unwrap());
    }

    #[test]
    fn dataset_split() {
        let mut ds = gen_dataset("avoid", 12, 1);
        let test = ds.split_off(2);
        assert_eq!((ds.len(), test.len()), (10, 2));
        ds.validate().unwrap();
        assert!(ds.demos.iter().all(|d| d.task == "avoid"));
    }
}
