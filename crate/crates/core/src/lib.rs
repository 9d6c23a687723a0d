//! Learn movement primitives from demonstrations, then elaborate them so
//! their rollouts satisfy temporal-logic specifications.
//!
//! A specification is parsed ([`ltl::parse_formula`]), compiled into a
//! differentiable loss over a rolled-out trajectory
//! ([`quantloss::constraint_loss`]), and added to the imitation loss while
//! training the network that emits the primitive's basis weights
//! ([`training::train`]). An adversary perturbs inputs within a small box
//! so the constraint holds around each training scene, not only on it.
//!
//! ```no_run
//! use ltl_dmp::tasks::{builtin_spec, gen_dataset};
//! use ltl_dmp::training::{evaluate, train, ModelConfig, TrainConfig};
//!
//! let data = gen_dataset("avoid", 1, 0);
//! let spec = builtin_spec("avoid").unwrap();
//! let cfg = TrainConfig::default();
//! let mut model = ModelConfig::default().build(&data.schema, 0).unwrap();
//! train(&mut model, &data, None, Some(&spec), &cfg, |_| {}).unwrap();
//! let m = evaluate(&model, &data, Some(&spec), &cfg.soft_loss()).unwrap();
//! println!("{:?}", m.constraint_hard);
//! ```

pub mod autodiff;
pub mod cli;
pub mod dmp;
pub mod experiments;
pub mod ltl;
pub mod model;
pub mod plot;
pub mod quantloss;
pub mod tasks;
pub mod training;
