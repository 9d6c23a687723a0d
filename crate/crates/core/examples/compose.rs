//! Conjoin avoid, steady and patrol and train a single demonstration
//! against the whole conjunction. Prints the loss of every conjunct.
//!
//!     cargo run --release --example compose [seed] [out.svg]

use ltl_dmp::model::input_objects;
use ltl_dmp::plot::scene_svg;
use ltl_dmp::quantloss::{loss_breakdown, LossConfig};
use ltl_dmp::tasks::{builtin_spec, compose_specs, gen_dataset};
use ltl_dmp::training::{train, ModelConfig, TrainConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(1);
    let out = args.next().unwrap_or_else(|| "compose.svg".into());

    // avoid o1 rather than o2, since o2 and o3 are the patrol targets
    let avoid = ltl_dmp::ltl::parse_formula("G (sqnorm(p - o1) >= 0.1)", &ltl_dmp::ltl::InputSchema::new(2, 3))?;
    let spec = compose_specs(vec![avoid, builtin_spec("steady")?, builtin_spec("patrol")?]).expect("three specs");
    println!("{spec}");

    let data = gen_dataset("compose", 1, seed);
    let mut model = ModelConfig::default().build(&data.schema, seed)?;
    let cfg = TrainConfig {
        seed,
        ..TrainConfig::default()
    };
    train(&mut model, &data, None, Some(&spec), &cfg, |_| {})?;

    let demo = &data.demos[0];
    let learned = model.rollout(&demo.input)?;
    let objects = input_objects(&demo.input, &model.schema);
    for row in loss_breakdown(&spec, &learned, &objects, &LossConfig::hard())?.iter().filter(|r| r.depth <= 2) {
        println!("{:indent$}{:<10} {:.5}  {}", "", row.operator, row.loss, row.formula, indent = 2 * row.depth);
    }
    std::fs::write(&out, scene_svg(&demo.trajectory, Some(&learned), &objects, Some(&spec)))?;
    println!("wrote {out}");
    Ok(())
}
