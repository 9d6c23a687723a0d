//! Learn one demonstration with and without a constraint and draw both
//! rollouts next to the demonstration.
//!
//!     cargo run --release --example one_shot [task] [seed] [out-dir]

use ltl_dmp::plot::scene_svg;
use ltl_dmp::tasks::{builtin_spec, gen_dataset};
use ltl_dmp::training::{evaluate, train, ModelConfig, TrainConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let task = args.next().unwrap_or_else(|| "avoid".into());
    let seed: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0);
    let out = std::path::PathBuf::from(args.next().unwrap_or_else(|| ".".into()));

    let data = gen_dataset(&task, 1, seed);
    let spec = builtin_spec(&task)?;
    let demo = &data.demos[0];

    for (label, eta) in [("unconstrained", 0.0), ("constrained", 1.0)] {
        let cfg = TrainConfig {
            eta,
            seed,
            ..TrainConfig::default()
        };
        let mut model = ModelConfig::default().build(&data.schema, seed)?;
        let history = train(&mut model, &data, None, Some(&spec), &cfg, |m| {
            if m.epoch % 50 == 0 {
                println!("  {label} epoch {:>3}  Ld {:.5}  Lc {:.5}", m.epoch, m.train_ld, m.train_lc_hard.unwrap_or(0.0));
            }
        })?;
        let e = evaluate(&model, &data, Some(&spec), &cfg.soft_loss())?;
        println!(
            "{label}: Ld {:.5}  hard Lc {:.5}  satisfied {}  ({} ms)",
            e.imitation,
            e.constraint_hard.unwrap_or(0.0),
            e.satisfaction == Some(1.0),
            history.last().map_or(0, |m| m.wall_ms)
        );
        let learned = model.rollout(&demo.input)?;
        let path = out.join(format!("{task}_{label}.svg"));
        std::fs::write(&path, scene_svg(&demo.trajectory, Some(&learned), &demo.objects(&data.schema), Some(&spec)))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
