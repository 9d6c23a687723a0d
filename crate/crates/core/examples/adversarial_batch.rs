//! Train on many scenes and compare, on unseen scenes, a model trained
//! without the constraint, with it on the training inputs only, and with
//! adversarially perturbed inputs.
//!
//!     cargo run --release --example adversarial_batch [task] [train] [test] [epochs]
//!
//! The full-size setting is `steady 100 20 200` and takes a few minutes.

use ltl_dmp::experiments::{batch, hard};
use ltl_dmp::training::{ModelConfig, TrainConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let task = args.next().unwrap_or_else(|| "steady".into());
    let train_count: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(32);
    let test_count: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(10);
    let epochs: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(60);

    let base = TrainConfig {
        epochs,
        epsilon: 0.01,
        ..TrainConfig::default()
    };
    let cell = batch(&task, 0, train_count, test_count, &ModelConfig::default(), &base)?;
    println!("{task}: {train_count} training scenes, {test_count} held out, {epochs} epochs");
    for (label, m) in [
        ("unconstrained", &cell.unconstrained),
        ("train-only", &cell.train_only),
        ("adversarial", &cell.adversarial),
    ] {
        println!(
            "  {label:<14} test Ld {:.5}  hard Lc {:.5}  satisfied {:.0}%",
            m.imitation,
            hard(m),
            100.0 * m.satisfaction.unwrap_or(0.0)
        );
    }
    Ok(())
}
