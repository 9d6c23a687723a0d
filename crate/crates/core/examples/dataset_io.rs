//! Generate task datasets, write them to disk, read them back, and save a
//! single demonstration as a trace file.
//!
//!     cargo run --example dataset_io [dir]

use ltl_dmp::ltl::eval_qualitative;
use ltl_dmp::tasks::{builtin_spec, gen_dataset, load_dataset, load_trace, save_dataset, save_trace, TraceFile};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::path::PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| std::env::temp_dir().display().to_string()));

    for task in ["avoid", "patrol", "steady", "slow"] {
        let data = gen_dataset(task, 100, 7);
        let spec = builtin_spec(task)?;
        let violated = data
            .demos
            .iter()
            .filter(|d| !eval_qualitative(&spec, &d.trajectory, 0, &d.objects(&data.schema)).unwrap_or(true))
            .count();
        let path = dir.join(format!("{task}.json"));
        save_dataset(&data, &path)?;
        let back = load_dataset(&path)?;
        assert_eq!(back, data);
        println!(
            "{task:<7} {} demos, {violated} violate the spec as demonstrated, {} bytes at {}",
            back.len(),
            std::fs::metadata(&path)?.len(),
            path.display()
        );
    }

    let data = gen_dataset("avoid", 1, 7);
    let demo = &data.demos[0];
    let file = TraceFile::new(&demo.trajectory, demo.objects(&data.schema), "avoid");
    let path = dir.join("avoid_trace.json");
    save_trace(&file, &path)?;
    assert_eq!(load_trace(&path)?, file);
    println!("trace file with {} points at {}", file.trajectory.len(), path.display());
    Ok(())
}
