//! Check the pouring and reaching specifications on the bundled 6-D
//! end-effector recordings, and plot one panel per axis.
//!
//!     cargo run --example robot_specs [out-dir]

use ltl_dmp::ltl::{eval_qualitative, parse_formula, to_nnf, InputSchema};
use ltl_dmp::plot::axes_svg;
use ltl_dmp::quantloss::{trace_loss, LossConfig};
use ltl_dmp::tasks::load_trace;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::path::PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| ".".into()));
    let root = env!("CARGO_MANIFEST_DIR");
    let schema = InputSchema::new(6, 3);

    for name in ["pour", "reach"] {
        let spec = parse_formula(&std::fs::read_to_string(format!("{root}/specs/{name}.ltl"))?, &schema)?;
        let file = load_trace(format!("{root}/data/{name}.json"))?;
        let trace = file.trace()?;
        println!("{name}: {} poses at {} Hz", trace.len(), (1.0 / trace.dt()).round());
        println!("  spec {spec}");
        println!("  nnf  {}", to_nnf(&spec)?);
        println!(
            "  holds {}  hard {:.4}  soft {:+.4}",
            eval_qualitative(&spec, &trace, 0, &file.objects)?,
            trace_loss(&spec, &trace, &file.objects, &LossConfig::hard())?,
            trace_loss(&spec, &trace, &file.objects, &LossConfig::default())?
        );
        let path = out.join(format!("{name}_axes.svg"));
        std::fs::write(&path, axes_svg(&trace, None))?;
        println!("  wrote {}", path.display());
    }
    Ok(())
}
