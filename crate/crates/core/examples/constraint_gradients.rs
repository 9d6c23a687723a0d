//! Soft and hard constraint losses of the four built-in templates on a
//! generated demonstration, and the gradient of the soft loss with respect
//! to the trajectory points.
//!
//!     cargo run --example constraint_gradients [seed]

use ltl_dmp::autodiff::{Shape, Tape};
use ltl_dmp::quantloss::{constraint_loss, trace_loss, LossConfig, TraceVars};
use ltl_dmp::tasks::{builtin_spec, gen_demo, BUILTIN_SPECS};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(3);
    let demo = gen_demo(seed);
    let objects: Vec<Vec<f64>> = demo.input[4..].chunks(2).map(|c| c.to_vec()).collect();
    let soft = LossConfig::default();

    for name in BUILTIN_SPECS {
        let spec = builtin_spec(name)?;
        let hard = trace_loss(&spec, &demo.trajectory, &objects, &LossConfig::hard())?;

        let mut tape = Tape::new();
        let flat: Vec<f64> = demo.trajectory.points().concat();
        let all = tape.leaf(flat, Shape::matrix(demo.trajectory.len(), 2))?;
        let rows = (0..demo.trajectory.len()).map(|t| tape.row(all, t)).collect::<Result<_, _>>()?;
        let objs = objects
            .iter()
            .map(|o| tape.constant(o.clone(), Shape::vector(2)))
            .collect::<Result<_, _>>()?;
        let tv = TraceVars::new(&mut tape, rows, objs)?;
        let loss = constraint_loss(&mut tape, &spec, &tv, 0, &soft)?;
        let grad = tape.backward(loss)?.wrt(all);

        // the step the soft loss would move most
        let (t, g) = grad
            .chunks(2)
            .map(|g| (g[0] * g[0] + g[1] * g[1]).sqrt())
            .enumerate()
            .fold((0, 0.0), |best, (t, g)| if g > best.1 { (t, g) } else { best });
        println!(
            "{name:<7} hard {hard:.4}  soft {:+.4}  steepest at t = {t} (|grad| {g:.3e})",
            tape.scalar(loss)
        );
    }
    Ok(())
}
