//! Parse a specification, put it in negation normal form and check it
//! against a hand-made trace, subformula by subformula.
//!
//!     cargo run --example check_spec

use ltl_dmp::ltl::{eval_qualitative, parse_formula, to_nnf, InputSchema, Trace};
use ltl_dmp::quantloss::{loss_breakdown, LossConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let schema = InputSchema::new(2, 3);
    let spec = parse_formula("G (sqnorm(p - o2) >= 0.1) & !(F (p.y > 0.75))", &schema)?;
    println!("spec: {spec}");
    println!("nnf:  {}", to_nnf(&spec)?);

    // a straight line through the middle of the unit square
    let points = (0..20).map(|i| vec![i as f64 / 19.0, 0.5]).collect();
    let trace = Trace::new(points, 1.0 / 19.0)?;
    let objects = vec![vec![0.0, 0.0], vec![0.5, 0.6], vec![1.0, 1.0]];

    println!("holds: {}", eval_qualitative(&spec, &trace, 0, &objects)?);
    for row in loss_breakdown(&spec, &trace, &objects, &LossConfig::hard())? {
        println!(
            "{:indent$}{:<10} loss {:.4} {}",
            "",
            row.operator,
            row.loss,
            if row.satisfied { "ok" } else { "VIOLATED" },
            indent = 2 * row.depth
        );
    }
    Ok(())
}
