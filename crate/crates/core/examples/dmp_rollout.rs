//! Roll out the movement primitive with zero and with random forcing
//! weights and report how the endpoint settles on the goal.
//!
//!     cargo run --example dmp_rollout

use ltl_dmp::dmp::{Dmp, DmpParams, Weights};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = DmpParams::new(30, 100);
    println!(
        "alpha_y {} beta_y {} alpha_x {} dt {:.5}",
        params.alpha_y, params.beta_y, params.alpha_x, params.dt
    );
    let dmp = Dmp::new(params)?;
    let phase = dmp.phase();
    println!("phase runs from {} to {:.5}", phase[0], phase[phase.len() - 1]);

    let (start, goal) = ([0.1, 0.2], [0.9, 0.7]);
    let zero = dmp.rollout_values(&Weights::zeros(30, 2), &start, &goal)?;

    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut random = Weights::zeros(30, 2);
    random.values.iter_mut().for_each(|w| *w = rng.gen_range(-200.0..200.0));
    let bent = dmp.rollout_values(&random, &start, &goal)?;

    for (label, pts) in [("zero forcing", &zero), ("random forcing", &bent)] {
        let end = &pts[pts.len() - 1];
        let far = pts
            .iter()
            .map(|p| ((p[0] - start[0]).powi(2) + (p[1] - start[1]).powi(2)).sqrt())
            .fold(0.0, f64::max);
        println!(
            "{label:<15} end ({:.4}, {:.4})  goal error {:.2e}  furthest from start {far:.3}",
            end[0],
            end[1],
            ((end[0] - goal[0]).powi(2) + (end[1] - goal[1]).powi(2)).sqrt()
        );
    }
    for t in (0..100).step_by(11) {
        println!("t = {t:>2}  zero ({:.3}, {:.3})  random ({:.3}, {:.3})", zero[t][0], zero[t][1], bent[t][0], bent[t][1]);
    }
    Ok(())
}
