#![allow(dead_code)]

use ltl_dmp::autodiff::{Shape, Tape, Var};
use ltl_dmp::ltl::{Cmp, Formula, InputSchema, Term, Trace};
use rand::seq::SliceRandom;
use rand::Rng;

pub const SCHEMA: InputSchema = InputSchema { dim: 2, objects: 3 };

/// Values on a coarse dyadic grid so equalities actually occur and all
/// sums and differences stay exact.
const GRID: [f64; 5] = [-0.5, -0.25, 0.0, 0.25, 0.5];

fn grid(rng: &mut impl Rng) -> f64 {
    *GRID.choose(rng).unwrap()
}

fn vector_term(rng: &mut impl Rng, depth: usize) -> Term {
    let leaf = depth == 0 || rng.gen_bool(0.5);
    if leaf {
        return match rng.gen_range(0..5) {
            0 => Term::Pos,
            1 => Term::Vel,
            2 => Term::Object(rng.gen_range(0..3)),
            3 => Term::Vector(vec![grid(rng), grid(rng)]),
            _ => Term::Slice(Box::new(Term::Pos), 0, 2),
        };
    }
    match rng.gen_range(0..3) {
        0 => vector_term(rng, depth - 1).minus(vector_term(rng, depth - 1)),
        1 => vector_term(rng, depth - 1).plus(vector_term(rng, depth - 1)),
        _ => Term::Scale(*[-1.0, 0.5, 2.0].choose(rng).unwrap(), Box::new(vector_term(rng, depth - 1))),
    }
}

fn scalar_term(rng: &mut impl Rng, depth: usize) -> Term {
    let leaf = depth == 0 || rng.gen_bool(0.4);
    if leaf {
        return match rng.gen_range(0..3) {
            0 => Term::Scalar(grid(rng)),
            1 => Term::Pos.component(rng.gen_range(0..2)),
            _ => Term::Object(rng.gen_range(0..3)).component(rng.gen_range(0..2)),
        };
    }
    match rng.gen_range(0..6) {
        0 => vector_term(rng, depth - 1).sqnorm(),
        1 => vector_term(rng, depth - 1).norm(),
        2 => vector_term(rng, depth - 1).component(rng.gen_range(0..2)),
        3 => scalar_term(rng, depth - 1).minus(scalar_term(rng, depth - 1)),
        4 => Term::Scale(*[-1.0, 0.5, 2.0].choose(rng).unwrap(), Box::new(scalar_term(rng, depth - 1))),
        _ => Term::Vel.norm(),
    }
}

pub fn random_atom(rng: &mut impl Rng) -> Formula {
    let op = *Cmp::ALL.choose(rng).unwrap();
    if rng.gen_bool(0.6) {
        Formula::atom(scalar_term(rng, 2), op, scalar_term(rng, 2))
    } else {
        Formula::atom(vector_term(rng, 2), op, vector_term(rng, 2))
    }
}

/// Random formula over the 2-D, three-object schema. Until never appears
/// under a negation (explicit or on the left of an implication).
pub fn random_formula(rng: &mut impl Rng, depth: usize, allow_until: bool) -> Formula {
    if depth == 0 || rng.gen_bool(0.2) {
        return random_atom(rng);
    }
    let d = depth - 1;
    let upper = if allow_until { 8 } else { 7 };
    match rng.gen_range(0..upper) {
        0 => Formula::not(random_formula(rng, d, false)),
        1 => Formula::and(random_formula(rng, d, allow_until), random_formula(rng, d, allow_until)),
        2 => Formula::or(random_formula(rng, d, allow_until), random_formula(rng, d, allow_until)),
        3 => Formula::implies(random_formula(rng, d, false), random_formula(rng, d, allow_until)),
        4 => Formula::next(random_formula(rng, d, allow_until)),
        5 => Formula::always(random_formula(rng, d, allow_until)),
        6 => Formula::eventually(random_formula(rng, d, allow_until)),
        _ => Formula::until(random_formula(rng, d, allow_until), random_formula(rng, d, allow_until)),
    }
}

pub fn random_trace(rng: &mut impl Rng, max_len: usize) -> (Trace, Vec<Vec<f64>>) {
    let t = rng.gen_range(2..=max_len);
    let points = (0..t).map(|_| vec![grid(rng), grid(rng)]).collect();
    let objects = (0..3).map(|_| vec![grid(rng), grid(rng)]).collect();
    (Trace::new(points, 0.1).unwrap(), objects)
}

/// Random trace with continuous coordinates, away from grid ties.
pub fn smooth_trace(rng: &mut impl Rng, t: usize) -> (Trace, Vec<Vec<f64>>) {
    let points = (0..t).map(|_| vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]).collect();
    let objects = (0..3).map(|_| vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]).collect();
    (Trace::new(points, 0.1).unwrap(), objects)
}

/// Every operator name that occurs in `f`.
pub fn operators(f: &Formula, out: &mut std::collections::BTreeSet<&'static str>) {
    out.insert(f.operator_name());
    match f {
        Formula::Atom(_) => {}
        Formula::Not(g) | Formula::Next(g) | Formula::Always(g) | Formula::Eventually(g) => operators(g, out),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Until(a, b) => {
            operators(a, out);
            operators(b, out);
        }
    }
}

/// Relative error between an analytic and a numeric gradient. The scale
/// is floored at 1e-6: below that, central differences at h = 1e-6 are
/// dominated by rounding (about eps * |f| / h), so flat regions are judged
/// by absolute error instead.
pub fn rel_err(analytic: &[f64], numeric: &[f64]) -> f64 {
    let diff = analytic.iter().zip(numeric).map(|(a, n)| (a - n).abs()).fold(0.0, f64::max);
    let scale = analytic.iter().chain(numeric).map(|x| x.abs()).fold(1e-6, f64::max);
    diff / scale
}

/// Central differences of `f` at `x`.
pub fn numeric_gradient(x: &[f64], h: f64, mut f: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
    let mut x = x.to_vec();
    (0..x.len())
        .map(|i| {
            let orig = x[i];
            x[i] = orig + h;
            let up = f(&x);
            x[i] = orig - h;
            let down = f(&x);
            x[i] = orig;
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Points of a trace recorded as one flattened leaf, split into rows.
pub fn trace_leaf(tape: &mut Tape, flat: &[f64], d: usize) -> (Var, Vec<Var>) {
    let t = flat.len() / d;
    let all = tape.leaf(flat.to_vec(), Shape::matrix(t, d)).unwrap();
    let rows = (0..t).map(|i| tape.row(all, i).unwrap()).collect();
    (all, rows)
}

/// Soft constraint-loss gradient of an NNF `formula` with respect to the
/// trace points, against central differences. Returns the relative error.
pub fn clause_gradient_error(formula: &Formula, trace: &Trace, objects: &[Vec<f64>]) -> f64 {
    use ltl_dmp::quantloss::{constraint_loss, trace_loss, LossConfig, TraceVars};
    let cfg = LossConfig::default();
    let d = trace.dim();
    let flat: Vec<f64> = trace.points().concat();
    let mut tape = Tape::new();
    let (leaf, rows) = trace_leaf(&mut tape, &flat, d);
    let objs = objects
        .iter()
        .map(|o| tape.constant(o.clone(), Shape::vector(d)).unwrap())
        .collect();
    let tv = TraceVars::new(&mut tape, rows, objs).unwrap();
    let loss = constraint_loss(&mut tape, formula, &tv, 0, &cfg).unwrap();
    let analytic = tape.backward(loss).unwrap().wrt(leaf);
    let numeric = numeric_gradient(&flat, 1e-6, |x| {
        let pts = x.chunks(d).map(|c| c.to_vec()).collect();
        trace_loss(formula, &Trace::new(pts, trace.dt()).unwrap(), objects, &cfg).unwrap()
    });
    rel_err(&analytic, &numeric)
}

/// Gradient of a random projection of the primitive's final point with
/// respect to weights, start and goal, against central differences.
pub fn dmp_endpoint_gradient_error(rng: &mut impl Rng) -> f64 {
    use ltl_dmp::dmp::{Dmp, DmpParams, Weights};
    let (n, d) = (30, 2);
    let dmp = Dmp::new(DmpParams::new(n, 100)).unwrap();
    let mut x: Vec<f64> = (0..n * d).map(|_| rng.gen_range(-50.0..50.0)).collect();
    x.extend((0..2 * d).map(|_| rng.gen_range(-0.5..1.5)));
    let c: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();

    let mut tape = Tape::new();
    let w = tape.leaf(x[..n * d].to_vec(), Shape::matrix(n, d)).unwrap();
    let s = tape.leaf(x[n * d..n * d + d].to_vec(), Shape::vector(d)).unwrap();
    let g = tape.leaf(x[n * d + d..].to_vec(), Shape::vector(d)).unwrap();
    let pts = dmp.rollout(&mut tape, w, s, g).unwrap();
    let cv = tape.constant(c.clone(), Shape::vector(d)).unwrap();
    let out = tape.dot(*pts.last().unwrap(), cv).unwrap();
    let grads = tape.backward(out).unwrap();
    let analytic: Vec<f64> = [grads.wrt(w), grads.wrt(s), grads.wrt(g)].concat();

    let numeric = numeric_gradient(&x, 1e-5, |x| {
        let weights = Weights {
            n_basis: n,
            dim: d,
            values: x[..n * d].to_vec(),
        };
        let pts = dmp.rollout_values(&weights, &x[n * d..n * d + d], &x[n * d + d..]).unwrap();
        pts.last().unwrap().iter().zip(&c).map(|(p, c)| p * c).sum()
    });
    rel_err(&analytic, &numeric)
}

/// Gradient of the constrained training loss on two demonstrations with
/// respect to `coords` randomly chosen network parameters.
pub fn full_loss_gradient_error(seed: u64, spec: &Formula, coords: usize) -> f64 {
    use ltl_dmp::ltl::to_nnf;
    use ltl_dmp::model::full_loss;
    use ltl_dmp::quantloss::LossConfig;
    use ltl_dmp::training::ModelConfig;
    use rand::SeedableRng;
    let data = ltl_dmp::tasks::gen_dataset("avoid", 2, seed);
    let model = ModelConfig {
        hidden: vec![16, 16],
        n_basis: 10,
        output_scale: 100.0,
    }
    .build(&data.schema, seed)
    .unwrap();
    let nnf = to_nnf(spec).unwrap();
    let cfg = LossConfig::default();
    let examples: Vec<(&[f64], &Trace)> = data.demos.iter().map(|d| (&d.input[..], &d.trajectory)).collect();

    let mut tape = Tape::new();
    let vars = model.net.bind(&mut tape, true).unwrap();
    let loss = full_loss(&mut tape, &model, &vars, &examples, &nnf, &cfg, 1.0).unwrap();
    let grads = tape.backward(loss).unwrap();
    let per_tensor: Vec<Vec<f64>> = vars.all().map(|v| grads.wrt(v)).collect();

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x9e37);
    let sizes: Vec<usize> = per_tensor.iter().map(|t| t.len()).collect();
    // distinct coordinates, so one perturbation is not overwritten by another
    let mut picks: Vec<(usize, usize)> = Vec::with_capacity(coords);
    while picks.len() < coords {
        let t = rng.gen_range(0..sizes.len());
        let pick = (t, rng.gen_range(0..sizes[t]));
        if !picks.contains(&pick) {
            picks.push(pick);
        }
    }
    let analytic: Vec<f64> = picks.iter().map(|&(t, i)| per_tensor[t][i]).collect();
    let x0: Vec<f64> = picks.iter().map(|&(t, i)| model.net.tensors()[t][i]).collect();
    let numeric = numeric_gradient(&x0, 1e-6, |x| {
        let mut m = model.clone();
        {
            let mut tensors = m.net.tensors_mut();
            for (&(t, i), v) in picks.iter().zip(x) {
                tensors[t][i] = *v;
            }
        }
        let mut tape = Tape::new();
        let vars = m.net.bind(&mut tape, false).unwrap();
        let loss = full_loss(&mut tape, &m, &vars, &examples, &nnf, &cfg, 1.0).unwrap();
        tape.scalar(loss)
    });
    rel_err(&analytic, &numeric)
}
