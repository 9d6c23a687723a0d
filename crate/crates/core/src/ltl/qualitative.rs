//! Boolean semantics over finite traces.
//!
//! `G`, `F` and `U` quantify over the remaining suffix `i..T`; `N` at the
//! last step looks at the last step again. Vector comparisons hold when
//! every component holds, except `!=`, which holds when any component
//! differs.

use serde::{Deserialize, Serialize};

use super::ast::{Atom, Cmp, Formula, Term};
use super::LtlError;

/// A `T x d` sequence of poses sampled every `dt`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    points: Vec<Vec<f64>>,
    dt: f64,
}

impl Trace {
    pub fn new(points: Vec<Vec<f64>>, dt: f64) -> Result<Self, LtlError> {
        if points.len() < 2 {
            return Err(LtlError::Trace(format!("need at least 2 points, got {}", points.len())));
        }
        let d = points[0].len();
        if d == 0 {
            return Err(LtlError::Trace("points must have at least one axis".into()));
        }
        if let Some(t) = points.iter().position(|p| p.len() != d) {
            return Err(LtlError::Trace(format!("point {t} has {} axes, expected {d}", points[t].len())));
        }
        if !points.iter().flatten().all(|x| x.is_finite()) || !dt.is_finite() {
            return Err(LtlError::Trace("non-finite entry".into()));
        }
        Ok(Trace { points, dt })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn point(&self, t: usize) -> &[f64] {
        &self.points[t]
    }

    /// Forward difference `p[t+1] - p[t]`; the last step repeats the
    /// previous difference.
    pub fn velocity(&self, t: usize) -> Vec<f64> {
        let t = t.min(self.len() - 2);
        self.points[t + 1]
            .iter()
            .zip(&self.points[t])
            .map(|(a, b)| a - b)
            .collect()
    }

    pub fn velocities(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|t| self.velocity(t)).collect()
    }
}

/// Value of `term` at step `t`. Arithmetic order matches the
/// differentiable evaluator so both agree bit for bit.
pub fn term_value(term: &Term, trace: &Trace, t: usize, objects: &[Vec<f64>]) -> Vec<f64> {
    match term {
        Term::Pos => trace.point(t).to_vec(),
        Term::Vel => trace.velocity(t),
        Term::Object(k) => objects[*k].clone(),
        Term::Vector(v) => v.clone(),
        Term::Scalar(x) => vec![*x],
        Term::Component(inner, axis) => vec![term_value(inner, trace, t, objects)[*axis]],
        Term::Slice(inner, start, len) => term_value(inner, trace, t, objects)[*start..start + len].to_vec(),
        Term::SqNorm(inner) => vec![sqnorm(&term_value(inner, trace, t, objects))],
        Term::Norm(inner) => vec![sqnorm(&term_value(inner, trace, t, objects)).sqrt()],
        Term::Add(a, b) => zip(term_value(a, trace, t, objects), term_value(b, trace, t, objects), |x, y| x + y),
        Term::Sub(a, b) => zip(term_value(a, trace, t, objects), term_value(b, trace, t, objects), |x, y| x - y),
        Term::Scale(c, inner) => term_value(inner, trace, t, objects).into_iter().map(|x| c * x).collect(),
    }
}

fn sqnorm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).fold(0.0, |acc, x| acc + x)
}

fn zip(a: Vec<f64>, b: Vec<f64>, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    a.into_iter().zip(b).map(|(x, y)| f(x, y)).collect()
}

pub fn atom_holds(atom: &Atom, trace: &Trace, t: usize, objects: &[Vec<f64>]) -> bool {
    let lhs = term_value(&atom.lhs, trace, t, objects);
    let rhs = term_value(&atom.rhs, trace, t, objects);
    let mut pairs = lhs.iter().zip(&rhs);
    match atom.op {
        Cmp::Ne => pairs.any(|(a, b)| a != b),
        op => pairs.all(|(a, b)| op.holds(*a, *b)),
    }
}

/// Whether `formula` holds at step `i` of `trace`.
pub fn eval_qualitative(formula: &Formula, trace: &Trace, i: usize, objects: &[Vec<f64>]) -> Result<bool, LtlError> {
    if i >= trace.len() {
        return Err(LtlError::StepOutOfRange { step: i, len: trace.len() });
    }
    Ok(holds(formula, trace, i, objects))
}

fn holds(f: &Formula, tr: &Trace, i: usize, objects: &[Vec<f64>]) -> bool {
    let last = tr.len() - 1;
    match f {
        Formula::Atom(a) => atom_holds(a, tr, i, objects),
        Formula::Not(g) => !holds(g, tr, i, objects),
        Formula::And(a, b) => holds(a, tr, i, objects) && holds(b, tr, i, objects),
        Formula::Or(a, b) => holds(a, tr, i, objects) || holds(b, tr, i, objects),
        Formula::Implies(a, b) => !holds(a, tr, i, objects) || holds(b, tr, i, objects),
        Formula::Next(g) => holds(g, tr, (i + 1).min(last), objects),
        Formula::Always(g) => (i..=last).all(|j| holds(g, tr, j, objects)),
        Formula::Eventually(g) => (i..=last).any(|j| holds(g, tr, j, objects)),
        Formula::Until(a, b) => {
            // first witness of b, with a holding on every step up to and including it
            for j in i..=last {
                if !holds(a, tr, j, objects) {
                    return false;
                }
                if holds(b, tr, j, objects) {
                    return true;
                }
            }
            false
        }
    }
}
