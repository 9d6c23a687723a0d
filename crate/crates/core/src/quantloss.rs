//! Differentiable constraint loss for temporal-logic formulas.
//!
//! A formula in negation normal form compiles to a scalar tape node that
//! is zero when the formula holds (hard mode) and is a smooth upper
//! approximation of that value in soft mode. Conjunctions and `G` take a
//! (soft) maximum over child losses; disjunctions and `F` a (soft) minimum.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::autodiff::{logsumexp, AdError, Shape, Tape, Var};
use crate::ltl::{Atom, Cmp, Formula, LtlError, Term, Trace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossMode {
    Soft,
    Hard,
}

/// How `a U b` is scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UntilVariant {
    /// Soft-max over `j` of soft-min(`L(a, j)`, `L(b, i..=j)`).
    AsPrinted,
    /// Soft-min over witness steps `j` of soft-max(`L(b, j)`, `L(a, i..=j)`).
    Witness,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossConfig {
    pub gamma: f64,
    pub zeta: f64,
    pub mode: LossMode,
    pub until_variant: UntilVariant,
}

impl Default for LossConfig {
    fn default() -> Self {
        LossConfig {
            gamma: 0.005,
            zeta: 1e-3,
            mode: LossMode::Soft,
            until_variant: UntilVariant::Witness,
        }
    }
}

impl LossConfig {
    pub fn hard() -> Self {
        LossConfig {
            mode: LossMode::Hard,
            ..Default::default()
        }
    }

    pub fn with_mode(self, mode: LossMode) -> Self {
        LossConfig { mode, ..self }
    }

    pub fn validate(&self) -> Result<(), LossError> {
        if self.mode == LossMode::Soft && !(self.gamma > 0.0) {
            return Err(LossError::Config(format!("gamma must be positive, got {}", self.gamma)));
        }
        if !(self.zeta > 0.0) {
            return Err(LossError::Config(format!("zeta must be positive, got {}", self.zeta)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LossError {
    #[error("formula is not in negation normal form: {0}")]
    NotNnf(String),
    #[error(transparent)]
    Ltl(#[from] LtlError),
    #[error(transparent)]
    Autodiff(#[from] AdError),
    #[error("object o{0} is not present in the input")]
    UnknownObject(usize),
    #[error("dimension mismatch in atom `{0}`")]
    Dimension(String),
    #[error("step {step} out of range for trace of length {len}")]
    StepOutOfRange { step: usize, len: usize },
    #[error("invalid loss configuration: {0}")]
    Config(String),
}

/// Trajectory and static objects as tape nodes.
#[derive(Debug, Clone)]
pub struct TraceVars {
    pub points: Vec<Var>,
    pub velocities: Vec<Var>,
    pub objects: Vec<Var>,
}

impl TraceVars {
    /// Wraps rolled-out points, deriving forward-difference velocities.
    pub fn new(tape: &mut Tape, points: Vec<Var>, objects: Vec<Var>) -> Result<Self, LossError> {
        if points.len() < 2 {
            return Err(LtlError::Trace(format!("need at least 2 points, got {}", points.len())).into());
        }
        let mut velocities = Vec::with_capacity(points.len());
        for w in points.windows(2) {
            velocities.push(tape.sub(w[1], w[0])?);
        }
        velocities.push(*velocities.last().expect("at least one step"));
        Ok(TraceVars {
            points,
            velocities,
            objects,
        })
    }

    /// Records a fixed trace and object list as constants.
    pub fn constant(tape: &mut Tape, trace: &Trace, objects: &[Vec<f64>]) -> Result<Self, LossError> {
        let d = trace.dim();
        let points = trace
            .points()
            .iter()
            .map(|p| tape.constant(p.clone(), Shape::vector(d)))
            .collect::<Result<Vec<_>, _>>()?;
        let objects = objects
            .iter()
            .map(|o| tape.constant(o.clone(), Shape::vector(o.len())))
            .collect::<Result<Vec<_>, _>>()?;
        TraceVars::new(tape, points, objects)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// `gamma * ln(sum exp(x / gamma))`.
pub fn soft_max(tape: &mut Tape, xs: &[Var], gamma: f64) -> Result<Var, LossError> {
    if xs.is_empty() {
        return Err(AdError::Empty { op: "soft_max" }.into());
    }
    if xs.len() == 1 && tape.shape(xs[0]).is_scalar() {
        return Ok(xs[0]);
    }
    let v = tape.concat(xs)?;
    Ok(tape.logsumexp(v, gamma)?)
}

/// `-gamma * ln(sum exp(-x / gamma))`.
pub fn soft_min(tape: &mut Tape, xs: &[Var], gamma: f64) -> Result<Var, LossError> {
    if xs.is_empty() {
        return Err(AdError::Empty { op: "soft_min" }.into());
    }
    if xs.len() == 1 && tape.shape(xs[0]).is_scalar() {
        return Ok(xs[0]);
    }
    let v = tape.concat(xs)?;
    let neg = tape.neg(v)?;
    let m = tape.logsumexp(neg, gamma)?;
    Ok(tape.neg(m)?)
}

/// Plain-float counterparts, used for constant sub-losses.
pub fn soft_max_value(xs: &[f64], gamma: f64) -> f64 {
    logsumexp(xs, gamma)
}

pub fn soft_min_value(xs: &[f64], gamma: f64) -> f64 {
    let neg: Vec<f64> = xs.iter().map(|x| -x).collect();
    -logsumexp(&neg, gamma)
}

struct Compiler<'a> {
    tape: &'a mut Tape,
    trace: &'a TraceVars,
    cfg: LossConfig,
    memo: HashMap<(*const Formula, usize), Var>,
    statics: HashMap<*const Term, Var>,
}

impl Compiler<'_> {
    fn conj(&mut self, xs: &[Var]) -> Result<Var, LossError> {
        match self.cfg.mode {
            LossMode::Soft => soft_max(self.tape, xs, self.cfg.gamma),
            LossMode::Hard => self.extreme(xs, true),
        }
    }

    fn disj(&mut self, xs: &[Var]) -> Result<Var, LossError> {
        match self.cfg.mode {
            LossMode::Soft => soft_min(self.tape, xs, self.cfg.gamma),
            LossMode::Hard => self.extreme(xs, false),
        }
    }

    fn extreme(&mut self, xs: &[Var], max: bool) -> Result<Var, LossError> {
        if xs.len() == 1 && self.tape.shape(xs[0]).is_scalar() {
            return Ok(xs[0]);
        }
        let v = self.tape.concat(xs)?;
        Ok(if max { self.tape.max(v)? } else { self.tape.min(v)? })
    }

    /// Reduces a single vector node as a conjunction of its entries.
    fn conj_entries(&mut self, v: Var) -> Result<Var, LossError> {
        if self.tape.shape(v).is_scalar() {
            return Ok(v);
        }
        Ok(match self.cfg.mode {
            LossMode::Soft => self.tape.logsumexp(v, self.cfg.gamma)?,
            LossMode::Hard => self.tape.max(v)?,
        })
    }

    fn constant(&mut self, value: f64) -> Result<Var, LossError> {
        Ok(self.tape.constant_scalar(value)?)
    }

    fn is_static(term: &Term) -> bool {
        match term {
            Term::Pos | Term::Vel => false,
            Term::Object(_) | Term::Vector(_) | Term::Scalar(_) => true,
            Term::Component(t, _) | Term::Slice(t, _, _) | Term::SqNorm(t) | Term::Norm(t) | Term::Scale(_, t) => {
                Self::is_static(t)
            }
            Term::Add(a, b) | Term::Sub(a, b) => Self::is_static(a) && Self::is_static(b),
        }
    }

    fn term(&mut self, term: &Term, i: usize) -> Result<Var, LossError> {
        let is_static = Self::is_static(term);
        if is_static {
            if let Some(v) = self.statics.get(&(term as *const Term)) {
                return Ok(*v);
            }
        }
        let v = eval_term_at(self.tape, term, self.trace, i)?;
        if is_static {
            self.statics.insert(term as *const Term, v);
        }
        Ok(v)
    }

    fn ne_indicator(&self, a: f64, b: f64) -> f64 {
        if a == b {
            self.cfg.zeta
        } else {
            0.0
        }
    }

    /// Loss of a one-dimensional comparison.
    fn scalar_cmp(&mut self, a: Var, b: Var, op: Cmp) -> Result<Var, LossError> {
        let (av, bv) = (self.tape.scalar(a), self.tape.scalar(b));
        match op {
            Cmp::Le => {
                let d = self.tape.sub(a, b)?;
                Ok(self.tape.relu(d)?)
            }
            Cmp::Ge => self.scalar_cmp(b, a, Cmp::Le),
            Cmp::Ne => self.constant(self.ne_indicator(av, bv)),
            Cmp::Lt => {
                let le = self.scalar_cmp(a, b, Cmp::Le)?;
                let ne = self.scalar_cmp(a, b, Cmp::Ne)?;
                self.conj(&[le, ne])
            }
            Cmp::Gt => self.scalar_cmp(b, a, Cmp::Lt),
            Cmp::Eq => {
                let le = self.scalar_cmp(a, b, Cmp::Le)?;
                let ge = self.scalar_cmp(a, b, Cmp::Ge)?;
                self.conj(&[le, ge])
            }
        }
    }

    fn vector_cmp(&mut self, a: Var, b: Var, op: Cmp) -> Result<Var, LossError> {
        let k = self.tape.shape(a).len();
        if k == 1 {
            return self.scalar_cmp(a, b, op);
        }
        match op {
            Cmp::Le => {
                let d = self.tape.sub(a, b)?;
                let r = self.tape.relu(d)?;
                self.conj_entries(r)
            }
            Cmp::Ge => self.vector_cmp(b, a, Cmp::Le),
            Cmp::Eq => {
                let le = self.vector_cmp(a, b, Cmp::Le)?;
                let ge = self.vector_cmp(a, b, Cmp::Ge)?;
                self.conj(&[le, ge])
            }
            Cmp::Ne => {
                // differs in some component
                let ind: Vec<f64> = self
                    .tape
                    .value(a)
                    .iter()
                    .zip(self.tape.value(b))
                    .map(|(x, y)| self.ne_indicator(*x, *y))
                    .collect();
                let v = match self.cfg.mode {
                    LossMode::Soft => soft_min_value(&ind, self.cfg.gamma),
                    LossMode::Hard => ind.iter().copied().fold(f64::INFINITY, f64::min),
                };
                self.constant(v)
            }
            Cmp::Lt | Cmp::Gt => {
                let parts = self.components(a, b, op)?;
                self.conj(&parts)
            }
        }
    }

    fn components(&mut self, a: Var, b: Var, op: Cmp) -> Result<Vec<Var>, LossError> {
        let k = self.tape.shape(a).len();
        (0..k)
            .map(|c| {
                let ac = self.tape.index(a, c)?;
                let bc = self.tape.index(b, c)?;
                self.scalar_cmp(ac, bc, op)
            })
            .collect()
    }

    fn atom(&mut self, atom: &Atom, negated: bool, i: usize) -> Result<Var, LossError> {
        let a = self.term(&atom.lhs, i)?;
        let b = self.term(&atom.rhs, i)?;
        if self.tape.shape(a).len() != self.tape.shape(b).len() {
            return Err(LossError::Dimension(atom.to_string()));
        }
        let k = self.tape.shape(a).len();
        if !negated {
            return self.vector_cmp(a, b, atom.op);
        }
        let flipped = atom.op.flip();
        if k == 1 || matches!(atom.op, Cmp::Eq | Cmp::Ne) {
            return self.vector_cmp(a, b, flipped);
        }
        // some component violates the comparison
        let parts = self.components(a, b, flipped)?;
        self.disj(&parts)
    }

    fn formula(&mut self, f: &Formula, i: usize) -> Result<Var, LossError> {
        let key = (f as *const Formula, i);
        if let Some(v) = self.memo.get(&key) {
            return Ok(*v);
        }
        let last = self.trace.len() - 1;
        let v = match f {
            Formula::Atom(a) => self.atom(a, false, i)?,
            Formula::Not(g) => match &**g {
                Formula::Atom(a) => self.atom(a, true, i)?,
                _ => return Err(LossError::NotNnf(f.to_string())),
            },
            Formula::Implies(..) => return Err(LossError::NotNnf(f.to_string())),
            Formula::And(a, b) => {
                let (la, lb) = (self.formula(a, i)?, self.formula(b, i)?);
                self.conj(&[la, lb])?
            }
            Formula::Or(a, b) => {
                let (la, lb) = (self.formula(a, i)?, self.formula(b, i)?);
                self.disj(&[la, lb])?
            }
            Formula::Next(g) => self.formula(g, (i + 1).min(last))?,
            Formula::Always(g) => {
                let xs = (i..=last).map(|j| self.formula(g, j)).collect::<Result<Vec<_>, _>>()?;
                self.conj(&xs)?
            }
            Formula::Eventually(g) => {
                let xs = (i..=last).map(|j| self.formula(g, j)).collect::<Result<Vec<_>, _>>()?;
                self.disj(&xs)?
            }
            Formula::Until(a, b) => self.until(a, b, i)?,
        };
        self.memo.insert(key, v);
        Ok(v)
    }

    fn until(&mut self, a: &Formula, b: &Formula, i: usize) -> Result<Var, LossError> {
        let last = self.trace.len() - 1;
        let la = (i..=last).map(|j| self.formula(a, j)).collect::<Result<Vec<_>, _>>()?;
        let lb = (i..=last).map(|j| self.formula(b, j)).collect::<Result<Vec<_>, _>>()?;
        let mut outer = Vec::with_capacity(la.len());
        match self.cfg.until_variant {
            UntilVariant::Witness => {
                for j in 0..la.len() {
                    let mut xs = Vec::with_capacity(j + 2);
                    xs.push(lb[j]);
                    xs.extend_from_slice(&la[..=j]);
                    outer.push(self.conj(&xs)?);
                }
                self.disj(&outer)
            }
            UntilVariant::AsPrinted => {
                for j in 0..la.len() {
                    let mut xs = Vec::with_capacity(j + 2);
                    xs.push(la[j]);
                    xs.extend_from_slice(&lb[..=j]);
                    outer.push(self.disj(&xs)?);
                }
                self.conj(&outer)
            }
        }
    }
}

/// Value of `term` at step `i` as a tape node.
pub fn eval_term(tape: &mut Tape, term: &Term, trace: &TraceVars, i: usize) -> Result<Var, LossError> {
    if i >= trace.len() {
        return Err(LossError::StepOutOfRange { step: i, len: trace.len() });
    }
    eval_term_at(tape, term, trace, i)
}

fn eval_term_at(tape: &mut Tape, term: &Term, tr: &TraceVars, i: usize) -> Result<Var, LossError> {
    Ok(match term {
        Term::Pos => tr.points[i],
        Term::Vel => tr.velocities[i],
        Term::Object(k) => *tr.objects.get(*k).ok_or(LossError::UnknownObject(k + 1))?,
        Term::Vector(v) => tape.constant(v.clone(), Shape::vector(v.len()))?,
        Term::Scalar(x) => tape.constant_scalar(*x)?,
        Term::Component(t, axis) => {
            let v = eval_term_at(tape, t, tr, i)?;
            tape.index(v, *axis)?
        }
        Term::Slice(t, start, len) => {
            let v = eval_term_at(tape, t, tr, i)?;
            tape.slice(v, *start, *len)?
        }
        Term::SqNorm(t) => {
            let v = eval_term_at(tape, t, tr, i)?;
            sqnorm(tape, v)?
        }
        Term::Norm(t) => {
            let v = eval_term_at(tape, t, tr, i)?;
            let sq = sqnorm(tape, v)?;
            tape.sqrt(sq)?
        }
        Term::Add(a, b) => {
            let (x, y) = (eval_term_at(tape, a, tr, i)?, eval_term_at(tape, b, tr, i)?);
            tape.add(x, y)?
        }
        Term::Sub(a, b) => {
            let (x, y) = (eval_term_at(tape, a, tr, i)?, eval_term_at(tape, b, tr, i)?);
            tape.sub(x, y)?
        }
        Term::Scale(c, t) => {
            let v = eval_term_at(tape, t, tr, i)?;
            tape.scale(v, *c)?
        }
    })
}

fn sqnorm(tape: &mut Tape, v: Var) -> Result<Var, AdError> {
    let s = tape.shape(v);
    let zero = tape.constant(vec![0.0; s.len()], s)?;
    tape.sqnorm_diff(v, zero)
}

fn new_compiler<'a>(tape: &'a mut Tape, trace: &'a TraceVars, cfg: &LossConfig) -> Result<Compiler<'a>, LossError> {
    cfg.validate()?;
    Ok(Compiler {
        tape,
        trace,
        cfg: *cfg,
        memo: HashMap::new(),
        statics: HashMap::new(),
    })
}

/// Loss of a single atom (negated when it sits under `Not` in NNF).
pub fn atom_loss(
    tape: &mut Tape,
    atom: &Atom,
    negated: bool,
    trace: &TraceVars,
    i: usize,
    cfg: &LossConfig,
) -> Result<Var, LossError> {
    if i >= trace.len() {
        return Err(LossError::StepOutOfRange { step: i, len: trace.len() });
    }
    new_compiler(tape, trace, cfg)?.atom(atom, negated, i)
}

/// Compiles `formula` (which must be in NNF) at step `i`.
pub fn constraint_loss(
    tape: &mut Tape,
    formula: &Formula,
    trace: &TraceVars,
    i: usize,
    cfg: &LossConfig,
) -> Result<Var, LossError> {
    if !formula.is_nnf() {
        return Err(LossError::NotNnf(formula.to_string()));
    }
    if i >= trace.len() {
        return Err(LossError::StepOutOfRange { step: i, len: trace.len() });
    }
    new_compiler(tape, trace, cfg)?.formula(formula, i)
}

/// Loss value of `formula` on a fixed trace, converting to NNF first.
pub fn trace_loss(formula: &Formula, trace: &Trace, objects: &[Vec<f64>], cfg: &LossConfig) -> Result<f64, LossError> {
    let nnf = crate::ltl::to_nnf(formula)?;
    let mut tape = Tape::new();
    let tv = TraceVars::constant(&mut tape, trace, objects)?;
    let root = constraint_loss(&mut tape, &nnf, &tv, 0, cfg)?;
    Ok(tape.scalar(root))
}

/// One row of a per-operator loss report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BreakdownEntry {
    pub depth: usize,
    pub operator: &'static str,
    pub formula: String,
    pub loss: f64,
    pub satisfied: bool,
}

/// Loss and verdict at step 0 for every subformula, in pre-order.
pub fn loss_breakdown(
    formula: &Formula,
    trace: &Trace,
    objects: &[Vec<f64>],
    cfg: &LossConfig,
) -> Result<Vec<BreakdownEntry>, LossError> {
    let mut out = Vec::new();
    walk(formula, 0, trace, objects, cfg, &mut out)?;
    Ok(out)
}

fn walk(
    f: &Formula,
    depth: usize,
    trace: &Trace,
    objects: &[Vec<f64>],
    cfg: &LossConfig,
    out: &mut Vec<BreakdownEntry>,
) -> Result<(), LossError> {
    out.push(BreakdownEntry {
        depth,
        operator: f.operator_name(),
        formula: f.to_string(),
        loss: trace_loss(f, trace, objects, cfg)?,
        satisfied: crate::ltl::eval_qualitative(f, trace, 0, objects)?,
    });
    match f {
        Formula::Atom(_) => {}
        Formula::Not(g) if matches!(**g, Formula::Atom(_)) => {}
        Formula::Not(g) | Formula::Next(g) | Formula::Always(g) | Formula::Eventually(g) => {
            walk(g, depth + 1, trace, objects, cfg, out)?
        }
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Until(a, b) => {
            walk(a, depth + 1, trace, objects, cfg, out)?;
            walk(b, depth + 1, trace, objects, cfg, out)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_atom_loss(t1: f64, op: Cmp, t2: f64) -> f64 {
        let tr = Trace::new(vec![vec![0.0], vec![0.0]], 1.0).unwrap();
        let mut tape = Tape::new();
        let tv = TraceVars::constant(&mut tape, &tr, &[]).unwrap();
        let atom = Atom::new(Term::Scalar(t1), op, Term::Scalar(t2));
        let v = atom_loss(&mut tape, &atom, false, &tv, 0, &LossConfig::hard()).unwrap();
        tape.scalar(v)
    }

    #[test]
    fn satisfied_inequality_has_zero_loss() {
        assert_eq!(scalar_atom_loss(0.3, Cmp::Le, 0.5), 0.0);
    }

    #[test]
    fn violated_inequality_costs_the_gap() {
        assert!((scalar_atom_loss(0.5, Cmp::Le, 0.3) - 0.2).abs() < 1e-15);
        assert!((scalar_atom_loss(0.3, Cmp::Ge, 0.5) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn equal_terms_under_not_equal_cost_zeta() {
        assert_eq!(scalar_atom_loss(0.4, Cmp::Ne, 0.4), 1e-3);
        assert_eq!(scalar_atom_loss(0.4, Cmp::Ne, 0.41), 0.0);
        assert_eq!(scalar_atom_loss(0.4, Cmp::Lt, 0.4), 1e-3);
        assert!((scalar_atom_loss(0.4, Cmp::Eq, 0.1) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn soft_max_of_single_element_is_identity() {
        let mut tape = Tape::new();
        let c = tape.leaf(vec![0.37], Shape::scalar()).unwrap();
        let v = soft_max(&mut tape, &[c], 0.005).unwrap();
        assert_eq!(tape.scalar(v), 0.37);
    }

    #[test]
    fn soft_max_of_two_zeros_is_gamma_ln2() {
        let mut tape = Tape::new();
        let z = tape.constant_scalar(0.0).unwrap();
        let v = soft_max(&mut tape, &[z, z], 0.005).unwrap();
        assert!((tape.scalar(v) - 0.005 * 2f64.ln()).abs() < 1e-15);
        assert!((tape.scalar(v) - 0.003466).abs() < 1e-6);
        let m = soft_min(&mut tape, &[z, z], 0.005).unwrap();
        assert!((tape.scalar(m) + 0.005 * 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn soft_ops_reject_empty_lists() {
        let mut tape = Tape::new();
        assert!(soft_max(&mut tape, &[], 0.1).is_err());
        assert!(soft_min(&mut tape, &[], 0.1).is_err());
    }

    #[test]
    fn rejects_non_nnf_and_bad_config() {
        let tr = Trace::new(vec![vec![0.0], vec![0.0]], 1.0).unwrap();
        let mut tape = Tape::new();
        let tv = TraceVars::constant(&mut tape, &tr, &[]).unwrap();
        let a = Formula::atom(Term::Pos.component(0), Cmp::Le, Term::Scalar(1.0));
        let imp = Formula::implies(a.clone(), a.clone());
        assert!(matches!(
            constraint_loss(&mut tape, &imp, &tv, 0, &LossConfig::default()),
            Err(LossError::NotNnf(_))
        ));
        let nn = Formula::not(Formula::always(a.clone()));
        assert!(constraint_loss(&mut tape, &nn, &tv, 0, &LossConfig::default()).is_err());
        let bad = LossConfig {
            gamma: 0.0,
            ..Default::default()
        };
        assert!(matches!(constraint_loss(&mut tape, &a, &tv, 0, &bad), Err(LossError::Config(_))));
        assert!(constraint_loss(&mut tape, &a, &tv, 2, &LossConfig::default()).is_err());
    }

    #[test]
    fn tautology_is_free_in_hard_mode() {
        let tr = Trace::new(vec![vec![0.2, 0.3], vec![0.5, 0.9], vec![1.0, 1.0]], 0.5).unwrap();
        let f = Formula::always(Formula::atom(Term::Scalar(0.0), Cmp::Le, Term::Scalar(1.0)));
        assert_eq!(trace_loss(&f, &tr, &[], &LossConfig::hard()).unwrap(), 0.0);
    }

    #[test]
    fn speed_of_diagonal_motion() {
        let pts: Vec<Vec<f64>> = (0..5).map(|t| vec![0.01 * t as f64, 0.01 * t as f64]).collect();
        let tr = Trace::new(pts, 0.01).unwrap();
        let mut tape = Tape::new();
        let tv = TraceVars::constant(&mut tape, &tr, &[]).unwrap();
        let v = eval_term(&mut tape, &Term::Vel.norm(), &tv, 2).unwrap();
        assert!((tape.scalar(v) - 0.01 * 2f64.sqrt()).abs() < 1e-12);
        let p = eval_term(&mut tape, &Term::Pos, &tv, 0).unwrap();
        assert_eq!(tape.value(p), &[0.0, 0.0]);
    }

    #[test]
    fn objects_are_time_independent() {
        let tr = Trace::new(vec![vec![0.0, 0.0], vec![1.0, 1.0]], 1.0).unwrap();
        let mut tape = Tape::new();
        let objects = vec![vec![0.1, 0.2], vec![0.7, 0.4]];
        let tv = TraceVars::constant(&mut tape, &tr, &objects).unwrap();
        let a = eval_term(&mut tape, &Term::Object(1), &tv, 0).unwrap();
        let b = eval_term(&mut tape, &Term::Object(1), &tv, 1).unwrap();
        assert_eq!(tape.value(a), &[0.7, 0.4]);
        assert_eq!(tape.value(a), tape.value(b));
        assert!(matches!(
            eval_term(&mut tape, &Term::Object(2), &tv, 0),
            Err(LossError::UnknownObject(3))
        ));
    }
}
