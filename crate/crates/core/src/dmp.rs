//! Discrete movement primitive rolled out on the autodiff tape.
//!
//! The transformation system is the usual point attractor plus a forcing
//! term built from normalised Gaussian bases over the canonical phase:
//!
//! ```text
//! y'' = alpha_y * (beta_y * (goal - y) - y') + f(x)
//! x'  = -alpha_x * x
//! f(x) = (sum_i w_i psi_i(x) / sum_i psi_i(x)) * x * (goal - start)
//! ```
//!
//! Both systems are integrated with explicit Euler steps of `dt`, starting
//! at rest from `start` with `x = 1`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::autodiff::{AdError, Shape, Tape, Var};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DmpError {
    #[error("invalid movement primitive parameters: {0}")]
    Invalid(String),
    #[error("canonical system unstable: alpha_x * dt = {0} >= 1")]
    Unstable(f64),
    #[error("rollout produced a non-finite state")]
    NonFinite,
    #[error(transparent)]
    Autodiff(AdError),
}

impl From<AdError> for DmpError {
    fn from(e: AdError) -> Self {
        match e {
            AdError::NonFinite { .. } => DmpError::NonFinite,
            other => DmpError::Autodiff(other),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DmpParams {
    pub alpha_y: f64,
    pub beta_y: f64,
    pub alpha_x: f64,
    pub centers: Vec<f64>,
    pub widths: Vec<f64>,
    pub steps: usize,
    pub dt: f64,
}

impl DmpParams {
    /// Default gains (`alpha_y = 25`, `beta_y = alpha_y / 4`, `alpha_x = 8`)
    /// with `n_basis` bases over a `steps`-point rollout of unit duration.
    pub fn new(n_basis: usize, steps: usize) -> Self {
        Self::with_gains(25.0, 25.0 / 4.0, 8.0, n_basis, steps)
    }

    /// Bases centred on the phase reached at `n_basis` evenly spaced times;
    /// neighbouring bases cross at half activation.
    pub fn with_gains(alpha_y: f64, beta_y: f64, alpha_x: f64, n_basis: usize, steps: usize) -> Self {
        let centers: Vec<f64> = (0..n_basis)
            .map(|i| {
                let t = if n_basis > 1 { i as f64 / (n_basis - 1) as f64 } else { 0.0 };
                (-alpha_x * t).exp()
            })
            .collect();
        let widths = (0..n_basis)
            .map(|i| {
                let gap = match (centers.get(i), centers.get(i + 1)) {
                    (Some(a), Some(b)) => a - b,
                    _ if i > 0 => centers[i - 1] - centers[i],
                    _ => 1.0,
                };
                4.0 * std::f64::consts::LN_2 / (gap * gap)
            })
            .collect();
        DmpParams {
            alpha_y,
            beta_y,
            alpha_x,
            centers,
            widths,
            steps,
            dt: if steps > 1 { 1.0 / (steps - 1) as f64 } else { 1.0 },
        }
    }

    pub fn n_basis(&self) -> usize {
        self.centers.len()
    }

    pub fn validate(&self) -> Result<(), DmpError> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(DmpError::Invalid(format!("{name} must be positive, got {v}")))
            }
        };
        positive("alpha_y", self.alpha_y)?;
        positive("beta_y", self.beta_y)?;
        positive("alpha_x", self.alpha_x)?;
        positive("dt", self.dt)?;
        if self.centers.is_empty() {
            return Err(DmpError::Invalid("need at least one basis function".into()));
        }
        if self.widths.len() != self.centers.len() {
            return Err(DmpError::Invalid("centers and widths differ in length".into()));
        }
        if let Some(c) = self.centers.iter().find(|c| !(**c > 0.0 && **c <= 1.0)) {
            return Err(DmpError::Invalid(format!("center {c} outside (0, 1]")));
        }
        if let Some(h) = self.widths.iter().find(|h| !(**h > 0.0 && h.is_finite())) {
            return Err(DmpError::Invalid(format!("width {h} must be positive")));
        }
        if self.steps < 2 {
            return Err(DmpError::Invalid(format!("need at least 2 steps, got {}", self.steps)));
        }
        Ok(())
    }

    /// Normalised basis activations at phase `x`, multiplied by `x`.
    pub fn basis_row(&self, x: f64) -> Vec<f64> {
        // shift exponents so the largest activation is exp(0)
        let logits: Vec<f64> = self
            .centers
            .iter()
            .zip(&self.widths)
            .map(|(c, h)| -h * (x - c) * (x - c))
            .collect();
        let top = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let psi: Vec<f64> = logits.iter().map(|l| (l - top).exp()).collect();
        let total: f64 = psi.iter().sum();
        psi.into_iter().map(|p| p / total * x).collect()
    }
}

/// Phase values `x_0..x_{steps-1}` from explicit Euler on `x' = -alpha_x x`.
pub fn canonical_rollout(alpha_x: f64, dt: f64, steps: usize) -> Result<Vec<f64>, DmpError> {
    if alpha_x < 0.0 || !alpha_x.is_finite() {
        return Err(DmpError::Invalid(format!("alpha_x must be non-negative, got {alpha_x}")));
    }
    if alpha_x * dt >= 1.0 {
        return Err(DmpError::Unstable(alpha_x * dt));
    }
    let mut xs = Vec::with_capacity(steps);
    let mut x = 1.0;
    for _ in 0..steps {
        xs.push(x);
        x -= alpha_x * x * dt;
    }
    Ok(xs)
}

/// Basis weights, `n_basis x dim`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    pub n_basis: usize,
    pub dim: usize,
    pub values: Vec<f64>,
}

impl Weights {
    pub fn zeros(n_basis: usize, dim: usize) -> Self {
        Weights {
            n_basis,
            dim,
            values: vec![0.0; n_basis * dim],
        }
    }

    pub fn shape(&self) -> Shape {
        Shape::matrix(self.n_basis, self.dim)
    }
}

/// A validated primitive with its phase and basis table precomputed.
#[derive(Debug, Clone)]
pub struct Dmp {
    params: DmpParams,
    phase: Vec<f64>,
    basis: Vec<f64>,
}

impl Dmp {
    pub fn new(params: DmpParams) -> Result<Self, DmpError> {
        params.validate()?;
        let phase = canonical_rollout(params.alpha_x, params.dt, params.steps)?;
        let basis = phase.iter().flat_map(|&x| params.basis_row(x)).collect();
        Ok(Dmp { params, phase, basis })
    }

    pub fn params(&self) -> &DmpParams {
        &self.params
    }

    pub fn phase(&self) -> &[f64] {
        &self.phase
    }

    pub fn steps(&self) -> usize {
        self.params.steps
    }

    fn check_weights(&self, tape: &Tape, weights: Var, start: Var, goal: Var) -> Result<usize, DmpError> {
        let (sw, ss, sg) = (tape.shape(weights), tape.shape(start), tape.shape(goal));
        let d = ss.len();
        if sw != Shape::matrix(self.params.n_basis(), d) || sg.len() != d || ss.cols != 1 || sg.cols != 1 {
            return Err(DmpError::Autodiff(AdError::ShapeMismatch {
                op: "dmp",
                lhs: sw,
                rhs: ss,
            }));
        }
        Ok(d)
    }

    /// Forcing term at phase `x` as a `d`-vector node.
    pub fn forcing(&self, tape: &mut Tape, x: f64, weights: Var, start: Var, goal: Var) -> Result<Var, DmpError> {
        let d = self.check_weights(tape, weights, start, goal)?;
        let row = tape.constant(self.params.basis_row(x), Shape::matrix(1, self.params.n_basis()))?;
        let mixed = tape.matmul(row, weights)?;
        let mixed = tape.reshape(mixed, Shape::vector(d))?;
        let span = tape.sub(goal, start)?;
        Ok(tape.mul(mixed, span)?)
    }

    /// Integrates the primitive and returns one `d`-vector node per step.
    pub fn rollout(&self, tape: &mut Tape, weights: Var, start: Var, goal: Var) -> Result<Vec<Var>, DmpError> {
        let d = self.check_weights(tape, weights, start, goal)?;
        let p = &self.params;
        let basis = tape.constant(self.basis.clone(), Shape::matrix(p.steps, p.n_basis()))?;
        let mixed = tape.matmul(basis, weights)?;
        let span = tape.sub(goal, start)?;
        let force = tape.mul_cols(mixed, span)?;

        let dt = p.dt;
        let k = p.alpha_y * p.beta_y;
        let mut y = start;
        let mut v = tape.constant(vec![0.0; d], Shape::vector(d))?;
        let mut points = Vec::with_capacity(p.steps);
        points.push(y);
        for t in 0..p.steps - 1 {
            let f = tape.row(force, t)?;
            let y_next = tape.lincomb(&[(y, 1.0), (v, dt)])?;
            let v_next = tape.lincomb(&[(v, 1.0 - p.alpha_y * dt), (goal, k * dt), (y, -k * dt), (f, dt)])?;
            y = y_next;
            v = v_next;
            points.push(y);
        }
        Ok(points)
    }

    /// Rollout on plain values.
    pub fn rollout_values(&self, weights: &Weights, start: &[f64], goal: &[f64]) -> Result<Vec<Vec<f64>>, DmpError> {
        let mut tape = Tape::new();
        let w = tape.constant(weights.values.clone(), weights.shape())?;
        let s = tape.constant(start.to_vec(), Shape::vector(start.len()))?;
        let g = tape.constant(goal.to_vec(), Shape::vector(goal.len()))?;
        let pts = self.rollout(&mut tape, w, s, g)?;
        Ok(pts.iter().map(|v| tape.value(*v).to_vec()).collect())
    }
}
