//! Reverse-mode automatic differentiation over small dense tensors.
//!
//! A [`Tape`] records every value produced during a forward pass together
//! with the operation that produced it. Node ids are handed out in
//! creation order, so parents always precede children and the backward
//! pass is a single sweep from the root down to id 0.
//!
//! Values are stored row-major. A scalar is a `1 x 1` tensor and a vector
//! of length `n` is an `n x 1` column.
//!
//! ```
//! use ltl_dmp::autodiff::{Shape, Tape};
//!
//! let mut tape = Tape::new();
//! let w = tape.leaf(vec![1.0, 2.0, 3.0], Shape::vector(3)).unwrap();
//! let sq = tape.mul(w, w).unwrap();
//! let root = tape.sum(sq).unwrap();
//! let grads = tape.backward(root).unwrap();
//! assert_eq!(grads.wrt(w), vec![2.0, 4.0, 6.0]);
//! ```

use std::fmt;

use thiserror::Error;

/// Row/column extent of a tensor value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Shape {
    pub rows: usize,
    pub cols: usize,
}

impl Shape {
    pub const fn scalar() -> Self {
        Shape { rows: 1, cols: 1 }
    }

    pub const fn vector(n: usize) -> Self {
        Shape { rows: n, cols: 1 }
    }

    pub const fn matrix(rows: usize, cols: usize) -> Self {
        Shape { rows, cols }
    }

    pub const fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub const fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub const fn is_scalar(&self) -> bool {
        self.rows == 1 && self.cols == 1
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.rows, self.cols)
    }
}

/// Handle to a node on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AdError {
    #[error("shape mismatch in {op}: {lhs} vs {rhs}")]
    ShapeMismatch {
        op: &'static str,
        lhs: Shape,
        rhs: Shape,
    },
    #[error("non-finite value produced by {op}")]
    NonFinite { op: &'static str },
    #[error("ln of non-positive value {value}")]
    LnDomain { value: f64 },
    #[error("backward root must be scalar, got {0}")]
    NonScalarRoot(Shape),
    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("{op} needs at least one operand")]
    Empty { op: &'static str },
    #[error("value length {len} does not match shape {shape}")]
    BadValue { len: usize, shape: Shape },
    #[error("temperature must be positive, got {0}")]
    Temperature(f64),
}

pub type Result<T> = std::result::Result<T, AdError>;

#[derive(Debug, Clone)]
enum Op {
    Leaf,
    Const,
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    Scale(Var, f64),
    Offset(Var),
    LinComb(Vec<(Var, f64)>),
    MatVec(Var, Var),
    MatMul(Var, Var),
    MulCols(Var, Var),
    Dot(Var, Var),
    Relu(Var),
    Exp(Var),
    Ln(Var),
    Square(Var),
    Sqrt(Var),
    Sum(Var),
    Concat(Vec<Var>),
    Index(Var, usize),
    Slice(Var, usize),
    Reshape(Var),
    Clamp(Var, f64, f64),
    SqNormDiff(Var, Var),
    Max(Var),
    Min(Var),
    LogSumExp(Var, f64),
}

#[derive(Debug, Clone)]
struct Node {
    value: Vec<f64>,
    shape: Shape,
    op: Op,
    needs_grad: bool,
}

/// Recorded computation graph. Single writer; build one per thread.
#[derive(Debug, Clone, Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

/// Adjoints produced by [`Tape::backward`].
#[derive(Debug, Clone)]
pub struct Gradients {
    grads: Vec<Option<Vec<f64>>>,
    lens: Vec<usize>,
}

impl Gradients {
    /// Gradient of the root with respect to `v`; zeros when `v` does not
    /// influence the root or was recorded as a constant.
    pub fn wrt(&self, v: Var) -> Vec<f64> {
        match self.grads.get(v.0).and_then(|g| g.as_ref()) {
            Some(g) => g.clone(),
            None => vec![0.0; self.lens[v.0]],
        }
    }

    pub fn wrt_slice(&self, v: Var) -> Option<&[f64]> {
        self.grads.get(v.0).and_then(|g| g.as_deref())
    }
}

fn check_finite(op: &'static str, value: &[f64]) -> Result<()> {
    if value.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(AdError::NonFinite { op })
    }
}

fn accumulate(slot: &mut Option<Vec<f64>>, len: usize, f: impl FnOnce(&mut [f64])) {
    let buf = slot.get_or_insert_with(|| vec![0.0; len]);
    f(buf);
}

impl Tape {
    pub fn new() -> Self {
        Tape { nodes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &[f64] {
        &self.nodes[v.0].value
    }

    pub fn shape(&self, v: Var) -> Shape {
        self.nodes[v.0].shape
    }

    /// Value of a scalar node.
    pub fn scalar(&self, v: Var) -> f64 {
        self.nodes[v.0].value[0]
    }

    fn push(&mut self, op: &'static str, value: Vec<f64>, shape: Shape, kind: Op) -> Result<Var> {
        check_finite(op, &value)?;
        debug_assert_eq!(value.len(), shape.len());
        let needs_grad = match &kind {
            Op::Leaf => true,
            Op::Const => false,
            other => parents(other).iter().any(|p| self.nodes[p.0].needs_grad),
        };
        self.nodes.push(Node {
            value,
            shape,
            op: kind,
            needs_grad,
        });
        Ok(Var(self.nodes.len() - 1))
    }

    fn input(&mut self, value: Vec<f64>, shape: Shape, op: Op) -> Result<Var> {
        if value.len() != shape.len() {
            return Err(AdError::BadValue {
                len: value.len(),
                shape,
            });
        }
        self.push("input", value, shape, op)
    }

    /// A differentiable input whose gradient is reported by `backward`.
    pub fn leaf(&mut self, value: Vec<f64>, shape: Shape) -> Result<Var> {
        self.input(value, shape, Op::Leaf)
    }

    pub fn constant(&mut self, value: Vec<f64>, shape: Shape) -> Result<Var> {
        self.input(value, shape, Op::Const)
    }

    pub fn constant_scalar(&mut self, value: f64) -> Result<Var> {
        self.constant(vec![value], Shape::scalar())
    }

    fn same_shape(&self, op: &'static str, a: Var, b: Var) -> Result<Shape> {
        let (sa, sb) = (self.shape(a), self.shape(b));
        if sa != sb {
            return Err(AdError::ShapeMismatch {
                op,
                lhs: sa,
                rhs: sb,
            });
        }
        Ok(sa)
    }

    fn zip(&self, a: Var, b: Var, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        self.value(a)
            .iter()
            .zip(self.value(b))
            .map(|(&x, &y)| f(x, y))
            .collect()
    }

    fn map(&self, a: Var, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.value(a).iter().map(|&x| f(x)).collect()
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        let shape = self.same_shape("add", a, b)?;
        let value = self.zip(a, b, |x, y| x + y);
        self.push("add", value, shape, Op::Add(a, b))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        let shape = self.same_shape("sub", a, b)?;
        let value = self.zip(a, b, |x, y| x - y);
        self.push("sub", value, shape, Op::Sub(a, b))
    }

    /// Elementwise product.
    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        let shape = self.same_shape("mul", a, b)?;
        let value = self.zip(a, b, |x, y| x * y);
        self.push("mul", value, shape, Op::Mul(a, b))
    }

    pub fn scale(&mut self, a: Var, c: f64) -> Result<Var> {
        let value = self.map(a, |x| c * x);
        self.push("scale", value, self.shape(a), Op::Scale(a, c))
    }

    pub fn neg(&mut self, a: Var) -> Result<Var> {
        self.scale(a, -1.0)
    }

    /// `a + c` elementwise for a constant `c`.
    pub fn offset(&mut self, a: Var, c: f64) -> Result<Var> {
        let value = self.map(a, |x| x + c);
        self.push("offset", value, self.shape(a), Op::Offset(a))
    }

    /// `sum_k c_k * x_k` over equally shaped operands.
    pub fn lincomb(&mut self, terms: &[(Var, f64)]) -> Result<Var> {
        let (first, _) = *terms.first().ok_or(AdError::Empty { op: "lincomb" })?;
        let shape = self.shape(first);
        let mut value = vec![0.0; shape.len()];
        for &(v, c) in terms {
            self.same_shape("lincomb", first, v)?;
            for (o, x) in value.iter_mut().zip(self.value(v)) {
                *o += c * x;
            }
        }
        self.push("lincomb", value, shape, Op::LinComb(terms.to_vec()))
    }

    /// Matrix (`r x c`) times column vector (`c`).
    pub fn matvec(&mut self, m: Var, v: Var) -> Result<Var> {
        let (sm, sv) = (self.shape(m), self.shape(v));
        if sv.cols != 1 || sm.cols != sv.rows {
            return Err(AdError::ShapeMismatch {
                op: "matvec",
                lhs: sm,
                rhs: sv,
            });
        }
        let mv = self.value(m);
        let vv = self.value(v);
        let value = mv
            .chunks_exact(sm.cols)
            .map(|row| row.iter().zip(vv).map(|(a, b)| a * b).sum())
            .collect();
        self.push("matvec", value, Shape::vector(sm.rows), Op::MatVec(m, v))
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (sa, sb) = (self.shape(a), self.shape(b));
        if sa.cols != sb.rows {
            return Err(AdError::ShapeMismatch {
                op: "matmul",
                lhs: sa,
                rhs: sb,
            });
        }
        let (av, bv) = (self.value(a), self.value(b));
        let mut value = vec![0.0; sa.rows * sb.cols];
        for i in 0..sa.rows {
            let out = &mut value[i * sb.cols..(i + 1) * sb.cols];
            for k in 0..sa.cols {
                let aik = av[i * sa.cols + k];
                for (o, bkj) in out.iter_mut().zip(&bv[k * sb.cols..(k + 1) * sb.cols]) {
                    *o += aik * bkj;
                }
            }
        }
        self.push(
            "matmul",
            value,
            Shape::matrix(sa.rows, sb.cols),
            Op::MatMul(a, b),
        )
    }

    /// Multiplies column `j` of matrix `m` by `v[j]`.
    pub fn mul_cols(&mut self, m: Var, v: Var) -> Result<Var> {
        let (sm, sv) = (self.shape(m), self.shape(v));
        if sv.len() != sm.cols {
            return Err(AdError::ShapeMismatch {
                op: "mul_cols",
                lhs: sm,
                rhs: sv,
            });
        }
        let vv = self.value(v);
        let value = self
            .value(m)
            .chunks_exact(sm.cols)
            .flat_map(|row| row.iter().zip(vv).map(|(a, b)| a * b))
            .collect();
        self.push("mul_cols", value, sm, Op::MulCols(m, v))
    }

    pub fn dot(&mut self, a: Var, b: Var) -> Result<Var> {
        self.same_shape("dot", a, b)?;
        let value = self.value(a).iter().zip(self.value(b)).map(|(x, y)| x * y).sum();
        self.push("dot", vec![value], Shape::scalar(), Op::Dot(a, b))
    }

    pub fn relu(&mut self, a: Var) -> Result<Var> {
        let value = self.map(a, |x| x.max(0.0));
        self.push("relu", value, self.shape(a), Op::Relu(a))
    }

    pub fn exp(&mut self, a: Var) -> Result<Var> {
        let value = self.map(a, f64::exp);
        self.push("exp", value, self.shape(a), Op::Exp(a))
    }

    pub fn ln(&mut self, a: Var) -> Result<Var> {
        if let Some(&bad) = self.value(a).iter().find(|&&x| !(x > 0.0)) {
            return Err(AdError::LnDomain { value: bad });
        }
        let value = self.map(a, f64::ln);
        self.push("ln", value, self.shape(a), Op::Ln(a))
    }

    pub fn square(&mut self, a: Var) -> Result<Var> {
        let value = self.map(a, |x| x * x);
        self.push("square", value, self.shape(a), Op::Square(a))
    }

    pub fn sqrt(&mut self, a: Var) -> Result<Var> {
        let value = self.map(a, f64::sqrt);
        self.push("sqrt", value, self.shape(a), Op::Sqrt(a))
    }

    pub fn sum(&mut self, a: Var) -> Result<Var> {
        let value = self.value(a).iter().sum();
        self.push("sum", vec![value], Shape::scalar(), Op::Sum(a))
    }

    /// Stacks operands end to end into one column vector.
    pub fn concat(&mut self, parts: &[Var]) -> Result<Var> {
        if parts.is_empty() {
            return Err(AdError::Empty { op: "concat" });
        }
        let value: Vec<f64> = parts
            .iter()
            .flat_map(|p| self.value(*p).iter().copied())
            .collect();
        let n = value.len();
        self.push("concat", value, Shape::vector(n), Op::Concat(parts.to_vec()))
    }

    pub fn index(&mut self, a: Var, i: usize) -> Result<Var> {
        let len = self.shape(a).len();
        if i >= len {
            return Err(AdError::IndexOutOfRange { index: i, len });
        }
        let value = vec![self.value(a)[i]];
        self.push("index", value, Shape::scalar(), Op::Index(a, i))
    }

    /// Contiguous flat range `start..start + len` as a column vector.
    pub fn slice(&mut self, a: Var, start: usize, len: usize) -> Result<Var> {
        let total = self.shape(a).len();
        if start + len > total || len == 0 {
            return Err(AdError::IndexOutOfRange {
                index: start + len,
                len: total,
            });
        }
        let value = self.value(a)[start..start + len].to_vec();
        self.push("slice", value, Shape::vector(len), Op::Slice(a, start))
    }

    /// Row `r` of a matrix as a column vector.
    pub fn row(&mut self, m: Var, r: usize) -> Result<Var> {
        let s = self.shape(m);
        if r >= s.rows {
            return Err(AdError::IndexOutOfRange {
                index: r,
                len: s.rows,
            });
        }
        self.slice(m, r * s.cols, s.cols)
    }

    pub fn reshape(&mut self, a: Var, shape: Shape) -> Result<Var> {
        let s = self.shape(a);
        if s.len() != shape.len() {
            return Err(AdError::ShapeMismatch {
                op: "reshape",
                lhs: s,
                rhs: shape,
            });
        }
        let value = self.value(a).to_vec();
        self.push("reshape", value, shape, Op::Reshape(a))
    }

    pub fn clamp(&mut self, a: Var, lo: f64, hi: f64) -> Result<Var> {
        let value = self.map(a, |x| x.clamp(lo, hi));
        self.push("clamp", value, self.shape(a), Op::Clamp(a, lo, hi))
    }

    /// `||a - b||^2`, accumulated left to right.
    pub fn sqnorm_diff(&mut self, a: Var, b: Var) -> Result<Var> {
        self.same_shape("sqnorm_diff", a, b)?;
        let value = sqnorm_diff(self.value(a), self.value(b));
        self.push("sqnorm_diff", vec![value], Shape::scalar(), Op::SqNormDiff(a, b))
    }

    /// Exact maximum; ties send the adjoint to the first maximal entry.
    pub fn max(&mut self, a: Var) -> Result<Var> {
        let (_, m) = arg_extreme(self.value(a), |x, best| x > best).ok_or(AdError::Empty { op: "max" })?;
        self.push("max", vec![m], Shape::scalar(), Op::Max(a))
    }

    /// Exact minimum; ties send the adjoint to the first minimal entry.
    pub fn min(&mut self, a: Var) -> Result<Var> {
        let (_, m) = arg_extreme(self.value(a), |x, best| x < best).ok_or(AdError::Empty { op: "min" })?;
        self.push("min", vec![m], Shape::scalar(), Op::Min(a))
    }

    /// `gamma * ln(sum_i exp(a_i / gamma))`, evaluated with the exponents
    /// shifted by the maximum entry.
    pub fn logsumexp(&mut self, a: Var, gamma: f64) -> Result<Var> {
        if !(gamma > 0.0) {
            return Err(AdError::Temperature(gamma));
        }
        let xs = self.value(a);
        if xs.is_empty() {
            return Err(AdError::Empty { op: "logsumexp" });
        }
        let value = logsumexp(xs, gamma);
        self.push("logsumexp", vec![value], Shape::scalar(), Op::LogSumExp(a, gamma))
    }

    /// Reverse sweep from a scalar root.
    pub fn backward(&self, root: Var) -> Result<Gradients> {
        let root_shape = self.shape(root);
        if !root_shape.is_scalar() {
            return Err(AdError::NonScalarRoot(root_shape));
        }
        let n = root.0 + 1;
        let mut grads: Vec<Option<Vec<f64>>> = vec![None; n];
        grads[root.0] = Some(vec![1.0]);
        for id in (0..n).rev() {
            let node = &self.nodes[id];
            if !node.needs_grad || matches!(node.op, Op::Leaf) {
                continue;
            }
            let Some(g) = grads[id].take() else { continue };
            self.propagate(id, &g, &mut grads);
        }
        Ok(Gradients {
            grads,
            lens: self.nodes.iter().map(|n| n.value.len()).collect(),
        })
    }

    fn wants(&self, v: Var) -> bool {
        self.nodes[v.0].needs_grad
    }

    fn propagate(&self, id: usize, g: &[f64], grads: &mut [Option<Vec<f64>>]) {
        let node = &self.nodes[id];
        let val = &node.value;
        let mut acc = |v: Var, f: &dyn Fn(&mut [f64])| {
            if self.wants(v) {
                accumulate(&mut grads[v.0], self.nodes[v.0].value.len(), f);
            }
        };
        match &node.op {
            Op::Leaf | Op::Const => {}
            Op::Add(a, b) => {
                acc(*a, &|buf| buf.iter_mut().zip(g).for_each(|(o, gi)| *o += gi));
                acc(*b, &|buf| buf.iter_mut().zip(g).for_each(|(o, gi)| *o += gi));
            }
            Op::Sub(a, b) => {
                acc(*a, &|buf| buf.iter_mut().zip(g).for_each(|(o, gi)| *o += gi));
                acc(*b, &|buf| buf.iter_mut().zip(g).for_each(|(o, gi)| *o -= gi));
            }
            Op::Mul(a, b) => {
                let (av, bv) = (self.value(*a), self.value(*b));
                acc(*a, &|buf| {
                    for ((o, gi), y) in buf.iter_mut().zip(g).zip(bv) {
                        *o += gi * y;
                    }
                });
                acc(*b, &|buf| {
                    for ((o, gi), x) in buf.iter_mut().zip(g).zip(av) {
                        *o += gi * x;
                    }
                });
            }
            Op::Scale(a, c) => {
                acc(*a, &|buf| buf.iter_mut().zip(g).for_each(|(o, gi)| *o += c * gi));
            }
            Op::Offset(a) | Op::Reshape(a) => {
                acc(*a, &|buf| buf.iter_mut().zip(g).for_each(|(o, gi)| *o += gi));
            }
            Op::LinComb(terms) => {
                for (v, c) in terms {
                    acc(*v, &|buf| buf.iter_mut().zip(g).for_each(|(o, gi)| *o += c * gi));
                }
            }
            Op::MatVec(m, v) => {
                let sm = self.shape(*m);
                let (mv, vv) = (self.value(*m), self.value(*v));
                acc(*m, &|buf| {
                    for (r, gi) in g.iter().enumerate() {
                        if *gi == 0.0 {
                            continue;
                        }
                        let row = &mut buf[r * sm.cols..(r + 1) * sm.cols];
                        row.iter_mut().zip(vv).for_each(|(o, x)| *o += gi * x);
                    }
                });
                acc(*v, &|buf| {
                    for (r, gi) in g.iter().enumerate() {
                        if *gi == 0.0 {
                            continue;
                        }
                        let row = &mv[r * sm.cols..(r + 1) * sm.cols];
                        buf.iter_mut().zip(row).for_each(|(o, x)| *o += gi * x);
                    }
                });
            }
            Op::MatMul(a, b) => {
                let (sa, sb) = (self.shape(*a), self.shape(*b));
                let (av, bv) = (self.value(*a), self.value(*b));
                // dA = G B^T, dB = A^T G
                acc(*a, &|buf| {
                    for i in 0..sa.rows {
                        let grow = &g[i * sb.cols..(i + 1) * sb.cols];
                        for k in 0..sa.cols {
                            let brow = &bv[k * sb.cols..(k + 1) * sb.cols];
                            buf[i * sa.cols + k] += grow.iter().zip(brow).map(|(x, y)| x * y).sum::<f64>();
                        }
                    }
                });
                acc(*b, &|buf| {
                    for i in 0..sa.rows {
                        let grow = &g[i * sb.cols..(i + 1) * sb.cols];
                        for k in 0..sa.cols {
                            let aik = av[i * sa.cols + k];
                            let brow = &mut buf[k * sb.cols..(k + 1) * sb.cols];
                            brow.iter_mut().zip(grow).for_each(|(o, gij)| *o += aik * gij);
                        }
                    }
                });
            }
            Op::MulCols(m, v) => {
                let cols = self.shape(*m).cols;
                let (mv, vv) = (self.value(*m), self.value(*v));
                acc(*m, &|buf| {
                    for (idx, o) in buf.iter_mut().enumerate() {
                        *o += g[idx] * vv[idx % cols];
                    }
                });
                acc(*v, &|buf| {
                    for (idx, (gi, x)) in g.iter().zip(mv).enumerate() {
                        buf[idx % cols] += gi * x;
                    }
                });
            }
            Op::Dot(a, b) => {
                let (av, bv) = (self.value(*a), self.value(*b));
                acc(*a, &|buf| buf.iter_mut().zip(bv).for_each(|(o, y)| *o += g[0] * y));
                acc(*b, &|buf| buf.iter_mut().zip(av).for_each(|(o, x)| *o += g[0] * x));
            }
            Op::Relu(a) => {
                let av = self.value(*a);
                acc(*a, &|buf| {
                    for ((o, gi), x) in buf.iter_mut().zip(g).zip(av) {
                        if *x > 0.0 {
                            *o += gi;
                        }
                    }
                });
            }
            Op::Exp(a) => {
                acc(*a, &|buf| {
                    for ((o, gi), y) in buf.iter_mut().zip(g).zip(val) {
                        *o += gi * y;
                    }
                });
            }
            Op::Ln(a) => {
                let av = self.value(*a);
                acc(*a, &|buf| {
                    for ((o, gi), x) in buf.iter_mut().zip(g).zip(av) {
                        *o += gi / x;
                    }
                });
            }
            Op::Square(a) => {
                let av = self.value(*a);
                acc(*a, &|buf| {
                    for ((o, gi), x) in buf.iter_mut().zip(g).zip(av) {
                        *o += 2.0 * x * gi;
                    }
                });
            }
            Op::Sqrt(a) => {
                acc(*a, &|buf| {
                    for ((o, gi), y) in buf.iter_mut().zip(g).zip(val) {
                        if *y > 0.0 {
                            *o += gi / (2.0 * y);
                        }
                    }
                });
            }
            Op::Sum(a) => {
                acc(*a, &|buf| buf.iter_mut().for_each(|o| *o += g[0]));
            }
            Op::Concat(parts) => {
                let mut offset = 0;
                for p in parts {
                    let len = self.nodes[p.0].value.len();
                    let seg = &g[offset..offset + len];
                    acc(*p, &|buf| buf.iter_mut().zip(seg).for_each(|(o, gi)| *o += gi));
                    offset += len;
                }
            }
            Op::Index(a, i) => {
                acc(*a, &|buf| buf[*i] += g[0]);
            }
            Op::Slice(a, start) => {
                acc(*a, &|buf| {
                    buf[*start..*start + g.len()]
                        .iter_mut()
                        .zip(g)
                        .for_each(|(o, gi)| *o += gi)
                });
            }
            Op::Clamp(a, lo, hi) => {
                let av = self.value(*a);
                acc(*a, &|buf| {
                    for ((o, gi), x) in buf.iter_mut().zip(g).zip(av) {
                        if x >= lo && x <= hi {
                            *o += gi;
                        }
                    }
                });
            }
            Op::SqNormDiff(a, b) => {
                let (av, bv) = (self.value(*a), self.value(*b));
                acc(*a, &|buf| {
                    for ((o, x), y) in buf.iter_mut().zip(av).zip(bv) {
                        *o += 2.0 * (x - y) * g[0];
                    }
                });
                acc(*b, &|buf| {
                    for ((o, x), y) in buf.iter_mut().zip(av).zip(bv) {
                        *o -= 2.0 * (x - y) * g[0];
                    }
                });
            }
            Op::Max(a) => {
                let (i, _) = arg_extreme(self.value(*a), |x, best| x > best).expect("non-empty");
                acc(*a, &|buf| buf[i] += g[0]);
            }
            Op::Min(a) => {
                let (i, _) = arg_extreme(self.value(*a), |x, best| x < best).expect("non-empty");
                acc(*a, &|buf| buf[i] += g[0]);
            }
            Op::LogSumExp(a, gamma) => {
                // d/dx_i = softmax(x / gamma)_i
                let out = val[0];
                let av = self.value(*a);
                acc(*a, &|buf| {
                    for (o, x) in buf.iter_mut().zip(av) {
                        *o += g[0] * ((x - out) / gamma).exp();
                    }
                });
            }
        }
    }
}

fn parents(op: &Op) -> Vec<Var> {
    match op {
        Op::Leaf | Op::Const => vec![],
        Op::Add(a, b)
        | Op::Sub(a, b)
        | Op::Mul(a, b)
        | Op::MatVec(a, b)
        | Op::MatMul(a, b)
        | Op::MulCols(a, b)
        | Op::Dot(a, b)
        | Op::SqNormDiff(a, b) => vec![*a, *b],
        Op::Scale(a, _)
        | Op::Offset(a)
        | Op::Relu(a)
        | Op::Exp(a)
        | Op::Ln(a)
        | Op::Square(a)
        | Op::Sqrt(a)
        | Op::Sum(a)
        | Op::Index(a, _)
        | Op::Slice(a, _)
        | Op::Reshape(a)
        | Op::Clamp(a, _, _)
        | Op::Max(a)
        | Op::Min(a)
        | Op::LogSumExp(a, _) => vec![*a],
        Op::LinComb(terms) => terms.iter().map(|(v, _)| *v).collect(),
        Op::Concat(parts) => parts.clone(),
    }
}

fn arg_extreme(xs: &[f64], better: impl Fn(f64, f64) -> bool) -> Option<(usize, f64)> {
    let mut it = xs.iter().copied().enumerate();
    let first = it.next()?;
    Some(it.fold(first, |best, (i, x)| if better(x, best.1) { (i, x) } else { best }))
}

/// `||a - b||^2` on plain slices, in the same summation order as the tape op.
pub fn sqnorm_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).fold(0.0, |acc, v| acc + v)
}

/// Max-shifted `gamma * ln(sum exp(x / gamma))`.
pub fn logsumexp(xs: &[f64], gamma: f64) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = xs.iter().map(|x| ((x - m) / gamma).exp()).sum();
    m + gamma * s.ln()
}
