use std::fmt;

use super::LtlError;

/// Dimensions a formula is checked against: pose dimension and object count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct InputSchema {
    pub dim: usize,
    pub objects: usize,
}

impl InputSchema {
    pub fn new(dim: usize, objects: usize) -> Self {
        InputSchema { dim, objects }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cmp {
    Lt,
    Le,
    Eq,
    Ne,
    Ge,
    Gt,
}

impl Cmp {
    /// Operator of the negated comparison.
    pub fn flip(self) -> Cmp {
        match self {
            Cmp::Lt => Cmp::Ge,
            Cmp::Le => Cmp::Gt,
            Cmp::Eq => Cmp::Ne,
            Cmp::Ne => Cmp::Eq,
            Cmp::Ge => Cmp::Lt,
            Cmp::Gt => Cmp::Le,
        }
    }

    pub fn holds(self, a: f64, b: f64) -> bool {
        match self {
            Cmp::Lt => a < b,
            Cmp::Le => a <= b,
            Cmp::Eq => a == b,
            Cmp::Ne => a != b,
            Cmp::Ge => a >= b,
            Cmp::Gt => a > b,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Cmp::Lt => "<",
            Cmp::Le => "<=",
            Cmp::Eq => "=",
            Cmp::Ne => "!=",
            Cmp::Ge => ">=",
            Cmp::Gt => ">",
        }
    }

    pub const ALL: [Cmp; 6] = [Cmp::Lt, Cmp::Le, Cmp::Eq, Cmp::Ne, Cmp::Ge, Cmp::Gt];
}

/// Value expressions inside atoms. `Pos`/`Vel` are the trajectory at the
/// current step; everything else is time-independent.
#[derive(Debug, Clone, PartialEq)]
pub enum Term {
    Pos,
    Vel,
    /// Zero-based index into the input's object list (`o1` is index 0).
    Object(usize),
    Vector(Vec<f64>),
    Scalar(f64),
    Component(Box<Term>, usize),
    /// Contiguous block of axes, e.g. `.xyz` on a 6-D pose.
    Slice(Box<Term>, usize, usize),
    SqNorm(Box<Term>),
    Norm(Box<Term>),
    Add(Box<Term>, Box<Term>),
    Sub(Box<Term>, Box<Term>),
    Scale(f64, Box<Term>),
}

impl Term {
    pub fn component(self, axis: usize) -> Term {
        Term::Component(Box::new(self), axis)
    }

    pub fn sqnorm(self) -> Term {
        Term::SqNorm(Box::new(self))
    }

    pub fn norm(self) -> Term {
        Term::Norm(Box::new(self))
    }

    pub fn minus(self, rhs: Term) -> Term {
        Term::Sub(Box::new(self), Box::new(rhs))
    }

    pub fn plus(self, rhs: Term) -> Term {
        Term::Add(Box::new(self), Box::new(rhs))
    }

    /// Dimension under `schema`, checking every structural invariant.
    pub fn dim(&self, schema: &InputSchema) -> Result<usize, LtlError> {
        match self {
            Term::Pos | Term::Vel => Ok(schema.dim),
            Term::Object(k) => {
                if *k < schema.objects {
                    Ok(schema.dim)
                } else {
                    Err(LtlError::UnknownIdentifier {
                        name: format!("o{}", k + 1),
                        offset: None,
                    })
                }
            }
            Term::Vector(v) => Ok(v.len()),
            Term::Scalar(_) => Ok(1),
            Term::Component(t, axis) => {
                let d = t.dim(schema)?;
                if *axis < d {
                    Ok(1)
                } else {
                    Err(LtlError::Dimension(format!("axis {axis} out of range for {d}-dimensional term")))
                }
            }
            Term::Slice(t, start, len) => {
                let d = t.dim(schema)?;
                if start + len <= d && *len > 0 {
                    Ok(*len)
                } else {
                    Err(LtlError::Dimension(format!(
                        "axes {start}..{} out of range for {d}-dimensional term",
                        start + len
                    )))
                }
            }
            Term::SqNorm(t) | Term::Norm(t) => t.dim(schema).map(|_| 1),
            Term::Add(a, b) | Term::Sub(a, b) => {
                let (da, db) = (a.dim(schema)?, b.dim(schema)?);
                if da == db {
                    Ok(da)
                } else {
                    Err(LtlError::Dimension(format!("cannot combine {da}- and {db}-dimensional terms")))
                }
            }
            Term::Scale(_, t) => t.dim(schema),
        }
    }

    /// True when the term is one-dimensional regardless of the schema.
    pub fn is_scalar(&self) -> bool {
        match self {
            Term::Scalar(_) | Term::Component(..) | Term::SqNorm(_) | Term::Norm(_) => true,
            Term::Vector(v) => v.len() == 1,
            Term::Slice(_, _, len) => *len == 1,
            Term::Add(a, b) | Term::Sub(a, b) => a.is_scalar() || b.is_scalar(),
            Term::Scale(_, t) => t.is_scalar(),
            Term::Pos | Term::Vel | Term::Object(_) => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub lhs: Term,
    pub op: Cmp,
    pub rhs: Term,
}

impl Atom {
    pub fn new(lhs: Term, op: Cmp, rhs: Term) -> Self {
        Atom { lhs, op, rhs }
    }

    pub fn is_scalar(&self) -> bool {
        self.lhs.is_scalar() || self.rhs.is_scalar()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Formula {
    Atom(Atom),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Next(Box<Formula>),
    Always(Box<Formula>),
    Eventually(Box<Formula>),
    Until(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn atom(lhs: Term, op: Cmp, rhs: Term) -> Formula {
        Formula::Atom(Atom::new(lhs, op, rhs))
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn next(f: Formula) -> Formula {
        Formula::Next(Box::new(f))
    }

    pub fn always(f: Formula) -> Formula {
        Formula::Always(Box::new(f))
    }

    pub fn eventually(f: Formula) -> Formula {
        Formula::Eventually(Box::new(f))
    }

    pub fn until(a: Formula, b: Formula) -> Formula {
        Formula::Until(Box::new(a), Box::new(b))
    }

    /// Checks every atom's terms against `schema`.
    pub fn check(&self, schema: &InputSchema) -> Result<(), LtlError> {
        match self {
            Formula::Atom(a) => {
                let (dl, dr) = (a.lhs.dim(schema)?, a.rhs.dim(schema)?);
                if dl != dr {
                    return Err(LtlError::Dimension(format!(
                        "atom compares {dl}-dimensional `{}` with {dr}-dimensional `{}`",
                        a.lhs, a.rhs
                    )));
                }
                Ok(())
            }
            Formula::Not(f) | Formula::Next(f) | Formula::Always(f) | Formula::Eventually(f) => f.check(schema),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Until(a, b) => {
                a.check(schema)?;
                b.check(schema)
            }
        }
    }

    /// Negation normal form: `Not` only directly above atoms, no `Implies`.
    pub fn is_nnf(&self) -> bool {
        match self {
            Formula::Atom(_) => true,
            Formula::Not(f) => matches!(**f, Formula::Atom(_)),
            Formula::Implies(..) => false,
            Formula::Next(f) | Formula::Always(f) | Formula::Eventually(f) => f.is_nnf(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Until(a, b) => a.is_nnf() && b.is_nnf(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Formula::Atom(_) => 1,
            Formula::Not(f) | Formula::Next(f) | Formula::Always(f) | Formula::Eventually(f) => 1 + f.depth(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Until(a, b) => {
                1 + a.depth().max(b.depth())
            }
        }
    }

    /// Short operator label used in loss breakdowns.
    pub fn operator_name(&self) -> &'static str {
        match self {
            Formula::Atom(_) => "atom",
            Formula::Not(_) => "not",
            Formula::And(..) => "and",
            Formula::Or(..) => "or",
            Formula::Implies(..) => "implies",
            Formula::Next(_) => "next",
            Formula::Always(_) => "always",
            Formula::Eventually(_) => "eventually",
            Formula::Until(..) => "until",
        }
    }
}

const AXIS_NAMES: [&str; 6] = ["x", "y", "z", "roll", "pitch", "yaw"];

fn write_number(f: &mut fmt::Formatter<'_>, x: f64) -> fmt::Result {
    // Debug formatting of f64 is the shortest representation that round-trips.
    write!(f, "{x:?}")
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Pos => f.write_str("p"),
            Term::Vel => f.write_str("dp"),
            Term::Object(k) => write!(f, "o{}", k + 1),
            Term::Vector(v) => {
                f.write_str("[")?;
                for (i, x) in v.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write_number(f, *x)?;
                }
                f.write_str("]")
            }
            Term::Scalar(x) => write_number(f, *x),
            Term::Component(t, axis) => match AXIS_NAMES.get(*axis) {
                Some(name) => write!(f, "{}.{name}", Postfix(t)),
                None => write!(f, "{}.{axis}", Postfix(t)),
            },
            Term::Slice(t, 0, 3) => write!(f, "{}.xyz", Postfix(t)),
            Term::Slice(t, 3, 3) => write!(f, "{}.rpy", Postfix(t)),
            Term::Slice(t, start, len) => write!(f, "{}.{start}:{len}", Postfix(t)),
            Term::SqNorm(t) => write!(f, "sqnorm({t})"),
            Term::Norm(t) => write!(f, "norm({t})"),
            Term::Add(a, b) => write!(f, "({a} + {b})"),
            Term::Sub(a, b) => write!(f, "({a} - {b})"),
            Term::Scale(c, t) => {
                f.write_str("(")?;
                write_number(f, *c)?;
                write!(f, " * {})", Postfix(t))
            }
        }
    }
}

/// Wraps operands that cannot take a postfix selector or a scale prefix
/// without parentheses.
struct Postfix<'a>(&'a Term);

impl fmt::Display for Postfix<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Term::Scalar(_) => write!(f, "({})", self.0),
            other => write!(f, "{other}"),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.lhs, self.op.symbol(), self.rhs)
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::Not(g) => write!(f, "!({g})"),
            Formula::Next(g) => write!(f, "N ({g})"),
            Formula::Always(g) => write!(f, "G ({g})"),
            Formula::Eventually(g) => write!(f, "F ({g})"),
            Formula::And(a, b) => write!(f, "(({a}) & ({b}))"),
            Formula::Or(a, b) => write!(f, "(({a}) | ({b}))"),
            Formula::Implies(a, b) => write!(f, "(({a}) -> ({b}))"),
            Formula::Until(a, b) => write!(f, "(({a}) U ({b}))"),
        }
    }
}
