use super::ast::{Atom, Formula};
use super::LtlError;

/// Pushes negations down to atoms and eliminates implication.
///
/// Negated scalar atoms, and negated vector `=`/`!=`, become the flipped
/// comparison. A negated vector ordering (`!(p <= v)`) has no single-atom
/// equivalent under component-wise semantics and stays as `Not(Atom)`.
pub fn to_nnf(f: &Formula) -> Result<Formula, LtlError> {
    positive(f)
}

fn positive(f: &Formula) -> Result<Formula, LtlError> {
    Ok(match f {
        Formula::Atom(a) => Formula::Atom(a.clone()),
        Formula::Not(g) => negative(g)?,
        Formula::And(a, b) => Formula::and(positive(a)?, positive(b)?),
        Formula::Or(a, b) => Formula::or(positive(a)?, positive(b)?),
        Formula::Implies(a, b) => Formula::or(negative(a)?, positive(b)?),
        Formula::Next(g) => Formula::next(positive(g)?),
        Formula::Always(g) => Formula::always(positive(g)?),
        Formula::Eventually(g) => Formula::eventually(positive(g)?),
        Formula::Until(a, b) => Formula::until(positive(a)?, positive(b)?),
    })
}

/// NNF of `!f`.
fn negative(f: &Formula) -> Result<Formula, LtlError> {
    Ok(match f {
        Formula::Atom(a) => negate_atom(a),
        Formula::Not(g) => positive(g)?,
        Formula::And(a, b) => Formula::or(negative(a)?, negative(b)?),
        Formula::Or(a, b) => Formula::and(negative(a)?, negative(b)?),
        Formula::Implies(a, b) => Formula::and(positive(a)?, negative(b)?),
        Formula::Next(g) => Formula::next(negative(g)?),
        Formula::Always(g) => Formula::eventually(negative(g)?),
        Formula::Eventually(g) => Formula::always(negative(g)?),
        Formula::Until(..) => return Err(LtlError::UnsupportedNegation(f.to_string())),
    })
}

fn negate_atom(a: &Atom) -> Formula {
    use super::ast::Cmp;
    if a.is_scalar() || matches!(a.op, Cmp::Eq | Cmp::Ne) {
        Formula::Atom(Atom::new(a.lhs.clone(), a.op.flip(), a.rhs.clone()))
    } else {
        Formula::not(Formula::Atom(a.clone()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ltl::ast::{Cmp, Term};

    fn a() -> Formula {
        Formula::atom(Term::Pos.component(0), Cmp::Le, Term::Scalar(0.5))
    }

    fn b() -> Formula {
        Formula::atom(Term::Pos.component(1), Cmp::Gt, Term::Scalar(0.1))
    }

    #[test]
    fn not_eventually_becomes_always_not_equal() {
        let f = Formula::not(Formula::eventually(Formula::atom(Term::Pos, Cmp::Eq, Term::Object(1))));
        let expected = Formula::always(Formula::atom(Term::Pos, Cmp::Ne, Term::Object(1)));
        assert_eq!(to_nnf(&f).unwrap(), expected);
    }

    #[test]
    fn double_negation_cancels() {
        assert_eq!(to_nnf(&Formula::not(Formula::not(a()))).unwrap(), a());
    }

    #[test]
    fn de_morgan_over_always() {
        // !(A & G B) -> !A | F !B
        let f = Formula::not(Formula::and(a(), Formula::always(b())));
        let na = Formula::atom(Term::Pos.component(0), Cmp::Gt, Term::Scalar(0.5));
        let nb = Formula::atom(Term::Pos.component(1), Cmp::Le, Term::Scalar(0.1));
        assert_eq!(to_nnf(&f).unwrap(), Formula::or(na, Formula::eventually(nb)));
    }

    #[test]
    fn implication_is_eliminated() {
        let f = Formula::implies(a(), Formula::next(b()));
        let g = to_nnf(&f).unwrap();
        assert!(g.is_nnf());
        assert!(matches!(g, Formula::Or(..)));
    }

    #[test]
    fn vector_orderings_keep_their_negation() {
        let atom = Formula::atom(Term::Pos, Cmp::Le, Term::Vector(vec![1.0, 1.0]));
        let g = to_nnf(&Formula::not(atom.clone())).unwrap();
        assert_eq!(g, Formula::not(atom));
        assert!(g.is_nnf());
    }

    #[test]
    fn negated_until_is_rejected() {
        let f = Formula::not(Formula::and(a(), Formula::until(a(), b())));
        assert!(matches!(to_nnf(&f), Err(LtlError::UnsupportedNegation(_))));
        assert!(to_nnf(&Formula::until(a(), Formula::not(b()))).is_ok());
    }
}
