//! Formula abstract syntax.
//!
//! Variables are positional: the index `i` stands for the fixed variable
//! `x_i` (1-based). The fluted fragment's suffix conditions are checked over
//! these indices, so no variable renaming machinery is needed anywhere in
//! the crate.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::signature::Signature;

/// A first-order formula over a relational signature.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    True,
    False,
    /// `pred(x_a, x_b, …)`; an empty argument list is a 0-ary atom.
    Atom { pred: String, args: Vec<usize> },
    /// `x_i = x_j`.
    Eq(usize, usize),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    /// `exists x_v …`.
    Exists(usize, Box<Formula>),
    /// `forall x_v …`.
    Forall(usize, Box<Formula>),
}

impl Formula {
    pub fn atom(pred: impl Into<String>, args: &[usize]) -> Formula {
        Formula::Atom {
            pred: pred.into(),
            args: args.to_vec(),
        }
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(l: Formula, r: Formula) -> Formula {
        Formula::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: Formula, r: Formula) -> Formula {
        Formula::Or(Box::new(l), Box::new(r))
    }

    pub fn implies(l: Formula, r: Formula) -> Formula {
        Formula::Implies(Box::new(l), Box::new(r))
    }

    pub fn iff(l: Formula, r: Formula) -> Formula {
        Formula::Iff(Box::new(l), Box::new(r))
    }

    pub fn exists(v: usize, f: Formula) -> Formula {
        Formula::Exists(v, Box::new(f))
    }

    pub fn forall(v: usize, f: Formula) -> Formula {
        Formula::Forall(v, Box::new(f))
    }

    /// Conjunction of `items` in order; `true` when empty.  The tree is
    /// balanced so recursive walks stay logarithmic in the item count.
    /// Purely structural: no simplification, so conjunct counts survive.
    pub fn conj(items: Vec<Formula>) -> Formula {
        Formula::balanced(items, true)
    }

    /// Disjunction of `items` in order; `false` when empty, balanced like
    /// [`Formula::conj`].
    pub fn disj(items: Vec<Formula>) -> Formula {
        Formula::balanced(items, false)
    }

    fn balanced(mut items: Vec<Formula>, is_and: bool) -> Formula {
        match items.len() {
            0 => {
                if is_and {
                    Formula::True
                } else {
                    Formula::False
                }
            }
            1 => items.pop().expect("one item"),
            n => {
                let right = items.split_off(n / 2);
                let l = Formula::balanced(items, is_and);
                let r = Formula::balanced(right, is_and);
                if is_and {
                    Formula::and(l, r)
                } else {
                    Formula::or(l, r)
                }
            }
        }
    }

    /// The conjuncts of a (possibly nested) conjunction, left to right.
    pub fn flatten_and(&self) -> Vec<&Formula> {
        let mut out = Vec::new();
        fn walk<'a>(f: &'a Formula, out: &mut Vec<&'a Formula>) {
            match f {
                Formula::And(l, r) => {
                    walk(l, out);
                    walk(r, out);
                }
                other => out.push(other),
            }
        }
        walk(self, &mut out);
        out
    }

    /// The disjuncts of a (possibly nested) disjunction, left to right.
    pub fn flatten_or(&self) -> Vec<&Formula> {
        let mut out = Vec::new();
        fn walk<'a>(f: &'a Formula, out: &mut Vec<&'a Formula>) {
            match f {
                Formula::Or(l, r) => {
                    walk(l, out);
                    walk(r, out);
                }
                other => out.push(other),
            }
        }
        walk(self, &mut out);
        out
    }

    pub fn free_vars(&self) -> BTreeSet<usize> {
        match self {
            Formula::True | Formula::False => BTreeSet::new(),
            Formula::Atom { args, .. } => args.iter().copied().collect(),
            Formula::Eq(i, j) => [*i, *j].into_iter().collect(),
            Formula::Not(f) => f.free_vars(),
            Formula::And(l, r)
            | Formula::Or(l, r)
            | Formula::Implies(l, r)
            | Formula::Iff(l, r) => {
                let mut s = l.free_vars();
                s.extend(r.free_vars());
                s
            }
            Formula::Exists(v, f) | Formula::Forall(v, f) => {
                let mut s = f.free_vars();
                s.remove(v);
                s
            }
        }
    }

    /// Every variable index occurring anywhere, bound or free.
    pub fn vars_used(&self) -> BTreeSet<usize> {
        match self {
            Formula::True | Formula::False => BTreeSet::new(),
            Formula::Atom { args, .. } => args.iter().copied().collect(),
            Formula::Eq(i, j) => [*i, *j].into_iter().collect(),
            Formula::Not(f) => f.vars_used(),
            Formula::And(l, r)
            | Formula::Or(l, r)
            | Formula::Implies(l, r)
            | Formula::Iff(l, r) => {
                let mut s = l.vars_used();
                s.extend(r.vars_used());
                s
            }
            Formula::Exists(v, f) | Formula::Forall(v, f) => {
                let mut s = f.vars_used();
                s.insert(*v);
                s
            }
        }
    }

    pub fn is_sentence(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Predicate names occurring in the formula, in name order.
    pub fn predicates(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        fn walk<'a>(f: &'a Formula, out: &mut BTreeSet<&'a str>) {
            match f {
                Formula::Atom { pred, .. } => {
                    out.insert(pred.as_str());
                }
                Formula::True | Formula::False | Formula::Eq(..) => {}
                Formula::Not(g) | Formula::Exists(_, g) | Formula::Forall(_, g) => walk(g, out),
                Formula::And(l, r)
                | Formula::Or(l, r)
                | Formula::Implies(l, r)
                | Formula::Iff(l, r) => {
                    walk(l, out);
                    walk(r, out);
                }
            }
        }
        walk(self, &mut out);
        out
    }

    pub fn uses_equality(&self) -> bool {
        match self {
            Formula::Eq(..) => true,
            Formula::True | Formula::False | Formula::Atom { .. } => false,
            Formula::Not(f) | Formula::Exists(_, f) | Formula::Forall(_, f) => f.uses_equality(),
            Formula::And(l, r)
            | Formula::Or(l, r)
            | Formula::Implies(l, r)
            | Formula::Iff(l, r) => l.uses_equality() || r.uses_equality(),
        }
    }

    /// Checks every atom against the signature: declared predicate, matching
    /// arity, equality only if enabled.
    pub fn validate(&self, sig: &Signature) -> Result<()> {
        match self {
            Formula::True | Formula::False => Ok(()),
            Formula::Atom { pred, args } => match sig.arity(pred) {
                None => Err(Error::UnknownPredicate(pred.clone())),
                Some(a) if a != args.len() => Err(Error::ArityMismatch {
                    pred: pred.clone(),
                    declared: a,
                    used: args.len(),
                }),
                Some(_) => Ok(()),
            },
            Formula::Eq(..) => {
                if sig.equality_enabled() {
                    Ok(())
                } else {
                    Err(Error::EqualityDisabled)
                }
            }
            Formula::Not(f) | Formula::Exists(_, f) | Formula::Forall(_, f) => f.validate(sig),
            Formula::And(l, r)
            | Formula::Or(l, r)
            | Formula::Implies(l, r)
            | Formula::Iff(l, r) => {
                l.validate(sig)?;
                r.validate(sig)
            }
        }
    }

    /// Negation normal form: negations pushed to atoms, `->` and `<->`
    /// expanded, constants simplified under negation only.
    pub fn nnf(&self) -> Formula {
        self.nnf_signed(true)
    }

    fn nnf_signed(&self, positive: bool) -> Formula {
        match (self, positive) {
            (Formula::True, true) | (Formula::False, false) => Formula::True,
            (Formula::True, false) | (Formula::False, true) => Formula::False,
            (Formula::Atom { .. }, true) | (Formula::Eq(..), true) => self.clone(),
            (Formula::Atom { .. }, false) | (Formula::Eq(..), false) => {
                Formula::not(self.clone())
            }
            (Formula::Not(f), _) => f.nnf_signed(!positive),
            (Formula::And(l, r), true) | (Formula::Or(l, r), false) => {
                Formula::and(l.nnf_signed(positive), r.nnf_signed(positive))
            }
            (Formula::Or(l, r), true) | (Formula::And(l, r), false) => {
                Formula::or(l.nnf_signed(positive), r.nnf_signed(positive))
            }
            (Formula::Implies(l, r), true) => {
                Formula::or(l.nnf_signed(false), r.nnf_signed(true))
            }
            (Formula::Implies(l, r), false) => {
                Formula::and(l.nnf_signed(true), r.nnf_signed(false))
            }
            (Formula::Iff(l, r), true) => Formula::or(
                Formula::and(l.nnf_signed(true), r.nnf_signed(true)),
                Formula::and(l.nnf_signed(false), r.nnf_signed(false)),
            ),
            (Formula::Iff(l, r), false) => Formula::or(
                Formula::and(l.nnf_signed(true), r.nnf_signed(false)),
                Formula::and(l.nnf_signed(false), r.nnf_signed(true)),
            ),
            (Formula::Exists(v, f), true) | (Formula::Forall(v, f), false) => {
                Formula::exists(*v, f.nnf_signed(positive))
            }
            (Formula::Forall(v, f), true) | (Formula::Exists(v, f), false) => {
                Formula::forall(*v, f.nnf_signed(positive))
            }
        }
    }

    /// Propagates boolean constants bottom-up.  Quantifiers over constants
    /// collapse because structures always have nonempty domains.
    pub fn simplify(&self) -> Formula {
        match self {
            Formula::True | Formula::False | Formula::Atom { .. } | Formula::Eq(..) => {
                self.clone()
            }
            Formula::Not(f) => match f.simplify() {
                Formula::True => Formula::False,
                Formula::False => Formula::True,
                g => Formula::not(g),
            },
            Formula::And(l, r) => match (l.simplify(), r.simplify()) {
                (Formula::False, _) | (_, Formula::False) => Formula::False,
                (Formula::True, g) | (g, Formula::True) => g,
                (a, b) => Formula::and(a, b),
            },
            Formula::Or(l, r) => match (l.simplify(), r.simplify()) {
                (Formula::True, _) | (_, Formula::True) => Formula::True,
                (Formula::False, g) | (g, Formula::False) => g,
                (a, b) => Formula::or(a, b),
            },
            Formula::Implies(l, r) => match (l.simplify(), r.simplify()) {
                (Formula::False, _) | (_, Formula::True) => Formula::True,
                (Formula::True, g) => g,
                (a, Formula::False) => Formula::not(a).simplify(),
                (a, b) => Formula::implies(a, b),
            },
            Formula::Iff(l, r) => match (l.simplify(), r.simplify()) {
                (Formula::True, g) | (g, Formula::True) => g,
                (Formula::False, g) | (g, Formula::False) => Formula::not(g).simplify(),
                (a, b) => Formula::iff(a, b),
            },
            Formula::Exists(v, f) => match f.simplify() {
                Formula::True => Formula::True,
                Formula::False => Formula::False,
                g => Formula::exists(*v, g),
            },
            Formula::Forall(v, f) => match f.simplify() {
                Formula::True => Formula::True,
                Formula::False => Formula::False,
                g => Formula::forall(*v, g),
            },
        }
    }

    /// Replaces every atom of predicate `pred` by a boolean constant.
    pub fn substitute_pred(&self, pred: &str, value: bool) -> Formula {
        let constant = if value { Formula::True } else { Formula::False };
        match self {
            Formula::Atom { pred: p, .. } if p == pred => constant,
            Formula::True | Formula::False | Formula::Atom { .. } | Formula::Eq(..) => {
                self.clone()
            }
            Formula::Not(f) => Formula::not(f.substitute_pred(pred, value)),
            Formula::And(l, r) => Formula::and(
                l.substitute_pred(pred, value),
                r.substitute_pred(pred, value),
            ),
            Formula::Or(l, r) => Formula::or(
                l.substitute_pred(pred, value),
                r.substitute_pred(pred, value),
            ),
            Formula::Implies(l, r) => Formula::implies(
                l.substitute_pred(pred, value),
                r.substitute_pred(pred, value),
            ),
            Formula::Iff(l, r) => Formula::iff(
                l.substitute_pred(pred, value),
                r.substitute_pred(pred, value),
            ),
            Formula::Exists(v, f) => Formula::exists(*v, f.substitute_pred(pred, value)),
            Formula::Forall(v, f) => Formula::forall(*v, f.substitute_pred(pred, value)),
        }
    }

    /// Shifts every variable index (arguments and binders) by `delta`.
    /// The fluted numbering is positional, so a uniform shift is exactly a
    /// renaming; indices must stay ≥ 1.
    pub fn shift_vars(&self, delta: isize) -> Formula {
        let sh = |v: usize| -> usize {
            let n = v as isize + delta;
            assert!(n >= 1, "variable index shifted below 1");
            n as usize
        };
        match self {
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            Formula::Atom { pred, args } => Formula::Atom {
                pred: pred.clone(),
                args: args.iter().map(|&v| sh(v)).collect(),
            },
            Formula::Eq(i, j) => Formula::Eq(sh(*i), sh(*j)),
            Formula::Not(f) => Formula::not(f.shift_vars(delta)),
            Formula::And(l, r) => Formula::and(l.shift_vars(delta), r.shift_vars(delta)),
            Formula::Or(l, r) => Formula::or(l.shift_vars(delta), r.shift_vars(delta)),
            Formula::Implies(l, r) => {
                Formula::implies(l.shift_vars(delta), r.shift_vars(delta))
            }
            Formula::Iff(l, r) => Formula::iff(l.shift_vars(delta), r.shift_vars(delta)),
            Formula::Exists(v, f) => Formula::exists(sh(*v), f.shift_vars(delta)),
            Formula::Forall(v, f) => Formula::forall(sh(*v), f.shift_vars(delta)),
        }
    }
}

const PREC_IFF: u8 = 1;
const PREC_IMPLIES: u8 = 2;
const PREC_OR: u8 = 3;
const PREC_AND: u8 = 4;
const PREC_PREFIX: u8 = 5;
const PREC_ATOM: u8 = 6;

impl Formula {
    fn prec(&self) -> u8 {
        match self {
            Formula::Iff(..) => PREC_IFF,
            Formula::Implies(..) => PREC_IMPLIES,
            Formula::Or(..) => PREC_OR,
            Formula::And(..) => PREC_AND,
            Formula::Not(..) | Formula::Exists(..) | Formula::Forall(..) => PREC_PREFIX,
            _ => PREC_ATOM,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let parens = self.prec() < min;
        if parens {
            write!(f, "(")?;
        }
        match self {
            Formula::True => write!(f, "true")?,
            Formula::False => write!(f, "false")?,
            Formula::Atom { pred, args } => {
                write!(f, "{pred}")?;
                if !args.is_empty() {
                    write!(f, "(")?;
                    for (k, v) in args.iter().enumerate() {
                        if k > 0 {
                            write!(f, ",")?;
                        }
                        write!(f, "x{v}")?;
                    }
                    write!(f, ")")?;
                }
            }
            Formula::Eq(i, j) => write!(f, "x{i} = x{j}")?,
            Formula::Not(g) => {
                write!(f, "~")?;
                g.fmt_prec(f, PREC_PREFIX)?;
            }
            Formula::And(l, r) => {
                l.fmt_prec(f, PREC_AND)?;
                write!(f, " & ")?;
                r.fmt_prec(f, PREC_AND + 1)?;
            }
            Formula::Or(l, r) => {
                l.fmt_prec(f, PREC_OR)?;
                write!(f, " | ")?;
                r.fmt_prec(f, PREC_OR + 1)?;
            }
            Formula::Implies(l, r) => {
                l.fmt_prec(f, PREC_IMPLIES + 1)?;
                write!(f, " -> ")?;
                r.fmt_prec(f, PREC_IMPLIES)?;
            }
            Formula::Iff(l, r) => {
                l.fmt_prec(f, PREC_IFF)?;
                write!(f, " <-> ")?;
                r.fmt_prec(f, PREC_IFF + 1)?;
            }
            Formula::Exists(v, g) => {
                write!(f, "exists x{v} ")?;
                g.fmt_prec(f, PREC_PREFIX)?;
            }
            Formula::Forall(v, g) => {
                write!(f, "forall x{v} ")?;
                g.fmt_prec(f, PREC_PREFIX)?;
            }
        }
        if parens {
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn student_sentence() -> Formula {
        // forall x1 (student(x1) -> ~forall x2 (prof(x2) -> admires(x1,x2)))
        Formula::forall(
            1,
            Formula::implies(
                Formula::atom("student", &[1]),
                Formula::not(Formula::forall(
                    2,
                    Formula::implies(
                        Formula::atom("prof", &[2]),
                        Formula::atom("admires", &[1, 2]),
                    ),
                )),
            ),
        )
    }

    #[test]
    fn displays_with_minimal_parens() {
        assert_eq!(
            student_sentence().to_string(),
            "forall x1 (student(x1) -> ~forall x2 (prof(x2) -> admires(x1,x2)))"
        );
        let f = Formula::and(
            Formula::or(Formula::atom("p", &[]), Formula::atom("q", &[])),
            Formula::atom("r", &[]),
        );
        assert_eq!(f.to_string(), "(p | q) & r");
        let chain = Formula::implies(
            Formula::atom("a", &[]),
            Formula::implies(Formula::atom("b", &[]), Formula::atom("c", &[])),
        );
        assert_eq!(chain.to_string(), "a -> b -> c");
    }

    #[test]
    fn free_and_used_vars() {
        let f = student_sentence();
        assert!(f.is_sentence());
        assert_eq!(f.vars_used().len(), 2);
        let open = Formula::atom("admires", &[1, 2]);
        assert_eq!(open.free_vars().into_iter().collect::<Vec<_>>(), vec![1, 2]);
    }

    #[test]
    fn nnf_pushes_negations() {
        let f = Formula::not(Formula::forall(
            1,
            Formula::implies(Formula::atom("p", &[1]), Formula::atom("q", &[1])),
        ));
        assert_eq!(
            f.nnf().to_string(),
            "exists x1 (p(x1) & ~q(x1))"
        );
        let g = Formula::not(Formula::not(Formula::atom("p", &[1])));
        assert_eq!(g.nnf(), Formula::atom("p", &[1]));
    }

    #[test]
    fn conj_disj_are_structural() {
        let items = vec![
            Formula::atom("a", &[]),
            Formula::atom("b", &[]),
            Formula::atom("c", &[]),
        ];
        let c = Formula::conj(items.clone());
        assert_eq!(c.flatten_and().len(), 3);
        assert_eq!(Formula::conj(vec![]), Formula::True);
        let d = Formula::disj(items);
        assert_eq!(d.flatten_or().len(), 3);
        assert_eq!(Formula::disj(vec![]), Formula::False);
    }

    #[test]
    fn shift_renames_uniformly() {
        let f = Formula::exists(2, Formula::atom("p", &[2]));
        assert_eq!(
            f.shift_vars(-1),
            Formula::exists(1, Formula::atom("p", &[1]))
        );
        assert_eq!(f.shift_vars(1).to_string(), "exists x3 p(x3)");
    }

    #[test]
    fn validate_checks_signature() {
        let mut sig = Signature::new();
        sig.declare("p", 1).unwrap();
        assert!(Formula::atom("p", &[1]).validate(&sig).is_ok());
        assert!(matches!(
            Formula::atom("q", &[1]).validate(&sig),
            Err(Error::UnknownPredicate(_))
        ));
        assert!(matches!(
            Formula::atom("p", &[1, 2]).validate(&sig),
            Err(Error::ArityMismatch { .. })
        ));
        assert!(matches!(
            Formula::Eq(1, 2).validate(&sig),
            Err(Error::EqualityDisabled)
        ));
        sig.set_equality(true);
        assert!(Formula::Eq(1, 2).validate(&sig).is_ok());
    }
}
