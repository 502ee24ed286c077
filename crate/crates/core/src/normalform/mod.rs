//! Normal forms for fluted sentences.
//!
//! Two targets are supported.  [`cnf::to_clause_normal_form`] rewrites a
//! fluted sentence into a guarded clause normal form: a set of universally
//! closed clauses plus guarded existential and universal conjuncts whose
//! guards are atoms over the full quantifier prefix.  That form feeds the
//! predicate-elimination pipeline.  [`basic::to_basic_branches`] rewrites a
//! two-variable sentence whose only binary predicate is the distinguished
//! transitive one into branches of *basic formulas*, the shapes consumed by
//! the certificate solver.
//!
//! This module holds the shared vocabulary: full 1-types over the unary
//! predicates, quantifier-free one-variable formulas, and the four basic
//! formula shapes.

pub mod basic;
pub mod cnf;

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::formula::Formula;
use crate::signature::Signature;
use crate::structure::Structure;

/// A full 1-type: one truth value per unary predicate of the signature, in
/// sorted name order.  Bit `i` corresponds to the `i`-th unary predicate.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OneType {
    bits: Vec<bool>,
}

impl OneType {
    pub fn from_bits(bits: Vec<bool>) -> Self {
        OneType { bits }
    }

    pub fn width(&self) -> usize {
        self.bits.len()
    }

    pub fn bit(&self, i: usize) -> bool {
        self.bits[i]
    }

    /// The type's index when bits are read as a little-endian integer.
    pub fn rank(&self) -> usize {
        self.bits
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &b)| acc | ((b as usize) << i))
    }

    pub fn from_rank(rank: usize, width: usize) -> Self {
        OneType { bits: (0..width).map(|i| rank & (1 << i) != 0).collect() }
    }

    /// All `2^width` types in ascending rank order.
    pub fn all(width: usize) -> Vec<OneType> {
        (0..1usize << width).map(|r| OneType::from_rank(r, width)).collect()
    }

    /// The 1-type realized by element `a`.
    pub fn of_element(s: &Structure, sig: &Signature, a: usize) -> Self {
        let bits = sig
            .unary_predicates()
            .iter()
            .map(|p| s.holds(p, &[a]))
            .collect();
        OneType { bits }
    }

    /// The type as a conjunction of unary literals on the given variable.
    pub fn to_formula(&self, sig: &Signature, var: usize) -> Formula {
        let unaries = sig.unary_predicates();
        assert_eq!(unaries.len(), self.bits.len(), "type width does not match signature");
        let lits = unaries
            .iter()
            .zip(&self.bits)
            .map(|(p, &b)| {
                let atom = Formula::atom(*p, &[var]);
                if b { atom } else { Formula::not(atom) }
            })
            .collect();
        Formula::conj(lits)
    }

    /// Renders the bits as a string of `0`/`1`, bit 0 first.
    pub fn to_bit_string(&self) -> String {
        self.bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }

    pub fn from_bit_string(text: &str) -> Result<Self> {
        let mut bits = Vec::with_capacity(text.len());
        for c in text.chars() {
            match c {
                '0' => bits.push(false),
                '1' => bits.push(true),
                _ => {
                    return Err(Error::InvalidCertificate(format!(
                        "bit string `{text}` contains `{c}`"
                    )))
                }
            }
        }
        Ok(OneType { bits })
    }
}

impl fmt::Display for OneType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_bit_string())
    }
}

/// A quantifier-free, equality-free formula over unary predicates in a
/// single variable, normalized internally to `x1`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct UnaryFormula {
    f: Formula,
}

impl UnaryFormula {
    /// Validates shape and normalizes the (unique) variable to `x1`.
    pub fn new(f: Formula, sig: &Signature) -> Result<Self> {
        let mut var: Option<usize> = None;
        check_unary_shape(&f, sig, &mut var)?;
        let f = match var {
            Some(v) if v > 1 => shift_to_one(&f, v),
            _ => f,
        };
        Ok(UnaryFormula { f })
    }

    pub fn tautology() -> Self {
        UnaryFormula { f: Formula::True }
    }

    pub fn contradiction() -> Self {
        UnaryFormula { f: Formula::False }
    }

    pub fn negated(&self) -> Self {
        UnaryFormula { f: Formula::not(self.f.clone()).nnf() }
    }

    /// Truth of the formula at a 1-type.
    pub fn eval(&self, pi: &OneType, sig: &Signature) -> bool {
        let unaries = sig.unary_predicates();
        eval_unary(&self.f, pi, &unaries)
    }

    /// True if some 1-type over the signature's unary predicates models it.
    pub fn is_satisfiable(&self, sig: &Signature) -> bool {
        let width = sig.unary_predicates().len();
        OneType::all(width).iter().any(|pi| self.eval(pi, sig))
    }

    /// The formula with its variable renamed to `var`.
    pub fn as_formula(&self, var: usize) -> Formula {
        if var == 1 {
            self.f.clone()
        } else {
            self.f.shift_vars(var as isize - 1)
        }
    }
}

impl fmt::Display for UnaryFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.f)
    }
}

fn check_unary_shape(f: &Formula, sig: &Signature, var: &mut Option<usize>) -> Result<()> {
    match f {
        Formula::True | Formula::False => Ok(()),
        Formula::Atom { pred, args } => {
            let declared = sig
                .arity(pred)
                .ok_or_else(|| Error::UnknownPredicate(pred.clone()))?;
            if declared != 1 || args.len() != 1 {
                return Err(Error::WrongFragment(format!(
                    "`{pred}` is not unary in a one-variable formula"
                )));
            }
            match *var {
                None => {
                    *var = Some(args[0]);
                    Ok(())
                }
                Some(v) if v == args[0] => Ok(()),
                Some(v) => Err(Error::WrongFragment(format!(
                    "one-variable formula mixes x{v} and x{}",
                    args[0]
                ))),
            }
        }
        Formula::Not(a) => check_unary_shape(a, sig, var),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
            check_unary_shape(a, sig, var)?;
            check_unary_shape(b, sig, var)
        }
        Formula::Eq(..) => Err(Error::WrongFragment(
            "equality cannot appear in a one-variable formula".into(),
        )),
        Formula::Exists(..) | Formula::Forall(..) => Err(Error::WrongFragment(
            "quantifier inside a one-variable formula".into(),
        )),
    }
}

fn shift_to_one(f: &Formula, v: usize) -> Formula {
    f.shift_vars(1 - v as isize)
}

fn eval_unary(f: &Formula, pi: &OneType, unaries: &[&str]) -> bool {
    match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Atom { pred, .. } => {
            let idx = unaries
                .iter()
                .position(|p| p == pred)
                .expect("unary predicate missing from signature");
            pi.bit(idx)
        }
        Formula::Not(a) => !eval_unary(a, pi, unaries),
        Formula::And(a, b) => eval_unary(a, pi, unaries) && eval_unary(b, pi, unaries),
        Formula::Or(a, b) => eval_unary(a, pi, unaries) || eval_unary(b, pi, unaries),
        Formula::Implies(a, b) => !eval_unary(a, pi, unaries) || eval_unary(b, pi, unaries),
        Formula::Iff(a, b) => eval_unary(a, pi, unaries) == eval_unary(b, pi, unaries),
        _ => unreachable!("validated unary formula"),
    }
}

/// The four shapes of basic formulas over a signature with one distinguished
/// transitive predicate `t`.
///
/// * `ExistsMu(mu)`: `exists x1 mu(x1)`.
/// * `ForallMu(mu)`: `forall x1 mu(x1)`.
/// * `ExistWitness(pi, mu, positive)`: every element of 1-type `pi` has a
///   `mu`-witness connected by `t` (positive) or by `~t` (negative):
///   `forall x1 (pi(x1) -> exists x2 (mu(x2) & [~]t(x1,x2)))`.
/// * `UniversalLink(pi, pi2, positive)`: all pairs from `pi` to `pi2` are
///   `t`-linked (positive) or unlinked (negative):
///   `forall x1 (pi(x1) -> forall x2 (pi2(x2) -> [~]t(x1,x2)))`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum BasicFormula {
    ExistsMu(UnaryFormula),
    ForallMu(UnaryFormula),
    ExistWitness(OneType, UnaryFormula, bool),
    UniversalLink(OneType, OneType, bool),
}

/// Renders a basic formula as a fluted sentence over the signature.  The
/// signature must have exactly one distinguished predicate.
pub fn basic_to_formula(bf: &BasicFormula, sig: &Signature) -> Result<Formula> {
    let t = single_distinguished(sig)?;
    let f = match bf {
        BasicFormula::ExistsMu(mu) => Formula::exists(1, mu.as_formula(1)),
        BasicFormula::ForallMu(mu) => Formula::forall(1, mu.as_formula(1)),
        BasicFormula::ExistWitness(pi, mu, positive) => {
            let t_atom = Formula::atom(&t, &[1, 2]);
            let link = if *positive { t_atom } else { Formula::not(t_atom) };
            Formula::forall(
                1,
                Formula::implies(
                    pi.to_formula(sig, 1),
                    Formula::exists(2, Formula::and(mu.as_formula(2), link)),
                ),
            )
        }
        BasicFormula::UniversalLink(pi, pi2, positive) => {
            let t_atom = Formula::atom(&t, &[1, 2]);
            let link = if *positive { t_atom } else { Formula::not(t_atom) };
            Formula::forall(
                1,
                Formula::implies(
                    pi.to_formula(sig, 1),
                    Formula::forall(2, Formula::implies(pi2.to_formula(sig, 2), link)),
                ),
            )
        }
    };
    Ok(f)
}

fn single_distinguished(sig: &Signature) -> Result<String> {
    let mut it = sig.distinguished();
    match (it.next(), it.next()) {
        (Some(t), None) => Ok(t.to_string()),
        (None, _) => Err(Error::Signature(
            "basic formulas need a distinguished transitive predicate".into(),
        )),
        _ => Err(Error::Signature(
            "basic formulas need exactly one distinguished predicate".into(),
        )),
    }
}

/// One branch produced by [`basic::to_basic_branches`]: a set of basic
/// formulas over an extended signature, together with the truth values this
/// branch fixed for the zero-ary predicates of the input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasicFormulaSet {
    pub sig: Signature,
    pub formulas: Vec<BasicFormula>,
    pub zeroary_valuation: BTreeMap<String, bool>,
}

impl BasicFormulaSet {
    /// The branch as a single sentence: the conjunction of all basic
    /// formulas and of the fixed zero-ary literals.
    pub fn to_formula(&self) -> Result<Formula> {
        let mut conjuncts = Vec::new();
        for (z, &val) in &self.zeroary_valuation {
            let atom = Formula::atom(z, &[]);
            conjuncts.push(if val { atom } else { Formula::not(atom) });
        }
        for bf in &self.formulas {
            conjuncts.push(basic_to_formula(bf, &self.sig)?);
        }
        Ok(Formula::conj(conjuncts))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig() -> Signature {
        let mut sig = Signature::new();
        sig.declare("p", 1).unwrap();
        sig.declare("q", 1).unwrap();
        sig.declare_transitive("t").unwrap();
        sig
    }

    #[test]
    fn one_type_round_trips() {
        for rank in 0..4 {
            let pi = OneType::from_rank(rank, 2);
            assert_eq!(pi.rank(), rank);
            assert_eq!(OneType::from_bit_string(&pi.to_bit_string()).unwrap(), pi);
        }
        assert_eq!(OneType::all(2).len(), 4);
        assert!(OneType::from_bit_string("10x").is_err());
    }

    #[test]
    fn one_type_formula_lists_all_unaries() {
        let sig = sig();
        let pi = OneType::from_bits(vec![true, false]);
        assert_eq!(pi.to_formula(&sig, 1).to_string(), "p(x1) & ~q(x1)");
        assert_eq!(pi.to_formula(&sig, 2).to_string(), "p(x2) & ~q(x2)");
    }

    #[test]
    fn unary_formula_normalizes_variable() {
        let sig = sig();
        let f = crate::parser::parse_formula("p(x2) & ~q(x2)", &sig).unwrap();
        let mu = UnaryFormula::new(f, &sig).unwrap();
        assert_eq!(mu.as_formula(1).to_string(), "p(x1) & ~q(x1)");
        let pi = OneType::from_bits(vec![true, false]);
        assert!(mu.eval(&pi, &sig));
        let pi2 = OneType::from_bits(vec![true, true]);
        assert!(!mu.eval(&pi2, &sig));
    }

    #[test]
    fn unary_formula_rejects_bad_shapes() {
        let sig = sig();
        let f = crate::parser::parse_formula("t(x1,x2)", &sig).unwrap();
        assert!(UnaryFormula::new(f, &sig).is_err());
        let f = crate::parser::parse_formula("p(x1) & q(x2)", &sig).unwrap();
        assert!(UnaryFormula::new(f, &sig).is_err());
        let f = crate::parser::parse_formula("exists x1 p(x1)", &sig).unwrap();
        assert!(UnaryFormula::new(f, &sig).is_err());
    }

    #[test]
    fn basic_shapes_render_exactly() {
        let sig = sig();
        let mu = UnaryFormula::new(crate::parser::parse_formula("q(x1)", &sig).unwrap(), &sig)
            .unwrap();
        let pi = OneType::from_bits(vec![true, false]);
        let pi2 = OneType::from_bits(vec![false, true]);

        let f = basic_to_formula(&BasicFormula::ExistsMu(mu.clone()), &sig).unwrap();
        assert_eq!(f.to_string(), "exists x1 q(x1)");

        let f = basic_to_formula(&BasicFormula::ForallMu(mu.clone()), &sig).unwrap();
        assert_eq!(f.to_string(), "forall x1 q(x1)");

        let f = basic_to_formula(
            &BasicFormula::ExistWitness(pi.clone(), mu.clone(), true),
            &sig,
        )
        .unwrap();
        assert_eq!(
            f.to_string(),
            "forall x1 (p(x1) & ~q(x1) -> exists x2 (q(x2) & t(x1,x2)))"
        );

        let f = basic_to_formula(&BasicFormula::UniversalLink(pi, pi2, false), &sig).unwrap();
        assert_eq!(
            f.to_string(),
            "forall x1 (p(x1) & ~q(x1) -> forall x2 (~p(x2) & q(x2) -> ~t(x1,x2)))"
        );
    }

    #[test]
    fn rendered_basic_formulas_are_fluted() {
        let sig = sig();
        let mu = UnaryFormula::new(crate::parser::parse_formula("p(x1) | q(x1)", &sig).unwrap(), &sig)
            .unwrap();
        for bf in [
            BasicFormula::ExistsMu(mu.clone()),
            BasicFormula::ForallMu(mu.clone()),
            BasicFormula::ExistWitness(OneType::from_rank(2, 2), mu.clone(), false),
            BasicFormula::UniversalLink(OneType::from_rank(0, 2), OneType::from_rank(3, 2), true),
        ] {
            let f = basic_to_formula(&bf, &sig).unwrap();
            let report = crate::fluted::validate_fluted(&f);
            assert!(report.is_fluted, "{f}");
            assert!(f.is_sentence());
        }
    }
}
