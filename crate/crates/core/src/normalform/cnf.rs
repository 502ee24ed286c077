//! Guarded clause normal form for fluted sentences.
//!
//! The target shape over `m` variables is a conjunction of
//!
//! * universally closed width-`m` clauses (the `omega` set),
//! * guarded existential conjuncts
//!   `forall x1..x_{m-1} (guard -> exists x_m Gamma)`, and
//! * guarded universal conjuncts
//!   `forall x1..x_{m-1} (guard -> forall x_m Delta)`,
//!
//! where every guard is an atom over exactly `x1..x_{m-1}` and `Gamma`,
//! `Delta` are width-`m` clause sets.  The rewriting renames quantified
//! subformulas with fresh predicates (named `_nf0`, `_nf1`, ... per run) and
//! keeps the result equisatisfiable with the input.  Conjuncts that already
//! have one of the target shapes are emitted directly, without fresh names.
//!
//! Quantifier-free matrices are turned into clauses by plain distribution
//! with a clause cap; no subformula renaming happens below the quantifier
//! level, so no predicates of maximal arity are invented.  That matters
//! downstream: predicate elimination projects clause sets onto the
//! non-maximal part of the signature, and extra maximal-arity predicates
//! would survive into the projection step.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::fluted::validate_fluted;
use crate::formula::Formula;
use crate::resolution::{FlutedClause, FlutedLiteral};
use crate::signature::Signature;

/// Default cap on the number of clauses any single matrix may distribute to.
pub const DEFAULT_CLAUSE_CAP: usize = 4096;

/// A guarded conjunct: `forall x1..x_{m-1} (guard(x1..x_{m-1}) -> Q x_m C)`
/// for `Q` existential or universal depending on which list it sits in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GuardedBlock {
    pub guard: String,
    pub clauses: BTreeSet<FlutedClause>,
}

/// A sentence in guarded clause normal form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnfFormula {
    pub m: usize,
    pub sig: Signature,
    pub omega: BTreeSet<FlutedClause>,
    pub existentials: Vec<GuardedBlock>,
    pub universals: Vec<GuardedBlock>,
}

impl CnfFormula {
    /// Number of guarded existential conjuncts.
    pub fn s(&self) -> usize {
        self.existentials.len()
    }

    /// Number of guarded universal conjuncts.
    pub fn t(&self) -> usize {
        self.universals.len()
    }
}

struct Converter {
    m: usize,
    sig: Signature,
    omega: BTreeSet<FlutedClause>,
    existentials: Vec<GuardedBlock>,
    universals: Vec<GuardedBlock>,
    counter: usize,
    clause_cap: usize,
}

/// Rewrites a fluted sentence into guarded clause normal form.
///
/// The sentence must be closed, fluted, equality-free, use no zero-ary
/// predicates, have width at least two, and be a top-level conjunction of
/// quantified conjuncts.  Disjunctive or zero-ary top-level structure must
/// be branched away by the caller first.
pub fn to_clause_normal_form(f: &Formula, sig: &Signature) -> Result<CnfFormula> {
    to_clause_normal_form_with(f, sig, DEFAULT_CLAUSE_CAP)
}

/// [`to_clause_normal_form`] with an explicit clause cap.
pub fn to_clause_normal_form_with(
    f: &Formula,
    sig: &Signature,
    clause_cap: usize,
) -> Result<CnfFormula> {
    f.validate(sig)?;
    if !f.is_sentence() {
        return Err(Error::WrongFragment(
            "clause normal form requires a sentence".into(),
        ));
    }
    let report = validate_fluted(f);
    if !report.is_fluted {
        return Err(Error::NotFluted(report.first_violation.unwrap_or_default()));
    }
    if f.uses_equality() {
        return Err(Error::WrongFragment(
            "equality is not supported in clause normal form".into(),
        ));
    }
    for pred in f.predicates() {
        if sig.arity(pred) == Some(0) {
            return Err(Error::WrongFragment(format!(
                "zero-ary predicate `{pred}` must be fixed to a truth value first"
            )));
        }
    }
    let m = report.variable_count;
    if m < 2 {
        return Err(Error::WrongFragment(format!(
            "clause normal form needs width at least 2, got {m}"
        )));
    }
    let mut conv = Converter {
        m,
        sig: sig.clone(),
        omega: BTreeSet::new(),
        existentials: Vec::new(),
        universals: Vec::new(),
        counter: 0,
        clause_cap,
    };
    let nnf = f.nnf();
    for unit in nnf.flatten_and() {
        conv.process_unit(unit)?;
    }
    Ok(CnfFormula {
        m: conv.m,
        sig: conv.sig,
        omega: conv.omega,
        existentials: conv.existentials,
        universals: conv.universals,
    })
}

impl Converter {
    fn fresh(&mut self, arity: usize) -> String {
        loop {
            let name = format!("_nf{}", self.counter);
            self.counter += 1;
            if !self.sig.contains(&name) {
                self.sig.declare(&name, arity).expect("fresh name is valid");
                return name;
            }
        }
    }

    fn process_unit(&mut self, unit: &Formula) -> Result<()> {
        match unit {
            Formula::True => return Ok(()),
            Formula::False => {
                self.omega.insert(FlutedClause::falsum(self.m));
                return Ok(());
            }
            Formula::Exists(..) | Formula::Forall(..) => {}
            _ => {
                return Err(Error::WrongFragment(
                    "top-level conjunct is neither quantified nor constant; \
                     branch the sentence before clause normal form"
                        .into(),
                ))
            }
        }
        // Strip the leading universal prefix; flutedness fixes binder order.
        let mut k = 0;
        let mut body = unit;
        while let Formula::Forall(_, inner) = body {
            k += 1;
            body = inner;
        }

        if quantifier_free(body) {
            let shifted = body.shift_vars((self.m - k) as isize);
            let clauses = self.distribute(&shifted)?;
            self.omega.extend(clauses);
            return Ok(());
        }

        // Direct emission for conjuncts already in guarded shape.
        if k == self.m - 1 {
            if let Some(()) = self.try_guarded_direct(body)? {
                return Ok(());
            }
        }

        if let Formula::Exists(_, c) = body {
            // Leading existential without a guard: a fresh guard that holds
            // everywhere turns it into a guarded conjunct.
            let c = self.extract(c, k + 1)?;
            let g = self.fresh(self.m - 1);
            self.omega
                .insert(FlutedClause::new(self.m, [FlutedLiteral::new(&g, 2, true)])?);
            let shifted = c.shift_vars((self.m - k - 1) as isize);
            let clauses = self.distribute(&shifted)?;
            self.existentials.push(GuardedBlock { guard: g, clauses });
            return Ok(());
        }

        let cleared = self.extract(body, k)?;
        let shifted = cleared.shift_vars((self.m - k) as isize);
        let clauses = self.distribute(&shifted)?;
        self.omega.extend(clauses);
        Ok(())
    }

    /// Matches `~guard(x1..x_{m-1}) | Q x_m C` with `C` quantifier-free and
    /// emits it without fresh predicates.
    fn try_guarded_direct(&mut self, body: &Formula) -> Result<Option<()>> {
        let disjuncts = body.flatten_or();
        if disjuncts.len() != 2 {
            return Ok(None);
        }
        for (i, j) in [(0, 1), (1, 0)] {
            let guard = match disjuncts[i] {
                Formula::Not(inner) => match inner.as_ref() {
                    Formula::Atom { pred, args }
                        if *args == (1..self.m).collect::<Vec<_>>() =>
                    {
                        pred.clone()
                    }
                    _ => continue,
                },
                _ => continue,
            };
            match disjuncts[j] {
                Formula::Exists(_, c) if quantifier_free(c) => {
                    let clauses = self.distribute(c)?;
                    self.existentials.push(GuardedBlock { guard, clauses });
                    return Ok(Some(()));
                }
                Formula::Forall(_, c) if quantifier_free(c) => {
                    let clauses = self.distribute(c)?;
                    self.universals.push(GuardedBlock { guard, clauses });
                    return Ok(Some(()));
                }
                _ => continue,
            }
        }
        Ok(None)
    }

    /// Replaces every quantified subformula under `phi` (a formula at the
    /// given level) by a fresh marker predicate, innermost first, emitting
    /// the defining conjunct for each marker.  Returns the quantifier-free
    /// remainder.
    fn extract(&mut self, phi: &Formula, level: usize) -> Result<Formula> {
        Ok(match phi {
            Formula::True | Formula::False | Formula::Atom { .. } | Formula::Not(_) => {
                phi.clone()
            }
            Formula::And(l, r) => Formula::and(
                self.extract(l, level)?,
                self.extract(r, level)?,
            ),
            Formula::Or(l, r) => Formula::or(
                self.extract(l, level)?,
                self.extract(r, level)?,
            ),
            Formula::Exists(v, b) | Formula::Forall(v, b) => {
                let is_exists = matches!(phi, Formula::Exists(..));
                let cleared = self.extract(b, *v)?;
                let k = v - 1;
                let marker = self.fresh(k);
                self.emit_marker_definition(&marker, is_exists, k, &cleared)?;
                let args: Vec<usize> = (1..=k).collect();
                Formula::atom(&marker, &args)
            }
            Formula::Implies(..) | Formula::Iff(..) | Formula::Eq(..) => {
                return Err(Error::Internal(
                    "unexpected connective after negation normal form".into(),
                ))
            }
        })
    }

    /// Emits `forall x1..xk (marker -> Q x_{k+1} body)` in guarded shape.
    /// At `k = m-1` the marker is itself a legal guard; below that an
    /// omega clause ties the marker to a fresh companion guard of arity
    /// `m-1` that fires wherever the marker does.
    fn emit_marker_definition(
        &mut self,
        marker: &str,
        is_exists: bool,
        k: usize,
        body: &Formula,
    ) -> Result<()> {
        let m = self.m;
        let (guard, clauses) = if k == m - 1 {
            (marker.to_string(), self.distribute(body)?)
        } else {
            let gbar = self.fresh(m - 1);
            self.omega.insert(FlutedClause::new(
                m,
                [
                    FlutedLiteral::new(marker, m - k + 1, false),
                    FlutedLiteral::new(&gbar, 2, true),
                ],
            )?);
            let shifted = body.shift_vars((m - k - 1) as isize);
            (gbar, self.distribute(&shifted)?)
        };
        let block = GuardedBlock { guard, clauses };
        if is_exists {
            self.existentials.push(block);
        } else {
            self.universals.push(block);
        }
        Ok(())
    }

    /// Distributes a quantifier-free width-`m` matrix into clauses.
    fn distribute(&self, phi: &Formula) -> Result<BTreeSet<FlutedClause>> {
        let raw = self.clause_lists(phi)?;
        let mut out = BTreeSet::new();
        for lits in raw {
            out.insert(FlutedClause::new(self.m, lits)?);
        }
        Ok(out)
    }

    fn clause_lists(&self, phi: &Formula) -> Result<Vec<BTreeSet<FlutedLiteral>>> {
        Ok(match phi {
            Formula::True => vec![],
            Formula::False => vec![BTreeSet::new()],
            Formula::Atom { .. } => vec![[self.make_literal(phi, true)?].into()],
            Formula::Not(inner) => vec![[self.make_literal(inner, false)?].into()],
            Formula::And(l, r) => {
                let mut a = self.clause_lists(l)?;
                let b = self.clause_lists(r)?;
                a.extend(b);
                if a.len() > self.clause_cap {
                    return Err(Error::resource(
                        "cnf",
                        format!("matrix distributes to more than {} clauses", self.clause_cap),
                    ));
                }
                a
            }
            Formula::Or(l, r) => {
                let a = self.clause_lists(l)?;
                let b = self.clause_lists(r)?;
                if a.len().saturating_mul(b.len()) > self.clause_cap {
                    return Err(Error::resource(
                        "cnf",
                        format!("matrix distributes to more than {} clauses", self.clause_cap),
                    ));
                }
                let mut out = Vec::with_capacity(a.len() * b.len());
                for ca in &a {
                    for cb in &b {
                        let mut c = ca.clone();
                        c.extend(cb.iter().cloned());
                        out.push(c);
                    }
                }
                out
            }
            _ => {
                return Err(Error::Internal(
                    "non-clausal connective in a quantifier-free matrix".into(),
                ))
            }
        })
    }

    fn make_literal(&self, atom: &Formula, positive: bool) -> Result<FlutedLiteral> {
        let Formula::Atom { pred, args } = atom else {
            return Err(Error::Internal("negation of a non-atom after NNF".into()));
        };
        let start = *args.first().ok_or_else(|| {
            Error::Internal("zero-ary atom reached clause construction".into())
        })?;
        if *args != (start..=self.m).collect::<Vec<_>>() {
            return Err(Error::Internal(format!(
                "atom `{pred}` is not a suffix atom ending at x{}",
                self.m
            )));
        }
        Ok(FlutedLiteral::new(pred.clone(), start, positive))
    }
}

fn quantifier_free(f: &Formula) -> bool {
    match f {
        Formula::True | Formula::False | Formula::Atom { .. } | Formula::Eq(..) => true,
        Formula::Not(a) => quantifier_free(a),
        Formula::And(a, b)
        | Formula::Or(a, b)
        | Formula::Implies(a, b)
        | Formula::Iff(a, b) => quantifier_free(a) && quantifier_free(b),
        Formula::Exists(..) | Formula::Forall(..) => false,
    }
}

/// Renders a clause normal form back into a fluted sentence: the omega
/// clauses universally closed, then the existential conjuncts, then the
/// universal conjuncts.
pub fn cnf_to_formula(cnf: &CnfFormula) -> Formula {
    let m = cnf.m;
    let mut conjuncts = Vec::new();
    for clause in &cnf.omega {
        conjuncts.push(forall_chain(1, m, clause.to_formula()));
    }
    let guard_args: Vec<usize> = (1..m).collect();
    for block in &cnf.existentials {
        let gamma = Formula::conj(block.clauses.iter().map(|c| c.to_formula()).collect());
        let body = Formula::implies(
            Formula::atom(&block.guard, &guard_args),
            Formula::exists(m, gamma),
        );
        conjuncts.push(forall_chain(1, m - 1, body));
    }
    for block in &cnf.universals {
        let delta = Formula::conj(block.clauses.iter().map(|c| c.to_formula()).collect());
        let body = Formula::implies(
            Formula::atom(&block.guard, &guard_args),
            Formula::forall(m, delta),
        );
        conjuncts.push(forall_chain(1, m - 1, body));
    }
    Formula::conj(conjuncts)
}

fn forall_chain(from: usize, to: usize, body: Formula) -> Formula {
    let mut f = body;
    for v in (from..=to).rev() {
        f = Formula::forall(v, f);
    }
    f
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::bounded_sat_oracle;
    use crate::parser::parse_formula;

    fn sig2() -> Signature {
        let mut sig = Signature::new();
        sig.declare("p", 1).unwrap();
        sig.declare("q", 2).unwrap();
        sig.declare("u", 1).unwrap();
        sig.declare_transitive("t").unwrap();
        sig
    }

    fn clause(m: usize, lits: &[(&str, usize, bool)]) -> FlutedClause {
        FlutedClause::new(
            m,
            lits.iter().map(|&(p, s, pos)| FlutedLiteral::new(p, s, pos)),
        )
        .unwrap()
    }

    #[test]
    fn guarded_existential_emits_directly() {
        let sig = sig2();
        let f = parse_formula("forall x1 (p(x1) -> exists x2 (q(x1,x2) & t(x1,x2)))", &sig)
            .unwrap();
        let cnf = to_clause_normal_form(&f, &sig).unwrap();
        assert_eq!(cnf.m, 2);
        assert!(cnf.omega.is_empty());
        assert_eq!(cnf.s(), 1);
        assert_eq!(cnf.t(), 0);
        assert_eq!(cnf.existentials[0].guard, "p");
        let expected: BTreeSet<FlutedClause> = [
            clause(2, &[("q", 1, true)]),
            clause(2, &[("t", 1, true)]),
        ]
        .into_iter()
        .collect();
        assert_eq!(cnf.existentials[0].clauses, expected);
        assert_eq!(cnf.sig.num_predicates(), sig.num_predicates());
    }

    #[test]
    fn bare_existential_gets_everywhere_guard() {
        let sig = sig2();
        let f = parse_formula("forall x1 exists x2 (p(x2) | u(x2))", &sig).unwrap();
        let cnf = to_clause_normal_form(&f, &sig).unwrap();
        let expected_omega: BTreeSet<FlutedClause> =
            [clause(2, &[("_nf0", 2, true)])].into_iter().collect();
        assert_eq!(cnf.omega, expected_omega);
        assert_eq!(cnf.s(), 1);
        assert_eq!(cnf.existentials[0].guard, "_nf0");
        let expected: BTreeSet<FlutedClause> =
            [clause(2, &[("p", 2, true), ("u", 2, true)])].into_iter().collect();
        assert_eq!(cnf.existentials[0].clauses, expected);
        assert_eq!(cnf.sig.arity("_nf0"), Some(1));
    }

    #[test]
    fn guarded_universal_emits_directly() {
        let sig = sig2();
        let f = parse_formula(
            "forall x1 (p(x1) -> forall x2 (t(x1,x2) -> u(x2)))",
            &sig,
        )
        .unwrap();
        let cnf = to_clause_normal_form(&f, &sig).unwrap();
        assert!(cnf.omega.is_empty());
        assert_eq!(cnf.t(), 1);
        assert_eq!(cnf.universals[0].guard, "p");
        let expected: BTreeSet<FlutedClause> =
            [clause(2, &[("t", 1, false), ("u", 2, true)])].into_iter().collect();
        assert_eq!(cnf.universals[0].clauses, expected);
    }

    #[test]
    fn full_prefix_matrix_becomes_omega() {
        let sig = sig2();
        let f = parse_formula(
            "forall x1 forall x2 (q(x1,x2) -> t(x1,x2)) & forall x1 p(x1)",
            &sig,
        )
        .unwrap();
        let cnf = to_clause_normal_form(&f, &sig).unwrap();
        let expected: BTreeSet<FlutedClause> = [
            clause(2, &[("q", 1, false), ("t", 1, true)]),
            clause(2, &[("p", 2, true)]),
        ]
        .into_iter()
        .collect();
        assert_eq!(cnf.omega, expected);
        assert_eq!((cnf.s(), cnf.t()), (0, 0));
    }

    #[test]
    fn deep_marker_uses_companion_guard() {
        let mut sig = Signature::new();
        sig.declare("p", 1).unwrap();
        sig.declare("q", 2).unwrap();
        sig.declare("u", 1).unwrap();
        sig.declare_transitive("t").unwrap();
        let f = parse_formula(
            "forall x1 (p(x1) -> exists x2 (q(x1,x2) & forall x3 (t(x2,x3) -> u(x3))))",
            &sig,
        )
        .unwrap();
        let cnf = to_clause_normal_form(&f, &sig).unwrap();
        assert_eq!(cnf.m, 3);
        // _nf0: the inner universal at width 3; _nf1: the existential at
        // level 1; _nf2: its arity-2 companion guard.
        assert_eq!(cnf.sig.arity("_nf0"), Some(2));
        assert_eq!(cnf.sig.arity("_nf1"), Some(1));
        assert_eq!(cnf.sig.arity("_nf2"), Some(2));
        let expected_omega: BTreeSet<FlutedClause> = [
            clause(3, &[("_nf1", 3, false), ("_nf2", 2, true)]),
            clause(3, &[("p", 3, false), ("_nf1", 3, true)]),
        ]
        .into_iter()
        .collect();
        assert_eq!(cnf.omega, expected_omega);
        assert_eq!(cnf.s(), 1);
        assert_eq!(cnf.existentials[0].guard, "_nf2");
        let expected_gamma: BTreeSet<FlutedClause> = [
            clause(3, &[("q", 2, true)]),
            clause(3, &[("_nf0", 2, true)]),
        ]
        .into_iter()
        .collect();
        assert_eq!(cnf.existentials[0].clauses, expected_gamma);
        assert_eq!(cnf.t(), 1);
        assert_eq!(cnf.universals[0].guard, "_nf0");
        let expected_delta: BTreeSet<FlutedClause> =
            [clause(3, &[("t", 2, false), ("u", 3, true)])].into_iter().collect();
        assert_eq!(cnf.universals[0].clauses, expected_delta);
    }

    #[test]
    fn rendered_output_is_fluted_and_parses_back() {
        let sig = sig2();
        for text in [
            "forall x1 (p(x1) -> exists x2 (q(x1,x2) & t(x1,x2)))",
            "forall x1 exists x2 (p(x2) | u(x2))",
            "exists x1 p(x1) & forall x1 exists x2 q(x1,x2)",
            "forall x1 (u(x1) | forall x2 (q(x1,x2) -> t(x1,x2)))",
        ] {
            let f = parse_formula(text, &sig).unwrap();
            let cnf = to_clause_normal_form(&f, &sig).unwrap();
            let rendered = cnf_to_formula(&cnf);
            let report = validate_fluted(&rendered);
            assert!(report.is_fluted, "{text} -> {rendered}");
            assert!(rendered.is_sentence());
            let reparsed = parse_formula(&rendered.to_string(), &cnf.sig).unwrap();
            assert_eq!(reparsed, rendered, "{text}");
        }
    }

    #[test]
    fn conversion_preserves_satisfiability() {
        let sig = sig2();
        for (text, expect_sat) in [
            ("forall x1 (p(x1) -> exists x2 (q(x1,x2) & t(x1,x2)))", true),
            ("forall x1 exists x2 (p(x2) | u(x2))", true),
            (
                "exists x1 p(x1) & forall x1 (p(x1) -> exists x2 (q(x1,x2) & p(x2))) \
                 & forall x1 forall x2 (q(x1,x2) -> ~p(x2))",
                false,
            ),
            (
                "exists x1 u(x1) & forall x1 (u(x1) -> forall x2 ~q(x1,x2)) \
                 & forall x1 (u(x1) -> exists x2 q(x1,x2))",
                false,
            ),
            (
                "forall x1 (u(x1) | forall x2 (q(x1,x2) -> t(x1,x2))) & exists x1 ~u(x1)",
                true,
            ),
        ] {
            let f = parse_formula(text, &sig).unwrap();
            let direct = bounded_sat_oracle(&f, 3, &sig).unwrap();
            assert_eq!(direct.is_some(), expect_sat, "oracle on input: {text}");
            let cnf = to_clause_normal_form(&f, &sig).unwrap();
            let rendered = cnf_to_formula(&cnf);
            let converted = bounded_sat_oracle(&rendered, 3, &cnf.sig).unwrap();
            assert_eq!(
                converted.is_some(),
                expect_sat,
                "oracle on converted: {text}"
            );
        }
    }

    #[test]
    fn width_three_witness_sentence_converts() {
        let mut sig = Signature::new();
        sig.declare("r", 3).unwrap();
        sig.declare_transitive("t").unwrap();
        let f = parse_formula(
            "exists x1 exists x2 exists x3 r(x1,x2,x3) \
             & forall x1 forall x2 forall x3 (r(x1,x2,x3) -> t(x2,x3))",
            &sig,
        )
        .unwrap();
        let cnf = to_clause_normal_form(&f, &sig).unwrap();
        assert_eq!(cnf.m, 3);
        let rendered = cnf_to_formula(&cnf);
        assert!(validate_fluted(&rendered).is_fluted);
        let direct = bounded_sat_oracle(&f, 2, &sig).unwrap();
        let converted = bounded_sat_oracle(&rendered, 2, &cnf.sig).unwrap();
        assert!(direct.is_some());
        assert!(converted.is_some());
    }

    #[test]
    fn rejects_out_of_scope_inputs() {
        let mut sig = sig2();
        sig.declare("z", 0).unwrap();

        let f = parse_formula("p(x1)", &sig).unwrap();
        assert!(to_clause_normal_form(&f, &sig).is_err());

        let f = parse_formula("forall x1 p(x1)", &sig).unwrap();
        assert!(matches!(
            to_clause_normal_form(&f, &sig),
            Err(Error::WrongFragment(_))
        ));

        let f = parse_formula("z & forall x1 forall x2 t(x1,x2)", &sig).unwrap();
        assert!(matches!(
            to_clause_normal_form(&f, &sig),
            Err(Error::WrongFragment(_))
        ));

        let f = parse_formula(
            "forall x1 forall x2 t(x1,x2) | exists x1 p(x1)",
            &sig,
        )
        .unwrap();
        assert!(matches!(
            to_clause_normal_form(&f, &sig),
            Err(Error::WrongFragment(_))
        ));
    }

    #[test]
    fn clause_cap_stops_blowup() {
        let mut sig = Signature::new();
        for name in ["a", "b", "c", "d", "e", "f"] {
            sig.declare(name, 1).unwrap();
        }
        sig.declare_transitive("t").unwrap();
        let f = parse_formula(
            "forall x1 forall x2 ((a(x2) & b(x2)) | (c(x2) & d(x2)) | (e(x2) & f(x2)))",
            &sig,
        )
        .unwrap();
        let err = to_clause_normal_form_with(&f, &sig, 4).unwrap_err();
        assert!(matches!(err, Error::Resource { ref stage, .. } if stage == "cnf"), "{err}");
        assert!(to_clause_normal_form_with(&f, &sig, 16).is_ok());
    }
}
