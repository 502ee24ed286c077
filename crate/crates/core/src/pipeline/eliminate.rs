//! Guard-product elimination of the maximal clause width.
//!
//! Both reductions share one skeleton.  A clause normal form of width w
//! has existential conjuncts guarded by alpha_1..alpha_s and universal
//! conjuncts guarded by beta_1..beta_t.  For every existential index i
//! and every subset J of the universal indices, a fresh guard `p_{i,J}`
//! names the elements (or (w-2)-tuples) where alpha_i and all beta_j for
//! j in J apply at once; `q_J` does the same without the alpha.  The
//! rewritten formula asserts the defining implications of the fresh
//! guards plus, per fresh guard, the resolution closure of the governing
//! clause sets with every maximal-width non-distinguished atom projected
//! away:
//!
//!   - `p_{i,J}` keeps an existential conjunct whose body is the
//!     projected closure of Gamma_i, the static clauses, and the Delta_j
//!     for j in J;
//!   - `q_J` keeps a universal conjunct whose body is the projected
//!     closure of the static clauses and the Delta_j alone.
//!
//! Projection leaves the first variable slot vacuous whenever w >= 3, so
//! those bodies drop to width w-1 by decrementing every literal; the
//! defining implications already live at width w-1.  At w == 2 the
//! output stays at width 2 but mentions no non-distinguished binary
//! predicate, which is what the certificate search consumes.
//!
//! Reconstruction inverts the rewriting on models: multiply the small
//! model by the number of existential conjuncts, pick witnesses greedily
//! (lowest element first; copies of a workable witness are
//! interchangeable, so s copies always suffice for s indices), extend
//! each witness pair's reduced fluted type through the clause closure,
//! and complete every remaining maximal-width tuple the same way.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::eval::evaluate;
use crate::normalform::cnf::{cnf_to_formula, CnfFormula, GuardedBlock};
use crate::resolution::{
    closure_with, extend_type_with, project, reduced_type_of, FlutedClause, FlutedLiteral,
    FlutedType, DEFAULT_CLOSURE_CAP,
};
use crate::signature::Signature;
use crate::structure::Structure;

use super::{advance_tuple, multiply_with, DEFAULT_DOMAIN_CAP};

/// A fresh existential guard `p_{i,J}`: it holds exactly where the input's
/// existential guard `i` and the universal guards in `subset` hold at once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessGuard {
    pub name: String,
    /// Index into the input's existential conjuncts.
    pub exist_index: usize,
    /// Ascending indices into the input's universal conjuncts.
    pub subset: Vec<usize>,
}

/// A fresh universal guard `q_J`: it holds exactly where the universal
/// guards in `subset` hold at once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsetGuard {
    pub name: String,
    pub subset: Vec<usize>,
}

/// Result of one elimination round: the rewritten formula plus the fresh
/// guard tables with their defining guard combinations.
#[derive(Debug, Clone)]
pub struct EliminationOutput {
    pub formula: CnfFormula,
    /// One `p_{i,J}` per (existential index, subset) pair, subsets in
    /// ascending mask order per index.
    pub witness_guards: Vec<WitnessGuard>,
    /// One `q_J` per subset, in ascending mask order.
    pub subset_guards: Vec<SubsetGuard>,
}

/// Removes every non-distinguished binary predicate from a width-2 clause
/// normal form.  The output stays at width 2; its conjunct counts are
/// exactly s * 2^t existential and 2^t universal.
pub fn eliminate_binary(phi: &CnfFormula) -> Result<EliminationOutput> {
    eliminate_binary_with(phi, DEFAULT_CLOSURE_CAP)
}

/// [`eliminate_binary`] with an explicit shared closure budget.
pub fn eliminate_binary_with(
    phi: &CnfFormula,
    closure_budget: usize,
) -> Result<EliminationOutput> {
    if phi.m != 2 {
        return Err(Error::WrongFragment(format!(
            "binary elimination expects clause width 2, got {}",
            phi.m
        )));
    }
    eliminate(phi, closure_budget)
}

/// Rewrites a clause normal form of width w >= 3 into an equisatisfiable
/// one of width w - 1.
pub fn eliminate_variable(phi: &CnfFormula) -> Result<CnfFormula> {
    eliminate_variable_with(phi, DEFAULT_CLOSURE_CAP)
}

/// [`eliminate_variable`] with an explicit shared closure budget.
pub fn eliminate_variable_with(phi: &CnfFormula, closure_budget: usize) -> Result<CnfFormula> {
    if phi.m < 3 {
        return Err(Error::WrongFragment(format!(
            "variable elimination expects clause width at least 3, got {}",
            phi.m
        )));
    }
    Ok(eliminate(phi, closure_budget)?.formula)
}

fn eliminate(phi: &CnfFormula, closure_budget: usize) -> Result<EliminationOutput> {
    let w = phi.m;
    let s = phi.existentials.len();
    let t = phi.universals.len();
    for block in phi.existentials.iter().chain(&phi.universals) {
        match phi.sig.arity(&block.guard) {
            Some(a) if a == w - 1 && !phi.sig.is_distinguished(&block.guard) => {}
            _ => {
                return Err(Error::Signature(format!(
                    "guard `{}` must be a non-distinguished predicate of arity {}",
                    block.guard,
                    w - 1
                )))
            }
        }
    }
    if t >= 63 {
        return Err(Error::resource(
            "eliminate",
            format!("{t} universal conjuncts overflow the guard-subset space"),
        ));
    }
    let out_m = if w == 2 { 2 } else { w - 1 };
    // Start slot of the input guards inside width-out_m clauses.
    let guard_start = out_m + 2 - w;

    let mut out_sig = Signature::new();
    out_sig.set_equality(phi.sig.equality_enabled());
    for (name, arity) in phi.sig.predicates() {
        if phi.sig.is_distinguished(name) {
            out_sig.declare_transitive(name)?;
        } else if arity != w {
            out_sig.declare(name, arity)?;
        }
    }

    let mut remaining = closure_budget;
    let mut omega: BTreeSet<FlutedClause> = BTreeSet::new();
    let mut existentials = Vec::new();
    let mut universals = Vec::new();
    let mut witness_guards = Vec::new();
    let mut subset_guards = Vec::new();

    let statics: BTreeSet<FlutedClause> = phi.omega.clone();
    for mask in 0u64..(1u64 << t) {
        let subset: Vec<usize> = (0..t).filter(|j| mask & (1 << j) != 0).collect();
        let mut base = statics.clone();
        for &j in &subset {
            base.extend(phi.universals[j].clauses.iter().cloned());
        }

        let q_name = out_sig.fresh_name(&format!("_q{mask}"));
        out_sig.declare(&q_name, out_m - 1)?;
        let mut lits: Vec<FlutedLiteral> = subset
            .iter()
            .map(|&j| FlutedLiteral::new(&phi.universals[j].guard, guard_start, false))
            .collect();
        lits.push(FlutedLiteral::new(&q_name, 2, true));
        omega.insert(FlutedClause::new(out_m, lits)?);
        universals.push(GuardedBlock {
            guard: q_name.clone(),
            clauses: process_body(&base, phi, out_m, &mut remaining)?,
        });
        subset_guards.push(SubsetGuard { name: q_name, subset: subset.clone() });

        for i in 0..s {
            let p_name = out_sig.fresh_name(&format!("_p{i}_{mask}"));
            out_sig.declare(&p_name, out_m - 1)?;
            let mut lits = vec![FlutedLiteral::new(
                &phi.existentials[i].guard,
                guard_start,
                false,
            )];
            lits.extend(
                subset
                    .iter()
                    .map(|&j| FlutedLiteral::new(&phi.universals[j].guard, guard_start, false)),
            );
            lits.push(FlutedLiteral::new(&p_name, 2, true));
            omega.insert(FlutedClause::new(out_m, lits)?);

            let mut with_gamma = base.clone();
            with_gamma.extend(phi.existentials[i].clauses.iter().cloned());
            existentials.push(GuardedBlock {
                guard: p_name.clone(),
                clauses: process_body(&with_gamma, phi, out_m, &mut remaining)?,
            });
            witness_guards.push(WitnessGuard {
                name: p_name,
                exist_index: i,
                subset: subset.clone(),
            });
        }
    }

    let formula = CnfFormula { m: out_m, sig: out_sig, omega, existentials, universals };
    for clause in formula
        .omega
        .iter()
        .chain(formula.existentials.iter().flat_map(|b| &b.clauses))
        .chain(formula.universals.iter().flat_map(|b| &b.clauses))
    {
        clause.validate(&formula.sig).map_err(|e| {
            Error::Internal(format!("elimination emitted an ill-formed clause: {e}"))
        })?;
    }
    Ok(EliminationOutput { formula, witness_guards, subset_guards })
}

/// Closure, projection, and (for w >= 3) the width decrement of one
/// governing clause set.  Every call charges the shared budget by the
/// closure's size, so the subset enumeration above cannot run unbounded.
fn process_body(
    base: &BTreeSet<FlutedClause>,
    phi: &CnfFormula,
    out_m: usize,
    remaining: &mut usize,
) -> Result<BTreeSet<FlutedClause>> {
    if *remaining == 0 {
        return Err(Error::resource(
            "eliminate",
            "shared closure budget exhausted by the guard-subset enumeration",
        ));
    }
    let star = closure_with(base, &phi.sig, *remaining)?;
    *remaining -= star.len().max(1).min(*remaining);
    let projected = project(&star, &phi.sig);
    if out_m == phi.m {
        return Ok(projected);
    }
    projected
        .into_iter()
        .map(|c| {
            let lits: Vec<FlutedLiteral> = c
                .literals
                .iter()
                .map(|l| FlutedLiteral::new(&l.pred, l.start - 1, l.positive))
                .collect();
            FlutedClause::new(out_m, lits)
        })
        .collect()
}

/// Rebuilds a model of a width-2 input from a model of its
/// [`eliminate_binary`] output.  The result multiplies the given domain
/// by max(s, 1) and interprets the input's binary predicates.
pub fn reconstruct_model_2var(
    model: &Structure,
    phi: &CnfFormula,
    elim: &EliminationOutput,
) -> Result<Structure> {
    reconstruct_model_2var_with(model, phi, elim, DEFAULT_CLOSURE_CAP, DEFAULT_DOMAIN_CAP)
}

/// [`reconstruct_model_2var`] with explicit closure and domain caps.
pub fn reconstruct_model_2var_with(
    model: &Structure,
    phi: &CnfFormula,
    elim: &EliminationOutput,
    closure_cap: usize,
    domain_cap: usize,
) -> Result<Structure> {
    if phi.m != 2 {
        return Err(Error::WrongFragment(format!(
            "witness reconstruction expects clause width 2, got {}",
            phi.m
        )));
    }
    if model.domain == 0 {
        return Err(Error::InvalidStructure("the domain must not be empty".into()));
    }
    let reduced = cnf_to_formula(&elim.formula);
    if !evaluate(model, &reduced, &[], &elim.formula.sig)? {
        return Err(Error::InvalidStructure(
            "the given structure does not satisfy the rewritten formula".into(),
        ));
    }
    for tname in phi.sig.distinguished() {
        if !model.check_transitive(tname)?.is_empty() {
            return Err(Error::InvalidStructure(format!(
                "`{tname}` is not transitive in the given structure"
            )));
        }
    }
    let z = phi.s().max(1);
    let mut out = multiply_with(model, z, domain_cap)?;
    complete_structure(&mut out, phi, closure_cap)?;
    verify_against(&out, phi)?;
    Ok(out)
}

/// Rebuilds a width-w model from a model of the [`eliminate_variable`]
/// output, for w >= 3.  The caller guarantees the given structure
/// satisfies the rewritten formula.
pub(crate) fn reconstruct_model_mvar(
    model: &Structure,
    phi: &CnfFormula,
    closure_cap: usize,
    domain_cap: usize,
) -> Result<Structure> {
    if phi.m < 3 {
        return Err(Error::WrongFragment(format!(
            "variable reconstruction expects clause width at least 3, got {}",
            phi.m
        )));
    }
    if model.domain == 0 {
        return Err(Error::InvalidStructure("the domain must not be empty".into()));
    }
    let z = phi.s().max(1);
    let mut out = multiply_with(model, z, domain_cap)?;
    complete_structure(&mut out, phi, closure_cap)?;
    verify_against(&out, phi)?;
    Ok(out)
}

/// Interprets the maximal-width non-distinguished predicates over every
/// tuple: witnesses first (greedily, respecting per-prefix distinctness),
/// then all remaining tuples against the universal obligations.
fn complete_structure(out: &mut Structure, phi: &CnfFormula, closure_cap: usize) -> Result<()> {
    let w = phi.m;
    let n = out.domain;
    if phi.universals.len() >= 63 {
        return Err(Error::resource(
            "reconstruct",
            "too many universal conjuncts for the guard-subset bookkeeping",
        ));
    }
    for (name, _) in phi.sig.predicates() {
        out.extensions.entry(name.to_string()).or_default();
    }
    let mut cache: BTreeMap<(Option<usize>, u64), BTreeSet<FlutedClause>> = BTreeMap::new();
    let mut assigned: BTreeSet<Vec<usize>> = BTreeSet::new();

    let mut prefix = vec![0usize; w - 1];
    loop {
        let jmask: u64 = phi
            .universals
            .iter()
            .enumerate()
            .filter(|(_, b)| out.holds(&b.guard, &prefix))
            .fold(0, |m, (j, _)| m | 1 << j);
        let mut used: BTreeSet<usize> = BTreeSet::new();
        for (i, block) in phi.existentials.iter().enumerate() {
            if !out.holds(&block.guard, &prefix) {
                continue;
            }
            let gamma = governing_closure(&mut cache, phi, (Some(i), jmask), closure_cap)?;
            let mut chosen = None;
            for b in 0..n {
                if used.contains(&b) {
                    continue;
                }
                let mut tuple = prefix.clone();
                tuple.push(b);
                let tau = reduced_type_of(out, &phi.sig, &tuple);
                if let Some(full) = extend_type_with(&tau, &gamma, &phi.sig, closure_cap)? {
                    chosen = Some((b, tuple, full));
                    break;
                }
            }
            let Some((b, tuple, full)) = chosen else {
                return Err(Error::Internal(
                    "no witness admits a consistent type extension; the rewritten model \
                     does not transfer"
                        .into(),
                ));
            };
            assign_type(out, &phi.sig, &tuple, &full);
            assigned.insert(tuple);
            used.insert(b);
        }
        if !advance_tuple(&mut prefix, n) {
            break;
        }
    }

    let mut tuple = vec![0usize; w];
    loop {
        if !assigned.contains(&tuple) {
            let jmask: u64 = phi
                .universals
                .iter()
                .enumerate()
                .filter(|(_, b)| out.holds(&b.guard, &tuple[..w - 1]))
                .fold(0, |m, (j, _)| m | 1 << j);
            let gamma = governing_closure(&mut cache, phi, (None, jmask), closure_cap)?;
            let tau = reduced_type_of(out, &phi.sig, &tuple);
            let Some(full) = extend_type_with(&tau, &gamma, &phi.sig, closure_cap)? else {
                return Err(Error::Internal(
                    "a tuple admits no consistent type extension; the rewritten model \
                     does not transfer"
                        .into(),
                ));
            };
            assign_type(out, &phi.sig, &tuple, &full);
        }
        if !advance_tuple(&mut tuple, n) {
            break;
        }
    }
    Ok(())
}

/// Resolution closure of the clause sets governing a witness (`Some(i)`)
/// or a plain tuple (`None`) under the universal guards in `jmask`.
fn governing_closure<'a>(
    cache: &'a mut BTreeMap<(Option<usize>, u64), BTreeSet<FlutedClause>>,
    phi: &CnfFormula,
    key: (Option<usize>, u64),
    closure_cap: usize,
) -> Result<&'a BTreeSet<FlutedClause>> {
    if !cache.contains_key(&key) {
        let mut base = phi.omega.clone();
        for (j, block) in phi.universals.iter().enumerate() {
            if key.1 & (1 << j) != 0 {
                base.extend(block.clauses.iter().cloned());
            }
        }
        if let Some(i) = key.0 {
            base.extend(phi.existentials[i].clauses.iter().cloned());
        }
        let star = closure_with(&base, &phi.sig, closure_cap)?;
        cache.insert(key, star);
    }
    Ok(&cache[&key])
}

/// Writes the maximal-width polarities of a completed fluted type into
/// the structure at the given tuple.
fn assign_type(out: &mut Structure, sig: &Signature, tuple: &[usize], tau: &FlutedType) {
    for (name, arity) in sig.predicates() {
        if arity == tuple.len() && !sig.is_distinguished(name) && tau.get(name) == Some(true) {
            out.insert(name, tuple.to_vec());
        }
    }
}

/// The completed structure must satisfy the input formula; anything else
/// is a soundness bug in the reconstruction.
fn verify_against(out: &Structure, phi: &CnfFormula) -> Result<()> {
    let rendered = cnf_to_formula(phi);
    if !evaluate(out, &rendered, &[], &phi.sig)? {
        return Err(Error::Internal(
            "the reconstructed structure fails the input formula".into(),
        ));
    }
    for tname in phi.sig.distinguished() {
        if !out.check_transitive(tname)?.is_empty() {
            return Err(Error::Internal(format!(
                "the reconstructed structure breaks the transitivity of `{tname}`"
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normalform::cnf::to_clause_normal_form;
    use crate::oracle::bounded_sat_oracle;
    use crate::parser::parse_formula;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sig2() -> Signature {
        let mut sig = Signature::new();
        sig.declare("p", 1).unwrap();
        sig.declare("q", 1).unwrap();
        sig.declare("r", 2).unwrap();
        sig.declare_transitive("t").unwrap();
        sig
    }

    fn sig3() -> Signature {
        let mut sig = Signature::new();
        sig.declare("p", 1).unwrap();
        sig.declare("g", 2).unwrap();
        sig.declare("r", 3).unwrap();
        sig.declare_transitive("t").unwrap();
        sig
    }

    fn cnf_of(text: &str, sig: &Signature) -> CnfFormula {
        to_clause_normal_form(&parse_formula(text, sig).unwrap(), sig).unwrap()
    }

    #[test]
    fn single_block_eliminates_to_one_conjunct_each() {
        let sig = sig2();
        let phi = cnf_of("forall x1 (exists x2 (r(x1,x2) & t(x1,x2)))", &sig);
        assert_eq!((phi.s(), phi.t()), (1, 0));
        let out = eliminate_binary(&phi).unwrap();
        assert_eq!(out.formula.m, 2);
        assert_eq!(out.formula.s(), 1);
        assert_eq!(out.formula.t(), 1);
        assert_eq!(out.witness_guards.len(), 1);
        assert_eq!(out.witness_guards[0].exist_index, 0);
        assert!(out.witness_guards[0].subset.is_empty());
        assert_eq!(out.subset_guards.len(), 1);
        assert!(!out.formula.sig.contains("r"));
        // |sig'| <= |sig| + 2^t (s + 1).
        assert!(out.formula.sig.num_predicates() <= phi.sig.num_predicates() + 2);
        // The output mentions no non-distinguished predicate of arity 2.
        for clause in out
            .formula
            .omega
            .iter()
            .chain(out.formula.existentials.iter().flat_map(|b| &b.clauses))
            .chain(out.formula.universals.iter().flat_map(|b| &b.clauses))
        {
            for lit in &clause.literals {
                let arity = out.formula.sig.arity(&lit.pred).unwrap();
                assert!(arity < 2 || out.formula.sig.is_distinguished(&lit.pred));
            }
        }
    }

    #[test]
    fn conjunct_counts_are_exactly_the_guard_products() {
        let sig = sig2();
        let phi = cnf_of(
            "forall x1 (p(x1) -> exists x2 (r(x1,x2) & t(x1,x2))) \
             & forall x1 (exists x2 (r(x1,x2) & q(x2))) \
             & forall x1 (q(x1) -> forall x2 (~r(x1,x2) | p(x2))) \
             & forall x1 (p(x1) -> forall x2 (~t(x1,x2) | q(x2)))",
            &sig,
        );
        let (s, t) = (phi.s(), phi.t());
        assert_eq!((s, t), (2, 2));
        let out = eliminate_binary(&phi).unwrap();
        assert_eq!(out.formula.existentials.len(), s * (1 << t));
        assert_eq!(out.formula.universals.len(), 1 << t);
        assert_eq!(out.witness_guards.len(), s * (1 << t));
        assert_eq!(out.subset_guards.len(), 1 << t);
        assert!(
            out.formula.sig.num_predicates()
                <= phi.sig.num_predicates() + (1 << t) * (s + 1)
        );
    }

    #[test]
    fn intended_expansion_of_a_model_satisfies_the_output() {
        let sig = sig2();
        let phi = cnf_of(
            "forall x1 (exists x2 (r(x1,x2) & t(x1,x2))) \
             & forall x1 forall x2 (~r(x1,x2) | p(x2))",
            &sig,
        );
        let model = bounded_sat_oracle(&cnf_to_formula(&phi), 3, &phi.sig)
            .unwrap()
            .expect("the input is satisfiable in one element");
        let out = eliminate_binary(&phi).unwrap();

        // Expand by reading every fresh guard off its defining guards.
        let mut expansion = model.clone();
        for wg in &out.witness_guards {
            let alpha = &phi.existentials[wg.exist_index].guard;
            for a in 0..model.domain {
                let holds = model.holds(alpha, &[a])
                    && wg
                        .subset
                        .iter()
                        .all(|&j| model.holds(&phi.universals[j].guard, &[a]));
                if holds {
                    expansion.insert(&wg.name, vec![a]);
                }
            }
        }
        for sg in &out.subset_guards {
            for a in 0..model.domain {
                if sg.subset.iter().all(|&j| model.holds(&phi.universals[j].guard, &[a])) {
                    expansion.insert(&sg.name, vec![a]);
                }
            }
        }
        let rewritten = cnf_to_formula(&out.formula);
        assert!(evaluate(&expansion, &rewritten, &[], &out.formula.sig).unwrap());
    }

    #[test]
    fn contradictory_statics_stay_unsat_on_both_sides() {
        let sig = sig2();
        let phi = cnf_of(
            "forall x1 forall x2 r(x1,x2) & forall x1 forall x2 ~r(x1,x2)",
            &sig,
        );
        assert!(bounded_sat_oracle(&cnf_to_formula(&phi), 4, &phi.sig).unwrap().is_none());
        let out = eliminate_binary(&phi).unwrap();
        let rewritten = cnf_to_formula(&out.formula);
        assert!(bounded_sat_oracle(&rewritten, 4, &out.formula.sig).unwrap().is_none());
    }

    #[test]
    fn widths_outside_the_contract_are_rejected() {
        let phi3 = cnf_of("forall x1 forall x2 exists x3 (r(x1,x2,x3) & t(x2,x3))", &sig3());
        assert!(matches!(eliminate_binary(&phi3), Err(Error::WrongFragment(_))));
        let phi2 = cnf_of("forall x1 (exists x2 t(x1,x2))", &sig2());
        assert!(matches!(eliminate_variable(&phi2), Err(Error::WrongFragment(_))));
    }

    #[test]
    fn closure_budget_is_enforced() {
        let sig = sig2();
        let phi = cnf_of(
            "forall x1 (exists x2 (r(x1,x2) & t(x1,x2))) \
             & forall x1 forall x2 (~r(x1,x2) | p(x2))",
            &sig,
        );
        let err = eliminate_binary_with(&phi, 1).unwrap_err();
        assert!(matches!(err, Error::Resource { .. }), "{err}");
    }

    #[test]
    fn variable_elimination_drops_the_width_with_exact_counts() {
        let sig = sig3();
        let phi = cnf_of(
            "forall x1 forall x2 exists x3 (r(x1,x2,x3) & t(x2,x3)) \
             & forall x1 forall x2 (~g(x1,x2) | forall x3 p(x3))",
            &sig,
        );
        assert_eq!(phi.m, 3);
        assert_eq!((phi.s(), phi.t()), (1, 1));
        let out = eliminate_variable(&phi).unwrap();
        assert_eq!(out.m, 2);
        assert_eq!(out.existentials.len(), 2);
        assert_eq!(out.universals.len(), 2);
        assert!(!out.sig.contains("r"));
        for block in out.existentials.iter().chain(&out.universals) {
            assert_eq!(out.sig.arity(&block.guard), Some(1));
        }
    }

    #[test]
    fn satisfiable_width3_input_round_trips_through_reconstruction() {
        let sig = sig3();
        let phi = cnf_of("forall x1 forall x2 exists x3 (r(x1,x2,x3) & t(x2,x3))", &sig);
        let out = eliminate_variable(&phi).unwrap();
        let rewritten = cnf_to_formula(&out);
        let small = bounded_sat_oracle(&rewritten, 3, &out.sig)
            .unwrap()
            .expect("the rewritten formula has a small model");
        let lifted =
            reconstruct_model_mvar(&small, &phi, DEFAULT_CLOSURE_CAP, DEFAULT_DOMAIN_CAP)
                .unwrap();
        assert!(evaluate(&lifted, &cnf_to_formula(&phi), &[], &phi.sig).unwrap());
        assert!(lifted.check_transitive("t").unwrap().is_empty());
        assert!(lifted.domain <= phi.s().max(1) * small.domain);
    }

    #[test]
    fn contradictory_width3_statics_stay_unsat_after_elimination() {
        let sig = sig3();
        let phi = cnf_of(
            "forall x1 forall x2 forall x3 r(x1,x2,x3) \
             & forall x1 forall x2 forall x3 ~r(x1,x2,x3)",
            &sig,
        );
        assert!(bounded_sat_oracle(&cnf_to_formula(&phi), 4, &phi.sig).unwrap().is_none());
        let out = eliminate_variable(&phi).unwrap();
        assert!(bounded_sat_oracle(&cnf_to_formula(&out), 4, &out.sig).unwrap().is_none());
    }

    #[test]
    fn reconstruction_keeps_one_element_models_small() {
        let sig = sig2();
        let phi = cnf_of("forall x1 (exists x2 (r(x1,x2) & t(x1,x2)))", &sig);
        let out = eliminate_binary(&phi).unwrap();
        let small = bounded_sat_oracle(&cnf_to_formula(&out.formula), 1, &out.formula.sig)
            .unwrap()
            .expect("one element suffices");
        let lifted = reconstruct_model_2var(&small, &phi, &out).unwrap();
        assert_eq!(lifted.domain, 1);
        assert!(evaluate(&lifted, &cnf_to_formula(&phi), &[], &phi.sig).unwrap());
    }

    #[test]
    fn purely_universal_inputs_reconstruct_without_witnesses() {
        let sig = sig2();
        let phi = cnf_of("forall x1 forall x2 (~r(x1,x2) | t(x1,x2))", &sig);
        assert_eq!(phi.s(), 0);
        let out = eliminate_binary(&phi).unwrap();
        let small = bounded_sat_oracle(&cnf_to_formula(&out.formula), 2, &out.formula.sig)
            .unwrap()
            .expect("satisfiable");
        let lifted = reconstruct_model_2var(&small, &phi, &out).unwrap();
        assert_eq!(lifted.domain, small.domain);
        assert!(evaluate(&lifted, &cnf_to_formula(&phi), &[], &phi.sig).unwrap());
    }

    #[test]
    fn non_models_are_rejected_up_front() {
        let sig = sig2();
        let phi = cnf_of("forall x1 (exists x2 (r(x1,x2) & t(x1,x2)))", &sig);
        let out = eliminate_binary(&phi).unwrap();
        // One bare element interprets nothing, so the forced q-guard fails.
        let junk = Structure::new(1);
        let err = reconstruct_model_2var(&junk, &phi, &out).unwrap_err();
        assert!(matches!(err, Error::InvalidStructure(_)), "{err}");
    }

    /// Random width-2 inputs: eliminate, find a small model of the output
    /// with the oracle, reconstruct, and model-check the input.  When the
    /// output has no small model, the input must not have one either.
    #[test]
    fn random_width2_inputs_reconstruct_or_agree() {
        let sig = sig2();
        let pool = [
            "forall x1 (p(x1) -> exists x2 (r(x1,x2) & t(x1,x2)))",
            "forall x1 (p(x1) -> exists x2 (r(x1,x2) & ~t(x1,x2)))",
            "forall x1 (exists x2 (r(x1,x2) & q(x2)))",
            "forall x1 (q(x1) -> forall x2 (~r(x1,x2) | p(x2)))",
            "forall x1 forall x2 (r(x1,x2) -> t(x1,x2))",
            "forall x1 forall x2 (t(x1,x2) -> r(x1,x2))",
            "forall x1 forall x2 (r(x1,x2) -> ~q(x2))",
            "forall x1 forall x2 ~r(x1,x2)",
            "exists x1 exists x2 r(x1,x2)",
            "exists x1 p(x1)",
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(0x2e11);
        let mut reconstructed = 0;
        let mut unsat_agreed = 0;
        for _ in 0..60 {
            let count = rng.gen_range(2..=4);
            let text = (0..count)
                .map(|_| pool[rng.gen_range(0..pool.len())])
                .collect::<Vec<_>>()
                .join(" & ");
            let phi = cnf_of(&text, &sig);
            let out = eliminate_binary(&phi).unwrap();
            assert_eq!(out.formula.existentials.len(), phi.s() * (1 << phi.t()));
            assert_eq!(out.formula.universals.len(), 1 << phi.t());
            match bounded_sat_oracle(&cnf_to_formula(&out.formula), 3, &out.formula.sig)
                .unwrap()
            {
                Some(small) => {
                    let lifted = reconstruct_model_2var(&small, &phi, &out).unwrap();
                    assert!(
                        evaluate(&lifted, &cnf_to_formula(&phi), &[], &phi.sig).unwrap(),
                        "reconstruction fails the input: {text}"
                    );
                    assert!(lifted.domain <= phi.s().max(1) * small.domain);
                    reconstructed += 1;
                }
                None => {
                    // A model of the input expands to an equal-sized model
                    // of the output, so smallness transfers.
                    assert!(
                        bounded_sat_oracle(&cnf_to_formula(&phi), 3, &phi.sig)
                            .unwrap()
                            .is_none(),
                        "input has a small model the output lacks: {text}"
                    );
                    unsat_agreed += 1;
                }
            }
        }
        assert!(reconstructed >= 20, "only {reconstructed} reconstructions exercised");
        assert!(unsat_agreed >= 5, "only {unsat_agreed} small-model-free cases exercised");
    }
}
