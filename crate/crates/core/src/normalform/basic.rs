//! Rewriting two-variable sentences over a single distinguished transitive
//! predicate into branches of basic formulas.
//!
//! The input may use zero-ary predicates, unary predicates, and the one
//! distinguished binary predicate `t`.  The rewrite proceeds per branch:
//!
//! 1. every valuation of the occurring zero-ary predicates is substituted
//!    in (one branch family per valuation);
//! 2. each maximal quantified subformula `exists x2 chi` / `forall x2 chi`
//!    is replaced by a fresh unary marker, with its definition expanded in
//!    both directions over full 1-types;
//! 3. the remaining sentence-level boolean structure is put into disjunctive
//!    normal form over the `exists x1`/`forall x1` units, one branch per
//!    disjunct.
//!
//! Splitting `chi` on the truth of `t` gives two witness routes for an
//! existential subformula: a `t`-linked witness satisfying `chi[t:=true]`
//! or an unlinked witness satisfying `chi[t:=false]`.  Different elements
//! may need different routes in the same model, so when both routes are
//! satisfiable a fresh unary *route marker* records the choice per element
//! instead of branching globally.  The marker definitions then expand per
//! full 1-type, which is exponential in the number of unary predicates;
//! the width cap keeps that expansion within bounds.
//!
//! The branches are equisatisfiable with the input: the input is
//! satisfiable exactly when some branch is, and every model of a branch is
//! a model of the input (over the extended signature).

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::fluted::validate_fluted;
use crate::formula::Formula;
use crate::signature::Signature;

use super::{BasicFormula, BasicFormulaSet, OneType, UnaryFormula};

/// Resource limits for [`to_basic_branches`].
#[derive(Debug, Clone)]
pub struct BranchConfig {
    /// Maximum number of zero-ary valuations (2^zero-ary predicates).
    pub zeroary_cap: usize,
    /// Maximum total number of branches across all valuations.
    pub branch_cap: usize,
    /// Maximum number of unary predicates, markers included, per branch.
    pub width_cap: usize,
}

impl Default for BranchConfig {
    fn default() -> Self {
        BranchConfig { zeroary_cap: 1024, branch_cap: 4096, width_cap: 8 }
    }
}

/// Rewrites a closed fluted sentence of width at most 2 whose only binary
/// predicate is the distinguished transitive one into branches of basic
/// formulas.  The sentence is satisfiable iff some branch is.
pub fn to_basic_branches(f: &Formula, sig: &Signature) -> Result<Vec<BasicFormulaSet>> {
    to_basic_branches_with(f, sig, &BranchConfig::default())
}

/// [`to_basic_branches`] with explicit resource limits.
pub fn to_basic_branches_with(
    f: &Formula,
    sig: &Signature,
    config: &BranchConfig,
) -> Result<Vec<BasicFormulaSet>> {
    f.validate(sig)?;
    if !f.is_sentence() {
        return Err(Error::WrongFragment("basic form requires a sentence".into()));
    }
    let report = validate_fluted(f);
    if !report.is_fluted {
        return Err(Error::NotFluted(report.first_violation.unwrap_or_default()));
    }
    if f.uses_equality() {
        return Err(Error::WrongFragment(
            "equality is not supported in basic form".into(),
        ));
    }
    if report.variable_count > 2 {
        return Err(Error::WrongFragment(format!(
            "basic form needs width at most 2, got {}",
            report.variable_count
        )));
    }
    let t = {
        let mut it = sig.distinguished();
        match (it.next(), it.next()) {
            (Some(t), None) => t.to_string(),
            _ => {
                return Err(Error::Signature(
                    "basic form needs exactly one distinguished predicate".into(),
                ))
            }
        }
    };
    for pred in f.predicates() {
        let arity = sig.arity(pred).unwrap_or(0);
        if arity >= 2 && pred != t {
            return Err(Error::WrongFragment(format!(
                "`{pred}` is not the distinguished predicate; only `{t}` may be binary"
            )));
        }
    }

    let zeroary: Vec<String> = f
        .predicates()
        .into_iter()
        .filter(|p| sig.arity(p) == Some(0))
        .map(|p| p.to_string())
        .collect();
    let valuations = 1usize << zeroary.len();
    if valuations > config.zeroary_cap {
        return Err(Error::resource(
            "basic",
            format!(
                "{} zero-ary predicates give {valuations} valuations, cap {}",
                zeroary.len(),
                config.zeroary_cap
            ),
        ));
    }

    let mut branches = Vec::new();
    let mut branch_budget = config.branch_cap;
    for rank in 0..valuations {
        let valuation: BTreeMap<String, bool> = zeroary
            .iter()
            .enumerate()
            .map(|(i, z)| (z.clone(), rank & (1 << i) != 0))
            .collect();
        let mut fixed = f.clone();
        for (z, &val) in &valuation {
            fixed = fixed.substitute_pred(z, val);
        }
        let fixed = fixed.simplify().nnf();

        let mut ext = Extractor {
            t: t.clone(),
            sig: sig.clone(),
            defs: Vec::new(),
            seen: BTreeMap::new(),
            marker_counter: 0,
        };
        let skeleton = ext.at_level0(&fixed)?;
        let obligations = ext.expand_definitions(config)?;

        let disjuncts = dnf_units(&skeleton, &mut branch_budget)?;
        for units in disjuncts {
            let mut formulas: BTreeSet<BasicFormula> = obligations.iter().cloned().collect();
            let mut dead = false;
            for unit in units {
                match unit {
                    Formula::True => {}
                    Formula::False => {
                        dead = true;
                        break;
                    }
                    Formula::Exists(_, body) => {
                        formulas.insert(BasicFormula::ExistsMu(UnaryFormula::new(
                            (*body).clone(),
                            &ext.sig,
                        )?));
                    }
                    Formula::Forall(_, body) => {
                        formulas.insert(BasicFormula::ForallMu(UnaryFormula::new(
                            (*body).clone(),
                            &ext.sig,
                        )?));
                    }
                    other => {
                        return Err(Error::Internal(format!(
                            "unexpected sentence-level unit `{other}`"
                        )))
                    }
                }
            }
            if !dead {
                branches.push(BasicFormulaSet {
                    sig: ext.sig.clone(),
                    formulas: formulas.into_iter().collect(),
                    zeroary_valuation: valuation.clone(),
                });
            }
        }
    }
    Ok(branches)
}

/// One renamed quantified subformula: `marker(x1)` stands for
/// `Q x2 chi(x1, x2)`, with `chi` split on the truth of `t` into
/// `mu_pos = chi[t:=true]` and `mu_neg = chi[t:=false]`.
struct MarkerDef {
    name: String,
    is_exists: bool,
    mu_pos: UnaryFormula,
    mu_neg: UnaryFormula,
}

struct Extractor {
    t: String,
    sig: Signature,
    defs: Vec<MarkerDef>,
    seen: BTreeMap<(bool, Formula), String>,
    marker_counter: usize,
}

impl Extractor {
    fn fresh(&mut self, stem: &str, counter: &mut usize) -> String {
        loop {
            let name = format!("{stem}{}", *counter);
            *counter += 1;
            if !self.sig.contains(&name) {
                self.sig.declare(&name, 1).expect("fresh name is valid");
                return name;
            }
        }
    }

    fn at_level0(&mut self, f: &Formula) -> Result<Formula> {
        Ok(match f {
            Formula::True | Formula::False => f.clone(),
            Formula::And(l, r) => {
                Formula::and(self.at_level0(l)?, self.at_level0(r)?)
            }
            Formula::Or(l, r) => Formula::or(self.at_level0(l)?, self.at_level0(r)?),
            Formula::Exists(v, body) => Formula::exists(*v, self.at_level1(body)?),
            Formula::Forall(v, body) => Formula::forall(*v, self.at_level1(body)?),
            other => {
                return Err(Error::Internal(format!(
                    "unexpected sentence-level subformula `{other}`"
                )))
            }
        })
    }

    fn at_level1(&mut self, f: &Formula) -> Result<Formula> {
        Ok(match f {
            Formula::True | Formula::False | Formula::Atom { .. } | Formula::Not(_) => {
                f.clone()
            }
            Formula::And(l, r) => {
                Formula::and(self.at_level1(l)?, self.at_level1(r)?)
            }
            Formula::Or(l, r) => Formula::or(self.at_level1(l)?, self.at_level1(r)?),
            Formula::Exists(_, chi) | Formula::Forall(_, chi) => {
                let is_exists = matches!(f, Formula::Exists(..));
                let key = (is_exists, (**chi).clone());
                if let Some(name) = self.seen.get(&key) {
                    return Ok(Formula::atom(name, &[1]));
                }
                let mu_pos = UnaryFormula::new(
                    chi.substitute_pred(&self.t, true).simplify(),
                    &self.sig,
                )?;
                let mu_neg = UnaryFormula::new(
                    chi.substitute_pred(&self.t, false).simplify(),
                    &self.sig,
                )?;
                let mut counter = self.marker_counter;
                let name = self.fresh("_m", &mut counter);
                self.marker_counter = counter;
                self.seen.insert(key, name.clone());
                self.defs.push(MarkerDef { name: name.clone(), is_exists, mu_pos, mu_neg });
                Formula::atom(&name, &[1])
            }
            other => {
                return Err(Error::Internal(format!(
                    "unexpected connective `{other}` after negation normal form"
                )))
            }
        })
    }

    /// Expands every marker definition in both directions over full 1-types
    /// of the extended signature, declaring route markers where both
    /// witness routes are satisfiable.
    fn expand_definitions(&mut self, config: &BranchConfig) -> Result<Vec<BasicFormula>> {
        // Route markers must be declared before types are enumerated, so
        // decide route needs first.  Satisfiability of the mus does not
        // depend on the signature they are checked against.
        let mut route_counter = 0;
        let mut routes: Vec<Option<String>> = Vec::new();
        let mut plans: Vec<(Vec<(String, bool)>, UnaryFormula, UnaryFormula, bool)> = Vec::new();
        for i in 0..self.defs.len() {
            let (name, is_exists, mu_pos, mu_neg) = {
                let d = &self.defs[i];
                (d.name.clone(), d.is_exists, d.mu_pos.clone(), d.mu_neg.clone())
            };
            // The existential side of the definition: the marker polarity
            // whose elements need a witness for Q's body (or its negation).
            let (guard_pol, wit_pos, wit_neg) = if is_exists {
                (true, mu_pos.clone(), mu_neg.clone())
            } else {
                (false, mu_pos.negated(), mu_neg.negated())
            };
            let both = wit_pos.is_satisfiable(&self.sig) && wit_neg.is_satisfiable(&self.sig);
            let route = if both {
                Some(self.fresh("_r", &mut route_counter))
            } else {
                None
            };
            routes.push(route);
            plans.push((vec![(name.clone(), guard_pol)], wit_pos, wit_neg, is_exists));
        }

        let width = self.sig.unary_predicates().len();
        if width > config.width_cap {
            return Err(Error::resource(
                "basic",
                format!("{width} unary predicates exceed the width cap {}", config.width_cap),
            ));
        }
        let types = OneType::all(width);
        let unaries: Vec<String> =
            self.sig.unary_predicates().iter().map(|s| s.to_string()).collect();
        let index_of = |name: &str| -> usize {
            unaries.iter().position(|u| u == name).expect("declared unary")
        };

        let mut out = Vec::new();
        for (i, def) in self.defs.iter().enumerate() {
            let (guard_lits, wit_pos, wit_neg, _) = &plans[i];
            // Existential side.
            self.emit_exist_side(
                &mut out,
                &types,
                &index_of,
                guard_lits,
                wit_pos,
                wit_neg,
                routes[i].as_deref(),
            )?;
            // Universal side: the opposite marker polarity constrains all
            // t-successors and all non-successors.
            let (u_guard_pol, nu_pos, nu_neg) = if def.is_exists {
                (false, def.mu_pos.negated(), def.mu_neg.negated())
            } else {
                (true, def.mu_pos.clone(), def.mu_neg.clone())
            };
            let guard = vec![(def.name.clone(), u_guard_pol)];
            for pi in &types {
                if !satisfies_lits(pi, &guard, &index_of) {
                    continue;
                }
                for pi2 in &types {
                    if !nu_pos.eval(pi2, &self.sig) {
                        out.push(BasicFormula::UniversalLink(pi.clone(), pi2.clone(), false));
                    }
                    if !nu_neg.eval(pi2, &self.sig) {
                        out.push(BasicFormula::UniversalLink(pi.clone(), pi2.clone(), true));
                    }
                }
            }
        }
        Ok(out)
    }

    #[allow(clippy::too_many_arguments)]
    fn emit_exist_side(
        &self,
        out: &mut Vec<BasicFormula>,
        types: &[OneType],
        index_of: &dyn Fn(&str) -> usize,
        guard_lits: &[(String, bool)],
        wit_pos: &UnaryFormula,
        wit_neg: &UnaryFormula,
        route: Option<&str>,
    ) -> Result<()> {
        let pos_sat = wit_pos.is_satisfiable(&self.sig);
        let neg_sat = wit_neg.is_satisfiable(&self.sig);
        match (pos_sat, neg_sat) {
            (true, true) => {
                let route = route.expect("route marker declared for two-route definition");
                for pi in types {
                    if !satisfies_lits(pi, guard_lits, index_of) {
                        continue;
                    }
                    if pi.bit(index_of(route)) {
                        out.push(BasicFormula::ExistWitness(pi.clone(), wit_pos.clone(), true));
                    } else {
                        out.push(BasicFormula::ExistWitness(pi.clone(), wit_neg.clone(), false));
                    }
                }
            }
            (true, false) => {
                for pi in types {
                    if satisfies_lits(pi, guard_lits, index_of) {
                        out.push(BasicFormula::ExistWitness(pi.clone(), wit_pos.clone(), true));
                    }
                }
            }
            (false, true) => {
                for pi in types {
                    if satisfies_lits(pi, guard_lits, index_of) {
                        out.push(BasicFormula::ExistWitness(pi.clone(), wit_neg.clone(), false));
                    }
                }
            }
            (false, false) => {
                // No witness can exist: forbid the guard outright.
                let lits = guard_lits
                    .iter()
                    .map(|(name, pol)| {
                        let atom = Formula::atom(name, &[1]);
                        if *pol { atom } else { Formula::not(atom) }
                    })
                    .collect();
                let forbidden = Formula::not(Formula::conj(lits)).nnf();
                out.push(BasicFormula::ForallMu(UnaryFormula::new(forbidden, &self.sig)?));
            }
        }
        Ok(())
    }
}

fn satisfies_lits(
    pi: &OneType,
    lits: &[(String, bool)],
    index_of: &dyn Fn(&str) -> usize,
) -> bool {
    lits.iter().all(|(name, pol)| pi.bit(index_of(name)) == *pol)
}

/// Disjunctive normal form over sentence-level units.  Leaves are the
/// quantified units and constants; each disjunct is a list of units.
pub(crate) fn dnf_units(f: &Formula, budget: &mut usize) -> Result<Vec<Vec<Formula>>> {
    let disjuncts = dnf_rec(f, *budget)?;
    *budget = budget.saturating_sub(disjuncts.len());
    Ok(disjuncts)
}

fn dnf_rec(f: &Formula, budget: usize) -> Result<Vec<Vec<Formula>>> {
    Ok(match f {
        Formula::True => vec![vec![]],
        Formula::False => vec![],
        Formula::Exists(..) | Formula::Forall(..) => vec![vec![f.clone()]],
        Formula::Or(l, r) => {
            let mut a = dnf_rec(l, budget)?;
            let b = dnf_rec(r, budget)?;
            a.extend(b);
            if a.len() > budget {
                return Err(Error::resource(
                    "basic",
                    format!("disjunctive branching exceeds the branch cap ({budget} left)"),
                ));
            }
            a
        }
        Formula::And(l, r) => {
            let a = dnf_rec(l, budget)?;
            let b = dnf_rec(r, budget)?;
            if a.len().saturating_mul(b.len()) > budget {
                return Err(Error::resource(
                    "basic",
                    format!("disjunctive branching exceeds the branch cap ({budget} left)"),
                ));
            }
            let mut out = Vec::with_capacity(a.len() * b.len());
            for da in &a {
                for db in &b {
                    let mut units = da.clone();
                    units.extend(db.iter().cloned());
                    out.push(units);
                }
            }
            out
        }
        other => {
            return Err(Error::Internal(format!(
                "unexpected sentence-level unit `{other}` in disjunctive normal form"
            )))
        }
    })
}
