//! End-to-end satisfiability for fluted sentences with one transitive
//! relation.
//!
//! [`solve`] branches the sentence (zero-ary valuations, then a
//! disjunctive split of the quantified skeleton) and decides each branch:
//!
//!   * width <= 2 without non-distinguished binaries: translate to basic
//!     formulas and run the certificate search directly;
//!   * otherwise: clause normal form, then one width-elimination round
//!     per level down to width 2, then binary elimination, then the
//!     certificate search on the resulting unary clause form.
//!
//! A SAT verdict is carried back up: the certificate's realization is a
//! model of the final clause form, and each elimination level in reverse
//! multiplies the model and reinterprets the eliminated predicates over
//! it ([`eliminate::reconstruct_model_2var`] and its width-w sibling).
//! Every lifted model is re-verified against the level's formula, and the
//! final model against the input sentence, before it is projected onto
//! the input signature.

use std::collections::BTreeMap;

use crate::certificate::solve::{solve_basic_with, BasicOutcome, SolveBasicConfig};
use crate::error::{Error, Result};
use crate::eval::evaluate;
use crate::fluted::validate_fluted;
use crate::formula::Formula;
use crate::normalform::basic::{dnf_units, to_basic_branches_with, BranchConfig};
use crate::normalform::cnf::{to_clause_normal_form_with, CnfFormula, DEFAULT_CLAUSE_CAP};
use crate::resolution::DEFAULT_CLOSURE_CAP;
use crate::signature::Signature;
use crate::structure::Structure;

pub mod eliminate;
pub mod ucnf;

pub use eliminate::{
    eliminate_binary, eliminate_binary_with, eliminate_variable, eliminate_variable_with,
    reconstruct_model_2var, reconstruct_model_2var_with, EliminationOutput, SubsetGuard,
    WitnessGuard,
};
pub use ucnf::{solve_u_cnf, solve_u_cnf_with, UCnfConfig, UCnfOutcome};

use eliminate::reconstruct_model_mvar;

/// Default bound on reconstructed domains.
pub const DEFAULT_DOMAIN_CAP: usize = 1_000_000;

/// Duplicates every element of a structure `z` times.  Element `a` maps
/// to the block `a*z .. a*z+z-1`, and a tuple is in an extension exactly
/// when its image under block-collapse was.  Without equality no formula
/// can tell the copies apart, so verdicts are preserved, and so is
/// transitivity of any predicate.
pub fn multiply(s: &Structure, z: usize) -> Result<Structure> {
    multiply_with(s, z, DEFAULT_DOMAIN_CAP)
}

/// [`multiply`] with an explicit domain cap.
pub fn multiply_with(s: &Structure, z: usize, domain_cap: usize) -> Result<Structure> {
    if z == 0 {
        return Err(Error::InvalidStructure("the multiplier must be positive".into()));
    }
    let domain = s
        .domain
        .checked_mul(z)
        .filter(|&d| d <= domain_cap)
        .ok_or_else(|| {
            Error::resource(
                "multiply",
                format!("domain {} * {z} exceeds the cap {domain_cap}", s.domain),
            )
        })?;
    let mut out = Structure::new(domain);
    for (pred, tuples) in &s.extensions {
        out.extensions.entry(pred.clone()).or_default();
        for tup in tuples {
            if tup.is_empty() {
                out.insert(pred, Vec::new());
                continue;
            }
            let mut combo = vec![0usize; tup.len()];
            loop {
                let mapped: Vec<usize> =
                    tup.iter().zip(&combo).map(|(&a, &c)| a * z + c).collect();
                out.insert(pred, mapped);
                if !advance_tuple(&mut combo, z) {
                    break;
                }
            }
        }
    }
    Ok(out)
}

/// Advances a base-`base` odometer; false when it wraps to all zeros.
pub(crate) fn advance_tuple(tuple: &mut [usize], base: usize) -> bool {
    for slot in tuple.iter_mut().rev() {
        *slot += 1;
        if *slot < base {
            return true;
        }
        *slot = 0;
    }
    false
}

/// Resource limits for [`solve`].
#[derive(Debug, Clone)]
pub struct SolveConfig {
    /// Branching limits for the zero-ary and disjunctive splits.
    pub branch: BranchConfig,
    /// Limits for the direct certificate route on low-width branches.
    pub basic: SolveBasicConfig,
    /// Cap on clauses produced by one normal-form conversion.
    pub clause_cap: usize,
    /// Shared cap on resolution closures per elimination round.
    pub closure_cap: usize,
    /// Cap on unary predicates entering the final certificate search.
    pub width_cap: usize,
    /// Budget on search candidates in the final certificate search.
    pub candidate_cap: u64,
    /// Cap on reconstructed domains.
    pub domain_cap: usize,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            branch: BranchConfig::default(),
            basic: SolveBasicConfig { sigma_cap: 8, candidate_cap: 2_000_000 },
            clause_cap: DEFAULT_CLAUSE_CAP,
            closure_cap: DEFAULT_CLOSURE_CAP,
            width_cap: 20,
            candidate_cap: 2_000_000,
            domain_cap: DEFAULT_DOMAIN_CAP,
        }
    }
}

/// Work counters reported with every verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveStats {
    /// Certificate searches performed across all branches.
    pub branches: usize,
    /// Supertypes in the certificate behind a SAT verdict (0 for UNSAT).
    pub certificate_size: usize,
}

/// Verdict of [`solve`].
#[derive(Debug, Clone)]
pub enum SolveOutcome {
    /// A model over exactly the input signature, re-verified against the
    /// input sentence.
    Sat { model: Structure, stats: SolveStats },
    Unsat { stats: SolveStats },
}

pub fn solve(f: &Formula, sig: &Signature) -> Result<SolveOutcome> {
    solve_with(f, sig, &SolveConfig::default())
}

pub fn solve_with(f: &Formula, sig: &Signature, config: &SolveConfig) -> Result<SolveOutcome> {
    f.validate(sig)?;
    if !f.is_sentence() {
        return Err(Error::WrongFragment(
            "satisfiability is decided for sentences; the formula has free variables".into(),
        ));
    }
    let report = validate_fluted(f);
    if !report.is_fluted {
        return Err(Error::NotFluted(report.first_violation.unwrap_or_default()));
    }
    if f.uses_equality() {
        return Err(Error::WrongFragment("equality is not supported by the solver".into()));
    }
    let dcount = sig.distinguished().count();
    if dcount > 1 {
        return Err(Error::WrongFragment(format!(
            "{dcount} distinguished transitive predicates; the solver supports at most one"
        )));
    }
    let mut work_sig = sig.clone();
    if dcount == 0 {
        // Satisfiability is unaffected by an unused transitive relation,
        // and the machinery below expects exactly one.
        let tn = work_sig.fresh_name("_t");
        work_sig.declare_transitive(&tn)?;
    }

    let zeroary: Vec<String> = f
        .predicates()
        .into_iter()
        .filter(|p| sig.arity(p) == Some(0))
        .map(|p| p.to_string())
        .collect();
    if zeroary.len() > 30 || 1usize << zeroary.len() > config.branch.zeroary_cap {
        return Err(Error::resource(
            "branch",
            format!(
                "{} zero-ary predicates exceed the valuation cap {}",
                zeroary.len(),
                config.branch.zeroary_cap
            ),
        ));
    }
    let valuations = 1usize << zeroary.len();

    let mut stats = SolveStats { branches: 0, certificate_size: 0 };
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
        let mut branch_budget = config.branch.branch_cap;
        for units in dnf_units(&fixed, &mut branch_budget)? {
            let d = Formula::conj(units);
            let Some(mut model) = try_branch(&d, &work_sig, config, &mut stats)? else {
                continue;
            };
            for (z, &val) in &valuation {
                model.set_zeroary(z, val);
            }
            if !evaluate(&model, f, &[], &work_sig)? {
                return Err(Error::Internal(
                    "the assembled model fails the input sentence".into(),
                ));
            }
            for tname in work_sig.distinguished() {
                if !model.check_transitive(tname)?.is_empty() {
                    return Err(Error::Internal(format!(
                        "the assembled model breaks the transitivity of `{tname}`"
                    )));
                }
            }
            return Ok(SolveOutcome::Sat { model: project_model(&model, sig), stats });
        }
    }
    Ok(SolveOutcome::Unsat { stats })
}

/// Decides one quantified conjunction over the working signature.
/// Returns a verified model interpreting at least the predicates of `d`.
fn try_branch(
    d: &Formula,
    work_sig: &Signature,
    config: &SolveConfig,
    stats: &mut SolveStats,
) -> Result<Option<Structure>> {
    let width = validate_fluted(d).variable_count;
    let non_u = d
        .predicates()
        .into_iter()
        .any(|p| work_sig.arity(p).is_some_and(|a| a >= 2) && !work_sig.is_distinguished(p));

    if width <= 2 && !non_u {
        for psi in to_basic_branches_with(d, work_sig, &config.branch)? {
            stats.branches += 1;
            match solve_basic_with(&psi, &config.basic)? {
                BasicOutcome::Sat { certificate, model } => {
                    stats.certificate_size = certificate.supertypes.len();
                    if !evaluate(&model, d, &[], work_sig)? {
                        return Err(Error::Internal(
                            "the branch model fails its disjunct".into(),
                        ));
                    }
                    return Ok(Some(model));
                }
                BasicOutcome::Unsat => {}
            }
        }
        return Ok(None);
    }

    let mut phi = to_clause_normal_form_with(d, work_sig, config.clause_cap)?;
    let mut chain: Vec<CnfFormula> = Vec::new();
    while phi.m > 2 {
        chain.push(phi.clone());
        phi = eliminate_variable_with(&phi, config.closure_cap)?;
    }
    let elim = eliminate_binary_with(&phi, config.closure_cap)?;
    stats.branches += 1;
    let ucfg = UCnfConfig { width_cap: config.width_cap, candidate_cap: config.candidate_cap };
    match solve_u_cnf_with(&elim.formula, &ucfg)? {
        UCnfOutcome::Unsat => Ok(None),
        UCnfOutcome::Sat { certificate, model: small } => {
            stats.certificate_size = certificate.supertypes.len();
            let mut model = reconstruct_model_2var_with(
                &small,
                &phi,
                &elim,
                config.closure_cap,
                config.domain_cap,
            )?;
            for prior in chain.iter().rev() {
                model =
                    reconstruct_model_mvar(&model, prior, config.closure_cap, config.domain_cap)?;
            }
            if !evaluate(&model, d, &[], work_sig)? {
                return Err(Error::Internal(
                    "the reconstructed model fails its disjunct".into(),
                ));
            }
            Ok(Some(model))
        }
    }
}

/// Restricts a model to the given signature, materializing an empty
/// extension for every declared predicate the model does not mention.
fn project_model(model: &Structure, sig: &Signature) -> Structure {
    let mut out = Structure::new(model.domain);
    for (name, _) in sig.predicates() {
        let ext = model.extensions.get(name).cloned().unwrap_or_default();
        out.extensions.insert(name.to_string(), ext);
    }
    out
}
