//! Clause-level resolution for fluted clause sets.
//!
//! A fluted clause over `m` variables is a set of literals whose argument
//! lists are contiguous suffixes of `x1, ..., xm` all ending at `xm`.  Since
//! the suffix is determined by the predicate arity, a literal is fully
//! described by its predicate name, suffix start, and polarity.  Resolution
//! is restricted to atoms of maximal arity `m`: both premises talk about the
//! same full argument tuple, so no unification is needed and the resolvent
//! stays fluted.
//!
//! The module also provides fluted types (total polarity assignments over
//! the atoms available at width `m`) and [`extend_type`], which completes a
//! partial type over the maximal-arity atoms against a clause set.  This is
//! the workhorse behind model reconstruction after predicate elimination.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::formula::Formula;
use crate::signature::Signature;
use crate::structure::Structure;

/// Default cap on the number of clauses a resolution closure may produce.
pub const DEFAULT_CLOSURE_CAP: usize = 100_000;

/// A literal in a fluted clause over `m` variables: `pred(x_start, ..., x_m)`
/// or its negation.  `start` ranges over `1..=m`; the predicate arity is
/// `m - start + 1`.
///
/// The derived ordering (predicate name, then suffix start, then polarity
/// with negative first) fixes the canonical literal order used everywhere.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FlutedLiteral {
    pub pred: String,
    pub start: usize,
    pub positive: bool,
}

impl FlutedLiteral {
    pub fn new(pred: impl Into<String>, start: usize, positive: bool) -> Self {
        FlutedLiteral { pred: pred.into(), start, positive }
    }

    /// Arity of the underlying predicate in a clause over `m` variables.
    pub fn arity(&self, m: usize) -> usize {
        m - self.start + 1
    }

    /// The literal as a formula, with arguments `x_start, ..., x_m`.
    pub fn to_formula(&self, m: usize) -> Formula {
        let args: Vec<usize> = (self.start..=m).collect();
        let atom = Formula::atom(&self.pred, &args);
        if self.positive {
            atom
        } else {
            Formula::not(atom)
        }
    }

    fn render(&self, m: usize) -> String {
        let args: Vec<String> = (self.start..=m).map(|i| format!("x{i}")).collect();
        let sign = if self.positive { "" } else { "~" };
        format!("{sign}{}({})", self.pred, args.join(","))
    }
}

/// A fluted clause: a set of fluted literals over a fixed variable width
/// `m`.  The empty clause is falsum.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct FlutedClause {
    pub m: usize,
    pub literals: BTreeSet<FlutedLiteral>,
}

impl FlutedClause {
    pub fn new(m: usize, literals: impl IntoIterator<Item = FlutedLiteral>) -> Result<Self> {
        let literals: BTreeSet<FlutedLiteral> = literals.into_iter().collect();
        for lit in &literals {
            if lit.start == 0 || lit.start > m {
                return Err(Error::Resolution(format!(
                    "literal {} has suffix start {} outside 1..={m}",
                    lit.pred, lit.start
                )));
            }
        }
        Ok(FlutedClause { m, literals })
    }

    /// The empty clause (falsum) at width `m`.
    pub fn falsum(m: usize) -> Self {
        FlutedClause { m, literals: BTreeSet::new() }
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    /// True if the clause contains an atom both positively and negatively.
    pub fn is_tautology(&self) -> bool {
        self.literals
            .iter()
            .filter(|l| l.positive)
            .any(|l| self.literals.contains(&FlutedLiteral::new(&l.pred, l.start, false)))
    }

    /// Checks every literal against the declared arities and, for width-`m`
    /// occurrences of distinguished predicates, the binary-arity convention.
    pub fn validate(&self, sig: &Signature) -> Result<()> {
        for lit in &self.literals {
            let declared = sig
                .arity(&lit.pred)
                .ok_or_else(|| Error::UnknownPredicate(lit.pred.clone()))?;
            if declared != lit.arity(self.m) {
                return Err(Error::ArityMismatch {
                    pred: lit.pred.clone(),
                    declared,
                    used: lit.arity(self.m),
                });
            }
        }
        Ok(())
    }

    /// The clause as a disjunction of literals (falsum for the empty clause).
    /// The caller supplies the quantifier prefix.
    pub fn to_formula(&self) -> Formula {
        Formula::disj(self.literals.iter().map(|l| l.to_formula(self.m)).collect())
    }
}

impl fmt::Display for FlutedClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.literals.is_empty() {
            return write!(f, "false");
        }
        let parts: Vec<String> = self.literals.iter().map(|l| l.render(self.m)).collect();
        write!(f, "{}", parts.join(" | "))
    }
}

/// Renders a clause set one clause per line, in canonical order.
pub fn clause_set_to_text(clauses: &BTreeSet<FlutedClause>) -> String {
    let mut out = String::new();
    for c in clauses {
        out.push_str(&c.to_string());
        out.push('\n');
    }
    out
}

/// Parses the one-clause-per-line text format produced by
/// [`clause_set_to_text`].  Blank lines and `#` comments are skipped.
pub fn parse_clause_set(text: &str, m: usize, sig: &Signature) -> Result<BTreeSet<FlutedClause>> {
    let mut clauses = BTreeSet::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        clauses.insert(parse_clause(line, m, sig)?);
    }
    Ok(clauses)
}

fn parse_clause(line: &str, m: usize, sig: &Signature) -> Result<FlutedClause> {
    if line == "false" {
        return Ok(FlutedClause::falsum(m));
    }
    let mut literals = BTreeSet::new();
    for piece in line.split('|') {
        let piece = piece.trim();
        let (positive, rest) = match piece.strip_prefix('~') {
            Some(r) => (false, r.trim()),
            None => (true, piece),
        };
        let formula = crate::parser::parse_formula(rest, sig)?;
        let Formula::Atom { pred, args } = formula else {
            return Err(Error::Resolution(format!("`{piece}` is not a literal")));
        };
        if args.is_empty() {
            return Err(Error::Resolution(format!(
                "zero-ary atom `{pred}` cannot appear in a fluted clause"
            )));
        }
        let start = args[0];
        if args != (start..=m).collect::<Vec<_>>() {
            return Err(Error::Resolution(format!(
                "atom `{piece}` is not a suffix atom ending at x{m}"
            )));
        }
        literals.insert(FlutedLiteral::new(pred, start, positive));
    }
    FlutedClause::new(m, literals)
}

/// Resolves two fluted clauses on a maximal-arity, non-distinguished atom.
///
/// `gamma` must contain the atom positively and `delta` negatively; the
/// resolvent is the union of the remaining literals.  Tautological
/// resolvents are returned as-is.
pub fn fluted_resolve(
    gamma: &FlutedClause,
    delta: &FlutedClause,
    atom: &str,
    sig: &Signature,
) -> Result<FlutedClause> {
    if gamma.m != delta.m {
        return Err(Error::Resolution(format!(
            "premises have different widths {} and {}",
            gamma.m, delta.m
        )));
    }
    let m = gamma.m;
    let declared = sig
        .arity(atom)
        .ok_or_else(|| Error::UnknownPredicate(atom.to_string()))?;
    if declared != m {
        return Err(Error::Resolution(format!(
            "resolution atom `{atom}` has arity {declared}, need maximal arity {m}"
        )));
    }
    if sig.is_distinguished(atom) {
        return Err(Error::Resolution(format!(
            "cannot resolve on distinguished predicate `{atom}`"
        )));
    }
    let pos = FlutedLiteral::new(atom, 1, true);
    let neg = FlutedLiteral::new(atom, 1, false);
    if !gamma.literals.contains(&pos) {
        return Err(Error::Resolution(format!(
            "first premise does not contain {atom} positively"
        )));
    }
    if !delta.literals.contains(&neg) {
        return Err(Error::Resolution(format!(
            "second premise does not contain {atom} negatively"
        )));
    }
    let mut literals = gamma.literals.clone();
    literals.remove(&pos);
    for lit in &delta.literals {
        if *lit != neg {
            literals.insert(lit.clone());
        }
    }
    Ok(FlutedClause { m, literals })
}

/// Saturates a clause set under fluted resolution.
///
/// Tautologies are kept and no subsumption is applied, so the result is the
/// literal closure: the smallest superset closed under [`fluted_resolve`].
/// Exceeding `cap` clauses aborts with a resource error.
pub fn closure_with(
    gamma: &BTreeSet<FlutedClause>,
    sig: &Signature,
    cap: usize,
) -> Result<BTreeSet<FlutedClause>> {
    let mut set: BTreeSet<FlutedClause> = gamma.clone();
    if set.len() > cap {
        return Err(Error::resource(
            "closure",
            format!("input already exceeds the {cap}-clause cap"),
        ));
    }
    let m = match set.iter().next() {
        Some(c) => c.m,
        None => return Ok(set),
    };
    if set.iter().any(|c| c.m != m) {
        return Err(Error::Resolution("mixed clause widths in closure input".into()));
    }
    let atoms: Vec<String> = sig
        .predicates()
        .filter(|(name, arity)| *arity == m && !sig.is_distinguished(name))
        .map(|(name, _)| name.to_string())
        .collect();
    let mut queue: Vec<FlutedClause> = set.iter().cloned().collect();
    while let Some(current) = queue.pop() {
        let others: Vec<FlutedClause> = set.iter().cloned().collect();
        for other in &others {
            for atom in &atoms {
                for (left, right) in [(&current, other), (other, &current)] {
                    let pos = FlutedLiteral::new(atom.clone(), 1, true);
                    let neg = FlutedLiteral::new(atom.clone(), 1, false);
                    if left.literals.contains(&pos) && right.literals.contains(&neg) {
                        let resolvent = fluted_resolve(left, right, atom, sig)?;
                        if set.insert(resolvent.clone()) {
                            if set.len() > cap {
                                return Err(Error::resource(
                                    "closure",
                                    format!("resolution closure exceeds {cap} clauses"),
                                ));
                            }
                            queue.push(resolvent);
                        }
                    }
                }
            }
        }
    }
    Ok(set)
}

/// [`closure_with`] at the default clause cap.
pub fn closure(gamma: &BTreeSet<FlutedClause>, sig: &Signature) -> Result<BTreeSet<FlutedClause>> {
    closure_with(gamma, sig, DEFAULT_CLOSURE_CAP)
}

/// Deletes every clause that mentions a non-distinguished predicate of
/// maximal arity.  Applied to a resolution closure this projects the clause
/// set onto the lower-arity part of the signature; the empty clause, having
/// no literals, always survives.
pub fn project(gamma_star: &BTreeSet<FlutedClause>, sig: &Signature) -> BTreeSet<FlutedClause> {
    gamma_star
        .iter()
        .filter(|c| {
            !c.literals
                .iter()
                .any(|l| l.start == 1 && !sig.is_distinguished(&l.pred))
        })
        .cloned()
        .collect()
}

/// A fluted type at width `m`: a total polarity assignment over all atoms
/// `pred(x_{m-a+1}, ..., x_m)` for predicates of arity `a <= m`.  Since the
/// argument suffix is determined by the arity, the predicate name is the key.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct FlutedType {
    pub m: usize,
    polarities: std::collections::BTreeMap<String, bool>,
}

impl FlutedType {
    pub fn new(m: usize) -> Self {
        FlutedType { m, polarities: std::collections::BTreeMap::new() }
    }

    pub fn set(&mut self, pred: impl Into<String>, positive: bool) {
        self.polarities.insert(pred.into(), positive);
    }

    pub fn get(&self, pred: &str) -> Option<bool> {
        self.polarities.get(pred).copied()
    }

    pub fn assigned(&self) -> impl Iterator<Item = (&String, bool)> {
        self.polarities.iter().map(|(k, &v)| (k, v))
    }

    /// True if every predicate of arity `1..=m` in `sig` is assigned.
    pub fn is_total(&self, sig: &Signature) -> bool {
        sig.predicates()
            .filter(|(_, a)| *a >= 1 && *a <= self.m)
            .all(|(name, _)| self.polarities.contains_key(name))
    }

    /// True if every predicate of arity `1..=m` except the non-distinguished
    /// ones of arity exactly `m` is assigned.
    pub fn is_total_below_max(&self, sig: &Signature) -> bool {
        sig.predicates()
            .filter(|(name, a)| {
                *a >= 1 && *a <= self.m && (*a < self.m || sig.is_distinguished(name))
            })
            .all(|(name, _)| self.polarities.contains_key(name))
    }

    /// A clause is violated when all of its literals are assigned and false.
    /// Partial types leave clauses with unassigned literals unviolated.
    pub fn violates(&self, clause: &FlutedClause) -> bool {
        clause.literals.iter().all(|lit| self.get(&lit.pred) == Some(!lit.positive))
    }

    /// The type as a conjunction of literals over `x1, ..., xm` (suffix
    /// arguments per predicate arity).
    pub fn to_formula(&self, sig: &Signature) -> Formula {
        let conjuncts = self
            .polarities
            .iter()
            .map(|(pred, &positive)| {
                let arity = sig.arity(pred).unwrap_or(0);
                let start = self.m - arity + 1;
                FlutedLiteral::new(pred.clone(), start, positive).to_formula(self.m)
            })
            .collect();
        Formula::conj(conjuncts)
    }
}

/// The fluted type realized by a tuple in a structure: for each predicate of
/// arity `a <= m` the polarity of the atom on the last `a` elements of the
/// tuple.
pub fn fluted_type_of(s: &Structure, sig: &Signature, tuple: &[usize]) -> FlutedType {
    let m = tuple.len();
    let mut tau = FlutedType::new(m);
    for (name, arity) in sig.predicates() {
        if arity >= 1 && arity <= m {
            let suffix = tuple[m - arity..].to_vec();
            tau.set(name.to_string(), s.holds(name, &suffix));
        }
    }
    tau
}

/// Like [`fluted_type_of`] but omitting non-distinguished predicates of
/// arity exactly `m`: the partial type fed to [`extend_type`] during model
/// reconstruction.
pub fn reduced_type_of(s: &Structure, sig: &Signature, tuple: &[usize]) -> FlutedType {
    let m = tuple.len();
    let mut tau = FlutedType::new(m);
    for (name, arity) in sig.predicates() {
        if arity >= 1 && arity <= m && (arity < m || sig.is_distinguished(name)) {
            let suffix = tuple[m - arity..].to_vec();
            tau.set(name.to_string(), s.holds(name, &suffix));
        }
    }
    tau
}

/// Completes a partial fluted type over the maximal-arity atoms against a
/// clause set.
///
/// `tau_minus` must be total on everything except the non-distinguished
/// predicates of arity `m`.  If `tau_minus` violates no clause of the
/// projected resolution closure of `gamma`, the completion exists; it is
/// found by walking the missing atoms in predicate-name order, trying the
/// negative polarity first, and never violating the closure.  Otherwise the
/// result is `None`.  The walk is deterministic in `(tau_minus, gamma)`.
pub fn extend_type_with(
    tau_minus: &FlutedType,
    gamma: &BTreeSet<FlutedClause>,
    sig: &Signature,
    cap: usize,
) -> Result<Option<FlutedType>> {
    let m = tau_minus.m;
    if !tau_minus.is_total_below_max(sig) {
        return Err(Error::Internal(
            "extend_type requires a type total below the maximal arity".into(),
        ));
    }
    if let Some(c) = gamma.iter().find(|c| c.m != m) {
        return Err(Error::Resolution(format!(
            "clause width {} does not match type width {m}",
            c.m
        )));
    }
    let star = closure_with(gamma, sig, cap)?;
    let projected = project(&star, sig);
    if projected.iter().any(|c| tau_minus.violates(c)) {
        return Ok(None);
    }
    let mut tau = tau_minus.clone();
    let missing: Vec<String> = sig
        .predicates()
        .filter(|(name, a)| *a == m && !sig.is_distinguished(name))
        .map(|(name, _)| name.to_string())
        .filter(|name| tau.get(name).is_none())
        .collect();
    for pred in missing {
        let mut placed = false;
        for polarity in [false, true] {
            tau.set(pred.clone(), polarity);
            if !star.iter().any(|c| tau.violates(c)) {
                placed = true;
                break;
            }
        }
        if !placed {
            // The closure is resolution-closed, so one polarity must survive;
            // reaching this point means the closure computation is wrong.
            return Err(Error::Internal(format!(
                "no consistent polarity for `{pred}` against a resolution closure"
            )));
        }
    }
    Ok(Some(tau))
}

/// [`extend_type_with`] at the default closure cap.
pub fn extend_type(
    tau_minus: &FlutedType,
    gamma: &BTreeSet<FlutedClause>,
    sig: &Signature,
) -> Result<Option<FlutedType>> {
    extend_type_with(tau_minus, gamma, sig, DEFAULT_CLOSURE_CAP)
}
